#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "billnet/error.hpp"

namespace billnet {

using Vec = Eigen::VectorXd;

inline Vec make_vec(std::initializer_list<double> values) {
  Vec v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v[i++] = x;
  return v;
}

namespace detail {

/// Unit norm, first non-negligible coordinate positive.
inline Vec canonicalize(const Vec& c) {
  const double n = c.norm();
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw GeometryError(ErrorKind::invalid_argument, "zero or non-finite homogeneous vector");
  }
  Vec u = c / n;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    if (std::abs(u[i]) > 1e-12) {
      if (u[i] < 0.0) u = -u;
      break;
    }
  }
  return u;
}

class HomogeneousCoords {
 public:
  explicit HomogeneousCoords(Vec coords) : coords_(std::move(coords)) {
    if (coords_.size() < 2) {
      throw GeometryError(ErrorKind::invalid_argument, "homogeneous vector needs at least 2 coordinates");
    }
    const double n = coords_.norm();
    if (!(n > 0.0) || !std::isfinite(n)) {
      throw GeometryError(ErrorKind::invalid_argument, "zero or non-finite homogeneous vector");
    }
  }

  const Vec& coords() const { return coords_; }
  Eigen::Index size() const { return coords_.size(); }
  /// Dimension d of the ambient projective space P^d.
  int ambient_dim() const { return static_cast<int>(coords_.size()) - 1; }
  double operator[](Eigen::Index i) const { return coords_[i]; }

  Vec canonical_coords() const { return canonicalize(coords_); }

  /// Equality up to nonzero scale.
  bool equivalent(const HomogeneousCoords& other, double tol = 1e-12) const {
    if (other.size() != size()) return false;
    return (canonical_coords() - other.canonical_coords()).norm() < tol;
  }

 private:
  Vec coords_;
};

}  // namespace detail

/// Point of P^d, coordinates (x_0 : x_1 : ... : x_d); x_0 = 1 in the affine chart.
class HomPoint : public detail::HomogeneousCoords {
 public:
  using HomogeneousCoords::HomogeneousCoords;

  static HomPoint from_affine(const Vec& x) {
    Vec c(x.size() + 1);
    c[0] = 1.0;
    c.tail(x.size()) = x;
    return HomPoint(std::move(c));
  }

  bool is_finite(double tol = 1e-14) const { return std::abs(coords()[0]) > tol * coords().norm(); }

  Vec affine() const {
    if (!is_finite()) throw GeometryError(ErrorKind::point_at_infinity, "no affine representative");
    return coords().tail(size() - 1) / coords()[0];
  }

  HomPoint canonical() const { return HomPoint(canonical_coords()); }
};

/// Hyperplane u_0 x_0 + sum u_i x_i = 0 of P^d, in dual coordinates.
class DualHyperplane : public detail::HomogeneousCoords {
 public:
  using HomogeneousCoords::HomogeneousCoords;

  /// The affine hyperplane offset + normal . x = 0.
  static DualHyperplane from_equation(double offset, const Vec& normal) {
    Vec c(normal.size() + 1);
    c[0] = offset;
    c.tail(normal.size()) = normal;
    return DualHyperplane(std::move(c));
  }

  Vec spatial() const { return coords().tail(size() - 1); }
  double offset() const { return coords()[0]; }

  bool is_at_infinity(double tol = 1e-14) const { return spatial().norm() <= tol * coords().norm(); }

  double incidence(const HomPoint& x) const { return coords().dot(x.coords()); }

  DualHyperplane canonical() const { return DualHyperplane(canonical_coords()); }
};

inline double direction_angle(const Vec& v, const Vec& w) {
  const Vec a = v.normalized();
  const Vec b = w.normalized();
  const double chord = std::min((a - b).norm(), (a + b).norm());
  return 2.0 * std::asin(std::min(1.0, chord / 2.0));
}

/// Finite line of E^d given by a point and a unit direction.
class ProjLine {
 public:
  ProjLine(Vec base, Vec direction) : base_(std::move(base)), dir_(std::move(direction)) {
    if (base_.size() != dir_.size() || base_.size() < 2) {
      throw GeometryError(ErrorKind::invalid_argument, "line base and direction must share a dimension >= 2");
    }
    const double n = dir_.norm();
    if (!(n > 0.0) || !std::isfinite(n) || !base_.allFinite()) {
      throw GeometryError(ErrorKind::invalid_argument, "line direction must be finite and nonzero");
    }
    dir_ /= n;
  }

  static ProjLine through(const Vec& p, const Vec& q) { return ProjLine(p, q - p); }

  const Vec& base() const { return base_; }
  const Vec& direction() const { return dir_; }
  int dim() const { return static_cast<int>(base_.size()); }

  Vec point_at(double t) const { return base_ + t * dir_; }
  HomPoint base_point() const { return HomPoint::from_affine(base_); }
  ProjLine reversed() const { return ProjLine(base_, -dir_); }

  double parameter_of(const Vec& x) const { return (x - base_).dot(dir_); }

  double distance_to(const Vec& x) const {
    const Vec r = x - base_;
    return (r - r.dot(dir_) * dir_).norm();
  }

  /// Plücker coordinates: the 2x2 minors of the rows (1, p) and (0, v).
  Vec plucker() const {
    const Eigen::Index n = base_.size() + 1;
    Vec x(n), y(n);
    x[0] = 1.0;
    x.tail(base_.size()) = base_;
    y[0] = 0.0;
    y.tail(base_.size()) = dir_;
    Vec out(n * (n - 1) / 2);
    Eigen::Index k = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = i + 1; j < n; ++j) out[k++] = x[i] * y[j] - x[j] * y[i];
    }
    return out;
  }

  /// Same line up to base choice and direction sign.
  bool same_as(const ProjLine& other, double tol) const {
    return direction_angle(dir_, other.dir_) < tol && other.distance_to(base_) < tol;
  }

 private:
  Vec base_;
  Vec dir_;
};

struct ClosestApproach {
  Vec midpoint;
  double distance;
  double t_first;
  double t_second;
};

/// Closest points of two lines; nullopt when they are parallel.
inline std::optional<ClosestApproach> closest_approach(const ProjLine& a, const ProjLine& b,
                                                       double parallel_tol = 1e-12) {
  const Vec& u = a.direction();
  const Vec& v = b.direction();
  const Vec w = a.base() - b.base();
  const double uv = u.dot(v);
  const double denom = 1.0 - uv * uv;
  if (denom < parallel_tol) return std::nullopt;
  const double du = u.dot(w);
  const double dv = v.dot(w);
  const double s = (uv * dv - du) / denom;
  const double t = (dv - uv * du) / denom;
  const Vec pa = a.point_at(s);
  const Vec pb = b.point_at(t);
  return ClosestApproach{0.5 * (pa + pb), (pa - pb).norm(), s, t};
}

namespace detail {

template <class H>
double rank2_residual(std::span<const H> elems) {
  if (elems.size() < 3) {
    throw GeometryError(ErrorKind::invalid_argument, "rank test needs at least 3 elements");
  }
  const Eigen::Index cols = elems.front().size();
  Eigen::MatrixXd m(static_cast<Eigen::Index>(elems.size()), cols);
  for (std::size_t r = 0; r < elems.size(); ++r) {
    if (elems[r].size() != cols) {
      throw GeometryError(ErrorKind::invalid_argument, "rank test on mixed dimensions");
    }
    m.row(static_cast<Eigen::Index>(r)) = elems[r].canonical_coords().transpose();
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const Vec& sv = svd.singularValues();
  if (sv.size() < 3) return 0.0;
  return sv[2] / sv[0];
}

inline double det2(const Eigen::Vector2d& p, const Eigen::Vector2d& q) { return p[0] * q[1] - p[1] * q[0]; }

/// Coordinates (mu, nu) of each element in the basis (first, second) of
/// their common rank-2 span, by least squares on canonical coordinates.
template <class H>
std::vector<Eigen::Vector2d> range_parameters(std::span<const H> elems, double tol_rank,
                                              ErrorKind not_in_range) {
  const double res = rank2_residual(elems);
  if (!(res < tol_rank)) {
    throw GeometryError(not_in_range, "rank residual " + std::to_string(res));
  }
  const Eigen::Index n = elems.front().size();
  Eigen::MatrixXd basis(n, 2);
  basis.col(0) = elems[0].canonical_coords();
  basis.col(1) = elems[1].canonical_coords();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(basis);
  if (svd.singularValues()[1] < tol_rank * svd.singularValues()[0]) {
    throw GeometryError(ErrorKind::coincident, "basis elements 1 and 2 coincide");
  }
  const auto qr = basis.colPivHouseholderQr();
  std::vector<Eigen::Vector2d> params;
  params.reserve(elems.size());
  for (const auto& e : elems) params.emplace_back(qr.solve(e.canonical_coords()));
  params[0] = Eigen::Vector2d(1.0, 0.0);
  params[1] = Eigen::Vector2d(0.0, 1.0);
  for (std::size_t i = 0; i < params.size(); ++i) {
    for (std::size_t j = i + 1; j < params.size(); ++j) {
      const double s = std::abs(det2(params[i], params[j])) / (params[i].norm() * params[j].norm());
      if (s < tol_rank) {
        throw GeometryError(ErrorKind::coincident,
                            "elements " + std::to_string(i + 1) + " and " + std::to_string(j + 1) + " coincide");
      }
    }
  }
  return params;
}

/// CR(a,b;c,d) = ((a-c)(b-d)) / ((a-d)(b-c)) on projective parameters.
inline double cross_ratio_of_parameters(const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                                        const Eigen::Vector2d& c, const Eigen::Vector2d& d) {
  return (det2(a, c) * det2(b, d)) / (det2(a, d) * det2(b, c));
}

}  // namespace detail

/// sigma_3 / sigma_1 of the stacked canonical coordinates; 0 iff collinear.
inline double collinearity_residual(std::span<const HomPoint> points) { return detail::rank2_residual(points); }
inline double collinearity_residual(std::initializer_list<HomPoint> points) {
  return detail::rank2_residual(std::span<const HomPoint>(points.begin(), points.size()));
}

/// sigma_3 / sigma_1 in dual space; 0 iff the hyperplanes share a pencil.
inline double pencil_residual(std::span<const DualHyperplane> planes) { return detail::rank2_residual(planes); }
inline double pencil_residual(std::initializer_list<DualHyperplane> planes) {
  return detail::rank2_residual(std::span<const DualHyperplane>(planes.begin(), planes.size()));
}

/// Cross-ratio CR(h1,h2;h3,h4) of four hyperplanes of one pencil.
/// Invariant under rescaling of each plane and under projective maps.
inline double cross_ratio_pencil(const DualHyperplane& h1, const DualHyperplane& h2, const DualHyperplane& h3,
                                 const DualHyperplane& h4, double tol_rank = 1e-9) {
  const std::vector<DualHyperplane> hs{h1, h2, h3, h4};
  const auto p = detail::range_parameters(std::span<const DualHyperplane>(hs), tol_rank, ErrorKind::not_in_pencil);
  return detail::cross_ratio_of_parameters(p[0], p[1], p[2], p[3]);
}

/// Cross-ratio CR(p1,p2;p3,p4) of four collinear points.
inline double cross_ratio_collinear(const HomPoint& p1, const HomPoint& p2, const HomPoint& p3, const HomPoint& p4,
                                    double tol_rank = 1e-9) {
  const std::vector<HomPoint> ps{p1, p2, p3, p4};
  const auto p = detail::range_parameters(std::span<const HomPoint>(ps), tol_rank, ErrorKind::not_collinear);
  return detail::cross_ratio_of_parameters(p[0], p[1], p[2], p[3]);
}

}  // namespace billnet
