#pragma once

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "billnet/error.hpp"
#include "billnet/polynomial.hpp"
#include "billnet/projective.hpp"

namespace billnet {

/// Parameter lambda of the family member Q*_lambda.
struct QuadricParam {
  double value = 0.0;

  constexpr QuadricParam() = default;
  constexpr explicit QuadricParam(double v) : value(v) {}
  friend constexpr bool operator==(QuadricParam, QuadricParam) = default;
};

/// Confocal family  sum_i x_i^2 / (a_i - lambda) = 1  with a_1 > ... > a_d > 0.
///
/// The dual pencil acts on hyperplanes u = (u_0 : u_1 : ... : u_d) through the
/// tangency form  Phi_lambda(u) = sum_i (a_i - lambda) u_i^2 - u_0^2 .
class ConfocalFamily {
 public:
  explicit ConfocalFamily(std::vector<double> semi_axes) : a_(std::move(semi_axes)) {
    if (a_.size() < 2) throw GeometryError(ErrorKind::invalid_argument, "confocal family needs d >= 2");
    for (std::size_t i = 0; i < a_.size(); ++i) {
      if (!(a_[i] > 0.0) || !std::isfinite(a_[i])) {
        throw GeometryError(ErrorKind::invalid_argument, "semi-axes must be positive and finite");
      }
      if (i > 0 && !(a_[i] < a_[i - 1])) {
        throw GeometryError(ErrorKind::invalid_argument, "semi-axes must be strictly decreasing");
      }
    }
  }

  int dim() const { return static_cast<int>(a_.size()); }
  const std::vector<double>& semi_axes() const { return a_; }
  double semi_axis(int i) const { return a_[static_cast<std::size_t>(i)]; }

  /// Index of a semi-axis within tol (relative) of lambda, or -1.
  int colliding_axis(double lambda, double tol) const {
    for (int i = 0; i < dim(); ++i) {
      if (std::abs(lambda - a_[i]) <= tol * std::max(1.0, std::abs(a_[i]))) return i;
    }
    return -1;
  }

  void require_member(QuadricParam lambda, double tol = 1e-12) const {
    if (!std::isfinite(lambda.value) || colliding_axis(lambda.value, tol) >= 0) {
      std::ostringstream os;
      os << "lambda = " << lambda.value << " is a degenerate member of the family";
      throw GeometryError(ErrorKind::degenerate_tangency, os.str());
    }
  }

  /// Normal vector x_i / (a_i - lambda) of Q*_lambda at x (gradient / 2).
  Vec normal(QuadricParam lambda, const Vec& x) const {
    Vec n(x.size());
    for (int i = 0; i < dim(); ++i) n[i] = x[i] / (a_[i] - lambda.value);
    return n;
  }

 private:
  std::vector<double> a_;
};

/// sum x_i^2/(a_i - lambda) - 1 in the affine chart.
inline double quadric_value(const ConfocalFamily& f, QuadricParam lambda, const Vec& x) {
  f.require_member(lambda);
  if (x.size() != f.dim()) throw GeometryError(ErrorKind::invalid_argument, "dimension mismatch");
  double s = -1.0;
  for (int i = 0; i < f.dim(); ++i) s += x[i] * x[i] / (f.semi_axis(i) - lambda.value);
  return s;
}

inline double quadric_value(const ConfocalFamily& f, QuadricParam lambda, const HomPoint& x) {
  if (x.ambient_dim() != f.dim()) throw GeometryError(ErrorKind::invalid_argument, "dimension mismatch");
  if (!x.is_finite()) throw GeometryError(ErrorKind::point_at_infinity, "quadric_value needs a finite point");
  return quadric_value(f, lambda, x.affine());
}

/// Symmetric bilinear form B_lambda with B_lambda(u,u) = Phi_lambda(u).
inline double tangency_polarization(const ConfocalFamily& f, QuadricParam lambda, const DualHyperplane& u,
                                    const DualHyperplane& w) {
  if (u.ambient_dim() != f.dim() || w.ambient_dim() != f.dim()) {
    throw GeometryError(ErrorKind::invalid_argument, "dimension mismatch");
  }
  double s = -u[0] * w[0];
  for (int i = 0; i < f.dim(); ++i) s += (f.semi_axis(i) - lambda.value) * u[i + 1] * w[i + 1];
  return s;
}

/// Phi_lambda(u); zero iff u is tangent to Q*_lambda.
inline double tangency_form(const ConfocalFamily& f, QuadricParam lambda, const DualHyperplane& u) {
  if (u.ambient_dim() == f.dim() && u.is_at_infinity()) {
    throw GeometryError(ErrorKind::hyperplane_at_infinity, "tangency_form needs a nonzero spatial part");
  }
  return tangency_polarization(f, lambda, u, u);
}

/// Phi_lambda(u) relative to |u|^2; scale-free tangency residual.
inline double tangency_residual(const ConfocalFamily& f, QuadricParam lambda, const DualHyperplane& u) {
  return std::abs(tangency_form(f, lambda, u.canonical()));
}

/// The unique lambda with Phi_lambda(u) = 0.
inline QuadricParam hyperplane_caustic(const ConfocalFamily& f, const DualHyperplane& u, double tol_rank = 1e-9) {
  if (u.ambient_dim() != f.dim()) throw GeometryError(ErrorKind::invalid_argument, "dimension mismatch");
  if (u.is_at_infinity()) throw GeometryError(ErrorKind::hyperplane_at_infinity, "no caustic for the plane at infinity");
  const Vec c = u.canonical_coords();
  double num = -c[0] * c[0];
  double den = 0.0;
  for (int i = 0; i < f.dim(); ++i) {
    num += f.semi_axis(i) * c[i + 1] * c[i + 1];
    den += c[i + 1] * c[i + 1];
  }
  const double lambda = num / den;
  if (f.colliding_axis(lambda, tol_rank) >= 0) {
    std::ostringstream os;
    os << "hyperplane touches the degenerate member lambda = " << lambda;
    throw GeometryError(ErrorKind::degenerate_tangency, os.str());
  }
  return QuadricParam(lambda);
}

/// Tangent hyperplane of Q*_lambda at x: (-1 : x_1/(a_1-lambda) : ...).
inline DualHyperplane tangent_plane(const ConfocalFamily& f, QuadricParam lambda, const Vec& x) {
  f.require_member(lambda);
  Vec c(x.size() + 1);
  c[0] = -1.0;
  c.tail(x.size()) = f.normal(lambda, x);
  return DualHyperplane(std::move(c));
}

/// Pole of u with respect to the family member it touches.
inline HomPoint touching_point(const ConfocalFamily& f, const DualHyperplane& u, double tol_rank = 1e-9) {
  const QuadricParam lambda = hyperplane_caustic(f, u, tol_rank);
  const Vec c = u.canonical_coords();
  if (std::abs(c[0]) <= 1e-14) {
    throw GeometryError(ErrorKind::point_at_infinity, "hyperplane through the centre touches at infinity");
  }
  Vec x(f.dim());
  for (int i = 0; i < f.dim(); ++i) x[i] = -(f.semi_axis(i) - lambda.value) * c[i + 1] / c[0];
  return HomPoint::from_affine(x);
}

struct ConfocalRoot {
  double lambda;
  int multiplicity;
  /// lambda coincides with a semi-axis (the member is degenerate).
  bool degenerate;
};

/// prod_j (a_j - lambda) - sum_i x_i^2 prod_{j != i} (a_j - lambda).
inline Polynomial confocal_polynomial(const ConfocalFamily& f, const Vec& x) {
  Polynomial all = Polynomial::constant(1.0);
  for (int j = 0; j < f.dim(); ++j) all = all * Polynomial::shifted_negation(f.semi_axis(j));
  Polynomial result = all;
  for (int i = 0; i < f.dim(); ++i) {
    Polynomial others = Polynomial::constant(1.0);
    for (int j = 0; j < f.dim(); ++j) {
      if (j != i) others = others * Polynomial::shifted_negation(f.semi_axis(j));
    }
    result = result + others * (-x[i] * x[i]);
  }
  return result;
}

/// Parameters lambda of the confocal quadrics through x (its confocal
/// coordinates). Roots landing on a semi-axis are flagged degenerate.
inline std::vector<ConfocalRoot> point_confocal_params(const ConfocalFamily& f, const Vec& x,
                                                       double tol_rank = 1e-9) {
  if (x.size() != f.dim()) throw GeometryError(ErrorKind::invalid_argument, "dimension mismatch");
  std::vector<ConfocalRoot> out;
  for (const RealRoot& r : confocal_polynomial(f, x).real_roots()) {
    out.push_back({r.value, r.multiplicity, f.colliding_axis(r.value, std::sqrt(tol_rank)) >= 0});
  }
  return out;
}

inline std::vector<ConfocalRoot> point_confocal_params(const ConfocalFamily& f, const HomPoint& x,
                                                       double tol_rank = 1e-9) {
  return point_confocal_params(f, x.affine(), tol_rank);
}

}  // namespace billnet
