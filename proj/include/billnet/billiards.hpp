#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <vector>

#include "billnet/confocal.hpp"
#include "billnet/error.hpp"
#include "billnet/polynomial.hpp"
#include "billnet/projective.hpp"

namespace billnet {

/// Both points of a line meeting Q*_lambda, ordered by line parameter.
struct LineQuadricIntersection {
  double t_near;
  double t_far;
  Vec near;
  Vec far;
  bool tangent;
};

struct ReflectionEvent {
  HomPoint point;
  ProjLine incoming;
  ProjLine outgoing;
  DualHyperplane tangent_plane;
  QuadricParam lambda;

  Vec affine_point() const { return point.affine(); }
};

struct CausticSet {
  std::vector<RealRoot> params;

  std::vector<double> values() const {
    std::vector<double> v;
    for (const auto& r : params) {
      for (int k = 0; k < r.multiplicity; ++k) v.push_back(r.value);
    }
    return v;
  }
};

namespace detail {

struct ChordCoefficients {
  double a, b, c;  // a t^2 + 2 b t + c = 0
};

inline ChordCoefficients chord_coefficients(const ConfocalFamily& f, QuadricParam lambda, const ProjLine& line) {
  if (line.dim() != f.dim()) throw GeometryError(ErrorKind::invalid_argument, "dimension mismatch");
  ChordCoefficients k{0.0, 0.0, -1.0};
  for (int i = 0; i < f.dim(); ++i) {
    const double q = 1.0 / (f.semi_axis(i) - lambda.value);
    const double p = line.base()[i];
    const double v = line.direction()[i];
    k.a += v * v * q;
    k.b += p * v * q;
    k.c += p * p * q;
  }
  return k;
}

}  // namespace detail

/// Intersection of a line with Q*_lambda; nullopt when there is no real point.
inline std::optional<LineQuadricIntersection> intersect(const ConfocalFamily& f, QuadricParam lambda,
                                                        const ProjLine& line, double tol = 1e-12) {
  f.require_member(lambda);
  const auto [a, b, c] = detail::chord_coefficients(f, lambda, line);
  const double scale = std::abs(a) + std::abs(b) + std::abs(c);
  if (std::abs(a) <= 1e-14 * scale) {
    if (std::abs(b) <= 1e-14 * scale && std::abs(c) <= 1e-14 * scale) {
      throw GeometryError(ErrorKind::invalid_argument, "line lies on the quadric");
    }
    throw GeometryError(ErrorKind::invalid_argument, "line is parallel to an asymptotic direction");
  }
  const double disc = b * b - a * c;
  const double disc_scale = b * b + std::abs(a * c);
  bool tangent = false;
  double t1, t2;
  if (std::abs(disc) <= tol * disc_scale) {
    tangent = true;
    t1 = t2 = -b / a;
  } else if (disc < 0.0) {
    return std::nullopt;
  } else {
    const double q = -(b + std::copysign(std::sqrt(disc), b));
    if (q == 0.0) {
      t1 = t2 = 0.0;
    } else {
      t1 = q / a;
      t2 = c / q;
    }
    if (t1 > t2) std::swap(t1, t2);
  }
  return LineQuadricIntersection{t1, t2, line.point_at(t1), line.point_at(t2), tangent};
}

/// Mirror reflection of a line off Q*_lambda at the point x.
inline ReflectionEvent reflect(const ConfocalFamily& f, QuadricParam lambda, const ProjLine& line, const Vec& x,
                               double tol_rank = 1e-9, double tol_on_quadric = 1e-8) {
  f.require_member(lambda);
  const double on_quadric = std::abs(quadric_value(f, lambda, x));
  if (!(on_quadric < tol_on_quadric)) {
    std::ostringstream os;
    os << "quadric residual " << on_quadric;
    throw GeometryError(ErrorKind::not_on_quadric, os.str());
  }
  const Vec n = f.normal(lambda, x);
  const Vec& v = line.direction();
  const double vn = v.dot(n);
  if (std::abs(vn) <= tol_rank * v.norm() * n.norm()) {
    throw GeometryError(ErrorKind::tangential_incidence, "line is tangent to the quadric at the reflection point");
  }
  const Vec w = v - 2.0 * vn / n.squaredNorm() * n;
  return ReflectionEvent{HomPoint::from_affine(x), ProjLine(x, v), ProjLine(x, w), tangent_plane(f, lambda, x),
                         lambda};
}

/// G(lambda) = (B^2 - A C) prod_i (a_i - lambda), of degree d - 1; its roots are
/// the caustic parameters of the line. Built from
///   B^2 - AC = sum_i v_i^2 q_i - sum_{i<j} (p_i v_j - p_j v_i)^2 q_i q_j ,  q_i = 1/(a_i - lambda).
inline Polynomial caustic_polynomial(const ConfocalFamily& f, const ProjLine& line) {
  if (line.dim() != f.dim()) throw GeometryError(ErrorKind::invalid_argument, "dimension mismatch");
  const int d = f.dim();
  const Vec& p = line.base();
  const Vec& v = line.direction();
  auto product_except = [&](int skip1, int skip2) {
    Polynomial r = Polynomial::constant(1.0);
    for (int k = 0; k < d; ++k) {
      if (k != skip1 && k != skip2) r = r * Polynomial::shifted_negation(f.semi_axis(k));
    }
    return r;
  };
  Polynomial g;
  for (int i = 0; i < d; ++i) g = g + product_except(i, -1) * (v[i] * v[i]);
  for (int i = 0; i < d; ++i) {
    for (int j = i + 1; j < d; ++j) {
      const double m = p[i] * v[j] - p[j] * v[i];
      g = g + product_except(i, j) * (-m * m);
    }
  }
  return g;
}

/// Chasles: the d - 1 family members touched by the line.
inline CausticSet line_caustics(const ConfocalFamily& f, const ProjLine& line) {
  return CausticSet{caustic_polynomial(f, line).real_roots()};
}

/// Largest relative deviation between two caustic sets (infinity when their
/// sizes differ).
inline double caustic_drift(const CausticSet& reference, const CausticSet& other) {
  const auto a = reference.values();
  const auto b = other.values();
  if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
  double worst = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    worst = std::max(worst, std::abs(a[k] - b[k]) / std::max(1.0, std::abs(a[k])));
  }
  return worst;
}

/// First intersection strictly ahead of the line's base point.
inline std::optional<Vec> forward_intersection(const ConfocalFamily& f, QuadricParam lambda, const ProjLine& line,
                                               double tol_forward = 1e-9) {
  const auto hit = intersect(f, lambda, line);
  if (!hit) return std::nullopt;
  if (hit->t_near > tol_forward) return hit->near;
  if (hit->t_far > tol_forward) return hit->far;
  return std::nullopt;
}

/// Billiard trajectory inside Q*_lambda: `steps` successive reflections.
inline std::vector<ReflectionEvent> trajectory(const ConfocalFamily& f, QuadricParam lambda, const ProjLine& start,
                                               int steps, const Tolerances& tol = {}) {
  f.require_member(lambda);
  std::vector<ReflectionEvent> events;
  events.reserve(static_cast<std::size_t>(std::max(steps, 0)));
  ProjLine current = start;
  for (int k = 0; k < steps; ++k) {
    const auto hit = forward_intersection(f, lambda, current, tol.forward);
    if (!hit) {
      std::ostringstream os;
      os << "trajectory lost its real intersection at step " << k;
      throw GeometryError(ErrorKind::no_intersection, os.str());
    }
    events.push_back(reflect(f, lambda, current, *hit, tol.rank));
    current = events.back().outgoing;
  }
  return events;
}

}  // namespace billnet
