#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "billnet/billiards.hpp"
#include "billnet/confocal.hpp"
#include "billnet/error.hpp"
#include "billnet/lattice.hpp"
#include "billnet/projective.hpp"

namespace billnet {

/// Lines l, l1, l2, l12 with l|l1 and l2|l12 reflected off Q*_alpha (at A, A1)
/// and l|l2, l1|l12 off Q*_beta (at B, B1); the four tangent planes share a pencil.
struct DRConfig {
  ProjLine line, line1, line2, line12;
  QuadricParam alpha, beta;
  DualHyperplane plane_a, plane_b, plane_b1, plane_a1;
  HomPoint a, b, b1, a1;
  double pencil_residual;
  /// Angle between the two independently constructed l12 (radians).
  double closure_angle;
  /// Distance of each constructed l12 from the other one.
  double closure_offset;
};

inline constexpr double kClosureTolerance = 1e-8;

namespace detail {

inline double relative_gap(const Vec& x, const Vec& y) { return (x - y).norm() / std::max(1.0, x.norm()); }

struct BranchChoice {
  Vec point;
  double residual;
};

/// Of the two points of `line` on Q*_lambda, the one whose tangent plane
/// completes (plane_a, plane_b) to a pencil.
inline BranchChoice select_pencil_branch(const ConfocalFamily& f, QuadricParam lambda, const ProjLine& line,
                                         const DualHyperplane& plane_a, const DualHyperplane& plane_b,
                                         double tol_rank, const char* what) {
  const auto hit = intersect(f, lambda, line);
  if (!hit) {
    std::ostringstream os;
    os << what << " has no real intersection with Q*_" << lambda.value;
    throw GeometryError(ErrorKind::no_intersection, os.str());
  }
  std::vector<std::pair<double, Vec>> candidates{{hit->t_near, hit->near}};
  if (!hit->tangent) candidates.emplace_back(hit->t_far, hit->far);
  std::optional<BranchChoice> best;
  std::ostringstream residuals;
  for (const auto& [t, x] : candidates) {
    const double r = pencil_residual({plane_a, plane_b, tangent_plane(f, lambda, x)});
    residuals << ' ' << r;
    // candidates arrive ordered by t, so ties keep the smaller parameter
    if (r < tol_rank && (!best || r < best->residual)) best = BranchChoice{x, r};
  }
  if (!best) {
    std::ostringstream os;
    os << "no branch of " << what << " on Q*_" << lambda.value << " completes the pencil; residuals" << residuals.str();
    throw GeometryError(ErrorKind::branch_failure, os.str());
  }
  return *best;
}

}  // namespace detail

/// Completes the double reflection configuration of l at A (on Q*_alpha) and
/// B (on Q*_beta). Both construction orders of l12 are carried out and must agree.
inline DRConfig double_reflection(const ConfocalFamily& f, QuadricParam alpha, QuadricParam beta,
                                  const ProjLine& line, const Vec& a, const Vec& b, const Tolerances& tol = {}) {
  f.require_member(alpha);
  f.require_member(beta);
  if (alpha == beta) throw GeometryError(ErrorKind::invalid_argument, "double reflection needs two distinct quadrics");
  if (line.distance_to(a) > 1e-8 * std::max(1.0, a.norm()) || line.distance_to(b) > 1e-8 * std::max(1.0, b.norm())) {
    throw GeometryError(ErrorKind::invalid_argument, "reflection points must lie on the line");
  }
  const ReflectionEvent at_a = reflect(f, alpha, line, a, tol.rank);
  const ReflectionEvent at_b = reflect(f, beta, line, b, tol.rank);
  const ProjLine& line1 = at_a.outgoing;
  const ProjLine& line2 = at_b.outgoing;

  const auto b1 = detail::select_pencil_branch(f, beta, line1, at_a.tangent_plane, at_b.tangent_plane, tol.rank, "l1");
  const ReflectionEvent at_b1 = reflect(f, beta, line1, b1.point, tol.rank);
  const auto a1 = detail::select_pencil_branch(f, alpha, line2, at_a.tangent_plane, at_b.tangent_plane, tol.rank, "l2");
  const ReflectionEvent at_a1 = reflect(f, alpha, line2, a1.point, tol.rank);

  const ProjLine& via_b1 = at_b1.outgoing;
  const ProjLine& via_a1 = at_a1.outgoing;
  const double angle = direction_angle(via_b1.direction(), via_a1.direction());
  const double offset = std::max(via_a1.distance_to(b1.point) / std::max(1.0, b1.point.norm()),
                                 via_b1.distance_to(a1.point) / std::max(1.0, a1.point.norm()));
  if (!(angle < kClosureTolerance) || !(offset < kClosureTolerance)) {
    std::ostringstream os;
    os << "the two constructions of l12 disagree: angle " << angle << ", offset " << offset;
    throw GeometryError(ErrorKind::closure_mismatch, os.str());
  }
  const double pencil =
      pencil_residual({at_a.tangent_plane, at_b.tangent_plane, at_b1.tangent_plane, at_a1.tangent_plane});
  if (!(pencil < tol.rank)) {
    std::ostringstream os;
    os << "tangent planes residual " << pencil;
    throw GeometryError(ErrorKind::not_in_pencil, os.str());
  }
  return DRConfig{line,
                  line1,
                  line2,
                  via_b1,
                  alpha,
                  beta,
                  at_a.tangent_plane,
                  at_b.tangent_plane,
                  at_b1.tangent_plane,
                  at_a1.tangent_plane,
                  at_a.point,
                  at_b.point,
                  at_b1.point,
                  at_a1.point,
                  pencil,
                  angle,
                  offset};
}

/// Finite window prod_j [0, N_j] of a double reflection net.
struct DRNet {
  std::vector<QuadricParam> lambdas;
  std::vector<int> window;
  std::map<LatticePoint, ProjLine> lines;
  /// Reflection point of each edge, keyed by the edge midpoint.
  std::map<MidVertex, Vec> edge_points;

  int m() const { return static_cast<int>(window.size()); }
  const ProjLine& line(const LatticePoint& n) const { return lines.at(n); }
};

/// Construction failure annotated with the lattice vertex where it happened.
class NetConstructionError : public GeometryError {
 public:
  NetConstructionError(const GeometryError& cause, LatticePoint vertex)
      : GeometryError(cause.kind(), std::string("at vertex ") + format_point(vertex) + ": " + strip(cause.what())),
        vertex_(std::move(vertex)) {}

  const LatticePoint& vertex() const { return vertex_; }

 private:
  static std::string strip(const std::string& msg) {
    const auto pos = msg.find(": ");
    return pos == std::string::npos ? msg : msg.substr(pos + 2);
  }

  LatticePoint vertex_;
};

struct BuildOptions {
  Tolerances tol{};
  /// Face preference: a vertex is filled from the 2-face spanned by the first
  /// two directions of this permutation along which it can be reached.
  /// Empty means the identity order.
  std::vector<int> fill_priority{};
};

namespace detail {

inline void validate_net_input(const ConfocalFamily& f, const std::vector<QuadricParam>& lambdas,
                               const ProjLine& initial, const std::vector<int>& window) {
  if (window.empty()) throw GeometryError(ErrorKind::invalid_argument, "net needs m >= 1");
  if (lambdas.size() != window.size()) {
    throw GeometryError(ErrorKind::invalid_argument, "one quadric parameter per lattice direction is required");
  }
  for (int n : window) {
    if (n < 0) throw GeometryError(ErrorKind::invalid_argument, "window extents must be non-negative");
  }
  if (initial.dim() != f.dim()) throw GeometryError(ErrorKind::invalid_argument, "line dimension mismatch");
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    f.require_member(lambdas[i]);
    for (std::size_t j = 0; j < i; ++j) {
      if (lambdas[i] == lambdas[j]) {
        throw GeometryError(ErrorKind::invalid_argument, "lambdas must be pairwise distinct");
      }
    }
  }
}

inline std::vector<int> fill_priority(const BuildOptions& options, int m) {
  std::vector<int> p = options.fill_priority;
  if (p.empty()) {
    p.resize(static_cast<std::size_t>(m));
    std::iota(p.begin(), p.end(), 0);
  }
  std::vector<int> sorted = p;
  std::sort(sorted.begin(), sorted.end());
  for (int k = 0; k < m; ++k) {
    if (static_cast<int>(sorted.size()) != m || sorted[static_cast<std::size_t>(k)] != k) {
      throw GeometryError(ErrorKind::invalid_argument, "fill priority must be a permutation of the directions");
    }
  }
  return p;
}

/// Builds the net; `first_points[j]`, when set, replaces forward selection of
/// the reflection point on the edge (0, e_j).
inline DRNet build_net_seeded(const ConfocalFamily& f, const std::vector<QuadricParam>& lambdas,
                              const ProjLine& initial, const std::vector<int>& window,
                              const std::vector<std::optional<Vec>>& first_points, const BuildOptions& options) {
  validate_net_input(f, lambdas, initial, window);
  const int m = static_cast<int>(window.size());
  const std::vector<int> priority = fill_priority(options, m);
  const Tolerances& tol = options.tol;
  const LatticePoint origin(static_cast<std::size_t>(m), 0);

  DRNet net{lambdas, window, {}, {}};
  net.lines.emplace(origin, initial);

  for (int j = 0; j < m; ++j) {
    try {
      const auto hit = intersect(f, lambdas[j], initial);
      if (!hit) {
        std::ostringstream os;
        os << "initial line misses Q*_" << lambdas[j].value;
        throw GeometryError(ErrorKind::no_intersection, os.str());
      }
      if (hit->tangent) {
        std::ostringstream os;
        os << "initial line is tangent to Q*_" << lambdas[j].value;
        throw GeometryError(ErrorKind::tangential_incidence, os.str());
      }
    } catch (const GeometryError& e) {
      throw NetConstructionError(e, origin);
    }
  }

  // axes: billiard trajectories with forward branch selection
  for (int j = 0; j < m; ++j) {
    LatticePoint prev = origin;
    for (int k = 1; k <= window[static_cast<std::size_t>(j)]; ++k) {
      const LatticePoint n = shifted(prev, j);
      try {
        const ProjLine& current = net.lines.at(prev);
        std::optional<Vec> hit;
        if (k == 1 && static_cast<std::size_t>(j) < first_points.size() && first_points[static_cast<std::size_t>(j)]) {
          hit = first_points[static_cast<std::size_t>(j)];
        } else {
          hit = forward_intersection(f, lambdas[j], current, tol.forward);
        }
        if (!hit) {
          throw GeometryError(ErrorKind::no_intersection, "no forward intersection along the axis");
        }
        const ReflectionEvent ev = reflect(f, lambdas[j], current, *hit, tol.rank);
        net.lines.emplace(n, ev.outgoing);
        net.edge_points.emplace(MidVertex::of_edge(prev, j), *hit);
      } catch (const GeometryError& e) {
        throw NetConstructionError(e, n);
      }
      prev = n;
    }
  }

  // 2-faces: double reflection with pencil branch selection
  for_each_lattice_point(window, [&](const LatticePoint& n) {
    std::vector<int> reachable;
    for (int dir : priority) {
      if (n[static_cast<std::size_t>(dir)] >= 1) reachable.push_back(dir);
    }
    if (reachable.size() < 2) return;
    try {
      bool first = true;
      for (std::size_t p = 0; p < reachable.size(); ++p) {
        for (std::size_t q = p + 1; q < reachable.size(); ++q) {
          const int i = reachable[p];
          const int j = reachable[q];
          const LatticePoint base = shifted(shifted(n, i, -1), j, -1);
          const DRConfig cfg =
              double_reflection(f, lambdas[i], lambdas[j], net.lines.at(base),
                                net.edge_points.at(MidVertex::of_edge(base, i)),
                                net.edge_points.at(MidVertex::of_edge(base, j)), tol);
          if (first) {
            net.lines.emplace(n, cfg.line12);
            first = false;
          } else if (!net.lines.at(n).same_as(cfg.line12, kClosureTolerance)) {
            std::ostringstream os;
            os << "faces (" << i + 1 << "," << j + 1 << ") and the primary face give different lines";
            throw GeometryError(ErrorKind::closure_mismatch, os.str());
          }
          const std::pair<MidVertex, Vec> incoming[] = {
              {MidVertex::of_edge(shifted(base, i), j), cfg.b1.affine()},
              {MidVertex::of_edge(shifted(base, j), i), cfg.a1.affine()}};
          for (const auto& [edge, x] : incoming) {
            const auto [it, inserted] = net.edge_points.emplace(edge, x);
            if (!inserted && relative_gap(it->second, x) > kClosureTolerance) {
              throw GeometryError(ErrorKind::closure_mismatch, "faces disagree on the reflection point of an edge");
            }
          }
        }
      }
      // the pencil branch must continue each row as a billiard trajectory
      for (int k : reachable) {
        if (n[static_cast<std::size_t>(k)] < 2) continue;
        const LatticePoint prev = shifted(n, k, -1);
        const Vec& here = net.edge_points.at(MidVertex::of_edge(prev, k));
        const Vec& before = net.edge_points.at(MidVertex::of_edge(shifted(prev, k, -1), k));
        if (relative_gap(here, before) < 1e-9) {
          std::ostringstream os;
          os << "pencil branch re-selects the previous reflection point along direction " << k + 1;
          throw GeometryError(ErrorKind::branch_failure, os.str());
        }
      }
    } catch (const NetConstructionError&) {
      throw;
    } catch (const GeometryError& e) {
      throw NetConstructionError(e, n);
    }
  });
  return net;
}

}  // namespace detail

/// Double reflection net on prod_j [0, N_j] with phi(0) = initial.
inline DRNet build_net(const ConfocalFamily& f, const std::vector<QuadricParam>& lambdas, const ProjLine& initial,
                       const std::vector<int>& window, const BuildOptions& options = {}) {
  return detail::build_net_seeded(f, lambdas, initial, window, {}, options);
}

struct EdgeCheck {
  MidVertex edge;
  double quadric;    // |quadric_value| at the reflection point
  double line_gap;   // distance between the two lines (relative)
  double mirror;     // angle between the reflected and the stored direction
  bool ok;
};

struct QuadCheck {
  LatticePoint base;
  int i, j;  // 0-based face directions
  double pencil;
  bool ok;
};

struct AxisCheck {
  LatticePoint start;
  int direction;
  double caustic_drift;
  bool ok;
};

struct NetReport {
  std::vector<EdgeCheck> edges;
  std::vector<QuadCheck> quads;
  std::vector<AxisCheck> axes;
  bool pass = true;

  double max_edge_residual() const {
    double r = 0.0;
    for (const auto& e : edges) r = std::max({r, e.quadric, e.line_gap, e.mirror});
    return r;
  }
  double max_pencil_residual() const {
    double r = 0.0;
    for (const auto& q : quads) r = std::max(r, q.pencil);
    return r;
  }
  double max_caustic_drift() const {
    double r = 0.0;
    for (const auto& a : axes) r = std::max(r, a.caustic_drift);
    return r;
  }
  std::optional<QuadCheck> first_failing_quad() const {
    for (const auto& q : quads) {
      if (!q.ok) return q;
    }
    return std::nullopt;
  }
};

namespace detail {

/// Reflection point recomputed from the two lines of an edge.
inline std::optional<ClosestApproach> edge_meeting(const DRNet& net, const MidVertex& edge) {
  return closest_approach(net.line(edge.edge_start()), net.line(edge.edge_end()));
}

}  // namespace detail

/// Independent check of every net axiom from the lines alone.
inline NetReport verify_net(const ConfocalFamily& f, const DRNet& net, const Tolerances& tol = {}) {
  NetReport report;
  const int m = net.m();
  std::map<MidVertex, std::optional<Vec>> meeting;
  constexpr double inf = std::numeric_limits<double>::infinity();

  for_each_lattice_point(net.window, [&](const LatticePoint& n0) {
    for (int i = 0; i < m; ++i) {
      const LatticePoint n1 = shifted(n0, i);
      if (!in_window(n1, net.window)) continue;
      const MidVertex edge = MidVertex::of_edge(n0, i);
      EdgeCheck check{edge, inf, inf, inf, false};
      const auto meet = detail::edge_meeting(net, edge);
      if (meet) {
        const Vec& x = meet->midpoint;
        check.line_gap = meet->distance / std::max(1.0, x.norm());
        check.quadric = std::abs(quadric_value(f, net.lambdas[i], x));
        try {
          const ReflectionEvent ev = reflect(f, net.lambdas[i], net.line(n0), x, tol.rank, inf);
          check.mirror = direction_angle(ev.outgoing.direction(), net.line(n1).direction());
        } catch (const GeometryError&) {
          check.mirror = inf;
        }
        meeting.emplace(edge, x);
      } else {
        meeting.emplace(edge, std::nullopt);
      }
      check.ok = check.quadric < tol.caustic && check.line_gap < tol.caustic && check.mirror < tol.caustic;
      report.pass = report.pass && check.ok;
      report.edges.push_back(std::move(check));
    }
  });

  for_each_lattice_point(net.window, [&](const LatticePoint& base) {
    for (int i = 0; i < m; ++i) {
      for (int j = i + 1; j < m; ++j) {
        const LatticePoint far = shifted(shifted(base, i), j);
        if (!in_window(far, net.window)) continue;
        const MidVertex edges[] = {MidVertex::of_edge(base, i), MidVertex::of_edge(base, j),
                                   MidVertex::of_edge(shifted(base, i), j), MidVertex::of_edge(shifted(base, j), i)};
        std::vector<DualHyperplane> planes;
        for (const auto& e : edges) {
          const auto& x = meeting.at(e);
          if (!x) break;
          planes.push_back(tangent_plane(f, net.lambdas[e.direction()], *x));
        }
        QuadCheck check{base, i, j, inf, false};
        if (planes.size() == 4) check.pencil = pencil_residual(std::span<const DualHyperplane>(planes));
        check.ok = check.pencil < tol.rank;
        report.pass = report.pass && check.ok;
        report.quads.push_back(std::move(check));
      }
    }
  });

  for (int j = 0; j < m; ++j) {
    for_each_lattice_point(net.window, [&](const LatticePoint& start) {
      if (start[static_cast<std::size_t>(j)] != 0 || net.window[static_cast<std::size_t>(j)] == 0) return;
      const CausticSet reference = line_caustics(f, net.line(start));
      double drift = 0.0;
      for (LatticePoint n = shifted(start, j); in_window(n, net.window); n = shifted(n, j)) {
        drift = std::max(drift, caustic_drift(reference, line_caustics(f, net.line(n))));
      }
      AxisCheck check{start, j, drift, drift < tol.caustic};
      report.pass = report.pass && check.ok;
      report.axes.push_back(std::move(check));
    });
  }
  return report;
}

}  // namespace billnet
