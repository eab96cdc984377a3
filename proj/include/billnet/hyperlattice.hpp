#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "billnet/billiards.hpp"
#include "billnet/confocal.hpp"
#include "billnet/drnet.hpp"
#include "billnet/error.hpp"
#include "billnet/lattice.hpp"
#include "billnet/projective.hpp"

namespace billnet {

enum class CellKind { cross_polytope, rectified_cube };

inline const char* to_string(CellKind kind) {
  return kind == CellKind::cross_polytope ? "cross_polytope" : "rectified_cube";
}

/// Cell of the honeycomb of M^m. Square faces list vertex indices in cyclic
/// order, so entries 0/2 and 1/3 are opposite.
struct HoneycombCell {
  CellKind kind;
  /// Doubled centre (cross polytope) or doubled min-corner (rectified cube).
  std::vector<int> anchor;
  std::vector<MidVertex> vertices;
  std::vector<std::array<int, 4>> square_faces;
  std::vector<std::array<int, 3>> triangle_faces;
  bool partial = false;

  std::array<MidVertex, 4> square(std::size_t k) const {
    const auto& f = square_faces.at(k);
    return {vertices[static_cast<std::size_t>(f[0])], vertices[static_cast<std::size_t>(f[1])],
            vertices[static_cast<std::size_t>(f[2])], vertices[static_cast<std::size_t>(f[3])]};
  }
};

struct Honeycomb {
  std::vector<int> window;
  std::vector<MidVertex> vertices;
  std::vector<HoneycombCell> cells;
  /// Cross polytopes cut by the window boundary; never verified.
  std::vector<HoneycombCell> partial_cells;

  int m() const { return static_cast<int>(window.size()); }
};

namespace detail {

inline HoneycombCell rectified_cube(const LatticePoint& corner) {
  const int m = static_cast<int>(corner.size());
  HoneycombCell cell{CellKind::rectified_cube, {}, {}, {}, {}, false};
  for (int v : corner) cell.anchor.push_back(2 * v);
  std::map<MidVertex, int> index;
  auto edge_at = [&](const LatticePoint& offset, int dir) {
    LatticePoint start = corner;
    for (std::size_t k = 0; k < start.size(); ++k) start[k] += offset[k];
    const MidVertex v = MidVertex::of_edge(start, dir);
    auto it = index.find(v);
    if (it == index.end()) {
      it = index.emplace(v, static_cast<int>(cell.vertices.size())).first;
      cell.vertices.push_back(v);
    }
    return it->second;
  };
  for (int dir = 0; dir < m; ++dir) {
    for (unsigned bits = 0; bits < (1u << m); ++bits) {
      if (bits & (1u << dir)) continue;
      LatticePoint offset(corner.size());
      for (int k = 0; k < m; ++k) offset[static_cast<std::size_t>(k)] = (bits >> k) & 1u;
      edge_at(offset, dir);
    }
  }
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) {
      for (unsigned bits = 0; bits < (1u << m); ++bits) {
        if (bits & ((1u << i) | (1u << j))) continue;
        LatticePoint c(corner.size());
        for (int k = 0; k < m; ++k) c[static_cast<std::size_t>(k)] = (bits >> k) & 1u;
        cell.square_faces.push_back(
            {edge_at(c, i), edge_at(shifted(c, i), j), edge_at(shifted(c, j), i), edge_at(c, j)});
      }
    }
  }
  if (m == 3) {
    for (unsigned bits = 0; bits < 8u; ++bits) {
      std::array<int, 3> tri{};
      for (int dir = 0; dir < 3; ++dir) {
        LatticePoint start(3);
        for (int k = 0; k < 3; ++k) start[static_cast<std::size_t>(k)] = (bits >> k) & 1u;
        if (start[static_cast<std::size_t>(dir)] == 1) start[static_cast<std::size_t>(dir)] = 0;
        tri[static_cast<std::size_t>(dir)] = edge_at(start, dir);
      }
      cell.triangle_faces.push_back(tri);
    }
  }
  return cell;
}

}  // namespace detail

/// Vertices of M^m inside the window and every honeycomb cell touching it.
inline Honeycomb enumerate_lattice(const std::vector<int>& window) {
  const int m = static_cast<int>(window.size());
  if (m != 2 && m != 3) throw GeometryError(ErrorKind::unsupported, "honeycomb enumeration supports m = 2 and m = 3");
  for (int n : window) {
    if (n < 0) throw GeometryError(ErrorKind::invalid_argument, "window extents must be non-negative");
  }
  Honeycomb h{window, {}, {}, {}};
  std::set<MidVertex> all;
  for_each_lattice_point(window, [&](const LatticePoint& n) {
    for (int i = 0; i < m; ++i) {
      if (in_window(shifted(n, i), window)) all.insert(MidVertex::of_edge(n, i));
    }
  });
  h.vertices.assign(all.begin(), all.end());

  for_each_lattice_point(window, [&](const LatticePoint& n) {
    bool cube_fits = true;
    for (int i = 0; i < m; ++i) cube_fits = cube_fits && n[static_cast<std::size_t>(i)] < window[static_cast<std::size_t>(i)];
    if (cube_fits) h.cells.push_back(detail::rectified_cube(n));
  });

  for_each_lattice_point(window, [&](const LatticePoint& n) {
    HoneycombCell cell{CellKind::cross_polytope, {}, {}, {}, {}, false};
    for (int v : n) cell.anchor.push_back(2 * v);
    for (int i = 0; i < m; ++i) {
      for (int side : {-1, 1}) {
        std::vector<int> d = cell.anchor;
        d[static_cast<std::size_t>(i)] += side;
        const MidVertex v(d);
        if (all.count(v)) {
          cell.vertices.push_back(v);
        } else {
          cell.partial = true;
        }
      }
    }
    if (cell.vertices.empty()) return;
    if (cell.partial) {
      h.partial_cells.push_back(std::move(cell));
    } else {
      h.cells.push_back(std::move(cell));
    }
  });
  return h;
}

/// Hyperplane map H and point map P on the midpoint lattice.
struct HPMaps {
  std::vector<QuadricParam> lambdas;
  std::map<MidVertex, DualHyperplane> H;
  std::map<MidVertex, HomPoint> P;

  const DualHyperplane& plane(const MidVertex& v) const { return H.at(v); }
  const HomPoint& point(const MidVertex& v) const { return P.at(v); }
  bool contains(const MidVertex& v) const { return H.count(v) && P.count(v); }
};

/// H(v): tangent plane at the reflection point of the edge v; P(v): its
/// touching point. The net must pass verify_net.
inline HPMaps extract_maps(const ConfocalFamily& f, const DRNet& net, const Tolerances& tol = {}) {
  const NetReport report = verify_net(f, net, tol);
  if (!report.pass) {
    std::ostringstream os;
    os << "net fails verification (edge " << report.max_edge_residual() << ", pencil " << report.max_pencil_residual()
       << ", caustic " << report.max_caustic_drift() << ")";
    throw GeometryError(ErrorKind::invalid_argument, os.str());
  }
  HPMaps maps{net.lambdas, {}, {}};
  for (const EdgeCheck& e : report.edges) {
    const auto stored = net.edge_points.find(e.edge);
    Vec x;
    if (stored != net.edge_points.end()) {
      x = stored->second;
    } else {
      x = closest_approach(net.line(e.edge.edge_start()), net.line(e.edge.edge_end()))->midpoint;
    }
    const DualHyperplane h = tangent_plane(f, net.lambdas[e.edge.direction()], x).canonical();
    maps.P.emplace(e.edge, touching_point(f, h, tol.rank).canonical());
    maps.H.emplace(e.edge, h);
  }
  return maps;
}

namespace detail {

inline void require_complete(const HPMaps& maps, const std::vector<MidVertex>& vertices, const char* what) {
  for (const auto& v : vertices) {
    if (!maps.contains(v)) {
      throw GeometryError(ErrorKind::invalid_argument,
                          std::string(what) + " is incomplete: no value at " + format_point(v.dcoords()));
    }
  }
}

}  // namespace detail

struct CrossPolytopeReport {
  std::vector<int> anchor;
  double collinearity = std::numeric_limits<double>::infinity();
  /// Largest |quadric_value(lambda_i, P)| over the vertices (opposite pairs share lambda_i).
  double same_quadric = std::numeric_limits<double>::infinity();
  /// m = 2 only: CR(P(n - e1/2), P(n + e1/2); P(n - e2/2), P(n + e2/2)). Reported, not asserted.
  std::optional<double> cross_ratio;
  bool pass = false;
};

inline CrossPolytopeReport verify_cross_polytope(const ConfocalFamily& f, const HPMaps& maps,
                                                 const HoneycombCell& cell, const Tolerances& tol = {}) {
  if (cell.kind != CellKind::cross_polytope) {
    throw GeometryError(ErrorKind::invalid_argument, "verify_cross_polytope needs a cross polytope");
  }
  const int m = static_cast<int>(cell.anchor.size());
  if (cell.partial || static_cast<int>(cell.vertices.size()) != 2 * m) {
    throw GeometryError(ErrorKind::invalid_argument, "cross polytope at " + format_point(cell.anchor) + " is incomplete");
  }
  detail::require_complete(maps, cell.vertices, "cross polytope");
  CrossPolytopeReport r;
  r.anchor = cell.anchor;
  std::vector<HomPoint> pts;
  r.same_quadric = 0.0;
  for (const auto& v : cell.vertices) {
    pts.push_back(maps.point(v));
    r.same_quadric =
        std::max(r.same_quadric, std::abs(quadric_value(f, maps.lambdas[v.direction()], maps.point(v))));
  }
  r.collinearity = collinearity_residual(std::span<const HomPoint>(pts));
  if (m == 2) {
    // vertices come as (n - e1, n + e1, n - e2, n + e2)
    try {
      r.cross_ratio = cross_ratio_collinear(pts[0], pts[1], pts[2], pts[3], tol.rank);
    } catch (const GeometryError&) {
      r.cross_ratio = std::nullopt;
    }
  }
  r.pass = r.collinearity < tol.rank && r.same_quadric < 1e-10;
  return r;
}

struct SquareFaceReport {
  std::array<MidVertex, 4> face;
  double pencil = std::numeric_limits<double>::infinity();
  /// Largest scale-free tangency residual of each plane to its own quadric.
  double tangency = std::numeric_limits<double>::infinity();
  /// CR(H(v0), H(v2); H(v1), H(v3)): opposite vertices as conjugate pairs.
  std::optional<double> cross_ratio;
  double harmonic_deviation = std::numeric_limits<double>::infinity();
  bool pencil_ok = false;
  bool tangency_ok = false;
  bool harmonic = false;
  /// Pencil and opposite-vertex tangency.
  bool pass = false;
  /// pass and harmonic.
  bool strict_pass = false;
};

/// `face` in cyclic order: v0, v2 share one direction and v1, v3 the other.
inline SquareFaceReport verify_square_face(const ConfocalFamily& f, const HPMaps& maps,
                                           const std::array<MidVertex, 4>& face, const Tolerances& tol = {}) {
  if (face[0].direction() != face[2].direction() || face[1].direction() != face[3].direction() ||
      face[0].direction() == face[1].direction()) {
    throw GeometryError(ErrorKind::invalid_argument, "square face needs opposite vertices of equal direction");
  }
  detail::require_complete(maps, {face.begin(), face.end()}, "square face");
  SquareFaceReport r{face};
  const std::array<DualHyperplane, 4> h{maps.plane(face[0]), maps.plane(face[1]), maps.plane(face[2]),
                                        maps.plane(face[3])};
  r.tangency = 0.0;
  for (std::size_t k = 0; k < 4; ++k) {
    r.tangency = std::max(r.tangency, tangency_residual(f, maps.lambdas[face[k].direction()], h[k]));
  }
  r.tangency_ok = r.tangency < 1e-10;
  r.pencil = pencil_residual(std::span<const DualHyperplane>(h));
  r.pencil_ok = r.pencil < tol.rank;
  if (r.pencil_ok) {
    try {
      r.cross_ratio = cross_ratio_pencil(h[0], h[2], h[1], h[3], tol.rank);
      r.harmonic_deviation = std::abs(*r.cross_ratio + 1.0);
    } catch (const GeometryError&) {
      r.cross_ratio = std::nullopt;
    }
  }
  r.harmonic = r.harmonic_deviation < tol.cr;
  r.pass = r.pencil_ok && r.tangency_ok;
  r.strict_pass = r.pass && r.harmonic;
  return r;
}

/// Given H at two adjacent vertices of a square face (h_a tangent to Q*_alpha,
/// h_b tangent to Q*_beta), the second tangents to Q*_alpha and Q*_beta inside
/// the pencil spanned by h_a and h_b.
inline std::pair<DualHyperplane, DualHyperplane> complete_square(const ConfocalFamily& f, QuadricParam alpha,
                                                                 const DualHyperplane& h_a, QuadricParam beta,
                                                                 const DualHyperplane& h_b,
                                                                 const Tolerances& tol = {}) {
  if (tangency_residual(f, alpha, h_a) >= 1e-10 || tangency_residual(f, beta, h_b) >= 1e-10) {
    throw GeometryError(ErrorKind::invalid_argument, "h_a and h_b must be tangent to their quadrics");
  }
  Eigen::MatrixXd pair(h_a.size(), 2);
  pair.col(0) = h_a.canonical_coords();
  pair.col(1) = h_b.canonical_coords();
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(pair);
  if (svd.singularValues()[1] < tol.rank * svd.singularValues()[0]) {
    throw GeometryError(ErrorKind::coincident, "h_a and h_b coincide");
  }
  if (tangency_residual(f, alpha, h_b) < 1e-10 || tangency_residual(f, beta, h_a) < 1e-10) {
    throw GeometryError(ErrorKind::degenerate_tangency, "pencil is tangentially degenerate");
  }
  const double s = -2.0 * tangency_polarization(f, alpha, h_a, h_b) / tangency_form(f, alpha, h_b);
  const double t = -2.0 * tangency_polarization(f, beta, h_a, h_b) / tangency_form(f, beta, h_a);
  return {DualHyperplane(h_a.coords() + s * h_b.coords()), DualHyperplane(h_b.coords() + t * h_a.coords())};
}

struct TriangleCheck {
  std::array<MidVertex, 3> vertices;
  double collinearity;
  std::array<double, 3> caustics;
  bool distinct_quadrics;
  bool ok;
};

struct CuboctahedronReport {
  std::vector<int> anchor;
  std::vector<TriangleCheck> triangles;
  std::vector<SquareFaceReport> squares;
  bool membership_ok = false;
  bool pass = false;

  int triangles_passing() const {
    int k = 0;
    for (const auto& t : triangles) k += t.ok;
    return k;
  }
  int squares_passing() const {
    int k = 0;
    for (const auto& s : squares) k += s.pass;
    return k;
  }
};

/// Six-pointed star on a cuboctahedral cell: 8 triplets with collinear
/// touching points on three distinct quadrics, 6 quadruplets in pencils.
inline CuboctahedronReport verify_cuboctahedron(const ConfocalFamily& f, const HPMaps& maps,
                                                const HoneycombCell& cell, const Tolerances& tol = {}) {
  if (cell.kind != CellKind::rectified_cube || cell.anchor.size() != 3) {
    throw GeometryError(ErrorKind::invalid_argument, "verify_cuboctahedron needs a rectified 3-cube");
  }
  if (cell.vertices.size() != 12 || cell.triangle_faces.size() != 8 || cell.square_faces.size() != 6) {
    throw GeometryError(ErrorKind::invalid_argument, "cuboctahedron is incomplete");
  }
  detail::require_complete(maps, cell.vertices, "cuboctahedron");
  CuboctahedronReport r;
  r.anchor = cell.anchor;
  std::vector<int> in_triangles(12, 0), in_squares(12, 0);
  for (const auto& tri : cell.triangle_faces) {
    TriangleCheck t{{cell.vertices[static_cast<std::size_t>(tri[0])], cell.vertices[static_cast<std::size_t>(tri[1])],
                     cell.vertices[static_cast<std::size_t>(tri[2])]},
                    0.0,
                    {},
                    false,
                    false};
    std::set<int> directions;
    bool labels_ok = true;
    for (std::size_t k = 0; k < 3; ++k) {
      ++in_triangles[static_cast<std::size_t>(tri[k])];
      const MidVertex& v = t.vertices[k];
      directions.insert(v.direction());
      t.caustics[k] = hyperplane_caustic(f, maps.plane(v), tol.rank).value;
      const double expected = maps.lambdas[v.direction()].value;
      labels_ok = labels_ok && std::abs(t.caustics[k] - expected) < 1e-8 * std::max(1.0, std::abs(expected));
    }
    t.distinct_quadrics = directions.size() == 3 && labels_ok;
    t.collinearity = collinearity_residual(
        {maps.point(t.vertices[0]), maps.point(t.vertices[1]), maps.point(t.vertices[2])});
    t.ok = t.distinct_quadrics && t.collinearity < tol.rank;
    r.triangles.push_back(t);
  }
  for (std::size_t k = 0; k < cell.square_faces.size(); ++k) {
    for (int idx : cell.square_faces[k]) ++in_squares[static_cast<std::size_t>(idx)];
    r.squares.push_back(verify_square_face(f, maps, cell.square(k), tol));
  }
  r.membership_ok = true;
  for (std::size_t k = 0; k < 12; ++k) r.membership_ok = r.membership_ok && in_triangles[k] == 2 && in_squares[k] == 2;
  r.pass = r.membership_ok && r.triangles_passing() == 8 && r.squares_passing() == 6;
  return r;
}

/// The twelve-plane configuration generated by three planes tangent to three
/// different quadrics with collinear touching points. The result lives on the
/// cuboctahedron with doubled min-corner 0; seed k becomes H at doubled
/// coordinates e_k.
inline HPMaps star_from_seed(const ConfocalFamily& f, const std::array<QuadricParam, 3>& lambdas,
                             const std::array<DualHyperplane, 3>& planes, const Tolerances& tol = {}) {
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (lambdas[i] == lambdas[j]) {
        throw GeometryError(ErrorKind::invalid_argument, "seed planes must touch three different quadrics");
      }
    }
  }
  std::vector<Vec> touching;
  std::vector<HomPoint> touching_h;
  for (std::size_t k = 0; k < 3; ++k) {
    if (tangency_residual(f, lambdas[k], planes[k]) >= 1e-10) {
      std::ostringstream os;
      os << "seed plane " << k + 1 << " is not tangent to Q*_" << lambdas[k].value;
      throw GeometryError(ErrorKind::invalid_argument, os.str());
    }
    touching_h.push_back(touching_point(f, planes[k], tol.rank));
    touching.push_back(touching_h.back().affine());
  }
  const double residual = collinearity_residual(std::span<const HomPoint>(touching_h));
  if (!(residual < tol.rank)) {
    std::ostringstream os;
    os << "seed touching points are not collinear (residual " << residual << ")";
    throw GeometryError(ErrorKind::not_collinear, os.str());
  }
  std::size_t p = 0, q = 1;
  double widest = -1.0;
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = i + 1; j < 3; ++j) {
      const double d = (touching[i] - touching[j]).norm();
      if (d > widest) {
        widest = d;
        p = i;
        q = j;
      }
    }
  }
  if (widest <= 1e-12) throw GeometryError(ErrorKind::coincident, "seed touching points coincide");
  const ProjLine line = ProjLine::through(touching[p], touching[q]);
  const std::vector<QuadricParam> ls(lambdas.begin(), lambdas.end());
  const std::vector<std::optional<Vec>> first(touching.begin(), touching.end());
  BuildOptions options;
  options.tol = tol;
  const DRNet net = detail::build_net_seeded(f, ls, line, {1, 1, 1}, first, options);
  HPMaps maps = extract_maps(f, net, tol);
  const HoneycombCell cell = detail::rectified_cube({0, 0, 0});
  const CuboctahedronReport check = verify_cuboctahedron(f, maps, cell, tol);
  if (!check.pass) {
    throw GeometryError(ErrorKind::closure_mismatch, "reconstructed configuration fails the six-pointed star checks");
  }
  return maps;
}

/// Rebuilds a cuboctahedron of the net from the three planes at its min
/// corner; returns the largest scale-free distance to the stored planes.
inline double star_round_trip(const ConfocalFamily& f, const HPMaps& maps, const HoneycombCell& cell,
                              const Tolerances& tol = {}) {
  if (cell.kind != CellKind::rectified_cube || cell.anchor.size() != 3) {
    throw GeometryError(ErrorKind::invalid_argument, "star round trip needs an m = 3 rectified cube");
  }
  detail::require_complete(maps, cell.vertices, "cuboctahedron");
  std::array<QuadricParam, 3> lambdas{maps.lambdas[0], maps.lambdas[1], maps.lambdas[2]};
  std::array<DualHyperplane, 3> seeds{maps.plane(cell.vertices[0]), maps.plane(cell.vertices[0]),
                                      maps.plane(cell.vertices[0])};
  for (std::size_t k = 0; k < 3; ++k) {
    std::vector<int> d = cell.anchor;
    d[k] += 1;
    seeds[k] = maps.plane(MidVertex(d));
  }
  const HPMaps local = star_from_seed(f, lambdas, seeds, tol);
  double worst = 0.0;
  for (const MidVertex& v : cell.vertices) {
    std::vector<int> d = v.dcoords();
    for (std::size_t k = 0; k < 3; ++k) d[k] -= cell.anchor[k];
    const Vec diff = local.plane(MidVertex(d)).canonical_coords() - maps.plane(v).canonical_coords();
    worst = std::max(worst, diff.norm());
  }
  return worst;
}

}  // namespace billnet
