#include <Eigen/Dense>

#include <numbers>
#include <random>

#include "billnet/sampling.hpp"

#include "support.hpp"

using namespace billnet;
using namespace billnet::test;

namespace {

HPMaps reference_maps2() { return extract_maps(family2(), reference_net2()); }

// Angle of a dual line (u0,u1,u2) measured from `axis`, reduced mod pi.
double line_angle(const DualHyperplane& h, const Vec& axis) {
  const double dir = std::atan2(h[1], -h[2]);
  double t = dir - std::atan2(axis[1], axis[0]);
  t = std::fmod(t, std::numbers::pi);
  if (t < 0) t += std::numbers::pi;
  return t;
}

double angle_gap(double a, double b) {
  const double d = std::fmod(std::abs(a - b), std::numbers::pi);
  return std::min(d, std::numbers::pi - d);
}

}  // namespace

TEST(Honeycomb, Counts) {
  EXPECT_EQ(enumerate_lattice({1, 1}).vertices.size(), 4u);
  const auto h2 = enumerate_lattice({2, 2});
  EXPECT_EQ(h2.vertices.size(), 12u);
  const auto h3 = enumerate_lattice({1, 1, 1});
  EXPECT_EQ(h3.vertices.size(), 12u);
  ASSERT_EQ(h3.cells.size(), 1u);
  EXPECT_EQ(h3.cells[0].kind, CellKind::rectified_cube);
  EXPECT_EQ(h3.cells[0].triangle_faces.size(), 8u);
  EXPECT_EQ(h3.cells[0].square_faces.size(), 6u);
  const auto h33 = enumerate_lattice({3, 3});
  int white = 0, gray = 0;
  for (const auto& c : h33.cells) (c.kind == CellKind::rectified_cube ? white : gray)++;
  EXPECT_EQ(white, 9);
  EXPECT_EQ(gray, 4);
  EXPECT_THROW(enumerate_lattice({1}), GeometryError);
}

TEST(Honeycomb, CuboctahedronMembership) {
  const auto cell = enumerate_lattice({1, 1, 1}).cells.at(0);
  std::vector<int> tri(12, 0), sq(12, 0);
  for (const auto& t : cell.triangle_faces)
    for (int i : t) ++tri[static_cast<std::size_t>(i)];
  for (const auto& s : cell.square_faces)
    for (int i : s) ++sq[static_cast<std::size_t>(i)];
  for (int k = 0; k < 12; ++k) {
    EXPECT_EQ(tri[static_cast<std::size_t>(k)], 2);
    EXPECT_EQ(sq[static_cast<std::size_t>(k)], 2);
  }
}

TEST(Maps, ReferenceNetMaps) {
  const auto f = family2();
  const DRNet net = reference_net2();
  const HPMaps maps = extract_maps(f, net);
  EXPECT_EQ(maps.H.size(), 24u);
  EXPECT_EQ(maps.P.size(), 24u);
  for (const auto& [v, h] : maps.H) {
    const QuadricParam lambda = maps.lambdas[v.direction()];
    EXPECT_LT(tangency_residual(f, lambda, h), 1e-10);
    // H determines P
    EXPECT_LT((touching_point(f, h).affine() - maps.point(v).affine()).norm(), 1e-9);
    // P is where the two lines of the edge meet
    const auto meet = closest_approach(net.line(v.edge_start()), net.line(v.edge_end()));
    EXPECT_LT((meet->midpoint - maps.point(v).affine()).norm(), 1e-8);
  }
}

TEST(Maps, SingleEdge) {
  const auto f = family2();
  const DRNet net = build_net(f, {q(0)}, ProjLine(v({0, 1}), v({1, -1})), {1});
  const HPMaps maps = extract_maps(f, net);
  ASSERT_EQ(maps.H.size(), 1u);
  EXPECT_LT(tangency_residual(f, q(0), maps.H.begin()->second), 1e-12);
}

TEST(CrossPolytope, InteriorCellsOfReferenceNet) {
  const auto f = family2();
  const HPMaps maps = reference_maps2();
  int seen = 0;
  for (const auto& cell : enumerate_lattice({3, 3}).cells) {
    if (cell.kind != CellKind::cross_polytope) continue;
    ++seen;
    const auto r = verify_cross_polytope(f, maps, cell);
    EXPECT_TRUE(r.pass);
    EXPECT_LT(r.collinearity, 1e-9);
    EXPECT_LT(r.same_quadric, 1e-10);
    ASSERT_TRUE(r.cross_ratio.has_value());
    EXPECT_GT(std::abs(*r.cross_ratio + 1.0), 1e-3);
  }
  EXPECT_EQ(seen, 4);
}

TEST(CrossPolytope, PerturbedPointFails) {
  const auto f = family2();
  HPMaps maps = reference_maps2();
  HoneycombCell cell;
  for (const auto& c : enumerate_lattice({3, 3}).cells) {
    if (c.kind == CellKind::cross_polytope) {
      cell = c;
      break;
    }
  }
  const MidVertex target = cell.vertices[0];
  const Vec x = maps.point(target).affine() + v({1e-4, -2e-4});
  maps.P.erase(target);
  maps.P.emplace(target, HomPoint::from_affine(x));
  EXPECT_FALSE(verify_cross_polytope(f, maps, cell).pass);
}

TEST(SquareFace, ReferenceNetFaces) {
  const auto f = family2();
  const HPMaps maps = reference_maps2();
  for (const auto& cell : enumerate_lattice({3, 3}).cells) {
    if (cell.kind != CellKind::rectified_cube) continue;
    const auto r = verify_square_face(f, maps, cell.square(0));
    EXPECT_TRUE(r.pass);
    EXPECT_LT(r.pencil, 1e-9);
    EXPECT_LT(r.tangency, 1e-10);
    ASSERT_TRUE(r.cross_ratio.has_value());
  }
}

// In d = 2 the four tangent lines of a net face meet at the pencil centre X.
// The two tangents from X to one conic are mirror images in the tangent at X
// of a confocal conic through X, so opposite-vertex pairs sit at angles
// (+a, -a) and (+b, -b) from that line and the cross-ratio is
// sin^2(a - b) / sin^2(a + b) (or its inverse), which is positive.
TEST(SquareFace, PlanarCrossRatioIsTheBisectorFormula) {
  const auto f = family2();
  const HPMaps maps = reference_maps2();
  for (const auto& cell : enumerate_lattice({3, 3}).cells) {
    if (cell.kind != CellKind::rectified_cube) continue;
    const auto face = cell.square(0);
    const auto r = verify_square_face(f, maps, face);
    std::array<DualHyperplane, 4> h{maps.plane(face[0]), maps.plane(face[1]), maps.plane(face[2]),
                                    maps.plane(face[3])};
    Eigen::Matrix2d lhs;
    lhs << h[0][1], h[0][2], h[1][1], h[1][2];
    const Eigen::Vector2d X = lhs.inverse() * (Eigen::Vector2d(-h[0][0], -h[1][0]));
    const auto through = point_confocal_params(f, Vec(X));
    ASSERT_EQ(through.size(), 2u);
    const Vec n = f.normal(q(through[0].lambda), Vec(X));
    const Vec bisector = v({-n[1], n[0]});
    std::array<double, 4> t{};
    for (std::size_t k = 0; k < 4; ++k) t[k] = line_angle(h[k], bisector);
    EXPECT_LT(angle_gap(t[0], -t[2]), 1e-9);
    EXPECT_LT(angle_gap(t[1], -t[3]), 1e-9);
    const double a = t[0], b = t[1];
    const double s = std::pow(std::sin(a - b), 2) / std::pow(std::sin(a + b), 2);
    const double cr = *r.cross_ratio;
    EXPECT_GT(cr, 0.0);
    EXPECT_LT(std::min(std::abs(cr - s) / s, std::abs(cr * s - 1.0)), 1e-8);
    EXPECT_FALSE(r.harmonic);
  }
}

TEST(SquareFace, NotAPencil) {
  const auto f = family2();
  HPMaps maps;
  maps.lambdas = {q(0), q(-3)};
  const std::array<MidVertex, 4> face{MidVertex({1, 0}), MidVertex({2, 1}), MidVertex({1, 2}), MidVertex({0, 1})};
  const std::array<DualHyperplane, 4> h{plane({-2, 1, 0}), plane({-2, 0, 1}), plane({2, 1, 0}), plane({-2, 0, -1})};
  for (std::size_t k = 0; k < 4; ++k) {
    maps.H.emplace(face[k], h[k]);
    maps.P.emplace(face[k], touching_point(f, h[k]));
  }
  const auto r = verify_square_face(f, maps, face);
  EXPECT_FALSE(r.pencil_ok);
  EXPECT_FALSE(r.pass);
  EXPECT_FALSE(r.cross_ratio.has_value());
}

TEST(CompleteSquare, ClosedFormExample) {
  const auto f = family2();
  const auto [ha2, hb2] = complete_square(f, q(0), plane({-2, 1, 0}), q(-3), plane({-2, 0, 1}));
  // s* = -8/3, t* = 8/3
  EXPECT_LT((ha2.coords() - v({10, 3, -8}) / 3.0).norm(), 1e-14);
  EXPECT_LT((hb2.coords() - v({-22, 8, 3}) / 3.0).norm(), 1e-14);
  EXPECT_TRUE(ha2.equivalent(plane({10, 3, -8})));
  EXPECT_TRUE(hb2.equivalent(plane({-22, 8, 3})));
  EXPECT_NEAR(tangency_form(f, q(0), plane({10, 3, -8})), 0.0, 1e-12);
  EXPECT_NEAR(tangency_form(f, q(-3), plane({-22, 8, 3})), 0.0, 1e-12);
  EXPECT_NEAR(tangency_form(f, q(0), ha2), 0.0, 1e-12);
  EXPECT_NEAR(tangency_form(f, q(-3), hb2), 0.0, 1e-12);
  EXPECT_NEAR(cross_ratio_pencil(plane({-2, 1, 0}), ha2, plane({-2, 0, 1}), hb2), 73.0 / 9.0, 1e-12);
}

TEST(CompleteSquare, DegeneratePencil) {
  const auto f = family2();
  // h_b = (y = 1) is tangent to Q*_alpha as well
  EXPECT_THROW(complete_square(f, q(0), plane({-2, 1, 0}), q(0), plane({-1, 0, 1})), GeometryError);
  // h_b not tangent to Q*_beta, h_a not tangent to Q*_alpha
  EXPECT_THROW(complete_square(f, q(0), plane({-2, 1, 0}), q(-3), plane({-2, 1, 0})), GeometryError);
  EXPECT_THROW(complete_square(f, q(0), plane({-2, 0, 1}), q(-3), plane({-2, 0, 1})), GeometryError);
}

TEST(CompleteSquare, RoundTripOnNetFaces) {
  const auto f = family2();
  const HPMaps maps = reference_maps2();
  for (const auto& cell : enumerate_lattice({3, 3}).cells) {
    if (cell.kind != CellKind::rectified_cube) continue;
    const auto face = cell.square(0);
    const auto [ha2, hb2] = complete_square(f, maps.lambdas[face[0].direction()], maps.plane(face[0]),
                                            maps.lambdas[face[1].direction()], maps.plane(face[1]));
    EXPECT_TRUE(ha2.equivalent(maps.plane(face[2]), 1e-8));
    EXPECT_TRUE(hb2.equivalent(maps.plane(face[3]), 1e-8));
  }
}

TEST(Cuboctahedron, ReferenceNetCells) {
  const auto f = family3();
  const HPMaps maps = extract_maps(f, reference_net3());
  int seen = 0;
  for (const auto& cell : enumerate_lattice({2, 2, 2}).cells) {
    if (cell.kind != CellKind::rectified_cube) continue;
    ++seen;
    const auto r = verify_cuboctahedron(f, maps, cell);
    EXPECT_TRUE(r.pass);
    EXPECT_EQ(r.triangles_passing(), 8);
    EXPECT_EQ(r.squares_passing(), 6);
    EXPECT_TRUE(r.membership_ok);
    for (const auto& t : r.triangles) {
      std::vector<double> labels(t.caustics.begin(), t.caustics.end());
      std::sort(labels.begin(), labels.end());
      EXPECT_NEAR(labels[0], -3.0, 1e-8);
      EXPECT_NEAR(labels[1], -1.0, 1e-8);
      EXPECT_NEAR(labels[2], 0.5, 1e-8);
    }
  }
  EXPECT_EQ(seen, 8);
}

TEST(Star, SeedRoundTrip) {
  const auto f = family3();
  const HPMaps maps = extract_maps(f, reference_net3());
  for (const auto& cell : enumerate_lattice({2, 2, 2}).cells) {
    if (cell.kind != CellKind::rectified_cube) continue;
    EXPECT_LT(star_round_trip(f, maps, cell), 1e-8);
  }
}

TEST(Star, SeedErrors) {
  const auto f = family3();
  const HPMaps maps = extract_maps(f, reference_net3());
  const std::array<QuadricParam, 3> lambdas{q(0.5), q(-1), q(-3)};
  const std::array<DualHyperplane, 3> seeds{maps.plane(MidVertex({1, 0, 0})), maps.plane(MidVertex({0, 1, 0})),
                                            maps.plane(MidVertex({0, 0, 1}))};
  EXPECT_NO_THROW(star_from_seed(f, lambdas, seeds));
  // replace the third seed by a plane tangent to Q*_{-3} elsewhere
  const std::array<DualHyperplane, 3> skew{seeds[0], seeds[1], tangent_plane(f, q(-3), v({0, 0, 2}))};
  try {
    star_from_seed(f, lambdas, skew);
    FAIL();
  } catch (const GeometryError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::not_collinear);
  }
  EXPECT_THROW(star_from_seed(f, {q(0.5), q(0.5), q(-3)}, seeds), GeometryError);
}

TEST(Star, RandomizedNets) {
  const auto f = family3();
  std::mt19937_64 rng(123);
  for (int k = 0; k < 5; ++k) {
    const auto lambdas = random_ellipsoid_params(f, 3, rng);
    const DRNet net = build_net(f, lambdas, random_chord(f, lambdas, rng), {2, 2, 2});
    const HPMaps maps = extract_maps(f, net);
    for (const auto& cell : enumerate_lattice({2, 2, 2}).cells) {
      if (cell.kind == CellKind::rectified_cube) {
        EXPECT_TRUE(verify_cuboctahedron(f, maps, cell).pass);
      } else {
        EXPECT_TRUE(verify_cross_polytope(f, maps, cell).pass);
      }
    }
  }
}
