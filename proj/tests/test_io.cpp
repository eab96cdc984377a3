#include <cstdio>
#include <filesystem>
#include <sstream>

#include "billnet/io.hpp"

#include "support.hpp"

using namespace billnet;
using namespace billnet::test;

namespace {

const char* kMinimal = R"({"semi_axes":[4,1],"lambdas":[0,-3],"initial_line":{"base":[0,1],"dir":[1,-1]},"window":[3,3]})";

std::string config_error(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("billnet_test_" + name)).string();
}

SceneResult scene(const std::vector<int>& window) {
  SceneConfig cfg = parse_config(kMinimal);
  cfg.window = window;
  return run_scene(cfg);
}

}  // namespace

TEST(Config, MinimalDocumentGetsDefaults) {
  const SceneConfig cfg = parse_config(kMinimal);
  EXPECT_EQ(cfg.semi_axes, (std::vector<double>{4, 1}));
  EXPECT_EQ(cfg.lambdas, (std::vector<double>{0, -3}));
  EXPECT_EQ(cfg.window, (std::vector<int>{3, 3}));
  EXPECT_EQ(cfg.tol.rank, 1e-9);
  EXPECT_EQ(cfg.tol.cr, 1e-7);
  EXPECT_EQ(cfg.tol.caustic, 1e-8);
  EXPECT_EQ(cfg.tol.forward, 1e-9);
  EXPECT_TRUE(cfg.json_path.empty());
}

TEST(Config, Errors) {
  EXPECT_EQ(config_error(R"({"semi_axes":[4,1],"lambdas":[0,0],"initial_line":{"base":[0,1],"dir":[1,-1]},"window":[3,3]})"),
            "lambdas must be pairwise distinct");
  EXPECT_NE(config_error(R"({"semi_axes":[4,1],"lambdas":[0,-3],"initial_line":{"base":[0,1],"dir":[1,-1]},"window":[3,3],"speed":2})")
                .find("speed"),
            std::string::npos);
  EXPECT_NE(config_error(R"({"semi_axes":[1,4],"lambdas":[0,-3],"initial_line":{"base":[0,1],"dir":[1,-1]},"window":[3,3]})")
                .find("semi_axes"),
            std::string::npos);
  EXPECT_NE(config_error(R"({"semi_axes":[4,1],"lambdas":[0,-3],"initial_line":{"base":[0,1],"dir":[0,0]},"window":[3,3]})")
                .find("dir"),
            std::string::npos);
  EXPECT_NE(config_error(R"({"semi_axes":[4,1],"lambdas":[1,-3],"initial_line":{"base":[0,1],"dir":[1,-1]},"window":[3,3]})")
                .find("lambdas"),
            std::string::npos);
  EXPECT_NE(config_error("{not json").find("malformed"), std::string::npos);
  EXPECT_NE(config_error(R"({"semi_axes":[4,1],"lambdas":[0,-3],"initial_line":{"base":[0,1],"dir":[1,-1]},"window":[3,3],"tolerances":{"tol_rank":-1}})")
                .find("tol_rank"),
            std::string::npos);
}

TEST(Json, SeventeenDigitsAndNulls) {
  ordered_json j;
  j["x"] = 0.1;
  j["y"] = std::numeric_limits<double>::infinity();
  j["z"] = {1, 2};
  const std::string s = dump_json(j);
  EXPECT_NE(s.find("0.10000000000000001"), std::string::npos);
  EXPECT_NE(s.find("\"y\": null"), std::string::npos);
  EXPECT_NE(s.find("[1, 2]"), std::string::npos);
}

TEST(Export, SmallWindowCounts) {
  const SceneResult r = scene({1, 1});
  const auto doc = lattice_document(r.family, *r.maps, *r.honeycomb, *r.lattice);
  EXPECT_EQ(doc["vertices"].size(), 4u);
  ASSERT_EQ(doc["cells"].size(), 1u);
  EXPECT_EQ(doc["cells"][0]["kind"], "rectified_cube");
  for (const auto& c : doc["partial_cells"]) EXPECT_TRUE(c["partial"].get<bool>());
}

TEST(Export, ThreeDimensionalCell) {
  SceneConfig cfg = parse_config(
      R"({"semi_axes":[9,4,1],"lambdas":[0.5,-1,-3],"initial_line":{"base":[0.1,-0.2,0.05],"dir":[0.3,0.5,-0.8]},"window":[1,1,1]})");
  const SceneResult r = run_scene(cfg);
  const auto doc = lattice_document(r.family, *r.maps, *r.honeycomb, *r.lattice);
  EXPECT_EQ(doc["vertices"].size(), 12u);
  ASSERT_EQ(doc["cells"].size(), 1u);
  EXPECT_EQ(doc["cells"][0]["triangle_faces"].size(), 8u);
  EXPECT_EQ(doc["cells"][0]["square_faces"].size(), 6u);
  EXPECT_EQ(doc["cells"][0]["residuals"]["triangles"].size(), 8u);
  EXPECT_EQ(doc["cells"][0]["residuals"]["squares"].size(), 6u);
}

TEST(Export, DeterministicAndBitExactRoundTrip) {
  const std::string p1 = temp_path("a.json");
  const std::string p2 = temp_path("b.json");
  {
    const SceneResult r = scene({3, 3});
    export_lattice(r.family, *r.maps, *r.honeycomb, *r.lattice, p1);
  }
  const SceneResult r = scene({3, 3});
  export_lattice(r.family, *r.maps, *r.honeycomb, *r.lattice, p2);
  const std::string a = read_text_file(p1);
  EXPECT_EQ(a, read_text_file(p2));

  const LatticeDocument doc = parse_lattice_document(a);
  EXPECT_EQ(doc.m, 2);
  ASSERT_EQ(doc.vertices.size(), r.honeycomb->vertices.size());
  for (std::size_t k = 0; k < doc.vertices.size(); ++k) {
    const MidVertex v = r.honeycomb->vertices[k];
    EXPECT_EQ(doc.vertices[k].dcoords, v.dcoords());
    EXPECT_EQ(doc.vertices[k].direction, v.direction() + 1);
    const Vec& h = r.maps->plane(v).coords();
    const Vec p = r.maps->point(v).affine();
    for (Eigen::Index i = 0; i < h.size(); ++i) EXPECT_EQ((*doc.vertices[k].hyperplane)[i], h[i]);
    for (Eigen::Index i = 0; i < p.size(); ++i) EXPECT_EQ((*doc.vertices[k].touching_point)[i], p[i]);
    EXPECT_EQ(*doc.vertices[k].caustic, hyperplane_caustic(r.family, r.maps->plane(v)).value);
  }
  std::remove(p1.c_str());
  std::remove(p2.c_str());
}

TEST(NetDocument, RoundTrip) {
  const auto f = family3();
  const DRNet net = reference_net3();
  const std::string text = dump_json(net_document(f, net));
  const auto [g, back] = parse_net_document(text);
  EXPECT_EQ(g.semi_axes(), f.semi_axes());
  ASSERT_EQ(back.lines.size(), net.lines.size());
  for (const auto& [n, line] : net.lines) {
    EXPECT_EQ(back.line(n).base(), line.base());
    EXPECT_TRUE(back.line(n).same_as(line, 1e-15));
  }
  EXPECT_TRUE(verify_net(g, back).pass);
  EXPECT_THROW(parse_net_document(R"({"format":"other"})"), ConfigError);
}

TEST(Svg, ReferenceTiling) {
  const SceneResult r = scene({3, 3});
  const std::string svg = render_tiling_svg(r.family, *r.maps, *r.honeycomb, *r.lattice);
  EXPECT_EQ(svg, render_tiling_svg(r.family, *r.maps, *r.honeycomb, *r.lattice));
  auto count = [&](const std::string& needle) {
    std::size_t n = 0;
    for (auto pos = svg.find(needle); pos != std::string::npos; pos = svg.find(needle, pos + 1)) ++n;
    return n;
  };
  EXPECT_EQ(count("<polygon"), 13u);
  EXPECT_EQ(count("rectified square"), 9u);
  EXPECT_EQ(count("cross polytope"), 4u);
  EXPECT_EQ(count("<circle"), 24u);
  EXPECT_NE(svg.find("version=\"1.1\""), std::string::npos);
  EXPECT_EQ(svg.find("-0,"), std::string::npos);
}

TEST(Svg, EmptyWindowAndWrongDimension) {
  const SceneResult r = scene({0, 0});
  const std::string svg = render_tiling_svg(r.family, *r.maps, *r.honeycomb, *r.lattice);
  EXPECT_NE(svg.find("<svg"), std::string::npos);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
  EXPECT_EQ(svg.find("<polygon"), std::string::npos);

  SceneConfig cfg = parse_config(
      R"({"semi_axes":[9,4,1],"lambdas":[0.5,-1,-3],"initial_line":{"base":[0.1,-0.2,0.05],"dir":[0.3,0.5,-0.8]},"window":[1,1,1]})");
  const SceneResult r3 = run_scene(cfg);
  try {
    render_tiling_svg(r3.family, *r3.maps, *r3.honeycomb, *r3.lattice);
    FAIL();
  } catch (const GeometryError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::unsupported);
  }
}

TEST(Verification, ReferenceSceneAndNegativeScene) {
  std::ostringstream out;
  EXPECT_EQ(run_verification(parse_config(kMinimal), out), ExitCode::pass);
  EXPECT_NE(out.str().find("result: PASS"), std::string::npos);

  std::ostringstream strict;
  VerificationOptions vo;
  vo.strict_harmonic = true;
  EXPECT_EQ(run_verification(parse_config(kMinimal), strict, vo), ExitCode::verification_failure);

  SceneConfig bad = parse_config(kMinimal);
  bad.lambdas = {5, -3};
  std::ostringstream err;
  EXPECT_EQ(run_verification(bad, err), ExitCode::construction_failure);
  EXPECT_NE(err.str().find("(0,0)"), std::string::npos);
}
