#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "billnet/billiards.hpp"
#include "billnet/confocal.hpp"
#include "billnet/drnet.hpp"
#include "billnet/error.hpp"
#include "billnet/hyperlattice.hpp"
#include "billnet/projective.hpp"

namespace billnet {

using ordered_json = nlohmann::ordered_json;

/// Invalid scene document; the message names the offending field.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SceneConfig {
  std::vector<double> semi_axes;
  std::vector<double> lambdas;
  Vec base;
  Vec direction;
  std::vector<int> window;
  int steps = 10;
  Tolerances tol{};
  std::string json_path;
  std::string svg_path;
  std::string net_path;

  ConfocalFamily family() const { return ConfocalFamily(semi_axes); }
  ProjLine initial_line() const { return ProjLine(base, direction); }
  std::vector<QuadricParam> quadric_params() const {
    std::vector<QuadricParam> out;
    for (double l : lambdas) out.emplace_back(l);
    return out;
  }
};

namespace detail {

inline void reject_unknown(const nlohmann::json& obj, std::initializer_list<std::string_view> allowed,
                           const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    bool known = false;
    for (auto a : allowed) known = known || key == a;
    if (!known) throw ConfigError("unknown field \"" + where + key + "\"");
  }
}

inline std::vector<double> number_array(const nlohmann::json& j, const std::string& name) {
  if (!j.is_array()) throw ConfigError(name + " must be an array of numbers");
  std::vector<double> out;
  for (const auto& x : j) {
    if (!x.is_number()) throw ConfigError(name + " must be an array of numbers");
    out.push_back(x.get<double>());
    if (!std::isfinite(out.back())) throw ConfigError(name + " must contain finite numbers");
  }
  return out;
}

inline Vec to_vec(const std::vector<double>& v) {
  Vec out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<Eigen::Index>(i)] = v[i];
  return out;
}

}  // namespace detail

/// Parses and validates a scene document, applying tolerance defaults.
inline SceneConfig parse_config(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("malformed document: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("scene document must be an object");
  detail::reject_unknown(doc, {"semi_axes", "lambdas", "initial_line", "window", "steps", "tolerances", "output"}, "");
  for (const char* key : {"semi_axes", "lambdas", "initial_line", "window"}) {
    if (!doc.contains(key)) throw ConfigError(std::string("missing field \"") + key + "\"");
  }
  SceneConfig cfg;
  cfg.semi_axes = detail::number_array(doc["semi_axes"], "semi_axes");
  if (cfg.semi_axes.size() < 2) throw ConfigError("semi_axes needs at least 2 entries");
  for (std::size_t i = 0; i < cfg.semi_axes.size(); ++i) {
    if (!(cfg.semi_axes[i] > 0.0)) throw ConfigError("semi_axes must be positive");
    if (i > 0 && !(cfg.semi_axes[i] < cfg.semi_axes[i - 1])) {
      throw ConfigError("semi_axes must be strictly decreasing");
    }
  }
  cfg.lambdas = detail::number_array(doc["lambdas"], "lambdas");
  if (cfg.lambdas.empty()) throw ConfigError("lambdas must not be empty");
  for (std::size_t i = 0; i < cfg.lambdas.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (cfg.lambdas[i] == cfg.lambdas[j]) throw ConfigError("lambdas must be pairwise distinct");
    }
    for (double a : cfg.semi_axes) {
      if (cfg.lambdas[i] == a) throw ConfigError("lambdas must avoid the semi-axes (degenerate member)");
    }
  }

  const auto& line = doc["initial_line"];
  if (!line.is_object()) throw ConfigError("initial_line must be an object");
  detail::reject_unknown(line, {"base", "dir"}, "initial_line.");
  if (!line.contains("base") || !line.contains("dir")) throw ConfigError("initial_line needs base and dir");
  const auto base = detail::number_array(line["base"], "initial_line.base");
  const auto dir = detail::number_array(line["dir"], "initial_line.dir");
  if (base.size() != cfg.semi_axes.size() || dir.size() != cfg.semi_axes.size()) {
    throw ConfigError("initial_line.base and initial_line.dir must have one entry per semi-axis");
  }
  cfg.base = detail::to_vec(base);
  cfg.direction = detail::to_vec(dir);
  if (!(cfg.direction.norm() > 0.0)) throw ConfigError("initial_line.dir must be nonzero");

  const auto& window = doc["window"];
  if (!window.is_array()) throw ConfigError("window must be an array of integers");
  for (const auto& n : window) {
    if (!n.is_number_integer() || n.get<long long>() < 0) {
      throw ConfigError("window must contain non-negative integers");
    }
    cfg.window.push_back(n.get<int>());
  }
  if (cfg.window.size() != cfg.lambdas.size()) throw ConfigError("window needs one extent per lambda");

  if (doc.contains("steps")) {
    if (!doc["steps"].is_number_integer() || doc["steps"].get<long long>() < 0) {
      throw ConfigError("steps must be a non-negative integer");
    }
    cfg.steps = doc["steps"].get<int>();
  }
  if (doc.contains("tolerances")) {
    const auto& t = doc["tolerances"];
    if (!t.is_object()) throw ConfigError("tolerances must be an object");
    detail::reject_unknown(t, {"tol_rank", "tol_cr", "tol_caustic", "tol_forward"}, "tolerances.");
    auto read = [&](const char* key, double& slot) {
      if (!t.contains(key)) return;
      if (!t[key].is_number() || !(t[key].get<double>() > 0.0)) {
        throw ConfigError(std::string("tolerances.") + key + " must be a positive number");
      }
      slot = t[key].get<double>();
    };
    read("tol_rank", cfg.tol.rank);
    read("tol_cr", cfg.tol.cr);
    read("tol_caustic", cfg.tol.caustic);
    read("tol_forward", cfg.tol.forward);
  }
  if (doc.contains("output")) {
    const auto& o = doc["output"];
    if (!o.is_object()) throw ConfigError("output must be an object");
    detail::reject_unknown(o, {"json", "svg", "net"}, "output.");
    auto read = [&](const char* key, std::string& slot) {
      if (!o.contains(key)) return;
      if (!o[key].is_string()) throw ConfigError(std::string("output.") + key + " must be a string");
      slot = o[key].get<std::string>();
    };
    read("json", cfg.json_path);
    read("svg", cfg.svg_path);
    read("net", cfg.net_path);
  }
  return cfg;
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw GeometryError(ErrorKind::io, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw GeometryError(ErrorKind::io, "cannot write " + path);
  out << text;
  if (!out) throw GeometryError(ErrorKind::io, "write failed for " + path);
}

// ---------------------------------------------------------------------------
// JSON emission: insertion-ordered keys, doubles with 17 significant digits.

namespace detail {

inline std::string format_double17(double x) {
  if (!std::isfinite(x)) return "null";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline void dump_into(const ordered_json& j, std::string& out, int indent, int depth) {
  const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
  const std::string close(static_cast<std::size_t>(indent * depth), ' ');
  switch (j.type()) {
    case ordered_json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (const auto& [key, value] : j.items()) {
        if (!first) out += ",\n";
        first = false;
        out += pad + ordered_json(key).dump() + ": ";
        dump_into(value, out, indent, depth + 1);
      }
      out += "\n" + close + "}";
      return;
    }
    case ordered_json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      bool scalar = true;
      for (const auto& v : j) scalar = scalar && !v.is_structured();
      if (scalar) {
        out += "[";
        for (std::size_t k = 0; k < j.size(); ++k) {
          if (k) out += ", ";
          dump_into(j[k], out, indent, depth + 1);
        }
        out += "]";
        return;
      }
      out += "[\n";
      for (std::size_t k = 0; k < j.size(); ++k) {
        if (k) out += ",\n";
        out += pad;
        dump_into(j[k], out, indent, depth + 1);
      }
      out += "\n" + close + "]";
      return;
    }
    case ordered_json::value_t::number_float:
      out += format_double17(j.get<double>());
      return;
    default:
      out += j.dump();
  }
}

inline ordered_json vec_json(const Vec& v) {
  ordered_json a = ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

inline ordered_json optional_number(const std::optional<double>& x) {
  return x && std::isfinite(*x) ? ordered_json(*x) : ordered_json(nullptr);
}

inline ordered_json number_or_null(double x) { return std::isfinite(x) ? ordered_json(x) : ordered_json(nullptr); }

inline Vec json_vec(const nlohmann::json& j) {
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  return v;
}

}  // namespace detail

inline std::string dump_json(const ordered_json& j, int indent = 2) {
  std::string out;
  detail::dump_into(j, out, indent, 0);
  out += "\n";
  return out;
}

// ---------------------------------------------------------------------------
// Lattice verification: every complete cell of the honeycomb.

struct CellVerification {
  CellKind kind;
  std::vector<int> anchor;
  std::optional<CrossPolytopeReport> cross;
  std::vector<SquareFaceReport> squares;
  /// complete_square round trip per square face (scale-free distance to stored H).
  std::vector<double> completion;
  std::optional<CuboctahedronReport> star;
  bool pass = false;
};

struct LatticeVerification {
  std::vector<CellVerification> cells;
  bool pass = true;
  /// pass, and every square face harmonic under opposite-vertex pairing.
  bool strict_pass = true;
};

/// Scale-free distance between two hyperplanes.
inline double projective_distance(const DualHyperplane& a, const DualHyperplane& b) {
  return (a.canonical_coords() - b.canonical_coords()).norm();
}

inline constexpr double kCompletionTolerance = 1e-8;

/// Rebuilds the far pair of a square face from its first two vertices.
inline double completion_residual(const ConfocalFamily& f, const HPMaps& maps, const std::array<MidVertex, 4>& face,
                                  const Tolerances& tol = {}) {
  try {
    const auto [ha2, hb2] = complete_square(f, maps.lambdas[face[0].direction()], maps.plane(face[0]),
                                            maps.lambdas[face[1].direction()], maps.plane(face[1]), tol);
    return std::max(projective_distance(ha2, maps.plane(face[2])), projective_distance(hb2, maps.plane(face[3])));
  } catch (const GeometryError&) {
    return std::numeric_limits<double>::infinity();
  }
}

inline LatticeVerification verify_lattice(const ConfocalFamily& f, const HPMaps& maps, const Honeycomb& honeycomb,
                                          const Tolerances& tol = {}) {
  LatticeVerification out;
  for (const HoneycombCell& cell : honeycomb.cells) {
    CellVerification cv{cell.kind, cell.anchor, std::nullopt, {}, {}, std::nullopt, true};
    if (cell.kind == CellKind::cross_polytope) {
      cv.cross = verify_cross_polytope(f, maps, cell, tol);
      cv.pass = cv.cross->pass;
    } else {
      if (honeycomb.m() == 3) {
        cv.star = verify_cuboctahedron(f, maps, cell, tol);
        cv.squares = cv.star->squares;
        cv.pass = cv.star->pass;
      } else {
        for (std::size_t k = 0; k < cell.square_faces.size(); ++k) {
          cv.squares.push_back(verify_square_face(f, maps, cell.square(k), tol));
          cv.pass = cv.pass && cv.squares.back().pass;
        }
      }
      for (std::size_t k = 0; k < cell.square_faces.size(); ++k) {
        cv.completion.push_back(completion_residual(f, maps, cell.square(k), tol));
        cv.pass = cv.pass && cv.completion.back() < kCompletionTolerance;
      }
      for (const auto& s : cv.squares) out.strict_pass = out.strict_pass && s.harmonic;
    }
    out.pass = out.pass && cv.pass;
    out.cells.push_back(std::move(cv));
  }
  out.strict_pass = out.strict_pass && out.pass;
  return out;
}

// ---------------------------------------------------------------------------
// Lattice export / import.

namespace detail {

inline ordered_json square_json(const SquareFaceReport& s, double completion) {
  ordered_json j;
  j["pencil"] = number_or_null(s.pencil);
  j["tangency"] = number_or_null(s.tangency);
  j["cross_ratio"] = optional_number(s.cross_ratio);
  j["harmonic_deviation"] = number_or_null(s.harmonic_deviation);
  j["completion"] = number_or_null(completion);
  j["pass"] = s.pass;
  return j;
}

}  // namespace detail

inline ordered_json lattice_document(const ConfocalFamily& f, const HPMaps& maps, const Honeycomb& honeycomb,
                                     const LatticeVerification& verification) {
  ordered_json doc;
  doc["format"] = "billnet.lattice";
  doc["version"] = 1;
  doc["m"] = honeycomb.m();
  doc["d"] = f.dim();
  doc["semi_axes"] = f.semi_axes();
  ordered_json lambdas = ordered_json::array();
  for (QuadricParam l : maps.lambdas) lambdas.push_back(l.value);
  doc["lambdas"] = lambdas;
  doc["window"] = honeycomb.window;

  std::map<MidVertex, int> ids;
  ordered_json vertices = ordered_json::array();
  for (const MidVertex& v : honeycomb.vertices) {
    ids.emplace(v, static_cast<int>(ids.size()));
    ordered_json jv;
    jv["id"] = ids.at(v);
    jv["dcoords"] = v.dcoords();
    jv["direction"] = v.direction() + 1;
    if (maps.contains(v)) {
      jv["hyperplane"] = detail::vec_json(maps.plane(v).coords());
      jv["touching_point"] = detail::vec_json(maps.point(v).affine());
      jv["caustic"] = hyperplane_caustic(f, maps.plane(v)).value;
    } else {
      jv["hyperplane"] = nullptr;
      jv["touching_point"] = nullptr;
      jv["caustic"] = nullptr;
    }
    vertices.push_back(std::move(jv));
  }
  doc["vertices"] = std::move(vertices);

  auto vertex_refs = [&](const HoneycombCell& cell) {
    ordered_json refs = ordered_json::array();
    for (const auto& v : cell.vertices) refs.push_back(ids.at(v));
    return refs;
  };

  ordered_json cells = ordered_json::array();
  for (std::size_t k = 0; k < honeycomb.cells.size(); ++k) {
    const HoneycombCell& cell = honeycomb.cells[k];
    const CellVerification& cv = verification.cells.at(k);
    ordered_json jc;
    jc["kind"] = to_string(cell.kind);
    jc["anchor"] = cell.anchor;
    jc["vertices"] = vertex_refs(cell);
    ordered_json residuals;
    if (cell.kind == CellKind::rectified_cube) {
      ordered_json squares = ordered_json::array();
      for (const auto& face : cell.square_faces) squares.push_back(face);
      jc["square_faces"] = squares;
      ordered_json triangles = ordered_json::array();
      for (const auto& face : cell.triangle_faces) triangles.push_back(face);
      jc["triangle_faces"] = triangles;
      ordered_json sq = ordered_json::array();
      for (std::size_t s = 0; s < cv.squares.size(); ++s) sq.push_back(detail::square_json(cv.squares[s], cv.completion[s]));
      residuals["squares"] = sq;
      if (cv.star) {
        ordered_json tri = ordered_json::array();
        for (const auto& t : cv.star->triangles) {
          ordered_json jt;
          jt["collinearity"] = detail::number_or_null(t.collinearity);
          jt["caustics"] = t.caustics;
          jt["pass"] = t.ok;
          tri.push_back(jt);
        }
        residuals["triangles"] = tri;
        residuals["membership"] = cv.star->membership_ok;
      }
    } else {
      residuals["collinearity"] = detail::number_or_null(cv.cross->collinearity);
      residuals["same_quadric"] = detail::number_or_null(cv.cross->same_quadric);
      if (honeycomb.m() == 2) residuals["cross_ratio"] = detail::optional_number(cv.cross->cross_ratio);
    }
    residuals["pass"] = cv.pass;
    jc["residuals"] = residuals;
    cells.push_back(std::move(jc));
  }
  doc["cells"] = std::move(cells);

  ordered_json partial = ordered_json::array();
  for (const HoneycombCell& cell : honeycomb.partial_cells) {
    ordered_json jc;
    jc["kind"] = to_string(cell.kind);
    jc["anchor"] = cell.anchor;
    jc["partial"] = true;
    jc["vertices"] = vertex_refs(cell);
    partial.push_back(std::move(jc));
  }
  doc["partial_cells"] = std::move(partial);
  doc["pass"] = verification.pass;
  return doc;
}

inline void export_lattice(const ConfocalFamily& f, const HPMaps& maps, const Honeycomb& honeycomb,
                           const LatticeVerification& verification, const std::string& path) {
  write_text_file(path, dump_json(lattice_document(f, maps, honeycomb, verification)));
}

/// Numeric content of an exported lattice document.
struct LatticeDocument {
  int m = 0;
  int d = 0;
  std::vector<double> semi_axes;
  std::vector<double> lambdas;
  std::vector<int> window;
  struct Vertex {
    std::vector<int> dcoords;
    int direction;  // 1-based
    std::optional<Vec> hyperplane;
    std::optional<Vec> touching_point;
    std::optional<double> caustic;
  };
  std::vector<Vertex> vertices;
  struct Cell {
    std::string kind;
    std::vector<int> anchor;
    std::vector<int> vertices;
    bool partial;
  };
  std::vector<Cell> cells;
  std::vector<Cell> partial_cells;
};

inline LatticeDocument parse_lattice_document(std::string_view text) {
  const auto doc = nlohmann::json::parse(text.begin(), text.end());
  if (doc.value("format", "") != "billnet.lattice") {
    throw GeometryError(ErrorKind::invalid_argument, "not a billnet lattice document");
  }
  LatticeDocument out;
  out.m = doc.at("m").get<int>();
  out.d = doc.at("d").get<int>();
  out.semi_axes = doc.at("semi_axes").get<std::vector<double>>();
  out.lambdas = doc.at("lambdas").get<std::vector<double>>();
  out.window = doc.at("window").get<std::vector<int>>();
  for (const auto& jv : doc.at("vertices")) {
    LatticeDocument::Vertex v{jv.at("dcoords").get<std::vector<int>>(), jv.at("direction").get<int>(), {}, {}, {}};
    if (!jv.at("hyperplane").is_null()) v.hyperplane = detail::json_vec(jv.at("hyperplane"));
    if (!jv.at("touching_point").is_null()) v.touching_point = detail::json_vec(jv.at("touching_point"));
    if (!jv.at("caustic").is_null()) v.caustic = jv.at("caustic").get<double>();
    out.vertices.push_back(std::move(v));
  }
  auto read_cells = [](const nlohmann::json& arr, std::vector<LatticeDocument::Cell>& dst) {
    for (const auto& jc : arr) {
      dst.push_back({jc.at("kind").get<std::string>(), jc.at("anchor").get<std::vector<int>>(),
                     jc.at("vertices").get<std::vector<int>>(), jc.value("partial", false)});
    }
  };
  read_cells(doc.at("cells"), out.cells);
  read_cells(doc.at("partial_cells"), out.partial_cells);
  return out;
}

// ---------------------------------------------------------------------------
// Net export / import.

inline ordered_json net_document(const ConfocalFamily& f, const DRNet& net) {
  ordered_json doc;
  doc["format"] = "billnet.net";
  doc["version"] = 1;
  doc["semi_axes"] = f.semi_axes();
  ordered_json lambdas = ordered_json::array();
  for (QuadricParam l : net.lambdas) lambdas.push_back(l.value);
  doc["lambdas"] = lambdas;
  doc["window"] = net.window;
  ordered_json lines = ordered_json::array();
  for (const auto& [n, line] : net.lines) {
    ordered_json jl;
    jl["index"] = n;
    jl["base"] = detail::vec_json(line.base());
    jl["dir"] = detail::vec_json(line.direction());
    lines.push_back(std::move(jl));
  }
  doc["lines"] = std::move(lines);
  ordered_json points = ordered_json::array();
  for (const auto& [edge, x] : net.edge_points) {
    ordered_json jp;
    jp["dcoords"] = edge.dcoords();
    jp["point"] = detail::vec_json(x);
    points.push_back(std::move(jp));
  }
  doc["edge_points"] = std::move(points);
  return doc;
}

inline std::pair<ConfocalFamily, DRNet> parse_net_document(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("malformed net document: ") + e.what());
  }
  if (doc.value("format", "") != "billnet.net") throw ConfigError("not a billnet net document");
  try {
    ConfocalFamily f(doc.at("semi_axes").get<std::vector<double>>());
    DRNet net;
    for (double l : doc.at("lambdas").get<std::vector<double>>()) net.lambdas.emplace_back(l);
    net.window = doc.at("window").get<std::vector<int>>();
    for (const auto& jl : doc.at("lines")) {
      net.lines.emplace(jl.at("index").get<std::vector<int>>(),
                        ProjLine(detail::json_vec(jl.at("base")), detail::json_vec(jl.at("dir"))));
    }
    if (doc.contains("edge_points")) {
      for (const auto& jp : doc.at("edge_points")) {
        net.edge_points.emplace(MidVertex(jp.at("dcoords").get<std::vector<int>>()), detail::json_vec(jp.at("point")));
      }
    }
    bool complete = net.lambdas.size() == net.window.size();
    for_each_lattice_point(net.window, [&](const LatticePoint& n) { complete = complete && net.lines.count(n); });
    if (!complete) throw ConfigError("net document does not cover its window");
    return {std::move(f), std::move(net)};
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid net document: ") + e.what());
  } catch (const GeometryError& e) {
    throw ConfigError(std::string("invalid net document: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// SVG rendering of the M^2 tiling.

namespace detail {

/// Six significant digits with tiny values snapped to zero, so annotations do
/// not depend on rounding noise.
inline std::string pretty(double x) {
  if (!std::isfinite(x)) return "n/a";
  if (std::abs(x) < 1e-9) x = 0.0;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

inline std::string svg_point(const std::vector<int>& d, const std::vector<int>& window, double unit, double margin) {
  const double x = margin + unit * d[0];
  const double y = margin + unit * (2 * window[1] - d[1]);
  std::ostringstream os;
  os << x << ',' << y;
  return os.str();
}

}  // namespace detail

/// SVG 1.1 drawing of M^2: rectified squares white, complete cross polytopes
/// gray, vertices with hover annotations.
inline std::string render_tiling_svg(const ConfocalFamily& f, const HPMaps& maps, const Honeycomb& honeycomb,
                                     const LatticeVerification& verification) {
  if (honeycomb.m() != 2) throw GeometryError(ErrorKind::unsupported, "tiling rendering supports m = 2 only");
  const double unit = 40.0;
  const double margin = 20.0;
  const double width = 2 * margin + unit * 2 * honeycomb.window[0];
  const double height = 2 * margin + unit * 2 * honeycomb.window[1];
  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"no\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << width << "\" height=\"" << height
     << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n"
     << "  <title>midpoint lattice M^2, window " << honeycomb.window[0] << "x" << honeycomb.window[1] << "</title>\n";

  auto polygon = [&](const HoneycombCell& cell, const std::string& note) {
    // cyclic order around the diamond
    std::vector<std::vector<int>> corners;
    if (cell.kind == CellKind::rectified_cube) {
      for (int idx : cell.square_faces.front()) corners.push_back(cell.vertices[static_cast<std::size_t>(idx)].dcoords());
    } else {
      corners = {cell.vertices[0].dcoords(), cell.vertices[2].dcoords(), cell.vertices[1].dcoords(),
                 cell.vertices[3].dcoords()};
    }
    os << "    <polygon points=\"";
    for (std::size_t k = 0; k < corners.size(); ++k) {
      os << (k ? " " : "") << detail::svg_point(corners[k], honeycomb.window, unit, margin);
    }
    os << "\"><title>" << note << "</title></polygon>\n";
  };

  os << "  <g id=\"gray-squares\" fill=\"#bdbdbd\" stroke=\"#000000\" stroke-width=\"1\">\n";
  for (std::size_t k = 0; k < honeycomb.cells.size(); ++k) {
    const auto& cell = honeycomb.cells[k];
    if (cell.kind != CellKind::cross_polytope) continue;
    const auto& r = *verification.cells[k].cross;
    std::string note = "cross polytope " + format_point(cell.anchor) + ": touching points " +
                       (r.collinearity < 1e-9 ? "collinear" : "NOT collinear") + ", cross-ratio " +
                       (r.cross_ratio ? detail::pretty(*r.cross_ratio) : std::string("n/a"));
    polygon(cell, note);
  }
  os << "  </g>\n";
  os << "  <g id=\"white-squares\" fill=\"#ffffff\" stroke=\"#000000\" stroke-width=\"1\">\n";
  for (std::size_t k = 0; k < honeycomb.cells.size(); ++k) {
    const auto& cell = honeycomb.cells[k];
    if (cell.kind != CellKind::rectified_cube) continue;
    const auto& s = verification.cells[k].squares.front();
    std::string note = "rectified square " + format_point(cell.anchor) + ": " +
                       (s.pencil_ok ? "pencil" : "NOT a pencil") + ", cross-ratio " +
                       (s.cross_ratio ? detail::pretty(*s.cross_ratio) : std::string("n/a"));
    polygon(cell, note);
  }
  os << "  </g>\n";
  os << "  <g id=\"vertices\" fill=\"#000000\">\n";
  for (const MidVertex& v : honeycomb.vertices) {
    const auto xy = detail::svg_point(v.dcoords(), honeycomb.window, unit, margin);
    const auto comma = xy.find(',');
    os << "    <circle cx=\"" << xy.substr(0, comma) << "\" cy=\"" << xy.substr(comma + 1) << "\" r=\"3\"><title>"
       << format_point(v.dcoords()) << " direction " << v.direction() + 1;
    if (maps.contains(v)) {
      const Vec p = maps.point(v).affine();
      os << ", caustic " << detail::pretty(hyperplane_caustic(f, maps.plane(v)).value) << ", touching point (";
      for (Eigen::Index i = 0; i < p.size(); ++i) os << (i ? ", " : "") << detail::pretty(p[i]);
      os << ")";
    }
    os << "</title></circle>\n";
  }
  os << "  </g>\n</svg>\n";
  return os.str();
}

// ---------------------------------------------------------------------------
// End-to-end verification.

enum class ExitCode : int { pass = 0, verification_failure = 1, config_error = 2, construction_failure = 3 };

struct SceneResult {
  ConfocalFamily family;
  DRNet net;
  NetReport net_report;
  std::optional<HPMaps> maps;
  std::optional<Honeycomb> honeycomb;
  std::optional<LatticeVerification> lattice;
};

/// Verifies an already built net; lattice checks run when the net passes and m is 2 or 3.
inline SceneResult verify_scene(const ConfocalFamily& f, DRNet net, const Tolerances& tol) {
  SceneResult r{f, std::move(net), {}, std::nullopt, std::nullopt, std::nullopt};
  r.net_report = verify_net(f, r.net, tol);
  if (!r.net_report.pass) return r;
  r.maps = extract_maps(f, r.net, tol);
  if (r.net.m() == 2 || r.net.m() == 3) {
    r.honeycomb = enumerate_lattice(r.net.window);
    r.lattice = verify_lattice(f, *r.maps, *r.honeycomb, tol);
  }
  return r;
}

/// Builds the scene's net and verifies it. Throws NetConstructionError.
inline SceneResult run_scene(const SceneConfig& cfg) {
  const ConfocalFamily f = cfg.family();
  BuildOptions options;
  options.tol = cfg.tol;
  DRNet net = build_net(f, cfg.quadric_params(), cfg.initial_line(), cfg.window, options);
  return verify_scene(f, std::move(net), cfg.tol);
}

struct VerificationOptions {
  /// Gate the exit status on |CR + 1| < tol_cr for every square face.
  bool strict_harmonic = false;
};

namespace detail {

struct Row {
  std::string name;
  std::size_t count = 0;
  std::size_t failed = 0;
  double worst = 0.0;

  void add(double residual, bool ok) {
    ++count;
    if (!ok) ++failed;
    worst = std::max(worst, std::isfinite(residual) ? residual : std::numeric_limits<double>::infinity());
  }
};

inline std::string sci(double x) {
  if (!std::isfinite(x)) return "inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2e", x);
  return buf;
}

}  // namespace detail

/// Prints the summary table; returns true when every gated check passes.
inline bool print_summary(std::ostream& os, const SceneResult& r, const Tolerances& tol,
                          const VerificationOptions& options = {}) {
  using detail::Row;
  std::vector<Row> rows;
  Row edges{"net edges (reflection law)"}, quads{"net quadrilaterals (pencil)"}, axes{"net axes (caustic drift)"};
  for (const auto& e : r.net_report.edges) edges.add(std::max({e.quadric, e.line_gap, e.mirror}), e.ok);
  for (const auto& q : r.net_report.quads) quads.add(q.pencil, q.ok);
  for (const auto& a : r.net_report.axes) axes.add(a.caustic_drift, a.ok);
  rows = {edges, quads, axes};

  Row collinear{"cross polytopes (collinear P)"}, same{"cross polytopes (same quadric)"};
  Row pencil{"square faces (pencil)"}, tangency{"square faces (opposite tangency)"};
  Row completion{"square faces (completion)"}, triangles{"cuboctahedra (collinear triplets)"};
  Row harmonic{"square faces |CR+1| (informational)"};
  double gray_min = std::numeric_limits<double>::infinity(), gray_max = -gray_min;
  bool gray_seen = false;
  if (r.lattice) {
    for (const auto& cv : r.lattice->cells) {
      if (cv.cross) {
        collinear.add(cv.cross->collinearity, cv.cross->collinearity < tol.rank);
        same.add(cv.cross->same_quadric, cv.cross->same_quadric < 1e-10);
        if (cv.cross->cross_ratio) {
          gray_seen = true;
          gray_min = std::min(gray_min, *cv.cross->cross_ratio);
          gray_max = std::max(gray_max, *cv.cross->cross_ratio);
        }
      }
      for (std::size_t k = 0; k < cv.squares.size(); ++k) {
        const auto& s = cv.squares[k];
        pencil.add(s.pencil, s.pencil_ok);
        tangency.add(s.tangency, s.tangency_ok);
        harmonic.add(s.harmonic_deviation, s.harmonic);
        if (k < cv.completion.size()) completion.add(cv.completion[k], cv.completion[k] < kCompletionTolerance);
      }
      if (cv.star) {
        for (const auto& t : cv.star->triangles) triangles.add(t.collinearity, t.ok);
      }
    }
    rows.insert(rows.end(), {collinear, same, pencil, tangency, completion});
    if (triangles.count) rows.push_back(triangles);
  }

  os << "check                                   count  failed  max residual\n";
  for (const auto& row : rows) {
    os << std::left << std::setw(38) << row.name << std::right << std::setw(7) << row.count << std::setw(8)
       << row.failed << "  " << detail::sci(row.worst) << "\n";
  }
  if (r.lattice) {
    os << std::left << std::setw(38) << harmonic.name << std::right << std::setw(7) << harmonic.count
       << std::setw(8) << harmonic.failed << "  " << detail::sci(harmonic.worst) << "\n";
  }
  if (gray_seen) {
    os << "gray squares cross-ratio range: [" << gray_min << ", " << gray_max << "]\n";
  }
  bool ok = r.net_report.pass && (!r.lattice || r.lattice->pass);
  if (options.strict_harmonic && r.lattice) ok = ok && r.lattice->strict_pass;
  if (!r.net_report.pass) {
    if (const auto q = r.net_report.first_failing_quad()) {
      os << "first failing quadrilateral: base " << format_point(q->base) << " directions (" << q->i + 1 << ","
         << q->j + 1 << ")\n";
    }
  }
  os << "result: " << (ok ? "PASS" : "FAIL") << "\n";
  return ok;
}

/// Builds, verifies and reports one scene; returns the process exit status.
inline ExitCode run_verification(const SceneConfig& cfg, std::ostream& os, const VerificationOptions& options = {}) {
  os << "billnet verification: d=" << cfg.semi_axes.size() << " m=" << cfg.window.size() << " window ";
  for (std::size_t k = 0; k < cfg.window.size(); ++k) os << (k ? "x" : "") << cfg.window[k];
  os << "\n";
  try {
    const SceneResult r = run_scene(cfg);
    return print_summary(os, r, cfg.tol, options) ? ExitCode::pass : ExitCode::verification_failure;
  } catch (const NetConstructionError& e) {
    os << "construction failure: " << e.what() << "\n";
    return ExitCode::construction_failure;
  } catch (const GeometryError& e) {
    os << "construction failure: " << e.what() << "\n";
    return ExitCode::construction_failure;
  }
}

}  // namespace billnet
