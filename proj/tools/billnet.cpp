#include <cstdint>
#include <iostream>
#include <random>
#include <string>

#include "CLI11.hpp"

#include "billnet/io.hpp"
#include "billnet/sampling.hpp"

using namespace billnet;

namespace {

struct Options {
  std::string config;
  std::string out;
  std::string net;
  std::optional<double> tol_rank;
  std::optional<double> tol_cr;
  std::uint64_t seed = 1;
  int random_trials = 0;
  int steps = -1;
  bool strict_harmonic = false;
};

int code(ExitCode c) { return static_cast<int>(c); }

SceneConfig load(const Options& o) {
  if (o.config.empty()) throw ConfigError("--config is required");
  std::string text;
  try {
    text = read_text_file(o.config);
  } catch (const GeometryError& e) {
    throw ConfigError(e.what());
  }
  SceneConfig cfg = parse_config(text);
  if (o.tol_rank) cfg.tol.rank = *o.tol_rank;
  if (o.tol_cr) cfg.tol.cr = *o.tol_cr;
  if (o.steps >= 0) cfg.steps = o.steps;
  return cfg;
}

std::string out_path(const Options& o, const std::string& configured, const char* what) {
  if (!o.out.empty()) return o.out;
  if (!configured.empty()) return configured;
  throw ConfigError(std::string("no output path for ") + what + " (use --out)");
}

void print_caustics(std::ostream& os, const CausticSet& c) {
  os << "caustics:";
  for (double v : c.values()) os << ' ' << std::setprecision(17) << v;
  os << "\n";
}

int cmd_caustics(const Options& o) {
  const SceneConfig cfg = load(o);
  const ConfocalFamily f = cfg.family();
  print_caustics(std::cout, line_caustics(f, cfg.initial_line()));
  return code(ExitCode::pass);
}

int cmd_trajectory(const Options& o) {
  const SceneConfig cfg = load(o);
  const ConfocalFamily f = cfg.family();
  const QuadricParam wall{cfg.lambdas.front()};
  const CausticSet reference = line_caustics(f, cfg.initial_line());
  print_caustics(std::cout, reference);
  const auto events = trajectory(f, wall, cfg.initial_line(), cfg.steps, cfg.tol);
  double worst = 0.0;
  std::cout << std::setprecision(10);
  for (std::size_t k = 0; k < events.size(); ++k) {
    const Vec x = events[k].affine_point();
    const double drift = caustic_drift(reference, line_caustics(f, events[k].outgoing));
    worst = std::max(worst, drift);
    std::cout << "step " << k + 1 << " point (";
    for (Eigen::Index i = 0; i < x.size(); ++i) std::cout << (i ? ", " : "") << x[i];
    std::cout << ") caustic drift " << detail::sci(drift) << "\n";
  }
  const bool ok = worst < cfg.tol.caustic;
  std::cout << "max caustic drift " << detail::sci(worst) << "\nresult: " << (ok ? "PASS" : "FAIL") << "\n";
  return code(ok ? ExitCode::pass : ExitCode::verification_failure);
}

int cmd_net_build(const Options& o) {
  const SceneConfig cfg = load(o);
  const std::string path = out_path(o, cfg.net_path, "the net");
  const ConfocalFamily f = cfg.family();
  BuildOptions options;
  options.tol = cfg.tol;
  const DRNet net = build_net(f, cfg.quadric_params(), cfg.initial_line(), cfg.window, options);
  write_text_file(path, dump_json(net_document(f, net)));
  std::cout << "net with " << net.lines.size() << " lines written to " << path << "\n";
  return code(ExitCode::pass);
}

/// Random nets over the config's family and window; returns true when all pass.
bool random_nets(const SceneConfig& cfg, const Options& o, std::ostream& os) {
  const ConfocalFamily f = cfg.family();
  std::mt19937_64 rng(o.seed);
  int passed = 0;
  for (int k = 0; k < o.random_trials; ++k) {
    const auto lambdas = random_ellipsoid_params(f, static_cast<int>(cfg.window.size()), rng);
    const ProjLine line = random_chord(f, lambdas, rng);
    try {
      BuildOptions options;
      options.tol = cfg.tol;
      const SceneResult r = verify_scene(f, build_net(f, lambdas, line, cfg.window, options), cfg.tol);
      const bool ok = r.net_report.pass && (!r.lattice || r.lattice->pass);
      passed += ok;
      if (!ok) os << "random trial " << k + 1 << ": verification failure\n";
    } catch (const GeometryError& e) {
      os << "random trial " << k + 1 << ": construction failure: " << e.what() << "\n";
    }
  }
  os << "random trials (seed " << o.seed << "): " << passed << "/" << o.random_trials << " pass\n";
  return passed == o.random_trials;
}

int cmd_net_verify(const Options& o) {
  VerificationOptions vo;
  vo.strict_harmonic = o.strict_harmonic;
  if (!o.net.empty()) {
    std::string text;
    try {
      text = read_text_file(o.net);
    } catch (const GeometryError& e) {
      throw ConfigError(e.what());
    }
    auto [f, net] = parse_net_document(text);
    Tolerances tol;
    if (o.tol_rank) tol.rank = *o.tol_rank;
    if (o.tol_cr) tol.cr = *o.tol_cr;
    std::cout << "billnet verification of " << o.net << "\n";
    const SceneResult r = verify_scene(f, std::move(net), tol);
    return code(print_summary(std::cout, r, tol, vo) ? ExitCode::pass : ExitCode::verification_failure);
  }
  const SceneConfig cfg = load(o);
  ExitCode result = run_verification(cfg, std::cout, vo);
  if (o.random_trials > 0 && !random_nets(cfg, o, std::cout) && result == ExitCode::pass) {
    result = ExitCode::verification_failure;
  }
  return code(result);
}

int cmd_lattice(const Options& o, bool render) {
  const SceneConfig cfg = load(o);
  const std::string path = render ? out_path(o, cfg.svg_path, "the drawing") : out_path(o, cfg.json_path, "the export");
  if (render && cfg.window.size() != 2) {
    throw GeometryError(ErrorKind::unsupported, "tiling rendering supports m = 2 only");
  }
  const SceneResult r = run_scene(cfg);
  if (!r.maps || !r.lattice) {
    print_summary(std::cout, r, cfg.tol);
    return code(ExitCode::verification_failure);
  }
  if (render) {
    write_text_file(path, render_tiling_svg(r.family, *r.maps, *r.honeycomb, *r.lattice));
  } else {
    export_lattice(r.family, *r.maps, *r.honeycomb, *r.lattice, path);
  }
  std::cout << (render ? "drawing" : "lattice") << " written to " << path << "\n";
  return code(r.lattice->pass ? ExitCode::pass : ExitCode::verification_failure);
}

int cmd_star_verify(const Options& o) {
  const SceneConfig cfg = load(o);
  if (cfg.window.size() != 3) throw ConfigError("star verify needs m = 3 (three lambdas)");
  auto check = [&](const ConfocalFamily& f, const DRNet& net, std::ostream& os, bool verbose) {
    const SceneResult r = verify_scene(f, net, cfg.tol);
    if (!r.lattice) {
      if (verbose) print_summary(os, r, cfg.tol);
      return false;
    }
    bool ok = true;
    for (const auto& cell : r.honeycomb->cells) {
      if (cell.kind != CellKind::rectified_cube) continue;
      const CuboctahedronReport rep = verify_cuboctahedron(f, *r.maps, cell, cfg.tol);
      double trip = std::numeric_limits<double>::infinity();
      try {
        trip = star_round_trip(f, *r.maps, cell, cfg.tol);
      } catch (const GeometryError& e) {
        if (verbose) os << "  seed reconstruction failed: " << e.what() << "\n";
      }
      const bool cell_ok = rep.pass && trip < kCompletionTolerance;
      ok = ok && cell_ok;
      if (verbose) {
        os << "cuboctahedron " << format_point(cell.anchor) << ": triplets " << rep.triangles_passing() << "/8"
           << ", quadruplets " << rep.squares_passing() << "/6, seed round trip " << detail::sci(trip) << "  "
           << (cell_ok ? "PASS" : "FAIL") << "\n";
      }
    }
    return ok;
  };
  BuildOptions options;
  options.tol = cfg.tol;
  const ConfocalFamily f = cfg.family();
  bool ok = check(f, build_net(f, cfg.quadric_params(), cfg.initial_line(), cfg.window, options), std::cout, true);
  if (o.random_trials > 0) {
    std::mt19937_64 rng(o.seed);
    int passed = 0;
    for (int k = 0; k < o.random_trials; ++k) {
      const auto lambdas = random_ellipsoid_params(f, 3, rng);
      try {
        passed += check(f, build_net(f, lambdas, random_chord(f, lambdas, rng), cfg.window, options), std::cout, false);
      } catch (const GeometryError& e) {
        std::cout << "random trial " << k + 1 << ": construction failure: " << e.what() << "\n";
      }
    }
    std::cout << "random trials (seed " << o.seed << "): " << passed << "/" << o.random_trials << " pass\n";
    ok = ok && passed == o.random_trials;
  }
  std::cout << "result: " << (ok ? "PASS" : "FAIL") << "\n";
  return code(ok ? ExitCode::pass : ExitCode::verification_failure);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"billnet: double reflection nets and confocal quadrics"};
  app.require_subcommand(1);
  app.fallthrough();
  Options o;
  app.add_option("--config", o.config, "scene document (JSON)");
  app.add_option("--out", o.out, "output file");
  app.add_option("--tol-rank", o.tol_rank, "rank test tolerance")->check(CLI::PositiveNumber);
  app.add_option("--tol-cr", o.tol_cr, "cross-ratio tolerance")->check(CLI::PositiveNumber);
  app.add_option("--seed", o.seed, "seed for randomized runs");
  app.add_option("--random-trials", o.random_trials, "number of randomized nets to verify")->check(CLI::NonNegativeNumber);

  auto* caustics = app.add_subcommand("caustics", "caustic parameters of the initial line");
  auto* traj = app.add_subcommand("trajectory", "billiard trajectory inside the first quadric");
  traj->add_option("--steps", o.steps, "number of reflections")->check(CLI::NonNegativeNumber);
  auto* net = app.add_subcommand("net", "double reflection nets");
  net->require_subcommand(1);
  auto* net_build = net->add_subcommand("build", "build a net and write it as JSON");
  auto* net_verify = net->add_subcommand("verify", "build or load a net and verify every check");
  net_verify->add_option("--net", o.net, "net document written by net build");
  net_verify->add_flag("--strict-harmonic", o.strict_harmonic, "also require |CR+1| < tol-cr on square faces");
  auto* lattice = app.add_subcommand("lattice", "the midpoint lattice and its honeycomb");
  lattice->require_subcommand(1);
  auto* lattice_export = lattice->add_subcommand("export", "write H and P with per-cell residuals as JSON");
  auto* lattice_render = lattice->add_subcommand("render", "draw the m = 2 tiling as SVG");
  auto* star = app.add_subcommand("star", "six-pointed star configurations");
  star->require_subcommand(1);
  auto* star_verify = star->add_subcommand("verify", "check every cuboctahedron of an m = 3 net");
  for (auto* sub : {net, lattice, star}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int status = app.exit(e);
    return status == 0 ? 0 : code(ExitCode::config_error);
  }

  try {
    if (*caustics) return cmd_caustics(o);
    if (*traj) return cmd_trajectory(o);
    if (*net_build) return cmd_net_build(o);
    if (*net_verify) return cmd_net_verify(o);
    if (*lattice_export) return cmd_lattice(o, false);
    if (*lattice_render) return cmd_lattice(o, true);
    if (*star_verify) return cmd_star_verify(o);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return code(ExitCode::config_error);
  } catch (const NetConstructionError& e) {
    std::cerr << "construction failure: " << e.what() << "\n";
    return code(ExitCode::construction_failure);
  } catch (const GeometryError& e) {
    if (e.kind() == ErrorKind::io || e.kind() == ErrorKind::unsupported) {
      std::cerr << "error: " << e.what() << "\n";
      return code(ExitCode::config_error);
    }
    std::cerr << "construction failure: " << e.what() << "\n";
    return code(ExitCode::construction_failure);
  }
  return code(ExitCode::config_error);
}
