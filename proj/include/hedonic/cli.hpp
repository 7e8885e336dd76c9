#pragma once

// Command implementations behind the hedonic-match executable. Argument
// parsing lives in tools/; everything here takes a filled RunConfig so the
// commands can be driven from tests without a subprocess.

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <random>
#include <string>

#include "hedonic/hedonic.hpp"
#include "hedonic/io.hpp"
#include "hedonic/reproduce.hpp"

namespace hedonic::cli {

using json = nlohmann::json;

inline constexpr int kExitOk = 0;
inline constexpr int kExitAssertion = 1;
inline constexpr int kExitInput = 2;
inline constexpr int kExitInfeasible = 3;

inline constexpr const char* kOutEnv = "HEDONIC_MATCH_OUT";

struct RunConfig {
  std::string command;  // solve | diagnose | reproduce | reduce | brute-force
  std::string surplus, mu, nu, z, alpha, coupling, potentials;
  std::string method = "reduce_lift";  // reduce_lift | direct_lp | tripartite
  std::string example;                 // reproduce id
  double a = 0.5;
  double tol = kStabilityTol;
  double grad_tol = kGradTolRel;
  double radius = 0.2;                 // support-dimension neighbourhood
  std::string out_dir = "hedonic_out";
  bool out_dir_given = false;
  std::uint64_t seed = 1;
  std::size_t random = 0;              // > 0: random equal-weight instance with this many agents per side
  std::size_t random_z = 4;
  std::size_t signature_points = 0;
};

/// The environment variable wins over --out.
inline std::optional<std::string> output_dir(const RunConfig& cfg) {
  if (const char* env = std::getenv(kOutEnv); env && *env) return std::string(env);
  if (cfg.out_dir_given || cfg.command == "solve" || cfg.command == "diagnose" || cfg.command == "reduce" ||
      cfg.command == "brute-force")
    return cfg.out_dir;
  return std::nullopt;
}

struct Instance {
  SurplusModel s = make_counterexample();
  DiscreteMeasure mu, nu;
  std::vector<Point> Z;
  std::optional<DiscreteMeasure> alpha;
};

namespace detail {

inline void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::ParseError, what);
}

inline std::vector<Point> random_points(std::mt19937_64& rng, std::size_t n, std::size_t d) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Point> pts(n, Point(d));
  for (auto& p : pts)
    for (auto& v : p) v = u(rng);
  return pts;
}

inline void write_file(const std::filesystem::path& dir, const std::string& name, const std::string& text) {
  std::filesystem::create_directories(dir);
  io::write_text((dir / name).string(), text);
}

}  // namespace detail

/// Files, or a seeded random equal-weight instance when cfg.random > 0.
inline Instance load_instance(const RunConfig& cfg, bool need_z = true) {
  Instance inst;
  if (!cfg.surplus.empty()) inst.s = io::read_surplus_json(cfg.surplus);
  else detail::require(cfg.random > 0, "--surplus is required");
  if (cfg.random > 0) {
    std::mt19937_64 rng(cfg.seed);
    const Dims d = inst.s.dims();
    inst.mu = uniform_measure(detail::random_points(rng, cfg.random, d.x));
    inst.nu = uniform_measure(detail::random_points(rng, cfg.random, d.y));
    inst.Z = detail::random_points(rng, cfg.random_z, d.z);
    if (cfg.method == "tripartite") inst.alpha = uniform_measure(inst.Z);
    return inst;
  }
  detail::require(!cfg.mu.empty() && !cfg.nu.empty(), "--mu and --nu are required");
  inst.mu = io::read_measure_csv(cfg.mu);
  inst.nu = io::read_measure_csv(cfg.nu);
  validate_measure(inst.mu);
  validate_measure(inst.nu);
  if (!cfg.alpha.empty()) {
    inst.alpha = io::read_measure_csv(cfg.alpha);
    validate_measure(*inst.alpha);
    inst.Z = inst.alpha->points;
  }
  if (!cfg.z.empty()) inst.Z = io::read_points_csv(cfg.z);
  if (need_z) detail::require(!inst.Z.empty(), "--z (or --alpha) is required");
  const Dims d = inst.s.dims();
  if (inst.mu.dim() != d.x || inst.nu.dim() != d.y || (!inst.Z.empty() && inst.Z.front().size() != d.z))
    throw Error(ErrorCode::DimensionMismatch, "measure dimensions do not match the surplus model");
  return inst;
}

inline int cmd_solve(const RunConfig& cfg, std::ostream& out) {
  const Instance inst = load_instance(cfg, cfg.method != "tripartite");
  SolveResult res;
  if (cfg.method == "reduce_lift") res = solve_hybrid(inst.s, inst.mu, inst.nu, inst.Z, HybridMethod::ReduceLift);
  else if (cfg.method == "direct_lp") res = solve_hybrid(inst.s, inst.mu, inst.nu, inst.Z, HybridMethod::DirectLp);
  else if (cfg.method == "tripartite") {
    detail::require(inst.alpha.has_value(), "--method tripartite needs --alpha");
    res = solve_tripartite_fixed_alpha(inst.s, inst.mu, inst.nu, *inst.alpha);
  } else {
    throw Error(ErrorCode::ParseError, "unknown --method '" + cfg.method + "'");
  }
  const std::filesystem::path dir = *output_dir(cfg);
  detail::write_file(dir, "result.json", io::canonical_dump(io::to_json(res)));
  detail::write_file(dir, "coupling.json", io::canonical_dump(io::to_json(res.coupling)));
  detail::write_file(dir, "potentials.csv", io::potentials_csv(res.potentials));
  out << "objective " << io::detail::format_double(res.objective) << '\n'
      << "gap " << io::detail::format_double(res.gap) << '\n'
      << "degenerate " << (res.degenerate ? "yes" : "no") << '\n';
  return kExitOk;
}

inline int cmd_diagnose(const RunConfig& cfg, std::ostream& out) {
  detail::require(!cfg.surplus.empty(), "--surplus is required");
  const SurplusModel s = io::read_surplus_json(cfg.surplus);
  json bundle = json::object();
  bundle["surplus"] = io::to_json(s);
  bundle["tolerances"] = {{"tol", cfg.tol}, {"grad_tol", cfg.grad_tol}};
  detail::require(cfg.signature_points > 0 || !cfg.coupling.empty(), "nothing to diagnose: give --coupling or --signature");

  if (cfg.signature_points > 0) {
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const Dims d = s.dims();
    json sigs = json::array();
    for (std::size_t n = 0; n < cfg.signature_points; ++n) {
      Point x(d.x), y(d.y), z(d.z);
      for (auto* p : {&x, &y, &z})
        for (auto& v : *p) v = u(rng);
      const auto r = signature(s, x, y, z);
      out << "signature (" << r.lambda_plus << ',' << r.lambda_minus << ',' << r.lambda_zero << ") bound "
          << r.dimension_bound << '\n';
      sigs.push_back(io::to_json(r));
    }
    bundle["signatures"] = sigs;
  }

  if (!cfg.coupling.empty()) {
    RunConfig files = cfg;
    files.random = 0;
    const Instance inst = load_instance(files);
    const Coupling c = io::coupling_from_json(io::parse_json(io::read_text(cfg.coupling), cfg.coupling));
    detail::require(!cfg.potentials.empty(), "--potentials is required with --coupling");
    const DualPotentials p = io::read_potentials_csv(cfg.potentials);
    const auto& X = inst.mu.points;
    const auto& Y = inst.nu.points;

    const auto stab = verify_stability(s, X, Y, inst.Z, c, p, cfg.tol);
    const auto purity = check_purity(c);
    bundle["stability"] = io::to_json(stab);
    bundle["purity"] = io::to_json(purity);
    bundle["marginal_error"] = marginal_error(c, inst.mu.weights, inst.nu.weights);
    out << "stability: " << (stab.stable ? "stable" : "not stable") << '\n'
        << "purity: " << (purity.pure ? "pure" : "not pure") << '\n';
    if (s.has_uv()) bundle["prices"] = io::to_json(compute_prices(s, X, Y, inst.Z, c, p));

    // Signature at the mass-weighted support centroid.
    const Dims d = s.dims();
    Point cx(d.x, 0.0), cy(d.y, 0.0), cz(d.z, 0.0);
    for (const auto& e : c.entries()) {
      const double w = e.mass / c.total_mass();
      for (std::size_t a = 0; a < d.x; ++a) cx[a] += w * X[e.i()][a];
      for (std::size_t a = 0; a < d.y; ++a) cy[a] += w * Y[e.j()][a];
      for (std::size_t a = 0; a < d.z; ++a) cz[a] += w * inst.Z[e.k()][a];
    }
    bundle["signature_at_centroid"] = io::to_json(signature(s, cx, cy, cz));
    if (c.support_size() >= 10 || c.support_size() == 1)
      bundle["support_dimension"] = io::to_json(support_dimension(s, X, Y, inst.Z, c, cfg.radius));

    json twists = json::array();
    auto record = [&](const TwistReport& r) {
      out << r.criterion << ": " << to_string(r.verdict) << '\n';
      twists.push_back(io::to_json(r));
    };
    if (d.x == 1 && d.y == 1 && d.z == 1) {
      std::vector<std::array<double, 3>> pts;
      for (const auto& e : c.entries()) pts.push_back({X[e.i()][0], Y[e.j()][0], inst.Z[e.k()][0]});
      record(check_compatibility_1d(s, pts));
    }
    if (const auto parts = bilinear_parts(s)) {
      record(check_tss_bilinear(parts->A, parts->B, parts->C));
      record(check_tzss_bilinear(parts->A, parts->B, parts->C, parts->D));
    }
    record(sample_splitting_sets(s, X, Y, inst.Z, p.V, cfg.tol, cfg.grad_tol, p.U).report);
    if (s.get_if<StrictlyHedonic>() || s.get_if<Split>()) record(check_strictly_hedonic(s, X, Y, inst.Z, cfg.grad_tol));
    bundle["twist"] = twists;
  }

  detail::write_file(*output_dir(cfg), "report.json", io::canonical_dump(bundle));
  return kExitOk;
}

inline int cmd_reproduce(const RunConfig& cfg, std::ostream& out) {
  reproduce::Options opt;
  opt.a = cfg.a;
  opt.seed = cfg.seed;
  opt.tol = cfg.tol;
  opt.grad_tol = cfg.grad_tol;
  const auto outcome = reproduce::run(cfg.example, opt);
  std::size_t passed = 0;
  for (const auto& a : outcome.assertions) {
    passed += a.pass ? 1 : 0;
    out << (a.pass ? "PASS " : "FAIL ") << a.name;
    if (!a.detail.empty()) out << " (" << a.detail << ')';
    out << '\n';
  }
  out << outcome.id << ": " << passed << '/' << outcome.assertions.size() << " passed\n";
  if (const auto dir = output_dir(cfg)) {
    json j = outcome.report;
    json checks = json::array();
    for (const auto& a : outcome.assertions) checks.push_back({{"name", a.name}, {"pass", a.pass}, {"detail", a.detail}});
    j["assertions"] = checks;
    detail::write_file(*dir, "reproduce-" + outcome.id + ".json", io::canonical_dump(j));
  }
  return outcome.all_pass() ? kExitOk : kExitAssertion;
}

inline int cmd_reduce(const RunConfig& cfg, std::ostream& out) {
  const Instance inst = load_instance(cfg);
  const ReducedSurplus r = reduce(inst.s, inst.mu.points, inst.nu.points, inst.Z);
  std::ostringstream csv;
  write_reduced_csv(csv, r);
  detail::write_file(*output_dir(cfg), "reduced.csv", csv.str());
  std::size_t ties = 0, edges = 0;
  for (std::size_t i = 0; i < r.nx(); ++i)
    for (std::size_t j = 0; j < r.ny(); ++j) {
      ties += r.tied(i, j) ? 1 : 0;
      edges += r.on_boundary(i, j) ? 1 : 0;
    }
  out << "pairs " << r.nx() * r.ny() << " ties " << ties << " boundary " << edges << '\n';
  return kExitOk;
}

inline int cmd_brute_force(const RunConfig& cfg, std::ostream& out) {
  const Instance inst = load_instance(cfg, false);
  detail::require(inst.alpha.has_value() || !inst.Z.empty(), "--z or --alpha is required");
  const BruteForceResult r = inst.alpha ? brute_force_tripartite(inst.s, inst.mu, inst.nu, *inst.alpha)
                                        : brute_force_hybrid(inst.s, inst.mu, inst.nu, inst.Z);
  const json j = {{"objective", r.objective}, {"sigma", r.sigma}, {"tau", r.tau},
                  {"mode", inst.alpha ? "tripartite" : "hybrid"}};
  detail::write_file(*output_dir(cfg), "brute_force.json", io::canonical_dump(j));
  out << "objective " << io::detail::format_double(r.objective) << '\n';
  return kExitOk;
}

/// Maps library errors onto the exit-code contract.
inline int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    if (!(cfg.tol > 0.0) || !(cfg.grad_tol > 0.0)) throw Error(ErrorCode::ParseError, "tolerances must be positive");
    if (cfg.command == "solve") return cmd_solve(cfg, out);
    if (cfg.command == "diagnose") return cmd_diagnose(cfg, out);
    if (cfg.command == "reproduce") return cmd_reproduce(cfg, out);
    if (cfg.command == "reduce") return cmd_reduce(cfg, out);
    if (cfg.command == "brute-force") return cmd_brute_force(cfg, out);
    throw Error(ErrorCode::ParseError, "unknown command '" + cfg.command + "'");
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return (e.code() == ErrorCode::InfeasibleMarginals || e.code() == ErrorCode::IterationLimit) ? kExitInfeasible
                                                                                                  : kExitInput;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  }
}

}  // namespace hedonic::cli
