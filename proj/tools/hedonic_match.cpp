// hedonic-match <solve|diagnose|reproduce|reduce|brute-force> [flags]

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "hedonic/cli.hpp"

namespace {

void add_instance_flags(CLI::App* sub, hedonic::cli::RunConfig& cfg) {
  sub->add_option("--surplus", cfg.surplus, "surplus model JSON");
  sub->add_option("--mu", cfg.mu, "buyer measure CSV (x1..xd,weight)");
  sub->add_option("--nu", cfg.nu, "seller measure CSV");
  sub->add_option("--z", cfg.z, "good points CSV");
  sub->add_option("--alpha", cfg.alpha, "good measure CSV (fixes the third marginal)");
}

void add_common_flags(CLI::App* sub, hedonic::cli::RunConfig& cfg) {
  sub->add_option("--tol", cfg.tol, "stability / equality tolerance")->capture_default_str();
  sub->add_option("--grad-tol", cfg.grad_tol, "relative gradient clustering tolerance")->capture_default_str();
  sub->add_option("--seed", cfg.seed, "seed for random instances and sample points")->capture_default_str();
  sub->add_option_function<std::string>(
      "--out",
      [&cfg](const std::string& dir) {
        cfg.out_dir = dir;
        cfg.out_dir_given = true;
      },
      "output directory (HEDONIC_MATCH_OUT takes precedence)");
}

}  // namespace

int main(int argc, char** argv) {
  hedonic::cli::RunConfig cfg;
  CLI::App app{"Stable matchings, payoffs and diagnostics for hybrid matching-hedonic models"};
  app.require_subcommand(1);

  auto* solve = app.add_subcommand("solve", "solve for an optimal (stable) matching");
  add_instance_flags(solve, cfg);
  add_common_flags(solve, cfg);
  solve->add_option("--method", cfg.method, "reduce_lift | direct_lp | tripartite")
      ->check(CLI::IsMember({"reduce_lift", "direct_lp", "tripartite"}))
      ->capture_default_str();
  solve->add_option("--random", cfg.random, "random equal-weight instance with N agents per side");
  solve->add_option("--random-z", cfg.random_z, "number of random goods")->capture_default_str();

  auto* diagnose = app.add_subcommand("diagnose", "stability, purity, signature and twist reports");
  add_instance_flags(diagnose, cfg);
  add_common_flags(diagnose, cfg);
  diagnose->add_option("--coupling", cfg.coupling, "coupling JSON");
  diagnose->add_option("--potentials", cfg.potentials, "potentials CSV");
  diagnose->add_option("--signature", cfg.signature_points, "signature reports at N random points");
  diagnose->add_option("--radius", cfg.radius, "support-dimension neighbourhood radius")->capture_default_str();

  auto* repro = app.add_subcommand("reproduce", "rebuild a worked example and check its expected properties");
  repro->add_option("example", cfg.example, "example id")
      ->required()
      ->check(CLI::IsMember({"counterexample", "bilinear-tss", "bilinear-tzss-family", "supermodular-1d",
                             "strictly-hedonic", "expcos-signature", "hedonic-pointmass-alpha"}));
  repro->add_option("--a", cfg.a, "surplus parameter for bilinear-tzss-family")->capture_default_str();
  add_common_flags(repro, cfg);

  auto* red = app.add_subcommand("reduce", "reduced surplus and best-good selector as CSV");
  add_instance_flags(red, cfg);
  add_common_flags(red, cfg);

  auto* brute = app.add_subcommand("brute-force", "exhaustive optimum for small equal-weight instances");
  add_instance_flags(brute, cfg);
  add_common_flags(brute, cfg);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : hedonic::cli::kExitInput;
  }
  cfg.command = app.get_subcommands().front()->get_name();
  return hedonic::cli::run(cfg, std::cout, std::cerr);
}
