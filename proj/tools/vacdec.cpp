// vacdec: decoherence factors for charges and dipoles near a conducting plate.
//
//   vacdec run scenario.scn [--sweep z0=0.01:10:25 --log-axis] [--oracle] [--out f.csv]
//   vacdec canon scenario.scn

#include <iostream>

#include <CLI11.hpp>

#include "vacdec/cli.hpp"

int main(int argc, char** argv) {
  namespace vc = vacdec::cli;

  CLI::App app{"Electromagnetic vacuum decoherence near a conducting plane"};
  app.set_version_flag("--version", std::string(vc::kToolVersion));
  app.require_subcommand(1);

  vc::RunOptions ro;
  std::string method, sweep, out;
  double tau = 0.0, kmax = 0.0;
  std::uint64_t samples = 0, seed = 0;

  auto* run = app.add_subcommand("run", "evaluate a scenario, optionally over a sweep");
  run->add_option("scenario", ro.scenario, "scenario file")->required()->check(CLI::ExistingFile);
  auto* o_sweep = run->add_option("--sweep", sweep, "axis=a:b:n (axis: z0, tau, N; orientation=both)");
  run->add_flag("--log-axis", ro.log_axis, "logarithmic sweep spacing");
  auto* o_method = run->add_option("--method", method, "dipole | full")
                       ->check(CLI::IsMember({"dipole", "full"}));
  auto* o_tau = run->add_option("--tau", tau, "ramp time of the trapezoid profile");
  auto* o_kmax = run->add_option("--kmax", kmax, "hard radial cutoff");
  run->add_flag("--oracle", ro.oracle, "cross-check each point with the Monte Carlo oracle");
  auto* o_samples = run->add_option("--mc-samples", samples, "oracle sample count");
  auto* o_seed = run->add_option("--seed", seed, "oracle seed");
  auto* o_out = run->add_option("--out", out, "results file (default: stdout)");
  run->add_flag("--emit-plot-data", ro.emit_plot_data,
                "write visibility vs z0 for both orientations next to --out");
  run->add_option("--format", ro.format, "csv | json")->check(CLI::IsMember({"csv", "json"}));
  run->add_option("--workers", ro.workers, "worker threads, 0 = all cores")->check(CLI::NonNegativeNumber);

  std::string canon_path;
  auto* canon = app.add_subcommand("canon", "print the canonical scenario and its hash");
  canon->add_option("scenario", canon_path, "scenario file")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : vc::kExitInvalid;
  }

  if (*canon) return vc::canon(canon_path, std::cout, std::cerr);

  if (*o_sweep) ro.sweep = sweep;
  if (*o_method) ro.method = method;
  if (*o_tau) ro.tau = tau;
  if (*o_kmax) ro.k_max = kmax;
  if (*o_samples) ro.mc_samples = samples;
  if (*o_seed) ro.seed = seed;
  if (*o_out) ro.out = out;
  return vc::run(ro, std::cout, std::cerr);
}
