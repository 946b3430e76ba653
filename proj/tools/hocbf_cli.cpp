// Command-line driver: closed-loop scenario runs, oracle cross-checks,
// solution-region maps, and parameter sweeps.  All numeric output goes to
// CSV/JSON files; stdout carries a short human-readable summary.
//
// Exit codes: 0 success, 2 config or usage error, 3 divergence,
// 4 verification failure.

#include <CLI11.hpp>
#include <chrono>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "hocbf/config_io.hpp"
#include "hocbf/csv_io.hpp"
#include "hocbf/sim.hpp"
#include "hocbf/verify.hpp"
#include "hocbf/version.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitDiverged = 3;
constexpr int kExitVerifyFailed = 4;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

// ---- simulate ----

int cmd_simulate(const std::string& config_path, const std::string& out_dir,
                 std::int64_t seed_override) {
  const auto t0 = std::chrono::steady_clock::now();
  hocbf::Scenario sc = hocbf::load_scenario_file(config_path);
  if (seed_override >= 0) sc.seed = static_cast<std::uint64_t>(seed_override);

  std::filesystem::create_directories(out_dir);
  const hocbf::TrajectoryRecord record = hocbf::run_scenario(sc);

  hocbf::write_text_file(out_dir + "/trajectory.csv",
                         hocbf::format_trajectory_csv(record));
  hocbf::write_text_file(out_dir + "/metrics.json",
                         hocbf::metrics_to_json(sc, record).dump(2) + "\n");

  hocbf::RunManifest manifest;
  manifest.command = "simulate";
  manifest.config_path = config_path;
  manifest.out_dir = out_dir;
  manifest.seed = sc.seed;
  manifest.tool_version = hocbf::kVersion;
  manifest.duration_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  hocbf::write_manifest_atomic(out_dir + "/manifest.json", manifest);

  const hocbf::Metrics& m = record.metrics;
  std::cout << "scenario: " << sc.name << "\n"
            << "steps: " << m.steps << "  max|u|: " << num(m.max_u_inf) << "\n";
  if (m.has_margin_metrics)
    std::cout << "min phi0: " << num(m.min_phi0_overall)
              << "  min phi0+varrho: " << num(m.min_phi_issf_overall) << "\n";
  if (record.diverged) {
    std::cerr << "state diverged at t=" << num(record.diverged_at)
              << "; partial trajectory written\n";
    return kExitDiverged;
  }
  std::cout << "wrote " << out_dir << "/{trajectory.csv,metrics.json,manifest.json}\n";
  return kExitOk;
}

// ---- verify-oracle ----

int cmd_verify_oracle(std::size_t samples, std::uint64_t seed, double perturb,
                      const std::string& out_path) {
  hocbf::VerifyOptions opt;
  opt.samples = samples;
  opt.seed = seed;
  opt.perturb = perturb;
  const hocbf::VerifyOutcome outcome = hocbf::verify_closed_forms(opt);

  if (!out_path.empty()) {
    std::string csv = "family,index,u_dev,sigma_dev,kkt_residual\n";
    for (const auto& mm : outcome.mismatches) {
      csv += mm.family;
      csv += ',' + std::to_string(mm.index) + ',' + num(mm.u_dev) + ',' +
             num(mm.sigma_dev) + ',' + num(mm.kkt) + '\n';
    }
    hocbf::write_text_file(out_path, csv);
  }

  std::cout << "samples: " << outcome.samples << "  max u dev: "
            << num(outcome.max_u_dev)
            << "  max sigma dev: " << num(outcome.max_sigma_dev)
            << "  max kkt residual: " << num(outcome.max_kkt) << "\n"
            << "elapsed: " << num(outcome.elapsed_seconds) << " s\n";
  if (!outcome.pass()) {
    std::cerr << outcome.mismatches.size()
              << " instance(s) disagree with the oracle";
    if (!out_path.empty()) std::cerr << "; dumped to " << out_path;
    std::cerr << "\n";
    for (std::size_t i = 0; i < outcome.mismatches.size() && i < 5; ++i) {
      const auto& mm = outcome.mismatches[i];
      std::cerr << "  " << mm.family << " #" << mm.index
                << " u_dev=" << num(mm.u_dev) << " kkt=" << num(mm.kkt) << "\n";
    }
    return kExitVerifyFailed;
  }
  return kExitOk;
}

// ---- regions ----

int cmd_regions(const std::string& out_path, double av, double ab, double rho,
                int grid, double lo, double hi, bool disturbed, double varrho) {
  if (grid < 2) throw hocbf::ConfigError("--grid must be at least 2");
  if (!(hi > lo)) throw hocbf::ConfigError("--hi must exceed --lo");

  Eigen::VectorXd a_v(1), a_b(1);
  a_v << av;
  a_b << ab;

  std::string csv = "gamma_v,gamma_b,region,satisfied\n";
  for (int i = 0; i < grid; ++i) {
    const double gv = lo + (hi - lo) * i / (grid - 1);
    for (int j = 0; j < grid; ++j) {
      const double gb = lo + (hi - lo) * j / (grid - 1);
      const hocbf::ConstraintRow clf = hocbf::clf_row(gv, a_v);
      const hocbf::ConstraintRow cbf = hocbf::cbf_row(gb, a_b);
      const hocbf::RegionReport rep =
          disturbed
              ? hocbf::classify_region_disturbed(clf, cbf, gb + varrho, rho)
              : hocbf::classify_region(clf, cbf, rho);
      csv += num(gv) + ',' + num(gb) + ',' + rep.primary + ',';
      for (std::size_t k = 0; k < rep.satisfied.size(); ++k) {
        if (k) csv += ' ';
        csv += rep.satisfied[k];
      }
      csv += '\n';
    }
  }
  hocbf::write_text_file(out_path, csv);
  std::cout << "wrote " << grid << "x" << grid << " region map to " << out_path
            << "\n";
  return kExitOk;
}

// ---- sweep ----

int cmd_sweep(const std::string& config_path, const std::string& parameter,
              const std::vector<double>& grid, const std::string& out_dir) {
  const hocbf::Scenario base = hocbf::load_scenario_file(config_path);
  {
    // Reject unknown parameter names before any run starts.
    hocbf::Scenario probe = base;
    hocbf::set_parameter(probe, parameter, grid.front());
  }
  std::filesystem::create_directories(out_dir);

  std::string csv =
      "value,min_phi0,min_phi_issf,tracking_rmse,max_u_inf,diverged\n";
  for (std::size_t k = 0; k < grid.size(); ++k) {
    hocbf::Scenario sc = base;
    hocbf::set_parameter(sc, parameter, grid[k]);
    const hocbf::TrajectoryRecord record = hocbf::run_scenario(sc);
    const hocbf::Metrics& m = record.metrics;
    csv += num(grid[k]) + ',' + num(m.min_phi0_overall) + ',' +
           num(m.min_phi_issf_overall) + ',' + num(m.tracking_rmse_all) + ',' +
           num(m.max_u_inf) + ',' + (record.diverged ? "1" : "0") + '\n';
    // Per-point files; the summary table only carries headline numbers.
    hocbf::write_text_file(out_dir + "/metrics_" + std::to_string(k) + ".json",
                           hocbf::metrics_to_json(sc, record).dump(2) + "\n");
    std::cout << parameter << "=" << num(grid[k])
              << "  min phi0: " << num(m.min_phi0_overall)
              << "  rmse: " << num(m.tracking_rmse_all)
              << "  max|u|: " << num(m.max_u_inf)
              << (record.diverged ? "  (diverged)" : "") << "\n";
  }
  hocbf::write_text_file(out_dir + "/sweep.csv", csv);
  std::cout << "wrote " << out_dir << "/sweep.csv\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Safety-critical controller toolkit"};
  app.set_version_flag("--version", hocbf::kVersion);
  app.require_subcommand(1);

  // simulate
  auto* sim = app.add_subcommand("simulate", "Run a closed-loop scenario");
  std::string sim_config, sim_out = "out";
  std::int64_t sim_seed = -1;
  sim->add_option("--config", sim_config, "Scenario config file")->required();
  sim->add_option("--out", sim_out, "Output directory");
  sim->add_option("--seed", sim_seed, "Override the config seed");

  // verify-oracle
  auto* ver = app.add_subcommand(
      "verify-oracle", "Cross-check closed-form controllers against the "
                       "enumeration oracle on random instances");
  std::size_t ver_samples = 10000;
  std::uint64_t ver_seed = 7;
  double ver_perturb = 0.0;
  std::string ver_out;
  ver->add_option("--samples", ver_samples, "Number of random instances")
      ->check(CLI::PositiveNumber.description("positive"));
  ver->add_option("--seed", ver_seed, "RNG seed");
  ver->add_option("--out", ver_out, "Mismatch CSV path");
  // Negative-control hook: corrupt the closed-form answer on purpose.
  ver->add_option("--perturb", ver_perturb, "Offset added to u[0]")
      ->group("");

  // regions
  auto* reg = app.add_subcommand(
      "regions", "Classify closed-form solution regions on a margin grid");
  std::string reg_out = "regions.csv";
  double reg_av = 1.0, reg_ab = 1.0, reg_rho = 1.0, reg_lo = -2.0,
         reg_hi = 2.0, reg_varrho = 0.0;
  int reg_grid = 41;
  bool reg_disturbed = false;
  reg->add_option("--out", reg_out, "Output CSV path");
  reg->add_option("--av", reg_av, "Stabilization row coefficient");
  reg->add_option("--ab", reg_ab, "Safety row coefficient");
  reg->add_option("--rho", reg_rho, "Slack penalty")->check(CLI::PositiveNumber);
  reg->add_option("--grid", reg_grid, "Points per axis");
  reg->add_option("--lo", reg_lo, "Grid lower bound");
  reg->add_option("--hi", reg_hi, "Grid upper bound");
  reg->add_flag("--disturbed", reg_disturbed,
                "Use the disturbance-inflated partition");
  reg->add_option("--varrho", reg_varrho,
                  "Margin inflation for --disturbed");

  // sweep
  auto* swp = app.add_subcommand(
      "sweep", "Re-run a scenario over a grid of one tunable parameter");
  std::string swp_config, swp_param, swp_out = "sweep_out";
  std::vector<double> swp_grid;
  swp->add_option("--config", swp_config, "Scenario config file")->required();
  swp->add_option("parameter", swp_param,
                  "One of: epsilon0, varsigma, gamma, rho, k1, k2")
      ->required();
  swp->add_option("--grid", swp_grid, "Comma-separated values")
      ->required()
      ->delimiter(',');
  swp->add_option("--out", swp_out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (sim->parsed()) return cmd_simulate(sim_config, sim_out, sim_seed);
    if (ver->parsed())
      return cmd_verify_oracle(ver_samples, ver_seed, ver_perturb, ver_out);
    if (reg->parsed())
      return cmd_regions(reg_out, reg_av, reg_ab, reg_rho, reg_grid, reg_lo,
                         reg_hi, reg_disturbed, reg_varrho);
    if (swp->parsed()) return cmd_sweep(swp_config, swp_param, swp_grid, swp_out);
  } catch (const hocbf::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const hocbf::DivergenceError& e) {
    std::cerr << "divergence: " << e.what() << "\n";
    return kExitDiverged;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitConfig;
}
