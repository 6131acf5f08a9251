#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "wsim/config.hpp"
#include "wsim/report.hpp"
#include "wsim/scenarios.hpp"

// wsim: photonic W-state conversion simulator.
//
// Exit codes: 0 success, 1 invalid configuration, 2 runtime failure.

namespace {

// Staging area for CLI overrides; only values the user actually passed
// are copied onto the config (file values win over defaults, flags win
// over file values).
struct CliOverrides {
  std::string config_file;
  double mu = 0.0, nu = 0.0, xi0 = 0.0, f12 = 0.0, f34 = 0.0;
  double total_scale = 0.0, acquisition_time = 0.0;
  double lc_um = 0.0, delay_min_um = 0.0, delay_max_um = 0.0;
  double hom_transmission = 0.0;
  double mu_min = 0.0, mu_max = 0.0, nu_min = 0.0, nu_max = 0.0;
  std::uint64_t seed = 0;
  int mc_samples = 0, delay_points = 0, grid_points = 0;
  bool optimal_pdbs = false;
  std::string noise, branch, scheme, output_dir;
};

void add_common_options(CLI::App* cmd, CliOverrides* ov) {
  cmd->add_option("--config", ov->config_file,
                  "key=value config file; flags override its values")
      ->check(CLI::ExistingFile);
  cmd->add_option("--mu", ov->mu, "PDBS H transmission");
  cmd->add_option("--nu", ov->nu, "PDBS V transmission");
  cmd->add_flag("--optimal-pdbs", ov->optimal_pdbs,
                "use the analytic optimum ((5+sqrt5)/10, (5-sqrt5)/10)");
  cmd->add_option("--xi0", ov->xi0, "wave-packet overlap at zero delay");
  cmd->add_option("--f12", ov->f12, "source 1-2 EPR fidelity");
  cmd->add_option("--f34", ov->f34, "source 3-4 EPR fidelity");
  cmd->add_option("--total-scale", ov->total_scale,
                  "expected events per setting at unit probability");
  cmd->add_option("--seed", ov->seed,
                  "RNG seed (required for stochastic scenarios)");
  cmd->add_option("--mc-samples", ov->mc_samples,
                  "Monte Carlo resamples for error bars");
  cmd->add_option("--noise", ov->noise, "count noise: poisson or exact");
  cmd->add_option("--branch", ov->branch, "heralding branch: H5 or V5");
  cmd->add_option("--scheme", ov->scheme,
                  "tomography scheme: standard or overcomplete");
  cmd->add_option("--acquisition-time", ov->acquisition_time,
                  "per-setting acquisition time (s), echoed in count files");
  cmd->add_option("--lc-um", ov->lc_um, "coherence length (um)");
  cmd->add_option("--delay-min-um", ov->delay_min_um, "scan start (um)");
  cmd->add_option("--delay-max-um", ov->delay_max_um, "scan end (um)");
  cmd->add_option("--delay-points", ov->delay_points, "scan samples");
  cmd->add_option("--hom-transmission", ov->hom_transmission,
                  "beamsplitter transmission for the interference scan");
  cmd->add_option("--grid-points", ov->grid_points, "sweep grid resolution");
  cmd->add_option("--mu-min", ov->mu_min, "sweep range");
  cmd->add_option("--mu-max", ov->mu_max, "sweep range");
  cmd->add_option("--nu-min", ov->nu_min, "sweep range");
  cmd->add_option("--nu-max", ov->nu_max, "sweep range");
  cmd->add_option("--output-dir", ov->output_dir,
                  "directory for the report and CSV tables");
}

wsim::config::ExperimentConfig build_config(const CLI::App* cmd,
                                            const CliOverrides& ov,
                                            wsim::config::Scenario scenario) {
  using wsim::config::ExperimentConfig;
  ExperimentConfig cfg = ov.config_file.empty()
                             ? ExperimentConfig{}
                             : wsim::config::load_file(ov.config_file);
  cfg.scenario = scenario;

  const auto passed = [&](const std::string& name) {
    return cmd->count(name) > 0;
  };
  if (passed("--mu")) cfg.mu = ov.mu;
  if (passed("--nu")) cfg.nu = ov.nu;
  if (passed("--optimal-pdbs")) cfg.optimal_pdbs = true;
  if (passed("--xi0")) cfg.xi0 = ov.xi0;
  if (passed("--f12")) cfg.f12 = ov.f12;
  if (passed("--f34")) cfg.f34 = ov.f34;
  if (passed("--total-scale")) cfg.total_scale = ov.total_scale;
  if (passed("--seed")) cfg.seed = ov.seed;
  if (passed("--mc-samples")) cfg.mc_samples = ov.mc_samples;
  if (passed("--noise")) wsim::config::apply_key(cfg, "noise", ov.noise);
  if (passed("--branch")) wsim::config::apply_key(cfg, "branch", ov.branch);
  if (passed("--scheme")) wsim::config::apply_key(cfg, "scheme", ov.scheme);
  if (passed("--acquisition-time")) cfg.acquisition_time = ov.acquisition_time;
  if (passed("--lc-um")) cfg.lc_um = ov.lc_um;
  if (passed("--delay-min-um")) cfg.delay_min_um = ov.delay_min_um;
  if (passed("--delay-max-um")) cfg.delay_max_um = ov.delay_max_um;
  if (passed("--delay-points")) cfg.delay_points = ov.delay_points;
  if (passed("--hom-transmission"))
    cfg.hom_transmission = ov.hom_transmission;
  if (passed("--grid-points")) cfg.grid_points = ov.grid_points;
  if (passed("--mu-min")) cfg.mu_min = ov.mu_min;
  if (passed("--mu-max")) cfg.mu_max = ov.mu_max;
  if (passed("--nu-min")) cfg.nu_min = ov.nu_min;
  if (passed("--nu-max")) cfg.nu_max = ov.nu_max;
  if (passed("--output-dir")) cfg.output_dir = ov.output_dir;
  return cfg;
}

void print_summary(const wsim::report::Json& full) {
  const auto& results = full.at("results");
  const std::string scenario =
      full.at("config").at("scenario").get<std::string>();
  std::cout << "scenario: " << scenario << "\n";
  if (results.contains("visibility"))
    std::cout << "  visibility: " << results.at("visibility").get<double>()
              << "\n";
  if (results.contains("reconstruction")) {
    const auto& fid = results.at("reconstruction").at("fidelity_w3");
    std::cout << "  fidelity_w3: " << fid.at("value").get<double>() << " +- "
              << fid.at("mc_std").get<double>() << "\n";
    const auto& wit = results.at("reconstruction").at("witness");
    std::cout << "  witness: " << wit.at("value").get<double>() << " +- "
              << wit.at("mc_std").get<double>() << "\n";
  }
  if (results.contains("rungs"))
    for (const auto& rung : results.at("rungs"))
      std::cout << "  " << rung.at("name").get<std::string>()
                << " fidelity: " << rung.at("fidelity").get<double>() << "\n";
  if (results.contains("statistical")) {
    const auto& fid = results.at("statistical").at("fidelity_w3");
    std::cout << "  statistical fidelity: " << fid.at("value").get<double>()
              << " +- " << fid.at("mc_std").get<double>() << "\n";
  }
  if (results.contains("pair_12"))
    std::cout << "  F12: "
              << results.at("pair_12").at("fidelity").at("value").get<double>()
              << ", F34: "
              << results.at("pair_34").at("fidelity").at("value").get<double>()
              << "\n";
  if (results.contains("max_p_h"))
    std::cout << "  max p_H: " << results.at("max_p_h").get<double>()
              << " at mu=" << results.at("argmax_p_h").at("mu").get<double>()
              << ", nu=" << results.at("argmax_p_h").at("nu").get<double>()
              << "\n";
  const std::string dir =
      full.at("config").at("output_dir").get<std::string>();
  std::cout << "report: " << dir << "/report_" << scenario << ".json\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Photonic W-state conversion simulator"};
  app.require_subcommand(1);

  const std::vector<std::string> names = {"hom_scan", "epr_qst", "w_conversion",
                                          "error_budget", "param_sweep"};
  const std::vector<std::string> descriptions = {
      "two-photon interference dip scan",
      "source pair tomography with error bars",
      "full conversion pipeline with tomography",
      "fidelity ladder plus finite-count leg",
      "(mu, nu) success-probability surface"};
  std::vector<CliOverrides> overrides(names.size());
  std::vector<CLI::App*> cmds;
  for (size_t k = 0; k < names.size(); ++k) {
    CLI::App* cmd = app.add_subcommand(names[k], descriptions[k]);
    add_common_options(cmd, &overrides[k]);
    cmds.push_back(cmd);
  }

  CLI11_PARSE(app, argc, argv);

  size_t chosen = names.size();
  for (size_t k = 0; k < names.size(); ++k)
    if (cmds[k]->parsed()) chosen = k;
  if (chosen == names.size()) {
    std::cerr << "no scenario selected\n";
    return 1;
  }

  wsim::config::ExperimentConfig cfg;
  try {
    cfg = build_config(cmds[chosen], overrides[chosen],
                       wsim::config::scenario_from_name(names[chosen]));
    cfg.validate();
  } catch (const std::exception& e) {
    std::cerr << "invalid configuration: " << e.what() << "\n";
    return 1;
  }

  try {
    const wsim::report::Json full = wsim::scenarios::run_scenario(cfg);
    print_summary(full);
  } catch (const std::exception& e) {
    std::cerr << "scenario failed: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
