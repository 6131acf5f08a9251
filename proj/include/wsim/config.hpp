#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "wsim/protocol.hpp"
#include "wsim/report.hpp"
#include "wsim/tomography.hpp"

// Flat key=value configuration for the scenario runner.  '#' starts a
// comment, blank lines are skipped, later assignments win, and CLI flags
// override file values.  All validation failures throw
// std::invalid_argument (the CLI maps them to exit code 1).

namespace wsim::config {

enum class Scenario { HomScan, EprQst, WConversion, ErrorBudget, ParamSweep };

std::string scenario_name(Scenario s);
Scenario scenario_from_name(const std::string& name);

enum class Noise { Poisson, Exact };

struct ExperimentConfig {
  Scenario scenario = Scenario::WConversion;

  // PDBS transmissions; optimal_pdbs replaces them with the analytic
  // optimum ((5+sqrt5)/10, (5-sqrt5)/10).
  double mu = 0.0;  // set in the constructor: (7+sqrt17)/16
  double nu = 0.5;
  bool optimal_pdbs = false;

  double xi0 = 0.0;  // set in the constructor: sqrt(0.885)
  double f12 = 0.967;
  double f34 = 0.976;

  double total_scale = 50.0;  // expected events at unit probability
  std::optional<std::uint64_t> seed;
  int mc_samples = 100;
  Noise noise = Noise::Poisson;
  protocol::Branch branch = protocol::Branch::H5;
  tomography::SettingScheme scheme = tomography::SettingScheme::Standard;
  double acquisition_time = 5800.0;

  // hom_scan
  double lc_um = 110.0;
  double delay_min_um = -350.0;
  double delay_max_um = 350.0;
  int delay_points = 141;
  double hom_transmission = 0.5;

  // param_sweep; a range collapsed to a point (min == max) sweeps a
  // one-dimensional slice.
  int grid_points = 201;
  double mu_min = 0.0;
  double mu_max = 1.0;
  double nu_min = 0.0;
  double nu_max = 1.0;

  std::string output_dir = ".";

  ExperimentConfig();

  protocol::PdbsParams pdbs() const;

  // Throws std::invalid_argument on the first violated constraint.  A
  // stochastic scenario (epr_qst, w_conversion, error_budget) requires a
  // seed; there is no wall-clock fallback.
  void validate() const;
};

// Defaults overlaid with the file's assignments.
ExperimentConfig load_file(const std::string& path);

// Applies one key=value assignment; throws on unknown keys or malformed
// values.  Keys match the field names above (e.g. "mu", "total_scale",
// "noise", "branch", "scheme", "output_dir").
void apply_key(ExperimentConfig& cfg, const std::string& key,
               const std::string& value);

// Config echo for reports and its inverse (used by the audit round-trip).
report::Json to_json(const ExperimentConfig& cfg);
ExperimentConfig from_json(const report::Json& j);

}  // namespace wsim::config
