#pragma once

#include "wsim/config.hpp"
#include "wsim/qstate.hpp"
#include "wsim/report.hpp"

// Scenario runners: each builds its physics pipeline from the
// configuration, writes any CSV tables into cfg.output_dir, and returns
// its results as a JSON subtree.  run_scenario adds the config echo and
// provenance and persists the full report.
//
// Stochastic stages derive their RNG seeds as cfg.seed plus a fixed
// per-stage offset, so every stage has an independent, reproducible
// stream and reruns with the same seed are byte-identical.

namespace wsim::scenarios {

// Werner-form noisy source: lambda |EPR><EPR| + (1 - lambda) I/4 with
// lambda = (4F - 1)/3, the one-parameter model whose EPR fidelity is
// exactly F.  Requires F in [0.25, 1].
qstate::DensityMatrix werner_epr(double fidelity, qstate::ModeId first,
                                 qstate::ModeId second);

report::Json run_hom_scan(const config::ExperimentConfig& cfg);
report::Json run_epr_qst(const config::ExperimentConfig& cfg);
report::Json run_w_conversion(const config::ExperimentConfig& cfg);
report::Json run_error_budget(const config::ExperimentConfig& cfg);
report::Json run_param_sweep(const config::ExperimentConfig& cfg);

// Validates cfg, creates the output directory, dispatches on
// cfg.scenario, and writes report_<scenario>.json.  Returns the full
// report {config, results, provenance}.
report::Json run_scenario(const config::ExperimentConfig& cfg);

}  // namespace wsim::scenarios
