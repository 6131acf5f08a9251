#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "wsim/qstate.hpp"

// Coincidence-count tomography in the style of the polarization
// experiment: every measurement setting rotates each photon's analyzer and
// records a single projector's coincidence count behind a polarizer, so
// count rates carry an unknown total flux that reconstruction has to
// normalize away.  The computational-basis settings {H,V}^n form a
// complete projective measurement, and the sum of their counts calibrates
// that flux.

namespace wsim::tomography {

enum class Axis { H, V, D, R, L };

char axis_letter(Axis a);
Axis axis_from_letter(char c);

struct MeasurementSetting {
  std::vector<qstate::ModeId> labels;  // sorted qubit labels
  std::vector<Axis> axes;              // one per label

  bool operator==(const MeasurementSetting&) const = default;
};

// Projector schemes over {H,V,D,R} (standard) or {H,V,D,R,L}
// (overcomplete).  Settings are enumerated lexicographically with the
// basis order above, last qubit fastest.
enum class SettingScheme {
  Standard,     // 4^n settings: 16 for two qubits, 64 for three
  Overcomplete  // 5^n settings: 25 for two qubits, 125 for three
};

std::vector<MeasurementSetting> enumerate_settings(
    const std::vector<qstate::ModeId>& labels, SettingScheme scheme);

// The product ket the setting projects on.
qstate::StateVector setting_ket(const MeasurementSetting& setting);

struct CountRecord {
  MeasurementSetting setting;
  double counts = 0.0;  // >= 0; integral when Poisson-sampled
  double acquisition_time = 0.0;
  double total_scale = 0.0;  // expected events at unit probability
};

enum class CountNoise { Exact, Poisson };

// Expected count total_scale * Tr(Pi rho) per setting, either exactly or
// Poisson-sampled with a deterministic (seed-driven) stream.
std::vector<CountRecord> simulate_counts(
    const qstate::DensityMatrix& rho,
    const std::vector<MeasurementSetting>& settings, double total_scale,
    std::uint64_t seed, CountNoise noise, double acquisition_time = 5800.0);

struct LinearInversionResult {
  qstate::DensityMatrix rho;  // Hermitian, unit trace
  double min_eigenvalue = 0.0;
  bool positive = true;  // min eigenvalue >= -1e-8
};

// Least-squares inversion of the Born probabilities, with the flux fitted
// from the computational-basis settings.  Requires an informationally
// complete record set including all {H,V}^n settings.
LinearInversionResult linear_inversion(const std::vector<CountRecord>& records);

struct ReconstructionResult {
  qstate::DensityMatrix rho;
  double log_likelihood = 0.0;
  int iterations = 0;
  bool converged = false;
  // Log-likelihood after the initial state and after each accepted
  // iteration, so callers can audit the monotonicity guarantee.
  std::vector<double> log_likelihood_trace;
};

struct IterationOptions {
  int max_iterations = 10000;
  double convergence_tol = 1e-10;  // log-likelihood gain threshold
};

// Iterative maximum-likelihood reconstruction.  Starting from the
// maximally mixed state (or `initial` when given), iterates
//   rho <- N[ G^-1 R(rho) rho R(rho) G^-1 ],
//   R(rho) = sum_i (f_i / Tr(Pi_i rho)) Pi_i,   G = sum_i Pi_i,
// with frequencies f_i = counts_i / sum(counts) and a 1e-12 probability
// floor inside R.  The G factors account for the measured projectors not
// resolving a complete POVM per setting; when they do, G is proportional
// to the identity and the map reduces to the plain R rho R iteration.
// The Poisson log-likelihood (with the flux profiled out) must not
// decrease: if a full step would lower it, the step is diluted to
// M_eps = (1 + eps G^-1 R)/(1 + eps) with eps backed off geometrically
// until the likelihood is non-decreasing, and the run aborts if no such
// eps exists.  Convergence is declared when the accepted gain drops
// below convergence_tol.
ReconstructionResult iml_reconstruct(
    const std::vector<CountRecord>& records, const IterationOptions& opts = {},
    const std::optional<qstate::DensityMatrix>& initial = std::nullopt);

enum class ResampleMode { Poisson, None };

struct UncertaintyEstimate {
  double mean = 0.0;
  double std_dev = 0.0;  // sample standard deviation (n - 1)
};

// Poissonian Monte Carlo error propagation: resamples every count as
// Poisson(observed), reconstructs, and evaluates `metric`.  Sample k uses
// the RNG stream (seed, k), so samples are order-independent and the
// estimate is reproducible bit for bit.
UncertaintyEstimate monte_carlo_uncertainty(
    const std::vector<CountRecord>& records,
    const std::function<double(const qstate::DensityMatrix&)>& metric,
    int n_samples, std::uint64_t seed, ResampleMode mode = ResampleMode::Poisson,
    const IterationOptions& opts = {});

// Same resampling and reconstruction, but evaluates several metrics on
// each reconstructed sample so the reconstructions are shared.  Entry j
// of the result matches metrics[j]; all estimates come from the same
// resampled ensembles.
std::vector<UncertaintyEstimate> monte_carlo_uncertainty_multi(
    const std::vector<CountRecord>& records,
    const std::vector<std::function<double(const qstate::DensityMatrix&)>>&
        metrics,
    int n_samples, std::uint64_t seed, ResampleMode mode = ResampleMode::Poisson,
    const IterationOptions& opts = {});

// CSV with header setting_q1,...,setting_qN,counts,acquisition_time; one
// row per record, floats with 17 significant digits.
void write_counts_csv(const std::string& path,
                      const std::vector<CountRecord>& records);

// Reads the CSV back; `labels` assigns qubit labels to the setting
// columns (sorted ascending, one per setting column).
std::vector<CountRecord> read_counts_csv(
    const std::string& path, const std::vector<qstate::ModeId>& labels,
    double total_scale = 0.0);

}  // namespace wsim::tomography
