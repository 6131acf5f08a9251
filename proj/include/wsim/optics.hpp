#pragma once

#include <Eigen/Dense>

#include <compare>
#include <complex>
#include <map>
#include <optional>
#include <vector>

#include "wsim/qstate.hpp"

// Bosonic mode layer for the photon-pair interference at the
// polarization-dependent beam splitter (PDBS).
//
// A bosonic mode is (spatial mode, polarization, temporal bin).  The two
// temporal bins model partial wave-packet distinguishability: "matched"
// amplitudes interfere, "orthogonal" ones do not.  Tracing the bins out
// after post-selection turns partially distinguishable photons into the
// expected classical mixture.
//
// PDBS convention (transmission tau_p for polarization p):
//   input 2 -> sqrt(1 - tau_p) * out5 + sqrt(tau_p) * out6
//   input 3 -> sqrt(tau_p)     * out5 - sqrt(1 - tau_p) * out6
// so transmission routes 2 -> 6 and 3 -> 5, and the minus sign keeps each
// polarization block orthogonal.

namespace wsim::optics {

using Complex = std::complex<double>;

enum class Polarization { H, V };
enum class TemporalBin { Matched, Orthogonal };

struct BosonicMode {
  int spatial = 0;
  Polarization pol = Polarization::H;
  TemporalBin bin = TemporalBin::Matched;

  auto operator<=>(const BosonicMode&) const = default;
};

// Occupation numbers parallel to a FockState's mode list.
using Occupation = std::vector<int>;

// Sparse n-photon state: amplitudes on normalized Fock basis states
// |n1 n2 ...> (the sqrt(n!) factors of repeated creation operators are
// part of the basis normalization).  All stored terms must share one total
// photon number.
class FockState {
 public:
  explicit FockState(std::vector<BosonicMode> modes);

  const std::vector<BosonicMode>& modes() const { return modes_; }
  const std::map<Occupation, Complex>& terms() const { return terms_; }

  // Adds amplitude onto a basis state; exact zero contributions are
  // dropped.  Throws on occupation length mismatch, negative counts, or a
  // photon-number mismatch with existing terms.
  void add_term(const Occupation& occ, Complex amplitude);

  int total_photons() const { return photons_; }
  double norm_sq() const;
  bool flagged_normalized() const { return normalized_; }
  void flag_normalized(bool f) { normalized_ = f; }

  int mode_index(const BosonicMode& m) const;  // -1 when absent

  // Convenience: one photon in each listed mode, single term, amplitude 1.
  static FockState single_photons(const std::vector<BosonicMode>& occupied);

 private:
  std::vector<BosonicMode> modes_;  // sorted, unique
  std::map<Occupation, Complex> terms_;
  int photons_ = -1;  // -1 until the first term fixes it
  bool normalized_ = false;
};

// Linear mode map: creation operator of input j becomes
// sum_i matrix(i, j) * creation operator of output i.
struct ModeTransform {
  std::vector<BosonicMode> inputs;   // sorted
  std::vector<BosonicMode> outputs;  // sorted
  Eigen::MatrixXcd matrix;           // rows = outputs, cols = inputs

  bool is_unitary(double tol = 1e-12) const;
  int input_index(const BosonicMode& m) const;

  static ModeTransform identity(const std::vector<BosonicMode>& modes);
};

// Block-diagonal combination of two transforms on disjoint mode sets.
ModeTransform direct_sum(const ModeTransform& a, const ModeTransform& b);

// PDBS on spatial modes 2,3 -> 5,6 with transmission mu for H and nu for V,
// acting identically on both temporal bins.  Throws unless mu, nu are in
// [0, 1].
ModeTransform pdbs_transform(double mu, double nu);

// Applies a transform; every occupied state mode must be a transform
// input.  Exact bosonic combinatorics, any photon number.
FockState evolve_fock(const FockState& state, const ModeTransform& t);

// Rotates the wave packet of photons in `spatial` by overlap xi in [0, 1]:
// matched -> xi * matched + sqrt(1 - xi^2) * orthogonal.  xi = 1 returns
// the state unchanged.
FockState set_distinguishability(const FockState& state, int spatial,
                                 double xi);

struct PostSelection {
  // Unnormalized polarization-qubit state over the listed spatial modes
  // (labels = spatial ids); trace equals success_weight.  Temporal bins
  // are traced out: amplitudes sharing one bin pattern stay coherent,
  // different patterns add as a classical mixture.
  qstate::DensityMatrix rho;
  // Present when a single bin pattern carries all the weight (fully
  // indistinguishable case); unnormalized, squared norm = success_weight.
  std::optional<qstate::StateVector> pure;
  double success_weight = 0.0;
};

// Projects onto exactly one photon in every listed spatial mode.  The
// state must contain exactly as many photons as listed modes.
PostSelection post_select_one_per_mode(const FockState& state,
                                       const std::vector<int>& spatial_modes);

// Hong-Ou-Mandel scan: two same-polarization photons, one into mode 2 and
// one into mode 3, with path delay scanned.  The wave-packet overlap at
// delay d is xi0 * exp(-d^2 / (2 sigma^2)) with
// sigma = coherence_length / (2 sqrt(ln 2)), so the dip's full width at
// half depth equals coherence_length.  Returns the coincidence rate (one
// photon in 5 and one in 6) per delay.
std::vector<double> hom_scan(const std::vector<double>& delays,
                             double coherence_length, double xi0,
                             double transmission);

// (max - min) / max of a rate curve.
double visibility(const std::vector<double>& rates);

}  // namespace wsim::optics
