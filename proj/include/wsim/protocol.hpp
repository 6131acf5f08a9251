#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

#include "wsim/optics.hpp"
#include "wsim/qstate.hpp"

// The conversion protocol: two polarization-entangled pairs, one photon of
// each pair (modes 2 and 3) overlapped on the PDBS, coincidence selection
// of one photon per output mode, and a polarization measurement on mode 5
// that heralds which local correction turns modes 1, 4, 6 into a W state.
//
// With pair emission amplitudes 1/2 per polarization combination, the kept
// one-photon-per-mode component is
//   [c|HHH> + b|HVV> + a|VHV>]_{146} |H>_5
// + [d|VVV> + a|HVH> + b|VHH>]_{146} |V>_5,
// where a = sqrt(mu nu)/2, b = -sqrt((1-mu)(1-nu))/2, c = (2mu-1)/2,
// d = (2nu-1)/2.
//
// A useful bound on the captured weight: each heralded branch carries at
// most probability 1/2.  Writing u = 2mu-1, v = 2nu-1, the H-branch weight
// is a^2+b^2+c^2 = [(1+uv)/2 + u^2]/4 <= [(1+|u|)/2 + u^2]/4 <= 1/2, with
// equality only at mu, nu in {0, 1}; the V branch is the mirror image in
// (u <-> v).  The total over both branches is c^2+d^2+2(a^2+b^2) <= 1.

namespace wsim::protocol {

struct PdbsParams {
  double mu = 0.5;  // H transmission
  double nu = 0.5;  // V transmission
};

struct ConversionAmplitudes {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double d = 0.0;
};

enum class Branch { H5, V5 };

struct AppliedCorrection {
  qstate::ModeId label;
  Eigen::Matrix2cd op;
  std::string name;
};

ConversionAmplitudes conversion_amplitudes(const PdbsParams& p);

// Heralded transformation probability after the equalizing corrections:
//   H5: 3 min{a^2, b^2, c^2}
//   V5: 3 min{d^2, b^2, c^2}
double success_probability(const PdbsParams& p, Branch branch);

// The V branch state carries amplitudes (d, a, b), so the probability its
// own amplitudes support is 3 min{d^2, a^2, b^2}.  It differs from
// success_probability(p, V5) wherever min{b^2, c^2} != min{a^2, b^2};
// both are exposed and both equal 3/20 at the optimal point.
double success_probability_v_branch_amplitudes(const PdbsParams& p);

// (mu, nu) = ((5 + sqrt 5)/10, (5 - sqrt 5)/10): all four amplitude
// magnitudes equal 1/(2 sqrt 5) and both branch probabilities reach 3/20.
PdbsParams optimal_params();

struct ConversionOutcome {
  Branch branch = Branch::H5;
  PdbsParams params;
  double xi = 1.0;
  // Normalized conditional state over labels 1, 4, 6, after the heralded
  // bit flips (H5: X on mode 6; V5: X on modes 1 and 4) but before the
  // phase/attenuation corrections.  For ideal pairs and xi = 1 the H5
  // state is proportional to c|HHV> + b|HVH> + a|VHH>.
  qstate::DensityMatrix state;
  std::optional<qstate::StateVector> pure;  // set when the state is pure
  // P(one photon per mode 1,4,5,6  AND  mode-5 polarization = branch).
  double success_probability = 0.0;
  std::vector<AppliedCorrection> corrections;
};

// Runs the sources through the PDBS at wave-packet overlap xi and heralds
// on the mode-5 polarization.  source12 must carry labels {1, 2} and
// source34 labels {3, 4}; mixed sources are handled by eigendecomposition.
// Throws std::domain_error when the heralded weight vanishes.
ConversionOutcome convert(const qstate::DensityMatrix& source12,
                          const qstate::DensityMatrix& source34,
                          const PdbsParams& p, Branch branch, double xi = 1.0);

struct CorrectedState {
  qstate::DensityMatrix state;  // normalized
  std::optional<qstate::StateVector> pure;
  // Joint probability: heralding AND surviving the attenuation filters.
  double success_probability = 0.0;
  std::vector<AppliedCorrection> corrections;
};

// Equalizes the three W amplitudes with single-photon polarization
// operations chosen from the ideal amplitudes of outcome.params: a pi
// phase on the V component of the photon carrying b's sign (mode 4) and a
// V-component attenuation t = min/|amp| on each photon whose amplitude
// exceeds the minimum.  Throws std::domain_error when one of the three
// branch amplitudes vanishes (the branch cannot reach a W state).
CorrectedState local_correction(const ConversionOutcome& outcome);

}  // namespace wsim::protocol
