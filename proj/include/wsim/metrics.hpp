#pragma once

#include <array>

#include "wsim/qstate.hpp"

// Entanglement and fidelity diagnostics for the reconstructed and modeled
// states.  Every metric clamps tiny negative rounding artifacts (down to
// -1e-8) to zero while keeping the raw value available; a violation past
// that slack throws, since it signals a broken input state rather than
// rounding noise.

namespace wsim::metrics {

struct ClampedValue {
  double value = 0.0;  // clamped into the metric's range
  double raw = 0.0;    // as computed
  operator double() const { return value; }
};

// <psi|rho|psi>, clamped into [0, 1].
ClampedValue fidelity_to_pure(const qstate::DensityMatrix& rho,
                              const qstate::StateVector& psi);

// Expectation of the witness (2/3) I - |W3><W3|; negative values certify
// genuine W-class entanglement.  Range [-1/3, 2/3].
double w_witness(const qstate::DensityMatrix& rho);

// Two-qubit Wootters concurrence: eigenvalues of rho (Y(x)Y) rho^* (Y(x)Y)
// in decreasing order give C = max{0, l1 - l2 - l3 - l4} with l_i the
// square roots of the eigenvalues.
ClampedValue concurrence(const qstate::DensityMatrix& rho);

// Entanglement of formation h((1 + sqrt(1 - C^2))/2), binary entropy in
// bits.
ClampedValue eof(const qstate::DensityMatrix& rho);
double eof_from_concurrence(double c);

struct DiagonalImbalance {
  // Populations of |HHV>, |HVH>, |VHH>.
  std::array<double, 3> weights{};
  // 1 - <W3| P rho P |W3> with P the projector onto the W support: the
  // fidelity forfeited relative to an ideally balanced, fully coherent
  // superposition on the same support.
  double penalty = 0.0;
};

DiagonalImbalance diagonal_imbalance(const qstate::DensityMatrix& rho);

double trace_distance(const qstate::DensityMatrix& a,
                      const qstate::DensityMatrix& b);

struct MetricReport {
  double fidelity_w3 = 0.0;
  double fidelity_w3_raw = 0.0;
  double witness_value = 0.0;
  // Pairwise entanglement of formation keyed by the kept label pairs in
  // sorted order: (l1,l2), (l1,l3), (l2,l3).
  std::array<double, 3> eof_pairs{};
  std::array<double, 3> concurrence_pairs{};
  std::array<double, 3> diagonal_weights{};
  double diagonal_penalty = 0.0;
};

// Full diagnostic set for a three-qubit state on the W support.
MetricReport evaluate_w_state(const qstate::DensityMatrix& rho);

}  // namespace wsim::metrics
