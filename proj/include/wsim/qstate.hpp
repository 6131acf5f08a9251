#pragma once

#include <Eigen/Dense>

#include <complex>
#include <map>
#include <optional>
#include <string>
#include <vector>

// Label-aware qubit states for polarization-encoded photons.
//
// Each qubit is tagged with an integer mode label (the spatial mode the
// photon lives in).  States always store their labels sorted ascending and
// the amplitude index uses the first (smallest) label as the most
// significant bit, with H = 0 and V = 1.  Constructing a state with labels
// given in another order reindexes the amplitudes, so every operation is
// independent of the order the caller listed the labels in.

namespace wsim::qstate {

using Complex = std::complex<double>;
using ModeId = int;

inline constexpr double kNormTol = 1e-12;
inline constexpr double kHermitianTol = 1e-10;
inline constexpr double kTraceTol = 1e-10;
inline constexpr double kPositivityTol = 1e-8;

enum class NamedState {
  H,     // |H>
  V,     // |V>
  D,     // (|H> + |V>)/sqrt(2)
  R,     // (|H> - i|V>)/sqrt(2)
  L,     // (|H> + i|V>)/sqrt(2)
  Epr,   // (|HH> + |VV>)/sqrt(2)
  W3,    // (|HHV> + |HVH> + |VHH>)/sqrt(3)
  Ghz3,  // (|HHH> + |VVV>)/sqrt(2)
};

// Index of a computational basis ket written as a string of 'H'/'V'
// characters, first character = first (smallest) label.
int basis_index(const std::string& ket);

class StateVector {
 public:
  // `amplitudes` are interpreted in the order `labels` is given; the
  // constructor sorts the labels and permutes the amplitudes to match.
  // Throws std::invalid_argument on duplicate labels or a length mismatch.
  StateVector(std::vector<ModeId> labels, Eigen::VectorXcd amplitudes,
              bool flag_normalized = false);

  const std::vector<ModeId>& labels() const { return labels_; }
  const Eigen::VectorXcd& amplitudes() const { return amps_; }
  int num_qubits() const { return static_cast<int>(labels_.size()); }
  Eigen::Index dim() const { return amps_.size(); }

  Complex amplitude(const std::string& ket) const;

  double norm() const { return amps_.norm(); }
  bool flagged_normalized() const { return normalized_; }

  // Returns the unit-norm version of this state (throws on zero norm).
  StateVector normalized() const;

  // <this|other>; both states must carry identical labels.
  Complex inner(const StateVector& other) const;

 private:
  std::vector<ModeId> labels_;
  Eigen::VectorXcd amps_;
  bool normalized_ = false;
};

class DensityMatrix {
 public:
  // Validates hermiticity to kHermitianTol.  Trace and positivity are not
  // enforced at construction: intermediate results (projections, linear
  // inversion output) are legitimately unnormalized or slightly negative
  // and carry the `flag_normalized` flag / on-demand checks instead.
  DensityMatrix(std::vector<ModeId> labels, Eigen::MatrixXcd matrix,
                bool flag_normalized = false);

  const std::vector<ModeId>& labels() const { return labels_; }
  const Eigen::MatrixXcd& matrix() const { return m_; }
  int num_qubits() const { return static_cast<int>(labels_.size()); }
  Eigen::Index dim() const { return m_.rows(); }

  double trace_real() const { return m_.trace().real(); }
  bool flagged_normalized() const { return normalized_; }

  DensityMatrix normalized() const;

  double min_eigenvalue() const;

  // Checks trace == 1 (kTraceTol) and min eigenvalue >= -kPositivityTol;
  // throws std::runtime_error describing the first violated property.
  void check_valid_state() const;

 private:
  std::vector<ModeId> labels_;
  Eigen::MatrixXcd m_;
  bool normalized_ = false;
};

StateVector make_state(const std::vector<ModeId>& labels, NamedState which);
StateVector make_state(const std::vector<ModeId>& labels,
                       const Eigen::VectorXcd& amplitudes);

// 2x2 single-qubit kets/operators used across the library.
Eigen::Vector2cd single_qubit_ket(NamedState which);
Eigen::Matrix2cd pauli_x();
Eigen::Matrix2cd pauli_y();
Eigen::Matrix2cd pauli_z();

StateVector tensor(const StateVector& a, const StateVector& b);
DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b);

// Reduced state over `keep` (a subset of the labels, any order).
DensityMatrix partial_trace(const DensityMatrix& rho,
                            const std::vector<ModeId>& keep);

// Applies `op` to the qubit with label `target`.  Norm/trace is not
// restored; the normalized flag survives only when `op` is unitary.
StateVector apply_single_qubit(const StateVector& psi, ModeId target,
                               const Eigen::Matrix2cd& op);
DensityMatrix apply_single_qubit(const DensityMatrix& rho, ModeId target,
                                 const Eigen::Matrix2cd& op);

// Projects qubit `target` onto basis outcome 0 (H) or 1 (V), removing that
// qubit.  Returns the unnormalized reduced state and the outcome weight.
std::pair<DensityMatrix, double> project_qubit(const DensityMatrix& rho,
                                               ModeId target, int outcome);
std::pair<StateVector, double> project_qubit(const StateVector& psi,
                                             ModeId target, int outcome);

DensityMatrix outer(const StateVector& psi);

// <phi|rho|phi> for a pure projector ket; real part (imaginary part is a
// rounding artifact for Hermitian rho).
double expectation(const DensityMatrix& rho, const StateVector& phi);

// Renames labels through an old->new map (bijective over the state's
// labels) and re-sorts.  Amplitude data moves with the labels.
StateVector relabel(const StateVector& psi,
                    const std::map<ModeId, ModeId>& mapping);
DensityMatrix relabel(const DensityMatrix& rho,
                      const std::map<ModeId, ModeId>& mapping);

}  // namespace wsim::qstate
