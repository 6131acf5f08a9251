#include "wsim/qstate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

namespace wsim::qstate {

namespace {

constexpr Complex kI{0.0, 1.0};

void check_labels_unique(const std::vector<ModeId>& labels) {
  std::set<ModeId> seen(labels.begin(), labels.end());
  if (seen.size() != labels.size())
    throw std::invalid_argument("duplicate mode labels in state");
}

// Sorting permutation: sorted[k] = given[perm[k]].
std::vector<int> sort_permutation(const std::vector<ModeId>& labels) {
  std::vector<int> perm(labels.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::sort(perm.begin(), perm.end(),
            [&](int a, int b) { return labels[a] < labels[b]; });
  return perm;
}

// Destination index once qubits are reordered so that destination qubit k
// is source qubit perm[k].  Bit significance: qubit 0 is the MSB.
Eigen::Index permute_index(Eigen::Index src, const std::vector<int>& perm) {
  const int n = static_cast<int>(perm.size());
  Eigen::Index dst = 0;
  for (int k = 0; k < n; ++k) {
    const int bit = static_cast<int>((src >> (n - 1 - perm[k])) & 1);
    dst |= static_cast<Eigen::Index>(bit) << (n - 1 - k);
  }
  return dst;
}

int label_position(const std::vector<ModeId>& labels, ModeId target) {
  const auto it = std::find(labels.begin(), labels.end(), target);
  if (it == labels.end())
    throw std::invalid_argument("label " + std::to_string(target) +
                                " not present in state");
  return static_cast<int>(it - labels.begin());
}

bool is_unitary_2x2(const Eigen::Matrix2cd& op) {
  return (op.adjoint() * op - Eigen::Matrix2cd::Identity()).cwiseAbs().maxCoeff() <
         1e-12;
}

}  // namespace

int basis_index(const std::string& ket) {
  int idx = 0;
  for (char c : ket) {
    idx <<= 1;
    if (c == 'V')
      idx |= 1;
    else if (c != 'H')
      throw std::invalid_argument("ket string must contain only H/V");
  }
  return idx;
}

StateVector::StateVector(std::vector<ModeId> labels, Eigen::VectorXcd amplitudes,
                         bool flag_normalized)
    : labels_(std::move(labels)), amps_(std::move(amplitudes)),
      normalized_(flag_normalized) {
  check_labels_unique(labels_);
  if (amps_.size() != (Eigen::Index{1} << labels_.size()))
    throw std::invalid_argument("amplitude vector length must be 2^n");
  if (!std::is_sorted(labels_.begin(), labels_.end())) {
    const auto perm = sort_permutation(labels_);
    Eigen::VectorXcd sorted(amps_.size());
    for (Eigen::Index i = 0; i < amps_.size(); ++i)
      sorted(permute_index(i, perm)) = amps_(i);
    std::sort(labels_.begin(), labels_.end());
    amps_ = std::move(sorted);
  }
  if (normalized_ && std::abs(norm() - 1.0) > kNormTol)
    throw std::invalid_argument("state flagged normalized but norm differs from 1");
}

Complex StateVector::amplitude(const std::string& ket) const {
  if (static_cast<int>(ket.size()) != num_qubits())
    throw std::invalid_argument("ket length does not match qubit count");
  return amps_(basis_index(ket));
}

StateVector StateVector::normalized() const {
  const double n = norm();
  if (n < 1e-300) throw std::runtime_error("cannot normalize zero state");
  return StateVector(labels_, amps_ / n, true);
}

Complex StateVector::inner(const StateVector& other) const {
  if (labels_ != other.labels_)
    throw std::invalid_argument("inner product requires identical labels");
  return amps_.dot(other.amps_);  // conjugates *this
}

DensityMatrix::DensityMatrix(std::vector<ModeId> labels, Eigen::MatrixXcd matrix,
                             bool flag_normalized)
    : labels_(std::move(labels)), m_(std::move(matrix)),
      normalized_(flag_normalized) {
  check_labels_unique(labels_);
  const Eigen::Index d = Eigen::Index{1} << labels_.size();
  if (m_.rows() != d || m_.cols() != d)
    throw std::invalid_argument("density matrix must be 2^n x 2^n");
  if ((m_ - m_.adjoint()).cwiseAbs().maxCoeff() > kHermitianTol)
    throw std::invalid_argument("density matrix is not Hermitian");
  if (!std::is_sorted(labels_.begin(), labels_.end())) {
    const auto perm = sort_permutation(labels_);
    Eigen::MatrixXcd sorted(d, d);
    for (Eigen::Index r = 0; r < d; ++r)
      for (Eigen::Index c = 0; c < d; ++c)
        sorted(permute_index(r, perm), permute_index(c, perm)) = m_(r, c);
    std::sort(labels_.begin(), labels_.end());
    m_ = std::move(sorted);
  }
  if (normalized_ && std::abs(trace_real() - 1.0) > kTraceTol)
    throw std::invalid_argument("density matrix flagged normalized but trace differs from 1");
}

DensityMatrix DensityMatrix::normalized() const {
  const double t = trace_real();
  if (t < 1e-300) throw std::runtime_error("cannot normalize zero-trace density matrix");
  return DensityMatrix(labels_, m_ / t, true);
}

double DensityMatrix::min_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m_, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

void DensityMatrix::check_valid_state() const {
  if (std::abs(trace_real() - 1.0) > kTraceTol)
    throw std::runtime_error("density matrix trace differs from 1");
  if (min_eigenvalue() < -kPositivityTol)
    throw std::runtime_error("density matrix has a significantly negative eigenvalue");
}

Eigen::Vector2cd single_qubit_ket(NamedState which) {
  const double s = 1.0 / std::sqrt(2.0);
  switch (which) {
    case NamedState::H: return {1.0, 0.0};
    case NamedState::V: return {0.0, 1.0};
    case NamedState::D: return {s, s};
    case NamedState::R: return {s, -kI * s};
    case NamedState::L: return {s, kI * s};
    default:
      throw std::invalid_argument("not a single-qubit named state");
  }
}

Eigen::Matrix2cd pauli_x() {
  Eigen::Matrix2cd m;
  m << 0, 1, 1, 0;
  return m;
}

Eigen::Matrix2cd pauli_y() {
  Eigen::Matrix2cd m;
  m << 0, -kI, kI, 0;
  return m;
}

Eigen::Matrix2cd pauli_z() {
  Eigen::Matrix2cd m;
  m << 1, 0, 0, -1;
  return m;
}

StateVector make_state(const std::vector<ModeId>& labels, NamedState which) {
  const auto expect_qubits = [&](int n) {
    if (static_cast<int>(labels.size()) != n)
      throw std::invalid_argument("named state needs " + std::to_string(n) +
                                  " labels");
  };
  switch (which) {
    case NamedState::H:
    case NamedState::V:
    case NamedState::D:
    case NamedState::R:
    case NamedState::L: {
      expect_qubits(1);
      return StateVector(labels, single_qubit_ket(which), true);
    }
    case NamedState::Epr: {
      expect_qubits(2);
      Eigen::VectorXcd a = Eigen::VectorXcd::Zero(4);
      a(basis_index("HH")) = a(basis_index("VV")) = 1.0 / std::sqrt(2.0);
      return StateVector(labels, a, true);
    }
    case NamedState::W3: {
      expect_qubits(3);
      Eigen::VectorXcd a = Eigen::VectorXcd::Zero(8);
      const double w = 1.0 / std::sqrt(3.0);
      a(basis_index("HHV")) = a(basis_index("HVH")) = a(basis_index("VHH")) = w;
      return StateVector(labels, a, true);
    }
    case NamedState::Ghz3: {
      expect_qubits(3);
      Eigen::VectorXcd a = Eigen::VectorXcd::Zero(8);
      a(basis_index("HHH")) = a(basis_index("VVV")) = 1.0 / std::sqrt(2.0);
      return StateVector(labels, a, true);
    }
  }
  throw std::invalid_argument("unknown named state");
}

StateVector make_state(const std::vector<ModeId>& labels,
                       const Eigen::VectorXcd& amplitudes) {
  return StateVector(labels, amplitudes);
}

StateVector tensor(const StateVector& a, const StateVector& b) {
  std::vector<ModeId> labels = a.labels();
  labels.insert(labels.end(), b.labels().begin(), b.labels().end());
  const int na = a.num_qubits();
  const int nb = b.num_qubits();
  Eigen::VectorXcd amps(Eigen::Index{1} << (na + nb));
  for (Eigen::Index ia = 0; ia < a.dim(); ++ia)
    for (Eigen::Index ib = 0; ib < b.dim(); ++ib)
      amps((ia << nb) | ib) = a.amplitudes()(ia) * b.amplitudes()(ib);
  // Constructor re-sorts interleaved labels.
  return StateVector(labels, amps,
                     a.flagged_normalized() && b.flagged_normalized());
}

DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b) {
  std::vector<ModeId> labels = a.labels();
  labels.insert(labels.end(), b.labels().begin(), b.labels().end());
  const int nb = b.num_qubits();
  const Eigen::Index da = a.dim(), db = b.dim();
  Eigen::MatrixXcd m(da * db, da * db);
  for (Eigen::Index ra = 0; ra < da; ++ra)
    for (Eigen::Index ca = 0; ca < da; ++ca)
      for (Eigen::Index rb = 0; rb < db; ++rb)
        for (Eigen::Index cb = 0; cb < db; ++cb)
          m((ra << nb) | rb, (ca << nb) | cb) =
              a.matrix()(ra, ca) * b.matrix()(rb, cb);
  return DensityMatrix(labels, m,
                       a.flagged_normalized() && b.flagged_normalized());
}

DensityMatrix partial_trace(const DensityMatrix& rho,
                            const std::vector<ModeId>& keep) {
  std::vector<ModeId> keep_sorted = keep;
  std::sort(keep_sorted.begin(), keep_sorted.end());
  check_labels_unique(keep_sorted);
  const auto& labels = rho.labels();
  std::vector<int> keep_pos, trace_pos;
  for (ModeId l : keep_sorted) keep_pos.push_back(label_position(labels, l));
  for (int p = 0; p < rho.num_qubits(); ++p)
    if (std::find(keep_pos.begin(), keep_pos.end(), p) == keep_pos.end())
      trace_pos.push_back(p);

  const int n = rho.num_qubits();
  const int nk = static_cast<int>(keep_pos.size());
  const int nt = static_cast<int>(trace_pos.size());
  const auto embed = [&](Eigen::Index bits, const std::vector<int>& pos) {
    Eigen::Index idx = 0;
    for (size_t k = 0; k < pos.size(); ++k) {
      const Eigen::Index bit = (bits >> (pos.size() - 1 - k)) & 1;
      idx |= bit << (n - 1 - pos[k]);
    }
    return idx;
  };

  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(Eigen::Index{1} << nk,
                                                Eigen::Index{1} << nk);
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    const Eigen::Index rbase = embed(r, keep_pos);
    for (Eigen::Index c = 0; c < out.cols(); ++c) {
      const Eigen::Index cbase = embed(c, keep_pos);
      Complex sum = 0.0;
      for (Eigen::Index t = 0; t < (Eigen::Index{1} << nt); ++t) {
        const Eigen::Index toff = embed(t, trace_pos);
        sum += rho.matrix()(rbase | toff, cbase | toff);
      }
      out(r, c) = sum;
    }
  }
  return DensityMatrix(keep_sorted, out, rho.flagged_normalized());
}

StateVector apply_single_qubit(const StateVector& psi, ModeId target,
                               const Eigen::Matrix2cd& op) {
  const int pos = label_position(psi.labels(), target);
  const int shift = psi.num_qubits() - 1 - pos;
  Eigen::VectorXcd amps = psi.amplitudes();
  const Eigen::Index mask = Eigen::Index{1} << shift;
  for (Eigen::Index i = 0; i < amps.size(); ++i) {
    if (i & mask) continue;
    const Complex a0 = amps(i), a1 = amps(i | mask);
    amps(i) = op(0, 0) * a0 + op(0, 1) * a1;
    amps(i | mask) = op(1, 0) * a0 + op(1, 1) * a1;
  }
  return StateVector(psi.labels(), amps,
                     psi.flagged_normalized() && is_unitary_2x2(op));
}

DensityMatrix apply_single_qubit(const DensityMatrix& rho, ModeId target,
                                 const Eigen::Matrix2cd& op) {
  const int pos = label_position(rho.labels(), target);
  const int shift = rho.num_qubits() - 1 - pos;
  const Eigen::Index mask = Eigen::Index{1} << shift;
  Eigen::MatrixXcd m = rho.matrix();
  for (Eigen::Index c = 0; c < m.cols(); ++c) {  // rows: m <- U m
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      if (r & mask) continue;
      const Complex a0 = m(r, c), a1 = m(r | mask, c);
      m(r, c) = op(0, 0) * a0 + op(0, 1) * a1;
      m(r | mask, c) = op(1, 0) * a0 + op(1, 1) * a1;
    }
  }
  for (Eigen::Index r = 0; r < m.rows(); ++r) {  // cols: m <- m U^dagger
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c & mask) continue;
      const Complex a0 = m(r, c), a1 = m(r, c | mask);
      m(r, c) = a0 * std::conj(op(0, 0)) + a1 * std::conj(op(0, 1));
      m(r, c | mask) = a0 * std::conj(op(1, 0)) + a1 * std::conj(op(1, 1));
    }
  }
  return DensityMatrix(rho.labels(), m,
                       rho.flagged_normalized() && is_unitary_2x2(op));
}

std::pair<DensityMatrix, double> project_qubit(const DensityMatrix& rho,
                                               ModeId target, int outcome) {
  if (outcome != 0 && outcome != 1)
    throw std::invalid_argument("projection outcome must be 0 or 1");
  const int pos = label_position(rho.labels(), target);
  const int n = rho.num_qubits();
  const int shift = n - 1 - pos;

  std::vector<ModeId> rest = rho.labels();
  rest.erase(rest.begin() + pos);
  const Eigen::Index dr = Eigen::Index{1} << (n - 1);
  const auto embed = [&](Eigen::Index idx) {
    const Eigen::Index high = idx >> shift;
    const Eigen::Index low = idx & ((Eigen::Index{1} << shift) - 1);
    return (high << (shift + 1)) | (static_cast<Eigen::Index>(outcome) << shift) | low;
  };
  Eigen::MatrixXcd out(dr, dr);
  for (Eigen::Index r = 0; r < dr; ++r)
    for (Eigen::Index c = 0; c < dr; ++c)
      out(r, c) = rho.matrix()(embed(r), embed(c));
  DensityMatrix reduced(rest, out, false);
  return {reduced, reduced.trace_real()};
}

std::pair<StateVector, double> project_qubit(const StateVector& psi,
                                             ModeId target, int outcome) {
  if (outcome != 0 && outcome != 1)
    throw std::invalid_argument("projection outcome must be 0 or 1");
  const int pos = label_position(psi.labels(), target);
  const int n = psi.num_qubits();
  const int shift = n - 1 - pos;
  std::vector<ModeId> rest = psi.labels();
  rest.erase(rest.begin() + pos);
  Eigen::VectorXcd out(Eigen::Index{1} << (n - 1));
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    const Eigen::Index high = i >> shift;
    const Eigen::Index low = i & ((Eigen::Index{1} << shift) - 1);
    out(i) = psi.amplitudes()(
        (high << (shift + 1)) | (static_cast<Eigen::Index>(outcome) << shift) | low);
  }
  StateVector projected(rest, out, false);
  return {projected, projected.norm() * projected.norm()};
}

DensityMatrix outer(const StateVector& psi) {
  return DensityMatrix(psi.labels(),
                       psi.amplitudes() * psi.amplitudes().adjoint(),
                       psi.flagged_normalized());
}

double expectation(const DensityMatrix& rho, const StateVector& phi) {
  if (rho.labels() != phi.labels())
    throw std::invalid_argument("expectation requires identical labels");
  return (phi.amplitudes().adjoint() * rho.matrix() * phi.amplitudes())(0).real();
}

namespace {
std::vector<ModeId> mapped_labels(const std::vector<ModeId>& labels,
                                  const std::map<ModeId, ModeId>& mapping) {
  std::vector<ModeId> out;
  out.reserve(labels.size());
  for (ModeId l : labels) {
    const auto it = mapping.find(l);
    out.push_back(it == mapping.end() ? l : it->second);
  }
  return out;
}
}  // namespace

StateVector relabel(const StateVector& psi,
                    const std::map<ModeId, ModeId>& mapping) {
  return StateVector(mapped_labels(psi.labels(), mapping), psi.amplitudes(),
                     psi.flagged_normalized());
}

DensityMatrix relabel(const DensityMatrix& rho,
                      const std::map<ModeId, ModeId>& mapping) {
  return DensityMatrix(mapped_labels(rho.labels(), mapping), rho.matrix(),
                       rho.flagged_normalized());
}

}  // namespace wsim::qstate
