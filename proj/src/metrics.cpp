#include "wsim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace wsim::metrics {

namespace {

constexpr double kClampSlack = 1e-8;

double clamp_lower(double x, const char* what) {
  if (x < -kClampSlack)
    throw std::runtime_error(std::string(what) +
                             " is negative beyond rounding slack");
  return std::max(x, 0.0);
}

double binary_entropy(double x) {
  double h = 0.0;
  if (x > 0.0) h -= x * std::log2(x);
  if (x < 1.0) h -= (1.0 - x) * std::log2(1.0 - x);
  return h;
}

}  // namespace

ClampedValue fidelity_to_pure(const qstate::DensityMatrix& rho,
                              const qstate::StateVector& psi) {
  const double raw = qstate::expectation(rho, psi);
  const double lo = clamp_lower(raw, "fidelity");
  return {std::min(lo, 1.0), raw};
}

double w_witness(const qstate::DensityMatrix& rho) {
  if (rho.num_qubits() != 3)
    throw std::invalid_argument("witness needs a three-qubit state");
  const auto w3 = qstate::make_state(rho.labels(), qstate::NamedState::W3);
  return 2.0 / 3.0 - fidelity_to_pure(rho, w3).value;
}

ClampedValue concurrence(const qstate::DensityMatrix& rho) {
  if (rho.num_qubits() != 2)
    throw std::invalid_argument("concurrence needs a two-qubit state");
  const qstate::DensityMatrix rho_n = rho.normalized();
  const Eigen::MatrixXcd& m = rho_n.matrix();
  Eigen::Matrix4cd yy = Eigen::Matrix4cd::Zero();
  // Y (x) Y maps |HH>,|HV>,|VH>,|VV> to -|VV>,|VH>,|HV>,-|HH>.
  yy(3, 0) = -1.0;
  yy(2, 1) = 1.0;
  yy(1, 2) = 1.0;
  yy(0, 3) = -1.0;
  const Eigen::Matrix4cd tilde = yy * m.conjugate() * yy;
  Eigen::ComplexEigenSolver<Eigen::Matrix4cd> es(m * tilde, false);
  std::array<double, 4> lams{};
  for (int k = 0; k < 4; ++k)
    lams[static_cast<size_t>(k)] =
        std::sqrt(std::max(es.eigenvalues()(k).real(), 0.0));
  std::sort(lams.begin(), lams.end(), std::greater<>());
  const double raw = lams[0] - lams[1] - lams[2] - lams[3];
  return {std::min(std::max(raw, 0.0), 1.0), raw};
}

double eof_from_concurrence(double c) {
  if (c < 0.0 || c > 1.0)
    throw std::invalid_argument("concurrence must lie in [0, 1]");
  const double x = (1.0 + std::sqrt(std::max(1.0 - c * c, 0.0))) / 2.0;
  return binary_entropy(x);
}

ClampedValue eof(const qstate::DensityMatrix& rho) {
  const ClampedValue c = concurrence(rho);
  const double v = eof_from_concurrence(c.value);
  return {v, v};
}

DiagonalImbalance diagonal_imbalance(const qstate::DensityMatrix& rho) {
  if (rho.num_qubits() != 3)
    throw std::invalid_argument("diagonal imbalance needs a three-qubit state");
  const qstate::DensityMatrix rho_n = rho.normalized();
  const auto& m = rho_n.matrix();
  const int idx[3] = {qstate::basis_index("HHV"), qstate::basis_index("HVH"),
                      qstate::basis_index("VHH")};
  DiagonalImbalance out;
  for (int k = 0; k < 3; ++k)
    out.weights[static_cast<size_t>(k)] = m(idx[k], idx[k]).real();
  // Overlap retained within the support span; the projector leaves |W3>
  // invariant, so this is the full-state overlap evaluated on the span.
  double overlap = 0.0;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) overlap += m(idx[r], idx[c]).real();
  out.penalty = 1.0 - overlap / 3.0;
  return out;
}

double trace_distance(const qstate::DensityMatrix& a,
                      const qstate::DensityMatrix& b) {
  if (a.labels() != b.labels())
    throw std::invalid_argument("trace distance requires identical labels");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(a.matrix() - b.matrix(),
                                                     Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

MetricReport evaluate_w_state(const qstate::DensityMatrix& rho) {
  if (rho.num_qubits() != 3)
    throw std::invalid_argument("W-state report needs a three-qubit state");
  const auto rho_n = rho.normalized();
  const auto w3 = qstate::make_state(rho_n.labels(), qstate::NamedState::W3);
  MetricReport rep;
  const auto f = fidelity_to_pure(rho_n, w3);
  rep.fidelity_w3 = f.value;
  rep.fidelity_w3_raw = f.raw;
  rep.witness_value = 2.0 / 3.0 - f.value;
  const qstate::ModeId l1 = rho_n.labels()[0], l2 = rho_n.labels()[1],
                       l3 = rho_n.labels()[2];
  const std::vector<qstate::ModeId> pairs[3] = {{l1, l2}, {l1, l3}, {l2, l3}};
  for (int k = 0; k < 3; ++k) {
    const auto marginal = qstate::partial_trace(rho_n, pairs[k]);
    const auto c = concurrence(marginal);
    rep.concurrence_pairs[static_cast<size_t>(k)] = c.value;
    rep.eof_pairs[static_cast<size_t>(k)] = eof_from_concurrence(c.value);
  }
  const auto diag = diagonal_imbalance(rho_n);
  rep.diagonal_weights = diag.weights;
  rep.diagonal_penalty = diag.penalty;
  return rep;
}

}  // namespace wsim::metrics
