#include "wsim/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace wsim::protocol {

namespace {

using optics::BosonicMode;
using optics::FockState;
using optics::Polarization;
using optics::TemporalBin;
using qstate::DensityMatrix;
using qstate::ModeId;
using qstate::StateVector;

void check_params(const PdbsParams& p) {
  if (!(p.mu >= 0.0 && p.mu <= 1.0 && p.nu >= 0.0 && p.nu <= 1.0))
    throw std::invalid_argument("PDBS transmissions must lie in [0, 1]");
}

double min3(double x, double y, double z) {
  return std::min(x, std::min(y, z));
}

// Four-photon Fock embedding of |psi>_{12} (x) |phi>_{34}: the photon of
// qubit k occupies spatial mode k with its polarization, matched bin.
FockState embed_pair_product(const StateVector& psi12, const StateVector& phi34) {
  std::vector<BosonicMode> modes;
  for (int s = 1; s <= 4; ++s)
    for (Polarization pol : {Polarization::H, Polarization::V})
      modes.push_back({s, pol, TemporalBin::Matched});
  FockState st(modes);
  const auto pol_of = [](int bits, int qubit) {
    return ((bits >> (1 - qubit)) & 1) ? Polarization::V : Polarization::H;
  };
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      const auto amp = psi12.amplitudes()(i) * phi34.amplitudes()(j);
      if (amp == std::complex<double>{0.0, 0.0}) continue;
      optics::Occupation occ(modes.size(), 0);
      const BosonicMode m1{1, pol_of(i, 0), TemporalBin::Matched};
      const BosonicMode m2{2, pol_of(i, 1), TemporalBin::Matched};
      const BosonicMode m3{3, pol_of(j, 0), TemporalBin::Matched};
      const BosonicMode m4{4, pol_of(j, 1), TemporalBin::Matched};
      for (const BosonicMode& m : {m1, m2, m3, m4})
        ++occ[static_cast<size_t>(st.mode_index(m))];
      st.add_term(occ, amp);
    }
  }
  return st;
}

// Eigendecomposition restricted to significant weights.
std::vector<std::pair<double, StateVector>> pure_components(
    const DensityMatrix& rho) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho.matrix());
  std::vector<std::pair<double, StateVector>> out;
  for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) {
    const double w = es.eigenvalues()(k);
    if (w < 1e-12) continue;
    out.emplace_back(w, StateVector(rho.labels(), es.eigenvectors().col(k)));
  }
  return out;
}

void check_source_labels(const DensityMatrix& rho,
                         const std::vector<ModeId>& want) {
  if (rho.labels() != want)
    throw std::invalid_argument("conversion sources must carry labels {1,2} and {3,4}");
}

}  // namespace

ConversionAmplitudes conversion_amplitudes(const PdbsParams& p) {
  check_params(p);
  ConversionAmplitudes amps;
  amps.a = std::sqrt(p.mu * p.nu) / 2.0;
  amps.b = -std::sqrt((1.0 - p.mu) * (1.0 - p.nu)) / 2.0;
  amps.c = (2.0 * p.mu - 1.0) / 2.0;
  amps.d = (2.0 * p.nu - 1.0) / 2.0;
  return amps;
}

double success_probability(const PdbsParams& p, Branch branch) {
  const auto amps = conversion_amplitudes(p);
  const double a2 = amps.a * amps.a, b2 = amps.b * amps.b;
  const double c2 = amps.c * amps.c, d2 = amps.d * amps.d;
  return branch == Branch::H5 ? 3.0 * min3(a2, b2, c2) : 3.0 * min3(d2, b2, c2);
}

double success_probability_v_branch_amplitudes(const PdbsParams& p) {
  const auto amps = conversion_amplitudes(p);
  return 3.0 * min3(amps.d * amps.d, amps.a * amps.a, amps.b * amps.b);
}

PdbsParams optimal_params() {
  const double s5 = std::sqrt(5.0);
  return {(5.0 + s5) / 10.0, (5.0 - s5) / 10.0};
}

ConversionOutcome convert(const DensityMatrix& source12,
                          const DensityMatrix& source34, const PdbsParams& p,
                          Branch branch, double xi) {
  check_params(p);
  if (!(xi >= 0.0 && xi <= 1.0))
    throw std::invalid_argument("overlap xi must lie in [0, 1]");
  check_source_labels(source12, {1, 2});
  check_source_labels(source34, {3, 4});

  // Identity on the spectator modes 1 and 4, PDBS on 2 and 3.
  std::vector<BosonicMode> spectators;
  for (int s : {1, 4})
    for (Polarization pol : {Polarization::H, Polarization::V})
      for (TemporalBin b : {TemporalBin::Matched, TemporalBin::Orthogonal})
        spectators.push_back({s, pol, b});
  const optics::ModeTransform full_transform = optics::direct_sum(
      optics::ModeTransform::identity(spectators), optics::pdbs_transform(p.mu, p.nu));

  const auto comps12 = pure_components(source12.normalized());
  const auto comps34 = pure_components(source34.normalized());
  const int herald_bit = (branch == Branch::H5) ? 0 : 1;

  Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(8, 8);
  std::optional<StateVector> pure;
  const bool pure_path = comps12.size() == 1 && comps34.size() == 1 && xi == 1.0;

  for (const auto& [w12, psi] : comps12) {
    for (const auto& [w34, phi] : comps34) {
      FockState st = embed_pair_product(psi, phi);
      st = optics::set_distinguishability(st, 3, xi);
      st = optics::evolve_fock(st, full_transform);
      const auto sel = optics::post_select_one_per_mode(st, {1, 4, 5, 6});
      if (sel.success_weight == 0.0) continue;
      const auto [cond, herald_w] = qstate::project_qubit(sel.rho, 5, herald_bit);
      acc += (w12 * w34) * cond.matrix();
      if (pure_path && sel.pure) {
        const auto [vec, vw] = qstate::project_qubit(*sel.pure, 5, herald_bit);
        if (vw > 0.0) pure = vec;
      }
    }
  }

  const double herald_weight = acc.trace().real();
  if (herald_weight <= 0.0)
    throw std::domain_error("heralded post-selection weight is zero");

  DensityMatrix cond({1, 4, 6}, acc, false);
  // Heralded bit flips that bring the branch onto the W support
  // {|HHV>, |HVH>, |VHH>}.
  std::vector<AppliedCorrection> corrections;
  if (branch == Branch::H5) {
    corrections.push_back({6, qstate::pauli_x(), "bit flip"});
  } else {
    corrections.push_back({1, qstate::pauli_x(), "bit flip"});
    corrections.push_back({4, qstate::pauli_x(), "bit flip"});
  }
  for (const auto& corr : corrections) {
    cond = qstate::apply_single_qubit(cond, corr.label, corr.op);
    if (pure) pure = qstate::apply_single_qubit(*pure, corr.label, corr.op);
  }
  ConversionOutcome out{branch,       p,
                        xi,           cond.normalized(),
                        std::nullopt, herald_weight,
                        std::move(corrections)};
  if (pure) out.pure = pure->normalized();
  return out;
}

CorrectedState local_correction(const ConversionOutcome& outcome) {
  const auto amps = conversion_amplitudes(outcome.params);
  // Amplitude carried by the term whose V photon sits on each mode, after
  // the heralded flips: H5 state c|HHV> + b|HVH> + a|VHH>, V5 state
  // d|HHV> + b|HVH> + a|VHH>.
  const double amp1 = amps.a;
  const double amp4 = amps.b;
  const double amp6 = (outcome.branch == Branch::H5) ? amps.c : amps.d;
  const double m = min3(std::abs(amp1), std::abs(amp4), std::abs(amp6));
  if (m < 1e-15)
    throw std::domain_error("a branch amplitude vanishes; no W state reachable");

  std::vector<AppliedCorrection> corrections = outcome.corrections;
  DensityMatrix rho = outcome.state;
  std::optional<StateVector> pure = outcome.pure;
  const std::pair<qstate::ModeId, double> slots[] = {
      {1, amp1}, {4, amp4}, {6, amp6}};
  for (const auto& [label, amp] : slots) {
    const double sign = (amp < 0.0) ? -1.0 : 1.0;
    double t = m / std::abs(amp);
    // Amplitudes that are equal up to rounding need no filter; snapping
    // keeps no-op attenuations out of the applied-correction record.
    if (std::abs(t - 1.0) < 1e-12) t = 1.0;
    Eigen::Matrix2cd f = Eigen::Matrix2cd::Zero();
    f(0, 0) = 1.0;
    f(1, 1) = sign * t;
    if (sign != 1.0 || t != 1.0) {
      rho = qstate::apply_single_qubit(rho, label, f);
      if (pure) pure = qstate::apply_single_qubit(*pure, label, f);
      corrections.push_back(
          {label, f, sign < 0.0 ? "V phase flip + attenuation" : "V attenuation"});
    }
  }
  const double survival = rho.trace_real();
  if (survival <= 0.0)
    throw std::domain_error("correction filters absorbed the whole state");
  CorrectedState out{rho.normalized(), std::nullopt,
                     outcome.success_probability * survival,
                     std::move(corrections)};
  if (pure) out.pure = pure->normalized();
  return out;
}

}  // namespace wsim::protocol
