#include <doctest.h>

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "test_helpers.hpp"
#include "wsim/optics.hpp"
#include "wsim/protocol.hpp"
#include "wsim/qstate.hpp"

using namespace wsim;
using optics::BosonicMode;
using optics::Complex;
using optics::FockState;
using optics::ModeTransform;
using optics::Occupation;
using optics::Polarization;
using optics::TemporalBin;

namespace {

constexpr auto kH = Polarization::H;
constexpr auto kV = Polarization::V;
constexpr auto kM = TemporalBin::Matched;
constexpr auto kO = TemporalBin::Orthogonal;

Complex amp_of(const FockState& s, const std::vector<BosonicMode>& occupied) {
  Occupation occ(s.modes().size(), 0);
  for (const auto& m : occupied) {
    const int i = s.mode_index(m);
    REQUIRE(i >= 0);
    ++occ[static_cast<size_t>(i)];
  }
  const auto it = s.terms().find(occ);
  return it == s.terms().end() ? Complex(0.0, 0.0) : it->second;
}

int out_index(const ModeTransform& t, const BosonicMode& m) {
  for (size_t i = 0; i < t.outputs.size(); ++i)
    if (t.outputs[i] == m) return static_cast<int>(i);
  return -1;
}

// EPR(1,2) x EPR(3,4) written directly in the bosonic picture, photons 2
// and 3 heading for the beam splitter and 1, 4 acting as spectators.
FockState epr_pair_input() {
  FockState s({{1, kH, kM}, {1, kV, kM}, {2, kH, kM}, {2, kV, kM},
               {3, kH, kM}, {3, kV, kM}, {4, kH, kM}, {4, kV, kM}});
  const auto term = [&](Polarization p12, Polarization p34) {
    Occupation occ(8, 0);
    occ[static_cast<size_t>(s.mode_index({1, p12, kM}))] = 1;
    occ[static_cast<size_t>(s.mode_index({2, p12, kM}))] = 1;
    occ[static_cast<size_t>(s.mode_index({3, p34, kM}))] = 1;
    occ[static_cast<size_t>(s.mode_index({4, p34, kM}))] = 1;
    s.add_term(occ, 0.5);
  };
  term(kH, kH);
  term(kH, kV);
  term(kV, kH);
  term(kV, kV);
  s.flag_normalized(true);
  return s;
}

ModeTransform spectators_plus_pdbs(double mu, double nu) {
  const ModeTransform ident = ModeTransform::identity(
      {{1, kH, kM}, {1, kV, kM}, {4, kH, kM}, {4, kV, kM}});
  return optics::direct_sum(ident, optics::pdbs_transform(mu, nu));
}

}  // namespace

TEST_SUITE("optics") {

TEST_CASE("fock state bookkeeping rejects malformed terms") {
  FockState s({{2, kH, kM}, {3, kH, kM}});
  CHECK_THROWS_AS(s.add_term({1}, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(s.add_term({-1, 2}, 1.0), std::invalid_argument);
  s.add_term({1, 1}, 1.0);
  CHECK_THROWS_AS(s.add_term({1, 0}, 0.5), std::invalid_argument);
  CHECK(s.total_photons() == 2);
  CHECK(FockState::single_photons({{5, kV, kM}}).total_photons() == 1);
}

TEST_CASE("duplicate bosonic modes are rejected") {
  CHECK_THROWS_AS(FockState({{2, kH, kM}, {2, kH, kM}}),
                  std::invalid_argument);
}

TEST_CASE("full transmission swaps the spatial modes") {
  const auto t = optics::pdbs_transform(1.0, 1.0);
  CHECK(t.is_unitary());
  for (auto pol : {kH, kV}) {
    for (auto bin : {kM, kO}) {
      const int in2 = t.input_index({2, pol, bin});
      const int in3 = t.input_index({3, pol, bin});
      const int o5 = out_index(t, {5, pol, bin});
      const int o6 = out_index(t, {6, pol, bin});
      CHECK(std::abs(t.matrix(o6, in2) - 1.0) < 1e-15);
      CHECK(std::abs(t.matrix(o5, in2)) < 1e-15);
      CHECK(std::abs(t.matrix(o5, in3) - 1.0) < 1e-15);
      CHECK(std::abs(t.matrix(o6, in3)) < 1e-15);
    }
  }
}

TEST_CASE("pdbs transform is unitary across the parameter square") {
  for (double mu : {0.0, 0.25, 0.5, 0.69, 1.0})
    for (double nu : {0.0, 0.31, 0.5, 0.97, 1.0})
      CHECK(optics::pdbs_transform(mu, nu).is_unitary());
}

TEST_CASE("transmissions outside the unit interval are rejected") {
  CHECK_THROWS_AS(optics::pdbs_transform(-0.1, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(optics::pdbs_transform(0.5, 1.2), std::invalid_argument);
}

TEST_CASE("single photon splits per the sign convention") {
  const double tau = 0.5;
  const auto t = optics::pdbs_transform(tau, tau);
  const double s = 1.0 / std::sqrt(2.0);

  const auto from2 =
      optics::evolve_fock(FockState::single_photons({{2, kH, kM}}), t);
  CHECK(std::abs(amp_of(from2, {{5, kH, kM}}) - s) < 1e-14);
  CHECK(std::abs(amp_of(from2, {{6, kH, kM}}) - s) < 1e-14);

  const auto from3 =
      optics::evolve_fock(FockState::single_photons({{3, kH, kM}}), t);
  CHECK(std::abs(amp_of(from3, {{5, kH, kM}}) - s) < 1e-14);
  CHECK(std::abs(amp_of(from3, {{6, kH, kM}}) + s) < 1e-14);
}

TEST_CASE("identically polarized photons bunch when their transmission is balanced") {
  const auto in =
      FockState::single_photons({{2, kV, kM}, {3, kV, kM}});
  const auto out = optics::evolve_fock(in, optics::pdbs_transform(0.77, 0.5));
  CHECK(std::abs(amp_of(out, {{5, kV, kM}, {6, kV, kM}})) < 1e-14);
  CHECK(std::abs(out.norm_sq() - 1.0) < 1e-12);
}

TEST_CASE("evolution preserves photon number and norm") {
  auto eng = testutil::engine(17);
  for (int k = 0; k < 10; ++k) {
    const double mu = testutil::uniform(eng, 0.0, 1.0);
    const double nu = testutil::uniform(eng, 0.0, 1.0);
    FockState in({{2, kH, kM}, {2, kV, kM}, {3, kH, kM}, {3, kV, kM}});
    in.add_term({1, 0, 1, 0}, Complex(testutil::uniform(eng, -1, 1),
                                      testutil::uniform(eng, -1, 1)));
    in.add_term({0, 1, 0, 1}, Complex(testutil::uniform(eng, -1, 1),
                                      testutil::uniform(eng, -1, 1)));
    in.add_term({1, 0, 0, 1}, Complex(testutil::uniform(eng, -1, 1),
                                      testutil::uniform(eng, -1, 1)));
    const auto out = optics::evolve_fock(in, optics::pdbs_transform(mu, nu));
    CHECK(out.total_photons() == 2);
    CHECK(std::abs(out.norm_sq() - in.norm_sq()) < 1e-12);
  }
}

TEST_CASE("evolution rejects photons in modes the transform does not take") {
  const auto in = FockState::single_photons({{7, kH, kM}});
  CHECK_THROWS_AS(optics::evolve_fock(in, optics::pdbs_transform(0.5, 0.5)),
                  std::invalid_argument);
}

TEST_CASE("post-selected pair amplitudes match the closed form") {
  auto eng = testutil::engine(2024);
  for (int k = 0; k < 20; ++k) {
    const double mu = testutil::uniform(eng, 0.01, 0.99);
    const double nu = testutil::uniform(eng, 0.01, 0.99);
    const auto evolved =
        optics::evolve_fock(epr_pair_input(), spectators_plus_pdbs(mu, nu));
    const auto sel = optics::post_select_one_per_mode(evolved, {1, 4, 5, 6});
    REQUIRE(sel.pure.has_value());

    const auto amps = protocol::conversion_amplitudes({mu, nu});
    auto [h_branch, wh] = qstate::project_qubit(*sel.pure, 5, 0);
    CHECK(std::abs(h_branch.amplitude("HHH") - amps.c) < 1e-10);
    CHECK(std::abs(h_branch.amplitude("HVV") - amps.b) < 1e-10);
    CHECK(std::abs(h_branch.amplitude("VHV") - amps.a) < 1e-10);

    auto [v_branch, wv] = qstate::project_qubit(*sel.pure, 5, 1);
    CHECK(std::abs(v_branch.amplitude("VVV") - amps.d) < 1e-10);
    CHECK(std::abs(v_branch.amplitude("HVH") - amps.a) < 1e-10);
    CHECK(std::abs(v_branch.amplitude("VHH") - amps.b) < 1e-10);
  }
}

TEST_CASE("one-per-mode weight sums both heralded branches") {
  // The kept component carries (a, b, c) alongside H in the herald mode and
  // (a, b, d) alongside V, so its total weight is 2a^2 + 2b^2 + c^2 + d^2.
  // At the symmetric optimum all four squares equal 1/20, giving 3/10.
  const auto p = protocol::optimal_params();
  const auto evolved = optics::evolve_fock(
      epr_pair_input(), spectators_plus_pdbs(p.mu, p.nu));
  const auto sel = optics::post_select_one_per_mode(evolved, {1, 4, 5, 6});
  CHECK(std::abs(sel.success_weight - 0.3) < 1e-12);

  const auto amps = protocol::conversion_amplitudes(p);
  const double expected = 2 * amps.a * amps.a + 2 * amps.b * amps.b +
                          amps.c * amps.c + amps.d * amps.d;
  CHECK(std::abs(sel.success_weight - expected) < 1e-12);
}

TEST_CASE("both photons in one output mode never pass the coincidence filter") {
  FockState s({{5, kH, kM}, {6, kH, kM}});
  s.add_term({2, 0}, 1.0);
  const auto sel = optics::post_select_one_per_mode(s, {5, 6});
  CHECK(sel.success_weight == 0.0);
}

TEST_CASE("a state already at one photon per mode passes through unchanged") {
  const auto s = FockState::single_photons({{5, kH, kM}, {6, kV, kM}});
  const auto sel = optics::post_select_one_per_mode(s, {5, 6});
  CHECK(std::abs(sel.success_weight - 1.0) < 1e-14);
  REQUIRE(sel.pure.has_value());
  CHECK(std::abs(sel.pure->amplitude("HV") - 1.0) < 1e-14);
  CHECK(sel.rho.labels() == std::vector<qstate::ModeId>{5, 6});
}

TEST_CASE("post-selection weight ignores a global phase") {
  const auto p = protocol::optimal_params();
  auto in = epr_pair_input();
  FockState rotated(in.modes());
  for (const auto& [occ, amp] : in.terms())
    rotated.add_term(occ, amp * std::polar(1.0, 0.83));
  const auto t = spectators_plus_pdbs(p.mu, p.nu);
  const double w0 =
      optics::post_select_one_per_mode(optics::evolve_fock(in, t), {1, 4, 5, 6})
          .success_weight;
  const double w1 = optics::post_select_one_per_mode(
                        optics::evolve_fock(rotated, t), {1, 4, 5, 6})
                        .success_weight;
  CHECK(std::abs(w0 - w1) < 1e-12);
}

TEST_CASE("photon number must match the post-selected mode count") {
  const auto s = FockState::single_photons({{5, kH, kM}});
  CHECK_THROWS_AS(optics::post_select_one_per_mode(s, {5, 6}),
                  std::invalid_argument);
}

TEST_CASE("distinguishability rotation is the identity at full overlap") {
  const auto in = FockState::single_photons({{2, kH, kM}, {3, kV, kM}});
  const auto same = optics::set_distinguishability(in, 3, 1.0);
  CHECK(same.terms() == in.terms());
  CHECK_THROWS_AS(optics::set_distinguishability(in, 3, 1.5),
                  std::invalid_argument);
  CHECK_THROWS_AS(optics::set_distinguishability(in, 3, -0.1),
                  std::invalid_argument);
}

TEST_CASE("overlap splits a photon across temporal bins") {
  const double xi = 0.6;
  const auto in = FockState::single_photons({{3, kV, kM}});
  const auto split = optics::set_distinguishability(in, 3, xi);
  CHECK(std::abs(amp_of(split, {{3, kV, kM}}) - xi) < 1e-14);
  CHECK(std::abs(amp_of(split, {{3, kV, kO}}) - std::sqrt(1 - xi * xi)) <
        1e-14);
}

TEST_CASE("coincidence rate interpolates between quantum and classical") {
  // Two same-polarization photons, partial overlap xi, transmission tau:
  // the one-per-mode rate is tau^2 + (1-tau)^2 - 2 xi^2 tau (1-tau).
  const double tau = 0.3;
  for (double xi : {0.0, 0.6, 1.0}) {
    auto in = FockState::single_photons({{2, kH, kM}, {3, kH, kM}});
    in = optics::set_distinguishability(in, 3, xi);
    const auto out =
        optics::evolve_fock(in, optics::pdbs_transform(tau, tau));
    const auto sel = optics::post_select_one_per_mode(out, {5, 6});
    const double expected =
        tau * tau + (1 - tau) * (1 - tau) - 2 * xi * xi * tau * (1 - tau);
    CHECK(std::abs(sel.success_weight - expected) < 1e-12);
  }
}

TEST_CASE("fully distinguishable photons give the classical half rate") {
  auto in = FockState::single_photons({{2, kH, kM}, {3, kH, kM}});
  in = optics::set_distinguishability(in, 3, 0.0);
  const auto out = optics::evolve_fock(in, optics::pdbs_transform(0.5, 0.5));
  CHECK(std::abs(optics::post_select_one_per_mode(out, {5, 6}).success_weight -
                 0.5) < 1e-12);
}

TEST_CASE("perfect overlap gives a full dip at zero delay") {
  const auto rates = optics::hom_scan({0.0}, 110.0, 1.0, 0.5);
  CHECK(std::abs(rates[0]) < 1e-14);
}

TEST_CASE("the dip relaxes to the distinguishable baseline at large delay") {
  const double tau = 0.3;
  const auto rates = optics::hom_scan({0.0, 1e6}, 110.0, 1.0, tau);
  CHECK(std::abs(rates[1] - (tau * tau + (1 - tau) * (1 - tau))) < 1e-12);
}

TEST_CASE("dip visibility equals the squared overlap at balanced splitting") {
  std::vector<double> delays;
  for (int i = -70; i <= 70; ++i) delays.push_back(5.0 * i);
  const double xi0 = std::sqrt(0.885);
  const auto rates = optics::hom_scan(delays, 110.0, xi0, 0.5);
  CHECK(std::abs(optics::visibility(rates) - 0.885) < 1e-6);
}

TEST_CASE("the scan is symmetric and monotone on each flank") {
  std::vector<double> delays;
  for (int i = -50; i <= 50; ++i) delays.push_back(7.0 * i);
  const auto rates = optics::hom_scan(delays, 110.0, 0.9, 0.4);
  const size_t n = rates.size();
  for (size_t i = 0; i < n; ++i)
    CHECK(std::abs(rates[i] - rates[n - 1 - i]) < 1e-12);
  for (size_t i = 0; i + 1 <= n / 2; ++i)
    CHECK(rates[i + 1] <= rates[i] + 1e-15);
}

TEST_CASE("half depth sits at half the coherence length for any splitting") {
  const double lc = 110.0;
  for (double tau : {0.3, 0.5, 0.62}) {
    const double xi0 = 0.87;
    const auto rates = optics::hom_scan({0.0, lc / 2.0, 1e9}, lc, xi0, tau);
    const double baseline = rates[2];
    const double depth = baseline - rates[0];
    CHECK(std::abs(rates[1] - (baseline - depth / 2.0)) < 1e-12);
  }
}

TEST_CASE("visibility guards against empty and dark curves") {
  CHECK_THROWS_AS(optics::visibility({}), std::invalid_argument);
  CHECK_THROWS_AS(optics::visibility({0.0, 0.0}), std::invalid_argument);
  CHECK(optics::visibility({0.4, 0.4, 0.4}) == 0.0);
}

}  // TEST_SUITE
