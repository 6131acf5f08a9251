#include "wsim/optics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

namespace wsim::optics {

namespace {

double factorial(int n) {
  double f = 1.0;
  for (int k = 2; k <= n; ++k) f *= k;
  return f;
}

std::vector<BosonicMode> sorted_unique(std::vector<BosonicMode> modes) {
  std::sort(modes.begin(), modes.end());
  if (std::adjacent_find(modes.begin(), modes.end()) != modes.end())
    throw std::invalid_argument("duplicate bosonic modes");
  return modes;
}

}  // namespace

FockState::FockState(std::vector<BosonicMode> modes)
    : modes_(sorted_unique(std::move(modes))) {}

void FockState::add_term(const Occupation& occ, Complex amplitude) {
  if (occ.size() != modes_.size())
    throw std::invalid_argument("occupation length does not match mode list");
  int total = 0;
  for (int n : occ) {
    if (n < 0) throw std::invalid_argument("negative occupation number");
    total += n;
  }
  if (photons_ < 0)
    photons_ = total;
  else if (total != photons_)
    throw std::invalid_argument("terms with different total photon number");
  if (amplitude == Complex{0.0, 0.0}) return;
  auto [it, inserted] = terms_.try_emplace(occ, amplitude);
  if (!inserted) {
    it->second += amplitude;
    if (it->second == Complex{0.0, 0.0}) terms_.erase(it);
  }
}

double FockState::norm_sq() const {
  double s = 0.0;
  for (const auto& [occ, amp] : terms_) s += std::norm(amp);
  return s;
}

int FockState::mode_index(const BosonicMode& m) const {
  const auto it = std::lower_bound(modes_.begin(), modes_.end(), m);
  if (it == modes_.end() || *it != m) return -1;
  return static_cast<int>(it - modes_.begin());
}

FockState FockState::single_photons(const std::vector<BosonicMode>& occupied) {
  FockState st(occupied);
  Occupation occ(occupied.size(), 1);
  st.add_term(occ, 1.0);
  st.flag_normalized(true);
  return st;
}

bool ModeTransform::is_unitary(double tol) const {
  if (matrix.rows() != matrix.cols()) return false;
  return (matrix.adjoint() * matrix -
          Eigen::MatrixXcd::Identity(matrix.cols(), matrix.cols()))
             .cwiseAbs()
             .maxCoeff() < tol;
}

int ModeTransform::input_index(const BosonicMode& m) const {
  const auto it = std::lower_bound(inputs.begin(), inputs.end(), m);
  if (it == inputs.end() || *it != m) return -1;
  return static_cast<int>(it - inputs.begin());
}

ModeTransform ModeTransform::identity(const std::vector<BosonicMode>& modes) {
  ModeTransform t;
  t.inputs = sorted_unique(modes);
  t.outputs = t.inputs;
  t.matrix = Eigen::MatrixXcd::Identity(t.inputs.size(), t.inputs.size());
  return t;
}

ModeTransform direct_sum(const ModeTransform& a, const ModeTransform& b) {
  ModeTransform t;
  t.inputs = a.inputs;
  t.inputs.insert(t.inputs.end(), b.inputs.begin(), b.inputs.end());
  t.outputs = a.outputs;
  t.outputs.insert(t.outputs.end(), b.outputs.begin(), b.outputs.end());
  const auto in_sorted = sorted_unique(t.inputs);
  const auto out_sorted = sorted_unique(t.outputs);
  Eigen::MatrixXcd m =
      Eigen::MatrixXcd::Zero(out_sorted.size(), in_sorted.size());
  const auto place = [&](const ModeTransform& part) {
    for (Eigen::Index c = 0; c < part.matrix.cols(); ++c) {
      const auto ci = std::lower_bound(in_sorted.begin(), in_sorted.end(),
                                       part.inputs[c]) -
                      in_sorted.begin();
      for (Eigen::Index r = 0; r < part.matrix.rows(); ++r) {
        const auto ri = std::lower_bound(out_sorted.begin(), out_sorted.end(),
                                         part.outputs[r]) -
                        out_sorted.begin();
        m(ri, ci) = part.matrix(r, c);
      }
    }
  };
  place(a);
  place(b);
  t.inputs = in_sorted;
  t.outputs = out_sorted;
  t.matrix = std::move(m);
  return t;
}

ModeTransform pdbs_transform(double mu, double nu) {
  if (!(mu >= 0.0 && mu <= 1.0 && nu >= 0.0 && nu <= 1.0))
    throw std::invalid_argument("PDBS transmissions must lie in [0, 1]");
  ModeTransform t;
  for (int s : {2, 3})
    for (Polarization p : {Polarization::H, Polarization::V})
      for (TemporalBin b : {TemporalBin::Matched, TemporalBin::Orthogonal})
        t.inputs.push_back({s, p, b});
  for (int s : {5, 6})
    for (Polarization p : {Polarization::H, Polarization::V})
      for (TemporalBin b : {TemporalBin::Matched, TemporalBin::Orthogonal})
        t.outputs.push_back({s, p, b});
  t.inputs = sorted_unique(t.inputs);
  t.outputs = sorted_unique(t.outputs);
  t.matrix = Eigen::MatrixXcd::Zero(8, 8);
  const auto out_idx = [&](const BosonicMode& m) {
    return std::lower_bound(t.outputs.begin(), t.outputs.end(), m) -
           t.outputs.begin();
  };
  for (Eigen::Index c = 0; c < 8; ++c) {
    const BosonicMode in = t.inputs[c];
    const double tau = (in.pol == Polarization::H) ? mu : nu;
    const BosonicMode to5{5, in.pol, in.bin};
    const BosonicMode to6{6, in.pol, in.bin};
    if (in.spatial == 2) {
      t.matrix(out_idx(to5), c) = std::sqrt(1.0 - tau);
      t.matrix(out_idx(to6), c) = std::sqrt(tau);
    } else {
      t.matrix(out_idx(to5), c) = std::sqrt(tau);
      t.matrix(out_idx(to6), c) = -std::sqrt(1.0 - tau);
    }
  }
  return t;
}

FockState evolve_fock(const FockState& state, const ModeTransform& t) {
  for (size_t k = 0; k < state.modes().size(); ++k) {
    // Unoccupied modes outside the transform are harmless; occupied ones
    // are a real mode mismatch.
    if (t.input_index(state.modes()[k]) >= 0) continue;
    for (const auto& [occ, amp] : state.terms())
      if (occ[k] > 0)
        throw std::invalid_argument("state occupies a mode the transform does not accept");
  }

  FockState out(t.outputs);
  const size_t nout = t.outputs.size();
  for (const auto& [occ, amp] : state.terms()) {
    // Monomial coefficients on products of output creation operators.
    std::map<Occupation, Complex> poly;
    double in_norm = 1.0;
    for (int n : occ) in_norm *= factorial(n);
    poly[Occupation(nout, 0)] = amp / std::sqrt(in_norm);

    for (size_t k = 0; k < occ.size(); ++k) {
      const int col = t.input_index(state.modes()[k]);
      for (int photon = 0; photon < occ[k]; ++photon) {
        std::map<Occupation, Complex> next;
        for (const auto& [mono, coeff] : poly) {
          for (size_t i = 0; i < nout; ++i) {
            const Complex u = t.matrix(i, col);
            if (u == Complex{0.0, 0.0}) continue;
            Occupation grown = mono;
            ++grown[i];
            next[grown] += coeff * u;
          }
        }
        poly = std::move(next);
      }
    }

    for (const auto& [mono, coeff] : poly) {
      double out_norm = 1.0;
      for (int n : mono) out_norm *= factorial(n);
      out.add_term(mono, coeff * std::sqrt(out_norm));
    }
  }
  out.flag_normalized(state.flagged_normalized() && t.is_unitary());
  return out;
}

FockState set_distinguishability(const FockState& state, int spatial,
                                 double xi) {
  if (!(xi >= 0.0 && xi <= 1.0))
    throw std::invalid_argument("overlap xi must lie in [0, 1]");
  if (xi == 1.0) return state;

  // Closure: both temporal bins of the addressed spatial mode must exist
  // as outputs (and inputs, to keep the matrix square and unitary).
  std::set<BosonicMode> mode_set(state.modes().begin(), state.modes().end());
  for (const BosonicMode& m : state.modes())
    if (m.spatial == spatial)
      mode_set.insert({m.spatial, m.pol, TemporalBin::Orthogonal});
  std::vector<BosonicMode> modes(mode_set.begin(), mode_set.end());

  ModeTransform t;
  t.inputs = modes;
  t.outputs = modes;
  t.matrix = Eigen::MatrixXcd::Zero(modes.size(), modes.size());
  const double eta = std::sqrt(1.0 - xi * xi);
  for (size_t c = 0; c < modes.size(); ++c) {
    const BosonicMode in = modes[c];
    if (in.spatial != spatial) {
      t.matrix(c, c) = 1.0;
      continue;
    }
    const BosonicMode matched{in.spatial, in.pol, TemporalBin::Matched};
    const BosonicMode orth{in.spatial, in.pol, TemporalBin::Orthogonal};
    const auto row = [&](const BosonicMode& m) {
      return std::lower_bound(modes.begin(), modes.end(), m) - modes.begin();
    };
    if (in.bin == TemporalBin::Matched) {
      t.matrix(row(matched), c) = xi;
      t.matrix(row(orth), c) = eta;
    } else {
      t.matrix(row(matched), c) = -eta;
      t.matrix(row(orth), c) = xi;
    }
  }
  return evolve_fock(state, t);
}

PostSelection post_select_one_per_mode(const FockState& state,
                                       const std::vector<int>& spatial_modes) {
  std::vector<int> spatial = spatial_modes;
  std::sort(spatial.begin(), spatial.end());
  if (std::adjacent_find(spatial.begin(), spatial.end()) != spatial.end())
    throw std::invalid_argument("duplicate spatial modes in post-selection");
  if (spatial.empty())
    throw std::invalid_argument("post-selection needs at least one spatial mode");
  if (state.total_photons() != static_cast<int>(spatial.size()))
    throw std::invalid_argument(
        "photon number must equal the number of post-selected spatial modes");

  const int nq = static_cast<int>(spatial.size());
  const Eigen::Index dim = Eigen::Index{1} << nq;
  const auto spatial_pos = [&](int s) {
    const auto it = std::lower_bound(spatial.begin(), spatial.end(), s);
    return (it != spatial.end() && *it == s)
               ? static_cast<int>(it - spatial.begin())
               : -1;
  };

  // One amplitude vector per temporal-bin pattern; patterns are mutually
  // orthogonal environments after tracing the bins out.
  std::map<std::vector<TemporalBin>, Eigen::VectorXcd> sectors;
  for (const auto& [occ, amp] : state.terms()) {
    std::vector<int> pol_bits(nq, -1);
    std::vector<TemporalBin> bins(nq, TemporalBin::Matched);
    bool keep = true;
    for (size_t k = 0; k < occ.size() && keep; ++k) {
      if (occ[k] == 0) continue;
      const BosonicMode m = state.modes()[k];
      const int pos = spatial_pos(m.spatial);
      if (pos < 0 || occ[k] > 1 || pol_bits[pos] != -1) {
        keep = false;  // bunched, doubly occupied, or outside the kept set
        break;
      }
      pol_bits[pos] = (m.pol == Polarization::V) ? 1 : 0;
      bins[pos] = m.bin;
    }
    if (!keep) continue;
    Eigen::Index idx = 0;
    for (int k = 0; k < nq; ++k)
      idx |= static_cast<Eigen::Index>(pol_bits[k]) << (nq - 1 - k);
    auto [it, inserted] = sectors.try_emplace(bins, Eigen::VectorXcd::Zero(dim));
    it->second(idx) += amp;
  }

  std::vector<qstate::ModeId> labels(spatial.begin(), spatial.end());
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(dim, dim);
  double weight = 0.0;
  int live_sectors = 0;
  const Eigen::VectorXcd* last_live = nullptr;
  for (const auto& [bins, vec] : sectors) {
    const double w = vec.squaredNorm();
    if (w == 0.0) continue;
    rho += vec * vec.adjoint();
    weight += w;
    ++live_sectors;
    last_live = &vec;
  }

  PostSelection out{qstate::DensityMatrix(labels, rho, false), std::nullopt,
                    weight};
  if (live_sectors == 1)
    out.pure = qstate::StateVector(labels, *last_live, false);
  return out;
}

std::vector<double> hom_scan(const std::vector<double>& delays,
                             double coherence_length, double xi0,
                             double transmission) {
  if (coherence_length <= 0.0)
    throw std::invalid_argument("coherence length must be positive");
  if (!(xi0 >= 0.0 && xi0 <= 1.0))
    throw std::invalid_argument("xi0 must lie in [0, 1]");
  const double sigma = coherence_length / (2.0 * std::sqrt(std::log(2.0)));

  std::vector<double> rates;
  rates.reserve(delays.size());
  for (double d : delays) {
    const double xi = xi0 * std::exp(-d * d / (2.0 * sigma * sigma));
    FockState in = FockState::single_photons(
        {{2, Polarization::V, TemporalBin::Matched},
         {3, Polarization::V, TemporalBin::Matched}});
    in = set_distinguishability(in, 3, xi);
    in = evolve_fock(in, pdbs_transform(transmission, transmission));
    rates.push_back(post_select_one_per_mode(in, {5, 6}).success_weight);
  }
  return rates;
}

double visibility(const std::vector<double>& rates) {
  if (rates.empty()) throw std::invalid_argument("empty rate curve");
  const auto [mn, mx] = std::minmax_element(rates.begin(), rates.end());
  if (*mx <= 0.0) throw std::invalid_argument("rate curve has no events");
  return (*mx - *mn) / *mx;
}

}  // namespace wsim::optics
