#include "wsim/tomography.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "wsim/random.hpp"

namespace wsim::tomography {

namespace {

constexpr double kProbFloor = 1e-12;

qstate::NamedState axis_state(Axis a) {
  switch (a) {
    case Axis::H: return qstate::NamedState::H;
    case Axis::V: return qstate::NamedState::V;
    case Axis::D: return qstate::NamedState::D;
    case Axis::R: return qstate::NamedState::R;
    case Axis::L: return qstate::NamedState::L;
  }
  throw std::invalid_argument("unknown axis");
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void check_records(const std::vector<CountRecord>& records) {
  if (records.empty()) throw std::invalid_argument("no count records");
  const auto& labels = records.front().setting.labels;
  for (const auto& r : records) {
    if (r.setting.labels != labels)
      throw std::invalid_argument("count records mix different label sets");
    if (r.setting.axes.size() != labels.size())
      throw std::invalid_argument("setting axes do not match label count");
    if (!(r.counts >= 0.0) || !std::isfinite(r.counts))
      throw std::invalid_argument("counts must be finite and nonnegative");
  }
}

// Projector kets as a dense column per record.
Eigen::MatrixXcd projector_kets(const std::vector<CountRecord>& records) {
  const Eigen::Index dim = Eigen::Index{1}
                           << records.front().setting.labels.size();
  Eigen::MatrixXcd kets(dim, static_cast<Eigen::Index>(records.size()));
  for (size_t i = 0; i < records.size(); ++i)
    kets.col(static_cast<Eigen::Index>(i)) =
        setting_ket(records[i].setting).amplitudes();
  return kets;
}

// Rank of the real linear map rho -> (Tr(Pi_i rho))_i over Hermitian
// matrices; d^2 means informationally complete.
Eigen::Index measurement_rank(const Eigen::MatrixXcd& kets) {
  const Eigen::Index dim = kets.rows();
  Eigen::MatrixXd design(kets.cols(), dim * dim);
  for (Eigen::Index i = 0; i < kets.cols(); ++i) {
    const Eigen::MatrixXcd pi = kets.col(i) * kets.col(i).adjoint();
    Eigen::Index col = 0;
    for (Eigen::Index r = 0; r < dim; ++r) {
      design(i, col++) = pi(r, r).real();
      for (Eigen::Index c = r + 1; c < dim; ++c) {
        design(i, col++) = 2.0 * pi(r, c).real();
        design(i, col++) = -2.0 * pi(r, c).imag();
      }
    }
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  qr.setThreshold(1e-10);
  return qr.rank();
}

// Flux calibration: sum of counts over the {H,V}^n settings, whose
// projectors add up to the identity.
double fitted_flux(const std::vector<CountRecord>& records) {
  const size_t n = records.front().setting.labels.size();
  double flux = 0.0;
  size_t found = 0;
  for (const auto& r : records) {
    const bool computational =
        std::all_of(r.setting.axes.begin(), r.setting.axes.end(),
                    [](Axis a) { return a == Axis::H || a == Axis::V; });
    if (computational) {
      flux += r.counts;
      ++found;
    }
  }
  if (found != (size_t{1} << n))
    throw std::invalid_argument(
        "flux calibration needs the complete computational-basis settings");
  return flux;
}

}  // namespace

char axis_letter(Axis a) {
  switch (a) {
    case Axis::H: return 'H';
    case Axis::V: return 'V';
    case Axis::D: return 'D';
    case Axis::R: return 'R';
    case Axis::L: return 'L';
  }
  throw std::invalid_argument("unknown axis");
}

Axis axis_from_letter(char c) {
  switch (c) {
    case 'H': return Axis::H;
    case 'V': return Axis::V;
    case 'D': return Axis::D;
    case 'R': return Axis::R;
    case 'L': return Axis::L;
    default:
      throw std::invalid_argument(std::string("unknown axis letter: ") + c);
  }
}

std::vector<MeasurementSetting> enumerate_settings(
    const std::vector<qstate::ModeId>& labels, SettingScheme scheme) {
  std::vector<qstate::ModeId> sorted = labels;
  std::sort(sorted.begin(), sorted.end());
  const std::vector<Axis> basis =
      scheme == SettingScheme::Standard
          ? std::vector<Axis>{Axis::H, Axis::V, Axis::D, Axis::R}
          : std::vector<Axis>{Axis::H, Axis::V, Axis::D, Axis::R, Axis::L};
  const size_t n = sorted.size();
  size_t total = 1;
  for (size_t k = 0; k < n; ++k) total *= basis.size();
  std::vector<MeasurementSetting> out;
  out.reserve(total);
  for (size_t code = 0; code < total; ++code) {
    std::vector<Axis> axes(n);
    size_t rem = code;
    for (size_t k = n; k-- > 0;) {  // last label cycles fastest
      axes[k] = basis[rem % basis.size()];
      rem /= basis.size();
    }
    out.push_back({sorted, axes});
  }
  return out;
}

qstate::StateVector setting_ket(const MeasurementSetting& setting) {
  if (setting.labels.size() != setting.axes.size() || setting.labels.empty())
    throw std::invalid_argument("malformed measurement setting");
  qstate::StateVector ket = qstate::make_state({setting.labels[0]},
                                               axis_state(setting.axes[0]));
  for (size_t k = 1; k < setting.labels.size(); ++k)
    ket = qstate::tensor(
        ket, qstate::make_state({setting.labels[k]}, axis_state(setting.axes[k])));
  return ket;
}

std::vector<CountRecord> simulate_counts(
    const qstate::DensityMatrix& rho,
    const std::vector<MeasurementSetting>& settings, double total_scale,
    std::uint64_t seed, CountNoise noise, double acquisition_time) {
  if (total_scale < 0.0)
    throw std::invalid_argument("total_scale must be nonnegative");
  if (settings.empty()) throw std::invalid_argument("no settings to simulate");
  auto eng = random::make_engine(seed);
  std::vector<CountRecord> out;
  out.reserve(settings.size());
  for (const auto& s : settings) {
    if (s.labels != rho.labels())
      throw std::invalid_argument("setting labels do not match the state");
    const double p =
        std::clamp(qstate::expectation(rho, setting_ket(s)), 0.0, 1.0);
    const double expected = total_scale * p;
    const double counts = (noise == CountNoise::Exact)
                              ? expected
                              : random::poisson_sample(eng, expected);
    out.push_back({s, counts, acquisition_time, total_scale});
  }
  return out;
}

LinearInversionResult linear_inversion(const std::vector<CountRecord>& records) {
  check_records(records);
  const Eigen::MatrixXcd kets = projector_kets(records);
  const Eigen::Index dim = kets.rows();
  if (measurement_rank(kets) < dim * dim)
    throw std::invalid_argument("setting set is rank deficient");
  const double flux = fitted_flux(records);
  if (flux <= 0.0) throw std::invalid_argument("zero calibration flux");

  // rho = (I + sum_k x_k B_k) / dim over a traceless Hermitian basis:
  // elementwise real/imag off-diagonal pairs plus diagonal differences.
  std::vector<Eigen::MatrixXcd> basis;
  for (Eigen::Index r = 0; r < dim; ++r) {
    for (Eigen::Index c = r + 1; c < dim; ++c) {
      Eigen::MatrixXcd re = Eigen::MatrixXcd::Zero(dim, dim);
      re(r, c) = re(c, r) = 1.0;
      basis.push_back(re);
      Eigen::MatrixXcd im = Eigen::MatrixXcd::Zero(dim, dim);
      im(r, c) = std::complex<double>(0.0, -1.0);
      im(c, r) = std::complex<double>(0.0, 1.0);
      basis.push_back(im);
    }
  }
  for (Eigen::Index r = 1; r < dim; ++r) {
    Eigen::MatrixXcd dz = Eigen::MatrixXcd::Zero(dim, dim);
    dz(0, 0) = 1.0;
    dz(r, r) = -1.0;
    basis.push_back(dz);
  }

  const Eigen::Index nb = static_cast<Eigen::Index>(basis.size());
  Eigen::MatrixXd design(static_cast<Eigen::Index>(records.size()), nb);
  Eigen::VectorXd target(static_cast<Eigen::Index>(records.size()));
  for (Eigen::Index i = 0; i < design.rows(); ++i) {
    const auto phi = kets.col(i);
    for (Eigen::Index k = 0; k < nb; ++k)
      design(i, k) = (phi.adjoint() * basis[static_cast<size_t>(k)] * phi)(0).real() /
                     static_cast<double>(dim);
    target(i) = records[static_cast<size_t>(i)].counts / flux -
                1.0 / static_cast<double>(dim);
  }
  const Eigen::VectorXd x = design.colPivHouseholderQr().solve(target);

  Eigen::MatrixXcd m = Eigen::MatrixXcd::Identity(dim, dim);
  for (Eigen::Index k = 0; k < nb; ++k)
    m += x(k) * basis[static_cast<size_t>(k)];
  m /= static_cast<double>(dim);

  LinearInversionResult out{qstate::DensityMatrix(
                                records.front().setting.labels, m, false),
                            0.0, true};
  out.min_eigenvalue = out.rho.min_eigenvalue();
  out.positive = out.min_eigenvalue >= -1e-8;
  return out;
}

ReconstructionResult iml_reconstruct(
    const std::vector<CountRecord>& records, const IterationOptions& opts,
    const std::optional<qstate::DensityMatrix>& initial) {
  check_records(records);
  if (opts.max_iterations < 1 || opts.convergence_tol <= 0.0)
    throw std::invalid_argument("bad iteration options");
  const Eigen::MatrixXcd kets = projector_kets(records);
  const Eigen::Index dim = kets.rows();
  if (measurement_rank(kets) < dim * dim)
    throw std::invalid_argument("setting set is rank deficient");

  const Eigen::Index nr = kets.cols();
  Eigen::VectorXd counts(nr);
  for (Eigen::Index i = 0; i < nr; ++i)
    counts(i) = records[static_cast<size_t>(i)].counts;
  const double total = counts.sum();
  if (total <= 0.0) throw std::invalid_argument("all counts are zero");
  const Eigen::VectorXd freq = counts / total;

  Eigen::MatrixXcd g = Eigen::MatrixXcd::Zero(dim, dim);
  for (Eigen::Index i = 0; i < nr; ++i)
    g += kets.col(i) * kets.col(i).adjoint();
  const Eigen::MatrixXcd g_inv = g.inverse();

  Eigen::MatrixXcd rho =
      Eigen::MatrixXcd::Identity(dim, dim) / static_cast<double>(dim);
  if (initial) {
    if (initial->labels() != records.front().setting.labels)
      throw std::invalid_argument("initial state labels do not match records");
    rho = initial->normalized().matrix();
  }

  const auto probabilities = [&](const Eigen::MatrixXcd& r) {
    Eigen::VectorXd p(nr);
    for (Eigen::Index i = 0; i < nr; ++i)
      p(i) = std::max((kets.col(i).adjoint() * r * kets.col(i))(0).real(), 0.0);
    return p;
  };
  // Poisson likelihood with the flux profiled out (constants dropped).
  const auto log_likelihood = [&](const Eigen::VectorXd& p) {
    double ll = 0.0;
    for (Eigen::Index i = 0; i < nr; ++i)
      if (counts(i) > 0.0) ll += counts(i) * std::log(std::max(p(i), kProbFloor));
    return ll - total * std::log(p.sum());
  };
  const auto step = [&](const Eigen::MatrixXcd& m,
                        const Eigen::MatrixXcd& from) {
    Eigen::MatrixXcd next = m * from * m.adjoint();
    next = (next + next.adjoint()) / 2.0;
    const double tr = next.trace().real();
    if (!(tr > 0.0)) throw std::runtime_error("iteration produced zero trace");
    next /= tr;
    return next;
  };

  Eigen::VectorXd p = probabilities(rho);
  double ll = log_likelihood(p);
  ReconstructionResult out{qstate::DensityMatrix(
                               records.front().setting.labels, rho, true),
                           ll, 0, false, {ll}};

  const Eigen::MatrixXcd ident = Eigen::MatrixXcd::Identity(dim, dim);
  for (int it = 1; it <= opts.max_iterations; ++it) {
    Eigen::MatrixXcd r_op = Eigen::MatrixXcd::Zero(dim, dim);
    for (Eigen::Index i = 0; i < nr; ++i)
      if (freq(i) > 0.0)
        r_op += (freq(i) / std::max(p(i), kProbFloor)) *
                (kets.col(i) * kets.col(i).adjoint());
    const Eigen::MatrixXcd m_full = g_inv * r_op;

    // Full multiplicative step first; dilute only if it would lower the
    // likelihood (rare, but the full step carries no general guarantee).
    const double slack = 1e-12 * (1.0 + std::abs(ll));
    Eigen::MatrixXcd next = step(m_full, rho);
    Eigen::VectorXd p_next = probabilities(next);
    double ll_next = log_likelihood(p_next);
    if (ll_next < ll - slack) {
      bool accepted = false;
      for (double eps = 1.0; eps >= 1e-6; eps /= 2.0) {
        next = step((ident + eps * m_full) / (1.0 + eps), rho);
        p_next = probabilities(next);
        ll_next = log_likelihood(p_next);
        if (ll_next >= ll - slack) {
          accepted = true;
          break;
        }
      }
      if (!accepted)
        throw std::runtime_error("log-likelihood decreased at iteration " +
                                 std::to_string(it));
    } else {
      // The multiplicative map contracts only harmonically once the iterate
      // nears a low-rank maximiser, so amplify any step that already paid:
      // square the operator repeatedly and keep the strongest power that
      // still raises the likelihood. Each extra power costs one small
      // matrix product, the first non-improving power stops the search,
      // and the accept test keeps the reported trace monotone.
      Eigen::MatrixXcd m_pow = m_full;
      for (int doubling = 0; doubling < 60; ++doubling) {
        m_pow = m_pow * m_pow;
        const double scale = m_pow.norm();
        if (!(scale > 0.0) || !std::isfinite(scale)) break;
        m_pow /= scale;
        Eigen::MatrixXcd cand = m_pow * rho * m_pow.adjoint();
        cand = (cand + cand.adjoint()) / 2.0;
        const double tr = cand.trace().real();
        if (!(tr > 0.0) || !std::isfinite(tr)) break;
        cand /= tr;
        Eigen::VectorXd p_cand = probabilities(cand);
        const double ll_cand = log_likelihood(p_cand);
        if (!(ll_cand > ll_next)) break;
        next = std::move(cand);
        p_next = std::move(p_cand);
        ll_next = ll_cand;
      }
    }

    const double gain = ll_next - ll;
    rho = std::move(next);
    p = std::move(p_next);
    ll = ll_next;
    out.log_likelihood_trace.push_back(ll);
    out.iterations = it;
    if (gain < opts.convergence_tol) {
      out.converged = true;
      break;
    }
  }
  out.rho = qstate::DensityMatrix(records.front().setting.labels, rho, true);
  out.log_likelihood = ll;
  return out;
}

std::vector<UncertaintyEstimate> monte_carlo_uncertainty_multi(
    const std::vector<CountRecord>& records,
    const std::vector<std::function<double(const qstate::DensityMatrix&)>>&
        metrics,
    int n_samples, std::uint64_t seed, ResampleMode mode,
    const IterationOptions& opts) {
  check_records(records);
  if (n_samples < 2)
    throw std::invalid_argument("need at least two Monte Carlo samples");
  if (metrics.empty()) throw std::invalid_argument("no metrics given");

  std::vector<std::vector<double>> values(metrics.size());
  for (auto& v : values) v.reserve(static_cast<size_t>(n_samples));
  for (int k = 0; k < n_samples; ++k) {
    auto eng = random::make_stream(seed, static_cast<std::uint64_t>(k));
    std::vector<CountRecord> sample = records;
    if (mode == ResampleMode::Poisson)
      for (auto& r : sample) r.counts = random::poisson_sample(eng, r.counts);
    try {
      const qstate::DensityMatrix rho = iml_reconstruct(sample, opts).rho;
      for (size_t j = 0; j < metrics.size(); ++j)
        values[j].push_back(metrics[j](rho));
    } catch (const std::exception& e) {
      throw std::runtime_error("Monte Carlo sample " + std::to_string(k) +
                               " failed: " + e.what());
    }
  }
  std::vector<UncertaintyEstimate> out;
  out.reserve(metrics.size());
  for (const auto& vals : values) {
    double mean = 0.0;
    for (double v : vals) mean += v;
    mean /= static_cast<double>(vals.size());
    double var = 0.0;
    for (double v : vals) var += (v - mean) * (v - mean);
    var /= static_cast<double>(vals.size() - 1);
    out.push_back({mean, std::sqrt(var)});
  }
  return out;
}

UncertaintyEstimate monte_carlo_uncertainty(
    const std::vector<CountRecord>& records,
    const std::function<double(const qstate::DensityMatrix&)>& metric,
    int n_samples, std::uint64_t seed, ResampleMode mode,
    const IterationOptions& opts) {
  return monte_carlo_uncertainty_multi(records, {metric}, n_samples, seed,
                                       mode, opts)
      .front();
}

void write_counts_csv(const std::string& path,
                      const std::vector<CountRecord>& records) {
  check_records(records);
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  const size_t n = records.front().setting.labels.size();
  for (size_t k = 0; k < n; ++k) f << "setting_q" << (k + 1) << ",";
  f << "counts,acquisition_time\n";
  for (const auto& r : records) {
    for (Axis a : r.setting.axes) f << axis_letter(a) << ",";
    f << format_double(r.counts) << "," << format_double(r.acquisition_time)
      << "\n";
  }
  if (!f) throw std::runtime_error("failed writing " + path);
}

std::vector<CountRecord> read_counts_csv(
    const std::string& path, const std::vector<qstate::ModeId>& labels,
    double total_scale) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  std::vector<qstate::ModeId> sorted = labels;
  std::sort(sorted.begin(), sorted.end());
  std::string line;
  if (!std::getline(f, line)) throw std::runtime_error("empty CSV " + path);

  std::vector<CountRecord> out;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != sorted.size() + 2)
      throw std::runtime_error("CSV row has wrong column count: " + line);
    MeasurementSetting s;
    s.labels = sorted;
    for (size_t k = 0; k < sorted.size(); ++k) {
      if (fields[k].size() != 1)
        throw std::runtime_error("bad setting field: " + fields[k]);
      s.axes.push_back(axis_from_letter(fields[k][0]));
    }
    out.push_back({s, std::stod(fields[sorted.size()]),
                   std::stod(fields[sorted.size() + 1]), total_scale});
  }
  return out;
}

}  // namespace wsim::tomography
