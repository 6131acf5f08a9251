#include "wsim/random.hpp"

#include <cmath>
#include <stdexcept>

namespace wsim::random {

namespace {

double poisson_knuth(Engine& eng, double lambda) {
  const double limit = std::exp(-lambda);
  double prod = 1.0;
  double k = -1.0;
  do {
    prod *= uniform01(eng);
    k += 1.0;
  } while (prod > limit);
  return k;
}

// Hormann (1993), algorithm PTRS; exact rejection sampler for lambda >= 10.
double poisson_ptrs(Engine& eng, double lambda) {
  const double slam = std::sqrt(lambda);
  const double loglam = std::log(lambda);
  const double b = 0.931 + 2.53 * slam;
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double v_r = 0.9277 - 3.6224 / (b - 2.0);
  while (true) {
    const double u = uniform01(eng) - 0.5;
    const double v = uniform01(eng);
    const double us = 0.5 - std::abs(u);
    const double k = std::floor((2.0 * a / us + b) * u + lambda + 0.43);
    if (us >= 0.07 && v <= v_r) return k;
    if (k < 0.0 || (us < 0.013 && v > us)) continue;
    if (std::log(v * inv_alpha / (a / (us * us) + b)) <=
        k * loglam - lambda - std::lgamma(k + 1.0))
      return k;
  }
}

}  // namespace

double poisson_sample(Engine& eng, double lambda) {
  if (lambda < 0.0 || !std::isfinite(lambda))
    throw std::invalid_argument("Poisson mean must be finite and nonnegative");
  if (lambda == 0.0) return 0.0;
  if (lambda < 10.0) return poisson_knuth(eng, lambda);
  return poisson_ptrs(eng, lambda);
}

}  // namespace wsim::random
