#include "qdgd/schedule.hpp"

#include <cmath>

#include "qdgd/errors.hpp"

namespace qdgd {

StepSchedule::StepSchedule(double mu, double spectral_gap, std::optional<double> beta_clamp)
    : mu_(mu), spectral_gap_(spectral_gap), beta_clamp_(beta_clamp) {
  if (!(mu > 0.0) || !std::isfinite(mu)) throw Error("step schedule: mu must be positive");
  if (!(spectral_gap > 0.0 && spectral_gap <= 1.0)) {
    throw Error("step schedule: spectral gap must lie in (0, 1]");
  }
  if (beta_clamp && !(*beta_clamp > 0.0)) throw Error("step schedule: beta clamp must be positive");
}

double StepSchedule::alpha(std::size_t k) const {
  return (4.0 / mu_) / static_cast<double>(k + 1);
}

double StepSchedule::beta_raw(std::size_t k) const {
  return (4.0 / spectral_gap_) / std::pow(static_cast<double>(k + 1), 0.75);
}

double StepSchedule::beta(std::size_t k) const {
  const double raw = beta_raw(k);
  return beta_clamp_ ? std::min(raw, *beta_clamp_) : raw;
}

double alpha_sum(const StepSchedule& schedule, std::size_t k) {
  double sum = 0.0;
  double comp = 0.0;
  for (std::size_t t = 0; t < k; ++t) {
    const double a = schedule.alpha(t);
    const double s = sum + a;
    comp += std::abs(sum) >= std::abs(a) ? (sum - s) + a : (a - s) + sum;
    sum = s;
  }
  return sum + comp;
}

}  // namespace qdgd
