#pragma once

#include <cstddef>
#include <optional>

namespace qdgd {

/// Two-time-scale step sizes:
///   alpha_k = (4/mu) / (k+1)                 gradient step
///   beta_k  = (4/(1-sigma2)) / (k+1)^(3/4)   consensus step, optionally capped
class StepSchedule {
 public:
  /// `beta_clamp` caps beta_k; std::nullopt keeps the raw sequence.
  StepSchedule(double mu, double spectral_gap, std::optional<double> beta_clamp = 1.0);

  double alpha(std::size_t k) const;
  double beta(std::size_t k) const;
  double beta_raw(std::size_t k) const;

  double mu() const { return mu_; }
  double spectral_gap() const { return spectral_gap_; }
  std::optional<double> beta_clamp() const { return beta_clamp_; }

 private:
  double mu_;
  double spectral_gap_;
  std::optional<double> beta_clamp_;
};

/// sum_{t=0}^{k-1} alpha_t, accumulated in index order with Neumaier compensation.
double alpha_sum(const StepSchedule& schedule, std::size_t k);

}  // namespace qdgd
