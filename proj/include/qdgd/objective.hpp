#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>

#include <Eigen/Dense>

namespace qdgd {

/// f(x) = sum_i (w_i^T x - b_i)^2 with agent i holding row i of the feature
/// matrix and target b_i.
///
/// The curvature constants describe the global sum f:
///   mu = 2 lambda_min(W^T W),  L = 2 lambda_max(W^T W).
/// The per-agent gradient bound C is certified on the box ||x||_inf <= R:
///   ||grad f_i(x)|| <= 2 ||w_i|| (||w_i||_1 R + |b_i|).
class RegressionObjective {
 public:
  /// `operating_radius` defaults to 4 ||x*||_inf + 1. Throws qdgd::Error
  /// ("degenerate instance") when lambda_min(W^T W) < 1e-10.
  RegressionObjective(Eigen::MatrixXd features, Eigen::VectorXd targets,
                      std::optional<double> operating_radius = std::nullopt);

  std::size_t agents() const { return static_cast<std::size_t>(features_.rows()); }
  std::size_t dims() const { return static_cast<std::size_t>(features_.cols()); }
  const Eigen::MatrixXd& features() const { return features_; }
  const Eigen::VectorXd& targets() const { return targets_; }

  const Eigen::VectorXd& optimum() const { return optimum_; }
  double f_star() const { return f_star_; }
  double mu() const { return mu_; }
  double lipschitz() const { return lipschitz_; }
  double grad_bound() const { return grad_bound_; }
  double operating_radius() const { return operating_radius_; }
  /// max_i 2 ||w_i||^2, the largest per-agent gradient Lipschitz constant.
  double max_agent_lipschitz() const { return max_agent_lipschitz_; }

  double local_value(std::size_t agent, const Eigen::VectorXd& x) const;
  Eigen::VectorXd gradient(std::size_t agent, const Eigen::VectorXd& x) const;
  double global_value(const Eigen::VectorXd& x) const;
  Eigen::VectorXd global_gradient(const Eigen::VectorXd& x) const;

 private:
  Eigen::MatrixXd features_;
  Eigen::VectorXd targets_;
  Eigen::VectorXd optimum_;
  double f_star_ = 0.0;
  double mu_ = 0.0;
  double lipschitz_ = 0.0;
  double grad_bound_ = 0.0;
  double operating_radius_ = 0.0;
  double max_agent_lipschitz_ = 0.0;
};

struct DataBounds {
  double feature_high = 0.65;
  double target_high = 0.45;
};

/// w_i(j) ~ U[0, feature_high], b_i ~ U[0, target_high]. Degenerate draws are
/// retried with seed + 1, up to 100 times.
RegressionObjective generate_instance(std::size_t n, std::size_t d, std::uint64_t seed,
                                      DataBounds bounds = {},
                                      std::optional<double> operating_radius = std::nullopt);

/// CSV with header "w_1,...,w_d,b" and one row per agent. Constants are
/// recomputed on load.
void write_instance_csv(std::ostream& out, const RegressionObjective& objective);
RegressionObjective read_instance_csv(std::istream& in,
                                      std::optional<double> operating_radius = std::nullopt);

}  // namespace qdgd
