#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "qdgd/graph.hpp"
#include "qdgd/objective.hpp"
#include "qdgd/quantizer.hpp"
#include "qdgd/schedule.hpp"

namespace qdgd {

struct AgentState {
  Eigen::VectorXd x;  // current iterate x_k
  Eigen::VectorXd z;  // (t+1)-weighted average of x_0 .. x_{k-1}; zero before the first round
  std::uint64_t weight_sum = 0;  // sum_{t<k} (t+1)

  /// Folds iterate x_t = `x` from round `t` into the running average.
  void accumulate(std::size_t t);
};

/// Snapshot of every agent after k synchronized rounds. `messages` holds the
/// transmissions of round k-1 that produced this state (empty at k = 0 and
/// under exact communication).
struct RoundState {
  std::size_t k = 0;
  std::vector<AgentState> agents;
  std::vector<QuantizedMessage> messages;

  Eigen::MatrixXd iterates() const;  // n x d, row i = x_k^i
  Eigen::MatrixXd outputs() const;   // n x d, row i = z_k^i
};

/// All agents start at x_0 = 0.
RoundState initial_state(std::size_t n, std::size_t d);

enum class Communication { Quantized, Exact };

using GradientFn = std::function<Eigen::VectorXd(std::size_t agent, const Eigen::VectorXd& x)>;

/// Everything a round needs besides the state. References must outlive the
/// problem object.
struct Problem {
  const NetworkTopology& topology;
  const MixingMatrix& mixing;
  const RegressionObjective& objective;
  const StepSchedule& steps;
  const QuantizerSchedule& quantizer;
  /// Replaces objective.gradient when set (used for gradient-free dynamics).
  GradientFn gradient_override{};

  Eigen::VectorXd gradient(std::size_t agent, const Eigen::VectorXd& x) const {
    return gradient_override ? gradient_override(agent, x) : objective.gradient(agent, x);
  }
};

struct RoundOptions {
  Communication mode = Communication::Quantized;
  std::uint64_t seed = 0;
  /// Processing order inside each phase; empty means 0..n-1.
  std::span<const std::size_t> order{};
};

/// One synchronized round k -> k+1:
///   phase 1: every agent quantizes x_k^i and publishes its payload,
///   phase 2: every agent decodes the round-k payloads of its neighbours and
///            itself and applies
///     x_{k+1}^i = (1 - beta_k) x_k^i + beta_k sum_j a_ij q_k^j - alpha_k grad f_i(x_k^i)
///   with j ranging over the neighbours and i itself.
/// Throws AssumptionViolation from the quantizer and NumericalError on
/// non-finite iterates.
RoundState run_round(const RoundState& state, const Problem& problem,
                     const RoundOptions& options = {});

/// z of the agent after the last completed round.
const Eigen::VectorXd& averaged_output(const AgentState& agent);

}  // namespace qdgd
