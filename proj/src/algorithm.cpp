#include "qdgd/algorithm.hpp"

#include <numeric>
#include <string>

#include "qdgd/errors.hpp"

namespace qdgd {

void AgentState::accumulate(std::size_t t) {
  const auto w = static_cast<std::uint64_t>(t + 1);
  const double prev = static_cast<double>(weight_sum);
  weight_sum += w;
  z = (prev * z + static_cast<double>(w) * x) / static_cast<double>(weight_sum);
}

Eigen::MatrixXd RoundState::iterates() const {
  if (agents.empty()) return {};
  Eigen::MatrixXd out(agents.size(), agents.front().x.size());
  for (std::size_t i = 0; i < agents.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = agents[i].x.transpose();
  }
  return out;
}

Eigen::MatrixXd RoundState::outputs() const {
  if (agents.empty()) return {};
  Eigen::MatrixXd out(agents.size(), agents.front().z.size());
  for (std::size_t i = 0; i < agents.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = agents[i].z.transpose();
  }
  return out;
}

RoundState initial_state(std::size_t n, std::size_t d) {
  RoundState s;
  s.agents.resize(n);
  for (auto& a : s.agents) {
    a.x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d));
    a.z = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d));
  }
  return s;
}

RoundState run_round(const RoundState& state, const Problem& problem, const RoundOptions& options) {
  const auto n = state.agents.size();
  const auto k = state.k;
  if (n != problem.topology.size() || n != problem.mixing.size()) {
    throw Error("round state does not match topology");
  }

  std::vector<std::size_t> default_order;
  std::span<const std::size_t> order = options.order;
  if (order.empty()) {
    default_order.resize(n);
    std::iota(default_order.begin(), default_order.end(), std::size_t{0});
    order = default_order;
  } else if (order.size() != n) {
    throw Error("processing order must list every agent once");
  }

  RoundState next;
  next.k = k + 1;
  next.agents = state.agents;

  // Phase 1: publish.
  std::vector<Eigen::VectorXd> received(n);
  if (options.mode == Communication::Quantized) {
    next.messages.resize(n);
    for (auto i : order) {
      next.messages[i] =
          quantize_vector(state.agents[i].x, problem.quantizer, k, KeyedStream(options.seed, i));
    }
    for (auto i : order) received[i] = decode(next.messages[i], problem.quantizer);
  } else {
    for (auto i : order) received[i] = state.agents[i].x;
  }

  // Phase 2: update from round-k data only.
  const double alpha = problem.steps.alpha(k);
  const double beta = problem.steps.beta(k);
  for (auto i : order) {
    const auto& self = state.agents[i];
    Eigen::VectorXd mixed = problem.mixing(i, i) * received[i];
    for (auto j : problem.topology.neighbors(i)) mixed += problem.mixing(i, j) * received[j];

    auto& out = next.agents[i];
    out.accumulate(k);
    out.x = (1.0 - beta) * self.x + beta * mixed - alpha * problem.gradient(i, self.x);
    if (!out.x.allFinite()) {
      throw NumericalError("non-finite iterate at round " + std::to_string(k + 1) + ", agent " +
                           std::to_string(i));
    }
  }
  return next;
}

const Eigen::VectorXd& averaged_output(const AgentState& agent) { return agent.z; }

}  // namespace qdgd
