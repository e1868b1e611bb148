#include "qdgd/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <thread>

#include "qdgd/errors.hpp"
#include "qdgd/random.hpp"

namespace qdgd {

std::vector<std::size_t> RecordPlan::points(std::size_t K) const {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k <= std::min(K, dense_until); ++k) out.push_back(k);
  if (growth > 1.0) {
    for (int m = 0;; ++m) {
      const double t = std::ceil(std::pow(growth, m));
      if (t > static_cast<double>(K)) break;
      const auto k = static_cast<std::size_t>(t);
      if (k > dense_until) out.push_back(k);
    }
  }
  for (auto k : extra) {
    if (k <= K) out.push_back(k);
  }
  out.push_back(K);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

Instance::Instance(NetworkTopology topology, RegressionObjective objective, unsigned bits,
                   std::optional<double> beta_clamp, std::size_t horizon)
    : topology_(std::move(topology)),
      mixing_(lazy_metropolis(topology_)),
      objective_(std::move(objective)),
      steps_(objective_.mu(), spectral_gap(mixing_), beta_clamp),
      quantizer_(objective_.grad_bound(), QuantizerConfig{bits, objective_.dims()}, steps_,
                 horizon) {
  if (objective_.agents() != topology_.size()) {
    throw Error("instance has " + std::to_string(objective_.agents()) + " agents but graph has " +
                std::to_string(topology_.size()));
  }
}

Instance Instance::from_config(const ExperimentConfig& config) {
  auto topology = [&] {
    if (config.graph.edges_file) {
      std::ifstream in(*config.graph.edges_file);
      if (!in) throw ConfigError("graph.edges_file", "cannot open " + *config.graph.edges_file);
      auto t = read_edge_list(in);
      if (t.size() != config.n) throw ConfigError("graph.edges_file", "agent count differs from n");
      return t;
    }
    return generate_random_connected_graph(config.n, config.graph.edge_probability,
                                           derive_seed(config.seed, kGraphSalt),
                                           config.graph.retry_limit);
  }();
  auto objective = generate_instance(config.n, config.d, derive_seed(config.seed, kDataSalt),
                                     config.data, config.operating_radius);
  return Instance(std::move(topology), std::move(objective), config.bits, config.beta_clamp,
                  config.iterations + 1);
}

RateBoundInputs Instance::bound_inputs() const {
  RateBoundInputs in;
  in.mu = objective_.mu();
  in.lipschitz = objective_.lipschitz();
  in.grad_bound = objective_.grad_bound();
  in.dims = objective_.dims();
  in.agents = objective_.agents();
  in.bits = quantizer_.bits();
  in.sigma2 = mixing_.sigma2();
  return in;
}

TraceRecord make_record(const RoundState& state, const Instance& instance, double eta) {
  const auto& obj = instance.objective();
  const auto k = state.k;
  const Eigen::MatrixXd X = state.iterates();
  const Eigen::VectorXd xbar = X.colwise().mean().transpose();

  TraceRecord r;
  r.k = k;
  r.f_gap_last = obj.global_value(xbar) - obj.f_star();
  r.f_gap_avg.reserve(state.agents.size());
  for (const auto& a : state.agents) r.f_gap_avg.push_back(obj.global_value(a.z) - obj.f_star());
  r.consensus_sq = consensus_error(X);
  r.r_sq = (xbar - obj.optimum()).squaredNorm();
  r.lyapunov = lyapunov_value(r.r_sq, r.consensus_sq, eta, instance.steps(), k);
  r.delta_k = instance.quantizer().delta(k);
  r.range_k = instance.quantizer().range(k);
  r.max_coord = X.size() ? X.cwiseAbs().maxCoeff() : 0.0;
  r.gamma_k = k >= 1 ? gamma_k(instance.bound_inputs(), instance.quantizer().alpha_sum(k), k)
                     : std::numeric_limits<double>::quiet_NaN();
  return r;
}

TrajectoryResult run_trajectory(const Instance& instance, const TrajectoryOptions& options) {
  const auto& obj = instance.objective();
  const auto problem = instance.problem();
  const double eta = lyapunov_eta(obj.lipschitz(), obj.mu(), instance.mixing().sigma2(),
                                  options.eta_mode);
  const auto points = options.plan.points(options.iterations);
  auto next_point = points.begin();

  TrajectoryResult result;
  result.trace.agents = obj.agents();
  RoundState state = initial_state(obj.agents(), obj.dims());
  const RoundOptions round_options{options.mode, options.seed, {}};

  try {
    for (std::size_t k = 0;; ++k) {
      double max_coord = 0.0;
      for (const auto& a : state.agents) max_coord = std::max(max_coord, a.x.cwiseAbs().maxCoeff());
      if (max_coord > instance.quantizer().range(k)) ++result.trace.range_violations;

      if (next_point != points.end() && *next_point == k) {
        result.trace.records.push_back(make_record(state, instance, eta));
        ++next_point;
      }
      if (k == options.iterations) break;

      RoundState next = run_round(state, problem, round_options);
      if (options.mode == Communication::Quantized) {
        const double delta = instance.quantizer().delta(k);
        bool violated = false;
        for (std::size_t i = 0; i < next.messages.size(); ++i) {
          const Eigen::VectorXd q = decode(next.messages[i], instance.quantizer());
          const double err = (state.agents[i].x - q).cwiseAbs().maxCoeff();
          if (err > delta) violated = true;
          if (delta > 0.0) {
            result.trace.max_quantization_error_ratio =
                std::max(result.trace.max_quantization_error_ratio, err / delta);
          }
        }
        if (violated) ++result.trace.quantization_error_violations;
      }
      state = std::move(next);
    }
  } catch (const Error& e) {
    result.trace.error = e.what();
    result.failure = std::current_exception();
  }
  result.final_state = std::move(state);
  return result;
}

ExperimentResult run_experiment(const Instance& instance, const ExperimentConfig& config,
                                const RecordPlan& plan) {
  struct Task {
    Communication mode;
    std::uint64_t seed;
    TrajectoryResult* out;
  };
  ExperimentResult result;
  result.replicas.resize(config.replicas);
  if (config.baseline) result.baseline.emplace();

  std::vector<Task> tasks;
  for (std::size_t r = 0; r < config.replicas; ++r) {
    tasks.push_back({Communication::Quantized, derive_seed(config.seed, r + 1), &result.replicas[r]});
  }
  if (result.baseline) tasks.push_back({Communication::Exact, config.seed, &*result.baseline});

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t t = next++; t < tasks.size(); t = next++) {
      TrajectoryOptions opts{config.iterations, tasks[t].mode, tasks[t].seed, config.eta_mode, plan};
      *tasks[t].out = run_trajectory(instance, opts);
    }
  };
  const auto workers = std::min(config.jobs, tasks.size());
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return result;
}

}  // namespace qdgd
