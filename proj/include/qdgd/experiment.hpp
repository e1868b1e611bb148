#pragma once

#include <cstddef>
#include <cstdint>
#include <exception>
#include <vector>

#include "qdgd/algorithm.hpp"
#include "qdgd/config.hpp"
#include "qdgd/diagnostics.hpp"
#include "qdgd/graph.hpp"
#include "qdgd/objective.hpp"
#include "qdgd/quantizer.hpp"
#include "qdgd/schedule.hpp"

namespace qdgd {

/// Salts separating the seed streams drawn from ExperimentConfig::seed.
inline constexpr std::uint64_t kGraphSalt = 0x6772617068;
inline constexpr std::uint64_t kDataSalt = 0x64617461;

/// Which rounds get a trace record: every k up to `dense_until`, then each k
/// where ceil(growth^m) is crossed, plus the final round and any `extra`.
struct RecordPlan {
  std::size_t dense_until = 1000;
  double growth = 1.05;
  std::vector<std::size_t> extra;

  /// Sorted, unique record rounds in [0, K].
  std::vector<std::size_t> points(std::size_t K) const;
};

/// Graph, mixing weights, data and both schedules for one configuration.
class Instance {
 public:
  Instance(NetworkTopology topology, RegressionObjective objective, unsigned bits,
           std::optional<double> beta_clamp, std::size_t horizon);

  /// Builds the graph (edge file or sampled with the graph seed) and the data
  /// (data seed) described by `config`.
  static Instance from_config(const ExperimentConfig& config);

  const NetworkTopology& topology() const { return topology_; }
  const MixingMatrix& mixing() const { return mixing_; }
  const RegressionObjective& objective() const { return objective_; }
  const StepSchedule& steps() const { return steps_; }
  const QuantizerSchedule& quantizer() const { return quantizer_; }

  Problem problem() const { return Problem{topology_, mixing_, objective_, steps_, quantizer_}; }
  /// Rate constants with v1 left at zero.
  RateBoundInputs bound_inputs() const;

 private:
  NetworkTopology topology_;
  MixingMatrix mixing_;
  RegressionObjective objective_;
  StepSchedule steps_;
  QuantizerSchedule quantizer_;
};

struct TrajectoryOptions {
  std::size_t iterations = 0;
  Communication mode = Communication::Quantized;
  std::uint64_t seed = 0;
  EtaMode eta_mode = EtaMode::Body;
  RecordPlan plan;
};

struct TrajectoryResult {
  Trace trace;
  RoundState final_state;
  /// Set when a round threw; the trace holds the records before it and
  /// trace.error carries the message.
  std::exception_ptr failure;
};

TraceRecord make_record(const RoundState& state, const Instance& instance, double eta);

/// Runs `iterations` rounds from x_0 = 0, checking the range invariant
/// max_i ||x_k^i||_inf <= range(k) and |x - q| <= Delta_k every round.
TrajectoryResult run_trajectory(const Instance& instance, const TrajectoryOptions& options);

struct ExperimentResult {
  std::vector<TrajectoryResult> replicas;
  std::optional<TrajectoryResult> baseline;
};

/// Replica r uses quantizer seed derive_seed(config.seed, r + 1); the
/// baseline runs with exact communication. Work is spread over config.jobs
/// threads.
ExperimentResult run_experiment(const Instance& instance, const ExperimentConfig& config,
                                const RecordPlan& plan = {});

}  // namespace qdgd
