#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "qdgd/config.hpp"
#include "qdgd/diagnostics.hpp"
#include "qdgd/experiment.hpp"

namespace qdgd {

inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitAssumption = 2;
inline constexpr int kExitConfig = 64;

/// Writes config.json, graph.edges, instance.csv, trace.csv (trace_r<i>.csv
/// for several replicas), baseline_trace.csv and the fig2 two-column files
/// into config.output_dir, then prints one summary line to `out`.
int cmd_run(const ExperimentConfig& config, std::ostream& out, std::ostream& err);

struct VerifyOptions {
  std::uint64_t seed = 1;
  std::size_t n = 4;
  std::size_t d = 2;
  unsigned bits = 4;
  std::size_t iterations = 200;
  std::size_t replicas = 500;
  double sigma2_offset = 0.0;
  bool unquantized = false;
};

/// Path graph over options.n agents with data drawn from the data seed.
Instance verify_instance(const VerifyOptions& options);

/// Lemma checks and property suite on a small path-graph instance; prints a
/// JSON report and returns kExitCheckFailed if anything failed.
int cmd_verify(const VerifyOptions& options, std::ostream& out, std::ostream& err);

struct BoundRow {
  std::size_t T = 0;
  std::optional<double> measured;  // max_i f(z_T^i) - f*
  double bound = 0.0;
  std::optional<double> ratio;
};

/// Looks up each T among `rows` (read from a trace) and evaluates the rate
/// bound with v1 taken from the k = 1 Lyapunov value.
std::vector<BoundRow> tabulate_bound(RateBoundInputs inputs, const std::vector<TraceRow>& rows,
                                     const std::vector<std::size_t>& T);
void write_bound_csv(std::ostream& out, const std::vector<BoundRow>& rows);

struct BoundOptions {
  ExperimentConfig config;
  std::vector<std::size_t> T;
  /// Directory of an earlier run (config.json + trace.csv); when unset the
  /// experiment is run with K = max T.
  std::optional<std::string> run_dir;
};

/// CSV "T,measured_gap,theoretical_bound,ratio". Returns kExitCheckFailed if
/// some ratio exceeds 1.
int cmd_bound(const BoundOptions& options, std::ostream& out, std::ostream& err);

int cmd_graph_emit(std::size_t n, double edge_probability, std::uint64_t seed,
                   std::size_t retry_limit, const std::optional<std::string>& path,
                   std::ostream& out, std::ostream& err);
/// Prints "n m sigma2 spectral_gap" for an edge-list file.
int cmd_graph_load(const std::string& path, std::ostream& out, std::ostream& err);

}  // namespace qdgd
