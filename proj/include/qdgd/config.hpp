#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>

#include "qdgd/diagnostics.hpp"
#include "qdgd/objective.hpp"

namespace qdgd {

struct GraphConfig {
  double edge_probability = 0.158;
  std::size_t retry_limit = 1000;
  /// Edge-list file; when set the random graph is not sampled.
  std::optional<std::string> edges_file;
};

struct ExperimentConfig {
  std::size_t n = 40;
  std::size_t d = 5;
  unsigned bits = 16;
  std::size_t iterations = 10000;
  std::uint64_t seed = 1;
  GraphConfig graph;
  DataBounds data;
  /// std::nullopt disables the cap ("off" in JSON).
  std::optional<double> beta_clamp = 1.0;
  EtaMode eta_mode = EtaMode::Body;
  bool baseline = false;
  std::size_t replicas = 1;
  std::string output_dir = "out";
  std::size_t jobs = 1;
  /// Box radius certifying C; defaults to 4 ||x*||_inf + 1.
  std::optional<double> operating_radius;

  /// Throws ConfigError naming the first offending field.
  void validate() const;
};

/// Command-line values; every set field replaces the file value.
struct ConfigOverrides {
  std::optional<std::size_t> n, d, iterations, replicas, jobs;
  std::optional<unsigned> bits;
  std::optional<std::uint64_t> seed;
  std::optional<double> edge_probability;
  std::optional<std::string> edges_file, output_dir, eta_mode;
  std::optional<double> beta_clamp;
  bool no_beta_clamp = false;
  bool baseline = false;
};

/// Merges a JSON object into `config`. Unknown keys and wrong types throw
/// ConfigError. Empty or whitespace-only text leaves the config unchanged.
void apply_json(ExperimentConfig& config, const std::string& text);
void apply_overrides(ExperimentConfig& config, const ConfigOverrides& overrides);

/// File (optional) then flags, then validation.
ExperimentConfig load_config(const std::optional<std::string>& path,
                             const ConfigOverrides& overrides);

/// Fully resolved config as pretty-printed JSON.
std::string to_json_text(const ExperimentConfig& config);

EtaMode parse_eta_mode(const std::string& text);
std::string to_string(EtaMode mode);

}  // namespace qdgd
