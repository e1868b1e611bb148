#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "qdgd/random.hpp"
#include "qdgd/schedule.hpp"

namespace qdgd {

/// b bits per coordinate, d coordinates per message.
struct QuantizerConfig {
  unsigned bits = 16;
  std::size_t dims = 1;

  void validate() const;
  /// B = 2^b - 1.
  std::uint64_t bin_count() const { return (std::uint64_t{1} << bits) - 1; }
  std::size_t payload_bytes() const { return (dims * bits + 7) / 8; }
};

struct ScalarQuantization {
  std::uint32_t index;
  double value;
};

/// Stochastic rounding of x in [lower, upper] onto 2^b evenly spaced
/// endpoints. `uniform` is one draw from [0, 1); the upper neighbour is chosen
/// when uniform < (x - tau_m)/Delta. Values within 1e-9*(upper-lower) outside
/// the interval are clamped; anything further throws qdgd::Error("out of range").
ScalarQuantization quantize_scalar(double x, double lower, double upper, unsigned bits,
                                   double uniform);

template <class URBG>
ScalarQuantization quantize_scalar(double x, double lower, double upper, unsigned bits,
                                   URBG& rng) {
  static_assert(std::is_same_v<typename URBG::result_type, std::uint64_t>);
  return quantize_scalar(x, lower, upper, bits, to_unit(rng()));
}

/// Endpoint value lower + m * (upper - lower)/(2^b - 1), capped at upper (the
/// top endpoint can otherwise land one ulp above it). Shared by encoder and
/// decoder so round trips are bit-exact.
double endpoint_value(std::uint32_t index, double lower, double upper, unsigned bits);

/// Deterministic range schedule known to every agent:
///   range(k) = C * sum_{t<k} alpha_t,   Delta_k = 2 range(k) / (2^b - 1).
class QuantizerSchedule {
 public:
  /// Prefix sums are tabulated for k <= horizon; larger k are extended on
  /// demand from the last tabulated value (same arithmetic, same result).
  QuantizerSchedule(double gradient_bound, QuantizerConfig config, StepSchedule steps,
                    std::size_t horizon = 0);

  /// sum_{t<k} alpha_t, identical to the free alpha_sum().
  double alpha_sum(std::size_t k) const;
  double range(std::size_t k) const;
  /// Scalar bin width.
  double delta(std::size_t k) const;
  /// Euclidean bound on ||x - q|| for a d-vector: sqrt(d) * Delta_k.
  double euclidean_bound(std::size_t k) const;
  /// The looser d * Delta_k vector bound.
  double dimension_scaled_bound(std::size_t k) const;

  double gradient_bound() const { return gradient_bound_; }
  const QuantizerConfig& config() const { return config_; }
  unsigned bits() const { return config_.bits; }
  std::size_t dims() const { return config_.dims; }
  const StepSchedule& steps() const { return steps_; }

 private:
  struct Partial {
    double sum;
    double comp;
  };
  Partial partial(std::size_t k) const;

  double gradient_bound_;
  QuantizerConfig config_;
  StepSchedule steps_;
  std::vector<Partial> prefix_;
};

double delta_k(const QuantizerSchedule& schedule, std::size_t k);

/// One transmission: d endpoint indices packed MSB-first into ceil(d*b/8) bytes.
struct QuantizedMessage {
  std::size_t iteration = 0;
  std::vector<std::uint32_t> indices;
  std::vector<std::uint8_t> payload;
};

std::vector<std::uint8_t> pack_indices(std::span<const std::uint32_t> indices, unsigned bits);
/// Throws qdgd::Error("payload length mismatch") if the size is not ceil(count*b/8).
std::vector<std::uint32_t> unpack_indices(std::span<const std::uint8_t> payload, unsigned bits,
                                          std::size_t count);

/// Quantizes x over [-range(k), range(k)] coordinate-wise with draws keyed by
/// (k, coordinate) on the agent's stream. At k = 0 the range is empty and only
/// the zero vector is admissible. Throws AssumptionViolation if a coordinate
/// leaves the range beyond the clamp band.
QuantizedMessage quantize_vector(const Eigen::VectorXd& x, const QuantizerSchedule& schedule,
                                 std::size_t k, const KeyedStream& stream);

/// Receiver-side reconstruction from payload bytes only.
Eigen::VectorXd decode(const QuantizedMessage& message, const QuantizerSchedule& schedule);

}  // namespace qdgd
