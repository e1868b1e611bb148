#include "qdgd/quantizer.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qdgd/errors.hpp"

namespace qdgd {

void QuantizerConfig::validate() const {
  if (bits < 1 || bits > 32) throw Error("quantizer: bits must lie in [1, 32]");
  if (dims < 1) throw Error("quantizer: dims must be positive");
}

double endpoint_value(std::uint32_t index, double lower, double upper, unsigned bits) {
  const double bins = static_cast<double>((std::uint64_t{1} << bits) - 1);
  const double delta = (upper - lower) / bins;
  return std::min(lower + static_cast<double>(index) * delta, upper);
}

ScalarQuantization quantize_scalar(double x, double lower, double upper, unsigned bits,
                                   double uniform) {
  if (bits < 1 || bits > 32) throw Error("quantizer: bits must lie in [1, 32]");
  if (!(lower < upper)) throw Error("quantizer: empty interval");
  const double eps = 1e-9 * (upper - lower);
  if (!(x >= lower - eps && x <= upper + eps)) throw Error("out of range");
  x = std::clamp(x, lower, upper);

  const std::uint64_t top = (std::uint64_t{1} << bits) - 1;
  const double delta = (upper - lower) / static_cast<double>(top);
  auto tau = [&](std::uint64_t m) {
    return std::min(lower + static_cast<double>(m) * delta, upper);
  };

  if (x >= upper) {
    return {static_cast<std::uint32_t>(top), tau(top)};
  }

  std::uint64_t m = static_cast<std::uint64_t>(std::floor((x - lower) / delta));
  if (m > top - 1) m = top - 1;
  while (m > 0 && tau(m) > x) --m;
  while (m + 1 < top && tau(m + 1) <= x) ++m;

  const double lo = tau(m);
  const double hi = tau(m + 1);
  const double p = (x - lo) / delta;
  std::uint64_t chosen = uniform < p ? m + 1 : m;
  // Endpoints are reconstructed in floating point; keep |Q(x) - x| <= Delta.
  if (chosen == m + 1 && hi - x > delta) chosen = m;
  if (chosen == m && x - lo > delta) chosen = m + 1;
  return {static_cast<std::uint32_t>(chosen), tau(chosen)};
}

QuantizerSchedule::QuantizerSchedule(double gradient_bound, QuantizerConfig config,
                                     StepSchedule steps, std::size_t horizon)
    : gradient_bound_(gradient_bound), config_(config), steps_(steps) {
  config_.validate();
  if (!(gradient_bound > 0.0) || !std::isfinite(gradient_bound)) {
    throw Error("quantizer schedule: gradient bound must be positive");
  }
  prefix_.reserve(horizon + 1);
  Partial acc{0.0, 0.0};
  prefix_.push_back(acc);
  for (std::size_t t = 0; t < horizon; ++t) {
    const double a = steps_.alpha(t);
    const double s = acc.sum + a;
    acc.comp += std::abs(acc.sum) >= std::abs(a) ? (acc.sum - s) + a : (a - s) + acc.sum;
    acc.sum = s;
    prefix_.push_back(acc);
  }
}

QuantizerSchedule::Partial QuantizerSchedule::partial(std::size_t k) const {
  if (k < prefix_.size()) return prefix_[k];
  Partial acc = prefix_.back();
  for (std::size_t t = prefix_.size() - 1; t < k; ++t) {
    const double a = steps_.alpha(t);
    const double s = acc.sum + a;
    acc.comp += std::abs(acc.sum) >= std::abs(a) ? (acc.sum - s) + a : (a - s) + acc.sum;
    acc.sum = s;
  }
  return acc;
}

double QuantizerSchedule::alpha_sum(std::size_t k) const {
  const auto p = partial(k);
  return p.sum + p.comp;
}

double QuantizerSchedule::range(std::size_t k) const { return gradient_bound_ * alpha_sum(k); }

double QuantizerSchedule::delta(std::size_t k) const {
  return 2.0 * range(k) / static_cast<double>(config_.bin_count());
}

double QuantizerSchedule::euclidean_bound(std::size_t k) const {
  return std::sqrt(static_cast<double>(config_.dims)) * delta(k);
}

double QuantizerSchedule::dimension_scaled_bound(std::size_t k) const {
  return static_cast<double>(config_.dims) * delta(k);
}

double delta_k(const QuantizerSchedule& schedule, std::size_t k) { return schedule.delta(k); }

std::vector<std::uint8_t> pack_indices(std::span<const std::uint32_t> indices, unsigned bits) {
  if (bits < 1 || bits > 32) throw Error("codec: bits must lie in [1, 32]");
  std::vector<std::uint8_t> out((indices.size() * bits + 7) / 8, 0);
  std::size_t pos = 0;
  for (auto index : indices) {
    if (bits < 32 && (std::uint64_t{index} >> bits) != 0) {
      throw Error("codec: index does not fit in " + std::to_string(bits) + " bits");
    }
    for (unsigned b = bits; b-- > 0; ++pos) {
      if ((index >> b) & 1u) out[pos / 8] |= static_cast<std::uint8_t>(0x80u >> (pos % 8));
    }
  }
  return out;
}

std::vector<std::uint32_t> unpack_indices(std::span<const std::uint8_t> payload, unsigned bits,
                                          std::size_t count) {
  if (bits < 1 || bits > 32) throw Error("codec: bits must lie in [1, 32]");
  if (payload.size() != (count * bits + 7) / 8) throw Error("payload length mismatch");
  std::vector<std::uint32_t> out(count, 0);
  std::size_t pos = 0;
  for (auto& index : out) {
    std::uint32_t v = 0;
    for (unsigned b = 0; b < bits; ++b, ++pos) {
      v = (v << 1) | ((payload[pos / 8] >> (7 - pos % 8)) & 1u);
    }
    index = v;
  }
  return out;
}

QuantizedMessage quantize_vector(const Eigen::VectorXd& x, const QuantizerSchedule& schedule,
                                 std::size_t k, const KeyedStream& stream) {
  const auto d = schedule.dims();
  if (static_cast<std::size_t>(x.size()) != d) throw Error("quantizer: dimension mismatch");
  QuantizedMessage msg;
  msg.iteration = k;
  msg.indices.assign(d, 0);

  const double r = schedule.range(k);
  const double eps = 1e-9 * 2.0 * r;
  for (std::size_t j = 0; j < d; ++j) {
    const double v = x(static_cast<Eigen::Index>(j));
    if (!(std::abs(v) <= r + eps)) {
      throw AssumptionViolation(k, stream.agent(), j, v, r);
    }
    if (r > 0.0) {
      msg.indices[j] = quantize_scalar(v, -r, r, schedule.bits(), stream.uniform(k, j)).index;
    }
  }
  msg.payload = pack_indices(msg.indices, schedule.bits());
  return msg;
}

Eigen::VectorXd decode(const QuantizedMessage& message, const QuantizerSchedule& schedule) {
  const auto d = schedule.dims();
  const auto indices = unpack_indices(message.payload, schedule.bits(), d);
  const double r = schedule.range(message.iteration);
  Eigen::VectorXd out(static_cast<Eigen::Index>(d));
  for (std::size_t j = 0; j < d; ++j) {
    out(static_cast<Eigen::Index>(j)) =
        r > 0.0 ? endpoint_value(indices[j], -r, r, schedule.bits()) : 0.0;
  }
  return out;
}

AssumptionViolation::AssumptionViolation(std::size_t round, std::optional<std::size_t> agent,
                                         std::size_t coordinate, double value, double range)
    : Error("gradient-bound violation: round " + std::to_string(round) +
            (agent ? ", agent " + std::to_string(*agent) : std::string{}) + ", coordinate " +
            std::to_string(coordinate) + " has |x| = " + std::to_string(std::abs(value)) +
            " > range " + std::to_string(range) + "; the configured C is too small"),
      round_(round),
      agent_(agent),
      coordinate_(coordinate),
      value_(value),
      range_(range) {}

}  // namespace qdgd
