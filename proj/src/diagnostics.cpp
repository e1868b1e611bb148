#include "qdgd/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

#include "qdgd/errors.hpp"

namespace qdgd {

double consensus_error(const Eigen::MatrixXd& iterates) {
  if (iterates.rows() == 0) return 0.0;
  const Eigen::RowVectorXd mean = iterates.colwise().mean();
  return (iterates.rowwise() - mean).squaredNorm();
}

double lyapunov_eta(double lipschitz, double mu, double sigma2, EtaMode mode) {
  const double gap = 1.0 - sigma2;
  const double L = lipschitz;
  switch (mode) {
    case EtaMode::Body:
      return 2.0 * (L + 8.0 * L * L / mu) / gap;
    case EtaMode::Appendix:
      return 2.0 * (L + L * L / 8.0) / gap;
  }
  return 0.0;
}

double lyapunov_value(double r_sq, double consensus_sq, double eta, const StepSchedule& steps,
                      std::size_t k) {
  return r_sq + eta * (steps.alpha(k) / steps.beta(k)) * consensus_sq;
}

void RateBoundInputs::validate() const {
  if (!(mu > 0.0) || !(lipschitz > 0.0) || !(grad_bound > 0.0)) {
    throw Error("rate bound: mu, L and C must be positive");
  }
  if (dims == 0 || agents == 0) throw Error("rate bound: n and d must be positive");
  if (bits < 1 || bits > 32) throw Error("rate bound: bits must lie in [1, 32]");
  if (!(sigma2 >= 0.0 && sigma2 < 1.0)) throw Error("rate bound: sigma2 must lie in [0, 1)");
  if (!(v1 >= 0.0)) throw Error("rate bound: E[V_1] must be non-negative");
}

namespace {

double quantization_scale(const RateBoundInputs& in) {
  const double levels = std::ldexp(1.0, static_cast<int>(in.bits)) - 1.0;
  const double s = in.grad_bound * static_cast<double>(in.dims) / levels;
  return s * s;
}

}  // namespace

double gamma_k(const RateBoundInputs& in, double alpha_sum, std::size_t k) {
  if (k < 1) throw Error("gamma_k requires k >= 1");
  const double mu = in.mu;
  const double L = in.lipschitz;
  const double gap = 1.0 - in.sigma2;
  const double n = static_cast<double>(in.agents);
  const double kp = static_cast<double>(k + 1);
  const double coupling = L + 8.0 * L * L / mu;

  const double step_term = (16.0 / (mu * mu)) / (kp * kp);
  const double drift_term = (40.0 * L * L * coupling / (mu * mu * mu)) / std::pow(kp, 1.5);
  const double noise_rate =
      4.0 / (gap * std::pow(kp, 1.5)) + 320.0 * coupling * n * n / (gap * gap * std::pow(kp, 1.75));
  return step_term + drift_term + noise_rate * quantization_scale(in) * alpha_sum * alpha_sum;
}

double gamma_k(const RateBoundInputs& in, const StepSchedule& steps, std::size_t k) {
  return gamma_k(in, alpha_sum(steps, k), k);
}

double rate_bound(const RateBoundInputs& in, std::size_t T) {
  if (T < 1) throw Error("rate bound requires T >= 1");
  in.validate();
  const double mu = in.mu;
  const double L = in.lipschitz;
  const double gap = 1.0 - in.sigma2;
  const double n = static_cast<double>(in.agents);
  const double tp = static_cast<double>(T + 1);
  const double log_sq = std::pow(std::log(static_cast<double>(T)), 2);
  const double q = quantization_scale(in);

  const double initial = mu * in.v1 / (8.0 * tp * tp);
  const double harmonic = 2.0 / tp;
  const double optimality_noise = 16.0 / (3.0 * mu * gap) * q * log_sq / std::sqrt(tp);
  const double consensus_noise =
      4.0 * n * n * (L + 8.0 * L * L) / (gap * gap) * q * log_sq / std::pow(tp, 0.75);
  const double drift = 8.0 * L * (L + 8.0 * L * L / mu) / (3.0 * mu * mu * mu) / std::sqrt(tp);
  return initial + harmonic + optimality_noise + consensus_noise + drift;
}

double TraceRecord::f_gap_avg_min() const {
  return f_gap_avg.empty() ? 0.0 : *std::min_element(f_gap_avg.begin(), f_gap_avg.end());
}

double TraceRecord::f_gap_avg_max() const {
  return f_gap_avg.empty() ? 0.0 : *std::max_element(f_gap_avg.begin(), f_gap_avg.end());
}

double TraceRecord::f_gap_avg_mean() const {
  if (f_gap_avg.empty()) return 0.0;
  return std::accumulate(f_gap_avg.begin(), f_gap_avg.end(), 0.0) /
         static_cast<double>(f_gap_avg.size());
}

const std::vector<std::string>& trace_columns() {
  static const std::vector<std::string> columns = {
      "k",        "f_gap_last", "f_gap_avg_min", "f_gap_avg_max",  "consensus_sq",
      "r_sq",     "lyapunov",   "delta_k",       "range_k",        "max_coord",
      "gamma_k",  "f_gap_avg_mean", "f_over_n_gap_avg_mean"};
  return columns;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_trace_csv(std::ostream& out, const Trace& trace) {
  const auto& cols = trace_columns();
  for (std::size_t c = 0; c < cols.size(); ++c) out << (c ? "," : "") << cols[c];
  out << '\n';
  const double n = static_cast<double>(std::max<std::size_t>(trace.agents, 1));
  for (const auto& r : trace.records) {
    const double mean = r.f_gap_avg_mean();
    out << r.k;
    for (double v : {r.f_gap_last, r.f_gap_avg_min(), r.f_gap_avg_max(), r.consensus_sq, r.r_sq,
                     r.lyapunov, r.delta_k, r.range_k, r.max_coord, r.gamma_k, mean, mean / n}) {
      out << ',' << format_double(v);
    }
    out << '\n';
  }
  if (trace.error) out << "# error: " << *trace.error << '\n';
}

std::vector<TraceRow> read_trace_csv(std::istream& in) {
  std::vector<TraceRow> rows;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (header) {
      header = false;
      if (line.rfind("k,", 0) != 0) throw Error("trace csv: missing header");
      continue;
    }
    std::stringstream ss(line);
    std::string cell;
    TraceRow row{};
    bool first = true;
    while (std::getline(ss, cell, ',')) {
      if (first) {
        row.k = static_cast<std::size_t>(std::stoull(cell));
        first = false;
      } else {
        row.values.push_back(std::strtod(cell.c_str(), nullptr));
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

double loglog_slope(const Trace& trace, std::size_t k_lo, std::size_t k_hi) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t m = 0;
  for (const auto& r : trace.records) {
    const double gap = r.f_gap_avg_mean();
    if (r.k < k_lo || r.k > k_hi || !(gap > 0.0)) continue;
    const double x = std::log(static_cast<double>(r.k));
    const double y = std::log(gap);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++m;
  }
  if (m < 2) return std::numeric_limits<double>::quiet_NaN();
  const double md = static_cast<double>(m);
  return (md * sxy - sx * sy) / (md * sxx - sx * sx);
}

}  // namespace qdgd
