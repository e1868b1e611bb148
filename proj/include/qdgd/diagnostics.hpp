#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qdgd/schedule.hpp"

namespace qdgd {

/// ||X - 1 xbar^T||_F^2 for an n x d iterate matrix.
double consensus_error(const Eigen::MatrixXd& iterates);

/// Which constant multiplies alpha_k/beta_k in the Lyapunov weight.
///   Body:     eta = 2 (L + 8 L^2 / mu) / (1 - sigma2)
///   Appendix: eta = 2 (L + L^2 / 8) / (1 - sigma2)
enum class EtaMode { Body, Appendix };

double lyapunov_eta(double lipschitz, double mu, double sigma2, EtaMode mode);

/// V_k = r_sq + eta * (alpha_k / beta_k) * consensus_sq.
double lyapunov_value(double r_sq, double consensus_sq, double eta, const StepSchedule& steps,
                      std::size_t k);

/// Constants of the rate expression.
struct RateBoundInputs {
  double mu = 0.0;
  double lipschitz = 0.0;
  double grad_bound = 0.0;  // C
  std::size_t dims = 0;     // d
  std::size_t agents = 0;   // n
  unsigned bits = 0;
  double sigma2 = 0.0;
  double v1 = 0.0;  // estimate of E[V_1]

  void validate() const;
};

/// Gamma_k of the Lyapunov recursion with sum_{t<k} alpha_t supplied by the
/// caller. Requires k >= 1.
double gamma_k(const RateBoundInputs& in, double alpha_sum, std::size_t k);
/// Same, summing alpha_t from `steps`.
double gamma_k(const RateBoundInputs& in, const StepSchedule& steps, std::size_t k);

/// Upper bound on E[f(z)] - f* after T rounds (T >= 1), sum of the five terms
///   mu E[V_1] / (8 (T+1)^2)
///   2 / (T+1)
///   16 / (3 mu (1-sigma2)) (C d / (2^b-1))^2 (ln T)^2 / (T+1)^(1/2)
///   4 n^2 (L + 8 L^2) / (1-sigma2)^2 (C d / (2^b-1))^2 (ln T)^2 / (T+1)^(3/4)
///   8 L (L + 8 L^2/mu) / (3 mu^3) / (T+1)^(1/2)
double rate_bound(const RateBoundInputs& in, std::size_t T);

/// Per-record diagnostics.
struct TraceRecord {
  std::size_t k = 0;
  double f_gap_last = 0.0;               // f(xbar_k) - f*
  std::vector<double> f_gap_avg;         // f(z_k^i) - f*, one per agent
  double consensus_sq = 0.0;             // ||Y_k||_F^2
  double r_sq = 0.0;                     // ||xbar_k - x*||^2
  double lyapunov = 0.0;
  double delta_k = 0.0;
  double range_k = 0.0;
  double max_coord = 0.0;                // max_i ||x_k^i||_inf
  double gamma_k = 0.0;                  // NaN at k = 0

  double f_gap_avg_min() const;
  double f_gap_avg_max() const;
  double f_gap_avg_mean() const;
};

struct Trace {
  std::size_t agents = 0;
  std::vector<TraceRecord> records;
  /// Rounds where max_coord exceeded range_k.
  std::size_t range_violations = 0;
  /// Rounds where some |x - q| exceeded Delta_k in a coordinate.
  std::size_t quantization_error_violations = 0;
  /// max over rounds of max_i ||x_k^i - q_k^i||_inf / Delta_k.
  double max_quantization_error_ratio = 0.0;
  std::optional<std::string> error;
};

/// Column names, in order.
const std::vector<std::string>& trace_columns();

/// Header row plus one row per record, 17 significant digits. A trailing
/// "# error: ..." line marks a trace cut short by an exception.
void write_trace_csv(std::ostream& out, const Trace& trace);

struct TraceRow {
  std::size_t k;
  std::vector<double> values;  // columns after k, in trace_columns() order
};
/// Reads rows back; comment lines are skipped.
std::vector<TraceRow> read_trace_csv(std::istream& in);

/// Least-squares slope of log(gap) against log(k) over records with
/// k in [k_lo, k_hi] and positive gap (mean of f(z_k^i) - f*).
double loglog_slope(const Trace& trace, std::size_t k_lo, std::size_t k_hi);

std::string format_double(double v);

}  // namespace qdgd
