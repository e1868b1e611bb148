#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qdgd/algorithm.hpp"

namespace qdgd {

struct LemmaCheckConfig {
  std::size_t iterations = 200;
  std::size_t replicas = 500;
  std::uint64_t seed = 1;
  Communication mode = Communication::Quantized;
  /// Zero gradients; the alpha terms drop out of both right-hand sides.
  bool gradient_free = false;
  /// Added to sigma2 inside the inequalities only (the dynamics keep the
  /// true weights). Test hook for sabotage runs.
  double sigma2_offset = 0.0;
  /// Starting iterates (n x d) and round; default x_0 = 0 at round 0.
  std::optional<Eigen::MatrixXd> initial_iterates;
  std::size_t start_round = 0;
};

struct LemmaRound {
  std::size_t k = 0;
  double mean = 0.0;  // Monte Carlo mean of the left-hand side at k+1
  double se = 0.0;    // its standard error
  double rhs = 0.0;
};

struct LemmaReport {
  std::string name;
  std::vector<LemmaRound> rounds;
  std::size_t violations = 0;
  /// max over rounds of mean - rhs.
  double max_excess = -1e300;
  std::optional<std::string> error;

  bool passed() const { return !error && violations == 0; }
};

struct LemmaReports {
  LemmaReport consensus;    // ||Y_{k+1}||_F^2 recursion
  LemmaReport optimality;   // ||xbar_{k+1} - x*||^2 recursion
};

/// Runs `replicas` one-round branches from a shared state at every k and
/// compares the branch means with the right-hand sides evaluated at that
/// state. The shared trajectory continues along the first branch. A round is
/// a violation when mean > rhs + 3 se + 1e-12.
///
/// The inequalities are written for F = f/n, whose constants are
///   mu_F = mu/n,  L_F = max(L/n, max_i 2||w_i||^2).
/// Consensus:
///   (1 - g beta_k) ||Y_k||^2 + (1 + g beta_0) beta_k^2 n^2 d Delta_k^2
///     + ((g beta_0 + 1)/g) max(L_F^2, ||W G_k||^2) alpha_k^2 / beta_k,   g = 1 - sigma2
/// Optimality:
///   (1 - mu_F alpha_k/2) r_k + alpha_k^2 max(L_F^2, ||gbar_k||^2) + beta_k^2 d Delta_k^2
///     + 2 alpha_k (F* - max_l F(x_k^l)) + alpha_k (L_F + 8 L_F^2/mu_F) ||Y_k||^2
/// Throws qdgd::Error("insufficient replicas") when replicas < 100.
LemmaReports check_lemmas(const Problem& problem, const LemmaCheckConfig& config);

LemmaReport check_lemma1(const Problem& problem, const LemmaCheckConfig& config);
LemmaReport check_lemma2(const Problem& problem, const LemmaCheckConfig& config);

}  // namespace qdgd
