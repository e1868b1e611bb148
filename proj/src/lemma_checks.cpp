#include "qdgd/lemma_checks.hpp"

#include <algorithm>
#include <cmath>

#include "qdgd/diagnostics.hpp"
#include "qdgd/errors.hpp"
#include "qdgd/random.hpp"

namespace qdgd {

namespace {

// Welford accumulator; identical samples give exactly zero spread.
struct Moments {
  double m = 0.0;
  double s = 0.0;
  std::size_t count = 0;

  void add(double v) {
    ++count;
    const double d = v - m;
    m += d / static_cast<double>(count);
    s += d * (v - m);
  }
  double mean() const { return m; }
  double se() const {
    if (count < 2) return 0.0;
    const double var = std::max(0.0, s / static_cast<double>(count - 1));
    return std::sqrt(var / static_cast<double>(count));
  }
};

void record(LemmaReport& report, std::size_t k, const Moments& m, double rhs) {
  LemmaRound r{k, m.mean(), m.se(), rhs};
  if (r.mean > rhs + 3.0 * r.se + 1e-12) ++report.violations;
  report.max_excess = std::max(report.max_excess, r.mean - rhs);
  report.rounds.push_back(r);
}

}  // namespace

LemmaReports check_lemmas(const Problem& problem, const LemmaCheckConfig& config) {
  if (config.replicas < 100) throw Error("insufficient replicas");

  LemmaReports out;
  out.consensus.name = "lemma1";
  out.optimality.name = "lemma2";

  const auto& obj = problem.objective;
  const std::size_t n = obj.agents();
  const std::size_t d = obj.dims();
  const double nd = static_cast<double>(n);
  const double dd = static_cast<double>(d);

  const double gap = 1.0 - (problem.mixing.sigma2() + config.sigma2_offset);
  if (!(gap > 0.0)) {
    out.consensus.error = "claimed spectral gap non-positive";
    out.optimality.error = out.consensus.error;
    return out;
  }

  const double mu_f = obj.mu() / nd;
  const double l_f = std::max(obj.lipschitz() / nd, obj.max_agent_lipschitz());
  const double coupling = l_f + 8.0 * l_f * l_f / mu_f;
  const double f_star = obj.f_star() / nd;
  const double beta0 = problem.steps.beta(0);

  Problem dynamics = problem;
  if (config.gradient_free) {
    dynamics.gradient_override = [d](std::size_t, const Eigen::VectorXd&) {
      return Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d)).eval();
    };
  }

  RoundState state = initial_state(n, d);
  state.k = config.start_round;
  if (config.initial_iterates) {
    const auto& X0 = *config.initial_iterates;
    if (static_cast<std::size_t>(X0.rows()) != n || static_cast<std::size_t>(X0.cols()) != d) {
      throw Error("initial iterates must be n x d");
    }
    for (std::size_t i = 0; i < n; ++i) {
      state.agents[i].x = X0.row(static_cast<Eigen::Index>(i)).transpose();
    }
  }

  std::vector<std::uint64_t> seeds(config.replicas);
  for (std::size_t m = 0; m < config.replicas; ++m) seeds[m] = derive_seed(config.seed, m + 1);

  try {
    for (std::size_t step = 0; step < config.iterations; ++step) {
      const std::size_t k = state.k;
      const double alpha = problem.steps.alpha(k);
      const double beta = problem.steps.beta(k);
      const double delta =
          config.mode == Communication::Quantized ? problem.quantizer.delta(k) : 0.0;
      const double noise = dd * delta * delta;

      const Eigen::MatrixXd X = state.iterates();
      const double y_sq = consensus_error(X);
      const Eigen::VectorXd xbar = X.colwise().mean().transpose();
      const double r_sq = (xbar - obj.optimum()).squaredNorm();

      double rhs1 = (1.0 - gap * beta) * y_sq + (1.0 + gap * beta0) * beta * beta * nd * nd * noise;
      double rhs2 = r_sq + beta * beta * noise;
      if (!config.gradient_free) {
        Eigen::MatrixXd G(n, d);
        double f_max = -1e300;
        for (std::size_t i = 0; i < n; ++i) {
          G.row(static_cast<Eigen::Index>(i)) = obj.gradient(i, state.agents[i].x).transpose();
          f_max = std::max(f_max, obj.global_value(state.agents[i].x) / nd);
        }
        const double wg = consensus_error(G);
        const double gbar = G.colwise().mean().squaredNorm();
        rhs1 += (gap * beta0 + 1.0) / gap * std::max(l_f * l_f, wg) * alpha * alpha / beta;
        rhs2 += -mu_f * alpha / 2.0 * r_sq + alpha * alpha * std::max(l_f * l_f, gbar) +
                2.0 * alpha * (f_star - f_max) + alpha * coupling * y_sq;
      }

      Moments m1, m2;
      RoundState keep;
      for (std::size_t m = 0; m < config.replicas; ++m) {
        RoundState next = run_round(state, dynamics, RoundOptions{config.mode, seeds[m], {}});
        const Eigen::MatrixXd Xn = next.iterates();
        m1.add(consensus_error(Xn));
        m2.add((Xn.colwise().mean().transpose() - obj.optimum()).squaredNorm());
        if (m == 0) keep = std::move(next);
      }
      record(out.consensus, k, m1, rhs1);
      record(out.optimality, k, m2, rhs2);
      state = std::move(keep);
    }
  } catch (const Error& e) {
    out.consensus.error = e.what();
    out.optimality.error = e.what();
  }
  return out;
}

LemmaReport check_lemma1(const Problem& problem, const LemmaCheckConfig& config) {
  return check_lemmas(problem, config).consensus;
}

LemmaReport check_lemma2(const Problem& problem, const LemmaCheckConfig& config) {
  return check_lemmas(problem, config).optimality;
}

}  // namespace qdgd
