#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "qdgd/errors.hpp"
#include "qdgd/experiment.hpp"

using namespace qdgd;

namespace {

Instance small_instance(unsigned bits = 8, std::size_t horizon = 300) {
  return Instance(generate_random_connected_graph(6, 0.5, 3), generate_instance(6, 2, 5), bits,
                  1.0, horizon);
}

Instance single_agent(double w0, double b) {
  Eigen::MatrixXd w(1, 1);
  w << w0;
  return Instance(NetworkTopology(1, {}), RegressionObjective(w, Eigen::VectorXd::Constant(1, b)),
                  16, 1.0, 0);
}

}  // namespace

TEST_CASE("alpha and beta examples") {
  StepSchedule s4(4.0, 0.5, std::nullopt);
  CHECK(s4.alpha(0) == 1.0);
  CHECK(s4.alpha(3) == 0.25);
  CHECK(StepSchedule(2.0, 0.5).alpha(7) == 0.25);
  CHECK(s4.beta(0) == 8.0);
  CHECK(StepSchedule(4.0, 0.5).beta(0) == 1.0);
  CHECK(s4.beta(255) == doctest::Approx(0.125).epsilon(1e-15));
  CHECK(s4.beta_raw(0) == 8.0);
  for (std::size_t k = 1; k < 1000; ++k) {
    CHECK(s4.alpha(k) < s4.alpha(k - 1));
    CHECK(s4.beta(k) <= s4.beta(k - 1));
  }
  CHECK_THROWS_AS(StepSchedule(0.0, 0.5), Error);
  CHECK_THROWS_AS(StepSchedule(1.0, 0.0), Error);
  CHECK_THROWS_AS(StepSchedule(1.0, 1.5), Error);
  CHECK_THROWS_AS(StepSchedule(1.0, 0.5, 0.0), Error);
}

TEST_CASE("alpha_sum matches a long double oracle") {
  StepSchedule s(0.37, 0.5);
  for (std::size_t k : {0u, 1u, 2u, 10u, 1000u, 100000u}) {
    const double want = static_cast<double>(oracle::alpha_sum(0.37, k));
    CHECK(std::abs(alpha_sum(s, k) - want) <= 1e-13 * std::max(1.0, want));
  }
}

TEST_CASE("averaged output") {
  AgentState a;
  a.x = Eigen::VectorXd::Constant(1, 1.0);
  a.z = Eigen::VectorXd::Zero(1);
  a.accumulate(0);
  a.x(0) = 2.0;
  a.accumulate(1);
  CHECK(averaged_output(a)(0) == doctest::Approx(5.0 / 3.0).epsilon(1e-15));
  CHECK(a.weight_sum == 3);

  AgentState c;
  c.x = Eigen::VectorXd::Constant(2, -0.7);
  c.z = Eigen::VectorXd::Zero(2);
  for (std::size_t t = 0; t < 500; ++t) c.accumulate(t);
  CHECK((c.z - c.x).cwiseAbs().maxCoeff() <= 1e-12);

  // Incremental vs recomputation along a real trajectory.
  auto inst = small_instance();
  const auto problem = inst.problem();
  RoundState s = initial_state(6, 2);
  std::vector<Eigen::MatrixXd> history;
  for (std::size_t k = 0; k < 200; ++k) {
    history.push_back(s.iterates());
    s = run_round(s, problem, {Communication::Quantized, 4, {}});
  }
  Eigen::MatrixXd num = Eigen::MatrixXd::Zero(6, 2);
  double den = 0.0;
  for (std::size_t t = 0; t < history.size(); ++t) {
    num += static_cast<double>(t + 1) * history[t];
    den += static_cast<double>(t + 1);
  }
  CHECK((s.outputs() - num / den).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("single agent reduces to gradient descent") {
  auto inst = single_agent(0.8, 0.3);
  const auto problem = inst.problem();
  const double w = 0.8, b = 0.3;
  auto grad = [&](const std::vector<double>& x) { return std::vector<double>{2 * w * (w * x[0] - b)}; };

  // Exact communication over a long run.
  auto path = oracle::gradient_descent({0.0}, inst.objective().mu(), 1000, grad);
  RoundState s = initial_state(1, 1);
  for (std::size_t k = 0; k < 1000; ++k) {
    s = run_round(s, problem, {Communication::Exact, 1, {}});
    CHECK(std::abs(s.agents[0].x(0) - path[k + 1][0]) <= 1e-12);
  }

  // Quantized rounds from lattice points: q = x, so x' = x - alpha_k grad.
  std::mt19937_64 gen(6);
  for (std::size_t k = 1; k < 1000; ++k) {
    const double r = inst.quantizer().range(k);
    const auto m = static_cast<std::uint32_t>(gen() % 65536);
    RoundState at;
    at.k = k;
    at.agents.resize(1);
    at.agents[0].x = Eigen::VectorXd::Constant(1, endpoint_value(m, -r, r, 16));
    at.agents[0].z = Eigen::VectorXd::Zero(1);
    const auto next = run_round(at, problem, {Communication::Quantized, k, {}});
    const double x = at.agents[0].x(0);
    const double want = x - inst.steps().alpha(k) * grad({x})[0];
    CHECK(std::abs(next.agents[0].x(0) - want) <= 1e-12 * std::max(1.0, std::abs(want)));
  }
}

TEST_CASE("fixed point with zero gradients") {
  // Consistent data: w_i^T x* = b_i for every agent.
  Eigen::MatrixXd w(3, 2);
  w << 1, 0, 0, 1, 1, 1;
  const Eigen::Vector2d xs(0.5, -0.25);
  Instance inst(NetworkTopology(3, {{0, 1}, {1, 2}}), RegressionObjective(w, w * xs), 16, 1.0, 10);
  RoundState s = initial_state(3, 2);
  s.k = 4;
  for (auto& a : s.agents) a.x = xs;
  const auto next = run_round(s, inst.problem(), {Communication::Exact, 1, {}});
  for (const auto& a : next.agents) CHECK((a.x - xs).norm() <= 1e-15);
}

TEST_CASE("two agents reach the average in one exact round") {
  Eigen::MatrixXd w(2, 1);
  w << 1, 1;
  Instance inst(NetworkTopology(2, {{0, 1}}), RegressionObjective(w, Eigen::Vector2d(0, 0), 10.0), 16,
                1.0, 4);
  Problem p = inst.problem();
  p.gradient_override = [](std::size_t, const Eigen::VectorXd&) { return Eigen::VectorXd::Zero(1).eval(); };
  RoundState s = initial_state(2, 1);
  s.agents[0].x(0) = 3.0;
  s.agents[1].x(0) = -1.0;
  REQUIRE(inst.steps().beta(0) == 1.0);
  const auto next = run_round(s, p, {Communication::Exact, 1, {}});
  CHECK(next.agents[0].x(0) == 1.0);
  CHECK(next.agents[1].x(0) == 1.0);
}

TEST_CASE("range invariant, bounded error and convex-combination bound") {
  auto inst = small_instance(4);
  const auto problem = inst.problem();
  const double C = inst.objective().grad_bound();
  RoundState s = initial_state(6, 2);
  for (std::size_t k = 0; k < 300; ++k) {
    const auto next = run_round(s, problem, {Communication::Quantized, 8, {}});
    double xmax = 0.0, qmax = 0.0;
    for (std::size_t i = 0; i < 6; ++i) {
      const Eigen::VectorXd q = decode(next.messages[i], inst.quantizer());
      CHECK((s.agents[i].x - q).cwiseAbs().maxCoeff() <= inst.quantizer().delta(k));
      xmax = std::max(xmax, s.agents[i].x.cwiseAbs().maxCoeff());
      qmax = std::max(qmax, q.cwiseAbs().maxCoeff());
    }
    for (const auto& a : next.agents) {
      CHECK(a.x.cwiseAbs().maxCoeff() <= inst.quantizer().range(k + 1));
      CHECK(a.x.cwiseAbs().maxCoeff() <= std::max(xmax, qmax) + inst.steps().alpha(k) * C + 1e-12);
    }
    s = next;
  }
}

TEST_CASE("exact mixing without gradients preserves the average") {
  auto inst = small_instance();
  Problem p = inst.problem();
  p.gradient_override = [](std::size_t, const Eigen::VectorXd&) { return Eigen::VectorXd::Zero(2).eval(); };
  RoundState s = initial_state(6, 2);
  std::mt19937_64 gen(1);
  for (auto& a : s.agents) a.x = Eigen::Vector2d(to_unit(gen()), to_unit(gen()));
  const Eigen::RowVectorXd m0 = s.iterates().colwise().mean();
  for (int t = 0; t < 100; ++t) {
    s = run_round(s, p, {Communication::Exact, 1, {}});
    CHECK((s.iterates().colwise().mean() - m0).norm() <= 1e-12);
  }
}

TEST_CASE("processing order does not change the round") {
  auto inst = small_instance();
  const auto problem = inst.problem();
  RoundState s = initial_state(6, 2);
  for (int t = 0; t < 20; ++t) s = run_round(s, problem, {Communication::Quantized, 2, {}});
  std::vector<std::size_t> order{5, 2, 0, 4, 1, 3};
  const auto a = run_round(s, problem, {Communication::Quantized, 2, {}});
  const auto b = run_round(s, problem, {Communication::Quantized, 2, order});
  CHECK(a.iterates() == b.iterates());
  CHECK(a.outputs() == b.outputs());
  for (std::size_t i = 0; i < 6; ++i) CHECK(a.messages[i].payload == b.messages[i].payload);
  std::vector<std::size_t> partial{0, 1};
  CHECK_THROWS_AS(run_round(s, problem, {Communication::Quantized, 2, partial}), Error);
}

TEST_CASE("non-finite iterates are reported") {
  auto inst = small_instance();
  Problem p = inst.problem();
  p.gradient_override = [](std::size_t, const Eigen::VectorXd&) {
    return Eigen::VectorXd::Constant(2, std::numeric_limits<double>::quiet_NaN()).eval();
  };
  CHECK_THROWS_AS(run_round(initial_state(6, 2), p, {Communication::Exact, 1, {}}), NumericalError);
}

TEST_CASE("trajectory records and determinism") {
  auto inst = small_instance(8, 3000);
  TrajectoryOptions opts;
  opts.iterations = 0;
  auto zero = run_trajectory(inst, opts);
  REQUIRE(zero.trace.records.size() == 1);
  CHECK(zero.trace.records[0].k == 0);
  CHECK(zero.final_state.iterates().isZero(0.0));

  opts.iterations = 1;
  CHECK(run_trajectory(inst, opts).trace.records.size() == 2);

  opts.iterations = 2500;
  opts.seed = 77;
  auto a = run_trajectory(inst, opts);
  auto b = run_trajectory(inst, opts);
  std::stringstream sa, sb;
  write_trace_csv(sa, a.trace);
  write_trace_csv(sb, b.trace);
  CHECK(sa.str() == sb.str());
  CHECK(a.trace.range_violations == 0);
  CHECK(a.trace.quantization_error_violations == 0);
  CHECK(a.trace.max_quantization_error_ratio <= 1.0);
  CHECK(a.trace.records.back().k == 2500);
  for (std::size_t i = 1; i < a.trace.records.size(); ++i) {
    CHECK(a.trace.records[i].k > a.trace.records[i - 1].k);
    CHECK(a.trace.records[i].f_gap_last >= -1e-12);
    CHECK(a.trace.records[i].lyapunov >= a.trace.records[i].r_sq);
  }
}

TEST_CASE("record plan") {
  RecordPlan plan;
  auto pts = plan.points(1500);
  CHECK(pts.front() == 0);
  CHECK(pts[1000] == 1000);
  CHECK(pts.back() == 1500);
  CHECK(std::is_sorted(pts.begin(), pts.end()));
  // Eight geometric points in (1000, 1500], then K itself.
  CHECK(pts.size() == 1001 + 9);
  plan.extra = {1234, 99999};
  auto more = plan.points(1500);
  CHECK(std::find(more.begin(), more.end(), 1234) != more.end());
  CHECK(more.back() == 1500);
}
