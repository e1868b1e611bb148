#include "qdgd/harness.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "qdgd/errors.hpp"
#include "qdgd/experiment.hpp"
#include "qdgd/lemma_checks.hpp"
#include "qdgd/random.hpp"

namespace qdgd {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

void write_fig2(const fs::path& path, const Trace& trace) {
  auto out = open_out(path);
  out << "# k mean_i f(z_k^i) - f*\n";
  for (const auto& r : trace.records) out << r.k << ' ' << format_double(r.f_gap_avg_mean()) << '\n';
}

void write_trace(const fs::path& path, const Trace& trace) {
  auto out = open_out(path);
  write_trace_csv(out, trace);
}

std::vector<TraceRow> to_rows(const Trace& trace) {
  std::stringstream buf;
  write_trace_csv(buf, trace);
  return read_trace_csv(buf);
}

// Column positions inside TraceRow::values.
constexpr std::size_t kColGapAvgMax = 2;
constexpr std::size_t kColLyapunov = 5;

}  // namespace

int cmd_run(const ExperimentConfig& config, std::ostream& out, std::ostream& err) {
  const Instance instance = Instance::from_config(config);
  const fs::path dir(config.output_dir);
  fs::create_directories(dir);
  {
    auto f = open_out(dir / "config.json");
    f << to_json_text(config);
  }
  {
    auto f = open_out(dir / "graph.edges");
    write_edge_list(f, instance.topology());
  }
  {
    auto f = open_out(dir / "instance.csv");
    write_instance_csv(f, instance.objective());
  }

  const ExperimentResult result = run_experiment(instance, config);
  for (std::size_t r = 0; r < result.replicas.size(); ++r) {
    const auto name = config.replicas == 1 ? std::string("trace.csv")
                                           : "trace_r" + std::to_string(r) + ".csv";
    write_trace(dir / name, result.replicas[r].trace);
  }
  write_fig2(dir / "fig2.dat", result.replicas.front().trace);
  if (result.baseline) {
    write_trace(dir / "baseline_trace.csv", result.baseline->trace);
    write_fig2(dir / "fig2_baseline.dat", result.baseline->trace);
  }

  std::exception_ptr failure;
  for (const auto& r : result.replicas) {
    if (r.failure && !failure) failure = r.failure;
  }
  if (result.baseline && result.baseline->failure && !failure) failure = result.baseline->failure;
  if (failure) {
    try {
      std::rethrow_exception(failure);
    } catch (const AssumptionViolation& e) {
      err << "error: " << e.what() << '\n';
      return kExitAssumption;
    } catch (const Error& e) {
      err << "error: " << e.what() << '\n';
      return kExitCheckFailed;
    }
  }

  const auto& last = result.replicas.front().trace.records.back();
  out << "final k=" << last.k << " f_gap_avg_mean=" << format_double(last.f_gap_avg_mean())
      << " f_gap_last=" << format_double(last.f_gap_last);
  if (result.baseline) {
    const double base = result.baseline->trace.records.back().f_gap_avg_mean();
    const double fq = last.f_gap_avg_mean() + instance.objective().f_star();
    const double fb = base + instance.objective().f_star();
    out << " baseline_f_gap_avg_mean=" << format_double(base)
        << " relative_objective_diff=" << format_double(std::abs(fq - fb) / std::abs(fb));
  }
  out << '\n';
  return kExitOk;
}

namespace {

json lemma_json(const LemmaReport& r) {
  json j;
  j["name"] = r.name;
  j["passed"] = r.passed();
  j["rounds"] = r.rounds.size();
  j["violations"] = r.violations;
  j["max_excess"] = r.rounds.empty() ? json(nullptr) : json(r.max_excess);
  j["error"] = r.error ? json(*r.error) : json(nullptr);
  return j;
}

json property(const std::string& name, bool passed, json detail = json::object()) {
  detail["name"] = name;
  detail["passed"] = passed;
  return detail;
}

NetworkTopology path_graph(std::size_t n) {
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (std::size_t i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
  return NetworkTopology(n, std::move(edges));
}

}  // namespace

Instance verify_instance(const VerifyOptions& options) {
  if (options.n < options.d) throw ConfigError("n", "must be at least d");
  if (options.n < 2) throw ConfigError("n", "must be at least 2");
  if (options.bits < 1 || options.bits > 32) throw ConfigError("bits", "must lie in [1, 32]");
  return Instance(path_graph(options.n),
                  generate_instance(options.n, options.d, derive_seed(options.seed, kDataSalt)),
                  options.bits, 1.0, options.iterations + 1);
}

int cmd_verify(const VerifyOptions& options, std::ostream& out, std::ostream& err) {
  const Instance instance = verify_instance(options);
  const auto mode = options.unquantized ? Communication::Exact : Communication::Quantized;
  const auto& A = instance.mixing();
  const auto n = static_cast<Eigen::Index>(options.n);
  const auto d = static_cast<Eigen::Index>(options.d);
  std::mt19937_64 gen(derive_seed(options.seed, 0x766572));

  json checks = json::array();
  bool assumption_failed = false;

  LemmaCheckConfig lc;
  lc.iterations = options.iterations;
  lc.replicas = options.replicas;
  lc.seed = options.seed;
  lc.mode = mode;
  lc.sigma2_offset = options.sigma2_offset;
  const LemmaReports lemmas = check_lemmas(instance.problem(), lc);
  checks.push_back(lemma_json(lemmas.consensus));
  checks.push_back(lemma_json(lemmas.optimality));

  {
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
    const double residual = (A.entries() * ones - ones).norm();
    double worst = -1e300;
    for (int t = 0; t < 100; ++t) {
      Eigen::VectorXd v(n);
      for (auto& x : v) x = to_unit(gen()) - 0.5;
      v.array() -= v.mean();
      worst = std::max(worst, (A.entries() * v).norm() - A.sigma2() * v.norm());
    }
    checks.push_back(property("mixing_matrix", residual <= kEigenTolerance && worst <= kEigenTolerance,
                              {{"ones_residual", residual}, {"max_contraction_excess", worst}}));
  }

  {
    bool ok = true;
    const double lower = -1.0, upper = 1.0;
    const double delta = (upper - lower) / static_cast<double>((std::uint64_t{1} << options.bits) - 1);
    const int draws = 100000;
    for (int t = 0; t < 5 && ok; ++t) {
      const double x = lower + (upper - lower) * to_unit(gen());
      double sum = 0.0, sum_sq = 0.0, sum_4 = 0.0;
      for (int s = 0; s < draws; ++s) {
        const double e = quantize_scalar(x, lower, upper, options.bits, gen).value - x;
        if (std::abs(e) > delta) ok = false;
        sum += e;
        sum_sq += e * e;
        sum_4 += e * e * e * e;
      }
      const double mean = sum / draws;
      const double second = sum_sq / draws;
      const double var = std::max(0.0, second - mean * mean);
      const double se = std::sqrt(var / draws);
      if (std::abs(mean) > 3.0 * se + 1e-15) ok = false;
      const double se_second = std::sqrt(std::max(0.0, sum_4 / draws - second * second) / draws);
      if (second > delta * delta / 4.0 + 3.0 * se_second) ok = false;
    }
    checks.push_back(property("quantizer_contract", ok));
  }

  {
    TrajectoryOptions to;
    to.iterations = options.iterations;
    to.mode = mode;
    to.seed = options.seed;
    const auto run = run_trajectory(instance, to);
    if (run.failure) {
      try {
        std::rethrow_exception(run.failure);
      } catch (const AssumptionViolation&) {
        assumption_failed = true;
      } catch (const Error&) {
      }
    }
    const bool ok = !run.failure && run.trace.range_violations == 0 &&
                    run.trace.quantization_error_violations == 0;
    json detail = {{"range_violations", run.trace.range_violations},
                   {"quantization_error_violations", run.trace.quantization_error_violations},
                   {"max_quantization_error_ratio", run.trace.max_quantization_error_ratio}};
    if (run.trace.error) detail["error"] = *run.trace.error;
    checks.push_back(property("range_and_bounded_support", ok, detail));
  }

  auto guarded = [&](const std::string& name, auto&& body) {
    try {
      checks.push_back(body());
    } catch (const AssumptionViolation& e) {
      assumption_failed = true;
      checks.push_back(property(name, false, {{"error", e.what()}}));
    }
  };

  guarded("lockstep_order", [&] {
    const auto problem = instance.problem();
    RoundState s = initial_state(options.n, options.d);
    for (int t = 0; t < 5; ++t) s = run_round(s, problem, {mode, options.seed, {}});
    std::vector<std::size_t> reversed(options.n);
    for (std::size_t i = 0; i < options.n; ++i) reversed[i] = options.n - 1 - i;
    const auto a = run_round(s, problem, {mode, options.seed, {}});
    const auto b = run_round(s, problem, {mode, options.seed, reversed});
    return property("lockstep_order", a.iterates() == b.iterates());
  });

  guarded("mean_preservation", [&] {
    Problem still = instance.problem();
    still.gradient_override = [d](std::size_t, const Eigen::VectorXd&) {
      return Eigen::VectorXd::Zero(d).eval();
    };
    RoundState s = initial_state(options.n, options.d);
    for (auto& a : s.agents) {
      for (auto& x : a.x) x = to_unit(gen()) - 0.5;
    }
    const Eigen::RowVectorXd mean0 = s.iterates().colwise().mean();
    double drift = 0.0;
    for (int t = 0; t < 50; ++t) {
      s = run_round(s, still, {Communication::Exact, options.seed, {}});
      drift = std::max(drift, (s.iterates().colwise().mean() - mean0).norm());
    }
    return property("mean_preservation", drift <= 1e-12, {{"max_drift", drift}});
  });

  bool passed = true;
  for (const auto& c : checks) passed = passed && c["passed"].get<bool>();

  json report;
  report["instance"] = {{"n", options.n},
                        {"d", options.d},
                        {"bits", options.bits},
                        {"sigma2", A.sigma2()},
                        {"sigma2_offset", options.sigma2_offset},
                        {"mu", instance.objective().mu()},
                        {"L", instance.objective().lipschitz()},
                        {"C", instance.objective().grad_bound()},
                        {"mode", options.unquantized ? "exact" : "quantized"}};
  report["checks"] = checks;
  report["passed"] = passed;
  out << report.dump(2) << '\n';
  if (passed) return kExitOk;
  err << "verification failed\n";
  return assumption_failed ? kExitAssumption : kExitCheckFailed;
}

std::vector<BoundRow> tabulate_bound(RateBoundInputs inputs, const std::vector<TraceRow>& rows,
                                     const std::vector<std::size_t>& T) {
  std::map<std::size_t, const TraceRow*> by_k;
  for (const auto& r : rows) by_k[r.k] = &r;
  const auto first = by_k.find(1);
  if (first == by_k.end()) throw Error("trace has no k = 1 record for E[V_1]");
  inputs.v1 = first->second->values.at(kColLyapunov);

  std::vector<BoundRow> out;
  for (auto t : T) {
    if (t < 1) throw ConfigError("T", "must be at least 1");
    BoundRow row;
    row.T = t;
    row.bound = rate_bound(inputs, t);
    const auto it = by_k.find(t);
    if (it != by_k.end()) {
      row.measured = it->second->values.at(kColGapAvgMax);
      row.ratio = *row.measured / row.bound;
    }
    out.push_back(row);
  }
  return out;
}

void write_bound_csv(std::ostream& out, const std::vector<BoundRow>& rows) {
  out << "T,measured_gap,theoretical_bound,ratio\n";
  for (const auto& r : rows) {
    out << r.T << ',' << (r.measured ? format_double(*r.measured) : "") << ','
        << format_double(r.bound) << ',' << (r.ratio ? format_double(*r.ratio) : "") << '\n';
  }
}

int cmd_bound(const BoundOptions& options, std::ostream& out, std::ostream& err) {
  if (options.T.empty()) {
    write_bound_csv(out, {});
    return kExitOk;
  }
  for (auto t : options.T) {
    if (t < 1) throw ConfigError("T", "must be at least 1");
  }

  std::vector<TraceRow> rows;
  std::optional<Instance> instance;
  if (options.run_dir) {
    const fs::path dir(*options.run_dir);
    auto config = load_config((dir / "config.json").string(), {});
    instance.emplace(Instance::from_config(config));
    std::ifstream in(dir / (config.replicas == 1 ? "trace.csv" : "trace_r0.csv"));
    if (!in) throw Error("cannot read trace in " + dir.string());
    rows = read_trace_csv(in);
  } else {
    auto config = options.config;
    config.iterations = std::max<std::size_t>(1, *std::max_element(options.T.begin(), options.T.end()));
    config.replicas = 1;
    config.baseline = false;
    instance.emplace(Instance::from_config(config));
    RecordPlan plan;
    plan.extra = options.T;
    const auto result = run_experiment(*instance, config, plan);
    const auto& run = result.replicas.front();
    if (run.failure) {
      err << "error: " << *run.trace.error << '\n';
      return kExitAssumption;
    }
    rows = to_rows(run.trace);
  }

  const auto table = tabulate_bound(instance->bound_inputs(), rows, options.T);
  write_bound_csv(out, table);
  for (const auto& r : table) {
    if (r.ratio && *r.ratio > 1.0) {
      err << "measured gap exceeds the bound at T=" << r.T << '\n';
      return kExitCheckFailed;
    }
  }
  return kExitOk;
}

int cmd_graph_emit(std::size_t n, double edge_probability, std::uint64_t seed,
                   std::size_t retry_limit, const std::optional<std::string>& path,
                   std::ostream& out, std::ostream&) {
  const auto topology = generate_random_connected_graph(n, edge_probability, seed, retry_limit);
  if (path) {
    auto f = open_out(*path);
    write_edge_list(f, topology);
  } else {
    write_edge_list(out, topology);
  }
  return kExitOk;
}

int cmd_graph_load(const std::string& path, std::ostream& out, std::ostream&) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path);
  const auto topology = read_edge_list(in);
  const auto mixing = lazy_metropolis(topology);
  out << "n=" << topology.size() << " m=" << topology.edges().size()
      << " sigma2=" << format_double(mixing.sigma2())
      << " spectral_gap=" << format_double(spectral_gap(mixing)) << '\n';
  return kExitOk;
}

}  // namespace qdgd
