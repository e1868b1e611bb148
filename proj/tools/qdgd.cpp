#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qdgd/config.hpp"
#include "qdgd/errors.hpp"
#include "qdgd/harness.hpp"

namespace {

void add_config_flags(CLI::App& cmd, std::optional<std::string>& path, qdgd::ConfigOverrides& o) {
  cmd.add_option("--config", path, "JSON config file");
  cmd.add_option("--n", o.n, "agents");
  cmd.add_option("--d", o.d, "dimension");
  cmd.add_option("--bits", o.bits, "bits per coordinate");
  cmd.add_option("--iterations", o.iterations, "rounds K");
  cmd.add_option("--seed", o.seed, "base seed");
  cmd.add_option("--edge-probability", o.edge_probability, "Erdos-Renyi edge probability");
  cmd.add_option("--edges-file", o.edges_file, "edge-list file instead of a sampled graph");
  cmd.add_option("--output-dir", o.output_dir, "directory for run artifacts");
  cmd.add_option("--eta-mode", o.eta_mode, "body | appendix");
  cmd.add_option("--beta-clamp", o.beta_clamp, "cap on beta_k");
  cmd.add_flag("--no-beta-clamp", o.no_beta_clamp, "use the raw beta_k sequence");
  cmd.add_flag("--baseline", o.baseline, "also run the unquantized twin");
  cmd.add_option("--replicas", o.replicas, "quantizer-randomness replicas");
  cmd.add_option("--jobs", o.jobs, "worker threads");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributed two-time-scale gradient method under random quantization"};
  app.require_subcommand(1);

  std::optional<std::string> run_config;
  qdgd::ConfigOverrides run_overrides;
  auto* run = app.add_subcommand("run", "run the experiment and write traces");
  add_config_flags(*run, run_config, run_overrides);

  qdgd::VerifyOptions verify_options;
  auto* verify = app.add_subcommand("verify", "Monte Carlo lemma checks and property suite");
  verify->add_option("--seed", verify_options.seed);
  verify->add_option("--n", verify_options.n);
  verify->add_option("--d", verify_options.d);
  verify->add_option("--bits", verify_options.bits);
  verify->add_option("--iterations", verify_options.iterations);
  verify->add_option("--replicas", verify_options.replicas);
  verify->add_option("--sigma2-offset", verify_options.sigma2_offset,
                     "added to sigma2 inside the inequalities");
  verify->add_flag("--unquantized", verify_options.unquantized, "exact communication");

  std::optional<std::string> bound_config;
  qdgd::ConfigOverrides bound_overrides;
  std::vector<std::string> bound_T;
  std::optional<std::string> bound_run_dir;
  auto* bound = app.add_subcommand("bound", "tabulate measured gap against the rate bound");
  add_config_flags(*bound, bound_config, bound_overrides);
  bound->add_option("--T", bound_T, "rounds to tabulate")->delimiter(',');
  bound->add_option("--run-dir", bound_run_dir, "read config.json and trace.csv from a run");

  auto* graph = app.add_subcommand("graph", "edge-list utilities");
  graph->require_subcommand(1);
  std::size_t emit_n = 40;
  double emit_p = 0.158;
  std::uint64_t emit_seed = 1;
  std::size_t emit_retries = 1000;
  std::optional<std::string> emit_out;
  auto* emit = graph->add_subcommand("emit", "sample a connected random graph");
  emit->add_option("--n", emit_n);
  emit->add_option("--edge-probability", emit_p);
  emit->add_option("--seed", emit_seed);
  emit->add_option("--retry-limit", emit_retries);
  emit->add_option("--out", emit_out, "file (default stdout)");
  std::string load_path;
  auto* load = graph->add_subcommand("load", "summarize an edge-list file");
  load->add_option("file", load_path)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : qdgd::kExitConfig;
  }

  try {
    if (*run) {
      return qdgd::cmd_run(qdgd::load_config(run_config, run_overrides), std::cout, std::cerr);
    }
    if (*verify) return qdgd::cmd_verify(verify_options, std::cout, std::cerr);
    if (*bound) {
      std::vector<std::size_t> T;
      for (const auto& t : bound_T) {
        if (t.empty()) continue;
        std::size_t used = 0;
        unsigned long long v = 0;
        try {
          v = std::stoull(t, &used);
        } catch (const std::exception&) {
          used = 0;
        }
        if (used != t.size() || t[0] == '-') throw qdgd::ConfigError("T", "not a round count: " + t);
        T.push_back(static_cast<std::size_t>(v));
      }
      qdgd::BoundOptions options{qdgd::load_config(bound_config, bound_overrides), T,
                                 bound_run_dir};
      return qdgd::cmd_bound(options, std::cout, std::cerr);
    }
    if (*emit) {
      return qdgd::cmd_graph_emit(emit_n, emit_p, emit_seed, emit_retries, emit_out, std::cout,
                                  std::cerr);
    }
    if (*load) return qdgd::cmd_graph_load(load_path, std::cout, std::cerr);
  } catch (const qdgd::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return qdgd::kExitConfig;
  } catch (const qdgd::AssumptionViolation& e) {
    std::cerr << "error: " << e.what() << '\n';
    return qdgd::kExitAssumption;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return qdgd::kExitCheckFailed;
  }
  return qdgd::kExitOk;
}
