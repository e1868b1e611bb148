#include "qdgd/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "qdgd/errors.hpp"

namespace qdgd {

using nlohmann::json;

namespace {

template <class T>
T field(const json& j, const std::string& name) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    throw ConfigError(name, "wrong type");
  }
}

std::size_t count_field(const json& j, const std::string& name) {
  if (!j.is_number_integer() || j.get<long long>() < 0) {
    throw ConfigError(name, "expected a non-negative integer");
  }
  return j.get<std::size_t>();
}

}  // namespace

EtaMode parse_eta_mode(const std::string& text) {
  if (text == "body") return EtaMode::Body;
  if (text == "appendix") return EtaMode::Appendix;
  throw ConfigError("eta_mode", "expected \"body\" or \"appendix\"");
}

std::string to_string(EtaMode mode) { return mode == EtaMode::Body ? "body" : "appendix"; }

void ExperimentConfig::validate() const {
  if (n < 1) throw ConfigError("n", "must be at least 1");
  if (d < 1) throw ConfigError("d", "must be at least 1");
  if (n < d) throw ConfigError("n", "must be at least d");
  if (bits < 1 || bits > 32) throw ConfigError("bits", "must lie in [1, 32]");
  if (iterations < 1) throw ConfigError("iterations", "must be at least 1");
  if (replicas < 1) throw ConfigError("replicas", "must be at least 1");
  if (jobs < 1) throw ConfigError("jobs", "must be at least 1");
  if (!graph.edges_file) {
    if (!(graph.edge_probability > 0.0 && graph.edge_probability <= 1.0)) {
      throw ConfigError("graph.edge_probability", "must lie in (0, 1]");
    }
    if (n < 2) throw ConfigError("n", "random graph needs at least 2 agents");
  }
  if (graph.retry_limit < 1) throw ConfigError("graph.retry_limit", "must be at least 1");
  if (!(data.feature_high > 0.0)) throw ConfigError("data.feature_high", "must be positive");
  if (!(data.target_high >= 0.0)) throw ConfigError("data.target_high", "must be non-negative");
  if (beta_clamp && !(*beta_clamp > 0.0)) throw ConfigError("beta_clamp", "must be positive");
  if (operating_radius && !(*operating_radius > 0.0)) {
    throw ConfigError("operating_radius", "must be positive");
  }
  if (output_dir.empty()) throw ConfigError("output_dir", "must not be empty");
}

void apply_json(ExperimentConfig& config, const std::string& text) {
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) return;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("<file>", e.what());
  }
  if (!j.is_object()) throw ConfigError("<file>", "top level must be an object");

  for (const auto& [key, value] : j.items()) {
    if (key == "n") {
      config.n = count_field(value, key);
    } else if (key == "d") {
      config.d = count_field(value, key);
    } else if (key == "bits") {
      config.bits = static_cast<unsigned>(count_field(value, key));
    } else if (key == "iterations") {
      config.iterations = count_field(value, key);
    } else if (key == "seed") {
      config.seed = static_cast<std::uint64_t>(count_field(value, key));
    } else if (key == "replicas") {
      config.replicas = count_field(value, key);
    } else if (key == "jobs") {
      config.jobs = count_field(value, key);
    } else if (key == "baseline") {
      config.baseline = field<bool>(value, key);
    } else if (key == "output_dir") {
      config.output_dir = field<std::string>(value, key);
    } else if (key == "eta_mode") {
      config.eta_mode = parse_eta_mode(field<std::string>(value, key));
    } else if (key == "beta_clamp") {
      if (value.is_string()) {
        if (value.get<std::string>() != "off") throw ConfigError(key, "expected a number or \"off\"");
        config.beta_clamp.reset();
      } else {
        config.beta_clamp = field<double>(value, key);
      }
    } else if (key == "operating_radius") {
      if (value.is_null()) {
        config.operating_radius.reset();
      } else {
        config.operating_radius = field<double>(value, key);
      }
    } else if (key == "graph") {
      if (!value.is_object()) throw ConfigError(key, "expected an object");
      for (const auto& [gk, gv] : value.items()) {
        const std::string name = "graph." + gk;
        if (gk == "edge_probability") {
          config.graph.edge_probability = field<double>(gv, name);
        } else if (gk == "retry_limit") {
          config.graph.retry_limit = count_field(gv, name);
        } else if (gk == "edges_file") {
          if (gv.is_null()) {
            config.graph.edges_file.reset();
          } else {
            config.graph.edges_file = field<std::string>(gv, name);
          }
        } else {
          throw ConfigError(name, "unknown field");
        }
      }
    } else if (key == "data") {
      if (!value.is_object()) throw ConfigError(key, "expected an object");
      for (const auto& [dk, dv] : value.items()) {
        const std::string name = "data." + dk;
        if (dk == "feature_high") {
          config.data.feature_high = field<double>(dv, name);
        } else if (dk == "target_high") {
          config.data.target_high = field<double>(dv, name);
        } else {
          throw ConfigError(name, "unknown field");
        }
      }
    } else {
      throw ConfigError(key, "unknown field");
    }
  }
}

void apply_overrides(ExperimentConfig& config, const ConfigOverrides& o) {
  if (o.n) config.n = *o.n;
  if (o.d) config.d = *o.d;
  if (o.bits) config.bits = *o.bits;
  if (o.iterations) config.iterations = *o.iterations;
  if (o.seed) config.seed = *o.seed;
  if (o.replicas) config.replicas = *o.replicas;
  if (o.jobs) config.jobs = *o.jobs;
  if (o.edge_probability) config.graph.edge_probability = *o.edge_probability;
  if (o.edges_file) config.graph.edges_file = *o.edges_file;
  if (o.output_dir) config.output_dir = *o.output_dir;
  if (o.eta_mode) config.eta_mode = parse_eta_mode(*o.eta_mode);
  if (o.beta_clamp) config.beta_clamp = *o.beta_clamp;
  if (o.no_beta_clamp) config.beta_clamp.reset();
  if (o.baseline) config.baseline = true;
}

ExperimentConfig load_config(const std::optional<std::string>& path,
                             const ConfigOverrides& overrides) {
  ExperimentConfig config;
  if (path) {
    std::ifstream in(*path);
    if (!in) throw ConfigError("config", "cannot open " + *path);
    std::stringstream buf;
    buf << in.rdbuf();
    apply_json(config, buf.str());
  }
  apply_overrides(config, overrides);
  config.validate();
  return config;
}

std::string to_json_text(const ExperimentConfig& c) {
  json j;
  j["n"] = c.n;
  j["d"] = c.d;
  j["bits"] = c.bits;
  j["iterations"] = c.iterations;
  j["seed"] = c.seed;
  j["graph"]["edge_probability"] = c.graph.edge_probability;
  j["graph"]["retry_limit"] = c.graph.retry_limit;
  j["graph"]["edges_file"] = c.graph.edges_file ? json(*c.graph.edges_file) : json(nullptr);
  j["data"]["feature_high"] = c.data.feature_high;
  j["data"]["target_high"] = c.data.target_high;
  j["beta_clamp"] = c.beta_clamp ? json(*c.beta_clamp) : json("off");
  j["eta_mode"] = to_string(c.eta_mode);
  j["baseline"] = c.baseline;
  j["replicas"] = c.replicas;
  j["output_dir"] = c.output_dir;
  j["jobs"] = c.jobs;
  j["operating_radius"] = c.operating_radius ? json(*c.operating_radius) : json(nullptr);
  return j.dump(2) + "\n";
}

}  // namespace qdgd
