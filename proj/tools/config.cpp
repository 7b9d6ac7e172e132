#include "config.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>

#include "bitcurve/errors.hpp"
#include "json.hpp"

namespace bitcurve::cli {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& message) {
  throw ConfigError(path + ": " + message);
}

void require_file(const std::string& config_path, const std::string& key,
                  const std::string& file) {
  if (!std::filesystem::exists(file)) {
    fail(config_path, key + " references a missing file: " + file);
  }
}

template <typename T>
T get_or(const json& obj, const char* key, T fallback) {
  if (!obj.contains(key)) return fallback;
  return obj.at(key).get<T>();
}

}  // namespace

gp::TaskSet RunConfig::task_set() const {
  gp::TaskSet tasks;
  tasks.epochs = epochs;
  if (costs.empty()) {
    for (int e : epochs) tasks.costs.push_back(std::max(e, 1));
  } else {
    tasks.costs = costs;
  }
  for (double sd : noise_sd) tasks.noise_var.push_back(sd * sd);
  tasks.validate();
  return tasks;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config: " + path);
  json obj;
  try {
    in >> obj;
  } catch (const json::exception& e) {
    // nlohmann reports the byte offset of the problem.
    throw ConfigError(path + ": " + e.what());
  }

  RunConfig config;
  try {
    if (obj.contains("schema") && obj["schema"] != "bitcurve/config") {
      fail(path, "schema is not bitcurve/config");
    }
    if (get_or<int>(obj, "version", 1) > 1) fail(path, "unsupported config version");

    config.basis = curve::basis_from_name(get_or<std::string>(obj, "basis", "bezier"));
    config.degree = get_or<int>(obj, "degree", 1);
    if (config.degree < (config.basis == curve::Basis::kBezier ? 0 : 1) ||
        config.degree > 9) {
      fail(path, "degree out of range");
    }
    config.grid =
        curve::layer_grid_from_name(get_or<std::string>(obj, "layer_grid", "endpoints"));

    if (!obj.contains("network_spec")) fail(path, "network_spec is required");
    config.network_spec = obj["network_spec"].get<std::string>();
    require_file(path, "network_spec", config.network_spec);

    if (!obj.contains("tasks")) fail(path, "tasks is required");
    const json& tasks = obj["tasks"];
    config.epochs = tasks.at("epochs").get<std::vector<int>>();
    config.costs = get_or<std::vector<double>>(tasks, "costs", {});
    config.noise_sd = get_or<std::vector<double>>(tasks, "noise_sd",
                                                  std::vector<double>(config.epochs.size(), 0.0));
    if (config.noise_sd.size() != config.epochs.size()) {
      fail(path, "tasks.noise_sd length does not match tasks.epochs");
    }
    if (!config.costs.empty() && config.costs.size() != config.epochs.size()) {
      fail(path, "tasks.costs length does not match tasks.epochs");
    }

    if (obj.contains("budget")) {
      config.budget_total = obj["budget"].value("total", 0.0);
      if (obj["budget"].contains("max_evaluations")) {
        config.max_evaluations = obj["budget"]["max_evaluations"].get<int>();
      }
    }
    config.pool_size = get_or<int>(obj, "pool_size", 0);

    const json objective = get_or<json>(obj, "objective", json::object());
    config.objective_kind = get_or<std::string>(objective, "kind", "synthetic");
    const int m = static_cast<int>(config.epochs.size());
    if (config.objective_kind == "synthetic") {
      const json params = get_or<json>(objective, "synthetic", json::object());
      config.synthetic.peak_accuracy = get_or<double>(params, "peak_accuracy", 0.9);
      config.synthetic.curvature = get_or<double>(params, "curvature", 0.5);
      config.synthetic.optimum = get_or<std::vector<double>>(params, "optimum", {});
      config.synthetic.fidelity_offset = get_or<double>(params, "fidelity_offset", 0.02);
      config.synthetic.shape_coeff = get_or<std::vector<double>>(params, "shape_coeff", {});
      config.synthetic.noise_sd =
          get_or<std::vector<double>>(params, "noise_sd", config.noise_sd);
      config.synthetic.task_count = m;
    } else if (config.objective_kind == "surrogate") {
      const json params = get_or<json>(objective, "surrogate", json::object());
      config.surrogate.floor_accuracy = get_or<double>(params, "floor_accuracy", 0.10);
      config.surrogate.ceil_accuracy = get_or<double>(params, "ceil_accuracy", 0.95);
      config.surrogate.snr_mid = get_or<double>(params, "snr_mid", 14.0);
      config.surrogate.snr_scale = get_or<double>(params, "snr_scale", 6.0);
      config.surrogate.snr_cap = get_or<double>(params, "snr_cap", 60.0);
      config.surrogate.fidelity_offset = get_or<double>(params, "fidelity_offset", 0.02);
      config.surrogate.noise_sd =
          get_or<std::vector<double>>(params, "noise_sd", config.noise_sd);
      config.surrogate.task_count = m;
      config.surrogate_layers = get_or<std::vector<std::string>>(params, "layers", {});
      config.snapshot_dir = get_or<std::string>(params, "snapshot_dir", "");
      if (config.surrogate_layers.empty() && config.snapshot_dir.empty()) {
        fail(path, "surrogate objective needs 'layers' or 'snapshot_dir'");
      }
      for (const auto& file : config.surrogate_layers) {
        require_file(path, "objective.surrogate.layers", file);
      }
      if (!config.snapshot_dir.empty() && !std::filesystem::is_directory(config.snapshot_dir)) {
        fail(path, "objective.surrogate.snapshot_dir is not a directory: " +
                       config.snapshot_dir);
      }
    } else if (config.objective_kind == "external") {
      const json params = get_or<json>(objective, "external", json::object());
      if (!params.contains("command")) fail(path, "objective.external.command is required");
      config.external_command = params["command"].get<std::string>();
      config.external_timeout = get_or<double>(params, "timeout_seconds", 60.0);
    } else {
      fail(path, "unknown objective kind: " + config.objective_kind);
    }

    config.k = get_or<double>(obj, "k", 100.0);
    if (!(config.k > 0.0)) fail(path, "k must be positive");
    config.top_k = static_cast<std::size_t>(get_or<int>(obj, "top_k", 10));
    config.pessimism_beta = get_or<double>(obj, "pessimism_beta", 0.0);

    const json search = get_or<json>(obj, "search", json::object());
    config.refit_every = get_or<int>(search, "refit_every", 5);
    config.fit_restarts = get_or<int>(search, "restarts", 5);
    config.fit_iterations = get_or<int>(search, "max_iterations", 400);

    if (obj.contains("seed")) config.seed = obj["seed"].get<std::uint64_t>();
    config.output_dir = get_or<std::string>(obj, "output_dir", "runs/out");
  } catch (const json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return config;
}

}  // namespace bitcurve::cli
