#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bitcurve/curve.hpp"
#include "bitcurve/gp.hpp"
#include "bitcurve/objective.hpp"

namespace bitcurve::cli {

// One structured config file drives a whole run; see configs/ for examples.
struct RunConfig {
  curve::Basis basis = curve::Basis::kBezier;
  int degree = 1;  // Bezier degree (degree+1 weights) or Chebyshev order (degree weights)
  curve::LayerGrid grid = curve::LayerGrid::kEndpoints;
  std::string network_spec;

  std::vector<int> epochs;
  std::vector<double> costs;     // empty = max(epochs, 1)
  std::vector<double> noise_sd;  // per task

  double budget_total = 0.0;
  std::optional<int> max_evaluations;
  int pool_size = 0;  // 0 = default for the dimension

  std::string objective_kind = "synthetic";
  objective::SyntheticParams synthetic;
  objective::SurrogateParams surrogate;
  std::vector<std::string> surrogate_layers;
  std::string snapshot_dir;
  std::string external_command;
  double external_timeout = 60.0;

  double k = 100.0;
  std::size_t top_k = 10;
  double pessimism_beta = 0.0;
  int refit_every = 5;
  int fit_restarts = 5;
  int fit_iterations = 400;

  std::optional<std::uint64_t> seed;
  std::string output_dir = "runs/out";

  int dimension() const {
    return basis == curve::Basis::kBezier ? degree + 1 : degree;
  }
  gp::TaskSet task_set() const;
};

// Throws ConfigError with a key path on any problem; checks that referenced
// files exist.
RunConfig load_run_config(const std::string& path);

}  // namespace bitcurve::cli
