#pragma once

#include <string>

#include "bitcurve/curve.hpp"
#include "bitcurve/gp.hpp"

namespace bitcurve::io {

// Everything needed to resume ranking/prediction after a search: the fitted
// model (hyperparameters, normalization, training data) and the run's
// search-space description.
struct Checkpoint {
  gp::MultiTaskGp model;
  gp::TaskSet tasks;
  curve::Basis basis = curve::Basis::kBezier;
  curve::LayerGrid grid = curve::LayerGrid::kEndpoints;
  int pool_size = 0;
};

void save_checkpoint(const std::string& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace bitcurve::io
