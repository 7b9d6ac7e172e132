#pragma once

#include <vector>

namespace bitcurve::search {

// Finite representation of the continuous weight space: a deterministic
// low-discrepancy point set in [0,1]^d. The target-task function is
// represented by its values on these points, and every explored
// configuration is drawn from here.
struct CandidatePool {
  std::vector<std::vector<double>> points;

  int dimension() const {
    return points.empty() ? 0 : static_cast<int>(points.front().size());
  }
  std::size_t size() const { return points.size(); }
};

// Halton sequence over the first `size` indices (starting at 1).
CandidatePool halton_pool(int dimension, int size);

// 256 for d <= 2, 1024 for d <= 4, 2048 beyond.
int default_pool_size(int dimension);

}  // namespace bitcurve::search
