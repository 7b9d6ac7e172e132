#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "bitcurve/gp.hpp"
#include "bitcurve/pool.hpp"

namespace bitcurve::search {

// Upper bound on a single information gain: 0.5 * ln(1e12) nats, reached
// when conditioning on the pool values removes (numerically) all variance.
constexpr double kGainCap = 13.815510557964274;

struct ActionChoice {
  int pool_index = -1;
  int task = 1;
  std::vector<double> x;
  double info_gain = 0.0;
  double cost = 0.0;
  double score = 0.0;  // info_gain / cost
  bool capped = false;
};

// Scores candidate actions (x, l) by the information their observation
// carries about the target task, represented by its values on the pool:
//   I(y_(x,l); f_m | history) = 1/2 ln( V(y|history) / V(y|history, f_m(pool)) )
// Precomputes the pool conditioning once, then each action costs one
// triangular solve.
class AcquisitionScorer {
 public:
  AcquisitionScorer(const gp::MultiTaskGp& model, const std::vector<gp::Observation>& history,
                    const CandidatePool& pool, const gp::TaskSet& tasks);

  double info_gain(int pool_index, int task) const;      // clipped to [0, kGainCap]
  double raw_info_gain(int pool_index, int task) const;  // before the floor/clip
  bool capped(int pool_index, int task) const;

  int task_count() const { return tasks_; }
  std::size_t pool_size() const { return pool_size_; }
  // Number of actions whose conditional variance hit the degeneracy floor.
  int degenerate_count() const { return degenerate_; }

 private:
  struct Entry {
    double marginal = 0.0;     // V(y | history)
    double conditional = 0.0;  // V(y | history, f_m(pool)), after flooring
    bool capped = false;
  };
  const Entry& entry(int pool_index, int task) const;

  int tasks_ = 1;
  std::size_t pool_size_ = 0;
  int degenerate_ = 0;
  std::vector<Entry> entries_;  // task-major: [(l-1) * P + i]
};

// One-off gain for an arbitrary point (not necessarily a pool member).
double info_gain(const gp::MultiTaskGp& model, const std::vector<gp::Observation>& history,
                 const std::vector<double>& x, int task, const CandidatePool& pool,
                 const gp::TaskSet& tasks);

// Argmax of info_gain / cost over (pool point, task) pairs with cost at most
// `affordable`; ties break toward the higher task, then the lexicographically
// smaller point. Empty when nothing is affordable.
std::optional<ActionChoice> select_action(const gp::MultiTaskGp& model,
                                          const std::vector<gp::Observation>& history,
                                          const CandidatePool& pool, const gp::TaskSet& tasks,
                                          double affordable);

}  // namespace bitcurve::search
