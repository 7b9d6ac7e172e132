#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "bitcurve/acquisition.hpp"
#include "bitcurve/curve.hpp"
#include "bitcurve/gp.hpp"
#include "bitcurve/objective.hpp"
#include "bitcurve/pool.hpp"

namespace bitcurve::search {

// Cost allotted to the exploration phase. The mandatory initial design is
// charged here too; exploration actions additionally require that their
// cost still fits under `total`.
struct Budget {
  double total = 0.0;
  double spent = 0.0;
  std::optional<int> max_evaluations;  // cap on exploration actions

  double remaining() const { return total - spent; }
  bool can_afford(double cost) const { return cost <= remaining(); }
};

struct HistoryEvent {
  int step = 0;                 // over all evaluations, 0-based
  std::string phase;            // "init" or "explore"
  std::vector<double> x;
  int task = 1;
  int epochs = 0;
  std::optional<double> y;      // absent for failed evaluations
  double cost = 0.0;
  double cumulative_cost = 0.0;
  std::optional<double> gain;   // absent during the initial design
  std::optional<double> score;
  std::string status;           // OK / FAILED / TIMEOUT
  std::optional<double> cost_seconds;  // reported by external trainers
};

struct SearchConfig {
  curve::Basis basis = curve::Basis::kBezier;
  curve::LayerGrid grid = curve::LayerGrid::kEndpoints;
  int layer_count = 1;   // CONV layers; bit configs handed to the objective
  int refit_every = 5;   // full hyperparameter refit cadence (observations)
  gp::FitConfig fit;     // seed is derived from the run seed
};

struct SearchResult {
  gp::MultiTaskGp model;
  std::vector<HistoryEvent> history;
  Budget budget;
  double init_cost = 0.0;
  int evaluations = 0;
  int failures = 0;
};

// Budgeted exploration: seed with an initial design (d+1 space-filling
// points on the cheapest task plus one on the target task), then repeat
// select-by-information-per-cost / evaluate / update until no affordable
// action remains. Fully deterministic given the seed; `on_event` fires once
// per evaluation in order.
SearchResult run_search(objective::Objective& objective, const gp::TaskSet& tasks,
                        const CandidatePool& pool, Budget budget, std::uint64_t seed,
                        const SearchConfig& config,
                        const std::function<void(const HistoryEvent&)>& on_event = {});

}  // namespace bitcurve::search
