#include "bitcurve/search.hpp"

#include <algorithm>
#include <stdexcept>

#include "bitcurve/rng.hpp"

namespace bitcurve::search {

namespace {

int cheapest_task(const gp::TaskSet& tasks) {
  int best = 1;
  for (int l = 2; l <= tasks.count(); ++l) {
    if (tasks.costs[static_cast<std::size_t>(l - 1)] <
        tasks.costs[static_cast<std::size_t>(best - 1)]) {
      best = l;
    }
  }
  return best;
}

}  // namespace

SearchResult run_search(objective::Objective& objective, const gp::TaskSet& tasks,
                        const CandidatePool& pool, Budget budget, std::uint64_t seed,
                        const SearchConfig& config,
                        const std::function<void(const HistoryEvent&)>& on_event) {
  tasks.validate();
  if (pool.points.empty()) throw std::invalid_argument("candidate pool is empty");
  if (!(budget.total >= 0.0)) throw std::invalid_argument("budget must be >= 0");

  const int dim = pool.dimension();
  std::vector<HistoryEvent> history;
  std::vector<gp::Observation> observations;
  int failures = 0;

  auto evaluate = [&](int pool_index, int task, const std::string& phase,
                      std::optional<double> gain, std::optional<double> score) {
    const double cost = tasks.costs[static_cast<std::size_t>(task - 1)];
    objective::Request request;
    request.weights = {config.basis, pool.points[static_cast<std::size_t>(pool_index)]};
    request.bits = curve::bits_for_layers(request.weights, config.layer_count, config.grid);
    request.task = task;
    request.epochs = tasks.epochs[static_cast<std::size_t>(task - 1)];
    request.seed = rng::combine(seed, {0x6576616cULL, static_cast<std::uint64_t>(history.size())});

    const objective::Result result = objective.evaluate(request);
    budget.spent += cost;  // failures are charged too, like real training time

    HistoryEvent event;
    event.step = static_cast<int>(history.size());
    event.phase = phase;
    event.x = request.weights.weights;
    event.task = task;
    event.epochs = request.epochs;
    event.cost = cost;
    event.cumulative_cost = budget.spent;
    event.gain = gain;
    event.score = score;
    event.status = objective::status_name(result.status);
    event.cost_seconds = result.cost_seconds;
    if (result.ok()) {
      event.y = result.accuracy;
      observations.push_back(
          {pool.points[static_cast<std::size_t>(pool_index)], task, result.accuracy, cost});
    } else {
      ++failures;
    }
    history.push_back(event);
    if (on_event) on_event(history.back());
  };

  // Initial design: ceil(d+1) space-filling points on the cheapest task,
  // plus the first of them on the target task. Runs regardless of budget.
  const int cheap = cheapest_task(tasks);
  const int init_points = std::min<int>(dim + 1, static_cast<int>(pool.size()));
  for (int i = 0; i < init_points; ++i) evaluate(i, cheap, "init", {}, {});
  if (tasks.target_task() != cheap) evaluate(0, tasks.target_task(), "init", {}, {});
  const double init_cost = budget.spent;

  auto fit_model = [&](int refit_index, const std::optional<gp::Hyperparams>& warm) {
    gp::FitConfig fit = config.fit;
    fit.seed = rng::combine(seed, {0x666974ULL, static_cast<std::uint64_t>(refit_index)});
    if (warm) {
      fit.warm_start = warm;
      // Warm refits keep a couple of fresh restarts to escape stale optima.
      fit.restarts = std::min(fit.restarts, 2);
    }
    return gp::MultiTaskGp::fit(observations, tasks, fit);
  };

  if (observations.empty()) {
    throw std::runtime_error("initial design produced no usable observations");
  }
  gp::MultiTaskGp model = fit_model(0, std::nullopt);
  std::size_t fitted_at = observations.size();
  int refit_index = 1;
  int explore_actions = 0;

  while (true) {
    if (budget.max_evaluations && explore_actions >= *budget.max_evaluations) break;
    const auto choice = select_action(model, observations, pool, tasks, budget.remaining());
    if (!choice) break;
    evaluate(choice->pool_index, choice->task, "explore", choice->info_gain, choice->score);
    ++explore_actions;

    if (observations.size() != fitted_at) {
      if (observations.size() >= fitted_at + static_cast<std::size_t>(config.refit_every)) {
        model = fit_model(refit_index++, model.hyperparams());
        fitted_at = observations.size();
      } else {
        model = model.with_data(observations);
      }
    }
  }

  SearchResult result{std::move(model), std::move(history), budget, init_cost,
                      static_cast<int>(0), failures};
  result.evaluations = static_cast<int>(result.history.size());
  return result;
}

}  // namespace bitcurve::search
