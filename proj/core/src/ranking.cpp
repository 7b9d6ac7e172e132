#include "bitcurve/ranking.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace bitcurve::rank {

double effective_accuracy(double accuracy, const curve::BitConfig& bits, double k) {
  if (!(k > 0.0)) throw std::invalid_argument("penalty constant k must be positive");
  const double n = static_cast<double>(bits.layer_count());
  return accuracy - (static_cast<double>(bits.sum()) - 4.0 * n) / k;
}

double naive_loss(double accuracy, const curve::BitConfig& bits) {
  const int total = bits.sum();
  if (total <= 0) throw std::invalid_argument("bit sum must be positive");
  return -accuracy / static_cast<double>(total);
}

std::vector<RankedConfig> rank_configs(const std::vector<std::vector<double>>& points,
                                       curve::Basis basis, const std::vector<double>& means,
                                       const std::vector<double>& stds,
                                       const net::NetworkSpec& spec,
                                       const RankOptions& options) {
  if (points.empty()) throw std::invalid_argument("empty candidate pool");
  if (means.size() != points.size() || stds.size() != points.size()) {
    throw std::invalid_argument("prediction count does not match pool size");
  }
  const int layers = spec.conv_count();

  std::vector<RankedConfig> configs;
  configs.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    RankedConfig c;
    c.weights = {basis, points[i]};
    c.bits = curve::bits_for_layers(c.weights, layers, options.grid);
    c.predicted_accuracy = means[i];
    c.predicted_std = stds[i];
    c.bit_sum = c.bits.sum();
    c.memory_bytes = quant::model_size_bytes(spec, c.bits, options.size_model);
    const double ranked_accuracy = means[i] - options.pessimism_beta * stds[i];
    c.effective = effective_accuracy(ranked_accuracy, c.bits, options.k);
    c.naive = naive_loss(ranked_accuracy, c.bits);
    configs.push_back(std::move(c));
  }

  std::stable_sort(configs.begin(), configs.end(),
                   [](const RankedConfig& a, const RankedConfig& b) {
                     if (a.effective != b.effective) return a.effective > b.effective;
                     if (a.memory_bytes != b.memory_bytes) return a.memory_bytes < b.memory_bytes;
                     return std::lexicographical_compare(
                         a.weights.weights.begin(), a.weights.weights.end(),
                         b.weights.weights.begin(), b.weights.weights.end());
                   });
  if (configs.size() > options.top_k) configs.resize(options.top_k);
  return configs;
}

std::vector<RankedConfig> rank_configs(const gp::MultiTaskGp& model,
                                       const search::CandidatePool& pool, curve::Basis basis,
                                       const net::NetworkSpec& spec, const gp::TaskSet& tasks,
                                       const RankOptions& options) {
  std::vector<gp::Query> queries;
  queries.reserve(pool.size());
  for (const auto& point : pool.points) queries.push_back({point, tasks.target_task()});
  const gp::Posterior posterior = model.predict(queries);

  std::vector<double> means(pool.size());
  std::vector<double> stds(pool.size());
  for (std::size_t i = 0; i < pool.size(); ++i) {
    means[i] = posterior.mean(static_cast<Eigen::Index>(i));
    stds[i] = std::sqrt(std::max(posterior.variance(static_cast<Eigen::Index>(i)), 0.0));
  }
  return rank_configs(pool.points, basis, means, stds, spec, options);
}

std::vector<std::size_t> pareto_front(
    const std::vector<std::pair<double, double>>& memory_accuracy) {
  if (memory_accuracy.empty()) throw std::invalid_argument("empty point set");

  // Sweep in memory order. A point survives iff it tops its memory group
  // and strictly beats every cheaper point's accuracy (a cheaper point with
  // equal accuracy dominates; an equal-cost duplicate does not).
  std::vector<std::size_t> order(memory_accuracy.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (memory_accuracy[a].first != memory_accuracy[b].first) {
      return memory_accuracy[a].first < memory_accuracy[b].first;
    }
    return memory_accuracy[a].second > memory_accuracy[b].second;
  });

  std::vector<std::size_t> front;
  double best_cheaper = -std::numeric_limits<double>::infinity();
  std::size_t at = 0;
  while (at < order.size()) {
    std::size_t group_end = at;
    const double group_memory = memory_accuracy[order[at]].first;
    const double group_best = memory_accuracy[order[at]].second;
    while (group_end < order.size() &&
           memory_accuracy[order[group_end]].first == group_memory) {
      ++group_end;
    }
    for (std::size_t k = at; k < group_end; ++k) {
      const double acc = memory_accuracy[order[k]].second;
      if (acc == group_best && acc > best_cheaper) front.push_back(order[k]);
    }
    best_cheaper = std::max(best_cheaper, group_best);
    at = group_end;
  }
  std::sort(front.begin(), front.end());
  return front;
}

}  // namespace bitcurve::rank
