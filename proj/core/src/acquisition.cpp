#include "bitcurve/acquisition.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bitcurve::search {

namespace {

// Relative floor on the conditional variance; hitting it means the pool
// values explain (numerically) everything about the action's outcome.
constexpr double kConditionalFloor = 1e-12;

struct GainParts {
  double marginal = 0.0;
  double conditional_raw = 0.0;
};

// Shared conditioning state: the model given `history`, plus the pool block
// for the target task, factorized once.
class Conditioner {
 public:
  Conditioner(const gp::MultiTaskGp& model, const std::vector<gp::Observation>& history,
              const CandidatePool& pool, const gp::TaskSet& tasks)
      : model_(model.with_data(history)), target_(tasks.target_task()) {
    if (pool.points.empty()) throw std::invalid_argument("candidate pool is empty");
    if (model_.hyperparams().task_count() != tasks.count()) {
      throw std::invalid_argument("model and task set disagree on task count");
    }
    pool_queries_.reserve(pool.points.size());
    for (const auto& point : pool.points) pool_queries_.push_back({point, target_});

    const Eigen::Index p = static_cast<Eigen::Index>(pool.points.size());
    Eigen::MatrixXd pool_cov = model_.kernel_matrix(pool_queries_, pool_queries_);
    if (!model_.data().empty()) {
      s_pool_ = model_.cross_train_kernel(pool_queries_);        // P x N
      z_pool_ = model_.solve_train(s_pool_.transpose());         // N x P
      pool_cov.noalias() -= s_pool_ * z_pool_;
      pool_cov = 0.5 * (pool_cov + pool_cov.transpose()).eval();
    }
    for (Eigen::Index i = 0; i < p; ++i) pool_cov(i, i) = std::max(pool_cov(i, i), 0.0);

    const double mean_diag = std::max(pool_cov.diagonal().mean(), 0.0);
    double jitter = std::max(1e-10 * mean_diag, 1e-14);
    while (true) {
      Eigen::MatrixXd regularized = pool_cov;
      regularized.diagonal().array() += jitter;
      pool_chol_.compute(regularized);
      if (pool_chol_.info() == Eigen::Success) break;
      jitter *= 2.0;
      if (jitter > std::max(1e-4 * mean_diag, 1e-8)) {
        throw std::runtime_error("pool covariance could not be factorized");
      }
    }
  }

  GainParts parts(const std::vector<double>& x, int task) const {
    const auto& hp = model_.hyperparams();
    if (task < 1 || task > hp.task_count()) {
      throw std::invalid_argument("action task out of range");
    }
    const gp::Query action{x, task};
    const std::vector<gp::Query> action_query{action};

    double variance = model_.kernel_matrix(action_query, action_query)(0, 0);
    Eigen::RowVectorXd cross =
        model_.kernel_matrix(action_query, pool_queries_);  // 1 x P
    if (!model_.data().empty()) {
      const Eigen::MatrixXd s_action = model_.cross_train_kernel(action_query);  // 1 x N
      variance -= (s_action * model_.solve_train(s_action.transpose()))(0, 0);
      cross.noalias() -= s_action * z_pool_;
    }
    variance = std::max(variance, 0.0);

    const Eigen::VectorXd z = pool_chol_.matrixL().solve(cross.transpose());
    GainParts parts;
    parts.marginal = variance + hp.noise_var(task - 1);
    parts.conditional_raw = parts.marginal - z.squaredNorm();
    return parts;
  }

 private:
  gp::MultiTaskGp model_;
  int target_ = 1;
  std::vector<gp::Query> pool_queries_;
  Eigen::MatrixXd s_pool_;
  Eigen::MatrixXd z_pool_;
  Eigen::LLT<Eigen::MatrixXd> pool_chol_;
};

double clipped_gain(const GainParts& parts, bool* capped) {
  const double marginal = std::max(parts.marginal, 1e-18);
  const double floor = kConditionalFloor * marginal;
  if (capped) *capped = parts.conditional_raw < floor;
  if (parts.conditional_raw < floor) return kGainCap;
  const double conditional = std::min(parts.conditional_raw, marginal);
  return std::max(0.5 * std::log(marginal / conditional), 0.0);
}

double raw_gain(const GainParts& parts) {
  if (parts.conditional_raw <= 0.0) return kGainCap;
  return 0.5 * std::log(std::max(parts.marginal, 1e-18) / parts.conditional_raw);
}

}  // namespace

AcquisitionScorer::AcquisitionScorer(const gp::MultiTaskGp& model,
                                     const std::vector<gp::Observation>& history,
                                     const CandidatePool& pool, const gp::TaskSet& tasks)
    : tasks_(tasks.count()), pool_size_(pool.points.size()) {
  const Conditioner conditioner(model, history, pool, tasks);
  entries_.resize(pool_size_ * static_cast<std::size_t>(tasks_));
  for (int l = 1; l <= tasks_; ++l) {
    for (std::size_t i = 0; i < pool_size_; ++i) {
      const GainParts parts = conditioner.parts(pool.points[i], l);
      Entry& e = entries_[static_cast<std::size_t>(l - 1) * pool_size_ + i];
      e.marginal = parts.marginal;
      e.conditional = parts.conditional_raw;
      bool was_capped = false;
      (void)clipped_gain(parts, &was_capped);
      e.capped = was_capped;
      if (was_capped) ++degenerate_;
    }
  }
}

const AcquisitionScorer::Entry& AcquisitionScorer::entry(int pool_index, int task) const {
  if (task < 1 || task > tasks_ || pool_index < 0 ||
      static_cast<std::size_t>(pool_index) >= pool_size_) {
    throw std::out_of_range("action index out of range");
  }
  return entries_[static_cast<std::size_t>(task - 1) * pool_size_ +
                  static_cast<std::size_t>(pool_index)];
}

double AcquisitionScorer::info_gain(int pool_index, int task) const {
  const Entry& e = entry(pool_index, task);
  return clipped_gain({e.marginal, e.conditional}, nullptr);
}

double AcquisitionScorer::raw_info_gain(int pool_index, int task) const {
  const Entry& e = entry(pool_index, task);
  return raw_gain({e.marginal, e.conditional});
}

bool AcquisitionScorer::capped(int pool_index, int task) const {
  return entry(pool_index, task).capped;
}

double info_gain(const gp::MultiTaskGp& model, const std::vector<gp::Observation>& history,
                 const std::vector<double>& x, int task, const CandidatePool& pool,
                 const gp::TaskSet& tasks) {
  const Conditioner conditioner(model, history, pool, tasks);
  return clipped_gain(conditioner.parts(x, task), nullptr);
}

std::optional<ActionChoice> select_action(const gp::MultiTaskGp& model,
                                          const std::vector<gp::Observation>& history,
                                          const CandidatePool& pool, const gp::TaskSet& tasks,
                                          double affordable) {
  bool any_affordable = false;
  for (double c : tasks.costs) any_affordable = any_affordable || c <= affordable;
  if (!any_affordable) return std::nullopt;

  const AcquisitionScorer scorer(model, history, pool, tasks);
  std::optional<ActionChoice> best;
  for (int l = 1; l <= tasks.count(); ++l) {
    const double cost = tasks.costs[static_cast<std::size_t>(l - 1)];
    if (cost > affordable) continue;
    for (std::size_t i = 0; i < pool.size(); ++i) {
      const double gain = scorer.info_gain(static_cast<int>(i), l);
      const double score = gain / cost;
      bool better = false;
      if (!best) {
        better = true;
      } else if (score > best->score) {
        better = true;
      } else if (score == best->score) {
        if (l > best->task) {
          better = true;
        } else if (l == best->task &&
                   std::lexicographical_compare(pool.points[i].begin(), pool.points[i].end(),
                                                best->x.begin(), best->x.end())) {
          better = true;
        }
      }
      if (better) {
        ActionChoice choice;
        choice.pool_index = static_cast<int>(i);
        choice.task = l;
        choice.x = pool.points[i];
        choice.info_gain = gain;
        choice.cost = cost;
        choice.score = score;
        choice.capped = scorer.capped(static_cast<int>(i), l);
        best = std::move(choice);
      }
    }
  }
  return best;
}

}  // namespace bitcurve::search
