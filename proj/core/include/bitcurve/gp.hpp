#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

namespace bitcurve::gp {

// Fidelity ladder. Task l (1-based) trains for epochs[l-1], costs
// costs[l-1] budget units, and observes accuracy with variance
// noise_var[l-1]. The last task is the target fidelity.
struct TaskSet {
  std::vector<int> epochs;
  std::vector<double> costs;
  std::vector<double> noise_var;

  int count() const { return static_cast<int>(epochs.size()); }
  int target_task() const { return count(); }
  void validate() const;

  // costs default to max(epochs, 1), so the 0-epoch task has unit cost.
  static TaskSet with_default_costs(std::vector<int> epochs, std::vector<double> noise_var);
};

struct Observation {
  std::vector<double> x;
  int task = 1;  // 1-based
  double y = 0.0;
  double cost = 0.0;
};

struct Query {
  std::vector<double> x;
  int task = 1;
};

// ICM kernel: k((x,l),(x',l')) = K^f[l,l'] * sv * exp(-1/2 sum ((x-x')/ell)^2)
// with K^f = L L^T. Noise and jitter are diagonal additions on training data.
struct Hyperparams {
  Eigen::VectorXd lengthscales;  // one per input dimension, > 0
  double signal_variance = 1.0;
  Eigen::MatrixXd task_factor;   // lower-triangular L with positive diagonal
  Eigen::VectorXd noise_var;     // one per task, >= 0
  double jitter = 0.0;           // absolute diagonal jitter

  int input_dim() const { return static_cast<int>(lengthscales.size()); }
  int task_count() const { return static_cast<int>(task_factor.rows()); }
  Eigen::MatrixXd task_cov() const { return task_factor * task_factor.transpose(); }
};

struct Posterior {
  Eigen::VectorXd mean;
  Eigen::VectorXd variance;
};

struct FitConfig {
  int restarts = 5;
  int max_iterations = 400;
  double learning_rate = 0.05;
  double grad_tolerance = 1e-5;
  bool learn_noise = true;
  std::uint64_t seed = 0;
  std::optional<Hyperparams> warm_start;  // extra restart started here
};

struct FitReport {
  std::vector<double> initial_lml;  // log marginal likelihood at each restart's start
  std::vector<double> final_lml;
  int chosen_restart = -1;
  bool converged = true;
};

// Multi-task GP conditioned on a fixed observation set. Immutable after
// construction; predictions are const and thread-safe.
//
// Targets may be normalized (fit() does this): hyperparameters live in the
// normalized space and predictions are mapped back through y_mean/y_std.
class MultiTaskGp {
 public:
  MultiTaskGp(Hyperparams hp, std::vector<Observation> data, double y_mean = 0.0,
              double y_std = 1.0);

  // Maximizes log marginal likelihood with Adam over log-parameters,
  // multi-started; deterministic given config.seed.
  static MultiTaskGp fit(const std::vector<Observation>& data, const TaskSet& tasks,
                         const FitConfig& config, FitReport* report = nullptr);

  double kernel_entry(const std::vector<double>& x, int task, const std::vector<double>& x2,
                      int task2) const;

  // K + diag(noise_{l_i}) + jitter * I over the training observations.
  Eigen::MatrixXd train_covariance() const;

  Posterior predict(const std::vector<Query>& queries) const;
  // Posterior covariance of the latent function values (no observation
  // noise), in de-normalized units.
  Eigen::MatrixXd posterior_covariance(const std::vector<Query>& queries) const;

  // Of the normalized targets, at the applied jitter.
  double log_marginal_likelihood() const;

  // Same hyperparameters and normalization, new data (posterior-only update).
  MultiTaskGp with_data(std::vector<Observation> data) const;

  const Hyperparams& hyperparams() const { return hp_; }
  const std::vector<Observation>& data() const { return data_; }
  double y_mean() const { return y_mean_; }
  double y_std() const { return y_std_; }
  double applied_jitter() const { return applied_jitter_; }

  // Cross-kernel matrix between two query sets (prior covariance).
  Eigen::MatrixXd kernel_matrix(const std::vector<Query>& a, const std::vector<Query>& b) const;
  // Kernel matrix between queries and the training observations.
  Eigen::MatrixXd cross_train_kernel(const std::vector<Query>& queries) const;
  // Solves Sigma z = rhs against the training covariance.
  Eigen::MatrixXd solve_train(const Eigen::MatrixXd& rhs) const;

 private:
  void factorize();

  Hyperparams hp_;
  std::vector<Observation> data_;
  double y_mean_ = 0.0;
  double y_std_ = 1.0;
  double applied_jitter_ = 0.0;
  Eigen::LLT<Eigen::MatrixXd> chol_;
  Eigen::VectorXd alpha_;  // Sigma^{-1} (y - mean), normalized space
};

}  // namespace bitcurve::gp
