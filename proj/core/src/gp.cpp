#include "bitcurve/gp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

#include "bitcurve/rng.hpp"

namespace bitcurve::gp {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr double kLogLengthscaleLo = -6.9077552789821368;  // ln 1e-3
constexpr double kLogLengthscaleHi = 6.9077552789821368;   // ln 1e3
constexpr double kLogDiagLo = -9.2103403719761836;         // ln 1e-4
constexpr double kLogDiagHi = 6.9077552789821368;
constexpr double kOffDiagBound = 10.0;
constexpr double kLogNoiseLo = -18.420680743952367;  // ln 1e-8
constexpr double kLogNoiseHi = 4.6051701859880918;   // ln 1e2

double squared_distance(const std::vector<double>& a, const std::vector<double>& b,
                        const Eigen::VectorXd& lengthscales) {
  double sum = 0.0;
  for (int j = 0; j < lengthscales.size(); ++j) {
    const double delta = (a[static_cast<std::size_t>(j)] - b[static_cast<std::size_t>(j)]) /
                         lengthscales[j];
    sum += delta * delta;
  }
  return sum;
}

}  // namespace

void TaskSet::validate() const {
  if (epochs.empty()) throw std::invalid_argument("task set is empty");
  for (std::size_t i = 1; i < epochs.size(); ++i) {
    if (epochs[i] <= epochs[i - 1]) {
      throw std::invalid_argument("task epochs must be strictly increasing");
    }
  }
  if (costs.size() != epochs.size() || noise_var.size() != epochs.size()) {
    throw std::invalid_argument("task set field lengths disagree");
  }
  for (double c : costs) {
    if (!(c > 0.0)) throw std::invalid_argument("task cost must be positive");
  }
  for (double v : noise_var) {
    if (!(v >= 0.0)) throw std::invalid_argument("task noise variance must be >= 0");
  }
}

TaskSet TaskSet::with_default_costs(std::vector<int> epochs, std::vector<double> noise_var) {
  TaskSet tasks;
  tasks.costs.reserve(epochs.size());
  for (int e : epochs) tasks.costs.push_back(std::max(e, 1));
  tasks.epochs = std::move(epochs);
  tasks.noise_var = std::move(noise_var);
  tasks.validate();
  return tasks;
}

MultiTaskGp::MultiTaskGp(Hyperparams hp, std::vector<Observation> data, double y_mean,
                         double y_std)
    : hp_(std::move(hp)), data_(std::move(data)), y_mean_(y_mean), y_std_(y_std) {
  if (hp_.lengthscales.size() == 0) throw std::invalid_argument("no lengthscales");
  if ((hp_.lengthscales.array() <= 0.0).any()) {
    throw std::invalid_argument("lengthscales must be positive");
  }
  if (hp_.task_factor.rows() != hp_.task_factor.cols() ||
      hp_.task_factor.rows() != hp_.noise_var.size()) {
    throw std::invalid_argument("task factor / noise dimensions disagree");
  }
  if (!(y_std_ > 0.0)) throw std::invalid_argument("y_std must be positive");
  for (const auto& obs : data_) {
    if (static_cast<int>(obs.x.size()) != hp_.input_dim()) {
      throw std::invalid_argument("observation dimension mismatch");
    }
    if (obs.task < 1 || obs.task > hp_.task_count()) {
      throw std::invalid_argument("observation task out of range");
    }
  }
  factorize();
}

double MultiTaskGp::kernel_entry(const std::vector<double>& x, int task,
                                 const std::vector<double>& x2, int task2) const {
  if (x.size() != x2.size() || static_cast<int>(x.size()) != hp_.input_dim()) {
    throw std::invalid_argument("kernel input dimension mismatch");
  }
  if (task < 1 || task > hp_.task_count() || task2 < 1 || task2 > hp_.task_count()) {
    throw std::invalid_argument("kernel task index out of range");
  }
  const Eigen::MatrixXd task_cov = hp_.task_cov();
  const double sq = squared_distance(x, x2, hp_.lengthscales);
  return task_cov(task - 1, task2 - 1) * hp_.signal_variance * std::exp(-0.5 * sq);
}

Eigen::MatrixXd MultiTaskGp::kernel_matrix(const std::vector<Query>& a,
                                           const std::vector<Query>& b) const {
  const Eigen::MatrixXd task_cov = hp_.task_cov();
  Eigen::MatrixXd out(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) {
      const double sq = squared_distance(a[i].x, b[j].x, hp_.lengthscales);
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          task_cov(a[i].task - 1, b[j].task - 1) * hp_.signal_variance * std::exp(-0.5 * sq);
    }
  }
  return out;
}

Eigen::MatrixXd MultiTaskGp::cross_train_kernel(const std::vector<Query>& queries) const {
  Eigen::MatrixXd out(queries.size(), data_.size());
  const Eigen::MatrixXd task_cov = hp_.task_cov();
  for (std::size_t i = 0; i < queries.size(); ++i) {
    for (std::size_t j = 0; j < data_.size(); ++j) {
      const double sq = squared_distance(queries[i].x, data_[j].x, hp_.lengthscales);
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          task_cov(queries[i].task - 1, data_[j].task - 1) * hp_.signal_variance *
          std::exp(-0.5 * sq);
    }
  }
  return out;
}

Eigen::MatrixXd MultiTaskGp::train_covariance() const {
  const Eigen::Index n = static_cast<Eigen::Index>(data_.size());
  Eigen::MatrixXd sigma(n, n);
  const Eigen::MatrixXd task_cov = hp_.task_cov();
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& a = data_[static_cast<std::size_t>(i)];
    for (Eigen::Index j = i; j < n; ++j) {
      const auto& b = data_[static_cast<std::size_t>(j)];
      const double sq = squared_distance(a.x, b.x, hp_.lengthscales);
      const double k =
          task_cov(a.task - 1, b.task - 1) * hp_.signal_variance * std::exp(-0.5 * sq);
      sigma(i, j) = k;
      sigma(j, i) = k;
    }
    sigma(i, i) += hp_.noise_var[a.task - 1] + applied_jitter_;
  }
  return sigma;
}

void MultiTaskGp::factorize() {
  applied_jitter_ = hp_.jitter;
  const Eigen::Index n = static_cast<Eigen::Index>(data_.size());
  if (n == 0) return;

  double mean_diag = 0.0;
  for (const auto& obs : data_) {
    mean_diag += kernel_entry(obs.x, obs.task, obs.x, obs.task) + hp_.noise_var[obs.task - 1];
  }
  mean_diag /= static_cast<double>(n);

  const double cap = 1e-2 * mean_diag;
  while (true) {
    const Eigen::MatrixXd sigma = train_covariance();
    chol_.compute(sigma);
    if (chol_.info() == Eigen::Success) break;
    const double next =
        applied_jitter_ == 0.0 ? 1e-6 * mean_diag : applied_jitter_ * 2.0;
    if (next > cap && applied_jitter_ > 0.0) {
      throw std::runtime_error("training covariance is not positive definite");
    }
    applied_jitter_ = std::min(next, cap);
  }

  Eigen::VectorXd y_norm(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    y_norm(i) = (data_[static_cast<std::size_t>(i)].y - y_mean_) / y_std_;
  }
  alpha_ = chol_.solve(y_norm);
}

Eigen::MatrixXd MultiTaskGp::solve_train(const Eigen::MatrixXd& rhs) const {
  if (data_.empty()) throw std::logic_error("solve_train needs observations");
  return chol_.solve(rhs);
}

Posterior MultiTaskGp::predict(const std::vector<Query>& queries) const {
  Posterior post;
  const Eigen::Index q = static_cast<Eigen::Index>(queries.size());
  post.mean.resize(q);
  post.variance.resize(q);
  for (const auto& query : queries) {
    if (static_cast<int>(query.x.size()) != hp_.input_dim()) {
      throw std::invalid_argument("query dimension mismatch");
    }
    if (query.task < 1 || query.task > hp_.task_count()) {
      throw std::invalid_argument("query task out of range");
    }
  }

  if (data_.empty()) {
    for (Eigen::Index i = 0; i < q; ++i) {
      const auto& query = queries[static_cast<std::size_t>(i)];
      post.mean(i) = y_mean_;
      post.variance(i) =
          y_std_ * y_std_ * kernel_entry(query.x, query.task, query.x, query.task);
    }
    return post;
  }

  const Eigen::MatrixXd k_star = cross_train_kernel(queries);       // q x n
  const Eigen::MatrixXd v = chol_.matrixL().solve(k_star.transpose());  // n x q
  for (Eigen::Index i = 0; i < q; ++i) {
    const auto& query = queries[static_cast<std::size_t>(i)];
    const double prior = kernel_entry(query.x, query.task, query.x, query.task);
    const double mean_norm = k_star.row(i).dot(alpha_);
    const double var_norm = prior - v.col(i).squaredNorm();
    post.mean(i) = y_mean_ + y_std_ * mean_norm;
    post.variance(i) = std::max(var_norm, 0.0) * y_std_ * y_std_;
  }
  return post;
}

Eigen::MatrixXd MultiTaskGp::posterior_covariance(const std::vector<Query>& queries) const {
  const Eigen::MatrixXd prior = kernel_matrix(queries, queries);
  Eigen::MatrixXd cov;
  if (data_.empty()) {
    cov = prior;
  } else {
    const Eigen::MatrixXd k_star = cross_train_kernel(queries);  // q x n
    const Eigen::MatrixXd v = chol_.matrixL().solve(k_star.transpose());
    cov = prior - v.transpose() * v;
  }
  cov = 0.5 * (cov + cov.transpose()).eval();
  return y_std_ * y_std_ * cov;
}

double MultiTaskGp::log_marginal_likelihood() const {
  const Eigen::Index n = static_cast<Eigen::Index>(data_.size());
  if (n == 0) return 0.0;
  Eigen::VectorXd y_norm(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    y_norm(i) = (data_[static_cast<std::size_t>(i)].y - y_mean_) / y_std_;
  }
  double log_det = 0.0;
  const auto& l_matrix = chol_.matrixLLT();
  for (Eigen::Index i = 0; i < n; ++i) log_det += std::log(l_matrix(i, i));
  return -0.5 * y_norm.dot(alpha_) - log_det -
         0.5 * static_cast<double>(n) * std::log(kTwoPi);
}

MultiTaskGp MultiTaskGp::with_data(std::vector<Observation> data) const {
  return MultiTaskGp(hp_, std::move(data), y_mean_, y_std_);
}

// ---------------------------------------------------------------------------
// Fitting: Adam ascent on the log marginal likelihood over log-parameters.

namespace {

struct FitProblem {
  int dim = 1;
  int tasks = 1;
  bool learn_noise = true;
  double signal_variance = 1.0;
  Eigen::VectorXd fixed_noise;            // used when !learn_noise
  std::vector<Eigen::MatrixXd> sq_diff;   // per input dim, (x_aj - x_bj)^2
  std::vector<int> task_index;            // 0-based per observation
  Eigen::VectorXd y_norm;

  int n() const { return static_cast<int>(task_index.size()); }
  int factor_params() const { return tasks * (tasks + 1) / 2; }
  int param_count() const {
    return dim + factor_params() + (learn_noise ? tasks : 0);
  }

  Hyperparams unpack(const Eigen::VectorXd& theta) const {
    Hyperparams hp;
    hp.signal_variance = signal_variance;
    hp.lengthscales = theta.head(dim).array().exp();
    hp.task_factor = Eigen::MatrixXd::Zero(tasks, tasks);
    int at = dim;
    for (int p = 0; p < tasks; ++p) {
      for (int q = 0; q <= p; ++q) {
        hp.task_factor(p, q) = (p == q) ? std::exp(theta(at)) : theta(at);
        ++at;
      }
    }
    if (learn_noise) {
      hp.noise_var = theta.segment(at, tasks).array().exp();
    } else {
      hp.noise_var = fixed_noise;
    }
    return hp;
  }

  Eigen::VectorXd pack(const Hyperparams& hp) const {
    Eigen::VectorXd theta(param_count());
    theta.head(dim) = hp.lengthscales.array().max(1e-6).log();
    int at = dim;
    for (int p = 0; p < tasks; ++p) {
      for (int q = 0; q <= p; ++q) {
        theta(at++) = (p == q) ? std::log(std::max(hp.task_factor(p, q), 1e-4))
                               : hp.task_factor(p, q);
      }
    }
    if (learn_noise) {
      theta.segment(at, tasks) = hp.noise_var.array().max(1e-8).log();
    }
    return theta;
  }

  void clamp(Eigen::VectorXd& theta) const {
    for (int j = 0; j < dim; ++j) {
      theta(j) = std::clamp(theta(j), kLogLengthscaleLo, kLogLengthscaleHi);
    }
    int at = dim;
    for (int p = 0; p < tasks; ++p) {
      for (int q = 0; q <= p; ++q) {
        theta(at) = (p == q) ? std::clamp(theta(at), kLogDiagLo, kLogDiagHi)
                             : std::clamp(theta(at), -kOffDiagBound, kOffDiagBound);
        ++at;
      }
    }
    if (learn_noise) {
      for (int l = 0; l < tasks; ++l) {
        theta(at + l) = std::clamp(theta(at + l), kLogNoiseLo, kLogNoiseHi);
      }
    }
  }

  // Log marginal likelihood and its gradient; -inf when the covariance
  // cannot be factorized even with the jitter ladder.
  double eval(const Eigen::VectorXd& theta, Eigen::VectorXd* grad) const {
    const Hyperparams hp = unpack(theta);
    const int count = n();
    const Eigen::MatrixXd task_cov = hp.task_cov();

    Eigen::MatrixXd se = Eigen::MatrixXd::Zero(count, count);
    for (int j = 0; j < dim; ++j) {
      const double inv_sq = 1.0 / (hp.lengthscales(j) * hp.lengthscales(j));
      se.noalias() += inv_sq * sq_diff[static_cast<std::size_t>(j)];
    }
    se = (-0.5 * se.array()).exp();

    Eigen::MatrixXd kernel(count, count);
    for (int a = 0; a < count; ++a) {
      for (int b = 0; b < count; ++b) {
        kernel(a, b) = signal_variance * task_cov(task_index[static_cast<std::size_t>(a)],
                                                  task_index[static_cast<std::size_t>(b)]) *
                       se(a, b);
      }
    }

    Eigen::VectorXd diag_noise(count);
    for (int a = 0; a < count; ++a) {
      diag_noise(a) = hp.noise_var(task_index[static_cast<std::size_t>(a)]);
    }

    const double mean_diag = (kernel.diagonal() + diag_noise).mean();
    double jitter = 1e-6 * mean_diag;
    Eigen::LLT<Eigen::MatrixXd> chol;
    while (true) {
      Eigen::MatrixXd sigma = kernel;
      sigma.diagonal() += diag_noise;
      sigma.diagonal().array() += jitter;
      chol.compute(sigma);
      if (chol.info() == Eigen::Success) break;
      jitter *= 2.0;
      if (jitter > 1e-2 * mean_diag) {
        if (grad) grad->setZero(param_count());
        return -std::numeric_limits<double>::infinity();
      }
    }

    const Eigen::VectorXd alpha = chol.solve(y_norm);
    double log_det = 0.0;
    for (int i = 0; i < count; ++i) log_det += std::log(chol.matrixLLT()(i, i));
    const double lml = -0.5 * y_norm.dot(alpha) - log_det -
                       0.5 * static_cast<double>(count) * std::log(kTwoPi);
    if (!grad) return lml;

    grad->setZero(param_count());
    const Eigen::MatrixXd precision =
        chol.solve(Eigen::MatrixXd::Identity(count, count));
    const Eigen::MatrixXd trace_term = alpha * alpha.transpose() - precision;

    for (int j = 0; j < dim; ++j) {
      const double inv_sq = 1.0 / (hp.lengthscales(j) * hp.lengthscales(j));
      double g = 0.0;
      for (int a = 0; a < count; ++a) {
        for (int b = 0; b < count; ++b) {
          g += trace_term(a, b) * kernel(a, b) *
               sq_diff[static_cast<std::size_t>(j)](a, b) * inv_sq;
        }
      }
      (*grad)(j) = 0.5 * g;
    }

    Eigen::MatrixXd task_grad = Eigen::MatrixXd::Zero(tasks, tasks);
    for (int a = 0; a < count; ++a) {
      for (int b = 0; b < count; ++b) {
        task_grad(task_index[static_cast<std::size_t>(a)],
                  task_index[static_cast<std::size_t>(b)]) +=
            0.5 * trace_term(a, b) * signal_variance * se(a, b);
      }
    }
    const Eigen::MatrixXd factor_grad =
        (task_grad + task_grad.transpose()) * hp.task_factor;
    int at = dim;
    for (int p = 0; p < tasks; ++p) {
      for (int q = 0; q <= p; ++q) {
        (*grad)(at++) = (p == q) ? factor_grad(p, q) * hp.task_factor(p, q)
                                 : factor_grad(p, q);
      }
    }

    if (learn_noise) {
      for (int a = 0; a < count; ++a) {
        (*grad)(at + task_index[static_cast<std::size_t>(a)]) +=
            0.5 * trace_term(a, a) * hp.noise_var(task_index[static_cast<std::size_t>(a)]);
      }
    }
    return lml;
  }
};

struct RestartOutcome {
  double initial_lml = -std::numeric_limits<double>::infinity();
  double best_lml = -std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_theta;
};

RestartOutcome run_restart(const FitProblem& problem, Eigen::VectorXd theta,
                           const FitConfig& config) {
  RestartOutcome outcome;
  problem.clamp(theta);
  outcome.best_theta = theta;

  Eigen::VectorXd m = Eigen::VectorXd::Zero(problem.param_count());
  Eigen::VectorXd v = Eigen::VectorXd::Zero(problem.param_count());
  const double beta1 = 0.9;
  const double beta2 = 0.999;
  const double eps = 1e-8;

  Eigen::VectorXd grad(problem.param_count());
  for (int iter = 0; iter < config.max_iterations; ++iter) {
    const double lml = problem.eval(theta, &grad);
    if (iter == 0) outcome.initial_lml = lml;
    if (std::isfinite(lml) && lml > outcome.best_lml) {
      outcome.best_lml = lml;
      outcome.best_theta = theta;
    }
    if (!std::isfinite(lml)) break;
    if (grad.lpNorm<Eigen::Infinity>() < config.grad_tolerance) break;

    m = beta1 * m + (1.0 - beta1) * grad;
    v = beta2 * v + (1.0 - beta2) * grad.cwiseProduct(grad);
    const double correction1 = 1.0 - std::pow(beta1, iter + 1);
    const double correction2 = 1.0 - std::pow(beta2, iter + 1);
    for (int p = 0; p < problem.param_count(); ++p) {
      const double m_hat = m(p) / correction1;
      const double v_hat = v(p) / correction2;
      theta(p) += config.learning_rate * m_hat / (std::sqrt(v_hat) + eps);
    }
    problem.clamp(theta);
  }
  return outcome;
}

}  // namespace

MultiTaskGp MultiTaskGp::fit(const std::vector<Observation>& data, const TaskSet& tasks,
                             const FitConfig& config, FitReport* report) {
  tasks.validate();
  if (data.empty()) throw std::invalid_argument("fit needs at least one observation");
  const int dim = static_cast<int>(data.front().x.size());
  const int m = tasks.count();
  for (const auto& obs : data) {
    if (static_cast<int>(obs.x.size()) != dim) {
      throw std::invalid_argument("observations have inconsistent dimensions");
    }
    if (obs.task < 1 || obs.task > m) {
      throw std::invalid_argument("observation task outside the task set");
    }
  }

  double y_mean = 0.0;
  for (const auto& obs : data) y_mean += obs.y;
  y_mean /= static_cast<double>(data.size());
  double y_var = 0.0;
  for (const auto& obs : data) y_var += (obs.y - y_mean) * (obs.y - y_mean);
  y_var /= static_cast<double>(data.size());
  double y_std = std::sqrt(y_var);
  if (y_std < 1e-12) y_std = 1.0;

  FitProblem problem;
  problem.dim = dim;
  problem.tasks = m;
  problem.learn_noise = config.learn_noise;
  problem.signal_variance = 1.0;
  problem.task_index.reserve(data.size());
  problem.y_norm.resize(static_cast<Eigen::Index>(data.size()));
  for (std::size_t i = 0; i < data.size(); ++i) {
    problem.task_index.push_back(data[i].task - 1);
    problem.y_norm(static_cast<Eigen::Index>(i)) = (data[i].y - y_mean) / y_std;
  }
  problem.sq_diff.resize(static_cast<std::size_t>(dim));
  for (int j = 0; j < dim; ++j) {
    Eigen::MatrixXd d(data.size(), data.size());
    for (std::size_t a = 0; a < data.size(); ++a) {
      for (std::size_t b = 0; b < data.size(); ++b) {
        const double delta = data[a].x[static_cast<std::size_t>(j)] -
                             data[b].x[static_cast<std::size_t>(j)];
        d(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = delta * delta;
      }
    }
    problem.sq_diff[static_cast<std::size_t>(j)] = std::move(d);
  }

  // Noise priors live in accuracy units; optimization runs on normalized
  // targets, so rescale.
  Eigen::VectorXd noise_norm(m);
  for (int l = 0; l < m; ++l) {
    noise_norm(l) =
        std::max(tasks.noise_var[static_cast<std::size_t>(l)] / (y_std * y_std), 1e-6);
  }
  problem.fixed_noise = noise_norm;

  // Base initialization: mid-range lengthscales, half-correlated tasks.
  Hyperparams init;
  init.signal_variance = 1.0;
  init.lengthscales = Eigen::VectorXd::Constant(dim, 0.5);
  Eigen::MatrixXd base_cov =
      0.5 * Eigen::MatrixXd::Identity(m, m) + 0.5 * Eigen::MatrixXd::Ones(m, m);
  init.task_factor = Eigen::LLT<Eigen::MatrixXd>(base_cov).matrixL();
  init.noise_var = noise_norm;
  const Eigen::VectorXd theta_base = problem.pack(init);

  std::vector<Eigen::VectorXd> starts;
  starts.push_back(theta_base);
  for (int r = 1; r < std::max(config.restarts, 1); ++r) {
    std::mt19937_64 gen(rng::combine(config.seed, {0x666974ULL, static_cast<std::uint64_t>(r)}));
    rng::Normal normal;
    Eigen::VectorXd theta = theta_base;
    for (int p = 0; p < theta.size(); ++p) theta(p) += 0.5 * normal(gen);
    starts.push_back(theta);
  }
  if (config.warm_start.has_value() &&
      config.warm_start->input_dim() == dim && config.warm_start->task_count() == m) {
    Hyperparams warm = *config.warm_start;
    if (!config.learn_noise) warm.noise_var = noise_norm;
    starts.push_back(problem.pack(warm));
  }

  FitReport local_report;
  double best_lml = -std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_theta = theta_base;
  for (std::size_t r = 0; r < starts.size(); ++r) {
    const RestartOutcome outcome = run_restart(problem, starts[r], config);
    local_report.initial_lml.push_back(outcome.initial_lml);
    local_report.final_lml.push_back(outcome.best_lml);
    if (outcome.best_lml > best_lml) {
      best_lml = outcome.best_lml;
      best_theta = outcome.best_theta;
      local_report.chosen_restart = static_cast<int>(r);
    }
  }
  local_report.converged = std::isfinite(best_lml);
  if (report) *report = local_report;

  Hyperparams fitted = problem.unpack(best_theta);
  // Default predictive jitter: 1e-6 relative to the mean covariance diagonal.
  const Eigen::MatrixXd task_cov = fitted.task_cov();
  double mean_diag = 0.0;
  for (const auto& obs : data) {
    mean_diag += fitted.signal_variance * task_cov(obs.task - 1, obs.task - 1) +
                 fitted.noise_var(obs.task - 1);
  }
  mean_diag /= static_cast<double>(data.size());
  fitted.jitter = 1e-6 * mean_diag;

  return MultiTaskGp(std::move(fitted), data, y_mean, y_std);
}

}  // namespace bitcurve::gp
