#include "bitcurve/objective.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "bitcurve/qtns.hpp"
#include "bitcurve/quant.hpp"
#include "bitcurve/rng.hpp"

namespace bitcurve::objective {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

double task_param(const std::vector<double>& values, int task, double fallback) {
  if (values.empty()) return fallback;
  if (task < 1 || task > static_cast<int>(values.size())) {
    throw std::invalid_argument("task index outside per-task parameter list");
  }
  return values[static_cast<std::size_t>(task - 1)];
}

// One standard normal draw keyed to the request; stateless across calls.
double request_noise(const Request& request) {
  std::uint64_t key = rng::combine(request.seed, {static_cast<std::uint64_t>(request.task),
                                                  static_cast<std::uint64_t>(request.epochs)});
  key = rng::combine(key, rng::hash_doubles(request.weights.weights));
  for (int b : request.bits.bits) key = rng::combine(key, static_cast<std::uint64_t>(b));
  std::mt19937_64 gen(key);
  rng::Normal normal;
  return normal(gen);
}

double shape_term(const std::vector<double>& weights) {
  double sum = 0.0;
  for (double w : weights) sum += std::sin(kTwoPi * w);
  return weights.empty() ? 0.0 : sum / static_cast<double>(weights.size());
}

double apply_fidelity(double target_value, const Request& request, int task_count,
                      double offset, const std::vector<double>& shape_coeff,
                      const std::vector<double>& noise_sd) {
  const int gap = task_count - request.task;
  double value = target_value - offset * gap;
  const double gamma = task_param(shape_coeff, request.task, 0.0);
  if (gamma != 0.0) value -= gamma * shape_term(request.weights.weights);
  const double sd = task_param(noise_sd, request.task, 0.0);
  if (sd > 0.0) value += sd * request_noise(request);
  return std::clamp(value, 0.0, 1.0);
}

}  // namespace

std::string status_name(Status status) {
  switch (status) {
    case Status::kOk:
      return "OK";
    case Status::kFailed:
      return "FAILED";
    case Status::kTimeout:
      return "TIMEOUT";
  }
  return "FAILED";
}

SyntheticObjective::SyntheticObjective(SyntheticParams params) : params_(std::move(params)) {
  if (params_.task_count < 1) throw std::invalid_argument("task count must be >= 1");
}

double SyntheticObjective::target_value(const std::vector<double>& weights) const {
  double dist_sq = 0.0;
  for (std::size_t j = 0; j < weights.size(); ++j) {
    const double opt = j < params_.optimum.size() ? params_.optimum[j] : 0.5;
    dist_sq += (weights[j] - opt) * (weights[j] - opt);
  }
  return params_.peak_accuracy - params_.curvature * dist_sq;
}

Result SyntheticObjective::evaluate(const Request& request) {
  if (request.task < 1 || request.task > params_.task_count) {
    return {0.0, Status::kFailed, "task outside the ladder", {}};
  }
  Result result;
  result.accuracy =
      apply_fidelity(target_value(request.weights.weights), request, params_.task_count,
                     params_.fidelity_offset, params_.shape_coeff, params_.noise_sd);
  return result;
}

SurrogateObjective::SurrogateObjective(std::vector<std::string> layer_files,
                                       SurrogateParams params)
    : layer_files_(std::move(layer_files)), params_(std::move(params)) {
  if (layer_files_.empty()) throw std::invalid_argument("surrogate needs layer snapshots");
}

Result SurrogateObjective::evaluate(const Request& request) {
  if (request.bits.layer_count() != static_cast<int>(layer_files_.size())) {
    return {0.0, Status::kFailed,
            "bit configuration does not match snapshot layer count", {}};
  }
  double snr_sum = 0.0;
  for (std::size_t i = 0; i < layer_files_.size(); ++i) {
    quant::Tensor tensor;
    try {
      tensor = io::load_qtns(layer_files_[i]);
    } catch (const std::exception& e) {
      return {0.0, Status::kFailed, e.what(), {}};
    }
    const auto q = quant::quantize_weights(tensor, request.bits.bits[i], params_.block_size);
    double snr = quant::reconstruction_snr(tensor, q);
    if (quant::is_no_signal(snr)) snr = 0.0;
    snr_sum += std::clamp(snr, 0.0, params_.snr_cap);
  }
  const double mean_snr = snr_sum / static_cast<double>(layer_files_.size());
  const double logistic = 1.0 / (1.0 + std::exp(-(mean_snr - params_.snr_mid) / params_.snr_scale));
  const double target =
      params_.floor_accuracy + (params_.ceil_accuracy - params_.floor_accuracy) * logistic;

  Result result;
  result.accuracy = apply_fidelity(target, request, params_.task_count,
                                   params_.fidelity_offset, {}, params_.noise_sd);
  return result;
}

}  // namespace bitcurve::objective
