#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bitcurve/curve.hpp"

namespace bitcurve::objective {

enum class Status { kOk, kFailed, kTimeout };

std::string status_name(Status status);

struct Request {
  curve::BitConfig bits;
  curve::CurveParams weights;
  int task = 1;
  int epochs = 0;
  std::uint64_t seed = 0;
};

struct Result {
  double accuracy = 0.0;  // meaningful only when status == kOk
  Status status = Status::kOk;
  std::string diagnostic;
  std::optional<double> cost_seconds;  // as reported by external trainers

  bool ok() const { return status == Status::kOk; }
};

class Objective {
 public:
  virtual ~Objective() = default;
  virtual Result evaluate(const Request& request) = 0;
  virtual std::string name() const = 0;
};

// Deterministic closed-form stand-in for trained-network accuracy:
//   f_m(w) = peak - curvature * |w - optimum|^2
//   f_l(w) = f_m(w) - offset*(m-l) - shape[l-1]*h(w) + noise_sd[l-1]*N(0,1)
// with h(w) = mean_j sin(2 pi w_j); results are clamped to [0,1] and the
// noise draw depends only on (request.seed, task, epochs, weights, bits).
struct SyntheticParams {
  double peak_accuracy = 0.9;
  double curvature = 0.5;
  std::vector<double> optimum;       // defaults to 0.5 per coordinate
  double fidelity_offset = 0.02;
  std::vector<double> shape_coeff;   // per task; empty = all zero
  std::vector<double> noise_sd;      // per task; empty = all zero
  int task_count = 1;
};

class SyntheticObjective : public Objective {
 public:
  explicit SyntheticObjective(SyntheticParams params);
  Result evaluate(const Request& request) override;
  std::string name() const override { return "synthetic"; }

  // Noise-free target-task value (the quantity a search should maximize).
  double target_value(const std::vector<double>& weights) const;

 private:
  SyntheticParams params_;
};

// Quantizes a real weight snapshot (one QTNS file per CONV layer) at the
// requested bit widths and maps the mean per-layer reconstruction SNR
// through a logistic curve to a pseudo-accuracy:
//   acc_m = floor + (ceil - floor) * sigmoid((mean_snr - snr_mid) / snr_scale)
// Per-layer SNR is clamped to [0, snr_cap] first, so exact layers saturate.
// Fidelity offset and noise behave exactly as in SyntheticObjective.
struct SurrogateParams {
  double floor_accuracy = 0.10;
  double ceil_accuracy = 0.95;
  double snr_mid = 14.0;
  double snr_scale = 6.0;
  double snr_cap = 60.0;
  double fidelity_offset = 0.02;
  std::vector<double> noise_sd;  // per task; empty = all zero
  int task_count = 1;
  int block_size = 32;
};

class SurrogateObjective : public Objective {
 public:
  SurrogateObjective(std::vector<std::string> layer_files, SurrogateParams params);
  Result evaluate(const Request& request) override;
  std::string name() const override { return "surrogate"; }

 private:
  std::vector<std::string> layer_files_;
  SurrogateParams params_;
};

// Bridges to a real trainer process. One JSON object per line over the
// standard streams:
//   stdin:  {"bits":[...],"epochs":E,"seed":S}
//   stdout: {"accuracy":A,"cost_seconds":C}
// Nonzero exit or a malformed response fails the evaluation; exceeding the
// deadline kills the process and reports a timeout.
class ExternalObjective : public Objective {
 public:
  ExternalObjective(std::string command, double timeout_seconds);
  Result evaluate(const Request& request) override;
  std::string name() const override { return "external"; }

 private:
  std::string command_;
  double timeout_seconds_;
};

}  // namespace bitcurve::objective
