#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace bitcurve::net {

enum class LayerKind { kConv, kFc };

struct Layer {
  std::string name;
  LayerKind kind = LayerKind::kConv;
  std::int64_t param_count = 0;
};

// Layered-network description used for memory accounting. Only CONV layers
// are quantized; FC layers stay at FP32.
struct NetworkSpec {
  std::string dataset;
  std::vector<Layer> layers;

  int conv_count() const;
  std::vector<std::int64_t> conv_param_counts() const;
  std::int64_t total_params() const;
  void validate() const;
};

// Text format, one layer per line:
//   # qnetspec v1
//   dataset cifar10
//   layer conv1 CONV 1728
//   layer linear FC 5130
NetworkSpec parse_netspec(std::istream& in, const std::string& origin);
NetworkSpec load_netspec(const std::string& path);
void write_netspec(std::ostream& out, const NetworkSpec& spec);

}  // namespace bitcurve::net
