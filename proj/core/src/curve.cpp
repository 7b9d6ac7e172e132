#include "bitcurve/curve.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bitcurve::curve {

std::string basis_name(Basis basis) {
  return basis == Basis::kBezier ? "bezier" : "chebyshev";
}

Basis basis_from_name(const std::string& name) {
  if (name == "bezier") return Basis::kBezier;
  if (name == "chebyshev") return Basis::kChebyshev;
  throw std::invalid_argument("unknown curve basis: " + name);
}

void validate(const CurveParams& params) {
  if (params.weights.empty()) {
    throw std::domain_error("curve needs at least one weight");
  }
  for (double w : params.weights) {
    if (!(w >= 0.0 && w <= 1.0)) {
      throw std::domain_error("curve weight outside [0,1]: " + std::to_string(w));
    }
  }
}

std::vector<double> bernstein_features(int degree, double x) {
  if (degree < 0) throw std::domain_error("negative Bezier degree");
  std::vector<double> phi(static_cast<std::size_t>(degree) + 1);
  // Binomial coefficients by the multiplicative recurrence; degrees here are
  // single digits, so doubles are exact.
  double binom = 1.0;
  for (int j = 0; j <= degree; ++j) {
    if (j > 0) binom = binom * (degree - j + 1) / j;
    phi[static_cast<std::size_t>(j)] =
        binom * std::pow(1.0 - x, degree - j) * std::pow(x, j);
  }
  return phi;
}

std::vector<double> chebyshev_features(int count, double x) {
  if (count < 1) throw std::domain_error("Chebyshev series needs at least one term");
  std::vector<double> phi(static_cast<std::size_t>(count));
  phi[0] = 1.0;
  if (count > 1) phi[1] = x;
  for (int k = 2; k < count; ++k) {
    phi[static_cast<std::size_t>(k)] =
        2.0 * x * phi[static_cast<std::size_t>(k - 1)] - phi[static_cast<std::size_t>(k - 2)];
  }
  return phi;
}

double eval_bezier(const CurveParams& params, double x) {
  if (params.basis != Basis::kBezier) throw std::domain_error("params are not a Bezier curve");
  validate(params);
  if (!(x >= 0.0 && x <= 1.0)) {
    throw std::domain_error("Bezier argument outside [0,1]: " + std::to_string(x));
  }
  const int degree = params.dimension() - 1;
  const auto phi = bernstein_features(degree, x);
  double value = 0.0;
  for (std::size_t j = 0; j < phi.size(); ++j) value += params.weights[j] * phi[j];
  return value;
}

double eval_chebyshev(const CurveParams& params, double x) {
  if (params.basis != Basis::kChebyshev) {
    throw std::domain_error("params are not a Chebyshev series");
  }
  validate(params);
  if (!(x >= -1.0 && x <= 1.0)) {
    throw std::domain_error("Chebyshev argument outside [-1,1]: " + std::to_string(x));
  }
  const auto phi = chebyshev_features(params.dimension(), x);
  double value = 0.0;
  for (std::size_t j = 0; j < phi.size(); ++j) value += (params.weights[j] - 0.5) * phi[j];
  return (value + 1.0) / 2.0;
}

double eval_unit(const CurveParams& params, double t) {
  if (params.basis == Basis::kBezier) return eval_bezier(params, t);
  return eval_chebyshev(params, 2.0 * t - 1.0);
}

int constrain(double p_value) {
  if (!std::isfinite(p_value)) throw std::domain_error("non-finite curve value");
  const double scaled = std::clamp(8.0 * p_value + 1.0, 1.0, 8.0);
  // std::round rounds halfway cases away from zero, as required.
  return static_cast<int>(std::round(scaled));
}

std::string layer_grid_name(LayerGrid grid) {
  return grid == LayerGrid::kEndpoints ? "endpoints" : "unit_fraction";
}

LayerGrid layer_grid_from_name(const std::string& name) {
  if (name == "endpoints") return LayerGrid::kEndpoints;
  if (name == "unit_fraction") return LayerGrid::kUnitFraction;
  throw std::invalid_argument("unknown layer grid: " + name);
}

int BitConfig::sum() const {
  int total = 0;
  for (int b : bits) total += b;
  return total;
}

std::string BitConfig::digits() const {
  std::string out;
  out.reserve(bits.size());
  for (int b : bits) out.push_back(static_cast<char>('0' + b));
  return out;
}

void validate(const BitConfig& config) {
  if (config.bits.empty()) throw std::domain_error("bit configuration is empty");
  for (int b : config.bits) {
    if (b < 1 || b > 8) {
      throw std::domain_error("bit width outside [1,8]: " + std::to_string(b));
    }
  }
}

BitConfig bits_for_layers(const CurveParams& params, int layer_count, LayerGrid grid) {
  if (layer_count < 1) throw std::domain_error("layer count must be >= 1");
  BitConfig config;
  config.bits.reserve(static_cast<std::size_t>(layer_count));
  for (int i = 1; i <= layer_count; ++i) {
    double t = 0.0;
    if (grid == LayerGrid::kEndpoints) {
      t = layer_count > 1 ? static_cast<double>(i - 1) / (layer_count - 1) : 0.0;
    } else {
      t = static_cast<double>(i) / layer_count;
    }
    config.bits.push_back(constrain(eval_unit(params, t)));
  }
  return config;
}

namespace {

int parse_bit_digit(char c, const std::string& text) {
  if (c < '1' || c > '8') {
    throw std::invalid_argument("invalid bit digit '" + std::string(1, c) + "' in \"" + text + "\"");
  }
  return c - '0';
}

}  // namespace

BitConfig parse_bits(const std::string& text) {
  BitConfig config;
  if (text.empty()) throw std::invalid_argument("empty bit string");
  if (text.find(',') == std::string::npos && text.find('x') == std::string::npos) {
    for (char c : text) config.bits.push_back(parse_bit_digit(c, text));
    return config;
  }
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t comma = text.find(',', pos);
    if (comma == std::string::npos) comma = text.size();
    const std::string item = text.substr(pos, comma - pos);
    if (item.empty()) throw std::invalid_argument("empty item in bit list \"" + text + "\"");
    const std::size_t x = item.find('x');
    if (x == std::string::npos) {
      const int bit = std::stoi(item);
      if (bit < 1 || bit > 8) throw std::invalid_argument("bit outside [1,8]: " + item);
      config.bits.push_back(bit);
    } else {
      const int bit = std::stoi(item.substr(0, x));
      const int count = std::stoi(item.substr(x + 1));
      if (bit < 1 || bit > 8 || count < 1) {
        throw std::invalid_argument("bad run-length item: " + item);
      }
      config.bits.insert(config.bits.end(), static_cast<std::size_t>(count), bit);
    }
    pos = comma + 1;
  }
  return config;
}

}  // namespace bitcurve::curve
