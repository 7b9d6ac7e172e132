#include "bitcurve/quant.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace bitcurve::quant {

namespace {

void check_bit_width(int bit_width) {
  if (bit_width < 1 || bit_width > 8) {
    throw std::invalid_argument("bit width outside [1,8]: " + std::to_string(bit_width));
  }
}

void check_block_size(int block_size) {
  if (block_size < 1) {
    throw std::invalid_argument("block size must be >= 1: " + std::to_string(block_size));
  }
}

}  // namespace

std::int64_t Tensor::numel() const {
  std::int64_t n = 1;
  for (auto d : dims) n *= d;
  return dims.empty() ? 0 : n;
}

Tensor Tensor::zeros(std::vector<std::int64_t> dims) {
  Tensor t;
  t.dims = std::move(dims);
  t.data.assign(static_cast<std::size_t>(t.numel()), 0.0f);
  return t;
}

BlockShape blocking_shape(const std::vector<std::int64_t>& dims) {
  if (dims.empty()) throw std::invalid_argument("tensor has no dimensions");
  for (auto d : dims) {
    if (d < 1) throw std::invalid_argument("tensor dimension must be >= 1");
  }
  BlockShape shape;
  if (dims.size() == 4) {
    shape.outer = dims[0];
    shape.depth = dims[1];
    shape.inner = dims[2] * dims[3];
  } else {
    std::int64_t n = 1;
    for (auto d : dims) n *= d;
    shape.depth = n;
  }
  return shape;
}

QuantizedLayer quantize_weights(const Tensor& t, int bit_width, int block_size) {
  check_bit_width(bit_width);
  check_block_size(block_size);
  if (t.numel() != static_cast<std::int64_t>(t.data.size())) {
    throw std::invalid_argument("tensor data length does not match its shape");
  }

  const BlockShape shape = blocking_shape(t.dims);
  const std::int64_t blocks_per_row = (shape.depth + block_size - 1) / block_size;

  QuantizedLayer q;
  q.bit_width = bit_width;
  q.block_size = block_size;
  q.source_dims = t.dims;
  q.vqk.assign(t.data.size(), 0);
  q.kds.assign(static_cast<std::size_t>(shape.outer * blocks_per_row * shape.inner), 0.0);
  if (t.dims.size() == 4) {
    q.kds_dims = {t.dims[0], blocks_per_row, t.dims[2], t.dims[3]};
  } else {
    q.kds_dims = {blocks_per_row};
  }

  const double q_max = std::exp2(bit_width - 1);        // 2^(b-1)
  const std::int32_t lo = static_cast<std::int32_t>(-q_max);
  const std::int32_t hi = static_cast<std::int32_t>(q_max - 1);

  for (std::int64_t o = 0; o < shape.outer; ++o) {
    for (std::int64_t s = 0; s < shape.inner; ++s) {
      for (std::int64_t blk = 0; blk < blocks_per_row; ++blk) {
        const std::int64_t c0 = blk * block_size;
        const std::int64_t c1 = std::min<std::int64_t>(c0 + block_size, shape.depth);

        auto at = [&](std::int64_t c) -> std::size_t {
          return static_cast<std::size_t>((o * shape.depth + c) * shape.inner + s);
        };

        double max_abs = 0.0;
        for (std::int64_t c = c0; c < c1; ++c) {
          max_abs = std::max(max_abs, std::abs(static_cast<double>(t.data[at(c)])));
        }

        const std::size_t kds_index =
            static_cast<std::size_t>((o * blocks_per_row + blk) * shape.inner + s);
        if (max_abs == 0.0) {
          continue;  // zero block: vqk stays 0, kds stays 0
        }

        const double scale = q_max / max_abs;
        double dot = 0.0;
        double sq = 0.0;
        for (std::int64_t c = c0; c < c1; ++c) {
          const double w = static_cast<double>(t.data[at(c)]);
          const double scaled = std::floor(w * scale);
          const std::int32_t v = static_cast<std::int32_t>(
              std::clamp(scaled, static_cast<double>(lo), static_cast<double>(hi)));
          q.vqk[at(c)] = v;
          dot += w * v;
          sq += static_cast<double>(v) * v;
        }
        q.kds[kds_index] = sq > 0.0 ? dot / sq : 0.0;
      }
    }
  }
  return q;
}

Tensor dequantize(const QuantizedLayer& q) {
  Tensor out;
  out.dims = q.source_dims;
  out.data.assign(q.vqk.size(), 0.0f);

  const BlockShape shape = blocking_shape(q.source_dims);
  const std::int64_t blocks_per_row = (shape.depth + q.block_size - 1) / q.block_size;
  for (std::int64_t o = 0; o < shape.outer; ++o) {
    for (std::int64_t s = 0; s < shape.inner; ++s) {
      for (std::int64_t c = 0; c < shape.depth; ++c) {
        const std::int64_t blk = c / q.block_size;
        const std::size_t i = static_cast<std::size_t>((o * shape.depth + c) * shape.inner + s);
        const std::size_t k =
            static_cast<std::size_t>((o * blocks_per_row + blk) * shape.inner + s);
        out.data[i] = static_cast<float>(q.kds[k] * q.vqk[i]);
      }
    }
  }
  return out;
}

double reconstruction_snr(const Tensor& original, const QuantizedLayer& q) {
  if (original.dims != q.source_dims) {
    throw std::invalid_argument("tensor shape does not match quantized layer");
  }
  const Tensor rebuilt = dequantize(q);
  double signal = 0.0;
  double error = 0.0;
  for (std::size_t i = 0; i < original.data.size(); ++i) {
    const double w = static_cast<double>(original.data[i]);
    const double e = w - static_cast<double>(rebuilt.data[i]);
    signal += w * w;
    error += e * e;
  }
  if (signal == 0.0) return std::numeric_limits<double>::quiet_NaN();
  if (error == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(signal / error);
}

bool is_no_signal(double snr) { return std::isnan(snr); }

BfpTensor quantize_activation_bfp(const Tensor& t, int bit_width, int block_size) {
  check_bit_width(bit_width);
  check_block_size(block_size);

  const BlockShape shape = blocking_shape(t.dims);
  const std::int64_t blocks_per_row = (shape.depth + block_size - 1) / block_size;

  BfpTensor b;
  b.bit_width = bit_width;
  b.block_size = block_size;
  b.source_dims = t.dims;
  b.mantissas.assign(t.data.size(), 0);
  b.shared_exponents.assign(
      static_cast<std::size_t>(shape.outer * blocks_per_row * shape.inner),
      BfpTensor::kZeroBlockExponent);

  const double m_lo = -std::exp2(bit_width - 1);
  const double m_hi = std::exp2(bit_width - 1) - 1.0;

  for (std::int64_t o = 0; o < shape.outer; ++o) {
    for (std::int64_t s = 0; s < shape.inner; ++s) {
      for (std::int64_t blk = 0; blk < blocks_per_row; ++blk) {
        const std::int64_t c0 = blk * block_size;
        const std::int64_t c1 = std::min<std::int64_t>(c0 + block_size, shape.depth);
        auto at = [&](std::int64_t c) -> std::size_t {
          return static_cast<std::size_t>((o * shape.depth + c) * shape.inner + s);
        };

        double max_abs = 0.0;
        for (std::int64_t c = c0; c < c1; ++c) {
          max_abs = std::max(max_abs, std::abs(static_cast<double>(t.data[at(c)])));
        }
        const std::size_t e_index =
            static_cast<std::size_t>((o * blocks_per_row + blk) * shape.inner + s);
        if (max_abs == 0.0) continue;

        const int exponent = std::ilogb(max_abs);
        b.shared_exponents[e_index] = exponent;
        // One mantissa step is 2^(e - (b-2)).
        const double step = std::exp2(exponent - (bit_width - 2));
        for (std::int64_t c = c0; c < c1; ++c) {
          const double m = std::round(static_cast<double>(t.data[at(c)]) / step);
          b.mantissas[at(c)] = static_cast<std::int32_t>(std::clamp(m, m_lo, m_hi));
        }
      }
    }
  }
  return b;
}

Tensor bfp_dequantize(const BfpTensor& t) {
  Tensor out;
  out.dims = t.source_dims;
  out.data.assign(t.mantissas.size(), 0.0f);

  const BlockShape shape = blocking_shape(t.source_dims);
  const std::int64_t blocks_per_row = (shape.depth + t.block_size - 1) / t.block_size;
  for (std::int64_t o = 0; o < shape.outer; ++o) {
    for (std::int64_t s = 0; s < shape.inner; ++s) {
      for (std::int64_t c = 0; c < shape.depth; ++c) {
        const std::int64_t blk = c / t.block_size;
        const std::size_t i = static_cast<std::size_t>((o * shape.depth + c) * shape.inner + s);
        const std::size_t k =
            static_cast<std::size_t>((o * blocks_per_row + blk) * shape.inner + s);
        const double step = std::exp2(t.shared_exponents[k] - (t.bit_width - 2));
        out.data[i] = static_cast<float>(t.mantissas[i] * step);
      }
    }
  }
  return out;
}

double model_size_bytes(const net::NetworkSpec& spec, const curve::BitConfig& bits,
                        const SizeModel& model) {
  const auto conv_params = spec.conv_param_counts();
  if (static_cast<int>(conv_params.size()) != bits.layer_count()) {
    throw std::invalid_argument(
        "bit configuration has " + std::to_string(bits.layer_count()) +
        " entries but the network has " + std::to_string(conv_params.size()) +
        " CONV layers");
  }
  curve::validate(bits);

  double total = 0.0;
  std::size_t conv_index = 0;
  const double kds_overhead =
      static_cast<double>(model.kds_bits) / static_cast<double>(model.block_size);
  for (const auto& layer : spec.layers) {
    if (layer.kind == net::LayerKind::kConv) {
      const double bits_per_weight = bits.bits[conv_index++] + kds_overhead;
      total += static_cast<double>(layer.param_count) * bits_per_weight / 8.0;
    } else {
      total += static_cast<double>(layer.param_count) * 4.0;
    }
  }
  return total;
}

}  // namespace bitcurve::quant
