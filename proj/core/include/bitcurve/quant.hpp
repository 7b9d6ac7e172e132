#pragma once

#include <cstdint>
#include <vector>

#include "bitcurve/curve.hpp"
#include "bitcurve/netspec.hpp"

namespace bitcurve::quant {

// Dense float tensor, row-major. Rank-4 tensors are interpreted as
// (out_channels, in_channels, kernel_h, kernel_w); blocking runs along the
// in_channels (depth) axis. Tensors of lower rank are blocked as one long
// depth row.
struct Tensor {
  std::vector<std::int64_t> dims;
  std::vector<float> data;

  std::int64_t numel() const;
  static Tensor zeros(std::vector<std::int64_t> dims);
};

// (outer, depth, inner) view of a tensor for depthwise blocking; element
// (o, c, s) sits at ((o * depth) + c) * inner + s.
struct BlockShape {
  std::int64_t outer = 1;
  std::int64_t depth = 1;
  std::int64_t inner = 1;
};

BlockShape blocking_shape(const std::vector<std::int64_t>& dims);

// DSConv decomposition of one layer: integer kernel (VQK) plus one scale
// per depthwise block (KDS).
struct QuantizedLayer {
  int bit_width = 8;
  int block_size = 32;
  std::vector<std::int64_t> source_dims;
  std::vector<std::int32_t> vqk;   // same shape as the source tensor
  std::vector<double> kds;         // depth axis shrunk to ceil(depth / B)
  std::vector<std::int64_t> kds_dims;
};

// Per block of size B along the depth axis:
//   s    = 2^(b-1) / max|w|
//   vqk  = clamp(floor(w * s), -2^(b-1), 2^(b-1) - 1)
//   kds  = sum(w * vqk) / sum(vqk^2)   (least-squares scale)
// All-zero blocks (or blocks whose vqk vanishes) get kds = 0.
QuantizedLayer quantize_weights(const Tensor& t, int bit_width, int block_size = 32);

Tensor dequantize(const QuantizedLayer& q);

// 10 log10(sum w^2 / sum (w - w_hat)^2). Exact reconstruction gives +inf;
// an all-zero original carries no signal and gives NaN.
double reconstruction_snr(const Tensor& original, const QuantizedLayer& q);
bool is_no_signal(double snr);

// Block floating point: one shared exponent per depthwise block, b-bit
// two's-complement mantissas, value = m * 2^(e - (b - 2)).
struct BfpTensor {
  int bit_width = 8;
  int block_size = 32;
  std::vector<std::int64_t> source_dims;
  std::vector<std::int32_t> shared_exponents;  // one per block
  std::vector<std::int32_t> mantissas;         // same shape as the source

  // Exponent assigned to all-zero blocks.
  static constexpr std::int32_t kZeroBlockExponent = -127;
};

BfpTensor quantize_activation_bfp(const Tensor& t, int bit_width, int block_size = 32);
Tensor bfp_dequantize(const BfpTensor& t);

struct SizeModel {
  int kds_bits = 16;   // storage precision of each block scale
  int block_size = 32;
};

// Bytes for the whole network: CONV layers cost params * (b + kds_bits/B) / 8,
// FC layers stay at 4 bytes per parameter. `bits` must match the CONV count.
double model_size_bytes(const net::NetworkSpec& spec, const curve::BitConfig& bits,
                        const SizeModel& model = {});

}  // namespace bitcurve::quant
