#pragma once

#include <iosfwd>
#include <string>

#include "bitcurve/quant.hpp"

namespace bitcurve::io {

// "QTNS" tensor container, all fields little-endian:
//   magic "QTNS" | u32 version=1 | u32 ndim | ndim x u64 dims |
//   u32 dtype (1 = float32) | row-major payload
quant::Tensor read_qtns(std::istream& in, const std::string& origin);
quant::Tensor load_qtns(const std::string& path);
void write_qtns(std::ostream& out, const quant::Tensor& tensor);
void save_qtns(const std::string& path, const quant::Tensor& tensor);

}  // namespace bitcurve::io
