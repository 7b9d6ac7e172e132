#include "bitcurve/pool.hpp"

#include <stdexcept>

namespace bitcurve::search {

namespace {

constexpr int kPrimes[] = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29,
                           31, 37, 41, 43, 47, 53, 59, 61, 67, 71};

double radical_inverse(int base, int index) {
  double result = 0.0;
  double fraction = 1.0 / base;
  while (index > 0) {
    result += (index % base) * fraction;
    index /= base;
    fraction /= base;
  }
  return result;
}

}  // namespace

CandidatePool halton_pool(int dimension, int size) {
  if (dimension < 1 || dimension > static_cast<int>(std::size(kPrimes))) {
    throw std::invalid_argument("pool dimension out of range");
  }
  if (size < 2) throw std::invalid_argument("pool needs at least two points");
  CandidatePool pool;
  pool.points.reserve(static_cast<std::size_t>(size));
  for (int i = 1; i <= size; ++i) {
    std::vector<double> point(static_cast<std::size_t>(dimension));
    for (int j = 0; j < dimension; ++j) {
      point[static_cast<std::size_t>(j)] = radical_inverse(kPrimes[j], i);
    }
    pool.points.push_back(std::move(point));
  }
  return pool;
}

int default_pool_size(int dimension) {
  if (dimension <= 2) return 256;
  if (dimension <= 4) return 1024;
  return 2048;
}

}  // namespace bitcurve::search
