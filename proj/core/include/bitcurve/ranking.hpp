#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "bitcurve/curve.hpp"
#include "bitcurve/gp.hpp"
#include "bitcurve/netspec.hpp"
#include "bitcurve/pool.hpp"
#include "bitcurve/quant.hpp"

namespace bitcurve::rank {

// E(a, b, n) = a - (sum(b) - 4n) / k: every bit above a uniform-4 budget
// costs 1/k of accuracy, every bit below earns it back. k defaults to 100,
// i.e. one percentage point per bit with accuracies as fractions.
double effective_accuracy(double accuracy, const curve::BitConfig& bits, double k = 100.0);

// L = -a / sum(b): accuracy per bit, negated so smaller is better.
double naive_loss(double accuracy, const curve::BitConfig& bits);

struct RankedConfig {
  curve::CurveParams weights;
  curve::BitConfig bits;
  double predicted_accuracy = 0.0;  // posterior mean; may slightly leave [0,1]
  double predicted_std = 0.0;
  int bit_sum = 0;
  double memory_bytes = 0.0;
  double effective = 0.0;   // E at the configured k
  double naive = 0.0;       // naive accuracy-per-bit loss
};

struct RankOptions {
  double k = 100.0;
  std::size_t top_k = 10;
  double pessimism_beta = 0.0;  // rank by mean - beta * std when > 0
  curve::LayerGrid grid = curve::LayerGrid::kEndpoints;
  quant::SizeModel size_model;
};

// Core ranking over externally supplied predictions: sorted by -E ascending,
// ties by lower memory then lexicographic weights.
std::vector<RankedConfig> rank_configs(const std::vector<std::vector<double>>& points,
                                       curve::Basis basis, const std::vector<double>& means,
                                       const std::vector<double>& stds,
                                       const net::NetworkSpec& spec, const RankOptions& options);

// Predictions taken from the fitted model's target task over the pool.
std::vector<RankedConfig> rank_configs(const gp::MultiTaskGp& model,
                                       const search::CandidatePool& pool, curve::Basis basis,
                                       const net::NetworkSpec& spec, const gp::TaskSet& tasks,
                                       const RankOptions& options);

// Indices of the non-dominated points (no other point has <= memory and
// >= accuracy with one strict), in input order.
std::vector<std::size_t> pareto_front(
    const std::vector<std::pair<double, double>>& memory_accuracy);

}  // namespace bitcurve::rank
