#pragma once

#include <string>
#include <vector>

namespace bitcurve::curve {

enum class Basis { kBezier, kChebyshev };

std::string basis_name(Basis basis);
Basis basis_from_name(const std::string& name);

// Hyperparameter vector of a bit-distribution curve. All weights live in
// [0, 1]. A Bezier curve of degree g carries g+1 weights; a Chebyshev
// series of order d carries d weights multiplying T_0..T_{d-1}.
struct CurveParams {
  Basis basis = Basis::kBezier;
  std::vector<double> weights;

  int dimension() const { return static_cast<int>(weights.size()); }
};

// Throws std::domain_error when a weight leaves [0,1] or the vector is empty.
void validate(const CurveParams& params);

// Bernstein feature vector of the given degree at x in [0,1]:
// phi_j(x) = C(g,j) (1-x)^(g-j) x^j. Components are nonnegative and sum to 1.
std::vector<double> bernstein_features(int degree, double x);

// [T_0(x), ..., T_{count-1}(x)] by the three-term recurrence
// T_{n+1}(x) = 2 x T_n(x) - T_{n-1}(x).
std::vector<double> chebyshev_features(int count, double x);

// B(x; w) = w . phi(x) for x in [0,1]; stays in [0,1].
double eval_bezier(const CurveParams& params, double x);

// T(x; w) = ((w - 0.5) . phi_d(x) + 1) / 2 for x in [-1,1]; may leave [0,1],
// the constrain() step absorbs that.
double eval_chebyshev(const CurveParams& params, double x);

// Curve value at unit-grid position t in [0,1]; Chebyshev maps t -> 2t - 1.
double eval_unit(const CurveParams& params, double t);

// g: clamp-and-round map from a curve value to a bit width,
// round(clamp(8 p + 1, 1, 8)) with half-away-from-zero rounding.
int constrain(double p_value);

enum class LayerGrid {
  // t_i = (i-1)/(n-1): curve endpoints land on the first and last layer.
  kEndpoints,
  // t_i = i/n, as a strict reading of the constrained problem.
  kUnitFraction,
};

std::string layer_grid_name(LayerGrid grid);
LayerGrid layer_grid_from_name(const std::string& name);

// Per-layer bit widths, each in {1..8}.
struct BitConfig {
  std::vector<int> bits;

  int layer_count() const { return static_cast<int>(bits.size()); }
  int sum() const;
  // Compact digit string, e.g. "6554433": the display form used in reports.
  std::string digits() const;
};

void validate(const BitConfig& config);

// Evaluates the curve on the layer grid and constrains each value.
BitConfig bits_for_layers(const CurveParams& params, int layer_count,
                          LayerGrid grid = LayerGrid::kEndpoints);

// Accepts "4443321", "6,5,5,4" and run-length items like "4x21,3x27,2x16".
BitConfig parse_bits(const std::string& text);

}  // namespace bitcurve::curve
