#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "colprune/matrix.hpp"

namespace colprune {

enum class ScoreVariant {
  variance_aware,  // |W[:,j]| * |X[j,:]| * Var(X[j,:])
  wanda_sp,        // |W[:,j]| * |X[j,:]|
};

std::string to_string(ScoreVariant v);
ScoreVariant parse_score_variant(std::string_view name);

struct ScoreVector {
  std::vector<double> gamma;
  ScoreVariant variant;
};

// Per-input-column importance for w (d_out x d_in) given activations
// x (d_in x N).
ScoreVector score_columns(const Matrix& w, const Matrix& x, ScoreVariant variant,
                          VarianceEstimator estimator = VarianceEstimator::population);

struct PruneMask {
  std::vector<std::size_t> kept;     // sorted
  std::vector<std::size_t> dropped;  // sorted
  double ratio = 0.0;
  std::size_t d_in = 0;
};

// Number of units removed at ratio rho out of `count`: ceil(count * rho),
// with products that land within rounding noise of an integer snapped to it
// (10 * 0.3 drops 3, not 4).
std::size_t drop_count(std::size_t count, double rho);

// Keeps the highest-scoring columns. Ties keep the lower index. With
// group_size set, columns are partitioned into contiguous blocks of that
// size, each block scored by the sum of its members, and whole blocks are
// dropped: ceil(G * rho) of the G blocks.
//
// Throws ConfigError when rho is outside [0, 1), when the group size does
// not divide d_in, or when the rule would drop every column.
PruneMask select_mask(const ScoreVector& scores, double rho,
                      std::optional<std::size_t> group_size = std::nullopt);

}  // namespace colprune
