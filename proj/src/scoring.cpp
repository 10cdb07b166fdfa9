#include "colprune/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "colprune/error.hpp"

namespace colprune {

std::string to_string(ScoreVariant v) {
  switch (v) {
    case ScoreVariant::variance_aware:
      return "variance_aware";
    case ScoreVariant::wanda_sp:
      return "wanda_sp";
  }
  return "unknown";
}

ScoreVariant parse_score_variant(std::string_view name) {
  if (name == "variance_aware") return ScoreVariant::variance_aware;
  if (name == "wanda_sp") return ScoreVariant::wanda_sp;
  throw ConfigError("unknown score variant '" + std::string(name) + "'");
}

ScoreVector score_columns(const Matrix& w, const Matrix& x, ScoreVariant variant,
                          VarianceEstimator estimator) {
  if (w.cols() != x.rows()) {
    throw ShapeError("score_columns: weight has " + std::to_string(w.cols()) +
                     " columns but activations have " + std::to_string(x.rows()) + " rows");
  }
  ScoreVector out{col_norm(w), variant};
  const auto xnorm = row_norm(x);
  for (std::size_t j = 0; j < out.gamma.size(); ++j) out.gamma[j] *= xnorm[j];
  if (variant == ScoreVariant::variance_aware) {
    const auto var = row_variance(x, estimator);
    for (std::size_t j = 0; j < out.gamma.size(); ++j) out.gamma[j] *= var[j];
  }
  return out;
}

std::size_t drop_count(std::size_t count, double rho) {
  if (!(rho >= 0.0 && rho < 1.0)) {
    throw ConfigError("pruning ratio must lie in [0, 1), got " + std::to_string(rho));
  }
  const double exact = static_cast<double>(count) * rho;
  const double nearest = std::round(exact);
  if (std::abs(exact - nearest) <= 1e-9 * std::max(1.0, exact)) {
    return static_cast<std::size_t>(nearest);
  }
  return static_cast<std::size_t>(std::ceil(exact));
}

namespace {

// Indices [0, n) ordered by descending score, ties by ascending index.
std::vector<std::size_t> rank_descending(const std::vector<double>& score) {
  std::vector<std::size_t> order(score.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return score[a] > score[b]; });
  return order;
}

}  // namespace

PruneMask select_mask(const ScoreVector& scores, double rho, std::optional<std::size_t> group_size) {
  const std::size_t d_in = scores.gamma.size();
  if (d_in == 0) throw ConfigError("select_mask: empty score vector");
  for (double g : scores.gamma) {
    if (!std::isfinite(g)) throw NumericError("select_mask: non-finite score");
  }

  PruneMask mask;
  mask.ratio = rho;
  mask.d_in = d_in;

  std::vector<bool> keep(d_in, true);
  if (group_size) {
    const std::size_t gs = *group_size;
    if (gs == 0 || d_in % gs != 0) {
      throw ConfigError("select_mask: group size " + std::to_string(gs) + " does not divide width " +
                        std::to_string(d_in));
    }
    const std::size_t groups = d_in / gs;
    const std::size_t drop = drop_count(groups, rho);
    if (drop >= groups) throw ConfigError("select_mask: ratio would drop every group");
    std::vector<double> group_score(groups, 0.0);
    for (std::size_t j = 0; j < d_in; ++j) group_score[j / gs] += scores.gamma[j];
    const auto order = rank_descending(group_score);
    for (std::size_t r = groups - drop; r < groups; ++r) {
      for (std::size_t j = order[r] * gs; j < (order[r] + 1) * gs; ++j) keep[j] = false;
    }
  } else {
    const std::size_t drop = drop_count(d_in, rho);
    if (drop >= d_in) throw ConfigError("select_mask: ratio would drop every column");
    const auto order = rank_descending(scores.gamma);
    for (std::size_t r = d_in - drop; r < d_in; ++r) keep[order[r]] = false;
  }

  for (std::size_t j = 0; j < d_in; ++j) (keep[j] ? mask.kept : mask.dropped).push_back(j);
  return mask;
}

}  // namespace colprune
