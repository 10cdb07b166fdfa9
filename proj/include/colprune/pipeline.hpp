#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "colprune/compensation.hpp"
#include "colprune/matrix.hpp"
#include "colprune/model.hpp"
#include "colprune/scoring.hpp"

namespace colprune {

// Where a layer's calibration input comes from.
enum class ActivationMode {
  original,    // the unpruned network
  propagated,  // the network with every earlier layer already pruned
};

std::string to_string(ActivationMode m);
ActivationMode parse_activation_mode(std::string_view name);

struct PruneConfig {
  double ratio = 0.2;
  std::map<std::string, double> layer_ratios;  // per-layer override, keyed by name
  ScoreVariant score_variant = ScoreVariant::variance_aware;
  CompensationVariant compensation_variant = CompensationVariant::rot;
  ActivationMode activation_mode = ActivationMode::propagated;
  VarianceEstimator variance_estimator = VarianceEstimator::population;
  double rcond = kDefaultRcond;
  // Also delete the producer rows that a pruned layer no longer reads.
  bool propagate_width = false;
  std::uint64_t seed = 0;

  double ratio_for(const std::string& layer) const;
  void validate() const;
};

// x holds the rows of the layer input that its weight reads (d_in x N) and
// y = W x without bias (d_out x N).
struct CalibrationBatch {
  Matrix x;
  Matrix y;
  std::size_t n_tokens;
};

struct PruneReport {
  std::string layer;
  double ratio = 0.0;
  std::size_t kept = 0;
  double residual_before = 0.0;  // ||Y - Z||_F
  double residual_after = 0.0;   // ||Y - compensated||_F
  CompensationVariant variant = CompensationVariant::none;
  double seconds = 0.0;
};

struct RunReport {
  std::vector<PruneReport> layers;
  double total_seconds = 0.0;

  double summed_residual_after() const;
  double mean_seconds_per_layer() const;
};

CalibrationBatch make_batch(const LayerRecord& layer, const Matrix& input);

// One batch per prunable layer, in order. Y always uses the layers of
// `model`. In propagated mode X is taken from `pruned` (same layer count,
// not width-propagated) when given; without it nothing has been pruned yet
// and both modes agree.
std::vector<CalibrationBatch> collect_activations(const ModelSpec& model, const Matrix& calib_inputs,
                                                  ActivationMode mode, const ModelSpec* pruned = nullptr);

struct Decomposition {
  Matrix z;             // W_K X_K
  Matrix dropped_term;  // W_D X_D (zeros when nothing is dropped)
};

Decomposition decompose(const Matrix& w, const Matrix& x, const PruneMask& mask);

struct LayerPruneResult {
  LayerRecord layer;
  PruneReport report;
  PruneMask mask;
  CompensationResult compensation;
};

// Score, select, decompose, fit and fold the map into the kept weights.
// Layers with compensate_here == false are pruned without compensation.
LayerPruneResult prune_layer(const LayerRecord& layer, const CalibrationBatch& batch,
                             const PruneConfig& config);

struct PruneOutcome {
  ModelSpec model;
  RunReport report;
};

// Greedy, layer by layer, in order. Passthrough layers are copied.
PruneOutcome prune_model(const ModelSpec& model, const Matrix& calib_inputs, const PruneConfig& config);

// Removes output rows of each layer that the following layer does not read
// and clears the follower's input index. The model function is unchanged.
void propagate_width(ModelSpec& model);

struct EvalMetrics {
  double relative_error = 0.0;  // ||f(X) - f_ref(X)||_F / ||f_ref(X)||_F
  // Per-layer hidden-state residual; empty entries where widths differ.
  std::vector<std::optional<double>> layer_residuals;
};

EvalMetrics evaluate(const ModelSpec& model, const Matrix& eval_inputs, const ModelSpec& reference);

}  // namespace colprune
