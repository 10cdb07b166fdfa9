#include "colprune/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

#include "colprune/error.hpp"

namespace colprune {

std::string to_string(ActivationMode m) { return m == ActivationMode::original ? "original" : "propagated"; }

ActivationMode parse_activation_mode(std::string_view name) {
  if (name == "original") return ActivationMode::original;
  if (name == "propagated") return ActivationMode::propagated;
  throw ConfigError("unknown activation mode '" + std::string(name) + "'");
}

double PruneConfig::ratio_for(const std::string& layer) const {
  const auto it = layer_ratios.find(layer);
  return it == layer_ratios.end() ? ratio : it->second;
}

void PruneConfig::validate() const {
  const auto check = [](double r) {
    if (!(r >= 0.0 && r < 1.0)) throw ConfigError("pruning ratio must lie in [0, 1), got " + std::to_string(r));
  };
  check(ratio);
  for (const auto& [name, r] : layer_ratios) check(r);
  if (!(rcond > 0.0)) throw ConfigError("rcond must be positive");
}

double RunReport::summed_residual_after() const {
  double s = 0.0;
  for (const auto& r : layers) s += r.residual_after;
  return s;
}

double RunReport::mean_seconds_per_layer() const {
  if (layers.empty()) return 0.0;
  double s = 0.0;
  for (const auto& r : layers) s += r.seconds;
  return s / static_cast<double>(layers.size());
}

CalibrationBatch make_batch(const LayerRecord& layer, const Matrix& input) {
  Matrix x = layer.select_inputs(input);
  require_finite(x, ("activations at layer '" + layer.name + "'").c_str());
  Matrix y = matmul(layer.weight, x);
  const std::size_t n = x.cols();
  return {std::move(x), std::move(y), n};
}

std::vector<CalibrationBatch> collect_activations(const ModelSpec& model, const Matrix& calib_inputs,
                                                  ActivationMode mode, const ModelSpec* pruned) {
  model.validate();
  if (calib_inputs.rows() != model.input_width()) {
    throw ShapeError("calibration inputs have " + std::to_string(calib_inputs.rows()) +
                     " rows but the model expects " + std::to_string(model.input_width()));
  }
  const ModelSpec& upstream = (mode == ActivationMode::propagated && pruned) ? *pruned : model;
  if (upstream.layers.size() != model.layers.size()) {
    throw ShapeError("collect_activations: pruned model has a different layer count");
  }

  std::vector<CalibrationBatch> out;
  Matrix act = calib_inputs;
  for (std::size_t i = 0; i < model.layers.size(); ++i) {
    const auto& layer = model.layers[i];
    if (layer.kind == LayerKind::prunable) out.push_back(make_batch(layer, act));
    act = upstream.layers[i].forward(act);
  }
  return out;
}

Decomposition decompose(const Matrix& w, const Matrix& x, const PruneMask& mask) {
  if (w.cols() != x.rows() || mask.d_in != w.cols()) {
    throw ShapeError("decompose: weight " + std::to_string(w.rows()) + "x" + std::to_string(w.cols()) +
                     ", activations with " + std::to_string(x.rows()) + " rows, mask over " +
                     std::to_string(mask.d_in));
  }
  if (mask.kept.empty()) throw ShapeError("decompose: the kept set must not be empty");
  if (mask.kept.size() + mask.dropped.size() != mask.d_in) throw ShapeError("decompose: mask is not a partition");

  Matrix z = matmul(gather_cols(w, mask.kept), gather_rows(x, mask.kept));
  Matrix dropped = mask.dropped.empty() ? Matrix(w.rows(), x.cols())
                                        : matmul(gather_cols(w, mask.dropped), gather_rows(x, mask.dropped));
  return {std::move(z), std::move(dropped)};
}

LayerPruneResult prune_layer(const LayerRecord& layer, const CalibrationBatch& batch, const PruneConfig& config) {
  if (layer.kind != LayerKind::prunable) throw ConfigError("prune_layer: layer '" + layer.name + "' is not prunable");
  if (batch.x.rows() != layer.weight.cols() || batch.y.rows() != layer.d_out() || batch.x.cols() != batch.y.cols()) {
    throw ShapeError("prune_layer: calibration batch does not match layer '" + layer.name + "'");
  }
  const auto start = std::chrono::steady_clock::now();
  const double rho = config.ratio_for(layer.name);

  const ScoreVector scores = score_columns(layer.weight, batch.x, config.score_variant, config.variance_estimator);
  PruneMask mask = select_mask(scores, rho, layer.group_size);
  const Decomposition parts = decompose(layer.weight, batch.x, mask);

  const CompensationVariant variant =
      layer.compensate_here ? config.compensation_variant : CompensationVariant::none;
  CompensationResult comp = fit(variant, batch.y, parts.z, config.rcond);
  CompensatedWeight folded = apply(comp, gather_cols(layer.weight, mask.kept));

  LayerRecord next = layer;
  next.weight = std::move(folded.weight);
  std::vector<std::size_t> index;
  index.reserve(mask.kept.size());
  for (std::size_t k : mask.kept) index.push_back(layer.input_index.empty() ? k : layer.input_index[k]);
  next.input_index = std::move(index);
  if (folded.bias) {
    if (next.bias) {
      for (std::size_t i = 0; i < next.bias->size(); ++i) (*next.bias)[i] += (*folded.bias)[i];
    } else {
      next.bias = std::move(folded.bias);
    }
  }
  if (next.group_size && next.weight.cols() % *next.group_size != 0) next.group_size.reset();

  PruneReport report;
  report.layer = layer.name;
  report.ratio = rho;
  report.kept = mask.kept.size();
  report.residual_before = residual(batch.y, parts.z);
  report.residual_after = comp.in_sample_residual;
  report.variant = variant;
  report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  return {std::move(next), std::move(report), std::move(mask), std::move(comp)};
}

PruneOutcome prune_model(const ModelSpec& model, const Matrix& calib_inputs, const PruneConfig& config) {
  model.validate();
  config.validate();
  if (calib_inputs.rows() != model.input_width()) {
    throw ShapeError("calibration inputs have " + std::to_string(calib_inputs.rows()) +
                     " rows but the model expects " + std::to_string(model.input_width()));
  }
  require_finite(calib_inputs, "calibration inputs");

  const auto start = std::chrono::steady_clock::now();
  PruneOutcome out{model, {}};
  Matrix original_act = calib_inputs;
  Matrix current_act = calib_inputs;
  const bool original_mode = config.activation_mode == ActivationMode::original;

  for (std::size_t i = 0; i < model.layers.size(); ++i) {
    const LayerRecord& layer = model.layers[i];
    if (layer.kind == LayerKind::prunable) {
      const CalibrationBatch batch = make_batch(layer, original_mode ? original_act : current_act);
      LayerPruneResult r = prune_layer(layer, batch, config);
      out.model.layers[i] = std::move(r.layer);
      out.report.layers.push_back(std::move(r.report));
    }
    if (i + 1 < model.layers.size()) {
      current_act = out.model.layers[i].forward(current_act);
      if (original_mode) original_act = layer.forward(original_act);
    }
  }
  if (config.propagate_width) propagate_width(out.model);

  std::ostringstream ratio;
  ratio << config.ratio;
  auto& meta = out.model.metadata;
  meta["prune.ratio"] = ratio.str();
  meta["prune.score"] = to_string(config.score_variant);
  meta["prune.compensation"] = report_label(config.compensation_variant);
  meta["prune.activation_mode"] = to_string(config.activation_mode);
  meta["prune.propagate_width"] = config.propagate_width ? "true" : "false";
  meta["prune.seed"] = std::to_string(config.seed);

  out.report.total_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

void propagate_width(ModelSpec& model) {
  for (std::size_t i = 1; i < model.layers.size(); ++i) {
    LayerRecord& consumer = model.layers[i];
    // A prunable consumer keeps at least two input features so it stays
    // a valid prunable layer; narrower cases keep their index instead.
    if (consumer.input_index.empty()) continue;
    if (consumer.kind == LayerKind::prunable && consumer.input_index.size() < 2) continue;
    LayerRecord& producer = model.layers[i - 1];
    const auto& keep = consumer.input_index;
    producer.weight = gather_rows(producer.weight, keep);
    if (producer.bias) {
      std::vector<double> b;
      b.reserve(keep.size());
      for (std::size_t k : keep) b.push_back((*producer.bias)[k]);
      producer.bias = std::move(b);
    }
    consumer.in_features = keep.size();
    consumer.input_index.clear();
  }
}

EvalMetrics evaluate(const ModelSpec& model, const Matrix& eval_inputs, const ModelSpec& reference) {
  model.validate();
  reference.validate();
  if (model.input_width() != reference.input_width() || model.output_width() != reference.output_width()) {
    throw ShapeError("evaluate: model and reference do not share input/output widths");
  }
  const auto hs = model.hidden_states(eval_inputs);
  const auto ref = reference.hidden_states(eval_inputs);

  const double denom = frob_norm(ref.back());
  if (denom == 0.0) throw NumericError("evaluate: reference output is identically zero");

  EvalMetrics m;
  m.relative_error = frob_norm(subtract(hs.back(), ref.back())) / denom;
  if (hs.size() == ref.size()) {
    for (std::size_t i = 0; i < hs.size(); ++i) {
      const bool same = hs[i].rows() == ref[i].rows() && hs[i].cols() == ref[i].cols();
      m.layer_residuals.push_back(same ? std::optional<double>(frob_norm(subtract(hs[i], ref[i]))) : std::nullopt);
    }
  }
  return m;
}

}  // namespace colprune
