#include "colprune/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "colprune/error.hpp"

namespace colprune {

std::string to_string(LayerKind k) { return k == LayerKind::prunable ? "prunable" : "passthrough"; }

std::string to_string(Nonlinearity n) {
  switch (n) {
    case Nonlinearity::none:
      return "none";
    case Nonlinearity::relu:
      return "relu";
    case Nonlinearity::gelu:
      return "gelu";
  }
  return "unknown";
}

LayerKind parse_layer_kind(std::string_view name) {
  if (name == "prunable") return LayerKind::prunable;
  if (name == "passthrough") return LayerKind::passthrough;
  throw ConfigError("unknown layer kind '" + std::string(name) + "'");
}

Nonlinearity parse_nonlinearity(std::string_view name) {
  if (name == "none") return Nonlinearity::none;
  if (name == "relu") return Nonlinearity::relu;
  if (name == "gelu") return Nonlinearity::gelu;
  throw ConfigError("unknown nonlinearity '" + std::string(name) + "'");
}

Matrix apply_nonlinearity(Nonlinearity n, const Matrix& x) {
  if (n == Nonlinearity::none) return x;
  Matrix out = x;
  for (double& v : out.data()) {
    if (n == Nonlinearity::relu) {
      v = v > 0.0 ? v : 0.0;
    } else {
      // exact (erf) GELU
      v = 0.5 * v * (1.0 + std::erf(v * (1.0 / std::numbers::sqrt2)));
    }
  }
  return out;
}

LayerRecord::LayerRecord(std::string name_, Matrix weight_)
    : name(std::move(name_)), weight(std::move(weight_)), in_features(weight.cols()) {}

Matrix LayerRecord::select_inputs(const Matrix& x) const {
  if (x.rows() != in_features) {
    throw ShapeError("layer '" + name + "': expects " + std::to_string(in_features) +
                     " input rows, got " + std::to_string(x.rows()));
  }
  return input_index.empty() ? x : gather_rows(x, input_index);
}

Matrix LayerRecord::linear(const Matrix& x) const {
  Matrix out = matmul(weight, select_inputs(x));
  return bias ? add_row_offsets(out, *bias) : out;
}

Matrix LayerRecord::forward(const Matrix& x) const {
  return apply_nonlinearity(nonlinearity, linear(x));
}

void LayerRecord::validate() const {
  const std::string where = "layer '" + name + "': ";
  if (input_index.empty()) {
    if (weight.cols() != in_features) {
      throw ShapeError(where + "weight has " + std::to_string(weight.cols()) + " columns but in_features is " +
                       std::to_string(in_features));
    }
  } else {
    if (weight.cols() != input_index.size()) {
      throw ShapeError(where + "weight columns do not match the input index");
    }
    if (!std::is_sorted(input_index.begin(), input_index.end()) ||
        std::adjacent_find(input_index.begin(), input_index.end()) != input_index.end() ||
        input_index.back() >= in_features) {
      throw ShapeError(where + "input index must be strictly increasing and below in_features");
    }
  }
  if (kind == LayerKind::prunable && in_features < 2) {
    throw ShapeError(where + "prunable layers need at least two input features");
  }
  if (group_size && (*group_size == 0 || weight.cols() % *group_size != 0)) {
    throw ConfigError(where + "group size " + std::to_string(*group_size) + " does not divide " +
                      std::to_string(weight.cols()));
  }
  if (bias && bias->size() != weight.rows()) throw ShapeError(where + "bias length differs from d_out");
  if (!weight.all_finite()) throw NumericError(where + "non-finite weight");
  if (bias && !std::all_of(bias->begin(), bias->end(), [](double v) { return std::isfinite(v); })) {
    throw NumericError(where + "non-finite bias");
  }
}

std::size_t ModelSpec::input_width() const {
  if (layers.empty()) throw ShapeError("model has no layers");
  return layers.front().d_in();
}

std::size_t ModelSpec::output_width() const {
  if (layers.empty()) throw ShapeError("model has no layers");
  return layers.back().d_out();
}

std::size_t ModelSpec::prunable_count() const {
  return static_cast<std::size_t>(std::count_if(
      layers.begin(), layers.end(), [](const LayerRecord& l) { return l.kind == LayerKind::prunable; }));
}

void ModelSpec::validate() const {
  if (layers.empty()) throw ShapeError("model has no layers");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    layers[i].validate();
    if (i + 1 < layers.size() && layers[i].d_out() != layers[i + 1].d_in()) {
      throw ShapeError("layer '" + layers[i].name + "' emits " + std::to_string(layers[i].d_out()) +
                       " rows but layer '" + layers[i + 1].name + "' expects " +
                       std::to_string(layers[i + 1].d_in()));
    }
  }
}

Matrix ModelSpec::forward(const Matrix& x) const {
  if (layers.empty()) throw ShapeError("model has no layers");
  Matrix h = x;
  for (const auto& layer : layers) h = layer.forward(h);
  return h;
}

std::vector<Matrix> ModelSpec::hidden_states(const Matrix& x) const {
  std::vector<Matrix> out;
  out.reserve(layers.size());
  const Matrix* h = &x;
  for (const auto& layer : layers) {
    out.push_back(layer.forward(*h));
    h = &out.back();
  }
  return out;
}

}  // namespace colprune
