#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "colprune/matrix.hpp"

namespace colprune {

enum class LayerKind { prunable, passthrough };
enum class Nonlinearity { none, relu, gelu };

std::string to_string(LayerKind k);
std::string to_string(Nonlinearity n);
LayerKind parse_layer_kind(std::string_view name);
Nonlinearity parse_nonlinearity(std::string_view name);

Matrix apply_nonlinearity(Nonlinearity n, const Matrix& x);

// One linear sub-layer: out = act(W * x[input_index] + bias).
//
// in_features is the width of the activation the layer consumes. Before any
// pruning input_index is empty and W has in_features columns; once input
// columns are removed, input_index lists (sorted) the surviving input rows
// and W has input_index.size() columns.
struct LayerRecord {
  LayerRecord(std::string name, Matrix weight);

  std::string name;
  Matrix weight;
  LayerKind kind = LayerKind::prunable;
  Nonlinearity nonlinearity = Nonlinearity::none;
  std::optional<std::size_t> group_size;
  bool compensate_here = true;
  std::size_t in_features;
  std::vector<std::size_t> input_index;
  std::optional<std::vector<double>> bias;

  std::size_t d_out() const { return weight.rows(); }
  std::size_t d_in() const { return in_features; }

  // Rows of x the weight actually reads.
  Matrix select_inputs(const Matrix& x) const;
  // W * x[input_index] + bias, no nonlinearity.
  Matrix linear(const Matrix& x) const;
  Matrix forward(const Matrix& x) const;

  // Throws ShapeError/ConfigError if the record violates its invariants.
  void validate() const;
};

struct ModelSpec {
  std::vector<LayerRecord> layers;
  std::map<std::string, std::string> metadata;

  std::size_t input_width() const;
  std::size_t output_width() const;
  std::size_t prunable_count() const;

  // Checks every layer and that layer i's d_out equals layer i+1's d_in.
  void validate() const;

  Matrix forward(const Matrix& x) const;
  // Output of every layer (after its nonlinearity), in order.
  std::vector<Matrix> hidden_states(const Matrix& x) const;
};

}  // namespace colprune
