#pragma once

#include <cstdint>
#include <optional>

#include "colprune/matrix.hpp"
#include "colprune/model.hpp"

namespace colprune {

// Desk-scale stand-in for a stack of transformer linear sub-layers: `depth`
// square layers of size `width` with a nonlinearity between them, fed by
// inputs that mimic LLM hidden states.
//
// Input channel j is  mean_j + scale_j * (L g + noise * e)  with g a
// latent_rank-dimensional factor shared across channels. A fraction of the
// channels are offset channels: a large constant (+/- offset_magnitude),
// their variation shrunk by offset_spread, and the first layer's weight
// columns for them scaled by offset_weight_scale.
struct ToySpec {
  std::uint64_t seed = 0;
  std::size_t width = 64;
  std::size_t depth = 4;
  Nonlinearity nonlinearity = Nonlinearity::gelu;
  std::size_t n_calib = 512;
  std::size_t n_eval = 1024;
  std::optional<std::size_t> group_size;

  std::size_t latent_rank = 8;
  double noise = 2.0;
  double channel_scale_spread = 0.5;  // log-normal sigma of scale_j
  double offset_fraction = 0.6;
  double offset_magnitude = 8.0;
  double offset_spread = 0.7;
  double offset_weight_scale = 0.25;

  void validate() const;
};

struct ToyData {
  ModelSpec model;
  Matrix calib;  // width x n_calib
  Matrix eval;   // width x n_eval, independent of calib
};

// Deterministic in spec. Calibration and evaluation draws use separate
// streams, so changing n_calib leaves the model and eval set untouched.
ToyData generate_toy(const ToySpec& spec);

}  // namespace colprune
