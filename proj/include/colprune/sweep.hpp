#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "colprune/compensation.hpp"
#include "colprune/model.hpp"
#include "colprune/pipeline.hpp"
#include "colprune/scoring.hpp"

namespace colprune {

struct SweepSpec {
  std::vector<double> ratios{0.1, 0.2, 0.3};
  std::vector<ScoreVariant> score_variants{ScoreVariant::variance_aware, ScoreVariant::wanda_sp};
  std::vector<CompensationVariant> compensation_variants{
      CompensationVariant::none, CompensationVariant::rot, CompensationVariant::rot_scale,
      CompensationVariant::ls, CompensationVariant::bias};
  // Calibration sizes; each uses the leading columns of the calibration set.
  // Empty means "all columns".
  std::vector<std::size_t> calib_sizes;

  void validate() const;
};

// One model with its calibration and held-out data, tagged by seed.
struct SweepInput {
  ModelSpec model;
  Matrix calib;
  Matrix eval;
  std::uint64_t seed = 0;
};

struct SweepRow {
  double ratio = 0.0;
  ScoreVariant score = ScoreVariant::variance_aware;
  CompensationVariant variant = CompensationVariant::none;
  double in_sample_residual = 0.0;  // summed over pruned layers
  double heldout_rel_error = 0.0;
  double seconds_per_layer = 0.0;
  std::uint64_t seed = 0;
  std::size_t n_calib = 0;
};

// Header of the comma-separated sweep table.
std::string sweep_header();
// With record_timing false the seconds column is written as 0 so that
// repeated runs produce identical bytes.
std::string format_row(const SweepRow& row, bool record_timing);

// Full cross product, ordered input > calibration size > ratio > score >
// variant. Every finished row is written and flushed to `table` (if given)
// before the next cell starts. `base` supplies the remaining config fields.
std::vector<SweepRow> run_sweep(const SweepSpec& spec, const std::vector<SweepInput>& inputs,
                                const PruneConfig& base, std::ostream* table = nullptr,
                                bool record_timing = true);

}  // namespace colprune
