#include "colprune/sweep.hpp"

#include <cstdio>

#include "colprune/error.hpp"

namespace colprune {

void SweepSpec::validate() const {
  if (ratios.empty() || score_variants.empty() || compensation_variants.empty()) {
    throw ConfigError("sweep axes must be nonempty");
  }
  for (double r : ratios) {
    if (!(r >= 0.0 && r < 1.0)) throw ConfigError("sweep ratio outside [0, 1): " + std::to_string(r));
  }
  for (std::size_t n : calib_sizes) {
    if (n == 0) throw ConfigError("calibration sizes must be positive");
  }
}

std::string sweep_header() {
  return "ratio,score,variant,in_sample_residual,heldout_rel_error,seconds_per_layer,seed,n_calib";
}

std::string format_row(const SweepRow& row, bool record_timing) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), "%.6g,%s,%s,%.12g,%.12g,%.6g,%llu,%zu", row.ratio, to_string(row.score).c_str(),
                report_label(row.variant).c_str(), row.in_sample_residual, row.heldout_rel_error,
                record_timing ? row.seconds_per_layer : 0.0, static_cast<unsigned long long>(row.seed),
                row.n_calib);
  return buf;
}

namespace {

Matrix leading_columns(const Matrix& m, std::size_t n) {
  if (n == m.cols()) return m;
  if (n > m.cols()) {
    throw ConfigError("calibration size " + std::to_string(n) + " exceeds the " + std::to_string(m.cols()) +
                      " available columns");
  }
  Matrix out(m.rows(), n);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < n; ++j) out(i, j) = m(i, j);
  }
  return out;
}

}  // namespace

std::vector<SweepRow> run_sweep(const SweepSpec& spec, const std::vector<SweepInput>& inputs,
                                const PruneConfig& base, std::ostream* table, bool record_timing) {
  spec.validate();
  if (inputs.empty()) throw ConfigError("sweep needs at least one input");
  if (table) *table << sweep_header() << '\n' << std::flush;

  std::vector<SweepRow> rows;
  for (const auto& input : inputs) {
    const std::vector<std::size_t> sizes =
        spec.calib_sizes.empty() ? std::vector<std::size_t>{input.calib.cols()} : spec.calib_sizes;
    for (std::size_t n : sizes) {
      const Matrix calib = leading_columns(input.calib, n);
      for (double ratio : spec.ratios) {
        for (ScoreVariant score : spec.score_variants) {
          for (CompensationVariant variant : spec.compensation_variants) {
            PruneConfig config = base;
            config.ratio = ratio;
            config.layer_ratios.clear();
            config.score_variant = score;
            config.compensation_variant = variant;
            config.seed = input.seed;
            const PruneOutcome out = prune_model(input.model, calib, config);
            const EvalMetrics metrics = evaluate(out.model, input.eval, input.model);

            SweepRow row;
            row.ratio = ratio;
            row.score = score;
            row.variant = variant;
            row.in_sample_residual = out.report.summed_residual_after();
            row.heldout_rel_error = metrics.relative_error;
            row.seconds_per_layer = out.report.mean_seconds_per_layer();
            row.seed = input.seed;
            row.n_calib = n;
            if (table) *table << format_row(row, record_timing) << '\n' << std::flush;
            rows.push_back(row);
          }
        }
      }
    }
  }
  return rows;
}

}  // namespace colprune
