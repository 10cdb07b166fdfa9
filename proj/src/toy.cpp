#include "colprune/toy.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "colprune/error.hpp"

namespace colprune {

void ToySpec::validate() const {
  if (width < 2) throw ConfigError("toy model width must be at least 2");
  if (depth < 1) throw ConfigError("toy model depth must be at least 1");
  if (n_calib < 1 || n_eval < 1) throw ConfigError("sample counts must be positive");
  if (latent_rank < 1) throw ConfigError("latent rank must be positive");
  if (!(offset_fraction >= 0.0 && offset_fraction <= 1.0)) throw ConfigError("offset fraction must lie in [0, 1]");
  if (group_size && (*group_size == 0 || width % *group_size != 0)) {
    throw ConfigError("group size must divide the width");
  }
}

namespace {

// Seeds for the three independent streams.
constexpr std::uint64_t kCalibStream = 0x9E3779B97F4A7C15ULL;
constexpr std::uint64_t kEvalStream = 0xD1B54A32D192ED03ULL;

struct InputLaw {
  std::vector<double> mean;
  std::vector<double> scale;
  Matrix loading;  // width x latent_rank
  double noise;
};

Matrix sample(const InputLaw& law, std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const std::size_t width = law.mean.size();
  const std::size_t rank = law.loading.cols();
  Matrix x(width, n);
  std::vector<double> g(rank);
  for (std::size_t t = 0; t < n; ++t) {
    for (double& v : g) v = normal(rng);
    for (std::size_t j = 0; j < width; ++j) {
      double shared = 0.0;
      for (std::size_t r = 0; r < rank; ++r) shared += law.loading(j, r) * g[r];
      x(j, t) = law.mean[j] + law.scale[j] * (shared + law.noise * normal(rng));
    }
  }
  return x;
}

}  // namespace

ToyData generate_toy(const ToySpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const std::size_t d = spec.width;
  const double wscale = 1.0 / std::sqrt(static_cast<double>(d));

  ModelSpec model;
  for (std::size_t l = 0; l < spec.depth; ++l) {
    Matrix w(d, d);
    for (double& v : w.data()) v = normal(rng) * wscale;
    LayerRecord layer("layer" + std::to_string(l), std::move(w));
    layer.nonlinearity = l + 1 < spec.depth ? spec.nonlinearity : Nonlinearity::none;
    layer.group_size = spec.group_size;
    model.layers.push_back(std::move(layer));
  }

  InputLaw law{std::vector<double>(d), std::vector<double>(d), Matrix(d, spec.latent_rank), spec.noise};
  const double lscale = 1.0 / std::sqrt(static_cast<double>(spec.latent_rank));
  for (double& v : law.loading.data()) v = normal(rng) * lscale;
  for (std::size_t j = 0; j < d; ++j) {
    law.scale[j] = std::exp(spec.channel_scale_spread * normal(rng));
    const bool offset = uniform(rng) < spec.offset_fraction;
    const double sign = normal(rng) < 0.0 ? -1.0 : 1.0;
    if (offset) {
      law.mean[j] = sign * spec.offset_magnitude;
      law.scale[j] *= spec.offset_spread;
      for (std::size_t i = 0; i < d; ++i) model.layers.front().weight(i, j) *= spec.offset_weight_scale;
    }
  }

  std::mt19937_64 calib_rng(spec.seed ^ kCalibStream);
  std::mt19937_64 eval_rng(spec.seed ^ kEvalStream);
  Matrix calib = sample(law, spec.n_calib, calib_rng);
  Matrix eval = sample(law, spec.n_eval, eval_rng);

  const auto num = [](double v) {
    std::ostringstream s;
    s << v;
    return s.str();
  };
  auto& meta = model.metadata;
  meta["toy.seed"] = std::to_string(spec.seed);
  meta["toy.width"] = std::to_string(spec.width);
  meta["toy.depth"] = std::to_string(spec.depth);
  meta["toy.nonlinearity"] = to_string(spec.nonlinearity);
  meta["toy.n_calib"] = std::to_string(spec.n_calib);
  meta["toy.n_eval"] = std::to_string(spec.n_eval);
  meta["toy.latent_rank"] = std::to_string(spec.latent_rank);
  meta["toy.noise"] = num(spec.noise);
  meta["toy.channel_scale_spread"] = num(spec.channel_scale_spread);
  meta["toy.offset_fraction"] = num(spec.offset_fraction);
  meta["toy.offset_magnitude"] = num(spec.offset_magnitude);
  meta["toy.offset_spread"] = num(spec.offset_spread);
  meta["toy.offset_weight_scale"] = num(spec.offset_weight_scale);
  if (spec.group_size) meta["toy.group_size"] = std::to_string(*spec.group_size);

  return {std::move(model), std::move(calib), std::move(eval)};
}

}  // namespace colprune
