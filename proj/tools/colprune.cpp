// colprune: generate toy models, prune, sweep and evaluate.
//
// Exit codes: 0 success, 1 I/O or data error, 2 usage error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "colprune/error.hpp"
#include "colprune/model_io.hpp"
#include "colprune/pipeline.hpp"
#include "colprune/sweep.hpp"
#include "colprune/tensor_io.hpp"
#include "colprune/toy.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace colprune;

namespace {

constexpr int kExitData = 1;
constexpr int kExitUsage = 2;

// Flags shared by prune and sweep. Variant names stay strings until after
// parsing so a bad name surfaces as a ConfigError (exit 2) with our message.
struct ConfigFlags {
  double ratio = 0.2;
  std::map<std::string, double> layer_ratios;
  std::string score_variant = "variance_aware";
  std::string compensation_variant = "rot";
  std::string activation_mode = "propagated";
  std::string variance_estimator = "population";
  double rcond = kDefaultRcond;
  bool propagate_width = false;
  std::uint64_t seed = 0;

  void add_to(CLI::App* app, bool with_variants) {
    if (with_variants) {
      app->add_option("--ratio", ratio, "fraction of input columns (or groups) to drop");
      app->add_option("--layer_ratios,--layer-ratios", layer_ratios, "per-layer override, NAME RATIO pairs");
      app->add_option("--score_variant,--score-variant", score_variant, "variance_aware | wanda_sp");
      app->add_option("--compensation_variant,--compensation-variant", compensation_variant,
                      "none | rot | rot_scale | ls | bias");
    }
    app->add_option("--activation_mode,--activation-mode", activation_mode, "propagated | original");
    app->add_option("--variance_estimator,--variance-estimator", variance_estimator, "population | sample");
    app->add_option("--rcond", rcond, "relative pseudoinverse cutoff for ls");
    app->add_flag("--propagate_width,--propagate-width", propagate_width,
                  "also delete producer rows that the next layer no longer reads");
    app->add_option("--seed", seed, "recorded in the output metadata");
  }

  PruneConfig build() const {
    PruneConfig c;
    c.ratio = ratio;
    c.layer_ratios = layer_ratios;
    c.score_variant = parse_score_variant(score_variant);
    c.compensation_variant = parse_compensation_variant(compensation_variant);
    c.activation_mode = parse_activation_mode(activation_mode);
    if (variance_estimator == "population") {
      c.variance_estimator = VarianceEstimator::population;
    } else if (variance_estimator == "sample") {
      c.variance_estimator = VarianceEstimator::sample;
    } else {
      throw ConfigError("unknown variance estimator '" + variance_estimator + "'");
    }
    c.rcond = rcond;
    c.propagate_width = propagate_width;
    c.seed = seed;
    c.validate();
    return c;
  }
};

struct ToyFlags {
  ToySpec spec;
  std::size_t group_size = 0;
  std::string nonlinearity = "gelu";

  void add_to(CLI::App* app) {
    app->add_option("--width", spec.width, "layer width (d_in = d_out)");
    app->add_option("--depth", spec.depth, "number of layers");
    app->add_option("--nonlinearity", nonlinearity, "none | relu | gelu");
    app->add_option("--n_calib,--n-calib", spec.n_calib, "calibration samples");
    app->add_option("--n_eval,--n-eval", spec.n_eval, "held-out samples");
    app->add_option("--group_size,--group-size", group_size, "contiguous group size for masks (0 = columns)");
  }

  ToySpec build(std::uint64_t seed) const {
    ToySpec s = spec;
    s.seed = seed;
    s.nonlinearity = parse_nonlinearity(nonlinearity);
    if (group_size > 0) s.group_size = group_size;
    s.validate();
    return s;
  }
};

json toy_to_json(const ToySpec& s) {
  return {{"width", s.width},
          {"depth", s.depth},
          {"nonlinearity", to_string(s.nonlinearity)},
          {"n_calib", s.n_calib},
          {"n_eval", s.n_eval},
          {"group_size", s.group_size ? json(*s.group_size) : json(nullptr)}};
}

ToySpec toy_from_json(const json& j) {
  ToySpec s;
  s.width = j.at("width").get<std::size_t>();
  s.depth = j.at("depth").get<std::size_t>();
  s.nonlinearity = parse_nonlinearity(j.at("nonlinearity").get<std::string>());
  s.n_calib = j.at("n_calib").get<std::size_t>();
  s.n_eval = j.at("n_eval").get<std::size_t>();
  if (!j.at("group_size").is_null()) s.group_size = j.at("group_size").get<std::size_t>();
  return s;
}

void print_report(const RunReport& report) {
  for (const auto& r : report.layers) {
    std::printf("%s ratio=%g kept=%zu residual_before=%.10g residual_after=%.10g variant=%s seconds=%.6f\n",
                r.layer.c_str(), r.ratio, r.kept, r.residual_before, r.residual_after,
                report_label(r.variant).c_str(), r.seconds);
  }
}

int cmd_gen(std::uint64_t seed, const ToyFlags& toy, const fs::path& out) {
  const ToySpec spec = toy.build(seed);
  const ToyData data = generate_toy(spec);
  fs::create_directories(out);
  save_model(out / "model", data.model);
  write_tensor(out / "calib.rcpu", data.calib);
  write_tensor(out / "eval.rcpu", data.eval);
  std::printf("wrote %s (model, calib.rcpu %zux%zu, eval.rcpu %zux%zu)\n", out.string().c_str(), data.calib.rows(),
              data.calib.cols(), data.eval.rows(), data.eval.cols());
  return 0;
}

int cmd_prune(const fs::path& model_dir, const fs::path& calib_path, const fs::path& out,
              std::optional<fs::path> report_path, const ConfigFlags& flags) {
  const PruneConfig config = flags.build();
  const ModelSpec model = load_model(model_dir);
  const Matrix calib = read_tensor(calib_path);
  const PruneOutcome outcome = prune_model(model, calib, config);
  save_model(out, outcome.model);
  write_report(report_path.value_or(out / "report.json"), outcome.report);
  print_report(outcome.report);
  return 0;
}

int cmd_eval(const fs::path& model_dir, const fs::path& reference_dir, const fs::path& eval_path) {
  const ModelSpec model = load_model(model_dir);
  const ModelSpec reference = load_model(reference_dir);
  const Matrix eval = read_tensor(eval_path);
  const EvalMetrics m = evaluate(model, eval, reference);
  std::printf("relative_error %.17g\n", m.relative_error);
  for (std::size_t i = 0; i < m.layer_residuals.size(); ++i) {
    if (m.layer_residuals[i]) {
      std::printf("%s residual %.17g\n", model.layers[i].name.c_str(), *m.layer_residuals[i]);
    } else {
      std::printf("%s residual n/a\n", model.layers[i].name.c_str());
    }
  }
  return 0;
}

// The sweep manifest holds everything needed to rerun the table.
json sweep_manifest(const SweepSpec& spec, const ConfigFlags& flags, const json& inputs, bool record_timing) {
  json scores = json::array();
  for (auto v : spec.score_variants) scores.push_back(to_string(v));
  json variants = json::array();
  for (auto v : spec.compensation_variants) variants.push_back(to_string(v));
  return {{"ratios", spec.ratios},
          {"score_variants", scores},
          {"compensation_variants", variants},
          {"calib_sizes", spec.calib_sizes},
          {"activation_mode", flags.activation_mode},
          {"variance_estimator", flags.variance_estimator},
          {"rcond", flags.rcond},
          {"propagate_width", flags.propagate_width},
          {"record_timing", record_timing},
          {"inputs", inputs},
          {"columns", sweep_header()}};
}

struct SweepFlags {
  std::vector<double> ratios{0.1, 0.2, 0.3};
  std::vector<std::string> score_variants{"variance_aware", "wanda_sp"};
  std::vector<std::string> compensation_variants{"none", "rot", "rot_scale", "ls", "bias"};
  std::vector<std::size_t> calib_sizes;
  std::vector<std::uint64_t> seeds{0};
  std::string model, calib, eval;
  bool generate = false;
  bool no_timing = false;
  std::string manifest;
  std::string out = "sweep_out";
};

int cmd_sweep(SweepFlags sf, ConfigFlags flags, const ToyFlags& toy) {
  json inputs;
  if (!sf.manifest.empty()) {
    std::ifstream in(sf.manifest);
    if (!in) throw IoError("cannot open manifest " + sf.manifest);
    json m;
    try {
      m = json::parse(in);
      sf.ratios = m.at("ratios").get<std::vector<double>>();
      sf.score_variants = m.at("score_variants").get<std::vector<std::string>>();
      sf.compensation_variants = m.at("compensation_variants").get<std::vector<std::string>>();
      sf.calib_sizes = m.at("calib_sizes").get<std::vector<std::size_t>>();
      flags.activation_mode = m.at("activation_mode").get<std::string>();
      flags.variance_estimator = m.at("variance_estimator").get<std::string>();
      flags.rcond = m.at("rcond").get<double>();
      flags.propagate_width = m.at("propagate_width").get<bool>();
      sf.no_timing = !m.at("record_timing").get<bool>();
      inputs = m.at("inputs");
    } catch (const json::exception& e) {
      throw IoError("malformed manifest " + sf.manifest + ": " + e.what());
    }
  } else if (sf.generate) {
    inputs = {{"kind", "generate"}, {"toy", toy_to_json(toy.build(0))}, {"seeds", sf.seeds}};
  } else {
    if (sf.model.empty() || sf.calib.empty() || sf.eval.empty()) {
      throw ConfigError("sweep needs --model, --calib and --eval, or --generate, or --manifest");
    }
    inputs = {{"kind", "files"},
              {"model", sf.model},
              {"calib", sf.calib},
              {"eval", sf.eval},
              {"seed", sf.seeds.empty() ? 0 : sf.seeds.front()}};
  }

  SweepSpec spec;
  spec.ratios = sf.ratios;
  spec.score_variants.clear();
  for (const auto& s : sf.score_variants) spec.score_variants.push_back(parse_score_variant(s));
  spec.compensation_variants.clear();
  for (const auto& s : sf.compensation_variants) spec.compensation_variants.push_back(parse_compensation_variant(s));
  spec.calib_sizes = sf.calib_sizes;
  spec.validate();
  const PruneConfig base = flags.build();

  std::vector<SweepInput> runs;
  try {
    if (inputs.at("kind") == "generate") {
      const ToySpec base_toy = toy_from_json(inputs.at("toy"));
      for (std::uint64_t seed : inputs.at("seeds").get<std::vector<std::uint64_t>>()) {
        ToySpec s = base_toy;
        s.seed = seed;
        ToyData d = generate_toy(s);
        runs.push_back({std::move(d.model), std::move(d.calib), std::move(d.eval), seed});
      }
    } else {
      runs.push_back({load_model(inputs.at("model").get<std::string>()),
                      read_tensor(inputs.at("calib").get<std::string>()),
                      read_tensor(inputs.at("eval").get<std::string>()), inputs.at("seed").get<std::uint64_t>()});
    }
  } catch (const json::exception& e) {
    throw IoError(std::string("malformed sweep inputs: ") + e.what());
  }

  const fs::path out(sf.out);
  fs::create_directories(out);
  const bool record_timing = !sf.no_timing;
  {
    std::ofstream m(out / "sweep_manifest.json");
    if (!m) throw IoError("cannot write " + (out / "sweep_manifest.json").string());
    m << sweep_manifest(spec, flags, inputs, record_timing).dump(2) << '\n';
  }
  std::ofstream table(out / "sweep.csv");
  if (!table) throw IoError("cannot write " + (out / "sweep.csv").string());
  const auto rows = run_sweep(spec, runs, base, &table, record_timing);
  std::printf("%zu rows written to %s\n", rows.size(), (out / "sweep.csv").string().c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Structured column pruning with closed-form output compensation"};
  app.set_config("--config", "", "TOML config file; command-line flags take precedence");
  app.require_subcommand(1);

  std::uint64_t gen_seed = 0;
  ToyFlags gen_toy;
  std::string gen_out;
  auto* gen = app.add_subcommand("gen", "generate a toy model with calibration and held-out inputs");
  gen->add_option("--seed", gen_seed, "generator seed");
  gen_toy.add_to(gen);
  gen->add_option("--out", gen_out, "output directory")->required();

  ConfigFlags prune_flags;
  std::string prune_model_dir, prune_calib, prune_out, prune_report;
  auto* prune = app.add_subcommand("prune", "prune every prunable layer of a model");
  prune->add_option("--model", prune_model_dir, "model directory")->required();
  prune->add_option("--calib", prune_calib, "calibration tensor file")->required();
  prune->add_option("--out", prune_out, "output model directory")->required();
  prune->add_option("--report", prune_report, "report path (default OUT/report.json)");
  prune_flags.add_to(prune, true);

  SweepFlags sweep_flags;
  ConfigFlags sweep_config;
  ToyFlags sweep_toy;
  auto* sweep = app.add_subcommand("sweep", "run the ratio x score x variant cross product");
  sweep->add_option("--ratios", sweep_flags.ratios, "pruning ratios");
  sweep->add_option("--score_variants,--score-variants", sweep_flags.score_variants, "score variants");
  sweep->add_option("--compensation_variants,--compensation-variants", sweep_flags.compensation_variants,
                    "compensation variants");
  sweep->add_option("--calib_sizes,--calib-sizes", sweep_flags.calib_sizes,
                    "calibration sizes (leading columns); default all");
  sweep->add_option("--seeds", sweep_flags.seeds, "toy seeds with --generate, else the recorded seed");
  sweep->add_option("--model", sweep_flags.model, "model directory");
  sweep->add_option("--calib", sweep_flags.calib, "calibration tensor file");
  sweep->add_option("--eval", sweep_flags.eval, "held-out tensor file");
  sweep->add_flag("--generate", sweep_flags.generate, "generate one toy model per seed");
  sweep->add_flag("--no_timing,--no-timing", sweep_flags.no_timing, "write 0 in the seconds column");
  sweep->add_option("--manifest", sweep_flags.manifest, "rerun from a sweep_manifest.json");
  sweep->add_option("--out", sweep_flags.out, "output directory");
  sweep_config.add_to(sweep, false);
  sweep_toy.add_to(sweep);

  std::string eval_model, eval_reference, eval_inputs;
  auto* eval = app.add_subcommand("eval", "held-out relative error of a model against a reference");
  eval->add_option("--model", eval_model, "model directory")->required();
  eval->add_option("--reference", eval_reference, "reference model directory")->required();
  eval->add_option("--eval", eval_inputs, "held-out tensor file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::FileError& e) {
    app.exit(e);
    return kExitData;
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*gen) return cmd_gen(gen_seed, gen_toy, gen_out);
    if (*prune) {
      std::optional<fs::path> report;
      if (!prune_report.empty()) report = prune_report;
      return cmd_prune(prune_model_dir, prune_calib, prune_out, report, prune_flags);
    }
    if (*sweep) return cmd_sweep(sweep_flags, sweep_config, sweep_toy);
    if (*eval) return cmd_eval(eval_model, eval_reference, eval_inputs);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitData;
  }
  return kExitUsage;
}
