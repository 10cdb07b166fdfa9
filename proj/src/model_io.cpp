#include "colprune/model_io.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "colprune/error.hpp"
#include "colprune/tensor_io.hpp"

namespace colprune {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string tensor_file(std::size_t index, const char* what) {
  std::ostringstream name;
  name << "layer" << std::setw(3) << std::setfill('0') << index << '.' << what << ".rcpu";
  return name.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

template <typename T>
T field(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw IoError(where + ": missing field '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw IoError(where + ": bad field '" + key + "': " + e.what());
  }
}

}  // namespace

void save_model(const fs::path& dir, const ModelSpec& model) {
  model.validate();
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());

  json layers = json::array();
  for (std::size_t i = 0; i < model.layers.size(); ++i) {
    const auto& l = model.layers[i];
    json entry;
    entry["name"] = l.name;
    entry["kind"] = to_string(l.kind);
    entry["d_out"] = l.d_out();
    entry["d_in"] = l.d_in();
    entry["nonlinearity"] = to_string(l.nonlinearity);
    entry["group_size"] = l.group_size ? json(*l.group_size) : json(nullptr);
    entry["compensate"] = l.compensate_here;
    entry["input_index"] = l.input_index.empty() ? json(nullptr) : json(l.input_index);

    const std::string wname = tensor_file(i, "weight");
    write_tensor(dir / wname, l.weight);
    entry["weight"] = wname;
    if (l.bias) {
      const std::string bname = tensor_file(i, "bias");
      write_tensor(dir / bname, Matrix(l.bias->size(), 1, *l.bias));
      entry["bias"] = bname;
    } else {
      entry["bias"] = nullptr;
    }
    layers.push_back(std::move(entry));
  }

  json manifest;
  manifest["format"] = kModelFormat;
  manifest["format_version"] = kModelFormatVersion;
  manifest["metadata"] = model.metadata;
  manifest["layers"] = std::move(layers);
  write_text(dir / kManifestName, manifest.dump(2) + "\n");
}

ModelSpec load_model(const fs::path& dir) {
  const fs::path path = dir / kManifestName;
  std::ifstream in(path);
  if (!in) throw IoError("cannot open model manifest: " + path.string());
  json manifest;
  try {
    manifest = json::parse(in);
  } catch (const json::exception& e) {
    throw IoError(path.string() + ": " + e.what());
  }
  const std::string where = path.string();
  if (field<std::string>(manifest, "format", where) != kModelFormat) throw IoError(where + ": not a model manifest");
  if (field<int>(manifest, "format_version", where) != kModelFormatVersion) {
    throw IoError(where + ": unsupported format version");
  }

  ModelSpec model;
  if (manifest.contains("metadata")) {
    model.metadata = field<std::map<std::string, std::string>>(manifest, "metadata", where);
  }
  const json& layers = manifest.at("layers");
  if (!layers.is_array()) throw IoError(where + ": 'layers' must be an array");
  for (const json& entry : layers) {
    const auto name = field<std::string>(entry, "name", where);
    const std::string lw = where + " layer '" + name + "'";
    LayerRecord l(name, read_tensor(dir / field<std::string>(entry, "weight", lw)));
    try {
      l.kind = parse_layer_kind(field<std::string>(entry, "kind", lw));
      l.nonlinearity = parse_nonlinearity(field<std::string>(entry, "nonlinearity", lw));
    } catch (const ConfigError& e) {
      throw IoError(lw + ": " + e.what());
    }
    l.compensate_here = field<bool>(entry, "compensate", lw);
    l.in_features = field<std::size_t>(entry, "d_in", lw);
    if (entry.contains("group_size") && !entry["group_size"].is_null()) {
      l.group_size = field<std::size_t>(entry, "group_size", lw);
    }
    if (entry.contains("input_index") && !entry["input_index"].is_null()) {
      l.input_index = field<std::vector<std::size_t>>(entry, "input_index", lw);
    }
    if (entry.contains("bias") && !entry["bias"].is_null()) {
      const Matrix b = read_tensor(dir / field<std::string>(entry, "bias", lw));
      if (b.cols() != 1) throw IoError(lw + ": bias tensor must be a column");
      l.bias = std::vector<double>(b.data().begin(), b.data().end());
    }
    if (field<std::size_t>(entry, "d_out", lw) != l.d_out()) throw IoError(lw + ": d_out disagrees with weight");
    model.layers.push_back(std::move(l));
  }
  try {
    model.validate();
  } catch (const Error& e) {
    throw IoError(where + ": " + e.what());
  }
  return model;
}

std::string report_json(const RunReport& report) {
  json rows = json::array();
  for (const auto& r : report.layers) {
    rows.push_back({{"layer", r.layer},
                    {"ratio", r.ratio},
                    {"kept", r.kept},
                    {"residual_before", r.residual_before},
                    {"residual_after", r.residual_after},
                    {"variant", report_label(r.variant)},
                    {"seconds", r.seconds}});
  }
  return rows.dump(2) + "\n";
}

void write_report(const fs::path& path, const RunReport& report) { write_text(path, report_json(report)); }

}  // namespace colprune
