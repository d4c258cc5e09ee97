#include "csc/checkpoint.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace csc {

namespace {

constexpr int kFormatVersion = 1;

using nlohmann::json;

json config_json(const ModelConfig& cfg) {
  json j;
  j["feature_dim"] = cfg.feature_dim;
  j["grid"] = {cfg.grid.rows, cfg.grid.cols};
  j["part_resolution"] = cfg.part_resolution;
  j["semantic_resolution"] = cfg.semantic_resolution;
  j["pad_fraction"] = cfg.pad_fraction;
  j["encoder"] = {{"input_resolution", cfg.encoder.input_resolution},
                  {"channels", cfg.encoder.channels},
                  {"strides", cfg.encoder.strides},
                  {"kernel", cfg.encoder.kernel},
                  {"pad", cfg.encoder.pad},
                  {"hidden", cfg.encoder.hidden}};
  j["layer_norm"] = cfg.layer_norm;
  j["variant"] = to_string(cfg.variant);
  j["feat_unit_norm"] = cfg.feat_unit_norm;
  j["absent_logit"] = cfg.absent_logit;
  j["margin"] = cfg.margin;
  j["horizon_train"] = cfg.horizon_train;
  j["horizon_infer"] = cfg.horizon_infer;
  return j;
}

ModelConfig config_from_json(const json& j) {
  ModelConfig cfg;
  cfg.feature_dim = j.at("feature_dim").get<int>();
  cfg.grid.rows = j.at("grid").at(0).get<int>();
  cfg.grid.cols = j.at("grid").at(1).get<int>();
  cfg.part_resolution = j.at("part_resolution").get<int>();
  cfg.semantic_resolution = j.at("semantic_resolution").get<int>();
  cfg.pad_fraction = j.at("pad_fraction").get<double>();
  const json& e = j.at("encoder");
  cfg.encoder.input_resolution = e.at("input_resolution").get<int>();
  for (int i = 0; i < 3; ++i) {
    cfg.encoder.channels[static_cast<size_t>(i)] = e.at("channels").at(i).get<int>();
    cfg.encoder.strides[static_cast<size_t>(i)] = e.at("strides").at(i).get<int>();
  }
  cfg.encoder.kernel = e.at("kernel").get<int>();
  cfg.encoder.pad = e.at("pad").get<int>();
  cfg.encoder.hidden = e.at("hidden").get<int>();
  cfg.layer_norm = j.at("layer_norm").get<bool>();
  cfg.variant = fusion_variant_from_string(j.at("variant").get<std::string>());
  cfg.feat_unit_norm = j.at("feat_unit_norm").get<bool>();
  cfg.absent_logit = j.at("absent_logit").get<bool>();
  cfg.margin = j.at("margin").get<double>();
  cfg.horizon_train = j.at("horizon_train").get<int>();
  cfg.horizon_infer = j.at("horizon_infer").get<int>();
  return cfg;
}

}  // namespace

std::string model_config_to_json(const ModelConfig& cfg) { return config_json(cfg).dump(2); }

void save_checkpoint(const ModelParams& params, const std::string& path) {
  json j;
  j["format_version"] = kFormatVersion;
  j["config"] = config_json(params.cfg);
  json tensors = json::object();
  for (const auto& [name, m] : params.tensors) {
    json t;
    t["rows"] = m.rows();
    t["cols"] = m.cols();
    std::vector<double> data(static_cast<size_t>(m.size()));
    // row-major on disk for readability
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c)
        data[static_cast<size_t>(r * m.cols() + c)] = m(r, c);
    t["data"] = data;
    tensors[name] = std::move(t);
  }
  j["tensors"] = std::move(tensors);

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("checkpoint: cannot write " + path);
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("checkpoint: write failed for " + path);
}

ModelParams load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("checkpoint: cannot read " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  if (j.at("format_version").get<int>() != kFormatVersion)
    throw ParseError(path + ": unsupported format_version");

  ModelParams params;
  params.cfg = config_from_json(j.at("config"));
  for (const auto& [name, t] : j.at("tensors").items()) {
    const Eigen::Index rows = t.at("rows").get<Eigen::Index>();
    const Eigen::Index cols = t.at("cols").get<Eigen::Index>();
    const auto& data = t.at("data");
    if (static_cast<Eigen::Index>(data.size()) != rows * cols)
      throw ParseError(path + ": tensor " + name + " size mismatch");
    ad::Mat m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
      for (Eigen::Index c = 0; c < cols; ++c)
        m(r, c) = data.at(static_cast<size_t>(r * cols + c)).get<double>();
    params.tensors[name] = std::move(m);
  }
  return params;
}

}  // namespace csc
