#include "csc/config.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

namespace csc {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

double to_double(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing");
    return d;
  } catch (const std::exception&) {
    throw ParseError("config: bad number for " + key + ": '" + v + "'");
  }
}

long long to_int(const std::string& key, const std::string& v) {
  long long out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size())
    throw ParseError("config: bad integer for " + key + ": '" + v + "'");
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "on") return true;
  if (v == "false" || v == "0" || v == "off") return false;
  throw ParseError("config: bad boolean for " + key + ": '" + v + "'");
}

// Walks every `prefix.` key through the setter; unknown keys throw.
template <typename Setter>
void apply_prefix(const ConfigMap& map, const std::string& prefix, Setter set) {
  for (const auto& [key, value] : map) {
    if (key.rfind(prefix + ".", 0) != 0) continue;
    const std::string name = key.substr(prefix.size() + 1);
    if (!set(name, key, value)) throw ParseError("config: unknown key " + key);
  }
}

}  // namespace

ConfigMap parse_config_text(const std::string& text) {
  ConfigMap out;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ParseError("config line " + std::to_string(lineno) + ": empty key");
    out[key] = value;
  }
  return out;
}

ConfigMap read_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("config: cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_config_text(buf.str());
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

ConfigMap merge_config(ConfigMap a, const ConfigMap& b) {
  for (const auto& [k, v] : b) a[k] = v;
  return a;
}

void check_known_sections(const ConfigMap& map, const std::vector<std::string>& known) {
  const std::set<std::string> ok(known.begin(), known.end());
  for (const auto& [key, value] : map) {
    const size_t dot = key.find('.');
    const std::string section = dot == std::string::npos ? key : key.substr(0, dot);
    if (!ok.count(section)) throw ParseError("config: unknown section in key " + key);
  }
}

void apply_scenario_config(const ConfigMap& map, ScenarioConfig& out) {
  apply_prefix(map, "scenario", [&](const std::string& n, const std::string& k, const std::string& v) {
    if (n == "name") out.name = v;
    else if (n == "num_targets") out.num_targets = static_cast<int>(to_int(k, v));
    else if (n == "frames") out.frames = static_cast<int>(to_int(k, v));
    else if (n == "image_w") out.image_w = static_cast<int>(to_int(k, v));
    else if (n == "image_h") out.image_h = static_cast<int>(to_int(k, v));
    else if (n == "identical_base") out.identical_base = to_bool(k, v);
    else if (n == "target_w") out.target_w = to_double(k, v);
    else if (n == "target_h") out.target_h = to_double(k, v);
    else if (n == "accent_fraction") out.accent_fraction = to_double(k, v);
    else if (n == "texture_seed") out.texture_seed = static_cast<std::uint64_t>(to_int(k, v));
    else if (n == "min_speed") out.min_speed = to_double(k, v);
    else if (n == "max_speed") out.max_speed = to_double(k, v);
    else if (n == "crossings") out.crossings = static_cast<int>(to_int(k, v));
    else if (n == "occlusion_rate") out.occlusion_rate = to_double(k, v);
    else if (n == "seed") out.seed = static_cast<std::uint64_t>(to_int(k, v));
    else return false;
    return true;
  });
}

void apply_model_config(const ConfigMap& map, ModelConfig& out) {
  apply_prefix(map, "model", [&](const std::string& n, const std::string& k, const std::string& v) {
    if (n == "feature_dim") out.feature_dim = static_cast<int>(to_int(k, v));
    else if (n == "grid_rows") out.grid.rows = static_cast<int>(to_int(k, v));
    else if (n == "grid_cols") out.grid.cols = static_cast<int>(to_int(k, v));
    else if (n == "part_resolution") out.part_resolution = static_cast<int>(to_int(k, v));
    else if (n == "semantic_resolution") out.semantic_resolution = static_cast<int>(to_int(k, v));
    else if (n == "pad_fraction") out.pad_fraction = to_double(k, v);
    else if (n == "layer_norm") out.layer_norm = to_bool(k, v);
    else if (n == "variant") out.variant = fusion_variant_from_string(v);
    else if (n == "feat_unit_norm") out.feat_unit_norm = to_bool(k, v);
    else if (n == "absent_logit") out.absent_logit = to_bool(k, v);
    else if (n == "margin") out.margin = to_double(k, v);
    else if (n == "horizon_train") out.horizon_train = static_cast<int>(to_int(k, v));
    else if (n == "horizon_infer") out.horizon_infer = static_cast<int>(to_int(k, v));
    else if (n == "encoder_hidden") out.encoder.hidden = static_cast<int>(to_int(k, v));
    else return false;
    return true;
  });
}

void apply_train_config(const ConfigMap& map, TrainConfig& out) {
  apply_prefix(map, "train", [&](const std::string& n, const std::string& k, const std::string& v) {
    if (n == "seed") out.seed = static_cast<std::uint64_t>(to_int(k, v));
    else if (n == "clip_len") out.clip_len = static_cast<int>(to_int(k, v));
    else if (n == "batch_clips") out.batch_clips = static_cast<int>(to_int(k, v));
    else if (n == "steps") out.steps = static_cast<int>(to_int(k, v));
    else if (n == "lr") out.lr = to_double(k, v);
    else if (n == "weight_decay") out.weight_decay = to_double(k, v);
    else return false;
    return true;
  });
}

void apply_tracker_config(const ConfigMap& map, TrackerConfig& out) {
  apply_prefix(map, "tracker", [&](const std::string& n, const std::string& k, const std::string& v) {
    if (n == "beta") out.beta = to_double(k, v);
    else if (n == "horizon") out.horizon = static_cast<int>(to_int(k, v));
    else if (n == "window") out.window = static_cast<int>(to_int(k, v));
    else if (n == "max_age") out.max_age = static_cast<int>(to_int(k, v));
    else if (n == "seed") out.seed = static_cast<std::uint64_t>(to_int(k, v));
    else return false;
    return true;
  });
}

void apply_noise_config(const ConfigMap& map, NoiseConfig& out) {
  apply_prefix(map, "noise", [&](const std::string& n, const std::string& k, const std::string& v) {
    if (n == "shift_prob") out.shift_prob = to_double(k, v);
    else if (n == "shift_max_fraction") out.shift_max_fraction = to_double(k, v);
    else if (n == "shift_max_pixels") out.shift_max_pixels = to_double(k, v);
    else if (n == "resize_lo") out.resize_lo = to_double(k, v);
    else if (n == "resize_hi") out.resize_hi = to_double(k, v);
    else return false;
    return true;
  });
}

}  // namespace csc
