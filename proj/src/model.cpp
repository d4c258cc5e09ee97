#include "csc/model.hpp"

#include <cmath>
#include <stdexcept>

namespace csc {

std::string to_string(FusionVariant v) {
  switch (v) {
    case FusionVariant::full: return "full";
    case FusionVariant::semantic_only: return "semantic_only";
    case FusionVariant::semantic_compositional: return "semantic_compositional";
    case FusionVariant::semantic_contextual: return "semantic_contextual";
    case FusionVariant::multiregion_concat: return "multiregion_concat";
  }
  return "full";
}

FusionVariant fusion_variant_from_string(const std::string& s) {
  if (s == "full") return FusionVariant::full;
  if (s == "semantic_only") return FusionVariant::semantic_only;
  if (s == "semantic_compositional") return FusionVariant::semantic_compositional;
  if (s == "semantic_contextual") return FusionVariant::semantic_contextual;
  if (s == "multiregion_concat") return FusionVariant::multiregion_concat;
  throw std::invalid_argument("unknown fusion variant: " + s);
}

namespace {

ad::Mat uniform_mat(int rows, int cols, double scale, Rng& rng) {
  ad::Mat m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = rng.uniform(-scale, scale);
  return m;
}

// Uniform in +-sqrt(1/fan_in); small, seeded.
ad::Mat linear_init(int in, int out, Rng& rng) {
  return uniform_mat(in, out, std::sqrt(1.0 / in), rng);
}

}  // namespace

ModelParams ModelParams::init(const ModelConfig& cfg, std::uint64_t seed) {
  Rng rng(seed);
  ModelParams p;
  p.cfg = cfg;
  const int D = cfg.feature_dim;
  const EncoderConfig& e = cfg.encoder;

  int prev_c = 3;
  int res = e.input_resolution;
  for (int s = 0; s < 3; ++s) {
    const ad::ConvGeom g = e.stage_geom(s, prev_c, res);
    p.tensors["enc.conv" + std::to_string(s + 1) + ".W"] =
        uniform_mat(g.out_c, g.col_width(), std::sqrt(1.0 / g.col_width()), rng);
    p.tensors["enc.conv" + std::to_string(s + 1) + ".b"] = ad::Mat::Zero(1, g.out_c);
    prev_c = g.out_c;
    res = g.out_h();
  }
  p.tensors["enc.proj1.W"] = linear_init(e.channels[2], e.hidden, rng);
  p.tensors["enc.proj1.b"] = ad::Mat::Zero(1, e.hidden);
  p.tensors["enc.proj2.W"] = linear_init(e.hidden, D, rng);
  p.tensors["enc.proj2.b"] = ad::Mat::Zero(1, D);

  for (const char* blk : {"fus.self", "fus.cross"}) {
    for (const char* w : {"Wq", "Wk", "Wv", "Wo"})
      p.tensors[std::string(blk) + "." + w] = linear_init(D, D, rng);
    p.tensors[std::string(blk) + ".ln.g"] = ad::Mat::Ones(1, D);
    p.tensors[std::string(blk) + ".ln.b"] = ad::Mat::Zero(1, D);
  }
  p.tensors["fus.proj.W"] = linear_init(D, D, rng);
  p.tensors["fus.proj.b"] = ad::Mat::Zero(1, D);
  p.tensors["fus.concat.W"] = linear_init((cfg.n_parts() + 1) * D, D, rng);
  p.tensors["fus.concat.b"] = ad::Mat::Zero(1, D);

  p.tensors["assoc.Wq"] = linear_init(D, D, rng);
  p.tensors["assoc.Wk"] = linear_init(D, D, rng);
  p.tensors["assoc.bg"] = uniform_mat(1, D, std::sqrt(1.0 / D), rng);
  return p;
}

const ad::Mat& ModelParams::at(const std::string& name) const {
  auto it = tensors.find(name);
  if (it == tensors.end()) throw std::out_of_range("no such tensor: " + name);
  return it->second;
}

ad::Mat& ModelParams::at(const std::string& name) {
  auto it = tensors.find(name);
  if (it == tensors.end()) throw std::out_of_range("no such tensor: " + name);
  return it->second;
}

ParamVars register_params(ad::Tape& tape, const ModelParams& params) {
  ParamVars pv;
  for (const auto& [name, mat] : params.tensors) pv.vars[name] = tape.input(mat);
  return pv;
}

ad::Var ParamVars::at(const std::string& name) const {
  auto it = vars.find(name);
  if (it == vars.end()) throw std::out_of_range("no such param var: " + name);
  return it->second;
}

}  // namespace csc
