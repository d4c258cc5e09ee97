#ifndef CSC_MODEL_HPP
#define CSC_MODEL_HPP

#include <array>
#include <cstdint>
#include <map>
#include <string>

#include "csc/ad.hpp"
#include "csc/types.hpp"

namespace csc {

struct EncoderConfig {
  int input_resolution = 64;  // all patches are resampled to this before encoding
  std::array<int, 3> channels{8, 16, 24};
  std::array<int, 3> strides{4, 2, 2};
  int kernel = 3;
  int pad = 1;
  int hidden = 64;

  ad::ConvGeom stage_geom(int stage, int prev_c, int prev_res) const {
    return ad::ConvGeom{prev_c, prev_res, prev_res, channels[stage], kernel, strides[stage], pad};
  }
};

enum class FusionVariant {
  full,                   // parts + semantic + context through CSC-Attention
  semantic_only,          // box feature, projection only
  semantic_compositional, // parts + semantic, self-attention only
  semantic_contextual,    // semantic + context, no part tokens
  multiregion_concat      // concatenate bin features, project, no attention
};

std::string to_string(FusionVariant v);
FusionVariant fusion_variant_from_string(const std::string& s);

struct ModelConfig {
  int feature_dim = 64;  // D
  GridPair grid{2, 2};
  int part_resolution = 32;
  int semantic_resolution = 64;
  double pad_fraction = 0.1;
  EncoderConfig encoder;
  bool layer_norm = true;
  FusionVariant variant = FusionVariant::full;
  bool feat_unit_norm = true;
  bool absent_logit = true;  // learned no-detection column in training softmax groups
  double margin = 0.3;       // alpha in the feature hinge loss
  int horizon_train = 8;
  int horizon_infer = 24;

  int n_parts() const { return grid.rows * grid.cols; }
};

// All trainable tensors, keyed by name. A flat named-tensor map keeps
// checkpointing, the optimizer, and finite-difference checks generic.
struct ModelParams {
  ModelConfig cfg;
  std::map<std::string, ad::Mat> tensors;

  static ModelParams init(const ModelConfig& cfg, std::uint64_t seed);

  const ad::Mat& at(const std::string& name) const;
  ad::Mat& at(const std::string& name);
};

// Tape handles for every tensor of a ModelParams, for one forward pass.
struct ParamVars {
  std::map<std::string, ad::Var> vars;
  ad::Var at(const std::string& name) const;
};

ParamVars register_params(ad::Tape& tape, const ModelParams& params);

}  // namespace csc

#endif
