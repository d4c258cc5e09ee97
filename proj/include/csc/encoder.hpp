#ifndef CSC_ENCODER_HPP
#define CSC_ENCODER_HPP

#include <vector>

#include "csc/ad.hpp"
#include "csc/geometry.hpp"
#include "csc/model.hpp"

namespace csc {

// Shared feature extractor f(.). All hierarchy levels go through the same
// weights; patches below the encoder input resolution are resampled first.

// Forward a batch of flattened patches (B x 3*res*res) to features (B x D).
ad::Var encode_batch(ad::Tape& tape, const ParamVars& pv, const ModelConfig& cfg,
                     ad::Var patches);

// Flatten + stack patches, resampling to the encoder input resolution when
// needed. Row order follows the input order.
ad::Mat pack_patches(const std::vector<Patch>& patches, const ModelConfig& cfg);

// Per-triplet patch order used throughout: parts (n_parts rows), semantic,
// context, context_background.
ad::Mat pack_triplet(const RegionTriplet& t, const ModelConfig& cfg);

// Convenience single-patch encode.
Eigen::RowVectorXd encode_patch(const Patch& patch, const ModelParams& params);

struct TripletFeatures {
  ad::Var parts;       // n_parts x D
  ad::Var semantic;    // 1 x D
  ad::Var context;     // 1 x D
  ad::Var context_bg;  // 1 x D
};

// Slice the outputs of an encoded packed-triplet batch for detection i.
TripletFeatures slice_triplet_features(ad::Tape& tape, ad::Var batch_features, int index,
                                       const ModelConfig& cfg);

// Rows per detection in a packed triplet batch.
inline int triplet_rows(const ModelConfig& cfg) { return cfg.n_parts() + 3; }

}  // namespace csc

#endif
