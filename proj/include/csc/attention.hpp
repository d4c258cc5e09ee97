#ifndef CSC_ATTENTION_HPP
#define CSC_ATTENTION_HPP

#include <vector>

#include "csc/encoder.hpp"
#include "csc/model.hpp"

namespace csc {

// Scaled dot-product attention: softmax(Q K^T / sqrt(d)) V.
// Throws on an empty key set or mismatched dimensions.
ad::Var attention(ad::Tape& tape, ad::Var queries, ad::Var keys, ad::Var values);

// Residual cross-attention block shared by CSC fusion and the feature
// triplet loss: q + Att(q Wq, kv Wk, kv Wv) Wo, layer-normalized when
// configured.
ad::Var cross_attention_block(ad::Tape& tape, const ParamVars& pv, const ModelConfig& cfg,
                              ad::Var queries, ad::Var key_values);

// Residual self-attention over a token set (no positional encoding).
ad::Var self_attention_block(ad::Tape& tape, const ParamVars& pv, const ModelConfig& cfg,
                             ad::Var tokens);

// Fuse compositional/semantic/contextual features into one CSC token
// (1 x D). Which inputs participate depends on cfg.variant.
ad::Var fuse(ad::Tape& tape, const ParamVars& pv, const ModelConfig& cfg, ad::Var part_feats,
             ad::Var semantic_feat, ad::Var context_feat);

// Full per-frame pipeline: geometry -> encoder -> fuse, one token per
// detection, order-aligned with the input. Returns an N x D matrix.
ad::Mat tokens_for_frame(const std::vector<Detection>& detections, const Image& image,
                         const ModelParams& params);

}  // namespace csc

#endif
