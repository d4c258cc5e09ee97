#include "csc/attention.hpp"

#include <cmath>

namespace csc {

ad::Var attention(ad::Tape& tape, ad::Var queries, ad::Var keys, ad::Var values) {
  if (tape.val(keys).rows() == 0) throw ShapeError("attention: empty key set");
  if (tape.val(keys).rows() != tape.val(values).rows())
    throw ShapeError("attention: key/value count mismatch");
  if (tape.val(queries).cols() != tape.val(keys).cols())
    throw ShapeError("attention: query/key dimension mismatch");
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(tape.val(queries).cols()));
  ad::Var logits = tape.scale(tape.matmul_nt(queries, keys), inv_sqrt_d);
  return tape.matmul(tape.softmax_rows(logits), values);
}

namespace {

ad::Var attn_block(ad::Tape& tape, const ParamVars& pv, const ModelConfig& cfg,
                   const std::string& prefix, ad::Var queries, ad::Var key_values) {
  ad::Var q = tape.matmul(queries, pv.at(prefix + ".Wq"));
  ad::Var k = tape.matmul(key_values, pv.at(prefix + ".Wk"));
  ad::Var v = tape.matmul(key_values, pv.at(prefix + ".Wv"));
  ad::Var att = tape.matmul(attention(tape, q, k, v), pv.at(prefix + ".Wo"));
  ad::Var out = tape.add(queries, att);
  if (cfg.layer_norm)
    out = tape.layer_norm_rows(out, pv.at(prefix + ".ln.g"), pv.at(prefix + ".ln.b"));
  return out;
}

ad::Var project(ad::Tape& tape, const ParamVars& pv, ad::Var x) {
  return tape.bias_add(tape.matmul(x, pv.at("fus.proj.W")), pv.at("fus.proj.b"));
}

}  // namespace

ad::Var cross_attention_block(ad::Tape& tape, const ParamVars& pv, const ModelConfig& cfg,
                              ad::Var queries, ad::Var key_values) {
  return attn_block(tape, pv, cfg, "fus.cross", queries, key_values);
}

ad::Var self_attention_block(ad::Tape& tape, const ParamVars& pv, const ModelConfig& cfg,
                             ad::Var tokens) {
  return attn_block(tape, pv, cfg, "fus.self", tokens, tokens);
}

ad::Var fuse(ad::Tape& tape, const ParamVars& pv, const ModelConfig& cfg, ad::Var part_feats,
             ad::Var semantic_feat, ad::Var context_feat) {
  if (tape.val(semantic_feat).cols() != cfg.feature_dim ||
      (part_feats.valid() && tape.val(part_feats).cols() != cfg.feature_dim))
    throw ShapeError("fuse: feature length mismatch");

  switch (cfg.variant) {
    case FusionVariant::semantic_only:
      return project(tape, pv, semantic_feat);

    case FusionVariant::multiregion_concat: {
      // Split-and-concatenate baseline: bin features next to the box
      // feature, one linear projection, no attention.
      std::vector<ad::Var> pieces;
      for (int u = 0; u < cfg.n_parts(); ++u) pieces.push_back(tape.rows(part_feats, u, 1));
      pieces.push_back(semantic_feat);
      ad::Var flat = tape.concat_cols(pieces);
      return tape.bias_add(tape.matmul(flat, pv.at("fus.concat.W")), pv.at("fus.concat.b"));
    }

    case FusionVariant::semantic_compositional: {
      ad::Var x = tape.concat_rows({part_feats, semantic_feat});
      ad::Var y = self_attention_block(tape, pv, cfg, x);
      return project(tape, pv, tape.mean_rows(y));
    }

    case FusionVariant::semantic_contextual: {
      ad::Var y = self_attention_block(tape, pv, cfg, semantic_feat);
      y = cross_attention_block(tape, pv, cfg, y, context_feat);
      return project(tape, pv, tape.mean_rows(y));
    }

    case FusionVariant::full: {
      ad::Var x = tape.concat_rows({part_feats, semantic_feat});
      ad::Var y = self_attention_block(tape, pv, cfg, x);
      y = cross_attention_block(tape, pv, cfg, y, context_feat);
      return project(tape, pv, tape.mean_rows(y));
    }
  }
  throw std::logic_error("fuse: unreachable");
}

ad::Mat tokens_for_frame(const std::vector<Detection>& detections, const Image& image,
                         const ModelParams& params) {
  const ModelConfig& cfg = params.cfg;
  if (detections.empty()) return ad::Mat(0, cfg.feature_dim);

  RegionConfig rc{cfg.grid, cfg.part_resolution, cfg.semantic_resolution, cfg.pad_fraction};
  const int rows = triplet_rows(cfg);
  ad::Mat packed(static_cast<Eigen::Index>(detections.size()) * rows,
                 3 * cfg.encoder.input_resolution * cfg.encoder.input_resolution);
  for (size_t i = 0; i < detections.size(); ++i) {
    RegionTriplet t = build_region_triplet(image, detections[i], detections, rc);
    packed.middleRows(static_cast<Eigen::Index>(i) * rows, rows) = pack_triplet(t, cfg);
  }

  ad::Tape tape;
  ParamVars pv = register_params(tape, params);
  ad::Var feats = encode_batch(tape, pv, cfg, tape.input(std::move(packed)));
  ad::Mat out(static_cast<Eigen::Index>(detections.size()), cfg.feature_dim);
  for (size_t i = 0; i < detections.size(); ++i) {
    TripletFeatures f = slice_triplet_features(tape, feats, static_cast<int>(i), cfg);
    ad::Var token = fuse(tape, pv, cfg, f.parts, f.semantic, f.context);
    out.row(static_cast<Eigen::Index>(i)) = tape.val(token).row(0);
  }
  return out;
}

}  // namespace csc
