#include "csc/encoder.hpp"

namespace csc {

ad::Var encode_batch(ad::Tape& tape, const ParamVars& pv, const ModelConfig& cfg,
                     ad::Var patches) {
  const EncoderConfig& e = cfg.encoder;
  const int res0 = e.input_resolution;
  if (tape.val(patches).cols() != 3 * res0 * res0)
    throw ShapeError("encode_batch: patches must be B x 3*res*res");

  ad::Var x = patches;
  int prev_c = 3;
  int res = res0;
  for (int s = 0; s < 3; ++s) {
    const ad::ConvGeom g = e.stage_geom(s, prev_c, res);
    const std::string k = "enc.conv" + std::to_string(s + 1);
    x = tape.relu(tape.conv_stage(x, pv.at(k + ".W"), pv.at(k + ".b"), g));
    prev_c = g.out_c;
    res = g.out_h();
  }
  x = tape.global_avg_pool(x, prev_c, res * res);
  x = tape.relu(tape.bias_add(tape.matmul(x, pv.at("enc.proj1.W")), pv.at("enc.proj1.b")));
  return tape.bias_add(tape.matmul(x, pv.at("enc.proj2.W")), pv.at("enc.proj2.b"));
}

ad::Mat pack_patches(const std::vector<Patch>& patches, const ModelConfig& cfg) {
  const int res = cfg.encoder.input_resolution;
  ad::Mat m(static_cast<Eigen::Index>(patches.size()), 3 * res * res);
  for (size_t i = 0; i < patches.size(); ++i) {
    const Patch& p = patches[i];
    if (p.width() == res && p.height() == res) {
      m.row(static_cast<Eigen::Index>(i)) = flatten_patch(p);
    } else if (p.width() == cfg.part_resolution && p.height() == cfg.part_resolution) {
      m.row(static_cast<Eigen::Index>(i)) = flatten_patch(resize_patch(p, res, res));
    } else {
      throw ShapeError("pack_patches: patch is not at a configured resolution");
    }
  }
  return m;
}

ad::Mat pack_triplet(const RegionTriplet& t, const ModelConfig& cfg) {
  std::vector<Patch> all(t.parts.begin(), t.parts.end());
  all.push_back(t.semantic);
  all.push_back(t.context);
  all.push_back(t.context_background);
  return pack_patches(all, cfg);
}

Eigen::RowVectorXd encode_patch(const Patch& patch, const ModelParams& params) {
  ad::Tape tape;
  ParamVars pv = register_params(tape, params);
  ad::Var in = tape.input(pack_patches({patch}, params.cfg));
  ad::Var out = encode_batch(tape, pv, params.cfg, in);
  return tape.val(out).row(0);
}

TripletFeatures slice_triplet_features(ad::Tape& tape, ad::Var batch_features, int index,
                                       const ModelConfig& cfg) {
  const int n = cfg.n_parts();
  const int base = index * triplet_rows(cfg);
  TripletFeatures f;
  f.parts = tape.rows(batch_features, base, n);
  f.semantic = tape.rows(batch_features, base + n, 1);
  f.context = tape.rows(batch_features, base + n + 1, 1);
  f.context_bg = tape.rows(batch_features, base + n + 2, 1);
  return f;
}

}  // namespace csc
