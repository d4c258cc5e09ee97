#include "csc/training.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "csc/attention.hpp"
#include "csc/encoder.hpp"
#include "csc/geometry.hpp"

namespace csc {

ClipBatch make_clip(const Sequence& seq, int start, int clip_len) {
  if (start < 0 || start + clip_len > static_cast<int>(seq.gt.size()))
    throw std::invalid_argument("make_clip: window out of range");
  ClipBatch clip;
  clip.seq = &seq;
  clip.start = start;
  clip.length = clip_len;

  std::set<int> ids;
  for (int q = 0; q < clip_len; ++q)
    for (const Detection& d : seq.gt[static_cast<size_t>(start + q)]) {
      clip.detections.push_back(d);
      clip.det_step.push_back(q);
      if (d.identity >= 0) ids.insert(d.identity);
    }
  clip.identities.assign(ids.begin(), ids.end());

  clip.gt.assign(clip.identities.size(), std::vector<int>(static_cast<size_t>(clip_len), kAbsent));
  for (size_t n = 0; n < clip.detections.size(); ++n) {
    const Detection& d = clip.detections[n];
    if (d.identity < 0) continue;
    const auto it = std::lower_bound(clip.identities.begin(), clip.identities.end(), d.identity);
    const size_t j = static_cast<size_t>(it - clip.identities.begin());
    const int q = clip.det_step[n];
    if (clip.gt[j][static_cast<size_t>(q)] != kAbsent)
      throw std::invalid_argument("make_clip: identity claimed twice in one frame");
    clip.gt[j][static_cast<size_t>(q)] = static_cast<int>(n);
  }
  return clip;
}

ClipBatch sample_clip(const Dataset& dataset, int clip_len, Rng& rng) {
  std::vector<int> eligible;
  for (size_t s = 0; s < dataset.size(); ++s)
    if (static_cast<int>(dataset[s].gt.size()) >= clip_len) eligible.push_back(static_cast<int>(s));
  if (eligible.empty()) throw std::invalid_argument("sample_clip: all sequences shorter than T");
  const Sequence& seq =
      dataset[static_cast<size_t>(eligible[static_cast<size_t>(
          rng.uniform_int(0, static_cast<int>(eligible.size()) - 1))])];
  const int start = rng.uniform_int(0, static_cast<int>(seq.gt.size()) - clip_len);
  return make_clip(seq, start, clip_len);
}

double association_loss(const AssociationProbabilities& probs,
                        const std::vector<std::vector<int>>& gt_assignment,
                        const std::vector<int>& det_frames) {
  // clip steps = distinct frames in first-appearance order
  std::vector<int> group_frames;
  std::vector<int> group_of_det(det_frames.size());
  for (size_t i = 0; i < det_frames.size(); ++i) {
    int gi = -1;
    for (size_t k = 0; k < group_frames.size(); ++k)
      if (group_frames[k] == det_frames[i]) gi = static_cast<int>(k);
    if (gi < 0) {
      group_frames.push_back(det_frames[i]);
      gi = static_cast<int>(group_frames.size()) - 1;
    }
    group_of_det[i] = gi;
  }

  double loss = 0.0;
  const int N = static_cast<int>(det_frames.size());
  for (size_t j = 0; j < gt_assignment.size(); ++j) {
    for (size_t q = 0; q < gt_assignment[j].size(); ++q) {
      const int target = gt_assignment[j][q];
      if (target == kAbsent) continue;
      if (target < 0 || target >= N)
        throw std::out_of_range("association_loss: gt index out of range");
      (void)group_of_det;
      loss -= std::log(probs.probs(static_cast<Eigen::Index>(j), target));
    }
  }
  return loss;
}

TrainingProbabilities normalize_training(const ad::Mat& scores,
                                         const std::vector<int>& det_frames) {
  const int rows = static_cast<int>(scores.rows());
  const int N = static_cast<int>(det_frames.size());
  if (scores.cols() != N + 1) throw ShapeError("normalize_training: expected N+1 columns");

  std::vector<std::vector<int>> groups;
  std::vector<int> group_frames;
  for (int i = 0; i < N; ++i) {
    int gi = -1;
    for (size_t k = 0; k < group_frames.size(); ++k)
      if (group_frames[k] == det_frames[i]) gi = static_cast<int>(k);
    if (gi < 0) {
      group_frames.push_back(det_frames[i]);
      groups.emplace_back();
      gi = static_cast<int>(groups.size()) - 1;
    }
    groups[static_cast<size_t>(gi)].push_back(i);
  }

  TrainingProbabilities out;
  out.group_frames = group_frames;
  out.probs.det_frames = det_frames;
  out.probs.probs = ad::Mat(rows, N);
  out.absent_probs = ad::Mat(rows, static_cast<Eigen::Index>(groups.size()));
  for (int r = 0; r < rows; ++r) {
    for (size_t g = 0; g < groups.size(); ++g) {
      double mx = scores(r, N);  // absent column participates in every group
      for (int c : groups[g]) mx = std::max(mx, scores(r, c));
      double z = std::exp(scores(r, N) - mx);
      for (int c : groups[g]) z += std::exp(scores(r, c) - mx);
      for (int c : groups[g]) out.probs.probs(r, c) = std::exp(scores(r, c) - mx) / z;
      out.absent_probs(r, static_cast<Eigen::Index>(g)) = std::exp(scores(r, N) - mx) / z;
    }
  }
  return out;
}

ad::Var feature_triplet_loss_var(ad::Tape& tape, const ParamVars& pv, const ModelConfig& cfg,
                                 ad::Var part_feats, ad::Var semantic_feat,
                                 ad::Var context_bg_feat, double margin) {
  ad::Var fp = part_feats, fo = semantic_feat, fbg = context_bg_feat;
  if (cfg.feat_unit_norm) {
    fp = tape.l2_normalize_rows(fp);
    fo = tape.l2_normalize_rows(fo);
    fbg = tape.l2_normalize_rows(fbg);
  }
  // positive: the part whose attention response lands closest to the box
  ad::Var att_parts = cross_attention_block(tape, pv, cfg, fp, fo);
  if (cfg.feat_unit_norm) att_parts = tape.l2_normalize_rows(att_parts);
  std::vector<ad::Var> pos;
  const int n_parts = static_cast<int>(tape.val(part_feats).rows());
  for (int u = 0; u < n_parts; ++u)
    pos.push_back(tape.squared_distance(tape.rows(att_parts, u, 1), fo));
  ad::Var pos_min = tape.min_of(pos);

  // negative: box against masked-background context
  ad::Var att_bg = cross_attention_block(tape, pv, cfg, fo, fbg);
  if (cfg.feat_unit_norm) att_bg = tape.l2_normalize_rows(att_bg);
  ad::Var neg = tape.squared_distance(att_bg, fo);

  return tape.hinge(tape.add_const(tape.sub(pos_min, neg), margin));
}

double feature_triplet_loss(const ad::Mat& part_feats, const Eigen::RowVectorXd& semantic_feat,
                            const Eigen::RowVectorXd& context_bg_feat, const ModelParams& params,
                            double margin) {
  ad::Tape tape;
  ParamVars pv = register_params(tape, params);
  ad::Var loss = feature_triplet_loss_var(tape, pv, params.cfg, tape.input(part_feats),
                                          tape.input(semantic_feat), tape.input(context_bg_feat),
                                          margin);
  return tape.val(loss)(0, 0);
}

ClipForward forward_clip(ad::Tape& tape, const ParamVars& pv, const ModelParams& params,
                         const ClipBatch& clip) {
  const ModelConfig& cfg = params.cfg;
  const Sequence& seq = *clip.seq;
  const int N = static_cast<int>(clip.detections.size());
  const int M = static_cast<int>(clip.identities.size());
  const int res = cfg.encoder.input_resolution;
  const int rows = triplet_rows(cfg);
  RegionConfig rc{cfg.grid, cfg.part_resolution, cfg.semantic_resolution, cfg.pad_fraction};

  // One packed patch batch for the whole clip keeps the conv GEMMs large.
  ad::Mat packed(static_cast<Eigen::Index>(N) * rows, 3 * res * res);
  for (int n = 0; n < N; ++n) {
    const Detection& d = clip.detections[n];
    const Image& image = seq.frames[static_cast<size_t>(clip.start + clip.det_step[n])];
    std::vector<Detection> frame_dets;
    for (int m = 0; m < N; ++m)
      if (clip.det_step[m] == clip.det_step[n]) frame_dets.push_back(clip.detections[m]);
    RegionTriplet t = build_region_triplet(image, d, frame_dets, rc);
    packed.middleRows(static_cast<Eigen::Index>(n) * rows, rows) = pack_triplet(t, cfg);
  }

  ad::Var feats = encode_batch(tape, pv, cfg, tape.input(std::move(packed)));

  std::vector<ad::Var> tokens(static_cast<size_t>(N));
  std::vector<ad::Var> feat_terms;
  for (int n = 0; n < N; ++n) {
    TripletFeatures f = slice_triplet_features(tape, feats, n, cfg);
    tokens[static_cast<size_t>(n)] = fuse(tape, pv, cfg, f.parts, f.semantic, f.context);
    feat_terms.push_back(
        feature_triplet_loss_var(tape, pv, cfg, f.parts, f.semantic, f.context_bg, cfg.margin));
  }

  // Trajectory tokens from each identity's clip history.
  std::vector<TrajTokenVar> traj_tokens;
  for (int j = 0; j < M; ++j) {
    std::vector<ad::Var> history;
    for (int q = 0; q < clip.length; ++q) {
      const int n = clip.gt[static_cast<size_t>(j)][static_cast<size_t>(q)];
      if (n != kAbsent) history.push_back(tokens[static_cast<size_t>(n)]);
    }
    if (history.empty())
      throw std::invalid_argument("forward_clip: trajectory with no detections in clip");
    traj_tokens.push_back(
        build_trajectory_token_var(tape, history, cfg.horizon_train, cfg.feature_dim));
  }

  ad::Var det_tokens = tape.concat_rows(tokens);
  ad::Var scores = association_scores_var(tape, pv, cfg, traj_tokens, det_tokens,
                                          pv.at("assoc.bg"), cfg.absent_logit);

  // NLL terms: per (trajectory, clip step) softmax over that step's
  // detections plus the no-detection column when configured.
  std::vector<std::vector<int>> step_cols(static_cast<size_t>(clip.length));
  for (int n = 0; n < N; ++n) step_cols[static_cast<size_t>(clip.det_step[n])].push_back(n);
  std::vector<ad::NllTerm> terms;
  for (int j = 0; j < M; ++j) {
    for (int q = 0; q < clip.length; ++q) {
      const int target = clip.gt[static_cast<size_t>(j)][static_cast<size_t>(q)];
      std::vector<int> cols = step_cols[static_cast<size_t>(q)];
      if (cfg.absent_logit) cols.push_back(N);  // absent column
      if (target == kAbsent) {
        if (!cfg.absent_logit) continue;  // ablation mode: skip ABSENT terms
        terms.push_back({j, std::move(cols), N});
      } else {
        terms.push_back({j, std::move(cols), target});
      }
    }
  }

  ClipForward out;
  out.n_detections = N;
  out.assoc_loss = terms.empty() ? tape.input(ad::Mat::Zero(1, 1))
                                 : tape.nll_grouped(scores, std::move(terms));
  ad::Var feat_sum = feat_terms.size() == 1 ? feat_terms[0] : tape.concat_rows(feat_terms);
  out.feat_loss = N > 0 ? tape.scale(tape.sum_all(feat_sum), 1.0 / N)
                        : tape.input(ad::Mat::Zero(1, 1));
  return out;
}

double clip_loss_value(const ModelParams& params, const ClipBatch& clip) {
  ad::Tape tape;
  ParamVars pv = register_params(tape, params);
  ClipForward f = forward_clip(tape, pv, params, clip);
  return tape.val(f.assoc_loss)(0, 0) + tape.val(f.feat_loss)(0, 0);
}

std::map<std::string, ad::Mat> clip_loss_gradients(const ModelParams& params,
                                                   const ClipBatch& clip) {
  ad::Tape tape;
  ParamVars pv = register_params(tape, params);
  ClipForward f = forward_clip(tape, pv, params, clip);
  ad::Var total = tape.add(f.assoc_loss, f.feat_loss);
  tape.backward(total);
  std::map<std::string, ad::Mat> grads;
  for (const auto& [name, var] : pv.vars) {
    const ad::Mat& g = tape.grad(var);
    grads[name] = g.size() ? g : ad::Mat::Zero(params.at(name).rows(), params.at(name).cols());
  }
  return grads;
}

namespace {

void adamw_update(ModelParams& params, AdamWState& state, const TrainConfig& cfg, ad::Tape& tape,
                  const ParamVars& pv) {
  ++state.t;
  const double b1 = 0.9, b2 = 0.999, eps = 1e-8;
  const double bc1 = 1.0 - std::pow(b1, state.t);
  const double bc2 = 1.0 - std::pow(b2, state.t);
  for (auto& [name, tensor] : params.tensors) {
    const ad::Mat& gref = tape.grad(pv.at(name));
    const ad::Mat g = gref.size() ? gref : ad::Mat::Zero(tensor.rows(), tensor.cols());
    auto& [m, v] = state.moments.try_emplace(name, ad::Mat::Zero(tensor.rows(), tensor.cols()),
                                             ad::Mat::Zero(tensor.rows(), tensor.cols()))
                       .first->second;
    m = b1 * m + (1.0 - b1) * g;
    v = b2 * v + (1.0 - b2) * g.cwiseProduct(g);
    const ad::Mat mhat = m / bc1;
    const ad::Mat vhat = v / bc2;
    tensor -= cfg.lr * (mhat.array() / (vhat.array().sqrt() + eps)).matrix();
    tensor *= (1.0 - cfg.lr * cfg.weight_decay);
  }
}

}  // namespace

LossReport train_step(const std::vector<ClipBatch>& batch, ModelParams& params, AdamWState& state,
                      const TrainConfig& cfg) {
  if (batch.empty()) throw std::invalid_argument("train_step: empty batch");
  ad::Tape tape;
  ParamVars pv = register_params(tape, params);

  std::vector<ad::Var> assoc, feat;
  for (const ClipBatch& clip : batch) {
    ClipForward f = forward_clip(tape, pv, params, clip);
    assoc.push_back(f.assoc_loss);
    feat.push_back(f.feat_loss);
  }
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  ad::Var assoc_mean = tape.scale(tape.sum_all(tape.concat_rows(assoc)), inv_b);
  ad::Var feat_mean = tape.scale(tape.sum_all(tape.concat_rows(feat)), inv_b);
  ad::Var total = tape.add(assoc_mean, feat_mean);

  LossReport report;
  report.assoc = tape.val(assoc_mean)(0, 0);
  report.feat = tape.val(feat_mean)(0, 0);
  report.total = tape.val(total)(0, 0);
  report.margin = params.cfg.margin;
  if (!std::isfinite(report.total))
    throw std::runtime_error("train_step: non-finite loss (assoc=" + std::to_string(report.assoc) +
                             ", feat=" + std::to_string(report.feat) + ")");

  if (cfg.lr != 0.0) {
    tape.backward(total);
    adamw_update(params, state, cfg, tape, pv);
  }
  return report;
}

LossReport run_training(const Dataset& dataset, ModelParams& params, const TrainConfig& cfg,
                        std::ostream* log) {
  Rng rng(cfg.seed);
  AdamWState state;
  LossReport last;
  last.margin = params.cfg.margin;
  for (int step = 0; step < cfg.steps; ++step) {
    std::vector<ClipBatch> batch;
    for (int b = 0; b < cfg.batch_clips; ++b) batch.push_back(sample_clip(dataset, cfg.clip_len, rng));
    last = train_step(batch, params, state, cfg);
    if (log)
      *log << step << ',' << last.assoc << ',' << last.feat << ',' << last.total << '\n';
  }
  return last;
}

}  // namespace csc
