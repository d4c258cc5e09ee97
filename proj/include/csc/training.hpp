#ifndef CSC_TRAINING_HPP
#define CSC_TRAINING_HPP

#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "csc/association.hpp"
#include "csc/harness.hpp"
#include "csc/model.hpp"

namespace csc {

inline constexpr int kAbsent = -1;

// A contiguous T-frame window of one sequence with its ground-truth
// association targets. gt[j][q] is the index into `detections` claimed by
// trajectory j at clip step q, or kAbsent.
struct ClipBatch {
  const Sequence* seq = nullptr;
  int start = 0;
  int length = 0;
  std::vector<int> identities;        // M trajectory labels, ascending
  std::vector<Detection> detections;  // N, frame-major order
  std::vector<int> det_step;          // clip step of each detection
  std::vector<std::vector<int>> gt;   // M x T
};

struct LossReport {
  double assoc = 0.0;
  double feat = 0.0;
  double total = 0.0;
  double margin = 0.0;
};

struct TrainConfig {
  std::uint64_t seed = 7;
  int clip_len = 8;  // T
  int batch_clips = 2;
  int steps = 600;
  // 5e-5 converges too slowly for the CPU step budget at this model size.
  double lr = 5e-4;
  double weight_decay = 1e-4;
};

// Contiguous window, uniformly random sequence and offset. Throws when
// every sequence is shorter than T.
ClipBatch sample_clip(const Dataset& dataset, int clip_len, Rng& rng);

// Build a ClipBatch for a fixed window (used by tests and by sample_clip).
ClipBatch make_clip(const Sequence& seq, int start, int clip_len);

// Sum of -log P over all trajectories and clip steps given normalized
// probabilities. ABSENT steps carry no detection column here and are
// skipped. Throws on out-of-range ground-truth indices.
double association_loss(const AssociationProbabilities& probs,
                        const std::vector<std::vector<int>>& gt_assignment,
                        const std::vector<int>& det_frames);

// Normalization in training form: scores is (M+1) x (N+1) with the
// no-detection column last; returns per-frame-group probabilities plus the
// per-group absent probabilities.
struct TrainingProbabilities {
  AssociationProbabilities probs;
  ad::Mat absent_probs;           // (M+1) x n_groups
  std::vector<int> group_frames;  // frame value per group
};
TrainingProbabilities normalize_training(const ad::Mat& scores, const std::vector<int>& det_frames);

// Eq.-style hinge over hierarchy features: positive term is the closest
// part-to-box attention response, negative term is the box-to-background
// response. Uses the fusion module's shared cross-attention.
ad::Var feature_triplet_loss_var(ad::Tape& tape, const ParamVars& pv, const ModelConfig& cfg,
                                 ad::Var part_feats, ad::Var semantic_feat, ad::Var context_bg_feat,
                                 double margin);
double feature_triplet_loss(const ad::Mat& part_feats, const Eigen::RowVectorXd& semantic_feat,
                            const Eigen::RowVectorXd& context_bg_feat, const ModelParams& params,
                            double margin);

struct ClipForward {
  ad::Var assoc_loss;
  ad::Var feat_loss;
  int n_detections = 0;
};

// Full forward: geometry -> encoder -> fusion -> trajectory tokens ->
// scores -> per-frame softmax NLL + feature hinge.
ClipForward forward_clip(ad::Tape& tape, const ParamVars& pv, const ModelParams& params,
                         const ClipBatch& clip);

// Total clip loss / named gradients on a fresh tape (finite-difference
// checks rebuild this with perturbed tensors).
double clip_loss_value(const ModelParams& params, const ClipBatch& clip);
std::map<std::string, ad::Mat> clip_loss_gradients(const ModelParams& params,
                                                   const ClipBatch& clip);

// Decoupled-weight-decay Adam.
struct AdamWState {
  int t = 0;
  std::map<std::string, std::pair<ad::Mat, ad::Mat>> moments;
};

LossReport train_step(const std::vector<ClipBatch>& batch, ModelParams& params, AdamWState& state,
                      const TrainConfig& cfg);

// Training loop over sampled clips; one CSV log line per step:
// step,assoc_loss,feat_loss,total.
LossReport run_training(const Dataset& dataset, ModelParams& params, const TrainConfig& cfg,
                        std::ostream* log = nullptr);

}  // namespace csc

#endif
