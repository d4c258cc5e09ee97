#ifndef CSC_ASSOCIATION_HPP
#define CSC_ASSOCIATION_HPP

#include <vector>

#include "csc/model.hpp"
#include "csc/types.hpp"

namespace csc {

// Score given to trajectory rows with no valid history step; keeps the
// softmax numerically safe while zeroing the probability.
inline constexpr double kInvalidScore = -1e4;

// Horizon-stacked trajectory representation: H rows of historical CSC
// tokens, newest last; padded rows flagged false in valid.
struct TrajectoryToken {
  ad::Mat values;           // H x D
  std::vector<bool> valid;  // H flags
};

struct ScoreMatrix {
  ad::Mat raw;                   // M x N, valid-masked horizon mean
  std::vector<ad::Mat> per_step; // M entries of H x N
};

struct AssociationProbabilities {
  ad::Mat probs;                // (M+1) x N; row M is the empty trajectory
  std::vector<int> det_frames;  // N frame indices
};

// Fill rows from the end with the last min(len, H) tokens; earlier rows
// zero-padded with valid=false. Throws on empty history.
TrajectoryToken build_trajectory_token(const std::vector<Eigen::RowVectorXd>& track_history,
                                       int horizon);

// Bilinear association score: projected trajectory rows against projected
// detection tokens, scaled by 1/sqrt(D), averaged over valid steps.
ScoreMatrix score_pairs(const std::vector<TrajectoryToken>& traj_tokens,
                        const ad::Mat& det_tokens, const ModelParams& params);

// Scores of the empty-trajectory row: one token drawn from the
// unassociated pool with the seeded generator, or the learned background
// token when the pool is empty.
Eigen::RowVectorXd empty_trajectory_scores(const ad::Mat& det_tokens,
                                           const std::vector<Eigen::RowVectorXd>& unassociated_pool,
                                           std::uint64_t rng_seed, const ModelParams& params);

// Per-(row, frame-group) softmax over detections sharing a frame,
// with the empty scores stacked as the last row.
AssociationProbabilities normalize(const ScoreMatrix& scores, const std::vector<int>& det_frames,
                                   const Eigen::RowVectorXd& empty_scores);

// Score of a single one-step trajectory token against detection tokens.
Eigen::RowVectorXd score_single_token(const Eigen::RowVectorXd& token, const ad::Mat& det_tokens,
                                      const ModelParams& params);

// --- tape-side builders used during training ---

struct TrajTokenVar {
  ad::Var values;  // H x D
  std::vector<bool> valid;
};

TrajTokenVar build_trajectory_token_var(ad::Tape& tape, const std::vector<ad::Var>& history,
                                        int horizon, int feature_dim);

// Raw score matrix on the tape: one row per trajectory, then the empty
// trajectory row (from empty_token). When with_absent_column, a final
// column scores each row against the learned background token, serving as
// the no-detection logit of each softmax group.
ad::Var association_scores_var(ad::Tape& tape, const ParamVars& pv, const ModelConfig& cfg,
                               const std::vector<TrajTokenVar>& traj_tokens, ad::Var det_tokens,
                               ad::Var empty_token, bool with_absent_column);

}  // namespace csc

#endif
