#include "csc/association.hpp"

#include <cmath>
#include <stdexcept>

namespace csc {

TrajectoryToken build_trajectory_token(const std::vector<Eigen::RowVectorXd>& track_history,
                                       int horizon) {
  if (track_history.empty()) throw std::invalid_argument("build_trajectory_token: empty history");
  const int D = static_cast<int>(track_history.back().cols());
  TrajectoryToken t;
  t.values = ad::Mat::Zero(horizon, D);
  t.valid.assign(horizon, false);
  const int n = std::min<int>(horizon, static_cast<int>(track_history.size()));
  for (int i = 0; i < n; ++i) {
    // newest token in the last row, order preserved
    t.values.row(horizon - n + i) = track_history[track_history.size() - n + i];
    t.valid[horizon - n + i] = true;
  }
  return t;
}

ScoreMatrix score_pairs(const std::vector<TrajectoryToken>& traj_tokens, const ad::Mat& det_tokens,
                        const ModelParams& params) {
  const int D = params.cfg.feature_dim;
  if (det_tokens.cols() != D) throw ShapeError("score_pairs: detection token dim mismatch");
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(D));
  const ad::Mat keys = det_tokens * params.at("assoc.Wk");  // N x D

  ScoreMatrix s;
  const int M = static_cast<int>(traj_tokens.size());
  const int N = static_cast<int>(det_tokens.rows());
  s.raw = ad::Mat(M, N);
  s.per_step.reserve(M);
  for (int j = 0; j < M; ++j) {
    const TrajectoryToken& t = traj_tokens[j];
    if (t.values.cols() != D) throw ShapeError("score_pairs: trajectory token dim mismatch");
    const ad::Mat q = t.values * params.at("assoc.Wq");  // H x D
    ad::Mat per = q * keys.transpose() * inv_sqrt_d;     // H x N
    s.per_step.push_back(per);
    int n_valid = 0;
    Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(N);
    for (int h = 0; h < static_cast<int>(t.valid.size()); ++h)
      if (t.valid[h]) {
        mean += per.row(h);
        ++n_valid;
      }
    s.raw.row(j) =
        n_valid > 0 ? (mean / n_valid).eval() : Eigen::RowVectorXd::Constant(N, kInvalidScore);
  }
  return s;
}

Eigen::RowVectorXd score_single_token(const Eigen::RowVectorXd& token, const ad::Mat& det_tokens,
                                      const ModelParams& params) {
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(params.cfg.feature_dim));
  const Eigen::RowVectorXd q = token * params.at("assoc.Wq");
  return q * (det_tokens * params.at("assoc.Wk")).transpose() * inv_sqrt_d;
}

Eigen::RowVectorXd empty_trajectory_scores(const ad::Mat& det_tokens,
                                           const std::vector<Eigen::RowVectorXd>& unassociated_pool,
                                           std::uint64_t rng_seed, const ModelParams& params) {
  Eigen::RowVectorXd token;
  if (unassociated_pool.empty()) {
    token = params.at("assoc.bg").row(0);
  } else {
    Rng rng(rng_seed);
    token = unassociated_pool[static_cast<size_t>(
        rng.uniform_int(0, static_cast<int>(unassociated_pool.size()) - 1))];
  }
  return score_single_token(token, det_tokens, params);
}

AssociationProbabilities normalize(const ScoreMatrix& scores, const std::vector<int>& det_frames,
                                   const Eigen::RowVectorXd& empty_scores) {
  const int M = static_cast<int>(scores.raw.rows());
  const int N = static_cast<int>(scores.raw.cols());
  if (static_cast<int>(det_frames.size()) != N)
    throw ShapeError("normalize: det_frames size mismatch");
  if (empty_scores.cols() != N) throw ShapeError("normalize: empty_scores size mismatch");

  ad::Mat stacked(M + 1, N);
  stacked.topRows(M) = scores.raw;
  stacked.row(M) = empty_scores;

  // Column groups by frame value.
  std::vector<std::vector<int>> groups;
  {
    std::vector<int> seen;
    for (int i = 0; i < N; ++i) {
      int gi = -1;
      for (size_t k = 0; k < seen.size(); ++k)
        if (seen[k] == det_frames[i]) gi = static_cast<int>(k);
      if (gi < 0) {
        seen.push_back(det_frames[i]);
        groups.emplace_back();
        gi = static_cast<int>(groups.size()) - 1;
      }
      groups[gi].push_back(i);
    }
  }

  AssociationProbabilities out;
  out.det_frames = det_frames;
  out.probs = ad::Mat(M + 1, N);
  for (int r = 0; r <= M; ++r) {
    for (const auto& grp : groups) {
      double mx = -std::numeric_limits<double>::infinity();
      for (int c : grp) mx = std::max(mx, stacked(r, c));
      double z = 0.0;
      for (int c : grp) z += std::exp(stacked(r, c) - mx);
      for (int c : grp) out.probs(r, c) = std::exp(stacked(r, c) - mx) / z;
    }
  }
  return out;
}

TrajTokenVar build_trajectory_token_var(ad::Tape& tape, const std::vector<ad::Var>& history,
                                        int horizon, int feature_dim) {
  if (history.empty()) throw std::invalid_argument("build_trajectory_token_var: empty history");
  TrajTokenVar t;
  t.valid.assign(horizon, false);
  const int n = std::min<int>(horizon, static_cast<int>(history.size()));
  std::vector<ad::Var> rows;
  if (n < horizon) rows.push_back(tape.input(ad::Mat::Zero(horizon - n, feature_dim)));
  for (int i = 0; i < n; ++i) {
    rows.push_back(history[history.size() - n + i]);
    t.valid[horizon - n + i] = true;
  }
  t.values = rows.size() == 1 ? rows[0] : tape.concat_rows(rows);
  return t;
}

ad::Var association_scores_var(ad::Tape& tape, const ParamVars& pv, const ModelConfig& cfg,
                               const std::vector<TrajTokenVar>& traj_tokens, ad::Var det_tokens,
                               ad::Var empty_token, bool with_absent_column) {
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(cfg.feature_dim));
  ad::Var key_source = det_tokens;
  if (with_absent_column)
    key_source = tape.concat_rows({det_tokens, pv.at("assoc.bg")});
  ad::Var keys = tape.matmul(key_source, pv.at("assoc.Wk"));
  const int n_cols = static_cast<int>(tape.val(keys).rows());

  std::vector<ad::Var> rows;
  for (const TrajTokenVar& t : traj_tokens) {
    int n_valid = 0;
    Eigen::RowVectorXd w = Eigen::RowVectorXd::Zero(static_cast<Eigen::Index>(t.valid.size()));
    for (size_t h = 0; h < t.valid.size(); ++h)
      if (t.valid[h]) {
        w(static_cast<Eigen::Index>(h)) = 1.0;
        ++n_valid;
      }
    if (n_valid == 0) {
      rows.push_back(tape.input(ad::Mat::Constant(1, n_cols, kInvalidScore)));
      continue;
    }
    w /= n_valid;
    ad::Var q = tape.matmul(t.values, pv.at("assoc.Wq"));
    ad::Var per = tape.scale(tape.matmul_nt(q, keys), inv_sqrt_d);
    rows.push_back(tape.row_combination(per, w));
  }
  ad::Var q_empty = tape.matmul(empty_token, pv.at("assoc.Wq"));
  rows.push_back(tape.scale(tape.matmul_nt(q_empty, keys), inv_sqrt_d));
  return tape.concat_rows(rows);
}

}  // namespace csc
