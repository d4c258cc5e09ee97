#include "csc/tracker.hpp"

#include <algorithm>

#include "csc/attention.hpp"
#include "csc/hungarian.hpp"

namespace csc {

std::vector<TrackRecord> tracker_step(int frame, const Image& image,
                                      const std::vector<Detection>& frame_detections,
                                      TrackerState& state, const ModelParams& params,
                                      const TrackerConfig& config) {
  if (frame <= state.last_frame)
    throw std::invalid_argument("tracker_step: out-of-order frame " + std::to_string(frame));
  state.last_frame = frame;

  const int N = static_cast<int>(frame_detections.size());
  std::vector<TrackRecord> out;

  // Live trajectories keep contributing their (possibly stale) tokens
  // until max_age retires them.
  std::vector<int> live;
  for (size_t t = 0; t < state.tracks.size(); ++t)
    if (state.tracks[t].state != Trajectory::State::terminated) live.push_back(static_cast<int>(t));
  const int M = static_cast<int>(live.size());

  ad::Mat det_tokens;
  if (N > 0) det_tokens = tokens_for_frame(frame_detections, image, params);

  std::vector<bool> det_matched(static_cast<size_t>(N), false);
  std::vector<bool> track_matched(static_cast<size_t>(M), false);

  if (M > 0 && N > 0) {
    std::vector<TrajectoryToken> traj_tokens;
    traj_tokens.reserve(static_cast<size_t>(M));
    for (int r = 0; r < M; ++r) {
      const Trajectory& tr = state.tracks[static_cast<size_t>(live[static_cast<size_t>(r)])];
      std::vector<Eigen::RowVectorXd> hist;
      for (const Trajectory::Entry& e : tr.history)
        if (e.frame > frame - config.window) hist.push_back(e.token);
      if (hist.empty()) hist.push_back(tr.history.back().token);
      traj_tokens.push_back(build_trajectory_token(hist, config.horizon));
    }

    const ScoreMatrix scores = score_pairs(traj_tokens, det_tokens, params);
    const Eigen::RowVectorXd empty_scores =
        empty_trajectory_scores(det_tokens, state.unassociated_pool, state.rng.fork(), params);
    const std::vector<int> det_frames(static_cast<size_t>(N), frame);
    const AssociationProbabilities probs = normalize(scores, det_frames, empty_scores);

    const Eigen::MatrixXd cost = -probs.probs.topRows(M);
    for (const auto& [r, c] : hungarian(cost)) {
      if (probs.probs(r, c) <= config.beta) continue;  // score must exceed beta
      Trajectory& tr = state.tracks[static_cast<size_t>(live[static_cast<size_t>(r)])];
      tr.history.push_back({frame, frame_detections[static_cast<size_t>(c)],
                            det_tokens.row(c)});
      tr.state = Trajectory::State::active;
      tr.miss_count = 0;
      tr.last_frame = frame;
      det_matched[static_cast<size_t>(c)] = true;
      track_matched[static_cast<size_t>(r)] = true;
      out.push_back({frame, tr.id, frame_detections[static_cast<size_t>(c)].box,
                     frame_detections[static_cast<size_t>(c)].confidence});
    }
  }

  for (int r = 0; r < M; ++r) {
    if (track_matched[static_cast<size_t>(r)]) continue;
    Trajectory& tr = state.tracks[static_cast<size_t>(live[static_cast<size_t>(r)])];
    tr.state = Trajectory::State::lost;
    if (++tr.miss_count > config.max_age) tr.state = Trajectory::State::terminated;
  }

  // Unassociated detections start new tracks.
  for (int c = 0; c < N; ++c) {
    if (det_matched[static_cast<size_t>(c)]) continue;
    Trajectory tr;
    tr.id = state.next_id++;
    tr.state = Trajectory::State::active;
    tr.last_frame = frame;
    tr.history.push_back({frame, frame_detections[static_cast<size_t>(c)], det_tokens.row(c)});
    out.push_back({frame, tr.id, frame_detections[static_cast<size_t>(c)].box,
                   frame_detections[static_cast<size_t>(c)].confidence});
    state.tracks.push_back(std::move(tr));
    state.unassociated_pool.push_back(det_tokens.row(c));
    if (state.unassociated_pool.size() > 64)
      state.unassociated_pool.erase(state.unassociated_pool.begin());
  }

  std::sort(out.begin(), out.end(),
            [](const TrackRecord& a, const TrackRecord& b) { return a.id < b.id; });
  return out;
}

TrackSet track_sequence(const Sequence& seq, const ModelParams& params,
                        const TrackerConfig& config,
                        const std::vector<std::vector<Detection>>* detections_override) {
  if (seq.frames.empty()) throw std::invalid_argument("track_sequence: empty sequence");
  const std::vector<std::vector<Detection>>& dets =
      detections_override ? *detections_override : seq.det;
  TrackerState state(config.seed);
  TrackSet result;
  for (size_t f = 0; f < seq.frames.size(); ++f) {
    const std::vector<Detection>& frame_dets =
        f < dets.size() ? dets[f] : std::vector<Detection>{};
    for (const TrackRecord& r :
         tracker_step(static_cast<int>(f), seq.frames[f], frame_dets, state, params, config))
      result.records.push_back(r);
  }
  return result;
}

}  // namespace csc
