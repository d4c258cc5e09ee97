#ifndef CSC_TRACKER_HPP
#define CSC_TRACKER_HPP

#include <vector>

#include "csc/association.hpp"
#include "csc/harness.hpp"
#include "csc/model.hpp"
#include "csc/mot_io.hpp"

namespace csc {

struct TrackerConfig {
  double beta = 0.3;  // minimum association probability to link
  // Tracking quality plateaus between 16- and 24-frame histories; 16 is the
  // safer default because frames near a crossing dilute longer score means.
  int horizon = 16;  // H: trajectory token rows
  int window = 16;   // how many recent frames of history contribute
  int max_age = 30;   // frames a lost track survives
  std::uint64_t seed = 0;
};

struct Trajectory {
  enum class State { active, lost, terminated };

  int id = 0;
  State state = State::active;
  int miss_count = 0;
  int last_frame = -1;

  struct Entry {
    int frame;
    Detection detection;
    Eigen::RowVectorXd token;
  };
  std::vector<Entry> history;
};

struct TrackerState {
  std::vector<Trajectory> tracks;
  int next_id = 1;
  int last_frame = -1;
  std::vector<Eigen::RowVectorXd> unassociated_pool;

  explicit TrackerState(std::uint64_t seed = 0) : rng(seed) {}
  Rng rng;
};

// One sliding-window step: tokens for the new detections, horizon scoring
// against live trajectories, Hungarian assignment with the beta threshold,
// lifecycle updates. Frames must arrive in increasing order.
std::vector<TrackRecord> tracker_step(int frame, const Image& image,
                                      const std::vector<Detection>& frame_detections,
                                      TrackerState& state, const ModelParams& params,
                                      const TrackerConfig& config);

// Fold tracker_step over a sequence. When detections_override is given it
// replaces seq.det (used for noise-injection runs).
TrackSet track_sequence(const Sequence& seq, const ModelParams& params,
                        const TrackerConfig& config,
                        const std::vector<std::vector<Detection>>* detections_override = nullptr);

}  // namespace csc

#endif
