#include <doctest.h>

#include <map>
#include <set>

#include "csc/tracker.hpp"

using namespace csc;

namespace {

Sequence small_sequence(int frames = 8, int targets = 3, std::uint64_t seed = 2) {
  ScenarioConfig cfg;
  cfg.frames = frames;
  cfg.num_targets = targets;
  cfg.image_w = 128;
  cfg.image_h = 96;
  cfg.crossings = 1;
  cfg.seed = seed;
  return generate_sequence(cfg);
}

}  // namespace

TEST_CASE("track_sequence equals manually folded tracker_step calls") {
  const Sequence seq = small_sequence();
  const ModelParams params = ModelParams::init(ModelConfig{}, 3);
  TrackerConfig cfg;
  cfg.seed = 5;

  const TrackSet whole = track_sequence(seq, params, cfg);

  TrackerState state(cfg.seed);
  TrackSet streamed;
  for (size_t f = 0; f < seq.frames.size(); ++f)
    for (const TrackRecord& r :
         tracker_step(static_cast<int>(f), seq.frames[f], seq.det[f], state, params, cfg))
      streamed.records.push_back(r);

  REQUIRE(whole.records.size() == streamed.records.size());
  for (size_t i = 0; i < whole.records.size(); ++i) {
    CHECK(whole.records[i].frame == streamed.records[i].frame);
    CHECK(whole.records[i].id == streamed.records[i].id);
    CHECK(whole.records[i].box.x == streamed.records[i].box.x);
  }
}

TEST_CASE("ids are positive and assigned in increasing order of first appearance") {
  const Sequence seq = small_sequence();
  const ModelParams params = ModelParams::init(ModelConfig{}, 3);
  const TrackSet out = track_sequence(seq, params, TrackerConfig{});

  std::map<int, int> first_frame;
  for (const TrackRecord& r : out.records) {
    CHECK(r.id >= 1);
    if (!first_frame.count(r.id)) first_frame[r.id] = r.frame;
  }
  int prev_frame = -1;
  for (const auto& [id, f] : first_frame) {  // map iterates ids ascending
    CHECK(f >= prev_frame);
    prev_frame = f;
  }
}

TEST_CASE("frames must arrive strictly in order") {
  const Sequence seq = small_sequence(3, 2);
  const ModelParams params = ModelParams::init(ModelConfig{}, 3);
  TrackerState state(0);
  TrackerConfig cfg;
  tracker_step(0, seq.frames[0], seq.det[0], state, params, cfg);
  tracker_step(2, seq.frames[2], seq.det[2], state, params, cfg);  // gaps are fine
  CHECK_THROWS(tracker_step(2, seq.frames[2], seq.det[2], state, params, cfg));
  CHECK_THROWS(tracker_step(1, seq.frames[1], seq.det[1], state, params, cfg));
}

TEST_CASE("an impossible threshold makes every detection a new track") {
  const Sequence seq = small_sequence(5, 2);
  const ModelParams params = ModelParams::init(ModelConfig{}, 3);
  TrackerConfig cfg;
  cfg.beta = 1.1;  // probabilities cannot exceed 1
  const TrackSet out = track_sequence(seq, params, cfg);

  std::map<int, int> appearances;
  for (const TrackRecord& r : out.records) ++appearances[r.id];
  CHECK(appearances.size() == out.records.size());  // each id exactly once
  CHECK(out.records.size() == 10);                  // every detection emitted
}

TEST_CASE("empty frames age tracks out after max_age misses") {
  const Sequence seq = small_sequence(2, 2);
  const ModelParams params = ModelParams::init(ModelConfig{}, 3);
  TrackerConfig cfg;
  cfg.max_age = 2;
  TrackerState state(0);
  tracker_step(0, seq.frames[0], seq.det[0], state, params, cfg);
  REQUIRE(state.tracks.size() == 2);

  const std::vector<Detection> none;
  for (int f = 1; f <= 3; ++f) tracker_step(f, seq.frames[1], none, state, params, cfg);
  for (const Trajectory& t : state.tracks) CHECK(t.state == Trajectory::State::terminated);

  // a detection after termination opens a fresh id
  const auto recs = tracker_step(4, seq.frames[1], seq.det[1], state, params, cfg);
  for (const TrackRecord& r : recs) CHECK(r.id >= 3);
}

TEST_CASE("output boxes echo the input detections of the frame") {
  const Sequence seq = small_sequence(4, 3);
  const ModelParams params = ModelParams::init(ModelConfig{}, 3);
  const TrackSet out = track_sequence(seq, params, TrackerConfig{});
  for (const TrackRecord& r : out.records) {
    bool found = false;
    for (const Detection& d : seq.det[static_cast<size_t>(r.frame)])
      if (d.box.x == r.box.x && d.box.y == r.box.y && d.box.w == r.box.w) found = true;
    CHECK(found);
  }
}

TEST_CASE("detections_override replaces the stored detections") {
  const Sequence seq = small_sequence(3, 2);
  const ModelParams params = ModelParams::init(ModelConfig{}, 3);
  std::vector<std::vector<Detection>> override_dets(seq.det.size());
  override_dets[0] = seq.det[0];  // later frames empty
  const TrackSet out = track_sequence(seq, params, TrackerConfig{}, &override_dets);
  for (const TrackRecord& r : out.records) CHECK(r.frame == 0);
}
