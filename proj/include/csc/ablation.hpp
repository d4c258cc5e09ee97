#ifndef CSC_ABLATION_HPP
#define CSC_ABLATION_HPP

#include <ostream>
#include <string>
#include <vector>

#include "csc/config.hpp"
#include "csc/metrics.hpp"

namespace csc {

// Ground truth of a sequence as a TrackSet (for evaluation).
TrackSet gt_track_set(const Sequence& seq);

// Train on `data`, track every sequence, evaluate against its ground truth.
// When `noise` is given, detections are perturbed before tracking (seeded).
// Returns counts summed over sequences with idf1/mota averaged.
struct ExperimentResult {
  EvalReport report;
  LossReport final_loss;
};
ExperimentResult train_track_eval(const Dataset& data, const ModelConfig& model,
                                  const TrainConfig& train, const TrackerConfig& tracker,
                                  const NoiseConfig* noise = nullptr, std::ostream* log = nullptr);

// Track + evaluate an already-trained model (counts summed, rates averaged
// over sequences).
EvalReport eval_tracking(const Dataset& data, const ModelParams& params,
                         const TrackerConfig& tracker, const NoiseConfig* noise = nullptr);

struct AblationRow {
  std::string label;
  double idf1 = 0.0;
  double mota = 0.0;
  double id_switches = 0.0;  // mean over seeds
};

struct AblationTable {
  std::string axis;
  std::vector<AblationRow> rows;
};

struct AblationOptions {
  ScenarioConfig scenario;  // per-seed copies get scenario.seed = seeds[i]
  ModelConfig model;
  TrainConfig train;
  TrackerConfig tracker;
  NoiseConfig noise;
  std::vector<std::uint64_t> seeds{1, 2, 3};
};

// axis: levels | fusion | train_len | infer_len | noise.
// Each row averages the metric over opts.seeds; unknown axis throws.
AblationTable run_ablation(const std::string& axis, const AblationOptions& opts,
                           std::ostream* log = nullptr);

std::string format_table(const AblationTable& table);
std::string table_csv(const AblationTable& table);

}  // namespace csc

#endif
