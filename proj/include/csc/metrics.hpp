#ifndef CSC_METRICS_HPP
#define CSC_METRICS_HPP

#include <string>

#include "csc/mot_io.hpp"

namespace csc {

struct EvalReport {
  double mota = 0.0;
  double idf1 = 0.0;  // in [0,1]
  int id_switches = 0;
  int fp = 0;
  int fn = 0;
  int gt_count = 0;
  int pred_count = 0;
  int matches = 0;  // per-frame true positives
};

// CLEAR-style evaluation: per-frame matching at IoU >= threshold with
// previous-match persistence, plus a global identity matching for IDF1.
// Duplicate ids within one frame of either set are an error.
EvalReport evaluate(const TrackSet& predictions, const TrackSet& gt,
                    double iou_threshold = 0.5);

// Aligned human-readable table / one-line CSV (header + row) forms.
std::string report_table(const EvalReport& r);
std::string report_csv(const EvalReport& r);

}  // namespace csc

#endif
