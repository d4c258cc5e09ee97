#ifndef CSC_MOT_IO_HPP
#define CSC_MOT_IO_HPP

#include <string>
#include <vector>

#include "csc/types.hpp"

namespace csc {

struct TrackRecord {
  int frame = 0;  // 0-based internally; 1-based on disk
  int id = 0;
  BoundingBox box;
  double confidence = 1.0;
};

struct TrackSet {
  std::vector<TrackRecord> records;
};

enum class MotKind { detections, ground_truth };

// MOTChallenge CSV: frame,id,bb_left,bb_top,bb_width,bb_height,conf,...
// gt rows carry identities, det rows id = -1. Frames are converted to
// 0-based on read. Malformed lines raise ParseError with the line number.
std::vector<Detection> read_mot(const std::string& path, MotKind kind);

// Result format, bit-exact: frame,id,bb_left,bb_top,bb_width,bb_height,conf,-1,-1,-1
// with frame and id 1-based. Doubles use shortest round-trip formatting.
void write_mot(const TrackSet& tracks, const std::string& path);
TrackSet read_mot_results(const std::string& path);

std::string format_double(double v);

}  // namespace csc

#endif
