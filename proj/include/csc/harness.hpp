#ifndef CSC_HARNESS_HPP
#define CSC_HARNESS_HPP

#include <string>
#include <vector>

#include "csc/image.hpp"
#include "csc/types.hpp"

namespace csc {

// Synthetic scenario: rectangles with per-part accent marks moving on
// linear-plus-bounce paths, with scheduled crossings producing genuine
// occlusion.
struct ScenarioConfig {
  std::string name = "seq";
  int num_targets = 5;
  int frames = 100;
  int image_w = 192;
  int image_h = 128;

  // appearance
  bool identical_base = false;  // hard preset: same base color everywhere
  double target_w = 24.0;
  double target_h = 36.0;
  double accent_fraction = 0.45;  // accent mark size relative to its part bin
  std::uint64_t texture_seed = 0;

  // motion
  double min_speed = 0.6;
  double max_speed = 1.8;
  int crossings = 2;
  double occlusion_rate = 0.5;  // 1 = full overlap at the crossing point

  std::uint64_t seed = 1;
};

struct Sequence {
  std::string name;
  int width = 0;
  int height = 0;
  std::vector<Image> frames;
  std::vector<std::vector<Detection>> gt;   // per frame, identities set
  std::vector<std::vector<Detection>> det;  // per frame, identity -1
};

Sequence generate_sequence(const ScenarioConfig& config);

struct NoiseConfig {
  double shift_prob = 0.25;        // per direction
  double shift_max_fraction = 0.2; // of the matching box dimension
  double shift_max_pixels = 20.0;
  double resize_lo = 0.9;
  double resize_hi = 1.1;
};

// One direction's shift draw: with probability shift_prob, a uniform
// stride in [0, min(shift_max_fraction*dim, shift_max_pixels)].
double sample_direction_shift(Rng& rng, const NoiseConfig& noise, double dim);

// Random shifting and random resizing of boxes, clamped to the image.
std::vector<Detection> inject_noise(const std::vector<Detection>& detections,
                                    const NoiseConfig& noise, Rng& rng, double image_w,
                                    double image_h);

// Sequence directory layout: img1/%06d.ppm, gt/gt.txt, det/det.txt,
// seqinfo.ini.
void write_sequence(const Sequence& seq, const std::string& dir);
Sequence read_sequence(const std::string& dir, bool load_images = true);

using Dataset = std::vector<Sequence>;

// Scenario presets used by the CLI and the acceptance experiments.
ScenarioConfig easy_preset(std::uint64_t seed);
ScenarioConfig hard_preset(std::uint64_t seed);

}  // namespace csc

#endif
