#ifndef CSC_GEOMETRY_HPP
#define CSC_GEOMETRY_HPP

#include <vector>

#include "csc/image.hpp"
#include "csc/types.hpp"

namespace csc {

// The {P, O, U} crop set for one detection: part patches, the detection
// patch, the union-area patch, and the union patch with the detection's
// sub-rectangle zeroed out.
struct RegionTriplet {
  std::vector<Patch> parts;
  Patch semantic;
  Patch context;
  Patch context_background;
};

struct RegionConfig {
  GridPair grid{2, 2};
  int part_resolution = 32;
  int semantic_resolution = 64;
  double pad_fraction = 0.1;
};

// Tile `box` into grid.rows x grid.cols bins. Remainder pixels from the
// integer division go to the last row/column bin. Throws
// DegenerateInputError when the box is smaller than the grid.
std::vector<BoundingBox> split_into_bins(const BoundingBox& box, const GridPair& grid = {2, 2});

double iou(const BoundingBox& a, const BoundingBox& b);

// Minimal box enclosing `target` and every overlapping box in `others`,
// expanded by pad_fraction of its own extent on each side and clamped to
// the image. Isolated targets get their own padded box.
BoundingBox compute_union_region(const BoundingBox& target, const std::vector<BoundingBox>& others,
                                 double pad_fraction, double image_w, double image_h);

// Bilinear resample of the box region to out_w x out_h, corner-aligned
// sampling. Sample points outside the image are clamped to the border.
Patch crop_and_resize(const Image& image, const BoundingBox& box, int out_w, int out_h);

// Same as crop_and_resize but pixels whose center lies inside `mask_box`
// read as zero, and any output sample whose source point falls inside
// `mask_box` is forced to exact zero.
Patch crop_and_resize_masked(const Image& image, const BoundingBox& box, int out_w, int out_h,
                             const BoundingBox& mask_box);

RegionTriplet build_region_triplet(const Image& image, const Detection& target,
                                   const std::vector<Detection>& frame_detections,
                                   const RegionConfig& config);

// Resample a patch to a new resolution (corner-aligned bilinear).
Patch resize_patch(const Patch& p, int out_w, int out_h);

}  // namespace csc

#endif
