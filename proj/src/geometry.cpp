#include "csc/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace csc {

BoundingBox BoundingBox::clamped(double width, double height) const {
  double x0 = std::max(0.0, x);
  double y0 = std::max(0.0, y);
  double x1 = std::min(width, right());
  double y1 = std::min(height, bottom());
  if (x1 <= x0 || y1 <= y0) {
    // Fully outside; collapse to a 1px sliver at the nearest border.
    x0 = std::clamp(x, 0.0, width - 1.0);
    y0 = std::clamp(y, 0.0, height - 1.0);
    return {x0, y0, 1.0, 1.0};
  }
  return {x0, y0, x1 - x0, y1 - y0};
}

std::vector<BoundingBox> split_into_bins(const BoundingBox& box, const GridPair& grid) {
  if (!box.valid()) throw DegenerateInputError("split_into_bins: invalid box");
  if (grid.rows < 1 || grid.cols < 1) throw DegenerateInputError("split_into_bins: invalid grid");
  if (box.w < grid.cols || box.h < grid.rows)
    throw DegenerateInputError("split_into_bins: box smaller than grid");

  const double base_w = std::floor(box.w / grid.cols);
  const double base_h = std::floor(box.h / grid.rows);
  std::vector<BoundingBox> bins;
  bins.reserve(static_cast<size_t>(grid.rows) * grid.cols);
  for (int r = 0; r < grid.rows; ++r) {
    const double by = box.y + r * base_h;
    const double bh = (r == grid.rows - 1) ? box.bottom() - by : base_h;
    for (int c = 0; c < grid.cols; ++c) {
      const double bx = box.x + c * base_w;
      const double bw = (c == grid.cols - 1) ? box.right() - bx : base_w;
      bins.push_back({bx, by, bw, bh});
    }
  }
  return bins;
}

double iou(const BoundingBox& a, const BoundingBox& b) {
  const double ix = std::max(a.x, b.x);
  const double iy = std::max(a.y, b.y);
  const double ix1 = std::min(a.right(), b.right());
  const double iy1 = std::min(a.bottom(), b.bottom());
  const double iw = std::max(0.0, ix1 - ix);
  const double ih = std::max(0.0, iy1 - iy);
  const double inter = iw * ih;
  if (inter <= 0.0) return 0.0;
  return inter / (a.area() + b.area() - inter);
}

BoundingBox compute_union_region(const BoundingBox& target, const std::vector<BoundingBox>& others,
                                 double pad_fraction, double image_w, double image_h) {
  double x0 = target.x, y0 = target.y, x1 = target.right(), y1 = target.bottom();
  for (const auto& o : others) {
    if (iou(target, o) > 0.0) {
      x0 = std::min(x0, o.x);
      y0 = std::min(y0, o.y);
      x1 = std::max(x1, o.right());
      y1 = std::max(y1, o.bottom());
    }
  }
  const double w = x1 - x0;
  const double h = y1 - y0;
  BoundingBox u{x0 - pad_fraction * w, y0 - pad_fraction * h, w * (1.0 + 2.0 * pad_fraction),
                h * (1.0 + 2.0 * pad_fraction)};
  if (image_w > 0.0 && image_h > 0.0) u = u.clamped(image_w, image_h);
  return u;
}

namespace {

inline double sample_bilinear(const Eigen::MatrixXd& m, double sx, double sy) {
  const int w = static_cast<int>(m.cols());
  const int h = static_cast<int>(m.rows());
  sx = std::clamp(sx, 0.0, static_cast<double>(w - 1));
  sy = std::clamp(sy, 0.0, static_cast<double>(h - 1));
  const int x0 = static_cast<int>(std::floor(sx));
  const int y0 = static_cast<int>(std::floor(sy));
  const int x1 = std::min(x0 + 1, w - 1);
  const int y1 = std::min(y0 + 1, h - 1);
  const double fx = sx - x0;
  const double fy = sy - y0;
  return (1 - fy) * ((1 - fx) * m(y0, x0) + fx * m(y0, x1)) +
         fy * ((1 - fx) * m(y1, x0) + fx * m(y1, x1));
}

Patch crop_impl(const Image& image, const BoundingBox& box, int out_w, int out_h,
                const BoundingBox* mask_box) {
  if (image.empty()) throw DegenerateInputError("crop_and_resize: empty image");
  if (out_w < 1 || out_h < 1) throw DegenerateInputError("crop_and_resize: bad out size");

  std::array<Eigen::MatrixXd, 3> src;
  if (mask_box) {
    // Mask in source coordinates before resampling so interpolation does
    // not bleed target pixels into the background patch.
    for (int c = 0; c < 3; ++c) src[c] = image.plane[c];
    const int xa = std::max(0, static_cast<int>(std::floor(mask_box->x)));
    const int ya = std::max(0, static_cast<int>(std::floor(mask_box->y)));
    const int xb = std::min(image.width(), static_cast<int>(std::ceil(mask_box->right())));
    const int yb = std::min(image.height(), static_cast<int>(std::ceil(mask_box->bottom())));
    for (int y = ya; y < yb; ++y)
      for (int x = xa; x < xb; ++x)
        if (mask_box->contains(x + 0.5, y + 0.5))
          for (int c = 0; c < 3; ++c) src[c](y, x) = 0.0;
  }
  const std::array<Eigen::MatrixXd, 3>& planes = mask_box ? src : image.plane;

  Patch out(out_w, out_h);
  for (int j = 0; j < out_h; ++j) {
    const double v = (out_h > 1) ? static_cast<double>(j) / (out_h - 1) : 0.5;
    const double sy = box.y + v * (box.h - 1.0);
    for (int i = 0; i < out_w; ++i) {
      const double u = (out_w > 1) ? static_cast<double>(i) / (out_w - 1) : 0.5;
      const double sx = box.x + u * (box.w - 1.0);
      if (mask_box && mask_box->contains(sx, sy)) {
        out.set_pixel(i, j, 0.0, 0.0, 0.0);
      } else {
        for (int c = 0; c < 3; ++c) out.plane[c](j, i) = sample_bilinear(planes[c], sx, sy);
      }
    }
  }
  return out;
}

}  // namespace

Patch crop_and_resize(const Image& image, const BoundingBox& box, int out_w, int out_h) {
  return crop_impl(image, box, out_w, out_h, nullptr);
}

Patch crop_and_resize_masked(const Image& image, const BoundingBox& box, int out_w, int out_h,
                             const BoundingBox& mask_box) {
  return crop_impl(image, box, out_w, out_h, &mask_box);
}

Patch resize_patch(const Patch& p, int out_w, int out_h) {
  BoundingBox full{0, 0, static_cast<double>(p.width()), static_cast<double>(p.height())};
  return crop_and_resize(p, full, out_w, out_h);
}

RegionTriplet build_region_triplet(const Image& image, const Detection& target,
                                   const std::vector<Detection>& frame_detections,
                                   const RegionConfig& config) {
  const double iw = image.width();
  const double ih = image.height();
  const BoundingBox box = target.box.clamped(iw, ih);

  RegionTriplet t;
  for (const auto& bin : split_into_bins(box, config.grid))
    t.parts.push_back(crop_and_resize(image, bin, config.part_resolution, config.part_resolution));

  t.semantic = crop_and_resize(image, box, config.semantic_resolution, config.semantic_resolution);

  std::vector<BoundingBox> others;
  for (const auto& d : frame_detections) {
    if (d.frame != target.frame) continue;
    const BoundingBox ob = d.box.clamped(iw, ih);
    if (ob.x == box.x && ob.y == box.y && ob.w == box.w && ob.h == box.h) continue;
    others.push_back(ob);
  }
  const BoundingBox u = compute_union_region(box, others, config.pad_fraction, iw, ih);
  t.context = crop_and_resize(image, u, config.semantic_resolution, config.semantic_resolution);
  t.context_background =
      crop_and_resize_masked(image, u, config.semantic_resolution, config.semantic_resolution, box);
  return t;
}

}  // namespace csc
