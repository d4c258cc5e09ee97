#include <doctest.h>

#include "csc/geometry.hpp"

using namespace csc;

namespace {

Image gray_image(const Eigen::MatrixXd& m) {
  Image img(static_cast<int>(m.cols()), static_cast<int>(m.rows()));
  for (int c = 0; c < 3; ++c) img.plane[c] = m;
  return img;
}

}  // namespace

TEST_CASE("split_into_bins tiles a 10x10 box into four 5x5 bins") {
  const auto bins = split_into_bins({0, 0, 10, 10}, {2, 2});
  REQUIRE(bins.size() == 4);
  for (const auto& b : bins) {
    CHECK(b.w == doctest::Approx(5.0));
    CHECK(b.h == doctest::Approx(5.0));
  }
  CHECK(bins[0].x == 0.0);
  CHECK(bins[0].y == 0.0);
  CHECK(bins[1].x == 5.0);
  CHECK(bins[2].y == 5.0);
  CHECK(bins[3].x == 5.0);
  CHECK(bins[3].y == 5.0);
}

TEST_CASE("split_into_bins gives remainder pixels to the last row/column") {
  const auto bins = split_into_bins({10, 20, 7, 5}, {2, 2});
  REQUIRE(bins.size() == 4);
  CHECK(bins[0].w == 3.0);
  CHECK(bins[1].w == 4.0);
  CHECK(bins[0].h == 2.0);
  CHECK(bins[2].h == 3.0);
  // exact tiling: areas sum to the box area
  double area = 0.0;
  for (const auto& b : bins) area += b.area();
  CHECK(area == doctest::Approx(35.0));
}

TEST_CASE("split_into_bins rejects boxes smaller than the grid") {
  CHECK_THROWS_AS(split_into_bins({0, 0, 1, 1}, {2, 2}), DegenerateInputError);
  CHECK_THROWS_AS(split_into_bins({0, 0, 0, 10}, {2, 2}), DegenerateInputError);
  CHECK_THROWS_AS(split_into_bins({0, 0, 10, 10}, {0, 2}), DegenerateInputError);
}

TEST_CASE("iou basics") {
  CHECK(iou({0, 0, 4, 4}, {0, 0, 4, 4}) == doctest::Approx(1.0));
  CHECK(iou({0, 0, 4, 4}, {10, 10, 4, 4}) == 0.0);
  // 2x4 overlap of two 4x4 boxes: 8 / (16 + 16 - 8)
  CHECK(iou({0, 0, 4, 4}, {2, 0, 4, 4}) == doctest::Approx(8.0 / 24.0));
  // touching edges do not overlap
  CHECK(iou({0, 0, 4, 4}, {4, 0, 4, 4}) == 0.0);
}

TEST_CASE("compute_union_region pads an isolated target") {
  const BoundingBox u = compute_union_region({10, 10, 10, 20}, {}, 0.1, 1000, 1000);
  CHECK(u.x == doctest::Approx(9.0));
  CHECK(u.y == doctest::Approx(8.0));
  CHECK(u.w == doctest::Approx(12.0));
  CHECK(u.h == doctest::Approx(24.0));
}

TEST_CASE("compute_union_region encloses overlapping neighbours, ignores distant ones") {
  const BoundingBox target{10, 10, 10, 10};
  const std::vector<BoundingBox> others{{15, 15, 10, 10}, {500, 500, 10, 10}};
  const BoundingBox u = compute_union_region(target, others, 0.0, 1000, 1000);
  CHECK(u.x == doctest::Approx(10.0));
  CHECK(u.y == doctest::Approx(10.0));
  CHECK(u.right() == doctest::Approx(25.0));
  CHECK(u.bottom() == doctest::Approx(25.0));
}

TEST_CASE("compute_union_region clamps to the image") {
  const BoundingBox u = compute_union_region({0, 0, 10, 10}, {}, 0.5, 12, 12);
  CHECK(u.x == 0.0);
  CHECK(u.y == 0.0);
  CHECK(u.right() <= 12.0);
  CHECK(u.bottom() <= 12.0);
}

TEST_CASE("crop_and_resize matches the corner-aligned bilinear oracle") {
  Eigen::MatrixXd m(2, 2);
  m << 0, 1, 2, 3;
  const Image img = gray_image(m);

  const Patch p = crop_and_resize(img, {0, 0, 2, 2}, 3, 3);
  Eigen::MatrixXd expect(3, 3);
  expect << 0, 0.5, 1, 1, 1.5, 2, 2, 2.5, 3;
  CHECK((p.plane[0] - expect).cwiseAbs().maxCoeff() == doctest::Approx(0.0).epsilon(1e-12));

  // fractional 1x1 crop samples the box center
  const Patch q = crop_and_resize(img, {0.5, 0.5, 1, 1}, 1, 1);
  CHECK(q.plane[1](0, 0) == doctest::Approx(1.5));
}

TEST_CASE("crop_and_resize identity crop reproduces the image") {
  Eigen::MatrixXd m(3, 4);
  m << 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12;
  const Image img = gray_image(m);
  const Patch p = crop_and_resize(img, {0, 0, 4, 3}, 4, 3);
  CHECK((p.plane[2] - m).cwiseAbs().maxCoeff() == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("crop_and_resize rejects degenerate requests") {
  CHECK_THROWS_AS(crop_and_resize(Image(), {0, 0, 1, 1}, 2, 2), DegenerateInputError);
  CHECK_THROWS_AS(crop_and_resize(gray_image(Eigen::MatrixXd::Zero(2, 2)), {0, 0, 1, 1}, 0, 2),
                  DegenerateInputError);
}

TEST_CASE("crop_and_resize_masked zeroes everything inside the mask") {
  const Image img = gray_image(Eigen::MatrixXd::Constant(16, 16, 0.7));
  const BoundingBox mask{4, 4, 8, 8};
  const Patch p = crop_and_resize_masked(img, {0, 0, 16, 16}, 16, 16, mask);
  for (int y = 0; y < 16; ++y)
    for (int x = 0; x < 16; ++x) {
      const double sx = x * 15.0 / 15.0;
      const double sy = y * 15.0 / 15.0;
      if (mask.contains(sx, sy))
        CHECK(p.plane[0](y, x) == 0.0);
    }
  // corners far from the mask are untouched
  CHECK(p.plane[0](0, 0) == doctest::Approx(0.7));
  CHECK(p.plane[0](15, 15) == doctest::Approx(0.7));
}

TEST_CASE("crop_and_resize_masked equals crop_and_resize for a non-overlapping mask") {
  Eigen::MatrixXd m = Eigen::MatrixXd::Random(8, 8).cwiseAbs();
  const Image img = gray_image(m);
  const Patch a = crop_and_resize(img, {0, 0, 4, 4}, 5, 5);
  const Patch b = crop_and_resize_masked(img, {0, 0, 4, 4}, 5, 5, {100, 100, 4, 4});
  CHECK((a.plane[0] - b.plane[0]).cwiseAbs().maxCoeff() == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("build_region_triplet shapes and masking invariant") {
  Image img(64, 48, 0.5, 0.5, 0.5);
  // distinctive pixels inside the target
  for (int y = 10; y < 26; ++y)
    for (int x = 10; x < 22; ++x) img.set_pixel(x, y, 1.0, 0.0, 0.0);

  Detection target;
  target.box = {10, 10, 12, 16};
  Detection other;
  other.box = {18, 12, 12, 16};  // overlaps target
  RegionConfig cfg;

  const RegionTriplet t = build_region_triplet(img, target, {target, other}, cfg);
  REQUIRE(t.parts.size() == 4);
  CHECK(t.parts[0].width() == 32);
  CHECK(t.parts[0].height() == 32);
  CHECK(t.semantic.width() == 64);
  CHECK(t.context.width() == 64);
  CHECK(t.context_background.width() == 64);

  // the background patch carries no target pixels: red channel max far
  // below the target's red value anywhere the target could land
  CHECK(t.context_background.plane[0].maxCoeff() <= 0.5 + 1e-12);
  // but the context patch does see the target
  CHECK(t.context.plane[0].maxCoeff() > 0.9);
}

TEST_CASE("resize_patch round trip at the same resolution is exact") {
  Eigen::MatrixXd m = Eigen::MatrixXd::Random(6, 6).cwiseAbs();
  const Patch p = gray_image(m);
  const Patch q = resize_patch(p, 6, 6);
  CHECK((q.plane[0] - m).cwiseAbs().maxCoeff() == doctest::Approx(0.0).epsilon(1e-12));
}
