#ifndef CSC_IMAGE_HPP
#define CSC_IMAGE_HPP

#include <Eigen/Core>
#include <array>
#include <string>

#include "csc/types.hpp"

namespace csc {

// Planar RGB image, values in [0, 1]. plane[c](row, col) with row = y.
struct Image {
  std::array<Eigen::MatrixXd, 3> plane;

  Image() = default;
  Image(int width, int height, double r = 0.0, double g = 0.0, double b = 0.0) {
    plane[0] = Eigen::MatrixXd::Constant(height, width, r);
    plane[1] = Eigen::MatrixXd::Constant(height, width, g);
    plane[2] = Eigen::MatrixXd::Constant(height, width, b);
  }

  int width() const { return static_cast<int>(plane[0].cols()); }
  int height() const { return static_cast<int>(plane[0].rows()); }
  bool empty() const { return plane[0].size() == 0; }

  void set_pixel(int x, int y, double r, double g, double b) {
    plane[0](y, x) = r;
    plane[1](y, x) = g;
    plane[2](y, x) = b;
  }
};

// Fixed-size patch; same planar layout as Image.
using Patch = Image;

// Flatten to a channel-major row vector of length 3*h*w
// (index = c*h*w + y*w + x).
Eigen::RowVectorXd flatten_patch(const Patch& p);

// Binary PPM (P6), 8-bit.
void write_ppm(const Image& img, const std::string& path);
Image read_ppm(const std::string& path);

}  // namespace csc

#endif
