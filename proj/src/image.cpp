#include "csc/image.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

namespace csc {

Eigen::RowVectorXd flatten_patch(const Patch& p) {
  const int w = p.width();
  const int h = p.height();
  Eigen::RowVectorXd v(3 * w * h);
  int k = 0;
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) v(k++) = p.plane[c](y, x);
  return v;
}

void write_ppm(const Image& img, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("write_ppm: cannot open " + path);
  f << "P6\n" << img.width() << " " << img.height() << "\n255\n";
  std::vector<unsigned char> row(static_cast<size_t>(img.width()) * 3);
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x)
      for (int c = 0; c < 3; ++c) {
        double v = std::clamp(img.plane[c](y, x), 0.0, 1.0);
        row[3 * x + c] = static_cast<unsigned char>(std::lround(v * 255.0));
      }
    f.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size()));
  }
  if (!f) throw std::runtime_error("write_ppm: write failed on " + path);
}

Image read_ppm(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("read_ppm: cannot open " + path);
  std::string magic;
  f >> magic;
  if (magic != "P6") throw ParseError("read_ppm: not a P6 file: " + path);
  auto skip_ws_and_comments = [&f]() {
    int c;
    while ((c = f.peek()) != EOF) {
      if (c == '#') {
        std::string line;
        std::getline(f, line);
      } else if (std::isspace(c)) {
        f.get();
      } else {
        break;
      }
    }
  };
  int w, h, maxval;
  skip_ws_and_comments();
  f >> w;
  skip_ws_and_comments();
  f >> h;
  skip_ws_and_comments();
  f >> maxval;
  f.get();  // single whitespace after maxval
  if (!f || w <= 0 || h <= 0 || maxval != 255) throw ParseError("read_ppm: bad header in " + path);

  Image img(w, h);
  std::vector<unsigned char> row(static_cast<size_t>(w) * 3);
  for (int y = 0; y < h; ++y) {
    f.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(row.size()));
    if (!f) throw ParseError("read_ppm: truncated pixel data in " + path);
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c) img.plane[c](y, x) = row[3 * x + c] / 255.0;
  }
  return img;
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  // Box-Muller; avoids library-dependent normal_distribution behavior.
  double u1 = uniform();
  while (u1 <= 1e-300) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * M_PI * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

}  // namespace csc
