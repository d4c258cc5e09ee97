#ifndef CSC_TYPES_HPP
#define CSC_TYPES_HPP

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

namespace csc {

// Axis-aligned box, top-left corner + extent, in pixel units.
// Coordinates are continuous: detection noise produces fractional boxes.
struct BoundingBox {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;

  BoundingBox() = default;
  BoundingBox(double x_, double y_, double w_, double h_) : x(x_), y(y_), w(w_), h(h_) {}

  double right() const { return x + w; }
  double bottom() const { return y + h; }
  double area() const { return w * h; }
  bool valid() const { return w > 0.0 && h > 0.0; }

  double cx() const { return x + 0.5 * w; }
  double cy() const { return y + 0.5 * h; }

  bool contains(double px, double py) const {
    return px >= x && px < right() && py >= y && py < bottom();
  }

  // Clamp to [0, width] x [0, height]; keeps the box non-empty when any
  // part of it intersects the image.
  BoundingBox clamped(double width, double height) const;
};

struct Detection {
  int frame = 0;
  BoundingBox box;
  double confidence = 1.0;
  // Ground-truth label, training only; -1 when unknown.
  int identity = -1;
};

struct GridPair {
  int rows = 2;
  int cols = 2;
};

struct DegenerateInputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ShapeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Deterministic RNG. All sampling goes through these helpers so that
// results do not depend on the standard library's distribution
// implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    // splitmix64
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Inclusive bounds.
  int uniform_int(int lo, int hi) {
    if (hi < lo) throw std::invalid_argument("uniform_int: empty range");
    std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<int>(next() % span);
  }

  double normal();

  std::uint64_t fork() { return next(); }

 private:
  std::uint64_t state_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace csc

#endif
