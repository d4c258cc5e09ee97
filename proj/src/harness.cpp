#include "csc/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "csc/mot_io.hpp"

namespace fs = std::filesystem;

namespace csc {

namespace {

struct Rgb {
  double r, g, b;
};

Rgb hsv_to_rgb(double h, double s, double v) {
  h = h - std::floor(h);
  const double c = v * s;
  const double hp = h * 6.0;
  const double x = c * (1.0 - std::fabs(std::fmod(hp, 2.0) - 1.0));
  double r = 0, g = 0, b = 0;
  if (hp < 1) { r = c; g = x; }
  else if (hp < 2) { r = x; g = c; }
  else if (hp < 3) { g = c; b = x; }
  else if (hp < 4) { g = x; b = c; }
  else if (hp < 5) { r = x; b = c; }
  else { r = c; b = x; }
  const double m = v - c;
  return {r + m, g + m, b + m};
}

double hash01(int x, int y, std::uint64_t seed) {
  std::uint64_t z = static_cast<std::uint64_t>(x) * 73856093ULL ^
                    static_cast<std::uint64_t>(y) * 19349663ULL ^ (seed + 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  z ^= z >> 31;
  return static_cast<double>(z >> 11) * 0x1.0p-53;
}

struct TargetSpec {
  double w, h;
  Rgb base;
  std::array<Rgb, 4> accents;
  std::vector<BoundingBox> path;  // one box per frame
};

void render_target(Image& img, const TargetSpec& t, const BoundingBox& box,
                   double accent_fraction) {
  const int x0 = std::max(0, static_cast<int>(std::floor(box.x)));
  const int y0 = std::max(0, static_cast<int>(std::floor(box.y)));
  const int x1 = std::min(img.width(), static_cast<int>(std::ceil(box.right())));
  const int y1 = std::min(img.height(), static_cast<int>(std::ceil(box.bottom())));
  for (int y = y0; y < y1; ++y) {
    for (int x = x0; x < x1; ++x) {
      const double px = x + 0.5, py = y + 0.5;
      if (!box.contains(px, py)) continue;
      const double rx = (px - box.x) / box.w;
      const double ry = (py - box.y) / box.h;
      Rgb col = t.base;
      // darker 1px rim so the semantic crop sees an object boundary
      if (px - box.x < 1.0 || box.right() - px < 1.0 || py - box.y < 1.0 ||
          box.bottom() - py < 1.0) {
        col = {t.base.r * 0.45, t.base.g * 0.45, t.base.b * 0.45};
      } else {
        const int part = (ry < 0.5 ? 0 : 2) + (rx < 0.5 ? 0 : 1);
        // accent mark centered in its bin
        const double lx = rx < 0.5 ? rx * 2.0 : (rx - 0.5) * 2.0;
        const double ly = ry < 0.5 ? ry * 2.0 : (ry - 0.5) * 2.0;
        const double lo = 0.5 - accent_fraction / 2.0;
        const double hi = 0.5 + accent_fraction / 2.0;
        if (lx >= lo && lx < hi && ly >= lo && ly < hi) col = t.accents[static_cast<size_t>(part)];
      }
      img.set_pixel(x, y, col.r, col.g, col.b);
    }
  }
}

}  // namespace

Sequence generate_sequence(const ScenarioConfig& cfg) {
  if (cfg.num_targets < 1 || cfg.frames < 1 || cfg.image_w < 8 || cfg.image_h < 8)
    throw DegenerateInputError("generate_sequence: invalid config");
  if (cfg.occlusion_rate < 0.0 || cfg.occlusion_rate > 1.0)
    throw DegenerateInputError("generate_sequence: occlusion_rate out of [0,1]");
  if (cfg.target_w + 4 > cfg.image_w || cfg.target_h + 4 > cfg.image_h)
    throw DegenerateInputError("generate_sequence: targets too large to fit image");

  Rng rng(cfg.seed ^ (cfg.texture_seed * 0x9e3779b97f4a7c15ULL + 1));

  std::vector<TargetSpec> targets(static_cast<size_t>(cfg.num_targets));
  for (int i = 0; i < cfg.num_targets; ++i) {
    TargetSpec& t = targets[static_cast<size_t>(i)];
    t.w = cfg.target_w * rng.uniform(0.9, 1.1);
    t.h = cfg.target_h * rng.uniform(0.9, 1.1);
    if (cfg.identical_base) {
      t.base = {0.42, 0.47, 0.58};
      rng.uniform();  // keep draw count aligned with the distinct branch
    } else {
      t.base = hsv_to_rgb(0.61803398875 * i + rng.uniform(0.0, 0.03), 0.85, 0.9);
    }
    for (int p = 0; p < 4; ++p)
      t.accents[static_cast<size_t>(p)] = hsv_to_rgb(rng.uniform(), 0.95, rng.uniform(0.5, 1.0));
    t.path.resize(static_cast<size_t>(cfg.frames));
  }

  const int n_crossing_pairs =
      std::min(cfg.crossings, cfg.num_targets / 2);

  // Crossing pairs: opposite horizontal motion in a shared lane, meeting
  // at the scheduled frame.
  for (int e = 0; e < n_crossing_pairs; ++e) {
    const int ia = 2 * e, ib = 2 * e + 1;
    TargetSpec& a = targets[static_cast<size_t>(ia)];
    TargetSpec& b = targets[static_cast<size_t>(ib)];
    const double f_meet = cfg.frames * (e + 1.0) / (n_crossing_pairs + 1.0);
    const double x_meet = cfg.image_w * rng.uniform(0.4, 0.6) - a.w / 2.0;
    const double max_x_a = cfg.image_w - a.w - 1.0;
    const double max_x_b = cfg.image_w - b.w - 1.0;
    double v = 0.9 * std::min({x_meet / f_meet, (max_x_a - x_meet) / (cfg.frames - f_meet + 1.0),
                               (max_x_b - x_meet) / f_meet, x_meet / (cfg.frames - f_meet + 1.0)});
    v = std::clamp(v, 0.2, cfg.max_speed);

    const double lane_span = cfg.image_h - std::max(a.h, b.h) * 2.2;
    const double y_a = std::max(1.0, 1.0 + lane_span * (e + rng.uniform(0.2, 0.8)) /
                                           std::max(1, n_crossing_pairs));
    const double dy = (1.0 - cfg.occlusion_rate) * a.h;
    for (int f = 0; f < cfg.frames; ++f) {
      const double xa = std::clamp(x_meet + v * (f - f_meet), 0.0, max_x_a);
      const double xb = std::clamp(x_meet - v * (f - f_meet), 0.0, max_x_b);
      a.path[static_cast<size_t>(f)] = {xa, y_a, a.w, a.h};
      b.path[static_cast<size_t>(f)] = {xb, std::min(y_a + dy, cfg.image_h - b.h - 1.0), b.w, b.h};
    }
  }

  // Free targets: random start, random velocity, bounce at the borders.
  for (int i = 2 * n_crossing_pairs; i < cfg.num_targets; ++i) {
    TargetSpec& t = targets[static_cast<size_t>(i)];
    double x = rng.uniform(1.0, cfg.image_w - t.w - 1.0);
    double y = rng.uniform(1.0, cfg.image_h - t.h - 1.0);
    double vx = rng.uniform(cfg.min_speed, cfg.max_speed) * (rng.uniform() < 0.5 ? -1.0 : 1.0);
    double vy =
        0.4 * rng.uniform(cfg.min_speed, cfg.max_speed) * (rng.uniform() < 0.5 ? -1.0 : 1.0);
    for (int f = 0; f < cfg.frames; ++f) {
      t.path[static_cast<size_t>(f)] = {x, y, t.w, t.h};
      x += vx;
      y += vy;
      if (x < 1.0 || x > cfg.image_w - t.w - 1.0) {
        vx = -vx;
        x = std::clamp(x, 1.0, cfg.image_w - t.w - 1.0);
      }
      if (y < 1.0 || y > cfg.image_h - t.h - 1.0) {
        vy = -vy;
        y = std::clamp(y, 1.0, cfg.image_h - t.h - 1.0);
      }
    }
  }

  Sequence seq;
  seq.name = cfg.name;
  seq.width = cfg.image_w;
  seq.height = cfg.image_h;
  seq.frames.reserve(static_cast<size_t>(cfg.frames));
  seq.gt.resize(static_cast<size_t>(cfg.frames));
  seq.det.resize(static_cast<size_t>(cfg.frames));

  const std::uint64_t tex = cfg.seed * 1000003ULL + cfg.texture_seed;
  for (int f = 0; f < cfg.frames; ++f) {
    Image img(cfg.image_w, cfg.image_h);
    for (int y = 0; y < cfg.image_h; ++y)
      for (int x = 0; x < cfg.image_w; ++x) {
        const double v = 0.32 + 0.10 * hash01(x, y, tex);
        img.set_pixel(x, y, v, v, v * 1.05);
      }
    // painter's order: higher index occludes lower
    for (int i = 0; i < cfg.num_targets; ++i) {
      const TargetSpec& t = targets[static_cast<size_t>(i)];
      const BoundingBox& box = t.path[static_cast<size_t>(f)];
      render_target(img, t, box, cfg.accent_fraction);
      Detection d;
      d.frame = f;
      d.box = box;
      d.confidence = 1.0;
      d.identity = i + 1;
      seq.gt[static_cast<size_t>(f)].push_back(d);
      d.identity = -1;
      seq.det[static_cast<size_t>(f)].push_back(d);
    }
    seq.frames.push_back(std::move(img));
  }
  return seq;
}

double sample_direction_shift(Rng& rng, const NoiseConfig& noise, double dim) {
  if (rng.uniform() >= noise.shift_prob) return 0.0;
  return rng.uniform(0.0, std::min(noise.shift_max_fraction * dim, noise.shift_max_pixels));
}

std::vector<Detection> inject_noise(const std::vector<Detection>& detections,
                                    const NoiseConfig& noise, Rng& rng, double image_w,
                                    double image_h) {
  std::vector<Detection> out;
  out.reserve(detections.size());
  for (Detection d : detections) {
    BoundingBox& b = d.box;
    // four directions independently: left, right, up, down
    b.x -= sample_direction_shift(rng, noise, b.w);
    b.x += sample_direction_shift(rng, noise, b.w);
    b.y -= sample_direction_shift(rng, noise, b.h);
    b.y += sample_direction_shift(rng, noise, b.h);

    // resize about the center, width and height independent
    const double aw = rng.uniform(noise.resize_lo, noise.resize_hi);
    const double ah = rng.uniform(noise.resize_lo, noise.resize_hi);
    const double cx = b.cx(), cy = b.cy();
    b.w *= aw;
    b.h *= ah;
    b.x = cx - b.w / 2.0;
    b.y = cy - b.h / 2.0;

    if (image_w > 0 && image_h > 0) b = b.clamped(image_w, image_h);
    out.push_back(d);
  }
  return out;
}

void write_sequence(const Sequence& seq, const std::string& dir) {
  fs::create_directories(fs::path(dir) / "img1");
  fs::create_directories(fs::path(dir) / "gt");
  fs::create_directories(fs::path(dir) / "det");
  char name[32];
  for (size_t f = 0; f < seq.frames.size(); ++f) {
    std::snprintf(name, sizeof(name), "%06zu.ppm", f + 1);
    write_ppm(seq.frames[f], (fs::path(dir) / "img1" / name).string());
  }
  {
    std::ofstream g((fs::path(dir) / "gt" / "gt.txt").string());
    for (const auto& frame_dets : seq.gt)
      for (const Detection& d : frame_dets)
        g << (d.frame + 1) << ',' << d.identity << ',' << format_double(d.box.x) << ','
          << format_double(d.box.y) << ',' << format_double(d.box.w) << ','
          << format_double(d.box.h) << ",1,-1,-1\n";
  }
  {
    std::ofstream g((fs::path(dir) / "det" / "det.txt").string());
    for (const auto& frame_dets : seq.det)
      for (const Detection& d : frame_dets)
        g << (d.frame + 1) << ",-1," << format_double(d.box.x) << ',' << format_double(d.box.y)
          << ',' << format_double(d.box.w) << ',' << format_double(d.box.h) << ','
          << format_double(d.confidence) << ",-1,-1\n";
  }
  std::ofstream ini((fs::path(dir) / "seqinfo.ini").string());
  ini << "[Sequence]\nname=" << seq.name << "\nimDir=img1\nframeRate=30\nseqLength="
      << seq.frames.size() << "\nimWidth=" << seq.width << "\nimHeight=" << seq.height
      << "\nimExt=.ppm\n";
}

Sequence read_sequence(const std::string& dir, bool load_images) {
  Sequence seq;
  const std::string ini_path = (fs::path(dir) / "seqinfo.ini").string();
  std::ifstream ini(ini_path);
  if (!ini) throw std::runtime_error("read_sequence: cannot open " + ini_path);
  int length = 0;
  std::string line;
  while (std::getline(ini, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = line.substr(0, eq), val = line.substr(eq + 1);
    if (key == "name") seq.name = val;
    else if (key == "seqLength") length = std::stoi(val);
    else if (key == "imWidth") seq.width = std::stoi(val);
    else if (key == "imHeight") seq.height = std::stoi(val);
  }
  if (length <= 0) throw ParseError("read_sequence: bad seqLength in " + ini_path);

  if (load_images) {
    char name[32];
    for (int f = 0; f < length; ++f) {
      std::snprintf(name, sizeof(name), "%06d.ppm", f + 1);
      seq.frames.push_back(read_ppm((fs::path(dir) / "img1" / name).string()));
    }
  }
  seq.gt.resize(static_cast<size_t>(length));
  seq.det.resize(static_cast<size_t>(length));
  const std::string gt_path = (fs::path(dir) / "gt" / "gt.txt").string();
  if (fs::exists(gt_path))
    for (const Detection& d : read_mot(gt_path, MotKind::ground_truth))
      if (d.frame < length) seq.gt[static_cast<size_t>(d.frame)].push_back(d);
  const std::string det_path = (fs::path(dir) / "det" / "det.txt").string();
  if (fs::exists(det_path))
    for (const Detection& d : read_mot(det_path, MotKind::detections))
      if (d.frame < length) seq.det[static_cast<size_t>(d.frame)].push_back(d);
  return seq;
}

ScenarioConfig easy_preset(std::uint64_t seed) {
  ScenarioConfig c;
  c.name = "easy";
  c.num_targets = 5;
  c.frames = 100;
  c.crossings = 2;
  c.identical_base = false;
  c.occlusion_rate = 0.5;
  c.seed = seed;
  return c;
}

ScenarioConfig hard_preset(std::uint64_t seed) {
  ScenarioConfig c;
  c.name = "hard";
  c.num_targets = 4;
  c.frames = 80;
  c.crossings = 2;
  c.identical_base = true;
  c.occlusion_rate = 0.6;
  c.seed = seed;
  return c;
}

}  // namespace csc
