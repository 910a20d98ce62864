#include "dcm/synthetic.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "dcm/errors.hpp"

namespace dcm {

ProceduralTexture::ProceduralTexture(std::uint32_t seed, int waves, double max_frequency) {
  if (waves < 1 || !(max_frequency > 0.0)) throw ArgumentError("bad texture parameters");
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double total = 0.0;
  for (int k = 0; k < waves; ++k) {
    const double f = max_frequency * (0.15 + 0.85 * unit(rng));
    const double angle = 2.0 * std::numbers::pi * unit(rng);
    Wave w{f * std::cos(angle), f * std::sin(angle), 2.0 * std::numbers::pi * unit(rng),
           0.5 + unit(rng)};
    total += w.amplitude;
    waves_.push_back(w);
  }
  norm_ = total;
}

double ProceduralTexture::operator()(double x, double y) const {
  double s = 0.0;
  for (const Wave& w : waves_) {
    s += w.amplitude * std::sin(2.0 * std::numbers::pi * (w.fx * x + w.fy * y) + w.phase);
  }
  return 0.5 + 0.5 * s / norm_;
}

StereoScene render_slanted_plane(int width, int height, double a, double b, double c,
                                 std::uint32_t seed) {
  if (!(a < 1.0)) throw ArgumentError("plane slope must be < 1");
  const ProceduralTexture tex(seed);
  StereoScene s{Image(width, height), Image(width, height), {}, {}};
  s.disparity.resize(s.left.num_pixels());
  s.visible.assign(s.left.num_pixels(), 1);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * width + x;
      s.left.at(x, y) = static_cast<float>(tex(x, y));
      s.disparity[i] = a * x + b * y + c;
      const double xr = x - s.disparity[i];
      s.visible[i] = xr >= 0.0 && xr <= width - 1;
      // Right pixel xr sees the surface point x with x - d(x) = xr.
      const double src = (x + b * y + c) / (1.0 - a);
      s.right.at(x, y) = static_cast<float>(tex(src, y));
    }
  }
  return s;
}

StereoScene render_box_scene(int width, int height, double a, double c, double box_d,
                             std::array<int, 4> box, std::uint32_t seed) {
  if (!(a < 1.0)) throw ArgumentError("plane slope must be < 1");
  const ProceduralTexture bg(seed), fg(seed + 7919);
  auto in_box = [&](double x, int y) {
    return x >= box[0] && x < box[1] && y >= box[2] && y < box[3];
  };
  StereoScene s{Image(width, height), Image(width, height), {}, {}};
  s.disparity.resize(s.left.num_pixels());
  s.visible.assign(s.left.num_pixels(), 1);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * width + x;
      const bool front = in_box(x, y);
      s.left.at(x, y) = static_cast<float>(front ? fg(x, y) : bg(x, y));
      s.disparity[i] = front ? box_d : a * x + c;
      const double xr = x - s.disparity[i];
      const bool hidden = !front && in_box(xr + box_d, y);
      s.visible[i] = !hidden && xr >= 0.0 && xr <= width - 1;
      const double xf = x + box_d;
      s.right.at(x, y) = static_cast<float>(in_box(xf, y) ? fg(xf, y) : bg((x + c) / (1.0 - a), y));
    }
  }
  return s;
}

FlowScene render_translation(int width, int height, double t1, double t2, std::uint32_t seed) {
  const ProceduralTexture tex(seed);
  FlowScene s{Image(width, height), Image(width, height), {t1, t2}};
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      s.first.at(x, y) = static_cast<float>(tex(x, y));
      s.second.at(x, y) = static_cast<float>(tex(x - t1, y - t2));
    }
  }
  return s;
}

}  // namespace dcm
