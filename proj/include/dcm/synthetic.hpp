#pragma once

// Procedural scenes with exact ground truth, rendered analytically so that
// non-integer shifts involve no resampling.

#include <array>
#include <cstdint>
#include <vector>

#include "dcm/census.hpp"

namespace dcm {

/// Band-limited random texture: a fixed sum of sinusoids in [0, 1].
class ProceduralTexture {
 public:
  explicit ProceduralTexture(std::uint32_t seed, int waves = 24, double max_frequency = 0.3);
  double operator()(double x, double y) const;

 private:
  struct Wave {
    double fx, fy, phase, amplitude;
  };
  std::vector<Wave> waves_;
  double norm_ = 1.0;
};

struct StereoScene {
  Image left;
  Image right;
  std::vector<double> disparity;  // ground truth, left view, per pixel
  std::vector<char> visible;      // left pixel also seen in the right view
};

/// Plane d(x, y) = a x + b y + c seen through a textured surface.
/// Requires a < 1 so the right view is a one-to-one remap.
StereoScene render_slanted_plane(int width, int height, double a, double b, double c,
                                 std::uint32_t seed);

/// Slanted background plus a fronto-parallel box [x0, x1) x [y0, y1) at
/// disparity box_d, with its own texture. Pixels the box hides in the right
/// view are marked invisible.
StereoScene render_box_scene(int width, int height, double a, double c, double box_d,
                             std::array<int, 4> box, std::uint32_t seed);

struct FlowScene {
  Image first;
  Image second;
  std::array<double, 2> flow;
};

/// second(x + t) = first(x).
FlowScene render_translation(int width, int height, double t1, double t2, std::uint32_t seed);

}  // namespace dcm
