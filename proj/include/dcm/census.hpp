#pragma once

// Census transform, Hamming cost volumes and image-driven edge weights.

#include <cstdint>
#include <vector>

#include "dcm/continuous_pd.hpp"
#include "dcm/grid_energy.hpp"

namespace dcm {

/// Row-major image with interleaved channels, intensities in [0, 1].
struct Image {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<float> data;

  Image() = default;
  Image(int width, int height, int channels = 1);

  std::size_t num_pixels() const { return static_cast<std::size_t>(width) * height; }
  float& at(int x, int y, int c = 0) {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  float at(int x, int y, int c = 0) const {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
};

/// 0.299 R + 0.587 G + 0.114 B; single-channel input is copied.
Image to_gray(const Image& image);

/// Bilinear sample of channel 0 with edge replication.
double sample_bilinear(const Image& gray, double x, double y);

struct CensusField {
  int width = 0;
  int height = 0;
  int window = 5;
  std::vector<std::uint64_t> codes;

  int bits() const { return window * window - 1; }
  std::uint64_t at(int x, int y) const { return codes[static_cast<std::size_t>(y) * width + x]; }
};

/// Bit k is set iff the k-th neighbor (raster order, center skipped) is
/// strictly darker than the center. Borders replicate. Window odd, 3..7.
CensusField census_transform(const Image& gray, int window = 5);

/// Census code of the image resampled around a real-valued position.
std::uint64_t census_code_at(const Image& gray, double x, double y, int window);

/// cost(i, k) = popcount(left(x, y) ^ right(x - d_k, y)). Disparities must be
/// integral; samples leaving the frame cost bits / 2.
CostVolume hamming_cost_volume(const CensusField& left, const CensusField& right,
                               const std::vector<double>& disparities);

/// D_i(a, b) = popcount(first(x, y) ^ second(x + d1_a, y + d2_b)).
FlowCostVolume2D flow_cost_volume(const CensusField& first, const CensusField& second,
                                  const std::vector<double>& range1,
                                  const std::vector<double>& range2);

/// max(w_min, exp(-a |I_i - I_j|^b)) per edge.
std::vector<double> edge_weights(const Image& gray, const GridGraph& graph, double a, double b,
                                 double w_min);

/// Census cost of matching pixel i against the second image warped by a
/// real-valued disparity (x - u) or flow (x + u1, y + u2).
DataEvaluator1D warped_stereo_cost(const CensusField& left, const Image& right_gray);
DataEvaluator2D warped_flow_cost(const CensusField& first, const Image& second_gray);

}  // namespace dcm
