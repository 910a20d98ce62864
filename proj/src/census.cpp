#include "dcm/census.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "dcm/errors.hpp"

namespace dcm {

namespace {

void check_window(int window, int width, int height) {
  if (window < 3 || window % 2 == 0 || window > 7) {
    throw ArgumentError("census window must be odd and in 3..7");
  }
  if (window > width || window > height) throw ArgumentError("census window larger than image");
}

void check_same_size(const CensusField& a, const CensusField& b) {
  if (a.width != b.width || a.height != b.height || a.window != b.window) {
    throw DimensionError("census fields differ in size or window");
  }
}

bool integral(double v) { return std::floor(v) == v; }

}  // namespace

Image::Image(int w, int h, int c) : width(w), height(h), channels(c) {
  if (w <= 0 || h <= 0 || c <= 0) throw ArgumentError("image dimensions must be positive");
  data.assign(static_cast<std::size_t>(w) * h * c, 0.0f);
}

Image to_gray(const Image& image) {
  if (image.channels == 1) return image;
  if (image.channels != 3) throw ArgumentError("expected 1 or 3 channels");
  Image g(image.width, image.height, 1);
  for (std::size_t i = 0; i < image.num_pixels(); ++i) {
    const float* p = image.data.data() + 3 * i;
    g.data[i] = 0.299f * p[0] + 0.587f * p[1] + 0.114f * p[2];
  }
  return g;
}

double sample_bilinear(const Image& gray, double x, double y) {
  x = std::clamp(x, 0.0, static_cast<double>(gray.width - 1));
  y = std::clamp(y, 0.0, static_cast<double>(gray.height - 1));
  const int x0 = std::min(static_cast<int>(x), gray.width - 1);
  const int y0 = std::min(static_cast<int>(y), gray.height - 1);
  const int x1 = std::min(x0 + 1, gray.width - 1);
  const int y1 = std::min(y0 + 1, gray.height - 1);
  const double fx = x - x0, fy = y - y0;
  return (1 - fx) * (1 - fy) * gray.at(x0, y0) + fx * (1 - fy) * gray.at(x1, y0) +
         (1 - fx) * fy * gray.at(x0, y1) + fx * fy * gray.at(x1, y1);
}

CensusField census_transform(const Image& gray, int window) {
  if (gray.channels != 1) throw ArgumentError("census needs a single-channel image");
  check_window(window, gray.width, gray.height);
  CensusField f;
  f.width = gray.width;
  f.height = gray.height;
  f.window = window;
  f.codes.assign(gray.num_pixels(), 0);
  const int r = window / 2;
#pragma omp parallel for schedule(static)
  for (int y = 0; y < gray.height; ++y) {
    for (int x = 0; x < gray.width; ++x) {
      const float c = gray.at(x, y);
      std::uint64_t code = 0;
      int bit = 0;
      for (int dy = -r; dy <= r; ++dy) {
        const int yy = std::clamp(y + dy, 0, gray.height - 1);
        for (int dx = -r; dx <= r; ++dx) {
          if (dx == 0 && dy == 0) continue;
          const int xx = std::clamp(x + dx, 0, gray.width - 1);
          if (gray.at(xx, yy) < c) code |= std::uint64_t{1} << bit;
          ++bit;
        }
      }
      f.codes[static_cast<std::size_t>(y) * gray.width + x] = code;
    }
  }
  return f;
}

std::uint64_t census_code_at(const Image& gray, double x, double y, int window) {
  const int r = window / 2;
  const double c = sample_bilinear(gray, x, y);
  std::uint64_t code = 0;
  int bit = 0;
  for (int dy = -r; dy <= r; ++dy) {
    for (int dx = -r; dx <= r; ++dx) {
      if (dx == 0 && dy == 0) continue;
      if (sample_bilinear(gray, x + dx, y + dy) < c) code |= std::uint64_t{1} << bit;
      ++bit;
    }
  }
  return code;
}

CostVolume hamming_cost_volume(const CensusField& left, const CensusField& right,
                               const std::vector<double>& disparities) {
  check_same_size(left, right);
  if (disparities.empty()) throw ArgumentError("empty disparity range");
  for (double d : disparities) {
    if (!integral(d)) throw ArgumentError("disparities must be integral");
  }
  const int k = static_cast<int>(disparities.size());
  CostVolume v(left.width, left.height, k);
  v.label_values = disparities;
  const float outside = 0.5f * left.bits();
#pragma omp parallel for schedule(static)
  for (int y = 0; y < left.height; ++y) {
    for (int x = 0; x < left.width; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * left.width + x;
      for (int l = 0; l < k; ++l) {
        const int xr = x - static_cast<int>(disparities[l]);
        v.at(i, l) = (xr < 0 || xr >= left.width)
                         ? outside
                         : static_cast<float>(std::popcount(left.at(x, y) ^ right.at(xr, y)));
      }
    }
  }
  return v;
}

FlowCostVolume2D flow_cost_volume(const CensusField& first, const CensusField& second,
                                  const std::vector<double>& range1,
                                  const std::vector<double>& range2) {
  check_same_size(first, second);
  if (range1.empty() || range2.empty()) throw ArgumentError("empty flow range");
  for (double d : range1) {
    if (!integral(d)) throw ArgumentError("flow labels must be integral");
  }
  for (double d : range2) {
    if (!integral(d)) throw ArgumentError("flow labels must be integral");
  }
  const int k1 = static_cast<int>(range1.size()), k2 = static_cast<int>(range2.size());
  FlowCostVolume2D v(first.width, first.height, k1, k2);
  v.label_values1 = range1;
  v.label_values2 = range2;
  const float outside = 0.5f * first.bits();
#pragma omp parallel for schedule(static)
  for (int y = 0; y < first.height; ++y) {
    for (int x = 0; x < first.width; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * first.width + x;
      const std::uint64_t c = first.at(x, y);
      for (int a = 0; a < k1; ++a) {
        const int xs = x + static_cast<int>(range1[a]);
        for (int b = 0; b < k2; ++b) {
          const int ys = y + static_cast<int>(range2[b]);
          const bool out = xs < 0 || xs >= first.width || ys < 0 || ys >= first.height;
          v.at(i, a, b) = out ? outside : static_cast<float>(std::popcount(c ^ second.at(xs, ys)));
        }
      }
    }
  }
  return v;
}

std::vector<double> edge_weights(const Image& gray, const GridGraph& graph, double a, double b,
                                 double w_min) {
  if (gray.channels != 1) throw ArgumentError("edge weights need a single-channel image");
  if (gray.width != graph.width || gray.height != graph.height) {
    throw DimensionError("image and graph sizes differ");
  }
  if (a < 0 || b <= 0 || w_min < 0) throw ArgumentError("edge weight parameters out of range");
  std::vector<double> w(graph.edges.size());
  for (std::size_t e = 0; e < w.size(); ++e) {
    const double diff = std::abs(static_cast<double>(gray.data[graph.edges[e].i]) -
                                 gray.data[graph.edges[e].j]);
    w[e] = std::max(w_min, std::exp(-a * std::pow(diff, b)));
  }
  return w;
}

DataEvaluator1D warped_stereo_cost(const CensusField& left, const Image& right_gray) {
  if (left.width != right_gray.width || left.height != right_gray.height) {
    throw DimensionError("census field and image sizes differ");
  }
  return [&left, &right_gray](std::size_t pixel, double u) {
    const int x = static_cast<int>(pixel % left.width);
    const int y = static_cast<int>(pixel / left.width);
    const double xs = x - u;
    if (xs < 0.0 || xs > left.width - 1) return 0.5 * left.bits();
    const std::uint64_t code = census_code_at(right_gray, xs, y, left.window);
    return static_cast<double>(std::popcount(left.codes[pixel] ^ code));
  };
}

DataEvaluator2D warped_flow_cost(const CensusField& first, const Image& second_gray) {
  if (first.width != second_gray.width || first.height != second_gray.height) {
    throw DimensionError("census field and image sizes differ");
  }
  return [&first, &second_gray](std::size_t pixel, double u1, double u2) {
    const int x = static_cast<int>(pixel % first.width);
    const int y = static_cast<int>(pixel / first.width);
    const double xs = x + u1, ys = y + u2;
    if (xs < 0.0 || xs > first.width - 1 || ys < 0.0 || ys > first.height - 1) {
      return 0.5 * first.bits();
    }
    const std::uint64_t code = census_code_at(second_gray, xs, ys, first.window);
    return static_cast<double>(std::popcount(first.codes[pixel] ^ code));
  };
}

}  // namespace dcm
