#pragma once

// Independent reference implementations used only by the tests. None of
// these share code paths with the library beyond the data types.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include "dcm/chain_dp.hpp"
#include "dcm/grid_energy.hpp"

namespace oracle {

inline double r_literal(double eps, double delta, double trunc, double t) {
  const double a = std::abs(t);
  if (a <= delta) return eps * a;
  return std::min(trunc, eps * delta + a - delta);
}

inline dcm::CostVolume random_volume(int w, int h, int k, std::mt19937& rng, int max_cost = 9) {
  dcm::CostVolume v(w, h, k);
  std::uniform_int_distribution<int> d(0, max_cost);
  for (auto& c : v.costs) c = static_cast<float>(d(rng));
  return v;
}

inline dcm::GridGraph random_weights(dcm::GridGraph g, std::mt19937& rng, int max_weight = 3) {
  std::uniform_int_distribution<int> d(0, max_weight);
  for (auto& w : g.weights) w = d(rng);
  return g;
}

/// Double loop over pixels and right/down neighbours.
inline double grid_energy(const dcm::CostVolume& v, const std::vector<double>& hw,
                          const std::vector<double>& vw, const dcm::PenaltyParams& p,
                          const dcm::Labeling& x) {
  double e = 0.0;
  const auto& lv = v.label_values;
  for (int y = 0; y < v.height; ++y) {
    for (int c = 0; c < v.width; ++c) {
      const int i = y * v.width + c;
      e += v.costs[static_cast<std::size_t>(i) * v.labels + x[i]];
      if (c + 1 < v.width) {
        e += hw[y * (v.width - 1) + c] *
             r_literal(p.epsilon, p.delta, p.trunc, lv[x[i]] - lv[x[i + 1]]);
      }
      if (y + 1 < v.height) {
        e += vw[y * v.width + c] *
             r_literal(p.epsilon, p.delta, p.trunc, lv[x[i]] - lv[x[i + v.width]]);
      }
    }
  }
  return e;
}

/// Exact grid minimum by dynamic programming over the raster frontier
/// (the last `width` labels). K^width states; fine for K^width <= ~1e5.
inline double grid_exact_min(const dcm::CostVolume& v, const dcm::GridGraph& g,
                             const dcm::PenaltyParams& p) {
  const int w = v.width;
  const int k = v.labels;
  std::size_t states = 1;
  std::vector<std::size_t> power(w);
  for (int c = 0; c < w; ++c) {
    power[c] = states;
    states *= static_cast<std::size_t>(k);
  }
  const auto& lv = v.label_values;
  auto r = [&](int a, int b) { return r_literal(p.epsilon, p.delta, p.trunc, lv[a] - lv[b]); };
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dp(states, 0.0), next(states);
  for (int y = 0; y < v.height; ++y) {
    for (int c = 0; c < w; ++c) {
      const std::size_t pix = static_cast<std::size_t>(y) * w + c;
      std::fill(next.begin(), next.end(), inf);
      for (std::size_t s = 0; s < states; ++s) {
        if (dp[s] == inf) continue;
        const int up = static_cast<int>((s / power[c]) % k);
        const int left = c > 0 ? static_cast<int>((s / power[c - 1]) % k) : 0;
        for (int a = 0; a < k; ++a) {
          double cost = dp[s] + v.costs[pix * k + a];
          if (c > 0) cost += g.weights[g.horizontal_edge(c - 1, y)] * r(left, a);
          if (y > 0) cost += g.weights[g.vertical_edge(c, y - 1)] * r(up, a);
          const std::size_t t = s - up * power[c] + a * power[c];
          next[t] = std::min(next[t], cost);
        }
      }
      dp.swap(next);
    }
  }
  return *std::min_element(dp.begin(), dp.end());
}

/// Calls fn on every labeling of n variables with k labels.
inline void enumerate(std::size_t n, int k, const std::function<void(const std::vector<std::int32_t>&)>& fn) {
  std::vector<std::int32_t> x(n, 0);
  while (true) {
    fn(x);
    std::size_t i = 0;
    while (i < n && ++x[i] == k) x[i++] = 0;
    if (i == n) return;
  }
}

/// Exhaustive min-marginals of a chain.
inline dcm::NodeTable chain_min_marginals(const dcm::ChainView& chain) {
  dcm::NodeTable m(chain.size(), chain.labels, std::numeric_limits<double>::infinity());
  enumerate(chain.size(), chain.labels, [&](const std::vector<std::int32_t>& x) {
    const double e = chain.energy(x);
    for (std::size_t t = 0; t < chain.size(); ++t) m(t, x[t]) = std::min(m(t, x[t]), e);
  });
  return m;
}

inline dcm::ChainView random_chain(const dcm::PairwiseModel& model, std::size_t n,
                                   std::mt19937& rng, int max_cost = 9, int max_weight = 3) {
  dcm::ChainView c(model, n);
  std::uniform_int_distribution<int> uc(0, max_cost), uw(0, max_weight);
  for (auto& u : c.unary) u = uc(rng);
  for (auto& w : c.weights) w = uw(rng);
  return c;
}

/// argmin over [lo, hi] of a 1-D function: dense grid, then golden-section
/// refinement in the best cell's neighbourhood.
inline double grid_argmin(const std::function<double(double)>& f, double lo, double hi,
                          int samples = 20001) {
  if (hi <= lo) return lo;
  const double step = (hi - lo) / (samples - 1);
  double best_t = lo, best = f(lo);
  for (int i = 1; i < samples; ++i) {
    const double t = lo + i * step;
    const double v = f(t);
    if (v < best) {
      best = v;
      best_t = t;
    }
  }
  double a = std::max(lo, best_t - step), b = std::min(hi, best_t + step);
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int it = 0; it < 100; ++it) {
    const double c = b - g * (b - a), d = a + g * (b - a);
    if (f(c) <= f(d)) b = d; else a = c;
  }
  const double t = 0.5 * (a + b);
  return f(t) <= best ? t : best_t;
}

/// Numerical convex conjugate sup_t s*t - f(t) over |t| <= span.
inline double conjugate(const std::function<double(double)>& f, double s, double span,
                        int samples = 200001) {
  double best = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < samples; ++i) {
    const double t = -span + 2.0 * span * i / (samples - 1);
    best = std::max(best, s * t - f(t));
  }
  return best;
}

}  // namespace oracle
