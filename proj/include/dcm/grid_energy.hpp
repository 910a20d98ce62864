#pragma once

// Discretized matching energy on a 4-connected pixel grid:
//   E(x) = sum_i f_i(x_i) + sum_ij w_ij * r(u(x_i) - u(x_j))
// with r the truncated penalty below and u(.) the label -> value map.

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace dcm {

/// Truncated penalty r(t): slope `epsilon` on [0, delta], slope 1 up to the
/// value `trunc`, constant beyond. Even in t.
struct PenaltyParams {
  double epsilon = 0.25;
  double delta = 2.0;
  double trunc = 4.0;

  void validate() const;

  /// r sampled at integer label steps is the unit Potts model; scale it
  /// through the edge weight.
  static PenaltyParams potts() { return {1.0, 0.0, 1.0}; }
  /// min(|t|, c).
  static PenaltyParams truncated_linear(double c) { return {1.0, c, c}; }
};

double penalty_value(const PenaltyParams& params, double t);

struct Edge {
  std::int32_t i;  // left / top endpoint
  std::int32_t j;  // right / bottom endpoint
};

/// 4-neighborhood grid. Edge storage: all horizontal edges in raster order,
/// followed by all vertical edges in raster order.
struct GridGraph {
  int width = 0;
  int height = 0;
  std::vector<Edge> edges;
  std::vector<double> weights;

  std::size_t num_pixels() const { return static_cast<std::size_t>(width) * height; }
  std::size_t num_horizontal() const { return static_cast<std::size_t>(width - 1) * height; }
  /// Edge (x,y)-(x+1,y).
  std::size_t horizontal_edge(int x, int y) const {
    return static_cast<std::size_t>(y) * (width - 1) + x;
  }
  /// Edge (x,y)-(x,y+1).
  std::size_t vertical_edge(int x, int y) const {
    return num_horizontal() + static_cast<std::size_t>(y) * width + x;
  }
};

/// Unit-weight right/down neighborhood. Throws ArgumentError on zero size.
GridGraph build_grid_graph(int width, int height);

/// Per-pixel, per-label unary costs. costs[pixel * labels + k].
struct CostVolume {
  int width = 0;
  int height = 0;
  int labels = 0;
  std::vector<float> costs;
  std::vector<double> label_values;

  CostVolume() = default;
  /// Zero costs, label values 0..labels-1.
  CostVolume(int width, int height, int labels);

  std::size_t num_pixels() const { return static_cast<std::size_t>(width) * height; }
  float& at(std::size_t pixel, int label) { return costs[pixel * labels + label]; }
  float at(std::size_t pixel, int label) const { return costs[pixel * labels + label]; }
  std::span<const float> pixel_costs(std::size_t pixel) const {
    return {costs.data() + pixel * labels, static_cast<std::size_t>(labels)};
  }

  void validate() const;
};

/// One label index per pixel.
using Labeling = std::vector<std::int32_t>;

/// Unweighted pairwise table r(v[a] - v[b]) for one label set, plus the data
/// needed by the linear-time message recurrence when the labels are evenly
/// spaced and the knee falls on a label step.
class PairwiseModel {
 public:
  PairwiseModel(const PenaltyParams& params, std::vector<double> label_values);

  int labels() const { return labels_; }
  const PenaltyParams& params() const { return params_; }
  std::span<const double> label_values() const { return label_values_; }
  double cost(int a, int b) const { return table_[static_cast<std::size_t>(a) * labels_ + b]; }

  bool has_linear_envelope() const { return linear_envelope_; }
  /// Number of label steps covered by the shallow segment (delta / spacing).
  int knee_steps() const { return knee_steps_; }
  double spacing() const { return spacing_; }

 private:
  PenaltyParams params_;
  std::vector<double> label_values_;
  int labels_;
  std::vector<double> table_;
  bool linear_envelope_ = false;
  int knee_steps_ = 0;
  double spacing_ = 1.0;
};

double pairwise_cost(const PenaltyParams& params, double weight, int a, int b,
                     std::span<const double> label_values);

/// Exact energy, accumulated in double. Throws DimensionError on mismatch.
double energy_evaluate(const CostVolume& volume, const GridGraph& graph,
                       const PenaltyParams& params, const Labeling& x);

/// Same, with a prebuilt pairwise table.
double energy_evaluate(const CostVolume& volume, const GridGraph& graph,
                       const PairwiseModel& model, const Labeling& x);

/// Joint per-pixel table D_i(a, b) for two flow components.
/// table[(pixel * labels1 + a) * labels2 + b].
struct FlowCostVolume2D {
  int width = 0;
  int height = 0;
  int labels1 = 0;
  int labels2 = 0;
  std::vector<float> table;
  std::vector<double> label_values1;
  std::vector<double> label_values2;

  FlowCostVolume2D() = default;
  FlowCostVolume2D(int width, int height, int labels1, int labels2);

  std::size_t num_pixels() const { return static_cast<std::size_t>(width) * height; }
  float& at(std::size_t pixel, int a, int b) {
    return table[(pixel * labels1 + a) * labels2 + b];
  }
  float at(std::size_t pixel, int a, int b) const {
    return table[(pixel * labels1 + a) * labels2 + b];
  }
};

/// Optimistic per-component costs: row minima and column minima of D_i.
std::pair<CostVolume, CostVolume> decouple_flow_costs(const FlowCostVolume2D& volume);

}  // namespace dcm
