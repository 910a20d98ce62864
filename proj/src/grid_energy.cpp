#include "dcm/grid_energy.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dcm/errors.hpp"

namespace dcm {

void PenaltyParams::validate() const {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) {
    throw ArgumentError("penalty epsilon must lie in [0, 1], got " + std::to_string(epsilon));
  }
  if (!(delta >= 0.0)) throw ArgumentError("penalty delta must be >= 0");
  if (!(trunc >= delta * epsilon)) {
    throw ArgumentError("penalty truncation must be >= delta * epsilon");
  }
}

double penalty_value(const PenaltyParams& params, double t) {
  const double a = std::abs(t);
  if (a <= params.delta) return params.epsilon * a;
  return std::min(params.trunc, params.epsilon * params.delta + (a - params.delta));
}

GridGraph build_grid_graph(int width, int height) {
  if (width < 1 || height < 1) {
    throw ArgumentError("grid dimensions must be >= 1, got " + std::to_string(width) + "x" +
                        std::to_string(height));
  }
  GridGraph g;
  g.width = width;
  g.height = height;
  g.edges.reserve(static_cast<std::size_t>(width - 1) * height +
                  static_cast<std::size_t>(height - 1) * width);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x + 1 < width; ++x) {
      const int i = y * width + x;
      g.edges.push_back({i, i + 1});
    }
  }
  for (int y = 0; y + 1 < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const int i = y * width + x;
      g.edges.push_back({i, i + width});
    }
  }
  g.weights.assign(g.edges.size(), 1.0);
  return g;
}

CostVolume::CostVolume(int w, int h, int k)
    : width(w), height(h), labels(k), costs(static_cast<std::size_t>(w) * h * k, 0.0f) {
  if (w < 1 || h < 1 || k < 1) throw ArgumentError("cost volume dimensions must be >= 1");
  label_values.resize(k);
  for (int i = 0; i < k; ++i) label_values[i] = i;
}

void CostVolume::validate() const {
  if (labels < 1) throw DimensionError("cost volume needs at least one label");
  if (costs.size() != num_pixels() * labels) throw DimensionError("cost volume size mismatch");
  if (label_values.size() != static_cast<std::size_t>(labels)) {
    throw DimensionError("label_values size differs from label count");
  }
  for (int k = 1; k < labels; ++k) {
    if (!(label_values[k] > label_values[k - 1])) {
      throw ArgumentError("label_values must be strictly increasing");
    }
  }
  for (float c : costs) {
    if (!std::isfinite(c)) throw ArgumentError("cost volume contains a non-finite cost");
  }
}

PairwiseModel::PairwiseModel(const PenaltyParams& params, std::vector<double> label_values)
    : params_(params),
      label_values_(std::move(label_values)),
      labels_(static_cast<int>(label_values_.size())) {
  params_.validate();
  if (labels_ < 1) throw ArgumentError("pairwise model needs at least one label");
  table_.resize(static_cast<std::size_t>(labels_) * labels_);
  for (int a = 0; a < labels_; ++a) {
    for (int b = 0; b < labels_; ++b) {
      table_[static_cast<std::size_t>(a) * labels_ + b] =
          penalty_value(params_, label_values_[a] - label_values_[b]);
    }
  }

  if (labels_ == 1) {
    linear_envelope_ = true;
    return;
  }
  spacing_ = label_values_[1] - label_values_[0];
  bool even = spacing_ > 0.0;
  for (int k = 2; k < labels_ && even; ++k) {
    const double step = label_values_[k] - label_values_[k - 1];
    even = std::abs(step - spacing_) <= 1e-12 * std::max(1.0, std::abs(spacing_));
  }
  if (!even) return;
  if (params_.epsilon == 1.0) {
    // No shallow segment: r = min(|t|, trunc) regardless of delta.
    knee_steps_ = 0;
    linear_envelope_ = true;
    return;
  }
  const double steps = params_.delta / spacing_;
  const double rounded = std::round(steps);
  if (std::abs(steps - rounded) <= 1e-9) {
    knee_steps_ = static_cast<int>(rounded);
    linear_envelope_ = true;
  }
}

double pairwise_cost(const PenaltyParams& params, double weight, int a, int b,
                     std::span<const double> label_values) {
  return weight * penalty_value(params, label_values[a] - label_values[b]);
}

namespace {

void check_shapes(const CostVolume& volume, const GridGraph& graph, const Labeling& x) {
  if (volume.width != graph.width || volume.height != graph.height) {
    throw DimensionError("cost volume and graph sizes differ");
  }
  if (x.size() != volume.num_pixels()) throw DimensionError("labeling size differs from pixels");
  if (graph.weights.size() != graph.edges.size()) {
    throw DimensionError("graph weights and edges differ in count");
  }
  for (auto label : x) {
    if (label < 0 || label >= volume.labels) throw DimensionError("label index out of range");
  }
}

}  // namespace

double energy_evaluate(const CostVolume& volume, const GridGraph& graph,
                       const PairwiseModel& model, const Labeling& x) {
  check_shapes(volume, graph, x);
  double unary = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) unary += volume.at(i, x[i]);
  double pairwise = 0.0;
  for (std::size_t e = 0; e < graph.edges.size(); ++e) {
    const Edge& edge = graph.edges[e];
    pairwise += graph.weights[e] * model.cost(x[edge.i], x[edge.j]);
  }
  return unary + pairwise;
}

double energy_evaluate(const CostVolume& volume, const GridGraph& graph,
                       const PenaltyParams& params, const Labeling& x) {
  return energy_evaluate(volume, graph, PairwiseModel(params, volume.label_values), x);
}

FlowCostVolume2D::FlowCostVolume2D(int w, int h, int k1, int k2)
    : width(w),
      height(h),
      labels1(k1),
      labels2(k2),
      table(static_cast<std::size_t>(w) * h * k1 * k2, 0.0f) {
  if (w < 1 || h < 1 || k1 < 1 || k2 < 1) {
    throw ArgumentError("flow cost volume dimensions must be >= 1");
  }
  label_values1.resize(k1);
  label_values2.resize(k2);
  for (int i = 0; i < k1; ++i) label_values1[i] = i;
  for (int i = 0; i < k2; ++i) label_values2[i] = i;
}

std::pair<CostVolume, CostVolume> decouple_flow_costs(const FlowCostVolume2D& volume) {
  CostVolume first(volume.width, volume.height, volume.labels1);
  CostVolume second(volume.width, volume.height, volume.labels2);
  first.label_values = volume.label_values1;
  second.label_values = volume.label_values2;
  for (std::size_t p = 0; p < volume.num_pixels(); ++p) {
    for (int a = 0; a < volume.labels1; ++a) first.at(p, a) = volume.at(p, a, 0);
    for (int b = 0; b < volume.labels2; ++b) second.at(p, b) = volume.at(p, 0, b);
    for (int a = 0; a < volume.labels1; ++a) {
      for (int b = 0; b < volume.labels2; ++b) {
        const float d = volume.at(p, a, b);
        first.at(p, a) = std::min(first.at(p, a), d);
        second.at(p, b) = std::min(second.at(p, b), d);
      }
    }
  }
  return {std::move(first), std::move(second)};
}

}  // namespace dcm
