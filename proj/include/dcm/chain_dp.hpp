#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "dcm/grid_energy.hpp"

namespace dcm {

/// A chain subproblem: unaries (possibly reparametrized) on an ordered node
/// list, edge t joining node t and t+1 with cost weights[t] * model.cost(.,.).
/// The pairwise table is symmetric, so reversing a chain only reverses the
/// node, unary and weight order.
struct ChainView {
  std::vector<std::int32_t> nodes;
  int labels = 0;
  std::vector<double> unary;    // size() * labels
  std::vector<double> weights;  // size() - 1
  const PairwiseModel* model = nullptr;

  ChainView() = default;
  ChainView(const PairwiseModel& model, std::size_t length);

  std::size_t size() const { return nodes.size(); }
  std::span<double> unary_at(std::size_t t) {
    return {unary.data() + t * labels, static_cast<std::size_t>(labels)};
  }
  std::span<const double> unary_at(std::size_t t) const {
    return {unary.data() + t * labels, static_cast<std::size_t>(labels)};
  }
  double pairwise(std::size_t edge, int a, int b) const {
    return weights[edge] * model->cost(a, b);
  }

  /// Energy of a labeling given as one label per chain position.
  double energy(std::span<const std::int32_t> x) const;
  ChainView reversed() const;
  void validate() const;
};

/// Row-major per-node, per-label table over a chain.
struct NodeTable {
  std::size_t nodes = 0;
  int labels = 0;
  std::vector<double> values;

  NodeTable() = default;
  NodeTable(std::size_t n, int k, double fill = 0.0)
      : nodes(n), labels(k), values(n * static_cast<std::size_t>(k), fill) {}

  double& operator()(std::size_t t, int k) { return values[t * labels + k]; }
  double operator()(std::size_t t, int k) const { return values[t * labels + k]; }
  std::span<double> row(std::size_t t) {
    return {values.data() + t * labels, static_cast<std::size_t>(labels)};
  }
  std::span<const double> row(std::size_t t) const {
    return {values.data() + t * labels, static_cast<std::size_t>(labels)};
  }
};

using MinMarginals = NodeTable;

/// left(t) = message into t from t-1, right(t) = message into t from t+1.
/// Boundary messages are zero.
struct MessageField {
  NodeTable left;
  NodeTable right;
};

/// out(b) = min_a [source(a) + weight * model.cost(a, b)].
/// Linear-time lower envelope when the model allows it, dense otherwise.
void pass_message(std::span<const double> source, const PairwiseModel& model, double weight,
                  std::span<double> out);
std::vector<double> pass_message(std::span<const double> source, const PairwiseModel& model,
                                 double weight);
/// The O(K^2) reference recurrence.
void pass_message_dense(std::span<const double> source, const PairwiseModel& model,
                        double weight, std::span<double> out);

MessageField compute_messages(const ChainView& chain);
MinMarginals min_marginals(const ChainView& chain);
MinMarginals min_marginals(const ChainView& chain, const MessageField& messages);

/// Per-node subtraction of the minimum; for display and comparisons only.
NodeTable normalized(const NodeTable& table);

/// Minimizing labeling (per chain position) and its value. Among optimal
/// labelings the lexicographically smallest one is returned.
std::pair<std::vector<std::int32_t>, double> chain_argmin(const ChainView& chain);

/// Exhaustive grid minimization; K^pixels must not exceed 1e7.
std::pair<Labeling, double> brute_force_min(const CostVolume& volume, const GridGraph& graph,
                                            const PenaltyParams& params);

/// Exhaustive chain minimization, same capacity rule.
std::pair<std::vector<std::int32_t>, double> brute_force_chain_min(const ChainView& chain);

}  // namespace dcm
