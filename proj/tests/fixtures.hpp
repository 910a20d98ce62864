#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "dcm/chain_dp.hpp"
#include "dcm/grid_energy.hpp"

namespace fixture {

// 3 labels x 6 nodes; row = label, column = node.
inline const double kSixNode[3][6] = {
    {0, 0, 1, 0, 0, 8}, {9, 7, 0, 3, 2, 8}, {7, 3, 6, 9, 1, 0}};

inline const dcm::PairwiseModel& unit_potts3() {
  static const dcm::PairwiseModel model(dcm::PenaltyParams::potts(), {0, 1, 2});
  return model;
}

/// The 6-node chain with Potts cost `cost` on every edge.
inline dcm::ChainView six_node_chain(double cost) {
  dcm::ChainView c(unit_potts3(), 6);
  for (int t = 0; t < 6; ++t) {
    for (int k = 0; k < 3; ++k) c.unary_at(t)[k] = kSixNode[k][t];
  }
  for (auto& w : c.weights) w = cost;
  return c;
}

/// Largest |got - want| with `want` given label-major (3 x 6) as displayed.
inline double table_diff(const dcm::NodeTable& got, const double (&want)[3][6]) {
  if (got.nodes != 6 || got.labels != 3) return std::numeric_limits<double>::infinity();
  double worst = 0.0;
  for (int k = 0; k < 3; ++k) {
    for (int t = 0; t < 6; ++t) worst = std::max(worst, std::abs(got(t, k) - want[k][t]));
  }
  return worst;
}

}  // namespace fixture
