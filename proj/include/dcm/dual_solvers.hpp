#pragma once

// Grid solvers over the horizontal / vertical chain decomposition
//   E(x) = f(x) + g(x),
// f = all unaries + horizontal pairwise terms, g = vertical pairwise terms.
// The dual point lambda reparametrizes the two slaves as f + lambda and
// g - lambda; the dual bound is min(f + lambda) + min(g - lambda).

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "dcm/chain_dp.hpp"
#include "dcm/grid_energy.hpp"
#include "dcm/minorants.hpp"

namespace dcm {

struct DiscreteProblem {
  CostVolume volume;
  GridGraph graph;
  PenaltyParams penalty;
  PairwiseModel model;

  DiscreteProblem(CostVolume volume, GridGraph graph, PenaltyParams penalty);

  std::size_t num_pixels() const { return volume.num_pixels(); }
  int labels() const { return volume.labels; }
  double energy(const Labeling& x) const { return energy_evaluate(volume, graph, model, x); }

  /// Row y as a chain of f + lambda (lambda may be empty for zero).
  ChainView row_chain(int y, const std::vector<double>& lambda) const;
  /// Column x as a chain of g - lambda.
  ChainView column_chain(int x, const std::vector<double>& lambda) const;
};

enum class Orientation { horizontal, vertical };

struct DualState {
  std::vector<double> lambda;  // pixels * labels
  Orientation next = Orientation::horizontal;
  int iteration = 0;
  Labeling last_primal;  // horizontal-chain argmin of the latest phase
  Labeling best_labeling;
  double best_energy = std::numeric_limits<double>::infinity();
  std::vector<double> bound_history;

  // TRW-S messages, pixels * labels each; empty until the first sweep.
  std::vector<double> h_left, h_right, v_up, v_down;

  explicit DualState(const DiscreteProblem& problem);
  void offer(const DiscreteProblem& problem, const Labeling& x);
};

/// min_x (f + lambda)(x) + min_x (g - lambda)(x), by chain DP.
double dual_bound(const DualState& state, const DiscreteProblem& problem);

/// One DMM phase for `state.next`: minimize the active chains, replace
/// their slave by a modular minorant exact at the argmin, hand the
/// remainder to the other orientation. Chains are independent.
void dmm_iterate(DualState& state, const DiscreteProblem& problem,
                 const MinorantOptions& minorant);

/// One TRW-S scanline sweep (raster order when forward, reverse otherwise),
/// balancing the two min-marginals at every pixel in turn.
void trws_iterate(DualState& state, const DiscreteProblem& problem, bool forward);

/// One Primal_MM iteration: majorize the vertical terms at x and minimize
/// along rows, then majorize the horizontal terms and minimize along
/// columns. Energy never increases.
Labeling pmm_iterate(const Labeling& x, const DiscreteProblem& problem);

/// Per-pixel modular majorant of one orientation's pairwise terms, exact at x.
std::vector<double> pairwise_majorant(const DiscreteProblem& problem, const Labeling& x,
                                      Orientation orientation);

/// Horizontal-chain argmin of f + lambda.
Labeling round_primal(const DualState& state, const DiscreteProblem& problem);

enum class SolverKind { dmm, trws, pmm };

struct SolverConfig {
  SolverKind kind = SolverKind::dmm;
  int iterations = 4;
  MinorantOptions minorant;
  /// Stop early when the bound changes by less than this (relative); 0 = off.
  double stop_tolerance = 0.0;

  void validate() const;
};

struct IterationRecord {
  int iteration = 0;
  double lower_bound = std::numeric_limits<double>::quiet_NaN();
  double primal_energy = 0.0;
  double millis = 0.0;
};

struct SolveResult {
  Labeling labeling;  // best primal found
  std::vector<double> bound_history;
  std::vector<double> energy_history;
  std::vector<IterationRecord> records;
};

SolveResult solve(const DiscreteProblem& problem, const SolverConfig& config);

/// Short solver name used in convergence logs, e.g. "dmm-hierarchical".
std::string solver_label(const SolverConfig& config);

}  // namespace dcm
