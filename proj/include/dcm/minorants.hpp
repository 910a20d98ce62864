#pragma once

// Modular minorants of chain energies. A minorant lambda of a chain f
// satisfies sum_t lambda_t(x_t) <= f(x) for every labeling x; it is maximal
// when every min-marginal of f - lambda vanishes.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "dcm/chain_dp.hpp"

namespace dcm {

using Minorant = NodeTable;

/// Per node, per label flag: label belongs to some optimal labeling.
struct SupportSet {
  std::size_t nodes = 0;
  int labels = 0;
  std::vector<char> member;

  SupportSet() = default;
  SupportSet(std::size_t n, int k) : nodes(n), labels(k), member(n * k, 0) {}
  bool operator()(std::size_t t, int k) const { return member[t * labels + k] != 0; }
  void set(std::size_t t, int k, bool v) { member[t * labels + k] = v ? 1 : 0; }
  std::size_t count() const;
};

enum class MinorantKind { naive, uniform, iterative, hierarchical, unary_only };

const char* to_string(MinorantKind kind);
MinorantKind minorant_kind_from_string(const std::string& name);

struct MinorantOptions {
  MinorantKind kind = MinorantKind::hierarchical;
  double tol = 1e-9;                            // support-set tolerance (uniform)
  std::vector<double> gammas{0.25, 0.25, 1.0};  // per pass (iterative)
  int leaf_size = 2;                            // hierarchical
};

/// lambda = m / n with m the min-marginals of the chain.
Minorant naive_minorant(const ChainView& chain);

/// The unary term alone. Maximal for nonnegative pairwise costs with zero
/// diagonal, but does not redistribute anything along the chain.
Minorant unary_minorant(const ChainView& chain);

/// Per-round record of the uniform construction.
struct UniformTrace {
  std::vector<double> epsilons;
  std::vector<Minorant> increments;
  std::vector<std::size_t> support_sizes;  // |O| at each round, then at exit
};

/// Support set of a residual chain: labels whose min-marginal is within
/// tol * (1 + |optimum|) of the node minimum.
SupportSet support_set(const MinMarginals& m, double tol);

/// Largest eps with eps * <1-O, x> <= residual(x) for all x, by Dinkelbach
/// iteration on chain DP. `residual` must have optimum ~0.
double min_ratio_step(const ChainView& residual, const SupportSet& support,
                      double tol = 1e-12);

/// Maximal uniform minorant. Throws ConvergenceError if the support set
/// stops growing before all residual min-marginals vanish.
Minorant uniform_minorant(const ChainView& chain, double tol = 1e-9,
                          UniformTrace* trace = nullptr);

/// Alternating forward/backward draining of gammas[s] of the residual
/// min-marginal at each node. The last pass always drains fully.
Minorant iterative_minorant(const ChainView& chain, std::span<const double> gammas);

struct HandshakeResult {
  std::vector<double> to_left;   // message into i (after the bounce)
  std::vector<double> to_right;  // message into j
};

/// Splits a chain at edge (i, j). `left_in` is the message into i from the
/// nodes before it, `right_in` the message into j from the nodes after it.
HandshakeResult handshake(std::span<const double> unary_i, std::span<const double> unary_j,
                          const PairwiseModel& model, double weight,
                          std::span<const double> left_in, std::span<const double> right_in);

/// Message schedule of one hierarchical construction, rendered per level
/// with '>' / '<' for recomputed messages, '.' for reused ones and brackets
/// around decoupled pieces.
struct HierarchyTrace {
  std::vector<std::string> levels;
  std::vector<std::size_t> messages_per_level;
  std::size_t handshakes = 0;
};

Minorant hierarchical_minorant(const ChainView& chain, int leaf_size = 2,
                               HierarchyTrace* trace = nullptr);

Minorant build_minorant(const ChainView& chain, const MinorantOptions& options);

struct MinorantReport {
  bool is_minorant = false;
  bool is_maximal = false;
  double max_violation = 0.0;  // max_x lambda(x) - f(x), clipped at 0
  double max_residual = 0.0;   // max |min-marginal of f - lambda|
};

/// The exhaustive minorant check needs K^n <= 1e7 (CapacityError otherwise);
/// pass exhaustive = false to check maximality only.
MinorantReport verify_minorant(const ChainView& chain, const Minorant& lambda,
                               double tol = 1e-6, bool exhaustive = true);

/// chain with unaries replaced by unary - lambda.
ChainView residual_chain(const ChainView& chain, const Minorant& lambda);

}  // namespace dcm
