#include <gtest/gtest.h>

#include <random>

#include "dcm/chain_dp.hpp"
#include "dcm/errors.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace dcm;

namespace {

std::vector<double> dense(std::span<const double> src, const PairwiseModel& m, double w) {
  std::vector<double> out(m.labels());
  for (int b = 0; b < m.labels(); ++b) {
    out[b] = std::numeric_limits<double>::infinity();
    for (int a = 0; a < m.labels(); ++a) out[b] = std::min(out[b], src[a] + w * m.cost(a, b));
  }
  return out;
}

}  // namespace

TEST(Message, ZeroWeight) {
  const PairwiseModel m(PenaltyParams{0.25, 2, 4}, {0, 1, 2, 3});
  const auto out = pass_message(std::vector<double>{3, 1, 4, 1.5}, m, 0.0);
  for (double v : out) EXPECT_EQ(v, 1.0);
}

TEST(Message, PottsSmall) {
  const PairwiseModel m(PenaltyParams::potts(), {0, 1, 2});
  for (double w : {0.5, 3.0, 5.0, 9.0}) {
    const auto out = pass_message(std::vector<double>{0, 5, 5}, m, w);
    EXPECT_EQ(out[0], 0.0);
    EXPECT_EQ(out[1], std::min(5.0, w));
    EXPECT_EQ(out[2], std::min(5.0, w));
  }
}

TEST(Message, TruncatedLinearSmall) {
  const PairwiseModel m(PenaltyParams::truncated_linear(2.0), {0, 1, 2, 3});
  const auto out = pass_message(std::vector<double>{0, 10, 10, 10}, m, 1.0);
  EXPECT_EQ(out, (std::vector<double>{0, 1, 2, 2}));
}

TEST(Message, FastPathMatchesDenseOnRandomEdges) {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(-10, 10), w(0, 4);
  std::uniform_int_distribution<int> kd(1, 12), dd(0, 4);
  std::uniform_real_distribution<double> eps(0, 1), extra(0, 6);
  int fast = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int k = kd(rng);
    const double spacing = (trial % 3 == 0) ? 0.5 : 1.0;
    std::vector<double> lv(k);
    for (int i = 0; i < k; ++i) lv[i] = 2.0 + spacing * i;
    PenaltyParams p;
    p.epsilon = (trial % 4 == 0) ? 1.0 : eps(rng);
    p.delta = spacing * dd(rng);
    p.trunc = p.epsilon * p.delta + extra(rng);
    const PairwiseModel m(p, lv);
    fast += m.has_linear_envelope();
    std::vector<double> src(k);
    for (auto& s : src) s = u(rng);
    const double weight = w(rng);
    const auto got = pass_message(src, m, weight);
    const auto want = dense(src, m, weight);
    for (int b = 0; b < k; ++b) EXPECT_NEAR(got[b], want[b], 1e-9);
  }
  EXPECT_GT(fast, 900);
}

TEST(MinMarginals, SingleNode) {
  const PairwiseModel m(PenaltyParams{}, {0, 1, 2});
  ChainView c(m, 1);
  c.unary = {4, 2, 7};
  const auto mm = min_marginals(c);
  EXPECT_EQ(mm.values, c.unary);
}

TEST(MinMarginals, SixNodeStrongPotts) {
  const double want[3][6] = {{0, 0, 0, 0, 0, 3}, {14, 15, 8, 8, 7, 8}, {12, 13, 15, 10, 1, 0}};
  EXPECT_EQ(fixture::table_diff(normalized(min_marginals(fixture::six_node_chain(5.0))), want),
            0.0);
}

TEST(MinMarginals, SixNodeUnitPottsMatchesEnumeration) {
  const ChainView c = fixture::six_node_chain(1.0);
  const auto mm = min_marginals(c);
  const auto ref = oracle::chain_min_marginals(c);
  EXPECT_EQ(mm.values, ref.values);
  const auto [x, value] = chain_argmin(c);
  double node0 = *std::min_element(mm.row(0).begin(), mm.row(0).end());
  EXPECT_EQ(value, node0);
  EXPECT_EQ(c.energy(x), value);
}

TEST(MinMarginals, RandomChainsMatchEnumeration) {
  std::mt19937 rng(5);
  const PairwiseModel tl(PenaltyParams{0.25, 2, 4}, {0, 1, 2, 3});
  const PairwiseModel potts(PenaltyParams::potts(), {0, 1, 2});
  for (int trial = 0; trial < 40; ++trial) {
    const PairwiseModel& m = trial % 2 ? tl : potts;
    const ChainView c = oracle::random_chain(m, 6, rng);
    const auto mm = min_marginals(c);
    const auto ref = oracle::chain_min_marginals(c);
    for (std::size_t i = 0; i < ref.values.size(); ++i) EXPECT_NEAR(mm.values[i], ref.values[i], 1e-9);
    const auto [x, value] = chain_argmin(c);
    for (std::size_t t = 0; t < c.size(); ++t) {
      EXPECT_NEAR(*std::min_element(mm.row(t).begin(), mm.row(t).end()), value, 1e-9);
    }
  }
}

TEST(Messages, ReversalSwapsFields) {
  std::mt19937 rng(9);
  const PairwiseModel m(PenaltyParams{0.5, 1, 3}, {0, 1, 2, 3, 4});
  const ChainView c = oracle::random_chain(m, 7, rng);
  const auto fwd = compute_messages(c);
  const auto rev = compute_messages(c.reversed());
  const std::size_t n = c.size();
  for (std::size_t t = 0; t < n; ++t) {
    for (int k = 0; k < 5; ++k) {
      EXPECT_EQ(fwd.left(t, k), rev.right(n - 1 - t, k));
      EXPECT_EQ(fwd.right(t, k), rev.left(n - 1 - t, k));
    }
  }
  for (int k = 0; k < 5; ++k) {
    EXPECT_EQ(fwd.left(0, k), 0.0);
    EXPECT_EQ(fwd.right(n - 1, k), 0.0);
  }
}

TEST(Argmin, ZeroCostsAndTies) {
  const PairwiseModel m(PenaltyParams::potts(), {0, 1});
  ChainView c(m, 4);
  auto [x, v] = chain_argmin(c);
  EXPECT_EQ(v, 0.0);
  EXPECT_EQ(x, (std::vector<std::int32_t>{0, 0, 0, 0}));

  // two symmetric optima: all-0 and all-1
  c.unary = {1, 0, 0, 0, 0, 0, 0, 1};
  for (auto& w : c.weights) w = 5;
  std::tie(x, v) = chain_argmin(c);
  EXPECT_EQ(v, 1.0);
  EXPECT_EQ(x, (std::vector<std::int32_t>{0, 0, 0, 0}));
}

TEST(Argmin, MatchesBruteForceOnSmallChains) {
  std::mt19937 rng(21);
  std::uniform_int_distribution<int> nd(1, 8), kd(1, 4);
  for (int trial = 0; trial < 100; ++trial) {
    const int k = kd(rng);
    std::vector<double> lv(k);
    for (int i = 0; i < k; ++i) lv[i] = i;
    const PairwiseModel m(trial % 2 ? PenaltyParams{0.25, 1, 2} : PenaltyParams::potts(), lv);
    const ChainView c = oracle::random_chain(m, nd(rng), rng);
    const auto [x, v] = chain_argmin(c);
    const auto [bx, bv] = brute_force_chain_min(c);
    EXPECT_EQ(v, bv);
    EXPECT_EQ(c.energy(x), v);
  }
}

TEST(BruteForce, GridBasics) {
  CostVolume one(1, 1, 3);
  one.costs = {2, 0.5f, 1};
  auto [x, v] = brute_force_min(one, build_grid_graph(1, 1), PenaltyParams{});
  EXPECT_EQ(x, Labeling{1});
  EXPECT_EQ(v, 0.5);

  CostVolume flat(2, 2, 3);
  std::tie(x, v) = brute_force_min(flat, build_grid_graph(2, 2), PenaltyParams::potts());
  EXPECT_EQ(v, 0.0);
  EXPECT_TRUE(std::all_of(x.begin(), x.end(), [&](int l) { return l == x[0]; }));

  EXPECT_THROW(brute_force_min(CostVolume(5, 5, 4), build_grid_graph(5, 5), PenaltyParams{}),
               CapacityError);
}

TEST(BruteForce, AgreesWithFrontierDp) {
  std::mt19937 rng(4);
  const PenaltyParams p{0.25, 1, 2};
  for (int trial = 0; trial < 5; ++trial) {
    const CostVolume v = oracle::random_volume(3, 3, 3, rng);
    const GridGraph g = oracle::random_weights(build_grid_graph(3, 3), rng);
    const auto [x, e] = brute_force_min(v, g, p);
    EXPECT_NEAR(e, oracle::grid_exact_min(v, g, p), 1e-9);
    EXPECT_NEAR(e, energy_evaluate(v, g, p, x), 1e-12);
  }
}
