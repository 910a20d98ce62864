#include "dcm/chain_dp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dcm/errors.hpp"

namespace dcm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMaxEnumeration = 1e7;

// g(b) = min_{|a-b| <= window} src(a) + slope * |a-b|, via monotone deques on
// src(a) -+ slope*a.
void windowed_linear_envelope(std::span<const double> src, double slope, int window,
                              std::span<double> out, std::vector<int>& deque) {
  const int k = static_cast<int>(src.size());
  deque.resize(k);
  int head = 0, tail = 0;
  for (int b = 0; b < k; ++b) {
    const double vb = src[b] - slope * b;
    while (tail > head && src[deque[tail - 1]] - slope * deque[tail - 1] >= vb) --tail;
    deque[tail++] = b;
    while (deque[head] < b - window) ++head;
    out[b] = src[deque[head]] - slope * deque[head] + slope * b;
  }
  head = tail = 0;
  for (int b = k - 1; b >= 0; --b) {
    const double vb = src[b] + slope * b;
    while (tail > head && src[deque[tail - 1]] + slope * deque[tail - 1] >= vb) --tail;
    deque[tail++] = b;
    while (deque[head] > b + window) ++head;
    out[b] = std::min(out[b], src[deque[head]] + slope * deque[head] - slope * b);
  }
}

}  // namespace

ChainView::ChainView(const PairwiseModel& m, std::size_t length)
    : nodes(length),
      labels(m.labels()),
      unary(length * static_cast<std::size_t>(m.labels()), 0.0),
      weights(length > 0 ? length - 1 : 0, 1.0),
      model(&m) {
  for (std::size_t t = 0; t < length; ++t) nodes[t] = static_cast<std::int32_t>(t);
}

double ChainView::energy(std::span<const std::int32_t> x) const {
  if (x.size() != size()) throw DimensionError("labeling length differs from chain length");
  double e = 0.0;
  for (std::size_t t = 0; t < size(); ++t) e += unary_at(t)[x[t]];
  for (std::size_t t = 0; t + 1 < size(); ++t) e += pairwise(t, x[t], x[t + 1]);
  return e;
}

ChainView ChainView::reversed() const {
  ChainView r = *this;
  std::reverse(r.nodes.begin(), r.nodes.end());
  std::reverse(r.weights.begin(), r.weights.end());
  const std::size_t n = size();
  for (std::size_t t = 0; t < n; ++t) {
    std::copy(unary_at(n - 1 - t).begin(), unary_at(n - 1 - t).end(), r.unary_at(t).begin());
  }
  return r;
}

void ChainView::validate() const {
  if (model == nullptr) throw ArgumentError("chain has no pairwise model");
  if (size() < 1) throw ArgumentError("chain must have at least one node");
  if (labels != model->labels()) throw DimensionError("chain label count differs from model");
  if (unary.size() != size() * labels) throw DimensionError("chain unary size mismatch");
  if (weights.size() != size() - 1) throw DimensionError("chain weight count mismatch");
}

void pass_message_dense(std::span<const double> source, const PairwiseModel& model,
                        double weight, std::span<double> out) {
  const int k = model.labels();
  for (int b = 0; b < k; ++b) {
    double best = kInf;
    for (int a = 0; a < k; ++a) best = std::min(best, source[a] + weight * model.cost(a, b));
    out[b] = best;
  }
}

void pass_message(std::span<const double> source, const PairwiseModel& model, double weight,
                  std::span<double> out) {
  const int k = model.labels();
  if (!model.has_linear_envelope()) {
    pass_message_dense(source, model, weight, out);
    return;
  }
  const double floor = *std::min_element(source.begin(), source.end());
  if (weight == 0.0 || k == 1) {
    std::fill(out.begin(), out.begin() + k, floor);
    return;
  }
  const PenaltyParams& p = model.params();
  const double step = weight * model.spacing();
  const int knee = model.knee_steps();

  // r = (shallow segment restricted to the knee) inf-convolved with |t|,
  // then capped at trunc.
  if (knee > 0) {
    thread_local std::vector<int> deque;
    windowed_linear_envelope(source, step * p.epsilon, knee, out, deque);
  } else {
    std::copy(source.begin(), source.end(), out.begin());
  }
  for (int b = 1; b < k; ++b) out[b] = std::min(out[b], out[b - 1] + step);
  for (int b = k - 2; b >= 0; --b) out[b] = std::min(out[b], out[b + 1] + step);
  const double cap = floor + weight * p.trunc;
  for (int b = 0; b < k; ++b) out[b] = std::min(out[b], cap);
}

std::vector<double> pass_message(std::span<const double> source, const PairwiseModel& model,
                                 double weight) {
  std::vector<double> out(model.labels());
  pass_message(source, model, weight, out);
  return out;
}

MessageField compute_messages(const ChainView& chain) {
  chain.validate();
  const std::size_t n = chain.size();
  const int k = chain.labels;
  MessageField msg{NodeTable(n, k), NodeTable(n, k)};
  std::vector<double> buf(k);
  for (std::size_t t = 1; t < n; ++t) {
    for (int a = 0; a < k; ++a) buf[a] = msg.left(t - 1, a) + chain.unary_at(t - 1)[a];
    pass_message(buf, *chain.model, chain.weights[t - 1], msg.left.row(t));
  }
  for (std::size_t t = n - 1; t-- > 0;) {
    for (int a = 0; a < k; ++a) buf[a] = msg.right(t + 1, a) + chain.unary_at(t + 1)[a];
    pass_message(buf, *chain.model, chain.weights[t], msg.right.row(t));
  }
  return msg;
}

MinMarginals min_marginals(const ChainView& chain, const MessageField& messages) {
  const std::size_t n = chain.size();
  const int k = chain.labels;
  MinMarginals m(n, k);
  for (std::size_t t = 0; t < n; ++t) {
    for (int a = 0; a < k; ++a) {
      m(t, a) = chain.unary_at(t)[a] + messages.left(t, a) + messages.right(t, a);
    }
  }
  return m;
}

MinMarginals min_marginals(const ChainView& chain) {
  return min_marginals(chain, compute_messages(chain));
}

NodeTable normalized(const NodeTable& table) {
  NodeTable out = table;
  for (std::size_t t = 0; t < table.nodes; ++t) {
    auto row = out.row(t);
    const double lo = *std::min_element(row.begin(), row.end());
    for (double& v : row) v -= lo;
  }
  return out;
}

std::pair<std::vector<std::int32_t>, double> chain_argmin(const ChainView& chain) {
  chain.validate();
  const std::size_t n = chain.size();
  const int k = chain.labels;
  // Only right messages are needed: greedy forward selection against the
  // exact cost-to-go picks the smallest label among ties at every node.
  NodeTable right(n, k);
  std::vector<double> buf(k);
  for (std::size_t t = n - 1; t-- > 0;) {
    for (int a = 0; a < k; ++a) buf[a] = right(t + 1, a) + chain.unary_at(t + 1)[a];
    pass_message(buf, *chain.model, chain.weights[t], right.row(t));
  }
  std::vector<std::int32_t> x(n);
  double best = kInf;
  for (int a = 0; a < k; ++a) {
    const double v = chain.unary_at(0)[a] + right(0, a);
    if (v < best) {
      best = v;
      x[0] = a;
    }
  }
  for (std::size_t t = 1; t < n; ++t) {
    double local = kInf;
    for (int b = 0; b < k; ++b) {
      const double v = chain.pairwise(t - 1, x[t - 1], b) + chain.unary_at(t)[b] + right(t, b);
      if (v < local) {
        local = v;
        x[t] = b;
      }
    }
  }
  return {std::move(x), best};
}

namespace {

void check_enumeration(int labels, std::size_t variables) {
  const double states = std::pow(static_cast<double>(labels), static_cast<double>(variables));
  if (states > kMaxEnumeration) {
    throw CapacityError("exhaustive enumeration of " + std::to_string(labels) + "^" +
                        std::to_string(variables) + " labelings exceeds 1e7");
  }
}

// Advances an odometer; returns false after the last labeling.
bool next_labeling(std::span<std::int32_t> x, int labels) {
  for (auto& v : x) {
    if (++v < labels) return true;
    v = 0;
  }
  return false;
}

}  // namespace

std::pair<Labeling, double> brute_force_min(const CostVolume& volume, const GridGraph& graph,
                                            const PenaltyParams& params) {
  volume.validate();
  check_enumeration(volume.labels, volume.num_pixels());
  const PairwiseModel model(params, volume.label_values);
  Labeling x(volume.num_pixels(), 0);
  Labeling best_x = x;
  double best = kInf;
  do {
    const double e = energy_evaluate(volume, graph, model, x);
    if (e < best) {
      best = e;
      best_x = x;
    }
  } while (next_labeling(x, volume.labels));
  return {std::move(best_x), best};
}

std::pair<std::vector<std::int32_t>, double> brute_force_chain_min(const ChainView& chain) {
  chain.validate();
  check_enumeration(chain.labels, chain.size());
  std::vector<std::int32_t> x(chain.size(), 0);
  std::vector<std::int32_t> best_x = x;
  double best = kInf;
  do {
    const double e = chain.energy(x);
    if (e < best) {
      best = e;
      best_x = x;
    }
  } while (next_labeling(x, chain.labels));
  return {std::move(best_x), best};
}

}  // namespace dcm
