#include "dcm/minorants.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "dcm/errors.hpp"

namespace dcm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void add_scaled(std::span<double> dst, std::span<const double> src, double scale) {
  for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += scale * src[k];
}

// One sweep of sequential draining. Before a forward sweep the right
// messages must describe `residual`; before a backward sweep the left ones.
void drain_sweep(ChainView& residual, Minorant& lambda, MessageField& msg, bool forward,
                 std::span<const double> gamma) {
  const std::size_t n = residual.size();
  const int k = residual.labels;
  std::vector<double> buf(k), m(k);
  for (std::size_t step = 0; step < n; ++step) {
    const std::size_t t = forward ? step : n - 1 - step;
    if (forward && t > 0) {
      for (int a = 0; a < k; ++a) buf[a] = msg.left(t - 1, a) + residual.unary_at(t - 1)[a];
      pass_message(buf, *residual.model, residual.weights[t - 1], msg.left.row(t));
    } else if (!forward && t + 1 < n) {
      for (int a = 0; a < k; ++a) buf[a] = msg.right(t + 1, a) + residual.unary_at(t + 1)[a];
      pass_message(buf, *residual.model, residual.weights[t], msg.right.row(t));
    }
    const double g = gamma[step];
    auto r = residual.unary_at(t);
    for (int a = 0; a < k; ++a) {
      m[a] = g * (r[a] + msg.left(t, a) + msg.right(t, a));
      lambda(t, a) += m[a];
      r[a] -= m[a];
    }
  }
}

}  // namespace

std::size_t SupportSet::count() const {
  return static_cast<std::size_t>(std::count(member.begin(), member.end(), 1));
}

const char* to_string(MinorantKind kind) {
  switch (kind) {
    case MinorantKind::naive: return "naive";
    case MinorantKind::uniform: return "uniform";
    case MinorantKind::iterative: return "iterative";
    case MinorantKind::hierarchical: return "hierarchical";
    case MinorantKind::unary_only: return "unary";
  }
  return "?";
}

MinorantKind minorant_kind_from_string(const std::string& name) {
  for (auto kind : {MinorantKind::naive, MinorantKind::uniform, MinorantKind::iterative,
                    MinorantKind::hierarchical, MinorantKind::unary_only}) {
    if (name == to_string(kind)) return kind;
  }
  throw ArgumentError("unknown minorant kind '" + name + "'");
}

ChainView residual_chain(const ChainView& chain, const Minorant& lambda) {
  if (lambda.nodes != chain.size() || lambda.labels != chain.labels) {
    throw DimensionError("minorant shape differs from chain");
  }
  ChainView r = chain;
  for (std::size_t i = 0; i < r.unary.size(); ++i) r.unary[i] -= lambda.values[i];
  return r;
}

Minorant naive_minorant(const ChainView& chain) {
  Minorant lambda = min_marginals(chain);
  const double n = static_cast<double>(chain.size());
  for (double& v : lambda.values) v /= n;
  return lambda;
}

Minorant unary_minorant(const ChainView& chain) {
  chain.validate();
  Minorant lambda(chain.size(), chain.labels);
  lambda.values = chain.unary;
  return lambda;
}

SupportSet support_set(const MinMarginals& m, double tol) {
  double optimum = kInf;
  for (double v : m.values) optimum = std::min(optimum, v);
  const double slack = tol * (1.0 + std::abs(optimum));
  SupportSet o(m.nodes, m.labels);
  for (std::size_t t = 0; t < m.nodes; ++t) {
    auto row = m.row(t);
    const double lo = *std::min_element(row.begin(), row.end());
    for (int k = 0; k < m.labels; ++k) o.set(t, k, row[k] - lo <= slack);
  }
  return o;
}

double min_ratio_step(const ChainView& residual, const SupportSet& support, double tol) {
  const std::size_t n = residual.size();
  const int k = residual.labels;
  if (support.nodes != n || support.labels != k) {
    throw DimensionError("support set shape differs from chain");
  }
  // Start from the cheapest unsupported min-marginal: the optimal labeling
  // through it has ratio at most its value.
  const MinMarginals m = min_marginals(residual);
  double eps = kInf;
  double scale = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    for (int a = 0; a < k; ++a) {
      scale = std::max(scale, std::abs(m(t, a)));
      if (!support(t, a)) eps = std::min(eps, m(t, a));
    }
  }
  if (eps == kInf) return 0.0;
  eps = std::max(eps, 0.0);
  const double stop = tol * (1.0 + scale);

  ChainView parametric = residual;
  for (int iter = 0; iter < 1000; ++iter) {
    for (std::size_t t = 0; t < n; ++t) {
      auto dst = parametric.unary_at(t);
      auto src = residual.unary_at(t);
      for (int a = 0; a < k; ++a) dst[a] = src[a] - (support(t, a) ? 0.0 : eps);
    }
    const auto [x, value] = chain_argmin(parametric);
    if (value >= -stop) return eps;
    int outside = 0;
    for (std::size_t t = 0; t < n; ++t) outside += support(t, x[t]) ? 0 : 1;
    if (outside == 0) return eps;
    const double ratio = residual.energy(x) / outside;
    if (!(ratio < eps)) return eps;
    eps = std::max(ratio, 0.0);
  }
  return eps;
}

Minorant uniform_minorant(const ChainView& chain, double tol, UniformTrace* trace) {
  chain.validate();
  const std::size_t n = chain.size();
  const int k = chain.labels;
  // Spread the optimum evenly first so the residual has optimum zero; the
  // rounds below then only raise labels outside the optimal support.
  const double optimum = chain_argmin(chain).second;
  Minorant lambda(n, k, optimum / static_cast<double>(n));
  ChainView residual = residual_chain(chain, lambda);

  const std::size_t max_rounds = n * static_cast<std::size_t>(k) + 1;
  std::size_t previous_support = 0;
  for (std::size_t round = 0; round <= max_rounds; ++round) {
    const MinMarginals m = min_marginals(residual);
    const SupportSet support = support_set(m, tol);
    const std::size_t size = support.count();
    if (trace) trace->support_sizes.push_back(size);
    if (size == n * static_cast<std::size_t>(k)) return lambda;
    if (round > 0 && size <= previous_support) {
      const NodeTable gap = normalized(m);
      const double residual_max = *std::max_element(gap.values.begin(), gap.values.end());
      throw ConvergenceError("uniform minorant: support set stopped growing", residual_max);
    }
    previous_support = size;

    const double eps = min_ratio_step(residual, support);
    Minorant increment(n, k);
    for (std::size_t t = 0; t < n; ++t) {
      for (int a = 0; a < k; ++a) {
        if (!support(t, a)) {
          increment(t, a) = eps;
          lambda(t, a) += eps;
          residual.unary_at(t)[a] -= eps;
        }
      }
    }
    if (trace) {
      trace->epsilons.push_back(eps);
      trace->increments.push_back(std::move(increment));
    }
  }
  throw ConvergenceError("uniform minorant: round limit reached", 0.0);
}

Minorant iterative_minorant(const ChainView& chain, std::span<const double> gammas) {
  chain.validate();
  if (gammas.empty()) throw ArgumentError("iterative minorant needs at least one pass");
  for (double g : gammas) {
    if (!(g > 0.0 && g <= 1.0)) throw ArgumentError("iterative minorant gamma must be in (0, 1]");
  }
  const std::size_t n = chain.size();
  ChainView residual = chain;
  Minorant lambda(n, chain.labels);
  MessageField msg = compute_messages(residual);
  std::vector<double> gamma(n);
  bool forward = true;
  for (std::size_t pass = 0; pass < gammas.size(); ++pass) {
    const bool last = pass + 1 == gammas.size();
    std::fill(gamma.begin(), gamma.end(), last ? 1.0 : gammas[pass]);
    drain_sweep(residual, lambda, msg, forward, gamma);
    forward = !forward;
  }
  return lambda;
}

HandshakeResult handshake(std::span<const double> unary_i, std::span<const double> unary_j,
                          const PairwiseModel& model, double weight,
                          std::span<const double> left_in, std::span<const double> right_in) {
  const int k = model.labels();
  std::vector<double> buf(k);
  HandshakeResult out{std::vector<double>(k), std::vector<double>(k)};
  // Message from j to i.
  for (int a = 0; a < k; ++a) buf[a] = unary_j[a] + right_in[a];
  pass_message(buf, model, weight, out.to_left);
  // Half of the total min-marginal at i, minus what came from j, goes right.
  for (int a = 0; a < k; ++a) {
    const double total = left_in[a] + unary_i[a] + out.to_left[a];
    buf[a] = 0.5 * total - out.to_left[a];
  }
  pass_message(buf, model, weight, out.to_right);
  // Bounce back what cannot be shared.
  for (int a = 0; a < k; ++a) buf[a] = -out.to_right[a];
  pass_message(buf, model, weight, out.to_left);
  return out;
}

namespace {

class HierarchicalBuilder {
 public:
  HierarchicalBuilder(const ChainView& chain, int leaf_size, HierarchyTrace* trace)
      : chain_(chain),
        leaf_size_(leaf_size),
        trace_(trace),
        k_(chain.labels),
        msg_{NodeTable(chain.size(), chain.labels), NodeTable(chain.size(), chain.labels)},
        lambda_(chain.size(), chain.labels),
        buf_(chain.labels) {}

  Minorant run() {
    const std::size_t n = chain_.size();
    split(0, n - 1, 0, n - 1, 0);
    return std::move(lambda_);
  }

 private:
  // Segment [lo, hi]; left messages are valid for indices <= left_valid and
  // right messages for indices >= right_valid.
  void split(std::size_t lo, std::size_t hi, std::size_t left_valid, std::size_t right_valid,
             std::size_t depth) {
    const std::size_t len = hi - lo + 1;
    if (len <= static_cast<std::size_t>(leaf_size_)) {
      record(depth, "[" + std::string(len >= 2 ? len - 2 : 0, '.') + "]", 0);
      drain_leaf(lo, hi);
      return;
    }
    const std::size_t i = lo + len / 2 - 1;
    const std::size_t j = i + 1;
    std::string render = "[";
    std::size_t sent = 0;
    for (std::size_t t = lo + 1; t <= i; ++t) {
      if (t > left_valid) {
        for (int a = 0; a < k_; ++a) buf_[a] = msg_.left(t - 1, a) + chain_.unary_at(t - 1)[a];
        pass_message(buf_, *chain_.model, chain_.weights[t - 1], msg_.left.row(t));
        render += '>';
        ++sent;
      } else {
        render += '.';
      }
    }
    std::string right_part;
    for (std::size_t t = hi; t-- > j;) {
      if (t < right_valid) {
        for (int a = 0; a < k_; ++a) buf_[a] = msg_.right(t + 1, a) + chain_.unary_at(t + 1)[a];
        pass_message(buf_, *chain_.model, chain_.weights[t], msg_.right.row(t));
        right_part += '<';
        ++sent;
      } else {
        right_part += '.';
      }
    }
    std::reverse(right_part.begin(), right_part.end());
    record(depth, render + right_part + "]", sent);
    if (trace_) ++trace_->handshakes;

    HandshakeResult hs = handshake(chain_.unary_at(i), chain_.unary_at(j), *chain_.model,
                                   chain_.weights[i], msg_.left.row(i), msg_.right.row(j));
    std::copy(hs.to_left.begin(), hs.to_left.end(), msg_.right.row(i).begin());
    std::copy(hs.to_right.begin(), hs.to_right.end(), msg_.left.row(j).begin());

    split(lo, i, i, i, depth + 1);
    split(j, hi, j, j, depth + 1);
  }

  // Leaf energy: unaries plus the boundary messages at both ends. Forward
  // sweep drains 1/(L-t) at position t, then a full backward sweep; for two
  // nodes this is the half / full / remainder procedure.
  void drain_leaf(std::size_t lo, std::size_t hi) {
    const std::size_t len = hi - lo + 1;
    ChainView leaf(*chain_.model, len);
    for (std::size_t t = 0; t < len; ++t) {
      auto src = chain_.unary_at(lo + t);
      std::copy(src.begin(), src.end(), leaf.unary_at(t).begin());
      if (t + 1 < len) leaf.weights[t] = chain_.weights[lo + t];
    }
    add_scaled(leaf.unary_at(0), msg_.left.row(lo), 1.0);
    add_scaled(leaf.unary_at(len - 1), msg_.right.row(hi), 1.0);

    Minorant local(len, k_);
    MessageField msg = compute_messages(leaf);
    std::vector<double> gamma(len);
    for (std::size_t t = 0; t < len; ++t) gamma[t] = 1.0 / static_cast<double>(len - t);
    drain_sweep(leaf, local, msg, true, gamma);
    if (len > 1) {
      std::fill(gamma.begin(), gamma.end(), 1.0);
      drain_sweep(leaf, local, msg, false, gamma);
    }
    for (std::size_t t = 0; t < len; ++t) {
      std::copy(local.row(t).begin(), local.row(t).end(), lambda_.row(lo + t).begin());
    }
  }

  void record(std::size_t depth, const std::string& piece, std::size_t sent) {
    if (!trace_) return;
    if (trace_->levels.size() <= depth) {
      trace_->levels.resize(depth + 1);
      trace_->messages_per_level.resize(depth + 1, 0);
    }
    trace_->levels[depth] += piece;
    trace_->messages_per_level[depth] += sent;
  }

  const ChainView& chain_;
  int leaf_size_;
  HierarchyTrace* trace_;
  int k_;
  MessageField msg_;
  Minorant lambda_;
  std::vector<double> buf_;
};

}  // namespace

Minorant hierarchical_minorant(const ChainView& chain, int leaf_size, HierarchyTrace* trace) {
  chain.validate();
  if (leaf_size < 2 || leaf_size > 8) {
    throw ArgumentError("hierarchical leaf size must be in [2, 8]");
  }
  return HierarchicalBuilder(chain, leaf_size, trace).run();
}

Minorant build_minorant(const ChainView& chain, const MinorantOptions& options) {
  switch (options.kind) {
    case MinorantKind::naive: return naive_minorant(chain);
    case MinorantKind::uniform: return uniform_minorant(chain, options.tol);
    case MinorantKind::iterative: return iterative_minorant(chain, options.gammas);
    case MinorantKind::hierarchical: return hierarchical_minorant(chain, options.leaf_size);
    case MinorantKind::unary_only: return unary_minorant(chain);
  }
  throw ArgumentError("unknown minorant kind");
}

MinorantReport verify_minorant(const ChainView& chain, const Minorant& lambda, double tol,
                               bool exhaustive) {
  const ChainView residual = residual_chain(chain, lambda);
  MinorantReport report;
  const MinMarginals m = min_marginals(residual);
  for (double v : m.values) report.max_residual = std::max(report.max_residual, std::abs(v));
  report.is_maximal = report.max_residual <= tol;

  if (!exhaustive) {
    // Without enumeration: lambda is a minorant iff min(f - lambda) >= 0.
    const double lo = *std::min_element(m.values.begin(), m.values.end());
    report.max_violation = std::max(0.0, -lo);
  } else {
    const auto [x, value] = brute_force_chain_min(residual);
    report.max_violation = std::max(0.0, -value);
  }
  report.is_minorant = report.max_violation <= tol;
  return report;
}

}  // namespace dcm
