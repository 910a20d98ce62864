#include "dcm/dual_solvers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "dcm/errors.hpp"

namespace dcm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double chain_min(const ChainView& chain) {
  // Only the optimum value is needed: one sweep of left messages.
  const std::size_t n = chain.size();
  const int k = chain.labels;
  std::vector<double> carry(k, 0.0), buf(k);
  for (std::size_t t = 0; t + 1 < n; ++t) {
    for (int a = 0; a < k; ++a) buf[a] = carry[a] + chain.unary_at(t)[a];
    pass_message(buf, *chain.model, chain.weights[t], carry);
  }
  double best = kInf;
  for (int a = 0; a < k; ++a) best = std::min(best, carry[a] + chain.unary_at(n - 1)[a]);
  return best;
}

}  // namespace

DiscreteProblem::DiscreteProblem(CostVolume v, GridGraph g, PenaltyParams p)
    : volume(std::move(v)), graph(std::move(g)), penalty(p), model(p, volume.label_values) {
  volume.validate();
  if (volume.width != graph.width || volume.height != graph.height) {
    throw DimensionError("cost volume and graph sizes differ");
  }
  if (graph.weights.size() != graph.edges.size()) {
    throw DimensionError("graph weights and edges differ in count");
  }
  for (double w : graph.weights) {
    if (!(w >= 0.0)) throw ArgumentError("edge weights must be nonnegative");
  }
}

ChainView DiscreteProblem::row_chain(int y, const std::vector<double>& lambda) const {
  const int w = graph.width;
  const int k = labels();
  ChainView c(model, w);
  for (int x = 0; x < w; ++x) {
    const std::size_t p = static_cast<std::size_t>(y) * w + x;
    c.nodes[x] = static_cast<std::int32_t>(p);
    auto u = c.unary_at(x);
    for (int a = 0; a < k; ++a) {
      u[a] = volume.at(p, a) + (lambda.empty() ? 0.0 : lambda[p * k + a]);
    }
    if (x + 1 < w) c.weights[x] = graph.weights[graph.horizontal_edge(x, y)];
  }
  return c;
}

ChainView DiscreteProblem::column_chain(int x, const std::vector<double>& lambda) const {
  const int w = graph.width;
  const int h = graph.height;
  const int k = labels();
  ChainView c(model, h);
  for (int y = 0; y < h; ++y) {
    const std::size_t p = static_cast<std::size_t>(y) * w + x;
    c.nodes[y] = static_cast<std::int32_t>(p);
    auto u = c.unary_at(y);
    for (int a = 0; a < k; ++a) u[a] = lambda.empty() ? 0.0 : -lambda[p * k + a];
    if (y + 1 < h) c.weights[y] = graph.weights[graph.vertical_edge(x, y)];
  }
  return c;
}

DualState::DualState(const DiscreteProblem& problem)
    : lambda(problem.num_pixels() * problem.labels(), 0.0) {}

void DualState::offer(const DiscreteProblem& problem, const Labeling& x) {
  const double e = problem.energy(x);
  if (e < best_energy) {
    best_energy = e;
    best_labeling = x;
  }
}

double dual_bound(const DualState& state, const DiscreteProblem& problem) {
  double bound = 0.0;
  for (int y = 0; y < problem.graph.height; ++y) {
    bound += chain_min(problem.row_chain(y, state.lambda));
  }
  for (int x = 0; x < problem.graph.width; ++x) {
    bound += chain_min(problem.column_chain(x, state.lambda));
  }
  return bound;
}

void dmm_iterate(DualState& state, const DiscreteProblem& problem,
                 const MinorantOptions& minorant) {
  const int k = problem.labels();
  const bool horizontal = state.next == Orientation::horizontal;
  const int count = horizontal ? problem.graph.height : problem.graph.width;
  Labeling primal(problem.num_pixels(), 0);

  // Every chain reads and writes only its own pixels' lambda.
#pragma omp parallel for schedule(dynamic)
  for (int c = 0; c < count; ++c) {
    const ChainView chain =
        horizontal ? problem.row_chain(c, state.lambda) : problem.column_chain(c, state.lambda);
    const auto x = chain_argmin(chain).first;
    const Minorant mu = build_minorant(chain, minorant);
    const double sign = horizontal ? -1.0 : 1.0;
    for (std::size_t t = 0; t < chain.size(); ++t) {
      const std::size_t p = static_cast<std::size_t>(chain.nodes[t]);
      primal[p] = x[t];
      for (int a = 0; a < k; ++a) state.lambda[p * k + a] += sign * mu(t, a);
    }
  }

  if (horizontal) state.last_primal = primal;
  state.offer(problem, primal);
  state.next = horizontal ? Orientation::vertical : Orientation::horizontal;
}

namespace {

void ensure_messages(DualState& state, const DiscreteProblem& problem) {
  if (!state.h_left.empty()) return;
  const std::size_t size = problem.num_pixels() * problem.labels();
  state.h_left.assign(size, 0.0);
  state.h_right.assign(size, 0.0);
  state.v_up.assign(size, 0.0);
  state.v_down.assign(size, 0.0);
  const int w = problem.graph.width;
  const int k = problem.labels();
  for (int y = 0; y < problem.graph.height; ++y) {
    const MessageField m = compute_messages(problem.row_chain(y, state.lambda));
    for (int x = 0; x < w; ++x) {
      const std::size_t p = static_cast<std::size_t>(y) * w + x;
      std::copy(m.left.row(x).begin(), m.left.row(x).end(), state.h_left.begin() + p * k);
      std::copy(m.right.row(x).begin(), m.right.row(x).end(), state.h_right.begin() + p * k);
    }
  }
  for (int x = 0; x < w; ++x) {
    const MessageField m = compute_messages(problem.column_chain(x, state.lambda));
    for (int y = 0; y < problem.graph.height; ++y) {
      const std::size_t p = static_cast<std::size_t>(y) * w + x;
      std::copy(m.left.row(y).begin(), m.left.row(y).end(), state.v_up.begin() + p * k);
      std::copy(m.right.row(y).begin(), m.right.row(y).end(), state.v_down.begin() + p * k);
    }
  }
}

}  // namespace

void trws_iterate(DualState& state, const DiscreteProblem& problem, bool forward) {
  ensure_messages(state, problem);
  const int w = problem.graph.width;
  const int h = problem.graph.height;
  const int k = problem.labels();
  const std::size_t n = problem.num_pixels();
  std::vector<double> buf(k);

  for (std::size_t step = 0; step < n; ++step) {
    const std::size_t p = forward ? step : n - 1 - step;
    const int x = static_cast<int>(p % w);
    const int y = static_cast<int>(p / w);
    double* lam = state.lambda.data() + p * k;
    const double* hl = state.h_left.data() + p * k;
    const double* hr = state.h_right.data() + p * k;
    const double* vu = state.v_up.data() + p * k;
    const double* vd = state.v_down.data() + p * k;
    for (int a = 0; a < k; ++a) {
      const double mf = problem.volume.at(p, a) + lam[a] + hl[a] + hr[a];
      const double mg = -lam[a] + vu[a] + vd[a];
      lam[a] += 0.5 * (mg - mf);
    }
    if (forward) {
      if (x + 1 < w) {
        for (int a = 0; a < k; ++a) buf[a] = problem.volume.at(p, a) + lam[a] + hl[a];
        pass_message(buf, problem.model, problem.graph.weights[problem.graph.horizontal_edge(x, y)],
                     {state.h_left.data() + (p + 1) * k, static_cast<std::size_t>(k)});
      }
      if (y + 1 < h) {
        for (int a = 0; a < k; ++a) buf[a] = -lam[a] + vu[a];
        pass_message(buf, problem.model, problem.graph.weights[problem.graph.vertical_edge(x, y)],
                     {state.v_up.data() + (p + w) * k, static_cast<std::size_t>(k)});
      }
    } else {
      if (x > 0) {
        for (int a = 0; a < k; ++a) buf[a] = problem.volume.at(p, a) + lam[a] + hr[a];
        pass_message(buf, problem.model,
                     problem.graph.weights[problem.graph.horizontal_edge(x - 1, y)],
                     {state.h_right.data() + (p - 1) * k, static_cast<std::size_t>(k)});
      }
      if (y > 0) {
        for (int a = 0; a < k; ++a) buf[a] = -lam[a] + vd[a];
        pass_message(buf, problem.model,
                     problem.graph.weights[problem.graph.vertical_edge(x, y - 1)],
                     {state.v_down.data() + (p - w) * k, static_cast<std::size_t>(k)});
      }
    }
  }
}

std::vector<double> pairwise_majorant(const DiscreteProblem& problem, const Labeling& x,
                                      Orientation orientation) {
  const int w = problem.graph.width;
  const int h = problem.graph.height;
  const int k = problem.labels();
  const PairwiseModel& model = problem.model;
  std::vector<double> bar(problem.num_pixels() * k, 0.0);
  auto add_edge = [&](std::size_t i, std::size_t j, double weight) {
    const int xj = x[j];
    for (int a = 0; a < k; ++a) bar[i * k + a] += weight * model.cost(a, xj);
    for (int b = 0; b < k; ++b) {
      double worst = -kInf;
      for (int a = 0; a < k; ++a) worst = std::max(worst, model.cost(a, b) - model.cost(a, xj));
      bar[j * k + b] += weight * worst;
    }
  };
  if (orientation == Orientation::horizontal) {
    for (int y = 0; y < h; ++y) {
      for (int c = 0; c + 1 < w; ++c) {
        const std::size_t i = static_cast<std::size_t>(y) * w + c;
        add_edge(i, i + 1, problem.graph.weights[problem.graph.horizontal_edge(c, y)]);
      }
    }
  } else {
    for (int y = 0; y + 1 < h; ++y) {
      for (int c = 0; c < w; ++c) {
        const std::size_t i = static_cast<std::size_t>(y) * w + c;
        add_edge(i, i + w, problem.graph.weights[problem.graph.vertical_edge(c, y)]);
      }
    }
  }
  return bar;
}

Labeling pmm_iterate(const Labeling& x, const DiscreteProblem& problem) {
  if (x.size() != problem.num_pixels()) throw DimensionError("labeling size differs from pixels");
  const int w = problem.graph.width;
  const int h = problem.graph.height;
  const int k = problem.labels();

  // Rows: f + majorant of g at x.
  const std::vector<double> g_bar = pairwise_majorant(problem, x, Orientation::vertical);
  Labeling mid(x.size());
  for (int y = 0; y < h; ++y) {
    const ChainView chain = problem.row_chain(y, g_bar);
    const auto sol = chain_argmin(chain).first;
    for (int c = 0; c < w; ++c) mid[static_cast<std::size_t>(y) * w + c] = sol[c];
  }

  // Columns: g + unaries + majorant of the horizontal terms at mid. The
  // column chain carries -lambda, so pass the negated modular part.
  const std::vector<double> f_bar = pairwise_majorant(problem, mid, Orientation::horizontal);
  std::vector<double> neg(f_bar.size());
  for (std::size_t p = 0; p < problem.num_pixels(); ++p) {
    for (int a = 0; a < k; ++a) neg[p * k + a] = -(f_bar[p * k + a] + problem.volume.at(p, a));
  }
  Labeling out(x.size());
  for (int c = 0; c < w; ++c) {
    const ChainView chain = problem.column_chain(c, neg);
    const auto sol = chain_argmin(chain).first;
    for (int y = 0; y < h; ++y) out[static_cast<std::size_t>(y) * w + c] = sol[y];
  }
  return out;
}

Labeling round_primal(const DualState& state, const DiscreteProblem& problem) {
  const int w = problem.graph.width;
  Labeling x(problem.num_pixels());
  for (int y = 0; y < problem.graph.height; ++y) {
    const auto sol = chain_argmin(problem.row_chain(y, state.lambda)).first;
    for (int c = 0; c < w; ++c) x[static_cast<std::size_t>(y) * w + c] = sol[c];
  }
  return x;
}

void SolverConfig::validate() const {
  if (iterations < 1) throw ArgumentError("solver iterations must be >= 1");
  if (stop_tolerance < 0.0) throw ArgumentError("stop tolerance must be >= 0");
}

std::string solver_label(const SolverConfig& config) {
  switch (config.kind) {
    case SolverKind::trws: return "trws";
    case SolverKind::pmm: return "pmm";
    case SolverKind::dmm: return std::string("dmm-") + to_string(config.minorant.kind);
  }
  return "?";
}

SolveResult solve(const DiscreteProblem& problem, const SolverConfig& config) {
  config.validate();
  using clock = std::chrono::steady_clock;
  const auto start = clock::now();
  SolveResult result;
  DualState state(problem);

  Labeling x;
  if (config.kind == SolverKind::pmm) {
    // Start from the row-wise optimum of f alone.
    x = round_primal(state, problem);
    state.offer(problem, x);
  }

  for (int it = 1; it <= config.iterations; ++it) {
    double bound = std::numeric_limits<double>::quiet_NaN();
    switch (config.kind) {
      case SolverKind::dmm:
        dmm_iterate(state, problem, config.minorant);
        dmm_iterate(state, problem, config.minorant);
        bound = dual_bound(state, problem);
        break;
      case SolverKind::trws:
        trws_iterate(state, problem, true);
        trws_iterate(state, problem, false);
        state.last_primal = round_primal(state, problem);
        state.offer(problem, state.last_primal);
        bound = dual_bound(state, problem);
        break;
      case SolverKind::pmm:
        x = pmm_iterate(x, problem);
        state.offer(problem, x);
        break;
    }
    state.iteration = it;
    IterationRecord rec;
    rec.iteration = it;
    rec.lower_bound = bound;
    rec.primal_energy = state.best_energy;
    rec.millis = std::chrono::duration<double, std::milli>(clock::now() - start).count();
    result.records.push_back(rec);
    result.energy_history.push_back(state.best_energy);
    if (config.kind != SolverKind::pmm) {
      result.bound_history.push_back(bound);
      state.bound_history.push_back(bound);
      const std::size_t h = result.bound_history.size();
      if (config.stop_tolerance > 0.0 && h >= 2) {
        const double change = std::abs(result.bound_history[h - 1] - result.bound_history[h - 2]);
        if (change <= config.stop_tolerance * (1.0 + std::abs(bound))) break;
      }
    }
  }
  result.labeling = state.best_labeling;
  return result;
}

}  // namespace dcm
