#include "dcm/continuous_pd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "dcm/errors.hpp"

namespace dcm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double sign(double v) { return v < 0.0 ? -1.0 : 1.0; }

void check_components(int components) {
  if (components != 1 && components != 2) throw ArgumentError("components must be 1 or 2");
}

}  // namespace

double ConvexPiece::value(double t) const {
  const double a = std::abs(t);
  if (a <= beta) return alpha * a;
  return a - beta * (1.0 - alpha);
}

DCSplit dc_decompose(const PenaltyParams& params) {
  params.validate();
  DCSplit s;
  s.plus = {params.epsilon, params.delta};
  s.minus = {0.0, params.trunc + params.delta - params.epsilon * params.delta};
  return s;
}

double conjugate_value(const ConvexPiece& piece, double omega, double s) {
  const double a = std::abs(s);
  if (a > omega) return kInf;
  return std::max(0.0, piece.beta * a - omega * piece.alpha * piece.beta);
}

double prox_p(double t_hat, double omega, const ConvexPiece& plus, double sigma) {
  const double a = std::abs(t_hat);
  double t = t_hat;
  if (a > plus.alpha * omega) t = std::max(plus.alpha * omega, a - plus.beta * sigma) * sign(t_hat);
  return std::clamp(t, -omega, omega);
}

double prox_q(double q_hat, double omega, const ConvexPiece& minus, double tau) {
  // Same family as prox_p; alpha is 0 for the minus part.
  return prox_p(q_hat, omega, minus, tau);
}

std::vector<double> apply_gradient(const GridGraph& graph, std::span<const double> u,
                                   int components) {
  check_components(components);
  const std::size_t n = graph.num_pixels();
  const std::size_t m = graph.edges.size();
  if (u.size() != n * components) throw DimensionError("u size differs from pixels * components");
  std::vector<double> out(m * components);
  for (int c = 0; c < components; ++c) {
    const double* uc = u.data() + c * n;
    double* oc = out.data() + c * m;
    for (std::size_t e = 0; e < m; ++e) oc[e] = uc[graph.edges[e].i] - uc[graph.edges[e].j];
  }
  return out;
}

std::vector<double> apply_divergence(const GridGraph& graph, std::span<const double> edge_values,
                                     int components) {
  check_components(components);
  const std::size_t n = graph.num_pixels();
  const std::size_t m = graph.edges.size();
  if (edge_values.size() != m * components) {
    throw DimensionError("edge field size differs from edges * components");
  }
  std::vector<double> out(n * components, 0.0);
  for (int c = 0; c < components; ++c) {
    const double* pc = edge_values.data() + c * m;
    double* oc = out.data() + c * n;
    for (std::size_t e = 0; e < m; ++e) {
      oc[graph.edges[e].i] += pc[e];
      oc[graph.edges[e].j] -= pc[e];
    }
  }
  return out;
}

OperatorValue nonlinear_op_apply(const GridGraph& graph, std::span<const double> u,
                                 std::span<const double> q, int components) {
  OperatorValue v;
  v.Au = apply_gradient(graph, u, components);
  if (q.size() != v.Au.size()) throw DimensionError("q size differs from edges * components");
  double dot = 0.0;
  for (std::size_t e = 0; e < q.size(); ++e) dot += v.Au[e] * q[e];
  v.s = -dot;
  return v;
}

OperatorAdjoint nonlinear_op_gradient_adjoint(const GridGraph& graph, std::span<const double> u,
                                              std::span<const double> q,
                                              std::span<const double> p, double d,
                                              int components) {
  if (p.size() != q.size()) throw DimensionError("p and q sizes differ");
  OperatorAdjoint g;
  std::vector<double> mixed(p.size());
  for (std::size_t e = 0; e < p.size(); ++e) mixed[e] = p[e] - d * q[e];
  g.grad_u = apply_divergence(graph, mixed, components);
  g.grad_q = apply_gradient(graph, u, components);
  for (double& v : g.grad_q) v *= -d;
  return g;
}

OperatorValue nonlinear_op_gradient_apply(const GridGraph& graph, std::span<const double> u,
                                          std::span<const double> q,
                                          std::span<const double> v_u,
                                          std::span<const double> v_q, int components) {
  OperatorValue out;
  out.Au = apply_gradient(graph, v_u, components);
  const std::vector<double> au = apply_gradient(graph, u, components);
  if (q.size() != au.size() || v_q.size() != au.size()) {
    throw DimensionError("edge field sizes differ");
  }
  double s = 0.0;
  for (std::size_t e = 0; e < au.size(); ++e) s -= q[e] * out.Au[e] + au[e] * v_q[e];
  out.s = s;
  return out;
}

double operator_norm_estimate(const GridGraph& graph, int components, int iterations) {
  check_components(components);
  if (graph.edges.empty()) return 0.0;
  const std::size_t n = graph.num_pixels() * components;
  std::mt19937 rng(12345);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = dist(rng);
  double lambda = 0.0;
  for (int it = 0; it < iterations; ++it) {
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    if (norm == 0.0) return 0.0;
    for (double& x : v) x /= norm;
    const auto w = apply_divergence(graph, apply_gradient(graph, v, components), components);
    lambda = 0.0;
    for (std::size_t i = 0; i < n; ++i) lambda += v[i] * w[i];
    v = w;
  }
  return std::sqrt(std::max(lambda, 0.0));
}

// --- stereo data model ---

namespace {

double prox_stereo_bounded(double u_hat, double anchor, double s_left, double s_right,
                           double lo, double hi, double tau) {
  double u = anchor;
  if (u_hat > anchor + tau * s_right) {
    u = u_hat - tau * s_right;
  } else if (u_hat < anchor + tau * s_left) {
    u = u_hat - tau * s_left;
  }
  return std::clamp(u, lo, hi);
}

}  // namespace

double prox_data_stereo(double u_hat, double anchor, double s_left, double s_right, double h,
                        double tau) {
  return prox_stereo_bounded(u_hat, anchor, s_left, s_right, anchor - h, anchor + h, tau);
}

void StereoApprox::prox(std::span<const double> u_hat, std::span<double> u, double tau) const {
  const std::size_t n = anchor.size();
  if (u_hat.size() != n || u.size() != n) throw DimensionError("stereo prox size mismatch");
  for (std::size_t i = 0; i < n; ++i) {
    const double lo = std::max(anchor[i] - h, range_lo);
    const double hi = std::min(anchor[i] + h, range_hi);
    u[i] = prox_stereo_bounded(u_hat[i], anchor[i], s_left[i], s_right[i], lo, hi, tau);
  }
}

double StereoApprox::value(std::span<const double> u) const {
  double total = 0.0;
  for (std::size_t i = 0; i < anchor.size(); ++i) {
    const double z = u[i] - anchor[i];
    if (std::abs(z) > h * (1.0 + 1e-12) || u[i] < range_lo || u[i] > range_hi) return kInf;
    total += base[i] + (z <= 0.0 ? s_left[i] : s_right[i]) * z;
  }
  return total;
}

StereoApprox build_stereo_approx(const DataEvaluator1D& data, std::span<const double> u,
                                 double h, double lo, double hi, std::vector<char>* clamped) {
  if (!(h > 0.0)) throw ArgumentError("trust radius h must be > 0");
  if (!(hi >= lo)) throw ArgumentError("empty value range");
  const std::size_t n = u.size();
  StereoApprox a;
  a.h = h;
  a.range_lo = lo;
  a.range_hi = hi;
  a.anchor.resize(n);
  a.s_left.resize(n);
  a.s_right.resize(n);
  a.base.resize(n);
  if (clamped) clamped->assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = std::clamp(u[i], lo, hi);
    if (clamped && x != u[i]) (*clamped)[i] = 1;
    a.anchor[i] = x;
    const double d0 = data(i, x);
    double left = (d0 - data(i, x - h)) / h;
    double right = (data(i, x + h) - d0) / h;
    if (right < left) left = right = 0.5 * (left + right);
    a.base[i] = d0;
    a.s_left[i] = left;
    a.s_right[i] = right;
  }
  return a;
}

// --- flow data model ---

namespace {

struct Box {
  double lo[2];
  double hi[2];
};

double flow_objective(const double z[2], const double zh[2], const std::array<double, 2>& L,
                      const std::array<double, 3>& Q, double tau) {
  const double d0 = z[0] - zh[0], d1 = z[1] - zh[1];
  return (d0 * d0 + d1 * d1) / (2.0 * tau) + L[0] * z[0] + L[1] * z[1] +
         0.5 * (Q[0] * z[0] * z[0] + 2.0 * Q[1] * z[0] * z[1] + Q[2] * z[1] * z[1]);
}

// Minimizer in offset coordinates z = u - anchor over a box containing 0.
std::array<double, 2> flow_prox_box(const double zh[2], const std::array<double, 2>& L,
                                    const std::array<double, 3>& Q, const Box& box, double tau) {
  const double a11 = 1.0 / tau + Q[0], a12 = Q[1], a22 = 1.0 / tau + Q[2];
  const double b1 = zh[0] / tau - L[0], b2 = zh[1] / tau - L[1];
  const double det = a11 * a22 - a12 * a12;
  double z[2] = {(a22 * b1 - a12 * b2) / det, (a11 * b2 - a12 * b1) / det};
  auto inside = [&](const double v[2]) {
    return v[0] >= box.lo[0] && v[0] <= box.hi[0] && v[1] >= box.lo[1] && v[1] <= box.hi[1];
  };
  if (inside(z)) return {z[0], z[1]};
  // Convex objective: the constrained optimum lies on an edge of the box.
  double best = kInf;
  std::array<double, 2> arg{0.0, 0.0};
  for (int fixed = 0; fixed < 2; ++fixed) {
    const int free = 1 - fixed;
    const double a_free = free == 0 ? a11 : a22;
    const double b_free = free == 0 ? b1 : b2;
    for (double v : {box.lo[fixed], box.hi[fixed]}) {
      double c[2];
      c[fixed] = v;
      c[free] = std::clamp((b_free - a12 * v) / a_free, box.lo[free], box.hi[free]);
      const double f = flow_objective(c, zh, L, Q, tau);
      if (f < best) {
        best = f;
        arg = {c[0], c[1]};
      }
    }
  }
  return arg;
}

}  // namespace

std::array<double, 2> prox_data_flow(std::array<double, 2> u_hat, std::array<double, 2> anchor,
                                     std::array<double, 2> L, std::array<double, 3> Q, double h,
                                     double tau) {
  const double zh[2] = {u_hat[0] - anchor[0], u_hat[1] - anchor[1]};
  const Box box{{-h, -h}, {h, h}};
  const auto z = flow_prox_box(zh, L, Q, box, tau);
  return {std::clamp(anchor[0] + z[0], anchor[0] - h, anchor[0] + h),
          std::clamp(anchor[1] + z[1], anchor[1] - h, anchor[1] + h)};
}

void FlowApprox::prox(std::span<const double> u_hat, std::span<double> u, double tau) const {
  const std::size_t n = base.size();
  if (u_hat.size() != 2 * n || u.size() != 2 * n) throw DimensionError("flow prox size mismatch");
  for (std::size_t i = 0; i < n; ++i) {
    const double a[2] = {anchor[i], anchor[n + i]};
    Box box;
    for (int c = 0; c < 2; ++c) {
      box.lo[c] = std::max(-h, range_lo[c] - a[c]);
      box.hi[c] = std::min(h, range_hi[c] - a[c]);
    }
    const double zh[2] = {u_hat[i] - a[0], u_hat[n + i] - a[1]};
    const std::array<double, 2> Li{L[2 * i], L[2 * i + 1]};
    const std::array<double, 3> Qi{Q[3 * i], Q[3 * i + 1], Q[3 * i + 2]};
    const auto z = flow_prox_box(zh, Li, Qi, box, tau);
    // Clamp again in u coordinates so containment holds after rounding.
    u[i] = std::clamp(a[0] + z[0], std::max(a[0] - h, range_lo[0]), std::min(a[0] + h, range_hi[0]));
    u[n + i] =
        std::clamp(a[1] + z[1], std::max(a[1] - h, range_lo[1]), std::min(a[1] + h, range_hi[1]));
  }
}

double FlowApprox::value(std::span<const double> u) const {
  const std::size_t n = base.size();
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double z0 = u[i] - anchor[i], z1 = u[n + i] - anchor[n + i];
    if (std::abs(z0) > h * (1.0 + 1e-12) || std::abs(z1) > h * (1.0 + 1e-12)) return kInf;
    total += base[i] + L[2 * i] * z0 + L[2 * i + 1] * z1 +
             0.5 * (Q[3 * i] * z0 * z0 + 2.0 * Q[3 * i + 1] * z0 * z1 + Q[3 * i + 2] * z1 * z1);
  }
  return total;
}

std::array<double, 3> project_psd(std::array<double, 3> q) {
  const double a = q[0], b = q[1], c = q[2];
  const double mean = 0.5 * (a + c);
  const double rad = std::hypot(0.5 * (a - c), b);
  const double l1 = mean + rad, l2 = mean - rad;
  if (l2 >= 0.0) return q;
  if (l1 <= 0.0) return {0.0, 0.0, 0.0};
  // Keep the positive eigenpair only: l1 * v v^T.
  double vx, vy;
  if (std::abs(b) > 0.0) {
    vx = l1 - c;
    vy = b;
  } else {
    vx = a >= c ? 1.0 : 0.0;
    vy = a >= c ? 0.0 : 1.0;
  }
  const double norm = std::hypot(vx, vy);
  vx /= norm;
  vy /= norm;
  return {l1 * vx * vx, l1 * vx * vy, l1 * vy * vy};
}

FlowApprox build_flow_approx(const DataEvaluator2D& data, std::span<const double> u, double h,
                             std::array<double, 2> lo, std::array<double, 2> hi) {
  if (!(h > 0.0)) throw ArgumentError("trust radius h must be > 0");
  if (u.size() % 2 != 0) throw DimensionError("flow field must have two components");
  const std::size_t n = u.size() / 2;
  FlowApprox a;
  a.h = h;
  a.range_lo = lo;
  a.range_hi = hi;
  a.anchor.resize(2 * n);
  a.L.resize(2 * n);
  a.Q.resize(3 * n);
  a.base.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = std::clamp(u[i], lo[0], hi[0]);
    const double y = std::clamp(u[n + i], lo[1], hi[1]);
    a.anchor[i] = x;
    a.anchor[n + i] = y;
    const double f0 = data(i, x, y);
    const double fxp = data(i, x + h, y), fxm = data(i, x - h, y);
    const double fyp = data(i, x, y + h), fym = data(i, x, y - h);
    const double fpp = data(i, x + h, y + h), fpm = data(i, x + h, y - h);
    const double fmp = data(i, x - h, y + h), fmm = data(i, x - h, y - h);
    a.base[i] = f0;
    a.L[2 * i] = (fxp - fxm) / (2.0 * h);
    a.L[2 * i + 1] = (fyp - fym) / (2.0 * h);
    const std::array<double, 3> q = project_psd({(fxp - 2.0 * f0 + fxm) / (h * h),
                                                 (fpp - fpm - fmp + fmm) / (4.0 * h * h),
                                                 (fyp - 2.0 * f0 + fym) / (h * h)});
    std::copy(q.begin(), q.end(), a.Q.begin() + 3 * i);
  }
  return a;
}

// --- primal-dual iterations ---

ContinuousState::ContinuousState(const GridGraph& graph, std::vector<double> u_init, int c)
    : components(c), u(std::move(u_init)) {
  check_components(c);
  if (u.size() != graph.num_pixels() * c) throw DimensionError("initial field size mismatch");
  q.assign(graph.edges.size() * c, 0.0);
  p.assign(graph.edges.size() * c, 0.0);
}

void choose_steps(ContinuousState& state, const ContinuousProblem& problem, double safety) {
  state.lipschitz = operator_norm_estimate(*problem.graph, state.components);
  const double step = state.lipschitz > 0.0 ? safety / state.lipschitz : 1.0;
  state.tau = step;
  state.sigma = step;
}

void pd_iterate(ContinuousState& state, const ContinuousProblem& problem,
                const DataApprox& data) {
  const GridGraph& graph = *problem.graph;
  const int c = state.components;
  if (data.components() != c) throw DimensionError("data model and state components differ");
  if (!(state.tau > 0.0 && state.sigma > 0.0)) throw ConfigError("step sizes must be positive");
  if (state.tau * state.sigma * state.lipschitz * state.lipschitz > 1.0 + 1e-12) {
    throw ConfigError("step sizes violate tau * sigma * L^2 <= 1");
  }
  const std::size_t m = graph.edges.size();

  // Primal: x - tau [grad A(x)]^T y, then the prox of G.
  const OperatorAdjoint g =
      nonlinear_op_gradient_adjoint(graph, state.u, state.q, state.p, state.d, c);
  std::vector<double> u_hat(state.u.size());
  for (std::size_t i = 0; i < u_hat.size(); ++i) u_hat[i] = state.u[i] - state.tau * g.grad_u[i];
  std::vector<double> u_new(state.u.size());
  data.prox(u_hat, u_new, state.tau);
  for (std::size_t e = 0; e < state.q.size(); ++e) {
    const double omega = graph.weights[e % m];
    state.q[e] = prox_q(state.q[e] - state.tau * g.grad_q[e], omega, problem.split.minus, state.tau);
  }

  // Dual: p + sigma A(2 u_new - u_old); d stays pinned at 1.
  std::vector<double> bar(state.u.size());
  for (std::size_t i = 0; i < bar.size(); ++i) bar[i] = 2.0 * u_new[i] - state.u[i];
  const std::vector<double> a_bar = apply_gradient(graph, bar, c);
  for (std::size_t e = 0; e < state.p.size(); ++e) {
    const double omega = graph.weights[e % m];
    state.p[e] = prox_p(state.p[e] + state.sigma * a_bar[e], omega, problem.split.plus, state.sigma);
  }
  state.u = std::move(u_new);
  state.d = 1.0;
}

void RefineOptions::validate() const {
  if (warps < 0) throw ArgumentError("warps must be >= 0");
  if (iterations < 0) throw ArgumentError("iterations per warp must be >= 0");
  if (!(h > 0.0)) throw ArgumentError("trust radius h must be > 0");
}

ContinuousState refine_stereo(const DataEvaluator1D& data, const ContinuousProblem& problem,
                              std::vector<double> u_init, double lo, double hi,
                              const RefineOptions& options) {
  options.validate();
  ContinuousState state(*problem.graph, std::move(u_init), 1);
  for (int w = 0; w < options.warps; ++w) {
    const StereoApprox approx = build_stereo_approx(data, state.u, options.h, lo, hi);
    choose_steps(state, problem);
    for (int it = 0; it < options.iterations; ++it) pd_iterate(state, problem, approx);
  }
  return state;
}

ContinuousState refine_flow(const DataEvaluator2D& data, const ContinuousProblem& problem,
                            std::vector<double> u_init, std::array<double, 2> lo,
                            std::array<double, 2> hi, const RefineOptions& options) {
  options.validate();
  ContinuousState state(*problem.graph, std::move(u_init), 2);
  for (int w = 0; w < options.warps; ++w) {
    const FlowApprox approx = build_flow_approx(data, state.u, options.h, lo, hi);
    choose_steps(state, problem);
    for (int it = 0; it < options.iterations; ++it) pd_iterate(state, problem, approx);
  }
  return state;
}

double regularizer_value(const GridGraph& graph, const PenaltyParams& params,
                         std::span<const double> u, int components) {
  const std::vector<double> au = apply_gradient(graph, u, components);
  const std::size_t m = graph.edges.size();
  double total = 0.0;
  for (std::size_t e = 0; e < au.size(); ++e) total += graph.weights[e % m] * penalty_value(params, au[e]);
  return total;
}

double interpolate_cost(const CostVolume& volume, std::size_t pixel, double value) {
  const auto& lv = volume.label_values;
  const int k = volume.labels;
  if (k == 1 || value <= lv.front()) return volume.at(pixel, 0);
  if (value >= lv.back()) return volume.at(pixel, k - 1);
  const auto it = std::upper_bound(lv.begin(), lv.end(), value);
  const int b = static_cast<int>(it - lv.begin());
  const int a = b - 1;
  const double t = (value - lv[a]) / (lv[b] - lv[a]);
  return (1.0 - t) * volume.at(pixel, a) + t * volume.at(pixel, b);
}

namespace {

// Index a and weight t with value = (1 - t) lv[a] + t lv[a + 1], clamped.
void bracket(const std::vector<double>& lv, double value, int& a, double& t) {
  const int k = static_cast<int>(lv.size());
  if (k == 1 || value <= lv.front()) {
    a = 0;
    t = 0.0;
    return;
  }
  if (value >= lv.back()) {
    a = k - 2;
    t = 1.0;
    return;
  }
  a = static_cast<int>(std::upper_bound(lv.begin(), lv.end(), value) - lv.begin()) - 1;
  t = (value - lv[a]) / (lv[a + 1] - lv[a]);
}

}  // namespace

double interpolate_cost(const FlowCostVolume2D& volume, std::size_t pixel, double v1, double v2) {
  int a, b;
  double s, t;
  bracket(volume.label_values1, v1, a, s);
  bracket(volume.label_values2, v2, b, t);
  const int a1 = std::min(a + 1, volume.labels1 - 1);
  const int b1 = std::min(b + 1, volume.labels2 - 1);
  return (1 - s) * (1 - t) * volume.at(pixel, a, b) + s * (1 - t) * volume.at(pixel, a1, b) +
         (1 - s) * t * volume.at(pixel, a, b1) + s * t * volume.at(pixel, a1, b1);
}

}  // namespace dcm
