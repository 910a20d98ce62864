#pragma once

// Continuous refinement of a labeling by the non-linear primal-dual scheme
//   x = (u, q), y = (p, d = 1),
//   min_x max_y <A(x), y> + G(x) - F*(y),
//   A(x) = [Au; -<Au, q>], G(x) = R-*(q) + D~(u), F*(y) = R+*(p),
// where r = r+ - r- is the convex split of the truncated penalty and D~ a
// convex model of the data term valid on a trust region around an anchor.
//
// Layouts: u is component-major, u[c * pixels + i]; p and q are
// component-major per edge, p[c * edges + e]. (Au)_e = u_i - u_j for the
// edge's left/top endpoint i.

#include <array>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "dcm/grid_energy.hpp"

namespace dcm {

/// r_{alpha,beta}(t) = alpha|t| for |t| <= beta, |t| - beta(1 - alpha) beyond.
struct ConvexPiece {
  double alpha = 0.0;
  double beta = 0.0;
  double value(double t) const;
};

struct DCSplit {
  ConvexPiece plus;
  ConvexPiece minus;
  double value(double t) const { return plus.value(t) - minus.value(t); }
};

DCSplit dc_decompose(const PenaltyParams& params);

/// (omega * r_{alpha,beta})*(s): max(0, beta|s| - omega alpha beta) on
/// |s| <= omega, +inf outside.
double conjugate_value(const ConvexPiece& piece, double omega, double s);

/// argmin_p 1/2 (p - t_hat)^2 + sigma (omega r_plus)*(p).
double prox_p(double t_hat, double omega, const ConvexPiece& plus, double sigma);
/// argmin_q 1/2 (q - q_hat)^2 + tau (omega r_minus)*(q); r_minus has alpha = 0.
double prox_q(double q_hat, double omega, const ConvexPiece& minus, double tau);

/// Per-edge differences of every component.
std::vector<double> apply_gradient(const GridGraph& graph, std::span<const double> u,
                                   int components);
/// Adjoint of apply_gradient.
std::vector<double> apply_divergence(const GridGraph& graph, std::span<const double> edge_values,
                                     int components);

struct OperatorValue {
  std::vector<double> Au;
  double s = 0.0;  // -<Au, q>
};

OperatorValue nonlinear_op_apply(const GridGraph& graph, std::span<const double> u,
                                 std::span<const double> q, int components);

struct OperatorAdjoint {
  std::vector<double> grad_u;  // A^T p - d A^T q
  std::vector<double> grad_q;  // -d Au
};

/// [grad A(x)]^T (p, d).
OperatorAdjoint nonlinear_op_gradient_adjoint(const GridGraph& graph, std::span<const double> u,
                                              std::span<const double> q,
                                              std::span<const double> p, double d,
                                              int components);

/// grad A(x) applied to a direction (v_u, v_q): (A v_u, -<A^T q, v_u> - <Au, v_q>).
OperatorValue nonlinear_op_gradient_apply(const GridGraph& graph, std::span<const double> u,
                                          std::span<const double> q,
                                          std::span<const double> v_u,
                                          std::span<const double> v_q, int components);

/// Power-iteration estimate of the operator norm of A (the part acting on
/// the free dual variable p).
double operator_norm_estimate(const GridGraph& graph, int components, int iterations = 20);

/// Convex data model on the trust region [anchor - h, anchor + h].
class DataApprox {
 public:
  virtual ~DataApprox() = default;
  virtual int components() const = 0;
  /// Pointwise argmin_u 1/(2 tau) |u - u_hat|^2 + D~(u).
  virtual void prox(std::span<const double> u_hat, std::span<double> u, double tau) const = 0;
  /// D~(u), +inf outside the trust region.
  virtual double value(std::span<const double> u) const = 0;
};

/// Data cost of one pixel at a real-valued argument.
using DataEvaluator1D = std::function<double(std::size_t pixel, double u)>;
using DataEvaluator2D = std::function<double(std::size_t pixel, double u1, double u2)>;

class StereoApprox : public DataApprox {
 public:
  std::vector<double> anchor;
  std::vector<double> s_left;   // slope for u <= anchor
  std::vector<double> s_right;  // slope for u > anchor
  std::vector<double> base;     // D(anchor)
  double h = 0.5;
  double range_lo = -std::numeric_limits<double>::infinity();
  double range_hi = std::numeric_limits<double>::infinity();

  int components() const override { return 1; }
  void prox(std::span<const double> u_hat, std::span<double> u, double tau) const override;
  double value(std::span<const double> u) const override;
};

/// One-pixel stereo prox: soft-threshold with the two slopes, then clamp.
double prox_data_stereo(double u_hat, double anchor, double s_left, double s_right, double h,
                        double tau);

/// Two-slope model at u (anchors clamped into [lo, hi]); slopes averaged
/// where the model would be concave.
StereoApprox build_stereo_approx(const DataEvaluator1D& data, std::span<const double> u,
                                 double h, double lo, double hi,
                                 std::vector<char>* clamped = nullptr);

class FlowApprox : public DataApprox {
 public:
  std::vector<double> anchor;  // 2 * pixels, component-major
  std::vector<double> L;       // 2 * pixels, interleaved (L1, L2)
  std::vector<double> Q;       // 3 * pixels, interleaved (q11, q12, q22), PSD
  std::vector<double> base;
  double h = 0.5;
  std::array<double, 2> range_lo{-std::numeric_limits<double>::infinity(),
                                 -std::numeric_limits<double>::infinity()};
  std::array<double, 2> range_hi{std::numeric_limits<double>::infinity(),
                                 std::numeric_limits<double>::infinity()};

  int components() const override { return 2; }
  void prox(std::span<const double> u_hat, std::span<double> u, double tau) const override;
  double value(std::span<const double> u) const override;
};

/// Exact prox of the quadratic model restricted to the box anchor +- h.
std::array<double, 2> prox_data_flow(std::array<double, 2> u_hat, std::array<double, 2> anchor,
                                     std::array<double, 2> L, std::array<double, 3> Q, double h,
                                     double tau);

/// Nearest PSD matrix (eigenvalues clipped at 0) of a symmetric 2x2.
std::array<double, 3> project_psd(std::array<double, 3> q);

/// Central differences for L, second / cross differences for Q, PSD projection.
FlowApprox build_flow_approx(const DataEvaluator2D& data, std::span<const double> u, double h,
                             std::array<double, 2> lo, std::array<double, 2> hi);

struct ContinuousState {
  int components = 1;
  std::vector<double> u;
  std::vector<double> q;
  std::vector<double> p;
  double d = 1.0;
  double tau = 0.0;
  double sigma = 0.0;
  double lipschitz = 0.0;

  ContinuousState() = default;
  ContinuousState(const GridGraph& graph, std::vector<double> u_init, int components);
};

struct ContinuousProblem {
  const GridGraph* graph = nullptr;
  DCSplit split;
};

/// One primal step then one extrapolated dual step. Throws ConfigError when
/// tau * sigma * L^2 > 1.
void pd_iterate(ContinuousState& state, const ContinuousProblem& problem,
                const DataApprox& data);

/// Sets L by power iteration and tau = sigma = safety / L.
void choose_steps(ContinuousState& state, const ContinuousProblem& problem,
                  double safety = 0.95);

struct RefineOptions {
  int warps = 5;
  int iterations = 40;  // per warp
  double h = 0.5;

  void validate() const;
};

/// Warping loop for scalar fields: rebuild the two-slope model at the
/// current u, then run `iterations` primal-dual steps. Values are kept in
/// [lo, hi].
ContinuousState refine_stereo(const DataEvaluator1D& data, const ContinuousProblem& problem,
                              std::vector<double> u_init, double lo, double hi,
                              const RefineOptions& options);

ContinuousState refine_flow(const DataEvaluator2D& data, const ContinuousProblem& problem,
                            std::vector<double> u_init, std::array<double, 2> lo,
                            std::array<double, 2> hi, const RefineOptions& options);

/// sum_e w_e sum_c r((Au^c)_e).
double regularizer_value(const GridGraph& graph, const PenaltyParams& params,
                         std::span<const double> u, int components);

/// Linear interpolation of a sampled cost volume at a real label value;
/// arguments outside the label range are clamped.
double interpolate_cost(const CostVolume& volume, std::size_t pixel, double value);
/// Bilinear interpolation of a joint flow table.
double interpolate_cost(const FlowCostVolume2D& volume, std::size_t pixel, double v1, double v2);

}  // namespace dcm
