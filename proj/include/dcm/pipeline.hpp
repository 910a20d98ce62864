#pragma once

// Stereo / flow pipelines (discrete solve, then continuous refinement),
// convergence benchmark, and their file-level entry points.

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "dcm/census.hpp"
#include "dcm/dual_solvers.hpp"

namespace dcm {

enum class SubpixelData { warp, interpolate };

const char* to_string(SubpixelData mode);
SubpixelData subpixel_data_from_string(const std::string& name);

struct RunConfig {
  std::string first;   // left image / first frame
  std::string second;  // right image / second frame

  int dmin = 0;
  int dmax = 63;
  std::array<int, 2> flow_min{-8, -8};
  std::array<int, 2> flow_max{8, 8};

  PenaltyParams penalty{0.25, 2.0, 4.0};
  int window = 5;
  double lambda = 6.0;  // global regularizer weight
  double edge_a = 8.0;
  double edge_b = 1.0;
  double edge_min = 0.2;

  int dmm_iters = 4;
  MinorantKind minorant = MinorantKind::hierarchical;
  int warps = 5;
  int pd_iters = 40;
  double h = 0.5;
  SubpixelData subpixel = SubpixelData::warp;

  bool lr_check = false;
  double lr_threshold = 1.0;

  std::string out;    // .pfm or .flo
  std::string color;  // .ppm
  std::string log;    // .csv
  bool timing = true;  // false: millis column written as 0

  // bench
  int bench_iters = 20;
  int bench_labels = 16;
  double bench_trunc = 4.0;
  std::optional<std::array<int, 4>> crop;  // x, y, width, height

  void validate_stereo() const;
  void validate_flow() const;
  void validate_bench() const;
};

struct LogRow {
  std::string solver;
  int iter = 0;
  double lower_bound = 0.0;  // NaN when the solver has none
  double primal_energy = 0.0;
  double millis = 0.0;
};

/// Header `solver,iter,lower_bound,primal_energy,millis`, one line per row.
std::string format_log(const std::vector<LogRow>& rows, bool timing);
void append_log(std::vector<LogRow>& rows, const std::string& solver, const SolveResult& result);

/// Regularizer weights lambda * max(w_min, exp(-a |dI|^b)).
GridGraph weighted_graph(const Image& gray, const RunConfig& config);

struct StereoOutput {
  Image discrete;  // label values of the discrete solution
  Image refined;   // continuous result, -inf where the LR check failed
  std::vector<LogRow> log;
};

/// Single view: left disparities for a grayscale pair.
StereoOutput stereo_view(const Image& left, const Image& right, const RunConfig& config);
/// Both views plus the optional consistency check.
StereoOutput stereo_pipeline(const Image& left, const Image& right, const RunConfig& config);

/// Pixels whose disparity disagrees with the right view by more than the
/// threshold become -inf; others are unchanged.
Image left_right_check(const Image& left_disp, const Image& right_disp, double threshold);

struct FlowOutput {
  Image discrete;  // two channels
  Image refined;
  std::vector<LogRow> log;
};

FlowOutput flow_pipeline(const Image& first, const Image& second, const RunConfig& config);

/// Built-in synthetic crop or the configured images, as a discrete problem
/// with truncated-linear regularization.
DiscreteProblem bench_problem(const RunConfig& config);
/// TRW-S and DMM with every minorant for the same iteration budget.
std::vector<LogRow> bench_pipeline(const DiscreteProblem& problem, const RunConfig& config);

/// File-level entry points. Return 0 on success, 1 on bad arguments,
/// 2 on I/O problems, 3 on numerical failure; diagnostics go to stderr.
int run_stereo(const RunConfig& config);
int run_flow(const RunConfig& config);
int run_bench(const RunConfig& config);

}  // namespace dcm
