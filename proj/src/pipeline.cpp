#include "dcm/pipeline.hpp"

#include <cmath>
#include <cstdio>
#include <iostream>
#include <limits>

#include "dcm/continuous_pd.hpp"
#include "dcm/errors.hpp"
#include "dcm/image_io.hpp"
#include "dcm/synthetic.hpp"

namespace dcm {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::vector<double> label_range(int lo, int hi) {
  std::vector<double> v;
  for (int d = lo; d <= hi; ++d) v.push_back(d);
  return v;
}

Image mirror(const Image& img) {
  Image out(img.width, img.height, img.channels);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      for (int c = 0; c < img.channels; ++c) out.at(x, y, c) = img.at(img.width - 1 - x, y, c);
    }
  }
  return out;
}

void validate_common(const RunConfig& c) {
  c.penalty.validate();
  if (c.window < 3 || c.window > 7 || c.window % 2 == 0) {
    throw ArgumentError("window must be 3, 5 or 7");
  }
  if (!(c.lambda >= 0.0) || !(c.edge_a >= 0.0) || !(c.edge_b > 0.0) || !(c.edge_min >= 0.0)) {
    throw ArgumentError("edge weight parameters out of range");
  }
}

void validate_refine(const RunConfig& c) {
  if (c.dmm_iters < 1) throw ArgumentError("dmm-iters must be >= 1");
  RefineOptions{c.warps, c.pd_iters, c.h}.validate();
}

SolverConfig discrete_config(const RunConfig& c) {
  SolverConfig s;
  s.kind = SolverKind::dmm;
  s.iterations = c.dmm_iters;
  s.minorant.kind = c.minorant;
  return s;
}

std::string number(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

Image crop_image(const Image& img, const std::array<int, 4>& r) {
  if (r[0] < 0 || r[1] < 0 || r[2] < 1 || r[3] < 1 || r[0] + r[2] > img.width ||
      r[1] + r[3] > img.height) {
    throw ArgumentError("crop rectangle outside the image");
  }
  Image out(r[2], r[3], img.channels);
  for (int y = 0; y < r[3]; ++y) {
    for (int x = 0; x < r[2]; ++x) {
      for (int c = 0; c < img.channels; ++c) out.at(x, y, c) = img.at(r[0] + x, r[1] + y, c);
    }
  }
  return out;
}

std::pair<Image, Image> read_pair(const RunConfig& c) {
  Image a = to_gray(read_image(c.first));
  Image b = to_gray(read_image(c.second));
  if (a.width != b.width || a.height != b.height) {
    throw IoError("input images differ in size (" + std::to_string(a.width) + "x" +
                  std::to_string(a.height) + " vs " + std::to_string(b.width) + "x" +
                  std::to_string(b.height) + ")");
  }
  return {std::move(a), std::move(b)};
}

void write_log_file(const RunConfig& c, const std::vector<LogRow>& rows) {
  if (!c.log.empty()) write_file(c.log, format_log(rows, c.timing));
}

bool all_finite_or_masked(const Image& img) {
  for (float v : img.data) {
    if (std::isnan(v)) return false;
  }
  return true;
}

template <class Fn>
int guarded(const char* what, Fn&& fn) {
  try {
    fn();
    return 0;
  } catch (const IoError& e) {
    std::cerr << "match " << what << ": " << e.what() << "\n";
    return 2;
  } catch (const ArgumentError& e) {
    std::cerr << "match " << what << ": " << e.what() << "\n";
    return 1;
  } catch (const DimensionError& e) {
    std::cerr << "match " << what << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "match " << what << ": numerical failure: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace

const char* to_string(SubpixelData mode) {
  return mode == SubpixelData::warp ? "warp" : "interpolate";
}

SubpixelData subpixel_data_from_string(const std::string& name) {
  if (name == "warp") return SubpixelData::warp;
  if (name == "interpolate") return SubpixelData::interpolate;
  throw ArgumentError("unknown subpixel data mode '" + name + "'");
}

void RunConfig::validate_stereo() const {
  validate_common(*this);
  validate_refine(*this);
  if (dmax < dmin) throw ArgumentError("empty disparity range");
  if (!(lr_threshold >= 0.0)) throw ArgumentError("lr threshold must be >= 0");
}

void RunConfig::validate_flow() const {
  validate_common(*this);
  validate_refine(*this);
  for (int c = 0; c < 2; ++c) {
    if (flow_max[c] < flow_min[c]) throw ArgumentError("empty flow range");
  }
}

void RunConfig::validate_bench() const {
  validate_common(*this);
  if (bench_iters < 1) throw ArgumentError("bench needs at least one iteration");
  if (bench_labels < 2) throw ArgumentError("bench needs at least two labels");
  if (!(bench_trunc > 0.0)) throw ArgumentError("bench truncation must be > 0");
}

std::string format_log(const std::vector<LogRow>& rows, bool timing) {
  std::string out = "solver,iter,lower_bound,primal_energy,millis\n";
  for (const LogRow& r : rows) {
    out += r.solver + "," + std::to_string(r.iter) + "," + number(r.lower_bound) + "," +
           number(r.primal_energy) + "," + (timing ? number(r.millis) : "0") + "\n";
  }
  return out;
}

void append_log(std::vector<LogRow>& rows, const std::string& solver, const SolveResult& result) {
  for (const IterationRecord& r : result.records) {
    rows.push_back({solver, r.iteration, r.lower_bound, r.primal_energy, r.millis});
  }
}

GridGraph weighted_graph(const Image& gray, const RunConfig& config) {
  GridGraph g = build_grid_graph(gray.width, gray.height);
  g.weights = edge_weights(gray, g, config.edge_a, config.edge_b, config.edge_min);
  for (double& w : g.weights) w *= config.lambda;
  return g;
}

StereoOutput stereo_view(const Image& left_in, const Image& right_in, const RunConfig& config) {
  config.validate_stereo();
  const Image left = to_gray(left_in), right = to_gray(right_in);
  if (left.width != right.width || left.height != right.height) {
    throw DimensionError("stereo images differ in size");
  }
  const CensusField cl = census_transform(left, config.window);
  const CensusField cr = census_transform(right, config.window);
  const DiscreteProblem problem(hamming_cost_volume(cl, cr, label_range(config.dmin, config.dmax)),
                                weighted_graph(left, config), config.penalty);

  const SolverConfig sc = discrete_config(config);
  const SolveResult discrete = solve(problem, sc);

  StereoOutput out;
  append_log(out.log, solver_label(sc), discrete);
  out.discrete = Image(left.width, left.height, 1);
  std::vector<double> u(left.num_pixels());
  for (std::size_t i = 0; i < u.size(); ++i) {
    u[i] = problem.volume.label_values[discrete.labeling[i]];
    out.discrete.data[i] = static_cast<float>(u[i]);
  }

  DataEvaluator1D data;
  if (config.subpixel == SubpixelData::warp) {
    data = warped_stereo_cost(cl, right);
  } else {
    data = [&problem](std::size_t i, double v) { return interpolate_cost(problem.volume, i, v); };
  }
  const ContinuousProblem cp{&problem.graph, dc_decompose(config.penalty)};
  const ContinuousState state = refine_stereo(data, cp, std::move(u), config.dmin, config.dmax,
                                              {config.warps, config.pd_iters, config.h});
  out.refined = Image(left.width, left.height, 1);
  for (std::size_t i = 0; i < state.u.size(); ++i) out.refined.data[i] = static_cast<float>(state.u[i]);
  return out;
}

Image left_right_check(const Image& left_disp, const Image& right_disp, double threshold) {
  if (left_disp.width != right_disp.width || left_disp.height != right_disp.height) {
    throw DimensionError("disparity maps differ in size");
  }
  Image out = left_disp;
  for (int y = 0; y < out.height; ++y) {
    for (int x = 0; x < out.width; ++x) {
      const float d = left_disp.at(x, y);
      if (!std::isfinite(d)) continue;
      const long xr = std::lround(x - static_cast<double>(d));
      bool ok = xr >= 0 && xr < out.width;
      if (ok) {
        const float dr = right_disp.at(static_cast<int>(xr), y);
        ok = std::isfinite(dr) && std::abs(static_cast<double>(d) - dr) <= threshold;
      }
      if (!ok) out.at(x, y) = static_cast<float>(kNegInf);
    }
  }
  return out;
}

StereoOutput stereo_pipeline(const Image& left, const Image& right, const RunConfig& config) {
  StereoOutput out = stereo_view(left, right, config);
  if (config.lr_check) {
    // The right view is the left view of the mirrored, swapped pair.
    const StereoOutput rv = stereo_view(mirror(to_gray(right)), mirror(to_gray(left)), config);
    out.refined = left_right_check(out.refined, mirror(rv.refined), config.lr_threshold);
  }
  return out;
}

FlowOutput flow_pipeline(const Image& first_in, const Image& second_in, const RunConfig& config) {
  config.validate_flow();
  const Image first = to_gray(first_in), second = to_gray(second_in);
  if (first.width != second.width || first.height != second.height) {
    throw DimensionError("flow frames differ in size");
  }
  const CensusField c1 = census_transform(first, config.window);
  const CensusField c2 = census_transform(second, config.window);
  const FlowCostVolume2D volume =
      flow_cost_volume(c1, c2, label_range(config.flow_min[0], config.flow_max[0]),
                       label_range(config.flow_min[1], config.flow_max[1]));
  auto [vol1, vol2] = decouple_flow_costs(volume);
  const GridGraph graph = weighted_graph(first, config);
  const SolverConfig sc = discrete_config(config);

  FlowOutput out;
  const std::size_t n = first.num_pixels();
  std::vector<double> u(2 * n);
  out.discrete = Image(first.width, first.height, 2);
  int component = 0;
  for (CostVolume* vol : {&vol1, &vol2}) {
    const DiscreteProblem problem(std::move(*vol), graph, config.penalty);
    const SolveResult r = solve(problem, sc);
    append_log(out.log, solver_label(sc) + (component == 0 ? "-u" : "-v"), r);
    for (std::size_t i = 0; i < n; ++i) {
      u[component * n + i] = problem.volume.label_values[r.labeling[i]];
      out.discrete.data[2 * i + component] = static_cast<float>(u[component * n + i]);
    }
    ++component;
  }

  DataEvaluator2D data;
  if (config.subpixel == SubpixelData::warp) {
    data = warped_flow_cost(c1, second);
  } else {
    data = [&volume](std::size_t i, double a, double b) { return interpolate_cost(volume, i, a, b); };
  }
  const ContinuousProblem cp{&graph, dc_decompose(config.penalty)};
  const ContinuousState state =
      refine_flow(data, cp, std::move(u), {double(config.flow_min[0]), double(config.flow_min[1])},
                  {double(config.flow_max[0]), double(config.flow_max[1])},
                  {config.warps, config.pd_iters, config.h});
  out.refined = Image(first.width, first.height, 2);
  for (std::size_t i = 0; i < n; ++i) {
    out.refined.data[2 * i] = static_cast<float>(state.u[i]);
    out.refined.data[2 * i + 1] = static_cast<float>(state.u[n + i]);
  }
  return out;
}

DiscreteProblem bench_problem(const RunConfig& config) {
  config.validate_bench();
  Image left, right;
  int dmin = 0;
  if (config.first.empty()) {
    // 40x40 slanted background with a box in front; disparities 2..13.
    const StereoScene s = render_box_scene(40, 40, 0.1, 2.0, 12.0, {12, 28, 10, 30}, 7);
    left = s.left;
    right = s.right;
  } else {
    std::tie(left, right) = read_pair(config);
    dmin = config.dmin;
  }
  if (config.crop) {
    left = crop_image(left, *config.crop);
    right = crop_image(right, *config.crop);
  }
  const CensusField cl = census_transform(left, config.window);
  const CensusField cr = census_transform(right, config.window);
  return DiscreteProblem(
      hamming_cost_volume(cl, cr, label_range(dmin, dmin + config.bench_labels - 1)),
      weighted_graph(left, config), PenaltyParams::truncated_linear(config.bench_trunc));
}

std::vector<LogRow> bench_pipeline(const DiscreteProblem& problem, const RunConfig& config) {
  config.validate_bench();
  std::vector<SolverConfig> solvers;
  SolverConfig trws;
  trws.kind = SolverKind::trws;
  solvers.push_back(trws);
  for (MinorantKind k : {MinorantKind::naive, MinorantKind::uniform, MinorantKind::iterative,
                         MinorantKind::hierarchical}) {
    SolverConfig s;
    s.kind = SolverKind::dmm;
    s.minorant.kind = k;
    solvers.push_back(s);
  }
  std::vector<LogRow> rows;
  for (SolverConfig& s : solvers) {
    s.iterations = config.bench_iters;
    append_log(rows, solver_label(s), solve(problem, s));
  }
  return rows;
}

int run_stereo(const RunConfig& config) {
  return guarded("stereo", [&] {
    config.validate_stereo();
    const auto [left, right] = read_pair(config);
    const StereoOutput out = stereo_pipeline(left, right, config);
    if (!all_finite_or_masked(out.refined)) throw ConvergenceError("disparity contains NaN", 0.0);
    if (!config.out.empty()) write_pfm(config.out, out.refined);
    if (!config.color.empty()) {
      write_pnm(config.color, colorize_disparity(out.refined, config.dmin, config.dmax));
    }
    write_log_file(config, out.log);
  });
}

int run_flow(const RunConfig& config) {
  return guarded("flow", [&] {
    config.validate_flow();
    const auto [first, second] = read_pair(config);
    const FlowOutput out = flow_pipeline(first, second, config);
    if (!all_finite_or_masked(out.refined)) throw ConvergenceError("flow contains NaN", 0.0);
    if (!config.out.empty()) write_flo(config.out, out.refined);
    if (!config.color.empty()) write_pnm(config.color, colorize_flow(out.refined));
    write_log_file(config, out.log);
  });
}

int run_bench(const RunConfig& config) {
  return guarded("bench", [&] {
    const DiscreteProblem problem = bench_problem(config);
    const std::vector<LogRow> rows = bench_pipeline(problem, config);
    if (config.log.empty()) {
      std::cout << format_log(rows, config.timing);
    } else {
      write_log_file(config, rows);
    }
  });
}

}  // namespace dcm
