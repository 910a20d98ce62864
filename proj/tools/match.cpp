// match: dense stereo / optical flow by dual decomposition plus continuous
// refinement, and the solver convergence benchmark.

#include <CLI11.hpp>

#include <iostream>

#include "dcm/errors.hpp"
#include "dcm/pipeline.hpp"

namespace {

void add_model_options(CLI::App* cmd, dcm::RunConfig& c) {
  cmd->add_option("--eps", c.penalty.epsilon, "penalty slope near zero")->capture_default_str();
  cmd->add_option("--delta", c.penalty.delta, "end of the shallow segment")->capture_default_str();
  cmd->add_option("--trunc", c.penalty.trunc, "truncation value")->capture_default_str();
  cmd->add_option("--window", c.window, "census window (3, 5, 7)")->capture_default_str();
  cmd->add_option("--lambda", c.lambda, "regularizer weight")->capture_default_str();
  cmd->add_option("--edge-a", c.edge_a, "edge weight contrast scale")->capture_default_str();
  cmd->add_option("--edge-b", c.edge_b, "edge weight contrast exponent")->capture_default_str();
  cmd->add_option("--edge-min", c.edge_min, "edge weight floor")->capture_default_str();
}

void add_solver_options(CLI::App* cmd, dcm::RunConfig& c, std::string& minorant,
                        std::string& subpixel) {
  cmd->add_option("--minorant", minorant, "naive | uniform | iterative | hierarchical")
      ->capture_default_str();
  cmd->add_option("--dmm-iters", c.dmm_iters, "discrete iterations")->capture_default_str();
  cmd->add_option("--warps", c.warps, "continuous warps")->capture_default_str();
  cmd->add_option("--pd-iters", c.pd_iters, "primal-dual iterations per warp")
      ->capture_default_str();
  cmd->add_option("--h", c.h, "trust radius")->capture_default_str();
  cmd->add_option("--subpixel", subpixel, "continuous data term: warp | interpolate")
      ->capture_default_str();
}

void add_output_options(CLI::App* cmd, dcm::RunConfig& c, bool& no_timing) {
  cmd->add_option("--out", c.out, "result file (.pfm for stereo, .flo for flow)");
  cmd->add_option("--color", c.color, "false-color preview (.ppm)");
  cmd->add_option("--log", c.log, "convergence CSV");
  cmd->add_flag("--no-timing", no_timing, "write 0 in the millis column");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dense matching by dual decomposition and continuous refinement"};
  app.require_subcommand(1);
  // -h would clash with the trust radius option --h.
  app.set_help_flag("--help", "print this help message and exit");

  dcm::RunConfig stereo, flow, bench;
  std::string minorant_s = "hierarchical", minorant_f = "hierarchical";
  std::string subpixel_s = "warp", subpixel_f = "warp";
  bool no_timing_s = false, no_timing_f = false, no_timing_b = false;

  auto* cs = app.add_subcommand("stereo", "disparity from a rectified pair");
  cs->add_option("--left", stereo.first, "left image (PGM/PPM)")->required();
  cs->add_option("--right", stereo.second, "right image (PGM/PPM)")->required();
  cs->add_option("--dmin", stereo.dmin, "smallest disparity")->capture_default_str();
  cs->add_option("--dmax", stereo.dmax, "largest disparity")->capture_default_str();
  cs->add_flag("--lr-check", stereo.lr_check, "invalidate inconsistent pixels");
  cs->add_option("--lr-threshold", stereo.lr_threshold, "consistency tolerance in pixels")
      ->capture_default_str();
  add_model_options(cs, stereo);
  add_solver_options(cs, stereo, minorant_s, subpixel_s);
  add_output_options(cs, stereo, no_timing_s);

  auto* cf = app.add_subcommand("flow", "optical flow between two frames");
  cf->add_option("--first", flow.first, "first frame (PGM/PPM)")->required();
  cf->add_option("--second", flow.second, "second frame (PGM/PPM)")->required();
  cf->add_option("--umin", flow.flow_min[0], "smallest horizontal flow")->capture_default_str();
  cf->add_option("--umax", flow.flow_max[0], "largest horizontal flow")->capture_default_str();
  cf->add_option("--vmin", flow.flow_min[1], "smallest vertical flow")->capture_default_str();
  cf->add_option("--vmax", flow.flow_max[1], "largest vertical flow")->capture_default_str();
  add_model_options(cf, flow);
  add_solver_options(cf, flow, minorant_f, subpixel_f);
  add_output_options(cf, flow, no_timing_f);

  auto* cb = app.add_subcommand("bench", "lower bound / primal convergence of all solvers");
  std::vector<int> crop;
  cb->add_option("--left", bench.first, "left image; omit for the built-in synthetic crop");
  cb->add_option("--right", bench.second, "right image");
  cb->add_option("--crop", crop, "x,y,width,height")->delimiter(',')->expected(4);
  cb->add_option("--dmin", bench.dmin, "smallest disparity")->capture_default_str();
  cb->add_option("--labels", bench.bench_labels, "number of disparities")->capture_default_str();
  cb->add_option("--trunc", bench.bench_trunc, "truncated-linear cap")->capture_default_str();
  cb->add_option("--iters", bench.bench_iters, "iterations per solver")->capture_default_str();
  cb->add_option("--window", bench.window, "census window")->capture_default_str();
  cb->add_option("--lambda", bench.lambda, "regularizer weight")->capture_default_str();
  cb->add_option("--log", bench.log, "CSV output (stdout when omitted)");
  cb->add_flag("--no-timing", no_timing_b, "write 0 in the millis column");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (cs->parsed()) {
      stereo.minorant = dcm::minorant_kind_from_string(minorant_s);
      stereo.subpixel = dcm::subpixel_data_from_string(subpixel_s);
      stereo.timing = !no_timing_s;
      return dcm::run_stereo(stereo);
    }
    if (cf->parsed()) {
      flow.minorant = dcm::minorant_kind_from_string(minorant_f);
      flow.subpixel = dcm::subpixel_data_from_string(subpixel_f);
      flow.timing = !no_timing_f;
      return dcm::run_flow(flow);
    }
    if (!bench.first.empty() && bench.second.empty()) {
      throw dcm::ArgumentError("--left needs --right");
    }
    if (!crop.empty()) bench.crop = std::array<int, 4>{crop[0], crop[1], crop[2], crop[3]};
    bench.timing = !no_timing_b;
    return dcm::run_bench(bench);
  } catch (const dcm::ArgumentError& e) {
    std::cerr << "match: " << e.what() << "\n";
    return 1;
  }
}
