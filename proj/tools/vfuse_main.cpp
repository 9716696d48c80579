#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "vfuse/config.hpp"
#include "vfuse/error.hpp"
#include "vfuse/pipeline.hpp"

namespace {

std::vector<double> parse_sweep(const std::string& list) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= list.size()) {
    std::size_t comma = list.find(',', pos);
    std::string token =
        list.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    const char* begin = token.c_str();
    char* end = nullptr;
    double value = std::strtod(begin, &end);
    if (end == begin || *end != '\0')
      throw vfuse::ConfigError("bad --umax-sweep entry '" + token + "'");
    out.push_back(value);
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  if (out.empty()) throw vfuse::ConfigError("--umax-sweep needs at least one value");
  return out;
}

void print_eval(const vfuse::EvalReport& report) {
  std::cout << "accuracy_rmse=" << report.accuracy_rmse
            << " completeness_rmse=" << report.completeness_rmse
            << " accuracy_inliers=" << report.accuracy_inliers
            << " completeness_inliers=" << report.completeness_inliers << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"synthetic dense reconstruction pipeline"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path, out_dir, weight_mode, filter, umax_sweep, dump_hessian;
  std::uint64_t seed = 0;
  double umax = 0.0;
  bool binary_ply = false;

  auto* opt_config = app.add_option("--config", config_path, "configuration file (INI)");
  auto* opt_seed = app.add_option("--seed", seed, "override the RNG seed");
  auto* opt_out = app.add_option("--out", out_dir, "override the output directory");
  auto* opt_umax = app.add_option("--umax", umax, "override the mesh uncertainty bound");
  auto* opt_sweep = app.add_option("--umax-sweep", umax_sweep,
                                   "comma-separated bounds, e.g. inf,1.0,0.1,0.01");
  auto* opt_mode = app.add_option("--weight-mode", weight_mode,
                                  "fusion weights: inv-sigma|inv-var|constant");
  auto* opt_filter = app.add_option("--filter", filter, "depth cleanup: none|droid");
  auto* opt_dump = app.add_option("--dump-hessian", dump_hessian,
                                  "write the converged system to this file (solve)");
  auto* opt_binary = app.add_flag("--binary-ply", binary_ply, "write binary PLY meshes");

  auto* cmd_synth = app.add_subcommand("synth", "generate the scene, graph, and ground truth");
  auto* cmd_solve = app.add_subcommand("solve", "optimize and export depth with uncertainty");
  auto* cmd_fuse = app.add_subcommand("fuse", "integrate depth maps into a TSDF volume");
  auto* cmd_mesh = app.add_subcommand("mesh", "extract uncertainty-masked meshes");
  auto* cmd_eval = app.add_subcommand("eval", "compare the mesh against ground truth");
  auto* cmd_pipeline = app.add_subcommand("pipeline", "run every stage in order");
  auto* cmd_dump = app.add_subcommand("dump-config", "print the resolved configuration");

  CLI11_PARSE(app, argc, argv);

  try {
    vfuse::PipelineConfig config;
    if (opt_config->count() > 0) config = vfuse::parse_config(config_path);
    if (opt_seed->count() > 0) config.seed = seed;
    if (opt_out->count() > 0) config.out = out_dir;
    if (opt_umax->count() > 0) config.umax = umax;
    if (opt_mode->count() > 0) config.weight_mode = vfuse::parse_weight_mode(weight_mode);
    if (opt_filter->count() > 0) config.filter = vfuse::parse_depth_filter(filter);
    if (opt_binary->count() > 0) config.binary_ply = binary_ply;
    config.validate();

    std::vector<double> sweep;
    if (opt_sweep->count() > 0) sweep = parse_sweep(umax_sweep);

    if (cmd_dump->parsed()) {
      std::cout << vfuse::config_text(config);
      return 0;
    }
    if (cmd_synth->parsed()) {
      vfuse::run_synth(config);
      std::cout << "wrote " << config.out << "/graph.bin\n";
      return 0;
    }
    if (cmd_solve->parsed()) {
      vfuse::SolveSummary summary = vfuse::run_solve(config, dump_hessian);
      std::cout << "iterations=" << summary.report.iterations
                << " final_cost=" << summary.report.final_cost
                << " mean_depth_sigma=" << summary.mean_depth_sigma << "\n";
      return 0;
    }
    if (cmd_fuse->parsed()) {
      vfuse::run_fuse(config);
      std::cout << "wrote " << config.out << "/volume.tsdf\n";
      return 0;
    }
    if (cmd_mesh->parsed()) {
      for (const vfuse::MeshSummary& m : vfuse::run_mesh(config, sweep))
        std::cout << m.path << ": vertices=" << m.vertices << " triangles=" << m.triangles
                  << "\n";
      return 0;
    }
    if (cmd_eval->parsed()) {
      print_eval(vfuse::run_eval(config));
      return 0;
    }
    if (cmd_pipeline->parsed()) {
      vfuse::run_synth(config);
      vfuse::SolveSummary summary = vfuse::run_solve(config, dump_hessian);
      std::cout << "solve: iterations=" << summary.report.iterations
                << " final_cost=" << summary.report.final_cost << "\n";
      vfuse::run_fuse(config);
      for (const vfuse::MeshSummary& m : vfuse::run_mesh(config, sweep))
        std::cout << m.path << ": triangles=" << m.triangles << "\n";
      print_eval(vfuse::run_eval(config));
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
