#include <filesystem>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "corridor_depth/pipeline.hpp"

namespace {

std::vector<double> parse_caps(const std::string& text) {
  std::vector<double> caps;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      caps.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw corridor::Error(corridor::ErrorCode::invalid_argument, "bad cap '" + item + "'");
    }
  }
  if (caps.empty()) throw corridor::Error(corridor::ErrorCode::invalid_argument, "no caps given");
  return caps;
}

corridor::PitchResidual residual_from(const std::string& s) {
  return s == "summed-width" ? corridor::PitchResidual::summed_width : corridor::PitchResidual::width_variance;
}

corridor::IpmVariant ipm_from(const std::string& s) {
  if (s == "small-pitch") return corridor::IpmVariant::small_pitch;
  if (s == "literal") return corridor::IpmVariant::literal;
  return corridor::IpmVariant::exact;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monocular corridor depth from floor edge lines"};
  app.require_subcommand(1);

  corridor::EstimateArgs est;
  std::string residual = "width-variance";
  std::string ipm = "exact";
  auto* estimate = app.add_subcommand("estimate", "Depth map from one image, or every image in a directory");
  estimate->add_option("--image", est.image, "Input image or directory")->required();
  estimate->add_option("--config", est.config, "Camera and search configuration")->required()->check(CLI::ExistingFile);
  estimate->add_option("--out", est.out, "Depth PNG, or output directory for a directory input")->required();
  estimate->add_option("--debug-dir", est.debug_dir, "Overlay, edge mask and residual CSV");
  estimate->add_option("--pitch-residual", residual, "width-variance or summed-width")
      ->check(CLI::IsMember({"width-variance", "summed-width"}));
  estimate->add_option("--ipm", ipm, "exact, small-pitch or literal")->check(CLI::IsMember({"exact", "small-pitch", "literal"}));

  std::string spec, synth_out;
  std::uint64_t seed = 0;
  auto* synth = app.add_subcommand("synth", "Render synthetic corridors with ground-truth depth");
  synth->add_option("--spec", spec, "Scene spec")->required()->check(CLI::ExistingFile);
  synth->add_option("--out-dir", synth_out, "Output directory")->required();
  synth->add_option("--seed", seed, "Noise seed of the first scene");

  std::string pred, truth, caps_text = "5,40", eval_out;
  auto* eval = app.add_subcommand("eval", "Depth metrics over matching files of two directories");
  eval->add_option("--pred", pred, "Predicted depth PNGs")->required();
  eval->add_option("--truth", truth, "Ground-truth depth PNGs")->required();
  eval->add_option("--caps", caps_text, "Comma-separated depth caps in meters");
  eval->add_option("--out", eval_out, "Metrics CSV")->required();

  std::string grid, sweep_config, sweep_out;
  auto* sweep = app.add_subcommand("sweep", "Synthesize, estimate and evaluate a scene grid");
  sweep->add_option("--grid", grid, "Scene spec with list values")->required()->check(CLI::ExistingFile);
  sweep->add_option("--config", sweep_config, "Search configuration")->required()->check(CLI::ExistingFile);
  sweep->add_option("--out", sweep_out, "Result CSV")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*estimate) {
      est.options.pitch.residual = residual_from(residual);
      est.options.pitch.ipm = ipm_from(ipm);
      if (std::filesystem::is_directory(est.image)) {
        int status = 0;
        for (const auto& o : corridor::run_estimate_stream(est)) {
          if (o.frame) {
            std::cout << o.name << ": ok, " << o.frame->timings.total_ms << " ms\n";
          } else {
            std::cerr << o.name << ": " << o.error << '\n';
            if (status == 0) status = o.exit_code;
          }
        }
        return status;
      }
      const auto frame = corridor::run_estimate(est);
      const auto& r = frame.result;
      std::cout << "yaw " << r.pose.pose.yaw_rad << " rad, tau " << r.pose.pose.tau << ", pitch " << r.pitch.theta_p
                << " rad, width " << r.pitch.width_m << " m, " << r.planes.count() << " planes, "
                << frame.timings.total_ms << " ms\n";
    } else if (*synth) {
      for (const auto& o : corridor::run_synth(spec, synth_out, seed)) std::cout << o.id << ' ' << o.image << '\n';
    } else if (*eval) {
      const auto rows = corridor::run_eval(pred, truth, parse_caps(caps_text), eval_out);
      for (const auto& r : rows) {
        if (!r.metrics) std::cerr << r.scene << " @" << r.cap_m << " m: " << r.error << '\n';
      }
      std::cout << rows.size() << " rows written to " << eval_out << '\n';
    } else if (*sweep) {
      const auto rows = corridor::run_sweep(grid, sweep_config, sweep_out);
      for (const auto& r : rows) {
        if (!r.error.empty()) std::cerr << r.scene.id << ": " << r.error << '\n';
      }
      std::cout << rows.size() << " rows written to " << sweep_out << '\n';
    }
  } catch (const corridor::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return corridor::exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
