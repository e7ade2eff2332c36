#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "corridor_depth/depth_recovery.hpp"
#include "corridor_depth/edge_extraction.hpp"
#include "corridor_depth/error.hpp"
#include "corridor_depth/evaluation.hpp"
#include "corridor_depth/scene_model.hpp"
#include "corridor_depth/synthetic_corridor.hpp"
#include "corridor_depth/virtual_camera.hpp"

namespace corridor {

struct StageTimings {
  double extraction_ms = 0.0;
  double pose_ms = 0.0;
  double pitch_ms = 0.0;  // includes the projection of the edges into the virtual view
  double planes_ms = 0.0;
  double interpolation_ms = 0.0;
  double total_ms = 0.0;
};

struct RecoverOptions {
  PitchOptions pitch;
  double max_range_m = 40.0;
};

struct DepthResult {
  PoseEstimate pose;
  VirtualEdgePoints points;
  PitchEstimate pitch;
  DepthPlaneSet planes;
  DepthMap depth;
  StageTimings timings;  // extraction and total left at zero
};

/// Second stage: edge pair and configuration in, dense depth out. Never sees pixels.
DepthResult recover_depth(const EdgeLinePair& pair, const Config& config, const RecoverOptions& options = {});

struct FrameResult {
  EdgeExtraction edges;
  DepthResult result;
  StageTimings timings;
};

/// An Error tagged with the pipeline stage that raised it.
class StageError : public Error {
 public:
  StageError(std::string stage, const Error& cause)
      : Error(cause.code(), stage + " stage: " + cause.what()), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

/// Both stages on one frame. Throws StageError.
FrameResult run_frame(const GrayImage& image, const Config& config, const RecoverOptions& options = {},
                      const EdgeParams& edge_params = {});

/// 2 edge-pair-not-found, 3 pose-estimation-failed, 4 pitch-estimation-failed, 1 otherwise.
int exit_code(ErrorCode code);

/// Report fields; timings are omitted when with_timings is false.
std::string frame_report_json(const FrameResult& frame, const std::string& image_path, const std::string& depth_path,
                              bool with_timings = true);

struct EstimateArgs {
  std::string image;       // file, or a directory for streaming mode
  std::string config;
  std::string out;         // depth PNG, or output directory in streaming mode
  std::string debug_dir;   // optional
  RecoverOptions options;
};

/// Writes the depth PNG and a JSON report next to it (same stem, .json).
FrameResult run_estimate(const EstimateArgs& args);

struct StreamOutcome {
  std::string name;
  std::optional<FrameResult> frame;
  std::string error;
  int exit_code = 0;
};

/// Every image of a directory, in name order. Extraction of frame i + 1 runs
/// on a second thread while frame i goes through depth recovery.
std::vector<StreamOutcome> run_estimate_stream(const EstimateArgs& args, std::size_t queue_capacity = 4);

struct SynthOutput {
  std::string id;
  std::string image;
  std::string depth;
  std::string manifest;
};

/// images/<id>.png, depth/<id>.png and manifests/<id>.json under out_dir.
std::vector<SynthOutput> run_synth(const std::string& spec_path, const std::string& out_dir, std::uint64_t seed = 0);

/// Pairs files by stem across the two directories. Throws Error(io) naming
/// every unmatched stem.
std::vector<EvalRow> run_eval(const std::string& pred_dir, const std::string& truth_dir, const std::vector<double>& caps,
                              const std::string& out_csv);

struct SweepRow {
  SceneCase scene;
  std::optional<FrameResult> frame;
  double width_err = 0.0;
  std::optional<MetricsReport> near;  // cap 5 m
  std::optional<MetricsReport> far;   // cap 40 m
  std::string error;
};

/// Render, estimate and evaluate one scene. Camera and image come from the
/// scene; search settings from `config`.
SweepRow sweep_case(const SceneCase& scene, const Config& config, const RecoverOptions& options = {});

std::vector<SweepRow> run_sweep(const std::string& grid_path, const std::string& config_path, const std::string& out_csv);

std::string sweep_csv(const std::vector<SweepRow>& rows);

}  // namespace corridor
