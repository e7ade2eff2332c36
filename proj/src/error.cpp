#include "corridor_depth/error.hpp"

namespace corridor {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_config: return "invalid-config";
    case ErrorCode::io: return "io-error";
    case ErrorCode::edge_pair_not_found: return "edge-pair-not-found";
    case ErrorCode::projection_singular: return "projection-singular";
    case ErrorCode::degenerate_line: return "degenerate-line";
    case ErrorCode::pose_estimation_failed: return "pose-estimation-failed";
    case ErrorCode::horizon_below_image: return "horizon-below-image";
    case ErrorCode::point_beyond_horizon: return "point-beyond-horizon";
    case ErrorCode::pitch_estimation_failed: return "pitch-estimation-failed";
    case ErrorCode::plane_ordering_violated: return "plane-ordering-violated";
    case ErrorCode::scene_not_visible: return "scene-not-visible";
    case ErrorCode::no_overlap: return "no-overlap";
    case ErrorCode::invalid_argument: return "invalid-argument";
  }
  return "unknown";
}

}  // namespace corridor
