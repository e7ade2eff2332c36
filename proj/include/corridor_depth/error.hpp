#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace corridor {

enum class ErrorCode {
  invalid_config,
  io,
  edge_pair_not_found,
  projection_singular,
  degenerate_line,
  pose_estimation_failed,
  horizon_below_image,
  point_beyond_horizon,
  pitch_estimation_failed,
  plane_ordering_violated,
  scene_not_visible,
  no_overlap,
  invalid_argument,
};

/// Stable machine-readable tag, e.g. "edge-pair-not-found".
std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + (detail.empty() ? "" : ": " + detail)),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace corridor
