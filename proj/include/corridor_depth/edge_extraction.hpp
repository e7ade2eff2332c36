#pragma once

#include <vector>

#include "corridor_depth/image.hpp"
#include "corridor_depth/scene_model.hpp"

namespace corridor {

/// Rows [top_row, bottom_row) processed for line detection.
struct RoiSpec {
  int top_row = 0;
  int bottom_row = 0;

  bool contains_row(int v) const { return v >= top_row && v < bottom_row; }
};

/// Binary edge mask; nonzero entries are edges.
using EdgeMask = GrayImage;

struct LineSet {
  std::vector<LineSegment> lines;  // descending votes
};

struct EdgeParams {
  double canny_low = 50.0;
  double canny_high = 150.0;
  double rho_res = 1.0;               // pixels
  double theta_res = kPi / 180.0;     // radians
  int votes_min = 50;
  int nms_radius = 2;                 // accumulator cells, both axes
  double inlier_band_px = 2.0;        // support band around a peak line
  double max_gap_px = 12.0;           // largest hole inside one segment
  int refine_half_window = 3;         // 0 skips the sub-pixel refit of the pair
};

RoiSpec build_roi(const ImageDims& dims, std::optional<int> horizon_row = std::nullopt);

/// Sobel gradient, non-maximum suppression along the gradient direction and
/// hysteresis linking, restricted to the ROI rows.
EdgeMask canny_edges(const GrayImage& img, const RoiSpec& roi, double low_thresh, double high_thresh);

/// Standard (rho, theta) Hough transform. Each accumulator peak surviving
/// non-maximum suppression becomes one segment fitted by total least squares
/// to its supporting pixels.
LineSet hough_lines(const EdgeMask& mask, const EdgeParams& params);
LineSet hough_lines(const EdgeMask& mask, double rho_res, double theta_res, int votes_min);

/// Sub-pixel refit of both lines: one intensity-profile position per pixel
/// step across each line inside +-half_window, then total least squares.
/// Steps whose window would reach the other line are skipped.
EdgeLinePair refine_pair(const GrayImage& img, const RoiSpec& roi, const EdgeLinePair& pair, int half_window = 3);

/// Length and angle bounds a floor edge line must satisfy in an image of `dims`.
struct ScenePrior {
  double min_length;
  double max_length;
  double min_angle;  // left band [min_angle, pi/2), right band (pi/2, pi - min_angle]
};
ScenePrior scene_prior(const ImageDims& dims);
bool satisfies_prior(const LineSegment& line, const ScenePrior& prior);

/// Highest-vote admissible left and right floor edges. Throws
/// Error(edge_pair_not_found) when either side has no survivor.
EdgeLinePair filter_scene_prior(const LineSet& lines, const ImageDims& dims);

struct EdgeExtraction {
  RoiSpec roi;
  EdgeMask mask;
  LineSet lines;
  EdgeLinePair pair;
};

/// ROI, Canny, Hough, the scene prior and the sub-pixel refit in sequence.
EdgeExtraction extract_edges(const GrayImage& img, std::optional<int> horizon_row, const EdgeParams& params = {});

/// Edge pixels in red, the accepted pair in green.
RgbImage draw_edge_overlay(const GrayImage& img, const EdgeMask& mask, const EdgeLinePair& pair);

}  // namespace corridor
