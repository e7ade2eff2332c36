#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "corridor_depth/parallel.hpp"
#include "corridor_depth/scene_model.hpp"

namespace corridor {

// The virtual camera sits on the corridor centerline looking down the
// corridor. A real pixel is lifted to the point at unit depth, rotated by
// the yaw about the camera y axis, shifted by tau along x and reprojected.

struct VirtualPixel {
  Point2 point;
  ProjectionTerm term;
};

/// Throws Error(projection_singular) when the lifted point lands on or
/// behind the virtual image plane (s_v <= 1e-9).
VirtualPixel to_virtual_pixel(Point2 pt, const VirtualPose& pose, const CameraIntrinsics& intr);

/// Exact inverse of to_virtual_pixel.
Point2 from_virtual_pixel(Point2 pt, const VirtualPose& pose, const CameraIntrinsics& intr);

/// Single-step closed form of the same mapping, for comparison against the
/// composed mapping.
Point2 to_virtual_pixel_closed_form(Point2 pt, const VirtualPose& pose, const CameraIntrinsics& intr);

/// Segment with both endpoints mapped; lines stay lines under the mapping.
LineSegment to_virtual_line(const LineSegment& line, const VirtualPose& pose, const CameraIntrinsics& intr);

struct SymmetryResidual {
  double e_left = 0.0;
  double e_right = 0.0;
  double total = 0.0;
  int sample_count = 0;
};

/// Samples n points along each virtual line, mirrors them about u = W/2 and
/// sums the same-row distance to the opposite line.
SymmetryResidual symmetry_error(const EdgeLinePair& pair, const VirtualPose& pose, const CameraIntrinsics& intr,
                                const ImageDims& dims, int n);

struct GridCell {
  double a;
  double b;
  double cost;
};

struct GridArgmin {
  std::optional<GridCell> best;
  std::size_t evaluated = 0;
  std::vector<GridCell> cells;  // only when requested
};

/// Exhaustive search of cost(a, b) over the product grid. Cells whose cost
/// is empty are skipped. Ties go to the smallest |a|, then |b|, then the
/// smaller signed values.
template <class Cost>
GridArgmin grid_argmin(const std::vector<double>& as, const std::vector<double>& bs, Cost&& cost,
                       bool keep_cells = false) {
  std::vector<std::optional<double>> values(as.size() * bs.size());
  parallel_for(as.size(), [&](std::size_t i) {
    for (std::size_t j = 0; j < bs.size(); ++j) values[i * bs.size() + j] = cost(as[i], bs[j]);
  });
  const auto better = [](const GridCell& x, const GridCell& y) {
    if (x.cost != y.cost) return x.cost < y.cost;
    if (std::abs(x.a) != std::abs(y.a)) return std::abs(x.a) < std::abs(y.a);
    if (std::abs(x.b) != std::abs(y.b)) return std::abs(x.b) < std::abs(y.b);
    if (x.a != y.a) return x.a < y.a;
    return x.b < y.b;
  };
  GridArgmin out;
  for (std::size_t i = 0; i < as.size(); ++i) {
    for (std::size_t j = 0; j < bs.size(); ++j) {
      const auto& v = values[i * bs.size() + j];
      if (!v) continue;
      ++out.evaluated;
      const GridCell cell{as[i], bs[j], *v};
      if (keep_cells) out.cells.push_back(cell);
      if (!out.best || better(cell, *out.best)) out.best = cell;
    }
  }
  return out;
}

struct PoseEstimate {
  VirtualPose pose;
  SymmetryResidual residual;
  std::size_t cells_evaluated = 0;
};

/// Grid search of yaw x tau minimizing the symmetry error. Throws
/// Error(pose_estimation_failed) when no cell can be evaluated.
PoseEstimate estimate_pose(const EdgeLinePair& pair, const SearchConfig& search, const CameraIntrinsics& intr,
                           const ImageDims& dims);

/// (yaw, tau, total residual) for every evaluable grid cell.
std::vector<GridCell> residual_surface(const EdgeLinePair& pair, const SearchConfig& search,
                                       const CameraIntrinsics& intr, const ImageDims& dims);
void write_residual_csv(const std::string& path, const std::vector<GridCell>& cells);

struct VirtualEdgePoints {
  std::vector<Point2> left;   // increasing row
  std::vector<Point2> right;  // same rows as left
  std::size_t count() const { return left.size(); }
};

/// Row interval [top, bottom] sampled for the virtual edge points: from the
/// image bottom up to the nearer of the two observed far ends, kept a tenth
/// of the way below the vanishing point.
struct RowRange {
  double top;
  double bottom;
};
RowRange edge_row_range(const EdgeLinePair& pair, const VirtualPose& pose, const CameraIntrinsics& intr,
                        const ImageDims& dims);

/// n row-paired points on the virtual left and right lines, rows uniform over `rows`.
VirtualEdgePoints project_edges_to_virtual(const EdgeLinePair& pair, const VirtualPose& pose,
                                           const CameraIntrinsics& intr, int n, const RowRange& rows);
VirtualEdgePoints project_edges_to_virtual(const EdgeLinePair& pair, const VirtualPose& pose,
                                           const CameraIntrinsics& intr, const ImageDims& dims, int n);

}  // namespace corridor
