#include "corridor_depth/virtual_camera.hpp"

#include <cmath>
#include <fstream>

#include "corridor_depth/error.hpp"

namespace corridor {

namespace {

constexpr double kSingular = 1e-9;
constexpr double kMinRowSpan = 2.0;

LineSegment checked_virtual_line(const LineSegment& line, const VirtualPose& pose, const CameraIntrinsics& intr) {
  LineSegment out = to_virtual_line(line, pose, intr);
  if (std::abs(out.start.v - out.end.v) < kMinRowSpan) {
    throw Error(ErrorCode::degenerate_line, "virtual line spans fewer than 2 rows");
  }
  return out;
}

double side_error(const LineSegment& from, const LineSegment& to, int width, int n) {
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double s = static_cast<double>(i) / (n - 1);
    const double u = from.start.u + s * (from.end.u - from.start.u);
    const double v = from.start.v + s * (from.end.v - from.start.v);
    sum += std::abs((width - u) - to.u_at_row(v));
  }
  return sum;
}

}  // namespace

VirtualPixel to_virtual_pixel(Point2 pt, const VirtualPose& pose, const CameraIntrinsics& intr) {
  const double c = std::cos(pose.yaw_rad);
  const double s = std::sin(pose.yaw_rad);
  // Lift to the unit-depth point, then R * P + t.
  const double x = (pt.u - intr.cx) / intr.fx;
  const double y = (pt.v - intr.cy) / intr.fy;
  const double xr = c * x + s + pose.tau;
  const double zr = -s * x + c;
  if (!(zr > kSingular)) throw Error(ErrorCode::projection_singular, "pixel maps behind the virtual camera");

  VirtualPixel out;
  out.point = {intr.fx * xr / zr + intr.cx, intr.fy * y / zr + intr.cy};
  out.term.s_v = zr;
  const double ft = intr.ft();
  out.term.xi = 1.0 / (ft * c - pt.u * s - intr.cx * c);
  return out;
}

Point2 from_virtual_pixel(Point2 pt, const VirtualPose& pose, const CameraIntrinsics& intr) {
  const double c = std::cos(pose.yaw_rad);
  const double s = std::sin(pose.yaw_rad);
  const double qx = (pt.u - intr.cx) / intr.fx;
  const double qy = (pt.v - intr.cy) / intr.fy;
  const double denom = s * qx + c;
  if (std::abs(denom) <= kSingular) throw Error(ErrorCode::projection_singular, "virtual pixel has no real preimage");
  // Scale along the virtual ray that puts the preimage at unit depth.
  const double scale = (1.0 + pose.tau * s) / denom;
  const double px = c * (scale * qx - pose.tau) - s * scale;
  const double py = scale * qy;
  return {intr.fx * px + intr.cx, intr.fy * py + intr.cy};
}

Point2 to_virtual_pixel_closed_form(Point2 pt, const VirtualPose& pose, const CameraIntrinsics& intr) {
  const double c = std::cos(pose.yaw_rad);
  const double s = std::sin(pose.yaw_rad);
  const double ft = intr.ft();
  const double xi = 1.0 / (ft * c - pt.u * s - intr.cx * c);
  return {xi * c * pt.u + ft * (pose.tau + s) + (xi - c), xi * pt.v + (xi + 1.0) * intr.cy};
}

LineSegment to_virtual_line(const LineSegment& line, const VirtualPose& pose, const CameraIntrinsics& intr) {
  return LineSegment::from_endpoints(to_virtual_pixel(line.start, pose, intr).point,
                                     to_virtual_pixel(line.end, pose, intr).point, line.votes);
}

SymmetryResidual symmetry_error(const EdgeLinePair& pair, const VirtualPose& pose, const CameraIntrinsics& intr,
                                const ImageDims& dims, int n) {
  if (n < 2) throw Error(ErrorCode::invalid_argument, "symmetry_error needs at least 2 samples");
  const LineSegment left = checked_virtual_line(pair.left, pose, intr);
  const LineSegment right = checked_virtual_line(pair.right, pose, intr);
  SymmetryResidual r;
  r.e_left = side_error(left, right, dims.width, n);
  r.e_right = side_error(right, left, dims.width, n);
  r.total = r.e_left + r.e_right;
  r.sample_count = n;
  return r;
}

PoseEstimate estimate_pose(const EdgeLinePair& pair, const SearchConfig& search, const CameraIntrinsics& intr,
                           const ImageDims& dims) {
  const auto yaws = grid_nodes(search.yaw_min, search.yaw_max, search.yaw_step);
  const auto taus = grid_nodes(search.tau_min, search.tau_max, search.tau_step);
  const GridArgmin result = grid_argmin(yaws, taus, [&](double yaw, double tau) -> std::optional<double> {
    try {
      return symmetry_error(pair, {yaw, tau}, intr, dims, search.samples).total;
    } catch (const Error&) {
      return std::nullopt;
    }
  });
  if (!result.best) throw Error(ErrorCode::pose_estimation_failed, "no evaluable yaw/tau grid cell");
  PoseEstimate out;
  out.pose = {result.best->a, result.best->b};
  out.residual = symmetry_error(pair, out.pose, intr, dims, search.samples);
  out.cells_evaluated = result.evaluated;
  return out;
}

std::vector<GridCell> residual_surface(const EdgeLinePair& pair, const SearchConfig& search,
                                       const CameraIntrinsics& intr, const ImageDims& dims) {
  const auto yaws = grid_nodes(search.yaw_min, search.yaw_max, search.yaw_step);
  const auto taus = grid_nodes(search.tau_min, search.tau_max, search.tau_step);
  return grid_argmin(
             yaws, taus,
             [&](double yaw, double tau) -> std::optional<double> {
               try {
                 return symmetry_error(pair, {yaw, tau}, intr, dims, search.samples).total;
               } catch (const Error&) {
                 return std::nullopt;
               }
             },
             true)
      .cells;
}

void write_residual_csv(const std::string& path, const std::vector<GridCell>& cells) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::io, "cannot write '" + path + "'");
  out << "yaw_rad,tau,e_g\n";
  for (const auto& c : cells) out << format_double(c.a) << ',' << format_double(c.b) << ',' << format_double(c.cost) << '\n';
}

RowRange edge_row_range(const EdgeLinePair& pair, const VirtualPose& pose, const CameraIntrinsics& intr,
                        const ImageDims& dims) {
  const LineSegment left = checked_virtual_line(pair.left, pose, intr);
  const LineSegment right = checked_virtual_line(pair.right, pose, intr);
  RowRange rows{std::max(left.top().v, right.top().v), static_cast<double>(dims.height)};

  // Row where the two infinite lines meet: u_l(v) = u_r(v), both linear in v.
  const double slope_l = (left.end.u - left.start.u) / (left.end.v - left.start.v);
  const double slope_r = (right.end.u - right.start.u) / (right.end.v - right.start.v);
  if (slope_l != slope_r) {
    const double v_vp = left.start.v + (right.u_at_row(left.start.v) - left.start.u) / (slope_l - slope_r);
    if (v_vp < rows.bottom) rows.top = std::max(rows.top, v_vp + 0.1 * (rows.bottom - v_vp));
  }
  if (!(rows.top < rows.bottom - 1.0)) throw Error(ErrorCode::degenerate_line, "edge lines leave no usable rows");
  return rows;
}

VirtualEdgePoints project_edges_to_virtual(const EdgeLinePair& pair, const VirtualPose& pose,
                                           const CameraIntrinsics& intr, int n, const RowRange& rows) {
  if (n < 2) throw Error(ErrorCode::invalid_argument, "project_edges_to_virtual needs at least 2 samples");
  const LineSegment left = checked_virtual_line(pair.left, pose, intr);
  const LineSegment right = checked_virtual_line(pair.right, pose, intr);
  VirtualEdgePoints out;
  out.left.reserve(static_cast<std::size_t>(n));
  out.right.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double v = rows.top + (rows.bottom - rows.top) * static_cast<double>(i) / (n - 1);
    out.left.push_back({left.u_at_row(v), v});
    out.right.push_back({right.u_at_row(v), v});
  }
  return out;
}

VirtualEdgePoints project_edges_to_virtual(const EdgeLinePair& pair, const VirtualPose& pose,
                                           const CameraIntrinsics& intr, const ImageDims& dims, int n) {
  return project_edges_to_virtual(pair, pose, intr, n, edge_row_range(pair, pose, intr, dims));
}

}  // namespace corridor
