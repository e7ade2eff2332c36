#pragma once

#include <vector>

#include "corridor_depth/scene_model.hpp"
#include "corridor_depth/virtual_camera.hpp"

namespace corridor {

// Depth here is the forward distance along the corridor axis, i.e. the
// horizontal distance from the camera measured in the virtual camera's
// heading. Pitch is positive when the camera looks down.

/// How the edge-point depth increment is evaluated.
enum class IpmVariant {
  /// eta = dv / ft and z1 = cos(theta_v + theta_p) / cos(theta_v). Exact for a
  /// flat floor.
  exact,
  /// eta = dv / ft and z1 = (cos(theta_v) - sin(theta_v) sin(theta_p)) / cos(theta_v),
  /// the small-pitch form of the same term.
  small_pitch,
  /// eta = fy * dv with the unnormalized small-pitch z1, for comparison only.
  literal,
};

struct IpmTerms {
  double z0 = 0.0;
  double delta_z = 0.0;
  double z1 = 0.0;
  double eta = 0.0;
  double delta_v = 0.0;
};

struct EdgeDepth {
  double z = 0.0;
  IpmTerms terms;
};

/// h / tan(theta_v + theta_p). Throws Error(horizon_below_image) unless
/// 0 < theta_v + theta_p < pi/2.
double bottom_row_depth(const CameraRig& rig, double theta_p);

/// z0 + dz for a virtual pixel. Throws Error(point_beyond_horizon) when the
/// denominator z1 h - eta z0 cos(theta_p) is not positive.
EdgeDepth edge_point_depth(Point2 pt, const CameraRig& rig, double theta_p, const ImageDims& dims,
                           IpmVariant variant = IpmVariant::exact);

struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

struct EdgePoints3D {
  std::vector<Point3> left;
  std::vector<Point3> right;
  // Camera-frame y before the floor-plane override, for diagnostics.
  std::vector<double> raw_y_left;
  std::vector<double> raw_y_right;
};

/// Lateral x uses the range along the optical axis, z / (cos(theta_p) - b sin(theta_p))
/// with b = (v - cy) / fy, so that x is metric at any pitch. y is forced to 0.
EdgePoints3D edges_to_3d(const VirtualEdgePoints& pts, const CameraRig& rig, double theta_p, const ImageDims& dims,
                         IpmVariant variant = IpmVariant::exact);

struct PitchOptions {
  PitchResidual residual = PitchResidual::width_variance;
  IpmVariant ipm = IpmVariant::exact;
};

struct PitchEstimate {
  double theta_p = 0.0;
  double residual = 0.0;
  double width_m = 0.0;
  std::size_t cells_evaluated = 0;
};

/// Per-row corridor widths |x_l - x_r| at pitch theta_p.
std::vector<double> row_widths(const VirtualEdgePoints& pts, const CameraRig& rig, double theta_p,
                               const ImageDims& dims, IpmVariant variant = IpmVariant::exact);

/// Grid search over [pitch_min, pitch_max]. Cells where any point is beyond
/// the horizon are skipped; throws Error(pitch_estimation_failed) if none remain.
PitchEstimate estimate_pitch(const VirtualEdgePoints& pts, const CameraRig& rig, const SearchConfig& search,
                             const ImageDims& dims, const PitchOptions& options = {});

struct DepthPlane {
  int index = 0;
  Point2 left;   // real image
  Point2 right;  // real image
  double depth = 0.0;
};

/// Planes ordered nearest first: depth strictly increases and boundary rows
/// strictly decrease with the index.
struct DepthPlaneSet {
  ImageDims dims;
  std::vector<DepthPlane> planes;
  std::size_t count() const { return planes.size(); }
};

/// One plane per row-paired edge point, boundaries mapped back to the real
/// image. Throws Error(plane_ordering_violated) on non-monotone depth or rows.
DepthPlaneSet build_depth_planes(const VirtualEdgePoints& pts, const EdgePoints3D& depths, const VirtualPose& pose,
                                 const CameraIntrinsics& intr, const ImageDims& dims);

enum class Region { ground, left_wall, right_wall, out_of_range };

const char* to_string(Region r);

/// Plane k and interpolation weight sigma toward plane k - 1. Ground pixels
/// interpolate between the contour segments of consecutive planes along the
/// row direction; wall pixels between consecutive boundary columns. The
/// lower band limit on a wall is the previous boundary column passed through
/// f(u) = alpha u - beta (mirrored for the right wall).
struct PixelClass {
  int plane = -1;
  Region region = Region::out_of_range;
  double sigma = 0.0;
};

PixelClass classify_pixel(Point2 pt, const DepthPlaneSet& planes, const SearchConfig& search);

/// Depth of a classified pixel, or DepthMap::kInvalid when out of range.
double interpolated_depth(const PixelClass& cls, const DepthPlaneSet& planes);

/// Every pixel at or below the horizon row gets an interpolated depth; pixels
/// above it, out of range, or deeper than max_range_m are invalid.
DepthMap dense_depth(const ImageDims& dims, const DepthPlaneSet& planes, const SearchConfig& search,
                     double max_range_m = 40.0);

}  // namespace corridor
