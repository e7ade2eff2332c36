#include "corridor_depth/depth_recovery.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>

#include "corridor_depth/error.hpp"
#include "corridor_depth/parallel.hpp"

namespace corridor {

double bottom_row_depth(const CameraRig& rig, double theta_p) {
  const double angle = rig.vfov_rad + theta_p;
  if (!(angle > 0.0 && angle < kPi / 2)) {
    throw Error(ErrorCode::horizon_below_image, "theta_v + theta_p = " + format_double(angle));
  }
  return rig.height_m / std::tan(angle);
}

EdgeDepth edge_point_depth(Point2 pt, const CameraRig& rig, double theta_p, const ImageDims& dims, IpmVariant variant) {
  const double h = rig.height_m;
  const double tv = rig.vfov_rad;
  EdgeDepth out;
  IpmTerms& t = out.terms;
  t.z0 = bottom_row_depth(rig, theta_p);
  t.delta_v = dims.height - pt.v;
  if (t.delta_v < -1e-9) throw Error(ErrorCode::invalid_argument, "pixel below the image bottom");
  t.delta_v = std::max(t.delta_v, 0.0);

  switch (variant) {
    case IpmVariant::exact:
      t.eta = t.delta_v / rig.intrinsics.ft();
      t.z1 = std::cos(tv + theta_p) / std::cos(tv);
      break;
    case IpmVariant::small_pitch:
      t.eta = t.delta_v / rig.intrinsics.ft();
      t.z1 = (std::cos(tv) - std::sin(tv) * std::sin(theta_p)) / std::cos(tv);
      break;
    case IpmVariant::literal:
      t.eta = rig.intrinsics.fy * t.delta_v;
      t.z1 = std::cos(tv) - std::sin(tv) * std::sin(theta_p);
      break;
  }

  const double denom = t.z1 * h - t.eta * t.z0 * std::cos(theta_p);
  if (!(denom > 0.0)) {
    throw Error(ErrorCode::point_beyond_horizon, "row " + format_double(pt.v) + " at pitch " + format_double(theta_p));
  }
  t.delta_z = t.z0 * (t.z0 * std::cos(theta_p) + h * std::sin(theta_p)) * t.eta / denom;
  out.z = t.z0 + t.delta_z;
  return out;
}

namespace {

// Range along the optical axis of a floor point at horizontal depth z.
double axial_range(double z, double v, const CameraRig& rig, double theta_p) {
  const double b = (v - rig.intrinsics.cy) / rig.intrinsics.fy;
  return z / (std::cos(theta_p) - b * std::sin(theta_p));
}

Point3 lift(Point2 pt, const CameraRig& rig, double theta_p, const ImageDims& dims, IpmVariant variant,
            double* raw_y) {
  const double z = edge_point_depth(pt, rig, theta_p, dims, variant).z;
  const double range = axial_range(z, pt.v, rig, theta_p);
  const double ft = rig.intrinsics.ft();
  *raw_y = range * (pt.v - rig.intrinsics.cy) / ft;
  return {range * (pt.u - rig.intrinsics.cx) / ft, 0.0, z};
}

}  // namespace

EdgePoints3D edges_to_3d(const VirtualEdgePoints& pts, const CameraRig& rig, double theta_p, const ImageDims& dims,
                         IpmVariant variant) {
  EdgePoints3D out;
  const std::size_t n = pts.count();
  out.left.resize(n);
  out.right.resize(n);
  out.raw_y_left.resize(n);
  out.raw_y_right.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.left[i] = lift(pts.left[i], rig, theta_p, dims, variant, &out.raw_y_left[i]);
    out.right[i] = lift(pts.right[i], rig, theta_p, dims, variant, &out.raw_y_right[i]);
  }
  return out;
}

std::vector<double> row_widths(const VirtualEdgePoints& pts, const CameraRig& rig, double theta_p,
                               const ImageDims& dims, IpmVariant variant) {
  const EdgePoints3D p3 = edges_to_3d(pts, rig, theta_p, dims, variant);
  std::vector<double> widths(pts.count());
  for (std::size_t i = 0; i < widths.size(); ++i) widths[i] = std::abs(p3.left[i].x - p3.right[i].x);
  return widths;
}

PitchEstimate estimate_pitch(const VirtualEdgePoints& pts, const CameraRig& rig, const SearchConfig& search,
                             const ImageDims& dims, const PitchOptions& options) {
  if (pts.count() < 2) throw Error(ErrorCode::invalid_argument, "estimate_pitch needs at least 2 paired points");
  std::optional<PitchEstimate> best;
  std::size_t evaluated = 0;
  for (const double theta : grid_nodes(search.pitch_min, search.pitch_max, search.pitch_step)) {
    std::vector<double> widths;
    try {
      widths = row_widths(pts, rig, theta, dims, options.ipm);
    } catch (const Error&) {
      continue;
    }
    ++evaluated;
    const double mean = std::accumulate(widths.begin(), widths.end(), 0.0) / static_cast<double>(widths.size());
    double residual = 0.0;
    if (options.residual == PitchResidual::width_variance) {
      for (const double w : widths) residual += (w - mean) * (w - mean);
    } else {
      residual = mean * static_cast<double>(widths.size());
    }
    const bool better = !best || residual < best->residual ||
                        (residual == best->residual && std::abs(theta) < std::abs(best->theta_p));
    if (better) best = PitchEstimate{theta, residual, mean, 0};
  }
  if (!best) throw Error(ErrorCode::pitch_estimation_failed, "every pitch puts an edge point beyond the horizon");
  best->cells_evaluated = evaluated;
  return *best;
}

DepthPlaneSet build_depth_planes(const VirtualEdgePoints& pts, const EdgePoints3D& depths, const VirtualPose& pose,
                                 const CameraIntrinsics& intr, const ImageDims& dims) {
  const std::size_t n = pts.count();
  if (depths.left.size() != n || depths.right.size() != n) {
    throw Error(ErrorCode::invalid_argument, "edge points and depths differ in length");
  }
  DepthPlaneSet set;
  set.dims = dims;
  set.planes.reserve(n);
  // Virtual samples run far to near; planes run near to far.
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t i = n - 1 - j;
    DepthPlane plane;
    plane.index = static_cast<int>(j);
    plane.left = from_virtual_pixel(pts.left[i], pose, intr);
    plane.right = from_virtual_pixel(pts.right[i], pose, intr);
    plane.depth = depths.left[i].z;
    set.planes.push_back(plane);
  }
  for (std::size_t k = 0; k < set.planes.size(); ++k) {
    const auto& p = set.planes[k];
    if (!(p.depth > 0.0)) throw Error(ErrorCode::plane_ordering_violated, "non-positive plane depth");
    if (k == 0) continue;
    const auto& q = set.planes[k - 1];
    if (!(p.depth > q.depth) || !(p.left.v < q.left.v) || !(p.right.v < q.right.v)) {
      throw Error(ErrorCode::plane_ordering_violated, "plane " + std::to_string(k) + " does not lie beyond plane " +
                                                          std::to_string(k - 1));
    }
  }
  return set;
}

const char* to_string(Region r) {
  switch (r) {
    case Region::ground: return "ground";
    case Region::left_wall: return "left-wall";
    case Region::right_wall: return "right-wall";
    case Region::out_of_range: return "out-of-range";
  }
  return "unknown";
}

namespace {

// Column of a boundary polyline (rows strictly decreasing with k) at row v,
// extended linearly past either end.
template <class Get>
double polyline_u_at_row(const std::vector<DepthPlane>& planes, Get get, double v) {
  const std::size_t n = planes.size();
  if (n == 1) return get(planes[0]).u;
  // First k whose row is above v.
  const auto it = std::partition_point(planes.begin(), planes.end(), [&](const DepthPlane& p) { return get(p).v >= v; });
  std::size_t k = static_cast<std::size_t>(it - planes.begin());
  k = std::clamp<std::size_t>(k, 1, n - 1);
  const Point2 a = get(planes[k - 1]);
  const Point2 b = get(planes[k]);
  return a.u + (v - a.v) * (b.u - a.u) / (b.v - a.v);
}

double contour_row_at(const DepthPlane& p, double u) {
  const double du = p.right.u - p.left.u;
  if (du == 0.0) return 0.5 * (p.left.v + p.right.v);
  return p.left.v + (u - p.left.u) * (p.right.v - p.left.v) / du;
}

PixelClass make(int k, Region r, double sigma) { return {k, r, std::clamp(sigma, 0.0, 1.0)}; }

}  // namespace

PixelClass classify_pixel(Point2 pt, const DepthPlaneSet& set, const SearchConfig& search) {
  const auto& planes = set.planes;
  if (planes.empty()) throw Error(ErrorCode::invalid_argument, "classify_pixel needs at least one plane");
  const int n = static_cast<int>(planes.size());
  const double u = pt.u;
  const double v = pt.v;
  const double width = set.dims.width;
  const auto f = [&](double x) { return search.interp_alpha * x - search.interp_beta; };

  const double left_edge = polyline_u_at_row(planes, [](const DepthPlane& p) { return p.left; }, v);
  const double right_edge = polyline_u_at_row(planes, [](const DepthPlane& p) { return p.right; }, v);

  if (u >= left_edge && u <= right_edge) {
    const auto it = std::partition_point(planes.begin(), planes.end(),
                                         [&](const DepthPlane& p) { return contour_row_at(p, u) > v; });
    const int k = static_cast<int>(it - planes.begin());
    if (k == n) return {};
    const double ck = contour_row_at(planes[k], u);
    if (k == 0) return ck == v ? make(0, Region::ground, 0.0) : PixelClass{};
    const double prev = contour_row_at(planes[k - 1], u);
    return make(k, Region::ground, (v - ck) / (prev - ck));
  }

  if (u < left_edge) {
    const auto it = std::partition_point(planes.begin(), planes.end(), [&](const DepthPlane& p) { return p.left.u < u; });
    const int k = static_cast<int>(it - planes.begin());
    if (k == n) return {};
    const double uk = planes[k].left.u;
    if (k == 0) return uk == u ? make(0, Region::left_wall, 0.0) : PixelClass{};
    const double prev = planes[k - 1].left.u;
    if (u < f(prev)) return {};
    return make(k, Region::left_wall, (uk - u) / (uk - prev));
  }

  const auto it = std::partition_point(planes.begin(), planes.end(), [&](const DepthPlane& p) { return p.right.u > u; });
  const int k = static_cast<int>(it - planes.begin());
  if (k == n) return {};
  const double uk = planes[k].right.u;
  if (k == 0) return uk == u ? make(0, Region::right_wall, 0.0) : PixelClass{};
  const double prev = planes[k - 1].right.u;
  if (u > width - f(width - prev)) return {};
  return make(k, Region::right_wall, (u - uk) / (prev - uk));
}

double interpolated_depth(const PixelClass& cls, const DepthPlaneSet& set) {
  if (cls.region == Region::out_of_range || cls.plane < 0) return DepthMap::kInvalid;
  const double dk = set.planes[static_cast<std::size_t>(cls.plane)].depth;
  if (cls.plane == 0) return dk;
  const double prev = set.planes[static_cast<std::size_t>(cls.plane - 1)].depth;
  return dk + cls.sigma * (prev - dk);
}

DepthMap dense_depth(const ImageDims& dims, const DepthPlaneSet& planes, const SearchConfig& search,
                     double max_range_m) {
  if (planes.count() < 2) throw Error(ErrorCode::invalid_argument, "dense_depth needs at least 2 planes");
  DepthMap map(dims);
  const int top = std::clamp(search.horizon_row.value_or(dims.height / 2), 0, dims.height);
  parallel_for(static_cast<std::size_t>(dims.height - top), [&](std::size_t r) {
    const int v = top + static_cast<int>(r);
    for (int u = 0; u < dims.width; ++u) {
      const double z = interpolated_depth(classify_pixel({static_cast<double>(u), static_cast<double>(v)}, planes, search), planes);
      map.at(u, v) = (DepthMap::is_valid(z) && z <= max_range_m) ? z : DepthMap::kInvalid;
    }
  });
  return map;
}

}  // namespace corridor
