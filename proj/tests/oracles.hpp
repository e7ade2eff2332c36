#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "corridor_depth/scene_model.hpp"
#include "corridor_depth/synthetic_corridor.hpp"

namespace oracle {

using Vec3 = std::array<double, 3>;
using Mat3 = std::array<Vec3, 3>;

inline Vec3 mul(const Mat3& m, const Vec3& x) {
  Vec3 r{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r[i] += m[i][j] * x[j];
  return r;
}

inline Mat3 mul(const Mat3& a, const Mat3& b) {
  Mat3 r{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) r[i][j] += a[i][k] * b[k][j];
  return r;
}

inline Mat3 rot_y(double a) {
  return {{{std::cos(a), 0, std::sin(a)}, {0, 1, 0}, {-std::sin(a), 0, std::cos(a)}}};
}

inline Mat3 rot_x(double a) {
  return {{{1, 0, 0}, {0, std::cos(a), std::sin(a)}, {0, -std::sin(a), std::cos(a)}}};
}

inline Mat3 k_matrix(const corridor::CameraIntrinsics& k) {
  return {{{k.fx, 0, k.cx}, {0, k.fy, k.cy}, {0, 0, 1}}};
}

inline Mat3 k_inverse(const corridor::CameraIntrinsics& k) {
  return {{{1 / k.fx, 0, -k.cx / k.fx}, {0, 1 / k.fy, -k.cy / k.fy}, {0, 0, 1}}};
}

/// Lift to the unit-depth point, rotate about y, shift along x, reproject.
inline corridor::Point2 virtual_pixel(corridor::Point2 p, double yaw, double tau, const corridor::CameraIntrinsics& k) {
  Vec3 q = mul(rot_y(yaw), mul(k_inverse(k), Vec3{p.u, p.v, 1.0}));
  q[0] += tau;
  const Vec3 img = mul(k_matrix(k), q);
  return {img[0] / img[2], img[1] / img[2]};
}

/// Forward depth where the ray through (u, v) meets the floor, for a camera
/// at height h pitched down by `pitch`. NaN when the ray misses the floor.
inline double floor_depth(double u, double v, double h, double pitch, double yaw, const corridor::CameraIntrinsics& k) {
  const Vec3 d = mul(mul(rot_x(pitch), rot_y(yaw)), mul(k_inverse(k), Vec3{u, v, 1.0}));
  if (d[1] <= 0) return std::numeric_limits<double>::quiet_NaN();
  return h / d[1] * d[2];
}

/// Per-pixel geometric solver: nearest of floor and the two walls within the
/// corridor length, forward depth, invalid past max_range.
inline corridor::DepthMap ray_cast(const corridor::CorridorScene& s, double max_range) {
  corridor::DepthMap out(s.dims);
  const Mat3 r = mul(rot_x(s.cam_pitch_rad), rot_y(s.cam_yaw_rad));
  const auto& k = s.rig.intrinsics;
  for (int v = 0; v < s.dims.height; ++v) {
    for (int u = 0; u < s.dims.width; ++u) {
      const Vec3 d = mul(r, mul(k_inverse(k), Vec3{double(u), double(v), 1.0}));
      double best = std::numeric_limits<double>::infinity();
      std::vector<double> ts;
      if (d[1] > 0) ts.push_back(s.rig.height_m / d[1]);
      if (d[0] < 0) ts.push_back((-s.width_m / 2 - s.cam_offset_m) / d[0]);
      if (d[0] > 0) ts.push_back((s.width_m / 2 - s.cam_offset_m) / d[0]);
      for (double t : ts) {
        const double z = t * d[2];
        if (t > 0 && z > 0 && z <= s.length_m) best = std::min(best, t);
      }
      if (std::isfinite(best)) {
        const double z = best * d[2];
        if (z <= max_range) out.at(u, v) = z;
      }
    }
  }
  return out;
}

struct Metrics {
  double abs_rel, log10, rmse, rmse_log;
  std::size_t n;
};

inline Metrics metrics(const std::vector<double>& pred, const std::vector<double>& truth, double cap) {
  double a = 0, l = 0, s = 0, sl = 0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double y = truth[i], p = pred[i];
    if (!(y > 0 && y <= cap && p > 0)) continue;
    ++n;
    a += std::fabs(y - p) / y;
    l += std::fabs(std::log10(y) - std::log10(p));
    s += (y - p) * (y - p);
    sl += std::pow(std::log10(y) - std::log10(p), 2);
  }
  return {a / n, l / n, std::sqrt(s / n), std::sqrt(sl / n), n};
}

}  // namespace oracle
