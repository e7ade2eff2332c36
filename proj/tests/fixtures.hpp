#pragma once

#include "corridor_depth/synthetic_corridor.hpp"

namespace fixture {

/// Image of the floor-wall line x = x_wall between forward depths z_near and z_far.
inline corridor::LineSegment world_line(const corridor::CorridorScene& s, double x_wall, double z_near, double z_far) {
  corridor::Point2 a, b;
  corridor::project_world_point(s, x_wall, s.rig.height_m, z_near, &a);
  corridor::project_world_point(s, x_wall, s.rig.height_m, z_far, &b);
  return corridor::LineSegment::from_endpoints(a, b);
}

/// Exact floor edge lines of a scene, 3 m to 20 m ahead.
inline corridor::EdgeLinePair analytic_pair(const corridor::CorridorScene& s) {
  return {world_line(s, -s.width_m / 2 - s.cam_offset_m, 3, 20), world_line(s, s.width_m / 2 - s.cam_offset_m, 3, 20)};
}

inline corridor::CorridorScene scene(double width, double yaw, double pitch, double offset = 0.0) {
  corridor::CorridorScene s;
  s.width_m = width;
  s.cam_yaw_rad = yaw;
  s.cam_pitch_rad = pitch;
  s.cam_offset_m = offset;
  return s;
}

inline corridor::Config config_for(const corridor::CorridorScene& s) {
  corridor::Config c;
  c.rig = s.rig;
  c.dims = s.dims;
  return c;
}

}  // namespace fixture
