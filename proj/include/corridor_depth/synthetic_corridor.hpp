#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "corridor_depth/image.hpp"
#include "corridor_depth/scene_model.hpp"

namespace corridor {

// World frame: x right, y down, z along the corridor, origin at the camera.
// The floor is the plane y = h and the walls are x = +-width/2 - offset.
// A camera ray d maps to the world as R_x(pitch) R_y(yaw) d, so yaw turns the
// camera about its own y axis and positive pitch looks down.

struct Shading {
  std::uint8_t floor = 90;
  std::uint8_t left_wall = 120;
  std::uint8_t right_wall = 140;
  std::uint8_t background = 60;
  std::uint8_t edge = 230;
  std::uint8_t distractor = 30;

  friend bool operator==(const Shading&, const Shading&) = default;
};

struct CorridorScene {
  double width_m = 2.0;
  double length_m = 60.0;
  double cam_offset_m = 0.0;
  double cam_yaw_rad = 0.0;
  double cam_pitch_rad = 0.0;
  CameraRig rig = CameraRig::from_intrinsics({}, 1.45, {});
  ImageDims dims;
  Shading shading;
  int distractors = 0;      // door frames, alternating walls, 3 m apart from z = 4 m
  double noise_sigma = 0.0;  // additive Gaussian intensity noise
  bool blur = false;         // 5-tap binomial blur before noise
  std::uint64_t seed = 0;

  friend bool operator==(const CorridorScene&, const CorridorScene&) = default;
};

/// Throws Error(invalid_config) listing every violated field.
void validate_scene(const CorridorScene& scene);

struct PixelCoord {
  int u = 0;
  int v = 0;

  friend bool operator==(const PixelCoord&, const PixelCoord&) = default;
};

struct Rendering {
  GrayImage image;
  std::vector<PixelCoord> left_edge;
  std::vector<PixelCoord> right_edge;
  std::vector<PixelCoord> distractors;
};

/// Flat-shaded floor and walls with the two floor-wall lines painted 1 px
/// wide. Throws Error(scene_not_visible) when either line misses the image.
Rendering render(const CorridorScene& scene);

enum class Surface { none, floor, left_wall, right_wall };

struct RayHit {
  Surface surface = Surface::none;
  double z = 0.0;  // forward depth along the corridor
};

/// Nearest floor or wall intersection of the ray through pixel (u, v),
/// limited to the corridor length.
RayHit cast_ray(const CorridorScene& scene, double u, double v);

/// Forward depth of every pixel; misses and hits beyond max_range_m are invalid.
DepthMap ray_cast_depth(const CorridorScene& scene, double max_range_m = 40.0);

/// Image of the world point (x, y, z); false when it is not in front of the camera.
bool project_world_point(const CorridorScene& scene, double x, double y, double z, Point2* out);

/// Image position of the corridor vanishing point.
Point2 vanishing_point(const CorridorScene& scene);

struct SceneCase {
  std::string id;
  CorridorScene scene;
};

/// Scene spec: `key = value` lines. scene.* values may be comma lists and
/// expand to their cartesian product; camera.* and image.* are shared.
/// Case i gets seed base_seed + i.
std::vector<SceneCase> parse_scene_spec(const std::string& text, std::uint64_t base_seed = 0);
std::vector<SceneCase> load_scene_spec(const std::string& path, std::uint64_t base_seed = 0);

/// Ground-truth parameters as a JSON document.
std::string scene_manifest_json(const SceneCase& c);

}  // namespace corridor
