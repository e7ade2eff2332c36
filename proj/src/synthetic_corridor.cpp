#include "corridor_depth/synthetic_corridor.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

#include "corridor_depth/error.hpp"
#include "corridor_depth/parallel.hpp"

namespace corridor {

namespace {

struct Vec3 {
  double x, y, z;
};

// R_x(pitch) R_y(yaw) applied to a camera-frame vector.
Vec3 camera_to_world(const CorridorScene& s, Vec3 d) {
  const double cy = std::cos(s.cam_yaw_rad), sy = std::sin(s.cam_yaw_rad);
  const double cp = std::cos(s.cam_pitch_rad), sp = std::sin(s.cam_pitch_rad);
  const Vec3 r{cy * d.x + sy * d.z, d.y, -sy * d.x + cy * d.z};
  return {r.x, cp * r.y + sp * r.z, -sp * r.y + cp * r.z};
}

Vec3 world_to_camera(const CorridorScene& s, Vec3 p) {
  const double cy = std::cos(s.cam_yaw_rad), sy = std::sin(s.cam_yaw_rad);
  const double cp = std::cos(s.cam_pitch_rad), sp = std::sin(s.cam_pitch_rad);
  const Vec3 r{p.x, cp * p.y - sp * p.z, sp * p.y + cp * p.z};
  return {cy * r.x - sy * r.z, r.y, sy * r.x + cy * r.z};
}

constexpr double kNearClip = 0.01;

double left_wall_x(const CorridorScene& s) { return -s.width_m / 2 - s.cam_offset_m; }
double right_wall_x(const CorridorScene& s) { return s.width_m / 2 - s.cam_offset_m; }

int round_px(double x) { return static_cast<int>(std::floor(x + 0.5)); }

// Liang-Barsky clip of a -> b to [0, w-1] x [0, h-1].
bool clip_segment(Point2& a, Point2& b, const ImageDims& dims) {
  double t0 = 0.0, t1 = 1.0;
  const double du = b.u - a.u, dv = b.v - a.v;
  const std::array<double, 4> p{-du, du, -dv, dv};
  const std::array<double, 4> q{a.u, dims.width - 1 - a.u, a.v, dims.height - 1 - a.v};
  for (int i = 0; i < 4; ++i) {
    if (p[i] == 0.0) {
      if (q[i] < 0.0) return false;
      continue;
    }
    const double r = q[i] / p[i];
    if (p[i] < 0.0) t0 = std::max(t0, r);
    else t1 = std::min(t1, r);
    if (t0 > t1) return false;
  }
  const Point2 a0 = a;
  a = {a0.u + t0 * du, a0.v + t0 * dv};
  b = {a0.u + t1 * du, a0.v + t1 * dv};
  return true;
}

std::vector<PixelCoord> rasterize(Point2 a, Point2 b, const ImageDims& dims) {
  std::vector<PixelCoord> out;
  if (!clip_segment(a, b, dims)) return out;
  // One pixel per integer step of the major axis, minor axis rounded.
  const bool steep = std::abs(b.v - a.v) >= std::abs(b.u - a.u);
  const double a_major = steep ? a.v : a.u, b_major = steep ? b.v : b.u;
  const double a_minor = steep ? a.u : a.v, b_minor = steep ? b.u : b.v;
  const double lo = std::min(a_major, b_major), hi = std::max(a_major, b_major);
  for (int m = static_cast<int>(std::ceil(lo)); m <= static_cast<int>(std::floor(hi)); ++m) {
    const double t = hi > lo ? (m - a_major) / (b_major - a_major) : 0.0;
    const int minor = round_px(a_minor + t * (b_minor - a_minor));
    const PixelCoord p = steep ? PixelCoord{minor, m} : PixelCoord{m, minor};
    if (p.u < 0 || p.v < 0 || p.u >= dims.width || p.v >= dims.height) continue;
    out.push_back(p);
  }
  return out;
}

// Image segment of the world segment p -> q, clipped to the part in front of the camera.
std::vector<PixelCoord> paint_world_segment(const CorridorScene& s, Vec3 p, Vec3 q) {
  const Vec3 cp = world_to_camera(s, p);
  const Vec3 cq = world_to_camera(s, q);
  double t0 = 0.0, t1 = 1.0;
  if (cp.z < kNearClip && cq.z < kNearClip) return {};
  if (cp.z < kNearClip) t0 = (kNearClip - cp.z) / (cq.z - cp.z);
  if (cq.z < kNearClip) t1 = (kNearClip - cp.z) / (cq.z - cp.z);
  const auto at = [&](double t) {
    const Vec3 c{cp.x + t * (cq.x - cp.x), cp.y + t * (cq.y - cp.y), cp.z + t * (cq.z - cp.z)};
    const auto& k = s.rig.intrinsics;
    return Point2{k.fx * c.x / c.z + k.cx, k.fy * c.y / c.z + k.cy};
  };
  return rasterize(at(t0), at(t1), s.dims);
}

std::uint8_t surface_shade(const Shading& sh, Surface s) {
  switch (s) {
    case Surface::floor: return sh.floor;
    case Surface::left_wall: return sh.left_wall;
    case Surface::right_wall: return sh.right_wall;
    case Surface::none: return sh.background;
  }
  return sh.background;
}

GrayImage binomial_blur(const GrayImage& img) {
  static constexpr std::array<int, 5> k{1, 4, 6, 4, 1};
  const int w = img.dims.width, h = img.dims.height;
  std::vector<int> tmp(img.pixels.size());
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      int acc = 0;
      for (int i = -2; i <= 2; ++i) acc += k[i + 2] * img.at(std::clamp(u + i, 0, w - 1), v);
      tmp[static_cast<std::size_t>(v) * w + u] = acc;
    }
  }
  GrayImage out(img.dims);
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      int acc = 0;
      for (int i = -2; i <= 2; ++i) acc += k[i + 2] * tmp[static_cast<std::size_t>(std::clamp(v + i, 0, h - 1)) * w + u];
      out.at(u, v) = static_cast<std::uint8_t>((acc + 128) / 256);
    }
  }
  return out;
}

}  // namespace

void validate_scene(const CorridorScene& s) {
  std::vector<std::string> issues;
  const auto bad = [&](const std::string& field, const std::string& what, double value) {
    issues.push_back(field + " " + what + " (got " + format_double(value) + ")");
  };
  if (!(s.width_m > 0.0)) bad("scene.width_m", "must be positive", s.width_m);
  if (!(s.length_m > 0.0)) bad("scene.length_m", "must be positive", s.length_m);
  if (!(std::abs(s.cam_offset_m) < s.width_m / 2)) bad("scene.cam_offset_m", "must lie strictly between the walls", s.cam_offset_m);
  if (!(std::abs(s.cam_yaw_rad) < kPi / 2)) bad("scene.cam_yaw_rad", "must be within (-pi/2, pi/2)", s.cam_yaw_rad);
  if (!(std::abs(s.cam_pitch_rad) < kPi / 2)) bad("scene.cam_pitch_rad", "must be within (-pi/2, pi/2)", s.cam_pitch_rad);
  if (!(s.noise_sigma >= 0.0)) bad("scene.noise_sigma", "must be non-negative", s.noise_sigma);
  if (s.distractors < 0) bad("scene.distractors", "must be non-negative", s.distractors);
  for (const auto& i : validate_config(s.rig, s.dims, SearchConfig{})) issues.push_back(i.message);
  if (issues.empty()) return;
  std::string msg;
  for (const auto& i : issues) msg += (msg.empty() ? "" : "; ") + i;
  throw Error(ErrorCode::invalid_config, msg);
}

RayHit cast_ray(const CorridorScene& s, double u, double v) {
  const auto& k = s.rig.intrinsics;
  const Vec3 d = camera_to_world(s, {(u - k.cx) / k.fx, (v - k.cy) / k.fy, 1.0});
  RayHit best;
  double best_t = std::numeric_limits<double>::infinity();
  const auto consider = [&](Surface surface, double t) {
    if (!(t > 0.0) || t >= best_t) return;
    const double z = t * d.z;
    if (!(z > 0.0) || z > s.length_m) return;
    best_t = t;
    best = {surface, z};
  };
  if (d.y > 0.0) consider(Surface::floor, s.rig.height_m / d.y);
  if (d.x < 0.0) consider(Surface::left_wall, left_wall_x(s) / d.x);
  if (d.x > 0.0) consider(Surface::right_wall, right_wall_x(s) / d.x);
  return best;
}

DepthMap ray_cast_depth(const CorridorScene& s, double max_range_m) {
  DepthMap map(s.dims);
  parallel_for(static_cast<std::size_t>(s.dims.height), [&](std::size_t r) {
    const int v = static_cast<int>(r);
    for (int u = 0; u < s.dims.width; ++u) {
      const RayHit hit = cast_ray(s, u, v);
      map.at(u, v) = (hit.surface != Surface::none && hit.z <= max_range_m) ? hit.z : DepthMap::kInvalid;
    }
  });
  return map;
}

bool project_world_point(const CorridorScene& s, double x, double y, double z, Point2* out) {
  const Vec3 c = world_to_camera(s, {x, y, z});
  if (!(c.z > 0.0)) return false;
  const auto& k = s.rig.intrinsics;
  *out = {k.fx * c.x / c.z + k.cx, k.fy * c.y / c.z + k.cy};
  return true;
}

Point2 vanishing_point(const CorridorScene& s) {
  const Vec3 c = world_to_camera(s, {0.0, 0.0, 1.0});
  if (!(c.z > 0.0)) throw Error(ErrorCode::scene_not_visible, "camera faces away from the corridor");
  const auto& k = s.rig.intrinsics;
  return {k.fx * c.x / c.z + k.cx, k.fy * c.y / c.z + k.cy};
}

Rendering render(const CorridorScene& s) {
  validate_scene(s);
  if (!(world_to_camera(s, {0.0, 0.0, 1.0}).z > 0.0)) {
    throw Error(ErrorCode::scene_not_visible, "camera faces away from the corridor");
  }
  Rendering out;
  out.image = GrayImage(s.dims);
  parallel_for(static_cast<std::size_t>(s.dims.height), [&](std::size_t r) {
    const int v = static_cast<int>(r);
    for (int u = 0; u < s.dims.width; ++u) out.image.at(u, v) = surface_shade(s.shading, cast_ray(s, u, v).surface);
  });

  const double h = s.rig.height_m;
  const double far = s.length_m;
  const double behind = -1e3;
  out.left_edge = paint_world_segment(s, {left_wall_x(s), h, behind}, {left_wall_x(s), h, far});
  out.right_edge = paint_world_segment(s, {right_wall_x(s), h, behind}, {right_wall_x(s), h, far});
  if (out.left_edge.empty() || out.right_edge.empty()) {
    throw Error(ErrorCode::scene_not_visible, "a floor edge falls outside the image");
  }
  for (int i = 0; i < s.distractors; ++i) {
    const double z = 4.0 + 3.0 * i;
    if (z >= s.length_m) break;
    const double x = (i % 2 == 0) ? left_wall_x(s) : right_wall_x(s);
    const auto px = paint_world_segment(s, {x, h, z}, {x, h - 2.0, z});
    out.distractors.insert(out.distractors.end(), px.begin(), px.end());
  }
  for (const auto& p : out.left_edge) out.image.at(p.u, p.v) = s.shading.edge;
  for (const auto& p : out.right_edge) out.image.at(p.u, p.v) = s.shading.edge;
  for (const auto& p : out.distractors) out.image.at(p.u, p.v) = s.shading.distractor;

  if (s.blur) out.image = binomial_blur(out.image);
  if (s.noise_sigma > 0.0) {
    std::mt19937_64 rng(s.seed);
    std::normal_distribution<double> noise(0.0, s.noise_sigma);
    for (auto& px : out.image.pixels) px = static_cast<std::uint8_t>(std::clamp(std::lround(px + noise(rng)), 0L, 255L));
  }
  return out;
}

namespace {

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    out.push_back(b == std::string::npos ? std::string() : item.substr(b, e - b + 1));
  }
  return out;
}

double to_number(const std::string& key, const std::string& text) {
  double x = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), x);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw Error(ErrorCode::invalid_config, key + " expects a number, got '" + text + "'");
  }
  return x;
}

using SceneSetter = void (*)(CorridorScene&, double);

const std::vector<std::pair<std::string, SceneSetter>>& scene_keys() {
  static const std::vector<std::pair<std::string, SceneSetter>> keys = {
      {"scene.width_m", [](CorridorScene& s, double x) { s.width_m = x; }},
      {"scene.length_m", [](CorridorScene& s, double x) { s.length_m = x; }},
      {"scene.cam_offset_m", [](CorridorScene& s, double x) { s.cam_offset_m = x; }},
      {"scene.cam_yaw_rad", [](CorridorScene& s, double x) { s.cam_yaw_rad = x; }},
      {"scene.cam_pitch_rad", [](CorridorScene& s, double x) { s.cam_pitch_rad = x; }},
      {"scene.noise_sigma", [](CorridorScene& s, double x) { s.noise_sigma = x; }},
      {"scene.distractors", [](CorridorScene& s, double x) { s.distractors = static_cast<int>(x); }},
      {"scene.blur", [](CorridorScene& s, double x) { s.blur = x != 0.0; }},
      {"scene.edge_intensity", [](CorridorScene& s, double x) { s.shading.edge = static_cast<std::uint8_t>(std::clamp(x, 0.0, 255.0)); }},
  };
  return keys;
}

}  // namespace

std::vector<SceneCase> parse_scene_spec(const std::string& text, std::uint64_t base_seed) {
  std::map<std::string, std::vector<double>> lists;
  std::string camera_text;
  bool has_vfov = false;
  bool has_height = false;
  std::vector<std::string> unknown;
  for (const auto& kv : parse_key_values(text)) {
    if (kv.key.rfind("camera.", 0) == 0 || kv.key.rfind("image.", 0) == 0) {
      camera_text += kv.key + " = " + kv.value + "\n";
      has_vfov |= kv.key == "camera.vfov_rad";
      has_height |= kv.key == "camera.height_m";
      continue;
    }
    const auto& keys = scene_keys();
    const auto it = std::find_if(keys.begin(), keys.end(), [&](const auto& k) { return k.first == kv.key; });
    if (it == keys.end()) {
      unknown.push_back(kv.key);
      continue;
    }
    std::vector<double> values;
    for (const auto& item : split_list(kv.value)) values.push_back(to_number(kv.key, item));
    if (values.empty()) throw Error(ErrorCode::invalid_config, kv.key + " has no values");
    lists[kv.key] = values;
  }
  if (!unknown.empty()) {
    std::string msg = "unknown keys:";
    for (const auto& k : unknown) msg += " " + k;
    throw Error(ErrorCode::invalid_config, msg);
  }

  CorridorScene base;
  const Config cam = parse_config(camera_text);
  base.dims = cam.dims;
  const double height = has_height ? cam.rig.height_m : base.rig.height_m;
  base.rig = has_vfov ? cam.rig : CameraRig::from_intrinsics(cam.rig.intrinsics, height, cam.dims);
  base.rig.height_m = height;

  std::vector<SceneCase> cases{{"", base}};
  for (const auto& [key, setter] : scene_keys()) {
    const auto it = lists.find(key);
    if (it == lists.end()) continue;
    std::vector<SceneCase> next;
    for (const auto& c : cases) {
      for (const double x : it->second) {
        SceneCase n = c;
        setter(n.scene, x);
        next.push_back(n);
      }
    }
    cases = std::move(next);
  }
  for (std::size_t i = 0; i < cases.size(); ++i) {
    char id[32];
    std::snprintf(id, sizeof id, "scene_%03zu", i);
    cases[i].id = id;
    cases[i].scene.seed = base_seed + i;
    validate_scene(cases[i].scene);
  }
  return cases;
}

std::vector<SceneCase> load_scene_spec(const std::string& path, std::uint64_t base_seed) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot read scene spec '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scene_spec(ss.str(), base_seed);
}

std::string scene_manifest_json(const SceneCase& c) {
  const auto& s = c.scene;
  const auto& k = s.rig.intrinsics;
  nlohmann::ordered_json j;
  j["id"] = c.id;
  j["width_m"] = s.width_m;
  j["length_m"] = s.length_m;
  j["cam_offset_m"] = s.cam_offset_m;
  j["cam_yaw_rad"] = s.cam_yaw_rad;
  j["cam_pitch_rad"] = s.cam_pitch_rad;
  j["noise_sigma"] = s.noise_sigma;
  j["distractors"] = s.distractors;
  j["blur"] = s.blur;
  j["seed"] = s.seed;
  j["camera"] = {{"fx", k.fx}, {"fy", k.fy}, {"cx", k.cx}, {"cy", k.cy}, {"height_m", s.rig.height_m},
                 {"vfov_rad", s.rig.vfov_rad}};
  j["image"] = {{"width", s.dims.width}, {"height", s.dims.height}};
  return j.dump(2) + "\n";
}

}  // namespace corridor
