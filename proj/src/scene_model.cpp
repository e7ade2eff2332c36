#include "corridor_depth/scene_model.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "corridor_depth/error.hpp"

namespace corridor {

CameraRig CameraRig::from_intrinsics(const CameraIntrinsics& intr, double height_m, const ImageDims& dims) {
  CameraRig rig;
  rig.intrinsics = intr;
  rig.height_m = height_m;
  rig.vfov_rad = std::atan((dims.height - intr.cy) / intr.fy);
  return rig;
}

double normalize_line_angle(double angle) {
  double a = std::fmod(angle, kPi);
  if (a <= 0.0) a += kPi;
  return a;
}

LineSegment LineSegment::from_endpoints(Point2 a, Point2 b, int votes) {
  LineSegment s;
  if (a.v < b.v) std::swap(a, b);
  s.start = a;
  s.end = b;
  s.length_px = distance(a, b);
  // v grows downward, so the upward direction is -dv.
  s.angle_rad = normalize_line_angle(std::atan2(a.v - b.v, b.u - a.u));
  s.votes = votes;
  return s;
}

double LineSegment::u_at_row(double v) const {
  const double dv = end.v - start.v;
  return start.u + (v - start.v) * (end.u - start.u) / dv;
}

LineSegment LineSegment::mirrored(int width) const {
  return from_endpoints({width - start.u, start.v}, {width - end.u, end.v}, votes);
}

std::size_t DepthMap::valid_count() const {
  return static_cast<std::size_t>(std::count_if(values.begin(), values.end(), is_valid));
}

std::string format_double(double x) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return std::string(buf.data(), ptr);
}

namespace {

void issue(std::vector<ConfigIssue>& out, std::string field, const std::string& what, double value) {
  out.push_back({field, field + " " + what + " (got " + format_double(value) + ")"});
}

void check_interval(std::vector<ConfigIssue>& out, const std::string& axis, double lo, double hi, double step) {
  if (!(lo < hi)) {
    out.push_back({"search." + axis + "_min",
                   "search." + axis + ": min<max violated (" + axis + "_min=" + format_double(lo) + ", " + axis +
                       "_max=" + format_double(hi) + ")"});
  }
  if (!(step > 0.0) || !std::isfinite(step)) issue(out, "search." + axis + "_step", "must be positive", step);
}

double parse_number(const KeyValue& kv) {
  double out = 0.0;
  const char* first = kv.value.data();
  const char* last = first + kv.value.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last) {
    throw Error(ErrorCode::invalid_config,
                "line " + std::to_string(kv.line) + ": " + kv.key + " expects a number, got '" + kv.value + "'");
  }
  return out;
}

int parse_int(const KeyValue& kv) {
  const double x = parse_number(kv);
  if (x != std::floor(x) || std::abs(x) > 1e9) {
    throw Error(ErrorCode::invalid_config,
                "line " + std::to_string(kv.line) + ": " + kv.key + " expects an integer, got '" + kv.value + "'");
  }
  return static_cast<int>(x);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

using Setter = std::function<void(Config&, const KeyValue&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"camera.fx", [](Config& c, const KeyValue& kv) { c.rig.intrinsics.fx = parse_number(kv); }},
      {"camera.fy", [](Config& c, const KeyValue& kv) { c.rig.intrinsics.fy = parse_number(kv); }},
      {"camera.cx", [](Config& c, const KeyValue& kv) { c.rig.intrinsics.cx = parse_number(kv); }},
      {"camera.cy", [](Config& c, const KeyValue& kv) { c.rig.intrinsics.cy = parse_number(kv); }},
      {"camera.height_m", [](Config& c, const KeyValue& kv) { c.rig.height_m = parse_number(kv); }},
      {"camera.vfov_rad", [](Config& c, const KeyValue& kv) { c.rig.vfov_rad = parse_number(kv); }},
      {"image.width", [](Config& c, const KeyValue& kv) { c.dims.width = parse_int(kv); }},
      {"image.height", [](Config& c, const KeyValue& kv) { c.dims.height = parse_int(kv); }},
      {"search.yaw_min", [](Config& c, const KeyValue& kv) { c.search.yaw_min = parse_number(kv); }},
      {"search.yaw_max", [](Config& c, const KeyValue& kv) { c.search.yaw_max = parse_number(kv); }},
      {"search.yaw_step", [](Config& c, const KeyValue& kv) { c.search.yaw_step = parse_number(kv); }},
      {"search.tau_min", [](Config& c, const KeyValue& kv) { c.search.tau_min = parse_number(kv); }},
      {"search.tau_max", [](Config& c, const KeyValue& kv) { c.search.tau_max = parse_number(kv); }},
      {"search.tau_step", [](Config& c, const KeyValue& kv) { c.search.tau_step = parse_number(kv); }},
      {"search.pitch_min", [](Config& c, const KeyValue& kv) { c.search.pitch_min = parse_number(kv); }},
      {"search.pitch_max", [](Config& c, const KeyValue& kv) { c.search.pitch_max = parse_number(kv); }},
      {"search.pitch_step", [](Config& c, const KeyValue& kv) { c.search.pitch_step = parse_number(kv); }},
      {"search.samples", [](Config& c, const KeyValue& kv) { c.search.samples = parse_int(kv); }},
      {"interp.alpha", [](Config& c, const KeyValue& kv) { c.search.interp_alpha = parse_number(kv); }},
      {"interp.beta", [](Config& c, const KeyValue& kv) { c.search.interp_beta = parse_number(kv); }},
      {"roi.horizon_row", [](Config& c, const KeyValue& kv) { c.search.horizon_row = parse_int(kv); }},
  };
  return table;
}

}  // namespace

std::vector<ConfigIssue> validate_config(const CameraRig& rig, const ImageDims& dims, const SearchConfig& search) {
  std::vector<ConfigIssue> out;
  const auto& in = rig.intrinsics;
  if (dims.width <= 0) issue(out, "image.width", "must be positive", dims.width);
  if (dims.height <= 0) issue(out, "image.height", "must be positive", dims.height);
  if (!(in.fx > 0.0) || !std::isfinite(in.fx)) issue(out, "camera.fx", "must be positive", in.fx);
  if (!(in.fy > 0.0) || !std::isfinite(in.fy)) issue(out, "camera.fy", "must be positive", in.fy);
  if (!(in.cx > 0.0 && in.cx < dims.width)) issue(out, "camera.cx", "must lie inside (0, width)", in.cx);
  if (!(in.cy > 0.0 && in.cy < dims.height)) issue(out, "camera.cy", "must lie inside (0, height)", in.cy);
  if (!(rig.height_m > 0.0) || !std::isfinite(rig.height_m)) issue(out, "camera.height_m", "must be positive", rig.height_m);
  if (!(rig.vfov_rad > 0.0 && rig.vfov_rad < kPi / 2)) {
    issue(out, "camera.vfov_rad", "must lie inside (0, pi/2)", rig.vfov_rad);
  }
  check_interval(out, "yaw", search.yaw_min, search.yaw_max, search.yaw_step);
  check_interval(out, "tau", search.tau_min, search.tau_max, search.tau_step);
  check_interval(out, "pitch", search.pitch_min, search.pitch_max, search.pitch_step);
  if (search.samples < 2) issue(out, "search.samples", "must be at least 2", search.samples);
  if (!std::isfinite(search.interp_alpha)) issue(out, "interp.alpha", "must be finite", search.interp_alpha);
  if (!std::isfinite(search.interp_beta)) issue(out, "interp.beta", "must be finite", search.interp_beta);
  if (search.horizon_row && (*search.horizon_row < 0 || *search.horizon_row >= dims.height)) {
    issue(out, "roi.horizon_row", "must lie inside [0, height)", *search.horizon_row);
  }
  return out;
}

std::vector<ConfigIssue> validate_config(const Config& config) {
  return validate_config(config.rig, config.dims, config.search);
}

const Config& require_valid(const Config& config) {
  const auto issues = validate_config(config);
  if (!issues.empty()) {
    std::string msg;
    for (const auto& i : issues) msg += (msg.empty() ? "" : "; ") + i.message;
    throw Error(ErrorCode::invalid_config, msg);
  }
  return config;
}

std::vector<KeyValue> parse_key_values(const std::string& text) {
  std::vector<KeyValue> out;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    const std::string line = trim(raw);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::invalid_config, "line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    KeyValue kv{trim(line.substr(0, eq)), trim(line.substr(eq + 1)), line_no};
    if (kv.key.empty()) throw Error(ErrorCode::invalid_config, "line " + std::to_string(line_no) + ": empty key");
    out.push_back(std::move(kv));
  }
  return out;
}

Config parse_config(const std::string& text) {
  Config config;
  std::vector<std::string> unknown;
  for (const auto& kv : parse_key_values(text)) {
    const auto it = setters().find(kv.key);
    if (it == setters().end()) {
      unknown.push_back(kv.key);
      continue;
    }
    it->second(config, kv);
  }
  if (!unknown.empty()) {
    std::string msg = "unknown keys:";
    for (const auto& k : unknown) msg += " " + k;
    throw Error(ErrorCode::invalid_config, msg);
  }
  return config;
}

Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot read config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const Config& c) {
  std::ostringstream out;
  const auto put = [&](const char* key, double v) { out << key << " = " << format_double(v) << '\n'; };
  put("camera.fx", c.rig.intrinsics.fx);
  put("camera.fy", c.rig.intrinsics.fy);
  put("camera.cx", c.rig.intrinsics.cx);
  put("camera.cy", c.rig.intrinsics.cy);
  put("camera.height_m", c.rig.height_m);
  put("camera.vfov_rad", c.rig.vfov_rad);
  out << "image.width = " << c.dims.width << '\n';
  out << "image.height = " << c.dims.height << '\n';
  put("search.yaw_min", c.search.yaw_min);
  put("search.yaw_max", c.search.yaw_max);
  put("search.yaw_step", c.search.yaw_step);
  put("search.tau_min", c.search.tau_min);
  put("search.tau_max", c.search.tau_max);
  put("search.tau_step", c.search.tau_step);
  put("search.pitch_min", c.search.pitch_min);
  put("search.pitch_max", c.search.pitch_max);
  put("search.pitch_step", c.search.pitch_step);
  out << "search.samples = " << c.search.samples << '\n';
  put("interp.alpha", c.search.interp_alpha);
  put("interp.beta", c.search.interp_beta);
  if (c.search.horizon_row) out << "roi.horizon_row = " << *c.search.horizon_row << '\n';
  return out.str();
}

std::vector<double> grid_nodes(double lo, double hi, double step) {
  if (!(step > 0.0) || !(lo <= hi)) throw Error(ErrorCode::invalid_argument, "grid_nodes: bad interval");
  // Nodes within 1e-9 steps of an end still count.
  constexpr double kSlack = 1e-9;
  const auto first = static_cast<long>(std::ceil(lo / step - kSlack));
  const auto last = static_cast<long>(std::floor(hi / step + kSlack));
  std::vector<double> nodes;
  nodes.reserve(static_cast<std::size_t>(std::max(0L, last - first + 1)));
  for (long k = first; k <= last; ++k) nodes.push_back(static_cast<double>(k) * step);
  return nodes;
}

}  // namespace corridor
