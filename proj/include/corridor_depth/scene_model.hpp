#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace corridor {

inline constexpr double kPi = 3.14159265358979323846;

struct Point2 {
  double u = 0.0;
  double v = 0.0;

  friend bool operator==(const Point2&, const Point2&) = default;
};

inline double distance(Point2 a, Point2 b) { return std::hypot(a.u - b.u, a.v - b.v); }

struct ImageDims {
  int width = 420;
  int height = 360;

  std::size_t pixel_count() const { return static_cast<std::size_t>(width) * static_cast<std::size_t>(height); }

  friend bool operator==(const ImageDims&, const ImageDims&) = default;
};

/// Pinhole intrinsics in pixels. The depth geometry uses a single focal
/// length ft, which is fx (the two are assumed equal).
struct CameraIntrinsics {
  double fx = 300.0;
  double fy = 300.0;
  double cx = 210.0;
  double cy = 180.0;

  double ft() const { return fx; }

  friend bool operator==(const CameraIntrinsics&, const CameraIntrinsics&) = default;
};

/// Intrinsics plus mounting: height above the floor and the vertical aperture
/// angle, i.e. the angle between the optical axis and the ray through the
/// bottom image edge.
struct CameraRig {
  CameraIntrinsics intrinsics;
  double height_m = 0.66;
  double vfov_rad = 0.5404195002705842;  // atan(180 / 300)

  /// Rig whose aperture angle agrees with the intrinsics for an image of `dims`.
  static CameraRig from_intrinsics(const CameraIntrinsics& intr, double height_m, const ImageDims& dims);

  friend bool operator==(const CameraRig&, const CameraRig&) = default;
};

/// A fitted image line. Angles are in (0, pi), measured from the +u axis with
/// the image v axis pointing up (so a floor edge on the left half of the image
/// has an angle below pi/2). `start` is the lower endpoint (larger v).
struct LineSegment {
  double angle_rad = 0.0;
  Point2 start;
  Point2 end;
  double length_px = 0.0;
  int votes = 0;

  static LineSegment from_endpoints(Point2 a, Point2 b, int votes = 0);

  const Point2& bottom() const { return start; }
  const Point2& top() const { return end; }

  /// Column of the infinite line at row v. Undefined for horizontal lines.
  double u_at_row(double v) const;

  /// Horizontal mirror about u = width / 2.
  LineSegment mirrored(int width) const;

  friend bool operator==(const LineSegment&, const LineSegment&) = default;
};

/// Normalize any direction angle into (0, pi].
double normalize_line_angle(double angle);

struct EdgeLinePair {
  LineSegment left;
  LineSegment right;

  friend bool operator==(const EdgeLinePair&, const EdgeLinePair&) = default;
};

struct VirtualPose {
  double yaw_rad = 0.0;
  double tau = 0.0;  // unit-depth lateral shift

  friend bool operator==(const VirtualPose&, const VirtualPose&) = default;
};

struct ProjectionTerm {
  double s_v = 1.0;
  double xi = 0.0;
};

/// Dense depth in meters, row-major. Zero marks a pixel without an estimate.
struct DepthMap {
  static constexpr double kInvalid = 0.0;

  ImageDims dims;
  std::vector<double> values;

  DepthMap() = default;
  explicit DepthMap(ImageDims d) : dims(d), values(d.pixel_count(), kInvalid) {}

  double& at(int u, int v) { return values[static_cast<std::size_t>(v) * dims.width + u]; }
  double at(int u, int v) const { return values[static_cast<std::size_t>(v) * dims.width + u]; }
  static bool is_valid(double z) { return z > 0.0 && std::isfinite(z); }
  std::size_t valid_count() const;
};

enum class PitchResidual {
  width_variance,  // sum of squared deviations of the per-row widths from their mean
  summed_width,    // literal summed width
};

struct SearchConfig {
  double yaw_min = -0.314;
  double yaw_max = 0.314;
  double yaw_step = 0.05;
  double tau_min = -1.0;
  double tau_max = 1.0;
  double tau_step = 0.05;
  double pitch_min = -0.15;
  double pitch_max = 0.15;
  double pitch_step = 0.01;
  int samples = 64;
  double interp_alpha = 1.0;
  double interp_beta = 0.0;
  std::optional<int> horizon_row;  // first processed row; image middle when unset

  friend bool operator==(const SearchConfig&, const SearchConfig&) = default;
};

struct Config {
  CameraRig rig;
  ImageDims dims;
  SearchConfig search;

  friend bool operator==(const Config&, const Config&) = default;
};

struct ConfigIssue {
  std::string field;
  std::string message;
};

/// Every violated invariant, in a fixed order. Empty means valid.
std::vector<ConfigIssue> validate_config(const CameraRig& rig, const ImageDims& dims, const SearchConfig& search);
std::vector<ConfigIssue> validate_config(const Config& config);

/// Returns `config` unchanged or throws Error(invalid_config) naming every issue.
const Config& require_valid(const Config& config);

/// `key = value` text; '#' starts a comment. Missing keys keep their defaults,
/// unknown keys are an error.
Config parse_config(const std::string& text);
Config load_config(const std::string& path);
std::string serialize_config(const Config& config);

struct KeyValue {
  std::string key;
  std::string value;
  int line = 0;
};

/// Splits `key = value` lines, dropping blanks and '#' comments. Throws
/// Error(invalid_config) on a line without '=' or with an empty key.
std::vector<KeyValue> parse_key_values(const std::string& text);

/// Shortest text that parses back to exactly `x`.
std::string format_double(double x);

/// Symmetric search values k * step inside [lo, hi]; zero is always a node
/// when the interval contains it.
std::vector<double> grid_nodes(double lo, double hi, double step);

}  // namespace corridor
