#include "corridor_depth/edge_extraction.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>

#include "corridor_depth/error.hpp"

namespace corridor {

namespace {

struct Sobel {
  int gx;
  int gy;
  double mag() const { return std::sqrt(static_cast<double>(gx * gx + gy * gy)); }
};

// 3x3 Sobel at an interior pixel.
Sobel sobel_at(const GrayImage& img, int u, int v) {
  const auto I = [&](int a, int b) { return static_cast<int>(img.at(a, b)); };
  return {(I(u + 1, v - 1) + 2 * I(u + 1, v) + I(u + 1, v + 1)) - (I(u - 1, v - 1) + 2 * I(u - 1, v) + I(u - 1, v + 1)),
          (I(u - 1, v + 1) + 2 * I(u, v + 1) + I(u + 1, v + 1)) - (I(u - 1, v - 1) + 2 * I(u, v - 1) + I(u + 1, v - 1))};
}

}  // namespace

RoiSpec build_roi(const ImageDims& dims, std::optional<int> horizon_row) {
  RoiSpec roi;
  roi.top_row = horizon_row ? std::clamp(*horizon_row, 0, dims.height - 1) : dims.height / 2;
  roi.bottom_row = dims.height;
  return roi;
}

EdgeMask canny_edges(const GrayImage& img, const RoiSpec& roi, double low_thresh, double high_thresh) {
  if (!(low_thresh < high_thresh)) throw Error(ErrorCode::invalid_argument, "canny: low threshold must be below high");
  const int w = img.dims.width;
  const int h = img.dims.height;
  EdgeMask mask(img.dims, 0);
  if (w < 3 || h < 3) return mask;

  const int top = std::max(roi.top_row, 1);
  const int bottom = std::min(roi.bottom_row, h - 1);
  std::vector<float> gx(img.pixels.size(), 0.f);
  std::vector<float> gy(img.pixels.size(), 0.f);
  std::vector<float> mag(img.pixels.size(), 0.f);
  const auto idx = [w](int u, int v) { return static_cast<std::size_t>(v) * w + u; };

  for (int v = top; v < bottom; ++v) {
    for (int u = 1; u < w - 1; ++u) {
      const auto [sx, sy] = sobel_at(img, u, v);
      gx[idx(u, v)] = static_cast<float>(sx);
      gy[idx(u, v)] = static_cast<float>(sy);
      mag[idx(u, v)] = std::sqrt(static_cast<float>(sx * sx + sy * sy));
    }
  }

  // 0 = suppressed, 1 = weak, 2 = strong.
  std::vector<std::uint8_t> cls(img.pixels.size(), 0);
  constexpr float kTan22 = 0.41421356f;
  for (int v = top; v < bottom; ++v) {
    for (int u = 1; u < w - 1; ++u) {
      const float m = mag[idx(u, v)];
      if (m <= low_thresh) continue;
      const float ax = std::abs(gx[idx(u, v)]);
      const float ay = std::abs(gy[idx(u, v)]);
      int du = 0;
      int dv = 0;
      if (ay <= ax * kTan22) {
        du = 1;
      } else if (ax <= ay * kTan22) {
        dv = 1;
      } else {
        du = 1;
        dv = (gx[idx(u, v)] * gy[idx(u, v)] > 0) ? 1 : -1;
      }
      // Ties keep both pixels.
      if (m < mag[idx(u + du, v + dv)] || m < mag[idx(u - du, v - dv)]) continue;
      cls[idx(u, v)] = m > high_thresh ? 2 : 1;
    }
  }

  std::vector<std::size_t> stack;
  for (std::size_t i = 0; i < cls.size(); ++i) {
    if (cls[i] == 2) {
      mask.pixels[i] = 255;
      stack.push_back(i);
    }
  }
  while (!stack.empty()) {
    const std::size_t i = stack.back();
    stack.pop_back();
    const int u = static_cast<int>(i % w);
    const int v = static_cast<int>(i / w);
    for (int dv = -1; dv <= 1; ++dv) {
      for (int du = -1; du <= 1; ++du) {
        const int nu = u + du;
        const int nv = v + dv;
        if (nu < 0 || nv < top || nu >= w || nv >= bottom) continue;
        const std::size_t j = idx(nu, nv);
        if (cls[j] == 1 && mask.pixels[j] == 0) {
          mask.pixels[j] = 255;
          stack.push_back(j);
        }
      }
    }
  }
  return mask;
}

namespace {

struct Pixel {
  double u;
  double v;
};

struct Fit {
  double cu, cv;  // centroid
  double du, dv;  // unit direction
  bool ok = false;
};

Fit total_least_squares(const std::vector<Pixel>& pts) {
  Fit f{};
  if (pts.size() < 2) return f;
  double su = 0, sv = 0;
  for (const auto& p : pts) {
    su += p.u;
    sv += p.v;
  }
  const double n = static_cast<double>(pts.size());
  f.cu = su / n;
  f.cv = sv / n;
  double suu = 0, svv = 0, suv = 0;
  for (const auto& p : pts) {
    const double a = p.u - f.cu;
    const double b = p.v - f.cv;
    suu += a * a;
    svv += b * b;
    suv += a * b;
  }
  f.ok = suu + svv > 0.0;
  if (!f.ok) return f;
  // Principal axis of the 2x2 scatter matrix.
  const double angle = 0.5 * std::atan2(2.0 * suv, suu - svv);
  f.du = std::cos(angle);
  f.dv = std::sin(angle);
  return f;
}

std::vector<Pixel> near_line(const std::vector<Pixel>& edges, double nu, double nv, double rho, double band) {
  std::vector<Pixel> out;
  for (const auto& p : edges) {
    if (std::abs(p.u * nu + p.v * nv - rho) <= band) out.push_back(p);
  }
  return out;
}

// Pixels of the longest stretch along the fitted line without a hole wider
// than max_gap, ordered along the line.
std::vector<std::pair<double, Pixel>> longest_run(const std::vector<Pixel>& support, const Fit& fit, double max_gap) {
  std::vector<std::pair<double, Pixel>> along;
  along.reserve(support.size());
  for (const auto& p : support) along.push_back({(p.u - fit.cu) * fit.du + (p.v - fit.cv) * fit.dv, p});
  std::sort(along.begin(), along.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::size_t best_begin = 0, best_end = 0, begin = 0;
  for (std::size_t i = 1; i <= along.size(); ++i) {
    if (i == along.size() || along[i].first - along[i - 1].first > max_gap) {
      if (i - begin > best_end - best_begin) {
        best_begin = begin;
        best_end = i;
      }
      begin = i;
    }
  }
  return {along.begin() + static_cast<long>(best_begin), along.begin() + static_cast<long>(best_end)};
}

bool same_line(const LineSegment& a, const LineSegment& b) {
  double da = std::abs(a.angle_rad - b.angle_rad);
  da = std::min(da, kPi - da);
  if (da > 1.5 * kPi / 180.0) return false;
  // Midpoint of b against the infinite line of a.
  const double du = a.end.u - a.start.u;
  const double dv = a.end.v - a.start.v;
  const double len = std::hypot(du, dv);
  const double mu = 0.5 * (b.start.u + b.end.u) - a.start.u;
  const double mv = 0.5 * (b.start.v + b.end.v) - a.start.v;
  return std::abs(mu * dv - mv * du) / len < 3.0;
}

}  // namespace

LineSet hough_lines(const EdgeMask& mask, const EdgeParams& params) {
  if (!(params.rho_res > 0.0) || !(params.theta_res > 0.0)) {
    throw Error(ErrorCode::invalid_argument, "hough: resolutions must be positive");
  }
  std::vector<Pixel> edges;
  for (int v = 0; v < mask.dims.height; ++v) {
    for (int u = 0; u < mask.dims.width; ++u) {
      if (mask.at(u, v)) edges.push_back({static_cast<double>(u), static_cast<double>(v)});
    }
  }
  LineSet out;
  if (edges.empty()) return out;

  const int n_theta = std::max(1, static_cast<int>(std::lround(kPi / params.theta_res)));
  const double theta_step = kPi / n_theta;
  const double diag = std::hypot(mask.dims.width, mask.dims.height);
  const int rho_half = static_cast<int>(std::ceil(diag / params.rho_res)) + 1;
  const int n_rho = 2 * rho_half + 1;
  std::vector<double> cos_t(n_theta), sin_t(n_theta);
  for (int t = 0; t < n_theta; ++t) {
    cos_t[t] = std::cos(t * theta_step);
    sin_t[t] = std::sin(t * theta_step);
  }

  std::vector<int> acc(static_cast<std::size_t>(n_theta) * n_rho, 0);
  const auto cell = [n_rho](int t, int k) { return static_cast<std::size_t>(t) * n_rho + k; };
  for (const auto& p : edges) {
    for (int t = 0; t < n_theta; ++t) {
      const double rho = p.u * cos_t[t] + p.v * sin_t[t];
      const int k = static_cast<int>(std::lround(rho / params.rho_res)) + rho_half;
      ++acc[cell(t, k)];
    }
  }

  struct Peak {
    int votes;
    int t;
    int k;
  };
  std::vector<Peak> peaks;
  const int r = params.nms_radius;
  for (int t = 0; t < n_theta; ++t) {
    for (int k = 0; k < n_rho; ++k) {
      const int votes = acc[cell(t, k)];
      if (votes < params.votes_min) continue;
      bool is_peak = true;
      const std::size_t self = cell(t, k);
      for (int dt = -r; dt <= r && is_peak; ++dt) {
        for (int dk = -r; dk <= r; ++dk) {
          if (dt == 0 && dk == 0) continue;
          int nt = t + dt;
          int signed_rho = k - rho_half + dk;
          // (theta + pi, rho) is the same line as (theta, -rho).
          if (nt < 0 || nt >= n_theta) {
            nt = nt < 0 ? nt + n_theta : nt - n_theta;
            signed_rho = -signed_rho;
          }
          const int nk = signed_rho + rho_half;
          if (nk < 0 || nk >= n_rho) continue;
          const std::size_t other = cell(nt, nk);
          const int nv = acc[other];
          if (nv > votes || (nv == votes && other < self)) {
            is_peak = false;
            break;
          }
        }
      }
      if (is_peak) peaks.push_back({votes, t, k});
    }
  }
  std::stable_sort(peaks.begin(), peaks.end(), [](const Peak& a, const Peak& b) { return a.votes > b.votes; });

  for (const auto& peak : peaks) {
    double nu = cos_t[peak.t];
    double nv = sin_t[peak.t];
    double rho = (peak.k - rho_half) * params.rho_res;
    std::vector<Pixel> support = near_line(edges, nu, nv, rho, params.inlier_band_px);
    Fit fit{};
    std::vector<std::pair<double, Pixel>> run;
    for (int pass = 0; pass < 4; ++pass) {
      fit = total_least_squares(support);
      if (!fit.ok) break;
      nu = -fit.dv;
      nv = fit.du;
      rho = fit.cu * nu + fit.cv * nv;
      run = longest_run(near_line(edges, nu, nv, rho, params.inlier_band_px), fit, params.max_gap_px);
      support.clear();
      for (const auto& [s, p] : run) support.push_back(p);
    }
    if (!fit.ok || run.size() < 2) continue;
    const double s0 = (run.front().second.u - fit.cu) * fit.du + (run.front().second.v - fit.cv) * fit.dv;
    const double s1 = (run.back().second.u - fit.cu) * fit.du + (run.back().second.v - fit.cv) * fit.dv;
    // Extreme support pixels projected onto the fitted line.
    const Point2 a{fit.cu + s0 * fit.du, fit.cv + s0 * fit.dv};
    const Point2 b{fit.cu + s1 * fit.du, fit.cv + s1 * fit.dv};
    const LineSegment seg = LineSegment::from_endpoints(a, b, peak.votes);
    if (seg.length_px <= 0.0) continue;
    const bool duplicate = std::any_of(out.lines.begin(), out.lines.end(),
                                       [&](const LineSegment& kept) { return same_line(kept, seg); });
    if (!duplicate) out.lines.push_back(seg);
  }
  return out;
}

LineSet hough_lines(const EdgeMask& mask, double rho_res, double theta_res, int votes_min) {
  EdgeParams p;
  p.rho_res = rho_res;
  p.theta_res = theta_res;
  p.votes_min = votes_min;
  return hough_lines(mask, p);
}

ScenePrior scene_prior(const ImageDims& dims) {
  const double w = dims.width;
  const double h = dims.height;
  return {h / 4.0, 0.5 * std::sqrt(h * h + w * w), std::atan(h / w)};
}

bool satisfies_prior(const LineSegment& line, const ScenePrior& prior) {
  if (line.length_px < prior.min_length || line.length_px > prior.max_length) return false;
  const double a = line.angle_rad;
  const bool left_band = a >= prior.min_angle && a < kPi / 2;
  const bool right_band = a > kPi / 2 && a <= kPi - prior.min_angle;
  return left_band || right_band;
}

EdgeLinePair filter_scene_prior(const LineSet& lines, const ImageDims& dims) {
  const ScenePrior prior = scene_prior(dims);
  const double mid = dims.width / 2.0;
  const LineSegment* left = nullptr;
  const LineSegment* right = nullptr;
  for (const auto& line : lines.lines) {
    if (!satisfies_prior(line, prior)) continue;
    // Left edges rise toward the center (angle below pi/2), right edges mirror that.
    if (!left && line.bottom().u < mid && line.angle_rad < kPi / 2) left = &line;
    if (!right && line.bottom().u > mid && line.angle_rad > kPi / 2) right = &line;
  }
  if (!left || !right) {
    throw Error(ErrorCode::edge_pair_not_found,
                std::string("no admissible ") + (!left && !right ? "left or right" : !left ? "left" : "right") +
                    " floor edge among " + std::to_string(lines.lines.size()) + " lines");
  }
  return {*left, *right};
}

namespace {

// Sub-pixel edge position in an intensity profile, in profile index units.
// A thin line shows a rising and a falling step close together and is
// located midway between them; otherwise the strongest step is used.
std::optional<double> profile_peak(const std::vector<double>& intensity) {
  const std::size_t n = intensity.size();
  if (n < 3) return std::nullopt;
  std::vector<double> d(n - 1);
  for (std::size_t j = 0; j + 1 < n; ++j) d[j] = intensity[j + 1] - intensity[j];
  // Extremum of one sign with a parabolic refinement against same-sign neighbors.
  const auto locate = [&](double sign) -> std::optional<std::pair<double, double>> {
    std::size_t best = 0;
    for (std::size_t j = 1; j < d.size(); ++j) {
      if (sign * d[j] > sign * d[best]) best = j;
    }
    const double peak = sign * d[best];
    if (!(peak > 0.0)) return std::nullopt;
    const double left = best > 0 ? std::max(0.0, sign * d[best - 1]) : 0.0;
    const double right = best + 1 < d.size() ? std::max(0.0, sign * d[best + 1]) : 0.0;
    const double curv = left - 2.0 * peak + right;
    const double offset = curv < 0.0 ? std::clamp(0.5 * (left - right) / curv, -0.5, 0.5) : 0.0;
    return std::pair{peak, static_cast<double>(best) + 0.5 + offset};
  };
  const auto rise = locate(1.0);
  const auto fall = locate(-1.0);
  if (!rise && !fall) return std::nullopt;
  if (rise && fall) {
    const double strong = std::max(rise->first, fall->first);
    if (std::min(rise->first, fall->first) >= 0.25 * strong && std::abs(rise->second - fall->second) <= 3.0) {
      return 0.5 * (rise->second + fall->second);
    }
    return rise->first >= fall->first ? rise->second : fall->second;
  }
  return rise ? rise->second : fall->second;
}

// Line through the sub-pixel edge positions across `line`, one sample per
// integer step of its major axis. Samples whose window reaches `other` are skipped.
LineSegment refine_line(const GrayImage& img, const RoiSpec& roi, const LineSegment& line, const LineSegment& other,
                        int half_window) {
  LineSegment cur = line;
  for (int pass = 0; pass < 3; ++pass) {
    const bool steep = std::abs(cur.end.v - cur.start.v) >= std::abs(cur.end.u - cur.start.u);
    const auto minor_at = [steep](const LineSegment& l, double m) {
      const double dm = steep ? l.end.v - l.start.v : l.end.u - l.start.u;
      const double dn = steep ? l.end.u - l.start.u : l.end.v - l.start.v;
      return (steep ? l.start.u : l.start.v) + (m - (steep ? l.start.v : l.start.u)) * dn / dm;
    };
    const double m0 = steep ? std::min(cur.start.v, cur.end.v) : std::min(cur.start.u, cur.end.u);
    const double m1 = steep ? std::max(cur.start.v, cur.end.v) : std::max(cur.start.u, cur.end.u);
    const double other_span = steep ? std::abs(other.end.v - other.start.v) : std::abs(other.end.u - other.start.u);
    std::vector<Pixel> samples;
    for (int m = static_cast<int>(std::ceil(m0)); m <= static_cast<int>(std::floor(m1)); ++m) {
      const double c = minor_at(cur, m);
      if (other_span > 0.0 && std::abs(minor_at(other, m) - c) <= 2.0 * half_window + 1.0) continue;
      const int c0 = static_cast<int>(std::lround(c));
      std::vector<double> profile;
      for (int k = c0 - half_window; k <= c0 + half_window; ++k) {
        const int u = steep ? k : m;
        const int v = steep ? m : k;
        if (u < 0 || v < 0 || u >= img.dims.width || v >= img.dims.height || !roi.contains_row(v)) break;
        profile.push_back(img.at(u, v));
      }
      if (profile.size() != static_cast<std::size_t>(2 * half_window + 1)) continue;
      const auto peak = profile_peak(profile);
      if (!peak) continue;
      const double centroid = c0 - half_window + *peak;
      samples.push_back(steep ? Pixel{centroid, static_cast<double>(m)} : Pixel{static_cast<double>(m), centroid});
    }
    if (samples.size() < 2) return cur;
    const Fit fit = total_least_squares(samples);
    if (!fit.ok) return cur;
    const auto project = [&](Point2 p) {
      const double s = (p.u - fit.cu) * fit.du + (p.v - fit.cv) * fit.dv;
      return Point2{fit.cu + s * fit.du, fit.cv + s * fit.dv};
    };
    cur = LineSegment::from_endpoints(project(line.start), project(line.end), line.votes);
  }
  return cur;
}

}  // namespace

EdgeLinePair refine_pair(const GrayImage& img, const RoiSpec& roi, const EdgeLinePair& pair, int half_window) {
  return {refine_line(img, roi, pair.left, pair.right, half_window),
          refine_line(img, roi, pair.right, pair.left, half_window)};
}

EdgeExtraction extract_edges(const GrayImage& img, std::optional<int> horizon_row, const EdgeParams& params) {
  EdgeExtraction out;
  out.roi = build_roi(img.dims, horizon_row);
  out.mask = canny_edges(img, out.roi, params.canny_low, params.canny_high);
  out.lines = hough_lines(out.mask, params);
  out.pair = filter_scene_prior(out.lines, img.dims);
  if (params.refine_half_window > 0) out.pair = refine_pair(img, out.roi, out.pair, params.refine_half_window);
  return out;
}

RgbImage draw_edge_overlay(const GrayImage& img, const EdgeMask& mask, const EdgeLinePair& pair) {
  RgbImage rgb(img);
  for (int v = 0; v < mask.dims.height; ++v) {
    for (int u = 0; u < mask.dims.width; ++u) {
      if (mask.at(u, v)) rgb.set(u, v, 220, 40, 40);
    }
  }
  for (const LineSegment* line : {&pair.left, &pair.right}) {
    const int steps = static_cast<int>(std::ceil(line->length_px)) + 1;
    for (int i = 0; i <= steps; ++i) {
      const double s = static_cast<double>(i) / steps;
      const double u = line->start.u + s * (line->end.u - line->start.u);
      const double v = line->start.v + s * (line->end.v - line->start.v);
      rgb.set(static_cast<int>(std::lround(u)), static_cast<int>(std::lround(v)), 40, 230, 40);
    }
  }
  return rgb;
}

}  // namespace corridor
