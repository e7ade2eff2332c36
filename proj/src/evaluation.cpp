#include "corridor_depth/evaluation.hpp"

#include <cmath>
#include <sstream>

#include "corridor_depth/error.hpp"

namespace corridor {

namespace {

constexpr double kMinLogDepth = 1e-3;

bool in_range(double z, double cap) { return DepthMap::is_valid(z) && z <= cap; }

}  // namespace

MetricsReport depth_metrics(const DepthMap& pred, const DepthMap& truth, double depth_cap) {
  if (!(pred.dims == truth.dims) || pred.values.size() != truth.values.size()) {
    throw Error(ErrorCode::invalid_argument, "prediction and truth differ in size");
  }
  MetricsReport r;
  r.depth_cap = depth_cap;
  double sum_rel = 0.0, sum_log = 0.0, sum_sq = 0.0, sum_sq_log = 0.0;
  for (std::size_t i = 0; i < truth.values.size(); ++i) {
    const double y = truth.values[i];
    const double p = pred.values[i];
    const bool truth_ok = in_range(y, depth_cap);
    const bool pred_ok = std::isfinite(p) && p != DepthMap::kInvalid;
    if (!truth_ok || !pred_ok) {
      if ((truth_ok && !pred_ok) || (pred_ok && !DepthMap::is_valid(y))) ++r.n_excluded;
      continue;
    }
    double p_log = p;
    if (p <= 0.0) {
      p_log = kMinLogDepth;
      ++r.n_clamped;
    }
    const double d_log = std::log10(y) - std::log10(p_log);
    sum_rel += std::abs(y - p) / y;
    sum_log += std::abs(d_log);
    sum_sq += (y - p) * (y - p);
    sum_sq_log += d_log * d_log;
    ++r.n;
  }
  if (r.n == 0) throw Error(ErrorCode::no_overlap, "no pixel is valid in both maps within " + format_double(depth_cap) + " m");
  const double n = static_cast<double>(r.n);
  r.abs_rel = sum_rel / n;
  r.log10_err = sum_log / n;
  r.rmse = std::sqrt(sum_sq / n);
  r.rmse_log = std::sqrt(sum_sq_log / n);
  return r;
}

double width_error(double estimated, double truth) {
  if (!(truth > 0.0)) throw Error(ErrorCode::invalid_argument, "true width must be positive");
  return std::abs(estimated - truth) / truth;
}

std::vector<EvalRow> batch_report(const std::vector<EvalPair>& pairs, const std::vector<double>& caps) {
  if (pairs.empty() || caps.empty()) throw Error(ErrorCode::invalid_argument, "batch_report needs pairs and caps");
  std::vector<EvalRow> rows;
  for (const auto& p : pairs) {
    for (const double cap : caps) {
      EvalRow row{p.scene, cap, std::nullopt, {}};
      try {
        row.metrics = depth_metrics(p.pred, p.truth, cap);
      } catch (const Error& e) {
        row.error = e.what();
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::string eval_csv(const std::vector<EvalRow>& rows) {
  std::ostringstream out;
  out << "scene,cap_m,abs_rel,log10,rmse,rmse_log,n_pixels,n_excluded\n";
  for (const auto& r : rows) {
    out << r.scene << ',' << format_double(r.cap_m) << ',';
    if (r.metrics) {
      const auto& m = *r.metrics;
      out << format_double(m.abs_rel) << ',' << format_double(m.log10_err) << ',' << format_double(m.rmse) << ','
          << format_double(m.rmse_log) << ',' << m.n << ',' << m.n_excluded << '\n';
    } else {
      out << "nan,nan,nan,nan,0,0\n";
    }
  }
  return out.str();
}

}  // namespace corridor
