#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "corridor_depth/scene_model.hpp"

namespace corridor {

/// Computed over pixels valid in both maps with 0 < truth <= cap. Logs are base 10.
struct MetricsReport {
  double abs_rel = 0.0;
  double log10_err = 0.0;
  double rmse = 0.0;
  double rmse_log = 0.0;
  std::size_t n = 0;
  std::size_t n_excluded = 0;  // in range in one map only
  std::size_t n_clamped = 0;   // predictions <= 0 taken as 1 mm in the logs
  double depth_cap = 0.0;
};

/// Throws Error(invalid_argument) on mismatched dims, Error(no_overlap) when no pixel qualifies.
MetricsReport depth_metrics(const DepthMap& pred, const DepthMap& truth, double depth_cap);

/// |estimated - truth| / truth. Throws Error(invalid_argument) unless truth > 0.
double width_error(double estimated, double truth);

struct EvalPair {
  std::string scene;
  DepthMap pred;
  DepthMap truth;
};

struct EvalRow {
  std::string scene;
  double cap_m = 0.0;
  std::optional<MetricsReport> metrics;
  std::string error;  // set when metrics is empty
};

/// One row per (pair, cap), pairs outermost, in input order.
std::vector<EvalRow> batch_report(const std::vector<EvalPair>& pairs, const std::vector<double>& caps);

/// scene,cap_m,abs_rel,log10,rmse,rmse_log,n_pixels,n_excluded
std::string eval_csv(const std::vector<EvalRow>& rows);

}  // namespace corridor
