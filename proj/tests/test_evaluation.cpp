#include <doctest.h>

#include <random>

#include "corridor_depth/error.hpp"
#include "corridor_depth/evaluation.hpp"
#include "oracles.hpp"

using namespace corridor;

namespace {

DepthMap random_map(std::mt19937_64& rng, double invalid_rate) {
  DepthMap m({8, 8});
  std::uniform_real_distribution<double> z(0.2, 60.0), coin(0.0, 1.0);
  for (auto& v : m.values) v = coin(rng) < invalid_rate ? DepthMap::kInvalid : z(rng);
  return m;
}

DepthMap single(double z) {
  DepthMap m({1, 1});
  m.values[0] = z;
  return m;
}

}  // namespace

TEST_SUITE("evaluation") {
  TEST_CASE("identical maps score zero") {
    std::mt19937_64 rng(1);
    const auto m = random_map(rng, 0.1);
    const auto r = depth_metrics(m, m, 100.0);
    CHECK(r.abs_rel == 0.0);
    CHECK(r.log10_err == 0.0);
    CHECK(r.rmse == 0.0);
    CHECK(r.rmse_log == 0.0);
    CHECK(r.n == m.valid_count());
  }

  TEST_CASE("hand case") {
    const auto r = depth_metrics(single(2.2), single(2.0), 5.0);
    CHECK(r.n == 1);
    CHECK(std::abs(r.abs_rel - 0.1) < 1e-12);
    CHECK(std::abs(r.rmse - 0.2) < 1e-12);
    CHECK(r.log10_err == doctest::Approx(0.04139).epsilon(1e-4));
    CHECK(r.rmse_log == doctest::Approx(r.log10_err));
  }

  TEST_CASE("brute force agreement on random maps") {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 100; ++trial) {
      const auto pred = random_map(rng, 0.15);
      const auto truth = random_map(rng, 0.15);
      const double cap = trial % 2 ? 40.0 : 20.0;
      const auto want = oracle::metrics(pred.values, truth.values, cap);
      if (want.n == 0) continue;
      const auto got = depth_metrics(pred, truth, cap);
      CHECK(got.n == want.n);
      CHECK(std::abs(got.abs_rel - want.abs_rel) <= 1e-12);
      CHECK(std::abs(got.log10_err - want.log10) <= 1e-12);
      CHECK(std::abs(got.rmse - want.rmse) <= 1e-12);
      CHECK(std::abs(got.rmse_log - want.rmse_log) <= 1e-12);
    }
  }

  TEST_CASE("scale covariance") {
    std::mt19937_64 rng(9);
    for (double c : {0.5, 3.0}) {
      const auto pred = random_map(rng, 0.0);
      const auto truth = random_map(rng, 0.0);
      auto sp = pred, st = truth;
      for (auto& v : sp.values) v *= c;
      for (auto& v : st.values) v *= c;
      const auto a = depth_metrics(pred, truth, 1e9);
      const auto b = depth_metrics(sp, st, 1e9);
      CHECK(std::abs(a.abs_rel - b.abs_rel) < 1e-9);
      CHECK(std::abs(a.log10_err - b.log10_err) < 1e-9);
      CHECK(std::abs(a.rmse_log - b.rmse_log) < 1e-9);
      CHECK(std::abs(c * a.rmse - b.rmse) < 1e-9);
    }
  }

  TEST_CASE("larger cap never shrinks the pixel set") {
    std::mt19937_64 rng(4);
    const auto pred = random_map(rng, 0.1);
    const auto truth = random_map(rng, 0.1);
    std::size_t prev = 0;
    for (double cap = 1.0; cap <= 64.0; cap += 3.0) {
      try {
        const auto r = depth_metrics(pred, truth, cap);
        CHECK(r.n >= prev);
        prev = r.n;
      } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::no_overlap);
        CHECK(prev == 0);
      }
    }
  }

  TEST_CASE("exclusions and clamping") {
    DepthMap pred({4, 1}), truth({4, 1});
    pred.values = {2.0, 0.0, 3.0, -1.0};
    truth.values = {2.0, 2.0, 0.0, 2.0};
    const auto r = depth_metrics(pred, truth, 5.0);
    CHECK(r.n == 2);
    CHECK(r.n_excluded == 2);
    CHECK(r.n_clamped == 1);
    CHECK(r.abs_rel == doctest::Approx((0.0 + 1.5) / 2));
  }

  TEST_CASE("no overlap and bad sizes") {
    try {
      depth_metrics(single(3.0), single(10.0), 5.0);
      FAIL("expected no_overlap");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::no_overlap);
    }
    CHECK_THROWS_AS(depth_metrics(DepthMap({2, 2}), DepthMap({2, 1}), 5.0), Error);
  }

  TEST_CASE("width error") {
    CHECK(width_error(2.16, 2.11) == doctest::Approx(0.0237).epsilon(1e-2));
    CHECK(width_error(2.0, 2.0) == 0.0);
    CHECK(width_error(1.98, 2.02) == doctest::Approx(0.0198).epsilon(1e-2));
    CHECK_THROWS_AS(width_error(1.0, 0.0), Error);
  }

  TEST_CASE("batch rows") {
    std::mt19937_64 rng(6);
    const auto a = random_map(rng, 0.0);
    const auto b = random_map(rng, 0.0);
    const std::vector<EvalPair> same{{"s0", a, a}, {"s1", b, b}};
    auto rows = batch_report(same, {40.0});
    REQUIRE(rows.size() == 2);
    for (const auto& r : rows) {
      REQUIRE(r.metrics);
      CHECK(r.metrics->abs_rel == 0.0);
      CHECK(r.metrics->rmse == 0.0);
    }
    const std::vector<EvalPair> mixed{{"s0", a, b}, {"far", single(50.0), single(50.0)}};
    rows = batch_report(mixed, {5.0, 40.0});
    REQUIRE(rows.size() == 4);
    CHECK(rows[0].scene == "s0");
    CHECK(rows[1].cap_m == 40.0);
    CHECK(rows[1].metrics->abs_rel == depth_metrics(a, b, 40.0).abs_rel);
    CHECK_FALSE(rows[2].metrics);
    CHECK(rows[2].error.find("no-overlap") != std::string::npos);
    const auto csv = eval_csv(rows);
    CHECK(csv.rfind("scene,cap_m,abs_rel,log10,rmse,rmse_log,n_pixels,n_excluded\n", 0) == 0);
    CHECK(csv.find("far,5,nan,nan,nan,nan,0,0\n") != std::string::npos);
    CHECK_THROWS_AS(batch_report({}, {5.0}), Error);
  }
}
