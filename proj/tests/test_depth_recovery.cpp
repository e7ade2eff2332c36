#include <doctest.h>

#include <cmath>

#include "corridor_depth/depth_recovery.hpp"
#include "corridor_depth/error.hpp"
#include "corridor_depth/evaluation.hpp"
#include "corridor_depth/pipeline.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace corridor;

namespace {

const ImageDims kDims{};

CameraRig rig(double h) { return CameraRig::from_intrinsics({}, h, kDims); }

struct Recovered {
  CorridorScene scene;
  Config config;
  PoseEstimate pose;
  VirtualEdgePoints pts;
};

Recovered recover_analytic(double width, double yaw, double pitch) {
  Recovered r;
  r.scene = fixture::scene(width, yaw, pitch);
  r.config = fixture::config_for(r.scene);
  const auto pair = fixture::analytic_pair(r.scene);
  r.pose = estimate_pose(pair, r.config.search, r.config.rig.intrinsics, r.config.dims);
  r.pts = project_edges_to_virtual(pair, r.pose.pose, r.config.rig.intrinsics, r.config.dims, r.config.search.samples);
  return r;
}

}  // namespace

TEST_SUITE("depth_recovery") {
  TEST_CASE("bottom row depth") {
    CameraRig r = rig(0.66);
    r.vfov_rad = 0.5;
    CHECK(bottom_row_depth(r, 0.0) == doctest::Approx(1.2081).epsilon(1e-4));
    CHECK(bottom_row_depth(r, 0.0) == doctest::Approx(0.66 / std::tan(0.5)).epsilon(1e-15));
    r.height_m = 1.0;
    r.vfov_rad = kPi / 4 - 0.1;
    CHECK(bottom_row_depth(r, 0.1) == doctest::Approx(1.0).epsilon(1e-12));
    try {
      bottom_row_depth(r, -1.0);
      FAIL("expected horizon_below_image");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::horizon_below_image);
    }
  }

  TEST_CASE("bottom centre pixel matches the ray oracle") {
    for (double h : {0.66, 1.45}) {
      for (double p : {-0.1, -0.03, 0.0, 0.05, 0.1}) {
        const auto r = rig(h);
        const double z = oracle::floor_depth(r.intrinsics.cx, kDims.height, h, p, 0.0, r.intrinsics);
        CHECK(std::abs(bottom_row_depth(r, p) - z) < 1e-9);
        const auto e = edge_point_depth({r.intrinsics.cx, double(kDims.height)}, r, p, kDims);
        CHECK(e.terms.delta_z == 0.0);
        CHECK(e.z == e.terms.z0);
      }
    }
  }

  TEST_CASE("golden pair at zero pitch") {
    const auto r = rig(0.66);
    const auto e = edge_point_depth({210, 300}, r, 0.0, kDims);
    const double oracle_z = oracle::floor_depth(210, 300, 0.66, 0.0, 0.0, r.intrinsics);
    CHECK(oracle_z == doctest::Approx(1.65).epsilon(1e-12));
    CHECK(e.z == doctest::Approx(oracle_z).epsilon(1e-12));
    CHECK(e.terms.delta_v == 60.0);
    CHECK(e.terms.eta == doctest::Approx(0.2));
  }

  TEST_CASE("edge depth envelope against the ray oracle") {
    const auto r = rig(0.66);
    for (double p = -0.1; p <= 0.1 + 1e-12; p += 0.01) {
      for (int v = kDims.height / 2 + 1; v <= kDims.height; ++v) {
        for (double u : {0.0, 105.0, 210.0, 419.0}) {
          const double truth = oracle::floor_depth(u, v, 0.66, p, 0.0, r.intrinsics);
          if (!std::isfinite(truth)) continue;
          const double exact = edge_point_depth({u, double(v)}, r, p, kDims).z;
          CHECK(std::abs(exact - truth) / truth < 1e-9);
          if (truth > 10.0) continue;
          const double small = edge_point_depth({u, double(v)}, r, p, kDims, IpmVariant::small_pitch).z;
          CHECK(std::abs(small - truth) / truth < 0.05);
        }
      }
    }
  }

  TEST_CASE("depth grows toward the horizon") {
    const auto r = rig(0.66);
    for (double p : {-0.08, 0.0, 0.08}) {
      double prev = 0.0;
      const double horizon = r.intrinsics.cy - r.intrinsics.fy * std::tan(p);
      for (int v = 360; v > horizon + 2; --v) {
        const double z = edge_point_depth({210, double(v)}, r, p, kDims).z;
        CHECK(z > prev);
        prev = z;
      }
    }
  }

  TEST_CASE("rows past the horizon are rejected") {
    try {
      edge_point_depth({210, 170}, rig(0.66), 0.0, kDims);
      FAIL("expected point_beyond_horizon");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::point_beyond_horizon);
    }
  }

  TEST_CASE("lifted points") {
    const auto rec = recover_analytic(2.0, 0.0, 0.04);
    const auto& rg = rec.config.rig;
    VirtualEdgePoints centre;
    centre.left = {{rg.intrinsics.cx, 300}};
    centre.right = {{rg.intrinsics.cx + 50, 300}};
    const auto c3 = edges_to_3d(centre, rg, 0.04, kDims);
    CHECK(c3.left[0].x == 0.0);
    const auto p3 = edges_to_3d(rec.pts, rg, 0.04, kDims);
    for (std::size_t i = 0; i < rec.pts.count(); ++i) {
      CHECK(p3.left[i].y == 0.0);
      CHECK(p3.left[i].z == edge_point_depth(rec.pts.left[i], rg, 0.04, kDims).z);
      CHECK(std::abs(std::abs(p3.left[i].x - p3.right[i].x) - 2.0) / 2.0 < 0.02);
      if (i) CHECK(p3.left[i].z < p3.left[i - 1].z);
    }
  }

  TEST_CASE("pitch and width from exact edge lines") {
    for (double w : {1.8, 2.0, 3.0}) {
      for (double p : {-0.06, 0.0, 0.06}) {
        const auto rec = recover_analytic(w, 0.1, p);
        const auto est = estimate_pitch(rec.pts, rec.config.rig, rec.config.search, kDims);
        CHECK(std::abs(est.theta_p - p) <= 0.01 + 1e-9);
        CHECK(width_error(est.width_m, w) <= 0.01);
        CHECK(est.cells_evaluated > 0);
      }
    }
  }

  TEST_CASE("summed width residual runs to the search boundary") {
    const auto rec = recover_analytic(2.0, 0.0, 0.06);
    PitchOptions lit;
    lit.residual = PitchResidual::summed_width;
    const auto est = estimate_pitch(rec.pts, rec.config.rig, rec.config.search, kDims, lit);
    CHECK(std::abs(est.theta_p) == doctest::Approx(rec.config.search.pitch_max));
    CHECK(est.width_m < 2.0);
  }

  TEST_CASE("depth planes") {
    const auto rec = recover_analytic(2.0, 0.1, 0.03);
    const auto& rg = rec.config.rig;
    const auto p3 = edges_to_3d(rec.pts, rg, 0.03, kDims);
    const auto set = build_depth_planes(rec.pts, p3, rec.pose.pose, rg.intrinsics, kDims);
    REQUIRE(set.count() == rec.pts.count());
    for (std::size_t k = 0; k < set.count(); ++k) {
      const std::size_t i = set.count() - 1 - k;
      CHECK(set.planes[k].depth == p3.left[i].z);
      const auto back = to_virtual_pixel(set.planes[k].left, rec.pose.pose, rg.intrinsics).point;
      CHECK(distance(back, rec.pts.left[i]) < 1e-6);
      if (k) CHECK(set.planes[k].depth > set.planes[k - 1].depth);
    }

    const auto id = project_edges_to_virtual(fixture::analytic_pair(rec.scene), {0, 0}, rg.intrinsics, kDims, 32);
    const auto id_set = build_depth_planes(id, edges_to_3d(id, rg, 0.03, kDims), {0, 0}, rg.intrinsics, kDims);
    for (std::size_t k = 0; k < id_set.count(); ++k) CHECK(distance(id_set.planes[k].left, id.left[31 - k]) < 0.5);

    auto bad = p3;
    std::swap(bad.left[3], bad.left[4]);
    try {
      build_depth_planes(rec.pts, bad, rec.pose.pose, rg.intrinsics, kDims);
      FAIL("expected plane_ordering_violated");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::plane_ordering_violated);
    }
  }

  TEST_CASE("classification on and between boundaries") {
    DepthPlaneSet set;
    set.dims = kDims;
    set.planes = {{0, {100, 350}, {320, 350}, 2.0}, {1, {120, 330}, {300, 330}, 3.0}, {2, {140, 310}, {280, 310}, 4.0}};
    const SearchConfig sc;

    auto c = classify_pixel({200, 330}, set, sc);
    CHECK(c.region == Region::ground);
    CHECK(c.plane == 1);
    CHECK(c.sigma == 0.0);
    CHECK(interpolated_depth(c, set) == 3.0);

    c = classify_pixel({200, 340}, set, sc);
    CHECK(c.plane == 1);
    CHECK(c.sigma == doctest::Approx(0.5));
    CHECK(interpolated_depth(c, set) == doctest::Approx(2.5));

    c = classify_pixel({110, 300}, set, sc);
    CHECK(c.region == Region::left_wall);
    CHECK(c.plane == 1);
    CHECK(c.sigma == doctest::Approx(0.5));

    c = classify_pixel({310, 300}, set, sc);
    CHECK(c.region == Region::right_wall);
    CHECK(c.sigma == doctest::Approx(0.5));

    CHECK(classify_pixel({200, 300}, set, sc).region == Region::out_of_range);
    CHECK(classify_pixel({5, 300}, set, sc).region == Region::out_of_range);
    CHECK(interpolated_depth(classify_pixel({200, 300}, set, sc), set) == DepthMap::kInvalid);
  }

  TEST_CASE("dense map properties on a recovered frame") {
    const auto s = fixture::scene(2.0, 0.05, 0.04);
    const auto cfg = fixture::config_for(s);
    const auto res = recover_depth(fixture::analytic_pair(s), cfg);
    const auto& set = res.planes;
    const int top = kDims.height / 2;
    std::size_t classified = 0;
    for (int v = top; v < kDims.height; ++v) {
      for (int u = 0; u < kDims.width; ++u) {
        const auto c = classify_pixel({double(u), double(v)}, set, cfg.search);
        const bool out = c.region == Region::out_of_range;
        CHECK(out == (c.plane < 0));
        if (out) continue;
        ++classified;
        CHECK(c.sigma >= 0.0);
        CHECK(c.sigma <= 1.0);
        const double z = interpolated_depth(c, set);
        const double dk = set.planes[c.plane].depth;
        const double dp = c.plane ? set.planes[c.plane - 1].depth : dk;
        CHECK(z >= std::min(dk, dp));
        CHECK(z <= std::max(dk, dp));
        if (c.sigma == 0.0) CHECK(z == dk);
        const double m = res.depth.at(u, v);
        CHECK((m == z || (m == DepthMap::kInvalid && z > 40.0)));
      }
    }
    CHECK(classified > kDims.pixel_count() / 4);
    for (int v = 0; v < top; ++v) CHECK(res.depth.at(17, v) == DepthMap::kInvalid);
    for (double z : res.depth.values) CHECK(z <= 40.0);

    const auto truth = ray_cast_depth(s);
    const auto m = depth_metrics(res.depth, truth, 5.0);
    CHECK(m.abs_rel < 0.03);
  }

  TEST_CASE("dense map does not depend on the thread count") {
    const auto s = fixture::scene(3.0, -0.1, 0.06);
    const auto cfg = fixture::config_for(s);
    const auto res = recover_depth(fixture::analytic_pair(s), cfg);
    const DepthMap parallel = dense_depth(kDims, res.planes, cfg.search);
    DepthMap sequential(kDims);
    for (int v = kDims.height / 2; v < kDims.height; ++v)
      for (int u = 0; u < kDims.width; ++u) {
        const double z = interpolated_depth(classify_pixel({double(u), double(v)}, res.planes, cfg.search), res.planes);
        sequential.at(u, v) = (DepthMap::is_valid(z) && z <= 40.0) ? z : DepthMap::kInvalid;
      }
    CHECK(parallel.values == sequential.values);
  }
}
