#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sys/wait.h>

#include <json.hpp>

#include "corridor_depth/pipeline.hpp"
#include "fixtures.hpp"

using namespace corridor;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("corridor_depth_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

void put(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

int run_cli(const std::string& args) {
  const std::string cmd = std::string(CORRIDOR_DEPTH_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string synth_config(const CorridorScene& s) { return serialize_config(fixture::config_for(s)); }

}  // namespace

TEST_SUITE("pipeline") {
  TEST_CASE("exit codes") {
    CHECK(exit_code(ErrorCode::edge_pair_not_found) == 2);
    CHECK(exit_code(ErrorCode::pose_estimation_failed) == 3);
    CHECK(exit_code(ErrorCode::pitch_estimation_failed) == 4);
    CHECK(exit_code(ErrorCode::io) == 1);
  }

  TEST_CASE("depth stage works from the edge pair alone") {
    const auto s = fixture::scene(2.0, 0.1, 0.06);
    const auto res = recover_depth(fixture::analytic_pair(s), fixture::config_for(s));
    CHECK(res.pose.pose.yaw_rad == doctest::Approx(0.1));
    CHECK(res.pitch.theta_p == doctest::Approx(0.06));
    CHECK(res.depth.valid_count() > 0);
  }

  TEST_CASE("estimate a noiseless frame") {
    const auto dir = scratch("estimate");
    const auto s = fixture::scene(2.0, -0.1, 0.04);
    write_png((dir / "frame.png").string(), render(s).image);
    put(dir / "cfg.txt", synth_config(s));
    EstimateArgs args{(dir / "frame.png").string(), (dir / "cfg.txt").string(), (dir / "out" / "depth.png").string(),
                      (dir / "debug").string(), {}};
    const auto frame = run_estimate(args);
    CHECK(std::abs(frame.result.pose.pose.yaw_rad + 0.1) <= 0.05 + 1e-9);
    CHECK(frame.result.planes.count() == 64);
    const auto& t = frame.timings;
    CHECK(t.total_ms + 1.0 >= t.extraction_ms + t.pose_ms + t.pitch_ms + t.planes_ms + t.interpolation_ms);
    CHECK(fs::exists(dir / "out" / "depth.png"));
    for (const char* f : {"edges.png", "overlay.png", "residual.csv", "planes.csv"}) CHECK(fs::exists(dir / "debug" / f));
    const auto report = nlohmann::json::parse(slurp(dir / "out" / "depth.json"));
    for (const char* key : {"yaw_rad", "tau", "pitch_rad", "width_m", "plane_count", "timings_ms"}) {
      CHECK(report.contains(key));
    }
    const auto depth = read_depth_png((dir / "out" / "depth.png").string());
    CHECK(depth.dims == s.dims);
    CHECK(depth.valid_count() == frame.result.depth.valid_count());
  }

  TEST_CASE("end to end determinism") {
    const auto dir = scratch("determinism");
    auto s = fixture::scene(2.0, 0.05, 0.02);
    s.noise_sigma = 6;
    write_png((dir / "frame.png").string(), render(s).image);
    put(dir / "cfg.txt", synth_config(s));
    std::string png[2], report[2];
    for (int i = 0; i < 2; ++i) {
      const auto out = dir / ("d" + std::to_string(i) + ".png");
      const auto f = run_estimate({(dir / "frame.png").string(), (dir / "cfg.txt").string(), out.string(), "", {}});
      png[i] = slurp(out);
      report[i] = frame_report_json(f, "x", "y", false);
    }
    CHECK(png[0] == png[1]);
    CHECK(report[0] == report[1]);
  }

  TEST_CASE("blank image exits with 2") {
    const auto dir = scratch("blank");
    write_png((dir / "blank.png").string(), GrayImage({420, 360}, 100));
    put(dir / "cfg.txt", "");
    try {
      run_estimate({(dir / "blank.png").string(), (dir / "cfg.txt").string(), (dir / "d.png").string(), "", {}});
      FAIL("expected a stage error");
    } catch (const StageError& e) {
      CHECK(e.stage() == "extraction");
      CHECK(e.code() == ErrorCode::edge_pair_not_found);
      CHECK(std::string(e.what()).find("edge-pair-not-found") != std::string::npos);
    }
    CHECK(run_cli("estimate --image " + (dir / "blank.png").string() + " --config " + (dir / "cfg.txt").string() +
                  " --out " + (dir / "d.png").string()) == 2);
  }

  TEST_CASE("cli estimate succeeds on a synthetic frame") {
    const auto dir = scratch("cli");
    const auto s = fixture::scene(1.8, 0.0, 0.06);
    write_png((dir / "f.png").string(), render(s).image);
    put(dir / "cfg.txt", synth_config(s));
    CHECK(run_cli("estimate --image " + (dir / "f.png").string() + " --config " + (dir / "cfg.txt").string() +
                  " --out " + (dir / "f_depth.png").string() + " --pitch-residual width-variance --ipm exact") == 0);
    CHECK(fs::exists(dir / "f_depth.json"));
    CHECK(run_cli("estimate --image " + (dir / "missing.png").string() + " --config " + (dir / "cfg.txt").string() +
                  " --out " + (dir / "x.png").string()) == 1);
  }

  TEST_CASE("streaming keeps submission order") {
    const auto dir = scratch("stream");
    fs::create_directories(dir / "in");
    const std::vector<double> yaws{-0.1, 0.0, 0.1, 0.05, -0.05};
    for (std::size_t i = 0; i < yaws.size(); ++i) {
      write_png((dir / "in" / ("f" + std::to_string(i) + ".png")).string(), render(fixture::scene(2.0, yaws[i], 0.03)).image);
    }
    write_png((dir / "in" / "f9_blank.png").string(), GrayImage({420, 360}, 90));
    put(dir / "cfg.txt", synth_config(fixture::scene(2.0, 0, 0)));
    const auto out = run_estimate_stream({(dir / "in").string(), (dir / "cfg.txt").string(), (dir / "out").string(), "", {}}, 2);
    REQUIRE(out.size() == yaws.size() + 1);
    for (std::size_t i = 0; i < yaws.size(); ++i) {
      CHECK(out[i].name == "f" + std::to_string(i) + ".png");
      REQUIRE(out[i].frame);
      CHECK(std::abs(out[i].frame->result.pose.pose.yaw_rad - yaws[i]) <= 0.05 + 1e-9);
      CHECK(fs::exists(dir / "out" / ("f" + std::to_string(i) + ".png")));
    }
    CHECK_FALSE(out.back().frame);
    CHECK(out.back().exit_code == 2);

    // Same results as single-frame runs.
    const auto single = run_frame(read_gray_image((dir / "in" / "f2.png").string()), load_config((dir / "cfg.txt").string()));
    CHECK(single.result.depth.values == out[2].frame->result.depth.values);
  }

  TEST_CASE("synth outputs") {
    const auto dir = scratch("synth");
    put(dir / "spec.txt", "scene.width_m = 2.0\nscene.cam_yaw_rad = -0.1, 0, 0.1\nscene.noise_sigma = 5\n");
    const auto a = run_synth((dir / "spec.txt").string(), (dir / "a").string(), 3);
    const auto b = run_synth((dir / "spec.txt").string(), (dir / "b").string(), 3);
    REQUIRE(a.size() == 3);
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(slurp(a[i].image) == slurp(b[i].image));
      CHECK(slurp(a[i].depth) == slurp(b[i].depth));
      CHECK(slurp(a[i].manifest) == slurp(b[i].manifest));
      const auto m = nlohmann::json::parse(slurp(a[i].manifest));
      CHECK(m["width_m"] == 2.0);
    }
    CHECK(fs::exists(dir / "a" / "images" / "scene_002.png"));
  }

  TEST_CASE("eval over directories") {
    const auto dir = scratch("eval");
    put(dir / "spec.txt", "scene.cam_yaw_rad = 0, 0.1\n");
    const auto outs = run_synth((dir / "spec.txt").string(), dir.string());
    auto rows = run_eval((dir / "depth").string(), (dir / "depth").string(), {5.0, 40.0}, (dir / "m.csv").string());
    REQUIRE(rows.size() == 4);
    for (const auto& r : rows) {
      REQUIRE(r.metrics);
      CHECK(r.metrics->abs_rel == 0.0);
      CHECK(r.metrics->rmse == 0.0);
    }
    CHECK(rows[0].cap_m == 5.0);
    CHECK(rows[1].cap_m == 40.0);
    CHECK(fs::exists(dir / "m.csv"));

    fs::create_directories(dir / "truth");
    fs::copy_file(outs[0].depth, dir / "truth" / "scene_000.png");
    try {
      run_eval((dir / "depth").string(), (dir / "truth").string(), {5.0}, (dir / "n.csv").string());
      FAIL("expected io error");
    } catch (const Error& e) {
      CHECK(std::string(e.what()).find("scene_001.png") != std::string::npos);
    }
    CHECK(run_cli("eval --pred " + (dir / "depth").string() + " --truth " + (dir / "truth").string() + " --out " +
                  (dir / "n.csv").string()) != 0);
  }

  TEST_CASE("sweep rows") {
    const auto dir = scratch("sweep");
    put(dir / "grid.txt", "scene.width_m = 2.0\n");
    put(dir / "cfg.txt", "");
    auto rows = run_sweep((dir / "grid.txt").string(), (dir / "cfg.txt").string(), (dir / "s.csv").string());
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].error.empty());
    CHECK(rows[0].width_err <= 0.01);

    put(dir / "grid.txt", "scene.cam_yaw_rad = -0.1, 0, 0.1\nscene.cam_pitch_rad = 0.06\n");
    rows = run_sweep((dir / "grid.txt").string(), (dir / "cfg.txt").string(), (dir / "s.csv").string());
    REQUIRE(rows.size() == 3);
    for (const auto& r : rows) {
      REQUIRE(r.frame);
      CHECK(std::abs(r.frame->result.pose.pose.yaw_rad - r.scene.scene.cam_yaw_rad) <= 0.05 + 1e-9);
      CHECK(r.width_err <= 0.01);
    }
    const auto csv = slurp(dir / "s.csv");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
  }
}
