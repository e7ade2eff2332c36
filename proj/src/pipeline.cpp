#include "corridor_depth/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace corridor {

namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

template <class Fn>
auto staged(const char* stage, Fn&& fn) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(stage, e);
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io, "cannot write '" + path.string() + "'");
  out << text;
}

bool is_image_file(const fs::path& p) {
  auto ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".png" || ext == ".pgm" || ext == ".ppm";
}

std::vector<fs::path> list_images(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error(ErrorCode::io, "not a directory: '" + dir.string() + "'");
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && is_image_file(e.path())) out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

fs::path report_path(const fs::path& depth_png) {
  fs::path p = depth_png;
  p.replace_extension(".json");
  return p;
}

void write_debug(const fs::path& dir, const GrayImage& image, const FrameResult& frame, const Config& config) {
  fs::create_directories(dir);
  write_png((dir / "edges.png").string(), frame.edges.mask);
  write_png((dir / "overlay.png").string(), draw_edge_overlay(image, frame.edges.mask, frame.edges.pair));
  write_residual_csv((dir / "residual.csv").string(),
                     residual_surface(frame.edges.pair, config.search, config.rig.intrinsics, config.dims));
  std::ostringstream planes;
  planes << "index,left_u,left_v,right_u,right_v,depth_m\n";
  for (const auto& p : frame.result.planes.planes) {
    planes << p.index << ',' << format_double(p.left.u) << ',' << format_double(p.left.v) << ','
           << format_double(p.right.u) << ',' << format_double(p.right.v) << ',' << format_double(p.depth) << '\n';
  }
  write_text(dir / "planes.csv", planes.str());
}

FrameResult finish_frame(EdgeExtraction edges, double extraction_ms, const Config& config,
                         const RecoverOptions& options, Clock::time_point t0) {
  FrameResult frame;
  frame.result = recover_depth(edges.pair, config, options);
  frame.edges = std::move(edges);
  frame.timings = frame.result.timings;
  frame.timings.extraction_ms = extraction_ms;
  frame.timings.total_ms = ms_since(t0);
  return frame;
}

}  // namespace

DepthResult recover_depth(const EdgeLinePair& pair, const Config& config, const RecoverOptions& options) {
  require_valid(config);
  DepthResult out;
  const auto& intr = config.rig.intrinsics;
  auto t = Clock::now();
  out.pose = staged("pose", [&] { return estimate_pose(pair, config.search, intr, config.dims); });
  out.timings.pose_ms = ms_since(t);

  t = Clock::now();
  out.points = staged("projection", [&] {
    return project_edges_to_virtual(pair, out.pose.pose, intr, config.dims, config.search.samples);
  });
  out.pitch = staged("pitch", [&] {
    return estimate_pitch(out.points, config.rig, config.search, config.dims, options.pitch);
  });
  out.timings.pitch_ms = ms_since(t);

  t = Clock::now();
  out.planes = staged("planes", [&] {
    const auto p3 = edges_to_3d(out.points, config.rig, out.pitch.theta_p, config.dims, options.pitch.ipm);
    return build_depth_planes(out.points, p3, out.pose.pose, intr, config.dims);
  });
  out.timings.planes_ms = ms_since(t);

  t = Clock::now();
  out.depth = staged("interpolation", [&] { return dense_depth(config.dims, out.planes, config.search, options.max_range_m); });
  out.timings.interpolation_ms = ms_since(t);
  return out;
}

FrameResult run_frame(const GrayImage& image, const Config& config, const RecoverOptions& options,
                      const EdgeParams& edge_params) {
  const auto t0 = Clock::now();
  if (!(image.dims == config.dims)) {
    throw StageError("extraction", Error(ErrorCode::invalid_argument,
                                         "image is " + std::to_string(image.dims.width) + "x" +
                                             std::to_string(image.dims.height) + ", config expects " +
                                             std::to_string(config.dims.width) + "x" +
                                             std::to_string(config.dims.height)));
  }
  auto edges = staged("extraction", [&] { return extract_edges(image, config.search.horizon_row, edge_params); });
  return finish_frame(std::move(edges), ms_since(t0), config, options, t0);
}

int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::edge_pair_not_found: return 2;
    case ErrorCode::pose_estimation_failed: return 3;
    case ErrorCode::pitch_estimation_failed: return 4;
    default: return 1;
  }
}

std::string frame_report_json(const FrameResult& f, const std::string& image_path, const std::string& depth_path,
                              bool with_timings) {
  const auto& r = f.result;
  nlohmann::ordered_json j;
  j["image"] = image_path;
  j["depth"] = depth_path;
  j["yaw_rad"] = r.pose.pose.yaw_rad;
  j["tau"] = r.pose.pose.tau;
  j["pitch_rad"] = r.pitch.theta_p;
  j["width_m"] = r.pitch.width_m;
  j["symmetry_residual"] = {{"e_left", r.pose.residual.e_left},
                            {"e_right", r.pose.residual.e_right},
                            {"total", r.pose.residual.total}};
  j["pitch_residual"] = r.pitch.residual;
  j["plane_count"] = r.planes.count();
  j["valid_pixels"] = r.depth.valid_count();
  const auto line = [](const LineSegment& s) {
    return nlohmann::ordered_json{{"start", {s.start.u, s.start.v}},
                                  {"end", {s.end.u, s.end.v}},
                                  {"angle_rad", s.angle_rad},
                                  {"votes", s.votes}};
  };
  j["edges"] = {{"left", line(f.edges.pair.left)}, {"right", line(f.edges.pair.right)}};
  if (with_timings) {
    const auto& t = f.timings;
    j["timings_ms"] = {{"extraction", t.extraction_ms}, {"pose", t.pose_ms},
                       {"pitch", t.pitch_ms},           {"planes", t.planes_ms},
                       {"interpolation", t.interpolation_ms}, {"total", t.total_ms}};
  }
  return j.dump(2) + "\n";
}

FrameResult run_estimate(const EstimateArgs& args) {
  const Config config = staged("config", [&] { return require_valid(load_config(args.config)); });
  const GrayImage image = staged("input", [&] { return read_gray_image(args.image); });
  FrameResult frame = run_frame(image, config, args.options);
  const fs::path out(args.out);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  staged("output", [&] {
    write_depth_png(out.string(), frame.result.depth);
    write_text(report_path(out), frame_report_json(frame, args.image, out.string()));
    if (!args.debug_dir.empty()) write_debug(args.debug_dir, image, frame, config);
    return 0;
  });
  return frame;
}

std::vector<StreamOutcome> run_estimate_stream(const EstimateArgs& args, std::size_t queue_capacity) {
  const Config config = staged("config", [&] { return require_valid(load_config(args.config)); });
  const auto files = list_images(args.image);
  const fs::path out_dir(args.out);
  fs::create_directories(out_dir);

  struct Item {
    std::size_t index;
    GrayImage image;
    std::optional<EdgeExtraction> edges;
    double extraction_ms = 0.0;
    Clock::time_point t0;
    std::optional<StageError> error;
  };
  std::deque<Item> queue;
  std::mutex mu;
  std::condition_variable cv;
  bool done = false;
  queue_capacity = std::max<std::size_t>(queue_capacity, 1);

  std::thread producer([&] {
    for (std::size_t i = 0; i < files.size(); ++i) {
      Item item{i, {}, std::nullopt, 0.0, Clock::now(), std::nullopt};
      try {
        item.image = staged("input", [&] { return read_gray_image(files[i].string()); });
        if (!(item.image.dims == config.dims)) {
          throw StageError("extraction", Error(ErrorCode::invalid_argument, "image size does not match the config"));
        }
        item.edges = staged("extraction", [&] { return extract_edges(item.image, config.search.horizon_row); });
        item.extraction_ms = ms_since(item.t0);
      } catch (const StageError& e) {
        item.error = e;
      }
      std::unique_lock lock(mu);
      cv.wait(lock, [&] { return queue.size() < queue_capacity; });
      queue.push_back(std::move(item));
      cv.notify_all();
    }
    std::lock_guard lock(mu);
    done = true;
    cv.notify_all();
  });

  std::vector<StreamOutcome> outcomes;
  for (;;) {
    Item item;
    {
      std::unique_lock lock(mu);
      cv.wait(lock, [&] { return !queue.empty() || done; });
      if (queue.empty()) break;
      item = std::move(queue.front());
      queue.pop_front();
      cv.notify_all();
    }
    StreamOutcome outcome;
    outcome.name = files[item.index].filename().string();
    try {
      if (item.error) throw *item.error;
      FrameResult frame = finish_frame(std::move(*item.edges), item.extraction_ms, config, args.options, item.t0);
      const fs::path depth = out_dir / (files[item.index].stem().string() + ".png");
      write_depth_png(depth.string(), frame.result.depth);
      write_text(report_path(depth), frame_report_json(frame, files[item.index].string(), depth.string()));
      if (!args.debug_dir.empty()) {
        write_debug(fs::path(args.debug_dir) / files[item.index].stem(), item.image, frame, config);
      }
      outcome.frame = std::move(frame);
    } catch (const Error& e) {
      outcome.error = e.what();
      outcome.exit_code = exit_code(e.code());
    }
    outcomes.push_back(std::move(outcome));
  }
  producer.join();
  return outcomes;
}

std::vector<SynthOutput> run_synth(const std::string& spec_path, const std::string& out_dir, std::uint64_t seed) {
  const auto cases = load_scene_spec(spec_path, seed);
  const fs::path root(out_dir);
  for (const char* sub : {"images", "depth", "manifests"}) fs::create_directories(root / sub);
  std::vector<SynthOutput> outputs;
  for (const auto& c : cases) {
    SynthOutput o{c.id, (root / "images" / (c.id + ".png")).string(), (root / "depth" / (c.id + ".png")).string(),
                  (root / "manifests" / (c.id + ".json")).string()};
    write_png(o.image, render(c.scene).image);
    write_depth_png(o.depth, ray_cast_depth(c.scene));
    write_text(o.manifest, scene_manifest_json(c));
    outputs.push_back(std::move(o));
  }
  return outputs;
}

std::vector<EvalRow> run_eval(const std::string& pred_dir, const std::string& truth_dir, const std::vector<double>& caps,
                              const std::string& out_csv) {
  std::map<std::string, fs::path> preds, truths;
  for (const auto& p : list_images(pred_dir)) preds[p.stem().string()] = p;
  for (const auto& p : list_images(truth_dir)) truths[p.stem().string()] = p;
  std::string missing;
  for (const auto& [stem, path] : preds) {
    if (!truths.count(stem)) missing += " missing truth for " + path.filename().string() + ";";
  }
  for (const auto& [stem, path] : truths) {
    if (!preds.count(stem)) missing += " missing prediction for " + path.filename().string() + ";";
  }
  if (!missing.empty()) throw Error(ErrorCode::io, "unmatched files:" + missing);
  if (preds.empty()) throw Error(ErrorCode::io, "no depth images in '" + pred_dir + "'");

  std::vector<EvalPair> pairs;
  for (const auto& [stem, path] : preds) {
    pairs.push_back({stem, read_depth_png(path.string()), read_depth_png(truths[stem].string())});
  }
  auto rows = batch_report(pairs, caps);
  const fs::path out(out_csv);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  write_text(out, eval_csv(rows));
  return rows;
}

SweepRow sweep_case(const SceneCase& c, const Config& config, const RecoverOptions& options) {
  SweepRow row;
  row.scene = c;
  try {
    Config cfg = config;
    cfg.rig = c.scene.rig;
    cfg.dims = c.scene.dims;
    const Rendering rendering = render(c.scene);
    const DepthMap truth = ray_cast_depth(c.scene, options.max_range_m);
    row.frame = run_frame(rendering.image, cfg, options);
    row.width_err = width_error(row.frame->result.pitch.width_m, c.scene.width_m);
    try {
      row.near = depth_metrics(row.frame->result.depth, truth, 5.0);
    } catch (const Error&) {
    }
    try {
      row.far = depth_metrics(row.frame->result.depth, truth, 40.0);
    } catch (const Error&) {
    }
  } catch (const Error& e) {
    row.error = e.what();
  }
  return row;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream out;
  out << "scene,width_m,cam_offset_m,cam_yaw_rad,cam_pitch_rad,noise_sigma,yaw_hat,tau_hat,pitch_hat,width_hat,"
         "width_rel_err,abs_rel_5m,rmse_5m,abs_rel_40m,rmse_40m,total_ms,error\n";
  const auto num = [](double x) { return format_double(x); };
  for (const auto& r : rows) {
    const auto& s = r.scene.scene;
    out << r.scene.id << ',' << num(s.width_m) << ',' << num(s.cam_offset_m) << ',' << num(s.cam_yaw_rad) << ','
        << num(s.cam_pitch_rad) << ',' << num(s.noise_sigma) << ',';
    if (r.frame) {
      const auto& f = r.frame->result;
      out << num(f.pose.pose.yaw_rad) << ',' << num(f.pose.pose.tau) << ',' << num(f.pitch.theta_p) << ','
          << num(f.pitch.width_m) << ',' << num(r.width_err) << ',';
    } else {
      out << "nan,nan,nan,nan,nan,";
    }
    out << (r.near ? num(r.near->abs_rel) : "nan") << ',' << (r.near ? num(r.near->rmse) : "nan") << ','
        << (r.far ? num(r.far->abs_rel) : "nan") << ',' << (r.far ? num(r.far->rmse) : "nan") << ','
        << (r.frame ? num(r.frame->timings.total_ms) : "nan") << ',';
    std::string err = r.error;
    std::replace(err.begin(), err.end(), ',', ';');
    std::replace(err.begin(), err.end(), '\n', ' ');
    out << err << '\n';
  }
  return out.str();
}

std::vector<SweepRow> run_sweep(const std::string& grid_path, const std::string& config_path, const std::string& out_csv) {
  const Config config = require_valid(load_config(config_path));
  const auto cases = load_scene_spec(grid_path);
  std::vector<SweepRow> rows;
  for (const auto& c : cases) rows.push_back(sweep_case(c, config));
  const fs::path out(out_csv);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  write_text(out, sweep_csv(rows));
  return rows;
}

}  // namespace corridor
