#include <cstring>

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "corridor_depth/pipeline.hpp"

namespace py = pybind11;
using namespace corridor;

namespace {

using U8Array = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;
using F64Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

GrayImage to_image(const U8Array& a) {
  if (a.ndim() != 2) throw py::value_error("image must be a 2-D uint8 array");
  GrayImage img({static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0))});
  std::memcpy(img.pixels.data(), a.data(), img.pixels.size());
  return img;
}

U8Array from_image(const GrayImage& img) {
  U8Array out({img.dims.height, img.dims.width});
  std::memcpy(out.mutable_data(), img.pixels.data(), img.pixels.size());
  return out;
}

DepthMap to_depth(const F64Array& a) {
  if (a.ndim() != 2) throw py::value_error("depth must be a 2-D float array");
  DepthMap d({static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0))});
  std::memcpy(d.values.data(), a.data(), d.values.size() * sizeof(double));
  return d;
}

F64Array from_depth(const DepthMap& d) {
  F64Array out({d.dims.height, d.dims.width});
  std::memcpy(out.mutable_data(), d.values.data(), d.values.size() * sizeof(double));
  return out;
}

py::dict line_dict(const LineSegment& l) {
  py::dict d;
  d["start"] = py::make_tuple(l.start.u, l.start.v);
  d["end"] = py::make_tuple(l.end.u, l.end.v);
  d["angle_rad"] = l.angle_rad;
  d["votes"] = l.votes;
  return d;
}

CorridorScene make_scene(double width_m, double yaw_rad, double pitch_rad, double offset_m, double noise_sigma,
                         int distractors, std::uint64_t seed, std::optional<double> height_m) {
  CorridorScene s;
  s.width_m = width_m;
  s.cam_yaw_rad = yaw_rad;
  s.cam_pitch_rad = pitch_rad;
  s.cam_offset_m = offset_m;
  s.noise_sigma = noise_sigma;
  s.distractors = distractors;
  s.seed = seed;
  if (height_m) s.rig = CameraRig::from_intrinsics(s.rig.intrinsics, *height_m, s.dims);
  return s;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Monocular corridor depth from floor edge lines";

  py::register_exception<Error>(m, "CorridorError", PyExc_RuntimeError);

  py::class_<Config>(m, "Config")
      .def(py::init<>())
      .def_static("parse", &parse_config, py::arg("text"))
      .def_static("load", &load_config, py::arg("path"))
      .def("to_text", [](const Config& c) { return serialize_config(c); })
      .def("issues", [](const Config& c) {
        std::vector<std::string> out;
        for (const auto& i : validate_config(c)) out.push_back(i.message);
        return out;
      })
      .def_property("height_m", [](const Config& c) { return c.rig.height_m; },
                    [](Config& c, double h) { c.rig.height_m = h; })
      .def_property_readonly("width", [](const Config& c) { return c.dims.width; })
      .def_property_readonly("height", [](const Config& c) { return c.dims.height; });

  m.def(
      "synthetic_config",
      [](std::optional<double> height_m) {
        const auto s = make_scene(2.0, 0, 0, 0, 0, 0, 0, height_m);
        Config c;
        c.rig = s.rig;
        c.dims = s.dims;
        return c;
      },
      py::arg("height_m") = py::none(), "Configuration matching the synthetic renderer's camera.");

  m.def(
      "render",
      [](double width_m, double yaw_rad, double pitch_rad, double offset_m, double noise_sigma, int distractors,
         std::uint64_t seed, std::optional<double> height_m) {
        const auto s = make_scene(width_m, yaw_rad, pitch_rad, offset_m, noise_sigma, distractors, seed, height_m);
        const auto r = render(s);
        return py::make_tuple(from_image(r.image), from_depth(ray_cast_depth(s)));
      },
      py::arg("width_m") = 2.0, py::arg("yaw_rad") = 0.0, py::arg("pitch_rad") = 0.0, py::arg("offset_m") = 0.0,
      py::arg("noise_sigma") = 0.0, py::arg("distractors") = 0, py::arg("seed") = 0, py::arg("height_m") = py::none(),
      "Synthetic corridor image and its ray-cast depth (0 = invalid).");

  m.def(
      "extract_edges",
      [](const U8Array& image) {
        const auto ex = extract_edges(to_image(image), std::nullopt);
        py::dict d;
        d["left"] = line_dict(ex.pair.left);
        d["right"] = line_dict(ex.pair.right);
        return d;
      },
      py::arg("image"));

  m.def(
      "estimate",
      [](const U8Array& image, const Config& config) {
        const GrayImage img = to_image(image);
        FrameResult f;
        {
          py::gil_scoped_release release;
          f = run_frame(img, require_valid(config));
        }
        const auto& r = f.result;
        py::dict d;
        d["yaw_rad"] = r.pose.pose.yaw_rad;
        d["tau"] = r.pose.pose.tau;
        d["pitch_rad"] = r.pitch.theta_p;
        d["width_m"] = r.pitch.width_m;
        d["plane_count"] = r.planes.count();
        d["depth"] = from_depth(r.depth);
        d["left"] = line_dict(f.edges.pair.left);
        d["right"] = line_dict(f.edges.pair.right);
        d["total_ms"] = f.timings.total_ms;
        return d;
      },
      py::arg("image"), py::arg("config"));

  m.def(
      "depth_metrics",
      [](const F64Array& pred, const F64Array& truth, double cap) {
        const auto r = depth_metrics(to_depth(pred), to_depth(truth), cap);
        py::dict d;
        d["abs_rel"] = r.abs_rel;
        d["log10"] = r.log10_err;
        d["rmse"] = r.rmse;
        d["rmse_log"] = r.rmse_log;
        d["n"] = r.n;
        d["n_excluded"] = r.n_excluded;
        return d;
      },
      py::arg("pred"), py::arg("truth"), py::arg("cap") = 40.0);

  m.def("width_error", &width_error, py::arg("estimated"), py::arg("truth"));
}
