// Copyright 2026 The obbkit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <vector>

#include "obbkit/error.hpp"
#include "obbkit/evalkit.hpp"
#include "obbkit/fitkit.hpp"
#include "obbkit/geom.hpp"
#include "obbkit/piou.hpp"
#include "obbkit/polyclip.hpp"
#include "obbkit/dotaio.hpp"

namespace py = pybind11;

namespace {

using obbkit::Obb;
using obbkit::Point;

using PointTuple = std::pair<double, double>;
using Tuple5 = std::tuple<double, double, double, double, double>;

std::vector<PointTuple> to_tuples(std::span<const Point> pts) {
  std::vector<PointTuple> out;
  out.reserve(pts.size());
  for (const Point& p : pts) out.emplace_back(p.x, p.y);
  return out;
}

Tuple5 grad_tuple(const obbkit::Grad5& g) { return {g.d_x, g.d_y, g.d_w, g.d_h, g.d_theta}; }

py::dict trace_dict(const obbkit::FitTrace& t) {
  py::list steps;
  for (const obbkit::FitStep& s : t.steps) {
    steps.append(py::make_tuple(s.step, s.box, s.loss, s.iou));
  }
  py::dict d;
  d["steps"] = steps;
  d["converged"] = t.converged;
  d["saturated"] = t.saturated;
  d["stalled"] = t.stalled;
  d["final_iou"] = t.final_iou;
  d["angle_error"] = t.angle_error;
  return d;
}

}  // namespace

PYBIND11_MODULE(_obbkit, m) {
  m.doc() = "Oriented bounding boxes: exact and pixel IoU, PIoU gradients, VOC07 evaluation";

  py::register_exception<obbkit::ValidationError>(m, "ValidationError", PyExc_ValueError);

  py::class_<Obb>(m, "Obb")
      .def(py::init<>())
      .def(py::init([](double x, double y, double w, double h, double theta) { return Obb{x, y, w, h, theta}; }),
           py::arg("x"), py::arg("y"), py::arg("w"), py::arg("h"), py::arg("theta"))
      .def_readwrite("x", &Obb::x)
      .def_readwrite("y", &Obb::y)
      .def_readwrite("w", &Obb::w)
      .def_readwrite("h", &Obb::h)
      .def_readwrite("theta", &Obb::theta)
      .def("area", &Obb::area)
      .def("astuple", [](const Obb& b) { return Tuple5{b.x, b.y, b.w, b.h, b.theta}; })
      .def(py::self == py::self)
      .def("__repr__", [](const Obb& b) {
        return "Obb(" + std::to_string(b.x) + ", " + std::to_string(b.y) + ", " + std::to_string(b.w) + ", " +
               std::to_string(b.h) + ", " + std::to_string(b.theta) + ")";
      });

  m.def("canonicalize", py::overload_cast<const Obb&>(&obbkit::canonicalize), py::arg("box"));
  m.def("corners", [](const Obb& b) { return to_tuples(obbkit::corners(b).pts); }, py::arg("box"));
  m.def(
      "min_area_rect",
      [](const std::vector<PointTuple>& pts) {
        std::vector<Point> p;
        for (const auto& [x, y] : pts) p.push_back({x, y});
        return obbkit::min_area_rect(p);
      },
      py::arg("points"));
  m.def(
      "apply_offsets",
      [](const Obb& init, const Tuple5& off) {
        const auto& [dx, dy, dw, dh, dt] = off;
        return obbkit::apply_offsets(init, {dx, dy, dw, dh, dt});
      },
      py::arg("init"), py::arg("offset"));
  m.def(
      "acm_points",
      [](const Obb& b, const PointTuple& loc, double stride) {
        const obbkit::AcmPointSet s = obbkit::acm_points(b, {loc.first, loc.second}, stride);
        return py::make_tuple(to_tuples(s.points), to_tuples(s.offsets));
      },
      py::arg("box"), py::arg("loc"), py::arg("stride"));

  m.def("iou_exact", &obbkit::iou_exact, py::arg("a"), py::arg("b"));

  py::enum_<obbkit::PiouLossKind>(m, "PiouLossKind")
      .value("NEG_LOG", obbkit::PiouLossKind::kNegLog)
      .value("ONE_MINUS", obbkit::PiouLossKind::kOneMinus);

  py::class_<obbkit::PiouConfig>(m, "PiouConfig")
      .def(py::init([](double k, int resolution, double margin, double eps, obbkit::PiouLossKind loss) {
             obbkit::PiouConfig c;
             c.k = k;
             c.resolution = resolution;
             c.margin = margin;
             c.eps = eps;
             c.loss = loss;
             c.validate();
             return c;
           }),
           py::arg("k") = 10.0, py::arg("resolution") = 1, py::arg("margin") = 2.0, py::arg("eps") = 1e-6,
           py::arg("loss") = obbkit::PiouLossKind::kNegLog)
      .def_readwrite("k", &obbkit::PiouConfig::k)
      .def_readwrite("resolution", &obbkit::PiouConfig::resolution)
      .def_readwrite("margin", &obbkit::PiouConfig::margin)
      .def_readwrite("eps", &obbkit::PiouConfig::eps)
      .def_readwrite("loss", &obbkit::PiouConfig::loss)
      .def_readwrite("max_samples", &obbkit::PiouConfig::max_samples);

  m.def("piou", py::overload_cast<const Obb&, const Obb&, const obbkit::PiouConfig&>(&obbkit::piou), py::arg("b"),
        py::arg("g"), py::arg("config") = obbkit::PiouConfig{});
  m.def("piou_loss", py::overload_cast<const Obb&, const Obb&, const obbkit::PiouConfig&>(&obbkit::piou_loss),
        py::arg("b"), py::arg("g"), py::arg("config") = obbkit::PiouConfig{});
  m.def(
      "piou_grad", [](const Obb& b, const Obb& g, const obbkit::PiouConfig& c) {
        return grad_tuple(obbkit::piou_grad(b, g, c));
      },
      py::arg("b"), py::arg("g"), py::arg("config") = obbkit::PiouConfig{});
  m.def(
      "smooth_l1",
      [](const Obb& b, const Obb& g, double beta) {
        const obbkit::SmoothL1Result r = obbkit::smooth_l1(b, g, beta);
        return py::make_tuple(r.value, grad_tuple(r.grad));
      },
      py::arg("b"), py::arg("g"), py::arg("beta") = 1.0);

  py::enum_<obbkit::FitLoss>(m, "FitLoss")
      .value("PIOU", obbkit::FitLoss::kPiou)
      .value("SMOOTH_L1", obbkit::FitLoss::kSmoothL1);

  py::class_<obbkit::FitConfig>(m, "FitConfig")
      .def(py::init<>())
      .def_readwrite("loss", &obbkit::FitConfig::loss)
      .def_readwrite("max_steps", &obbkit::FitConfig::max_steps)
      .def_readwrite("iou_target", &obbkit::FitConfig::iou_target)
      .def_readwrite("beta", &obbkit::FitConfig::beta)
      .def_readwrite("piou", &obbkit::FitConfig::piou)
      .def_readwrite("seed", &obbkit::FitConfig::seed)
      .def_readwrite("jitter_translation", &obbkit::FitConfig::jitter_translation)
      .def_readwrite("jitter_angle", &obbkit::FitConfig::jitter_angle)
      .def_property(
          "step_sizes",
          [](const obbkit::FitConfig& c) {
            return std::make_tuple(c.steps.translation, c.steps.extent, c.steps.angle);
          },
          [](obbkit::FitConfig& c, const std::tuple<double, double, double>& s) {
            c.steps = {std::get<0>(s), std::get<1>(s), std::get<2>(s)};
          });

  m.def(
      "fit",
      [](const std::vector<Obb>& targets, const Obb& init, const obbkit::FitConfig& cfg) {
        return trace_dict(obbkit::fit(targets, init, cfg));
      },
      py::arg("targets"), py::arg("init"), py::arg("config") = obbkit::FitConfig{},
      "Gradient descent toward targets[0]; multiple encodings are cycled per step.");
  m.def(
      "boundary_sweep",
      [](const Obb& g, const std::vector<double>& angles, const obbkit::PiouConfig& cfg, double beta) {
        std::vector<std::tuple<double, double, double>> rows;
        for (const obbkit::SweepRow& r : obbkit::boundary_sweep(g, angles, cfg, beta)) {
          rows.emplace_back(r.angle, r.piou_loss, r.smooth_l1);
        }
        return rows;
      },
      py::arg("g"), py::arg("angles"), py::arg("config") = obbkit::PiouConfig{}, py::arg("beta") = 1.0);

  py::class_<obbkit::Detection>(m, "Detection")
      .def(py::init([](std::string image_id, int class_id, double score, const Obb& box) {
             return obbkit::Detection{std::move(image_id), class_id, score, box};
           }),
           py::arg("image_id"), py::arg("class_id"), py::arg("score"), py::arg("box"))
      .def_readwrite("image_id", &obbkit::Detection::image_id)
      .def_readwrite("class_id", &obbkit::Detection::class_id)
      .def_readwrite("score", &obbkit::Detection::score)
      .def_readwrite("box", &obbkit::Detection::box);

  py::class_<obbkit::GroundTruth>(m, "GroundTruth")
      .def(py::init([](std::string image_id, int class_id, const Obb& box, bool difficult) {
             return obbkit::GroundTruth{std::move(image_id), class_id, box, difficult};
           }),
           py::arg("image_id"), py::arg("class_id"), py::arg("box"), py::arg("difficult") = false)
      .def_readwrite("image_id", &obbkit::GroundTruth::image_id)
      .def_readwrite("class_id", &obbkit::GroundTruth::class_id)
      .def_readwrite("box", &obbkit::GroundTruth::box)
      .def_readwrite("difficult", &obbkit::GroundTruth::difficult);

  m.def(
      "rotated_nms",
      [](const std::vector<obbkit::Detection>& dets, double tau) { return obbkit::rotated_nms(dets, tau); },
      py::arg("detections"), py::arg("tau"));
  m.def(
      "evaluate",
      [](const std::vector<obbkit::Detection>& dets, const std::vector<obbkit::GroundTruth>& gts, int num_classes,
         double iou_thr) {
        const obbkit::EvalReport r = obbkit::evaluate(dets, gts, iou_thr, num_classes);
        py::list classes;
        for (const obbkit::ClassResult& c : r.classes) {
          py::dict d;
          d["class_id"] = c.class_id;
          d["ap"] = c.ap;
          d["tp"] = c.tp;
          d["fp"] = c.fp;
          d["npos"] = c.npos;
          classes.append(d);
        }
        py::dict out;
        out["classes"] = classes;
        out["map"] = r.map;
        out["iou_threshold"] = r.iou_threshold;
        return out;
      },
      py::arg("detections"), py::arg("ground_truths"), py::arg("num_classes"), py::arg("iou_thr") = 0.5);

  m.def(
      "tile_windows",
      [](std::int64_t w, std::int64_t h, std::int64_t patch, std::int64_t stride) {
        std::vector<std::tuple<std::int64_t, std::int64_t, std::int64_t, std::int64_t>> out;
        for (const obbkit::TileWindow& t : obbkit::tile_windows(w, h, patch, stride)) {
          out.emplace_back(t.x0, t.y0, t.width, t.height);
        }
        return out;
      },
      py::arg("width"), py::arg("height"), py::arg("patch") = 1024, py::arg("stride") = 824);
}
