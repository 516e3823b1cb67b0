#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "tsr/captioning.hpp"
#include "tsr/encoder.hpp"
#include "tsr/error.hpp"
#include "tsr/evaluation.hpp"
#include "tsr/pipeline.hpp"
#include "tsr/retrieval.hpp"
#include "tsr/segmentation.hpp"
#include "tsr/trend_filter.hpp"

namespace py = pybind11;
using namespace tsr;

namespace {

Window make_window(std::vector<double> values, bool normalize) {
  Window w;
  w.window_id = "window";
  w.values = std::move(values);
  if (normalize) {
    normalize_window(w);
  } else {
    w.normalized = true;
  }
  return w;
}

py::list segments_to_list(const std::vector<SegmentSpec>& segs) {
  py::list out;
  for (const auto& s : segs) out.append(py::make_tuple(s.a, s.b));
  return out;
}

std::vector<SegmentSpec> list_to_segments(const std::vector<std::pair<int, int>>& segs) {
  std::vector<SegmentSpec> out;
  for (const auto& [a, b] : segs) out.push_back({"window", a, b});
  return out;
}

PipelineConfig load_config(const std::string& path, std::optional<std::uint64_t> seed) {
  auto cfg = PipelineConfig::load(path);
  if (seed) cfg.set_seed(*seed);
  return cfg;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Segment-level time-series retrieval: trend filtering, segmentation, encoders, ranking, metrics.";

  py::register_exception<RuntimeFailure>(m, "RuntimeFailure", PyExc_RuntimeError);

  py::enum_<Tv2Method>(m, "Tv2Method")
      .value("ADMM", Tv2Method::kAdmm)
      .value("DUAL_NEWTON", Tv2Method::kDualNewton);

  py::class_<Tv2Solution>(m, "Tv2Solution")
      .def_readonly("u", &Tv2Solution::u)
      .def_readonly("dual", &Tv2Solution::dual)
      .def_readonly("objective", &Tv2Solution::objective)
      .def_readonly("iterations", &Tv2Solution::iterations)
      .def_readonly("converged", &Tv2Solution::converged);

  m.def(
      "solve_tv2",
      [](std::vector<double> x, double lam, Tv2Method method, int max_iter) {
        Tv2Options opt;
        opt.method = method;
        opt.max_iter = max_iter;
        return solve_tv2({std::move(x), lam}, opt);
      },
      py::arg("x"), py::arg("lam"), py::arg("method") = Tv2Method::kDualNewton, py::arg("max_iter") = 20000,
      "Minimize ||u - x||^2 + lam * ||D2 u||_1.");
  m.def(
      "tv2_objective",
      [](const std::vector<double>& x, const std::vector<double>& u, double lam) { return tv2_objective(x, u, lam); },
      py::arg("x"), py::arg("u"), py::arg("lam"));
  m.def(
      "second_diff", [](const std::vector<double>& u) { return second_diff(u); }, py::arg("u"));
  m.def(
      "detect_change_points",
      [](const std::vector<double>& trend, double mult) { return detect_change_points(trend, mult); },
      py::arg("trend"), py::arg("sigma_multiplier") = 3.0);

  m.def(
      "segment",
      [](std::vector<double> values, double lambda_init, int max_segments, int min_length) {
        SegmentationConfig cfg;
        cfg.lambda_init = lambda_init;
        cfg.max_segments = max_segments;
        cfg.min_length = min_length;
        const auto r = segment_window(make_window(std::move(values), true), cfg);
        py::dict d;
        d["segments"] = segments_to_list(r.segments);
        d["captionable"] = segments_to_list(r.captionable);
        d["change_points"] = r.change_points;
        d["lambda_used"] = r.lambda_used;
        d["fell_back"] = r.fell_back;
        return d;
      },
      py::arg("values"), py::arg("lambda_init") = 100.0, py::arg("max_segments") = 6, py::arg("min_length") = 50,
      "Min-max normalize a window and split it at TV2 change points.");

  m.def(
      "render_plot",
      [](std::vector<double> values, const std::vector<std::pair<int, int>>& segments) {
        return render_window_plot(make_window(std::move(values), false), list_to_segments(segments));
      },
      py::arg("values"), py::arg("segments"));
  m.def(
      "synthesize_caption",
      [](std::vector<double> values, int a, int b) {
        return synthesize_caption(make_window(std::move(values), false), {"window", a, b});
      },
      py::arg("values"), py::arg("a"), py::arg("b"));

  m.def(
      "encode_frames", [](std::vector<double> values) { return encode_frames(make_window(std::move(values), false)); },
      py::arg("values"));
  m.def(
      "embed_text", [](const std::string& caption) { return HashTextEmbedder{}.embed(caption); },
      py::arg("caption"));
  m.def(
      "infonce_loss",
      [](const Matrix& psi) {
        const auto r = infonce_loss(psi);
        return py::make_tuple(r.loss, r.grad);
      },
      py::arg("psi"), "Symmetric InfoNCE loss and its gradient with respect to psi.");

  m.def(
      "rank_scores",
      [](const std::vector<double>& scores, std::size_t gt_position, int k) {
        std::vector<std::size_t> rows(scores.size());
        for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
        const auto r = rank_scores("q", scores, rows, gt_position, k);
        std::vector<std::size_t> top;
        for (const auto& it : r.top) top.push_back(it.row);
        return py::make_tuple(top, r.gt_rank);
      },
      py::arg("scores"), py::arg("gt_position"), py::arg("k") = 10,
      "Top-k candidate positions (ties by position) and the 1-based ground-truth rank.");
  m.def(
      "recall_at_k", [](const std::vector<int>& ranks, int k) { return recall_at_k(ranks, k); }, py::arg("ranks"), py::arg("k"));
  m.def(
      "mean_ap", [](const std::vector<int>& ranks) { return mean_ap(ranks); }, py::arg("ranks"));

  const char* cmd_doc = "Run one pipeline stage from a JSON config.";
  m.def(
      "make_fixture", [](const std::string& c, std::optional<std::uint64_t> s) { cmd_make_fixture(load_config(c, s)); },
      py::arg("config"), py::arg("seed") = py::none(), cmd_doc);
  m.def(
      "run_all",
      [](const std::string& c, std::optional<std::uint64_t> s) {
        py::gil_scoped_release release;
        cmd_run_all(load_config(c, s));
      },
      py::arg("config"), py::arg("seed") = py::none(), "Run every stage from windows to metrics.");
}
