#include <gtest/gtest.h>

#include <regex>

#include "tsr/captioning.hpp"
#include "tsr/error.hpp"

using namespace tsr;

namespace {

Window ramp_window(int L) {
  Window w;
  w.window_id = "w";
  w.values.resize(L);
  for (int t = 0; t < L; ++t) w.values[t] = static_cast<double>(t) / (L - 1);
  w.normalized = true;
  return w;
}

std::size_t count(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
  return n;
}

}  // namespace

TEST(RenderWindowPlot, NoSegmentsDrawsOnlyTheWindowLine) {
  const auto svg = render_window_plot(ramp_window(1024), {});
  EXPECT_EQ(count(svg, "<polyline"), 1u);
  EXPECT_EQ(count(svg, "<text"), 0u);
  EXPECT_EQ(count(svg, "class=\"band\""), 0u);
}

TEST(RenderWindowPlot, LabelsAreOrdinalsInLeftToRightOrder) {
  const std::vector<SegmentSpec> segs{{"w", 1, 200}, {"w", 200, 500}, {"w", 500, 800}, {"w", 800, 1024}};
  const auto svg = render_window_plot(ramp_window(1024), segs);
  EXPECT_EQ(count(svg, "<polyline"), 5u);
  EXPECT_EQ(count(svg, "class=\"band\""), 4u);

  const std::regex label(R"re(<text x="([0-9.]+)"[^>]*>([0-9]+)</text>)re");
  std::vector<std::pair<double, int>> labels;
  for (auto it = std::sregex_iterator(svg.begin(), svg.end(), label); it != std::sregex_iterator(); ++it) {
    labels.emplace_back(std::stod((*it)[1]), std::stoi((*it)[2]));
  }
  ASSERT_EQ(labels.size(), 4u);
  for (std::size_t k = 0; k < labels.size(); ++k) {
    EXPECT_EQ(labels[k].second, static_cast<int>(k) + 1);
    if (k > 0) EXPECT_GT(labels[k].first, labels[k - 1].first);
  }
}

TEST(RenderWindowPlot, Deterministic) {
  const std::vector<SegmentSpec> segs{{"w", 1, 600}, {"w", 600, 1024}};
  EXPECT_EQ(render_window_plot(ramp_window(1024), segs), render_window_plot(ramp_window(1024), segs));
}

TEST(RenderWindowPlot, BandEdgesMapBackToSegmentBounds) {
  const PlotSpec spec;
  const PlotGeometry geo(spec, 1024);
  const std::vector<SegmentSpec> segs{{"w", 1, 317}, {"w", 317, 733}, {"w", 733, 1024}};
  const auto svg = render_window_plot(ramp_window(1024), segs, spec);
  const std::regex band(R"re(<rect class="band" x="([0-9.]+)" y="[0-9.]+" width="([0-9.]+)")re");
  std::size_t k = 0;
  for (auto it = std::sregex_iterator(svg.begin(), svg.end(), band); it != std::sregex_iterator(); ++it, ++k) {
    const double x0 = std::stod((*it)[1]);
    const double x1 = x0 + std::stod((*it)[2]);
    ASSERT_LT(k, segs.size());
    EXPECT_LT(std::abs(geo.x_to_index(x0) - segs[k].a), 1.0);
    EXPECT_LT(std::abs(geo.x_to_index(x1) - segs[k].b), 1.0);
  }
  EXPECT_EQ(k, segs.size());
}

TEST(PlotGeometry, EndpointsSitOnPlotEdges) {
  const PlotSpec spec;
  const PlotGeometry geo(spec, 1024);
  EXPECT_DOUBLE_EQ(geo.index_to_x(1), spec.margin_left);
  EXPECT_DOUBLE_EQ(geo.index_to_x(1024), spec.width - spec.margin_right);
  for (double t : {1.0, 17.5, 512.0, 1024.0}) EXPECT_NEAR(geo.x_to_index(geo.index_to_x(t)), t, 1e-9);
}

TEST(SynthesizeCaption, RisingRampOpening) {
  const auto w = ramp_window(1024);
  EXPECT_EQ(synthesize_caption(w, {"w", 1, 300}),
            "smooth rising segment below baseline, in the opening part of the series");
  EXPECT_EQ(synthesize_caption(w, {"w", 750, 1024}),
            "smooth rising segment above baseline, in the closing part of the series");
}

TEST(SynthesizeCaption, VolatileFlatMiddle) {
  Window w;
  w.window_id = "w";
  w.values.assign(1024, 0.5);
  for (int t = 399; t < 600; ++t) w.values[t] = (t % 2 == 0) ? 0.0 : 1.0;
  EXPECT_EQ(synthesize_caption(w, {"w", 400, 600}),
            "volatile flat segment near baseline, in the middle part of the series");
}

TEST(SegmentFeatures, LinearSegment) {
  const auto w = ramp_window(101);
  const auto f = segment_features(w, {"w", 1, 101});
  EXPECT_NEAR(f.slope_per_100, 1.0, 1e-12);
  EXPECT_NEAR(f.residual_std, 0.0, 1e-12);
  EXPECT_NEAR(f.mean_offset, 0.0, 1e-12);
  EXPECT_THROW(segment_features(w, {"w", 0, 50}), InvalidInput);
  EXPECT_THROW(segment_features(w, {"w", 10, 200}), InvalidInput);
}

TEST(CaptionSource, RoundTrip) {
  for (auto s : {CaptionSource::kSynthetic, CaptionSource::kVlm, CaptionSource::kFile}) {
    EXPECT_EQ(caption_source_from_string(to_string(s)), s);
  }
  EXPECT_THROW(caption_source_from_string("oracle"), InvalidInput);
}
