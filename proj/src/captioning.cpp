#include "tsr/captioning.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>

#include "tsr/error.hpp"

namespace tsr {

std::string to_string(CaptionSource source) {
  switch (source) {
    case CaptionSource::kSynthetic: return "synthetic";
    case CaptionSource::kVlm: return "vlm";
    case CaptionSource::kFile: return "file";
  }
  return "synthetic";
}

CaptionSource caption_source_from_string(const std::string& text) {
  if (text == "synthetic") return CaptionSource::kSynthetic;
  if (text == "vlm") return CaptionSource::kVlm;
  if (text == "file") return CaptionSource::kFile;
  throw InvalidInput("unknown caption_source '" + text + "'");
}

PlotGeometry::PlotGeometry(const PlotSpec& spec, int window_length)
    : spec_(spec), length_(window_length) {
  if (window_length < 2) throw InvalidInput("PlotGeometry: window needs >= 2 points");
}

double PlotGeometry::index_to_x(double index) const {
  const double inner = spec_.width - spec_.margin_left - spec_.margin_right;
  return spec_.margin_left + (index - 1.0) * inner / (length_ - 1);
}

double PlotGeometry::x_to_index(double x) const {
  const double inner = spec_.width - spec_.margin_left - spec_.margin_right;
  return 1.0 + (x - spec_.margin_left) * (length_ - 1) / inner;
}

double PlotGeometry::value_to_y(double value, double lo, double hi) const {
  const double inner = spec_.height - spec_.margin_top - spec_.margin_bottom;
  const double span = hi > lo ? hi - lo : 1.0;
  const double frac = hi > lo ? (value - lo) / span : 0.5;
  return spec_.margin_top + (1.0 - frac) * inner;
}

namespace {

constexpr std::array<const char*, 8> kPalette = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                                 "#9467bd", "#8c564b", "#e377c2", "#17becf"};

std::string fmt2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

void append_polyline(std::string& out, const Window& window, const PlotGeometry& geo, int a, int b,
                     double lo, double hi, const char* stroke, const char* width) {
  out += "<polyline fill=\"none\" stroke=\"";
  out += stroke;
  out += "\" stroke-width=\"";
  out += width;
  out += "\" points=\"";
  for (int t = a; t <= b; ++t) {
    if (t > a) out += ' ';
    out += fmt2(geo.index_to_x(t));
    out += ',';
    out += fmt2(geo.value_to_y(window.values[t - 1], lo, hi));
  }
  out += "\"/>\n";
}

}  // namespace

std::string render_window_plot(const Window& window, const std::vector<SegmentSpec>& segments,
                               const PlotSpec& spec) {
  if (window.values.empty()) throw InvalidInput("render_window_plot: empty window");
  const int L = static_cast<int>(window.length());
  for (const auto& s : segments) {
    if (s.a < 1 || s.b > L || s.a > s.b) {
      throw InvalidInput("render_window_plot: segment (" + std::to_string(s.a) + ", " +
                         std::to_string(s.b) + ") outside window");
    }
  }
  const PlotGeometry geo(spec, std::max(L, 2));
  const auto [lo_it, hi_it] = std::minmax_element(window.values.begin(), window.values.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  const double top = spec.margin_top;
  const double bottom = spec.height - spec.margin_bottom;

  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(spec.width) +
         "\" height=\"" + std::to_string(spec.height) + "\" viewBox=\"0 0 " +
         std::to_string(spec.width) + " " + std::to_string(spec.height) + "\">\n";
  out += "<rect x=\"0\" y=\"0\" width=\"" + std::to_string(spec.width) + "\" height=\"" +
         std::to_string(spec.height) + "\" fill=\"#ffffff\"/>\n";

  for (std::size_t k = 0; k < segments.size(); ++k) {
    const auto& s = segments[k];
    const char* color = kPalette[k % kPalette.size()];
    const double x0 = geo.index_to_x(s.a);
    const double x1 = geo.index_to_x(s.b);
    out += "<rect class=\"band\" x=\"" + fmt2(x0) + "\" y=\"" + fmt2(top) + "\" width=\"" +
           fmt2(x1 - x0) + "\" height=\"" + fmt2(bottom - top) + "\" fill=\"" + color +
           "\" fill-opacity=\"0.18\"/>\n";
  }
  append_polyline(out, window, geo, 1, L, lo, hi, "#b0b0b0", "1");
  for (std::size_t k = 0; k < segments.size(); ++k) {
    const auto& s = segments[k];
    append_polyline(out, window, geo, s.a, s.b, lo, hi, kPalette[k % kPalette.size()], "2.5");
  }
  for (std::size_t k = 0; k < segments.size(); ++k) {
    const auto& s = segments[k];
    const double cx = geo.index_to_x(0.5 * (s.a + s.b));
    out += "<text x=\"" + fmt2(cx) + "\" y=\"" + fmt2(top - 10.0) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\" fill=\"" +
           kPalette[k % kPalette.size()] + "\">" + std::to_string(k + 1) + "</text>\n";
  }
  out += "</svg>\n";
  return out;
}

SegmentFeatures segment_features(const Window& window, const SegmentSpec& spec) {
  const int L = static_cast<int>(window.length());
  if (spec.a < 1 || spec.b > L || spec.a > spec.b) {
    throw InvalidInput("segment_features: segment outside window");
  }
  const int n = spec.b - spec.a + 1;
  double mean_t = 0.0, mean_v = 0.0;
  for (int t = spec.a; t <= spec.b; ++t) {
    mean_t += t;
    mean_v += window.values[t - 1];
  }
  mean_t /= n;
  mean_v /= n;
  double stt = 0.0, stv = 0.0;
  for (int t = spec.a; t <= spec.b; ++t) {
    stt += (t - mean_t) * (t - mean_t);
    stv += (t - mean_t) * (window.values[t - 1] - mean_v);
  }
  const double slope = stt > 0.0 ? stv / stt : 0.0;
  double rss = 0.0;
  for (int t = spec.a; t <= spec.b; ++t) {
    const double r = window.values[t - 1] - (mean_v + slope * (t - mean_t));
    rss += r * r;
  }
  double window_mean = 0.0;
  for (double v : window.values) window_mean += v;
  window_mean /= L;

  SegmentFeatures f;
  f.slope_per_100 = slope * 100.0;
  f.residual_std = std::sqrt(rss / n);
  f.mean_offset = mean_v - window_mean;
  f.center_fraction = 0.5 * (spec.a + spec.b) / L;
  return f;
}

std::string synthesize_caption(const Window& window, const SegmentSpec& spec) {
  const auto f = segment_features(window, spec);
  const char* volatility = f.residual_std < kNoisyResidualStd
                               ? "smooth"
                               : (f.residual_std < kVolatileResidualStd ? "noisy" : "volatile");
  const char* trend = std::abs(f.slope_per_100) < kFlatSlopePer100
                          ? "flat"
                          : (f.slope_per_100 > 0.0 ? "rising" : "falling");
  const char* level = std::abs(f.mean_offset) < kNearBaselineOffset
                          ? "near"
                          : (f.mean_offset > 0.0 ? "above" : "below");
  const char* position = f.center_fraction < 1.0 / 3.0
                             ? "opening"
                             : (f.center_fraction < 2.0 / 3.0 ? "middle" : "closing");
  std::string caption = volatility;
  caption += ' ';
  caption += trend;
  caption += " segment ";
  caption += level;
  caption += " baseline, in the ";
  caption += position;
  caption += " part of the series";
  return caption;
}

}  // namespace tsr
