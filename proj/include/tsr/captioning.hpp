#pragma once

#include <string>
#include <vector>

#include "tsr/core.hpp"
#include "tsr/segmentation.hpp"

namespace tsr {

enum class CaptionSource { kSynthetic, kVlm, kFile };

std::string to_string(CaptionSource source);
CaptionSource caption_source_from_string(const std::string& text);

// A captioned candidate segment; the unit of training and evaluation.
struct SegmentRecord {
  SegmentSpec spec;
  std::string caption;
  CaptionSource source = CaptionSource::kSynthetic;
};

// Single-panel plot layout: full window as a thin light-gray line, each
// segment as a translucent band plus a thicker colored line, and its 1-based
// ordinal centred above it.
struct PlotSpec {
  int width = 1024;
  int height = 320;
  int margin_left = 40;
  int margin_right = 20;
  int margin_top = 36;
  int margin_bottom = 24;
};

// Affine index <-> pixel map used by the renderer. Index 1 sits on the left
// plot edge, index L on the right edge.
class PlotGeometry {
 public:
  PlotGeometry(const PlotSpec& spec, int window_length);
  double index_to_x(double index) const;
  double x_to_index(double x) const;
  double value_to_y(double value, double lo, double hi) const;

 private:
  PlotSpec spec_;
  int length_;
};

// Deterministic SVG; the same inputs give byte-identical output.
std::string render_window_plot(const Window& window, const std::vector<SegmentSpec>& segments,
                               const PlotSpec& spec = {});

// Statistics behind the synthetic caption of one segment.
struct SegmentFeatures {
  double slope_per_100 = 0.0;   // OLS slope over [a, b] times 100
  double residual_std = 0.0;    // std of OLS residuals
  double mean_offset = 0.0;     // segment mean minus window mean
  double center_fraction = 0.0; // segment centre as a fraction of the window
};

SegmentFeatures segment_features(const Window& window, const SegmentSpec& spec);

// Caption vocabulary thresholds.
inline constexpr double kFlatSlopePer100 = 0.02;
inline constexpr double kNoisyResidualStd = 0.02;
inline constexpr double kVolatileResidualStd = 0.1;
inline constexpr double kNearBaselineOffset = 0.05;

// "<volatility> <trend> segment <level> baseline, in the <position> part of the series"
std::string synthesize_caption(const Window& window, const SegmentSpec& spec);

}  // namespace tsr
