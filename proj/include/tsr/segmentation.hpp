#pragma once

#include <span>
#include <string>
#include <vector>

#include "tsr/core.hpp"
#include "tsr/trend_filter.hpp"

namespace tsr {

inline constexpr int kDefaultMergeRadius = 5;

struct SegmentationConfig {
  double lambda_init = 100.0;
  double lambda_factor = 10.0;
  int max_segments = 6;        // M_max
  int min_length = 50;         // L_min, counted as b - a + 1
  double sigma_multiplier = 3.0;
  int max_escalations = 12;
  int merge_radius = kDefaultMergeRadius;  // change points fewer than this many indices apart merge

  void validate() const;
};

// (window, a, b) with 1-based inclusive indices, 1 <= a < b <= L_w.
struct SegmentSpec {
  std::string window_id;
  int a = 0;
  int b = 0;

  int length() const noexcept { return b - a + 1; }
  friend auto operator<=>(const SegmentSpec&, const SegmentSpec&) = default;
};

struct SegmentationResult {
  double lambda_used = 0.0;
  int escalations = 0;
  bool fell_back = false;           // escalation cap hit, top-|d2| points kept
  std::vector<int> change_points;   // 1-based, sorted, after merging
  std::vector<SegmentSpec> segments;
  std::vector<SegmentSpec> captionable;
};

// Interior 1-based indices t in [2, L-1] with |d2_t| > multiplier * sigma,
// sigma being the mean-centred standard deviation over the L - 2 interior values.
std::vector<int> detect_change_points(std::span<const double> trend, double sigma_multiplier);

// Runs of change points with consecutive gaps below `radius` collapse onto the
// one with the largest |d2|; without magnitudes the earliest is kept. A noisy
// knee often comes out of the exact TV2 fit as two kinks a few indices apart.
std::vector<int> merge_adjacent(std::span<const int> change_points,
                                std::span<const double> second_diff_values = {},
                                int radius = kDefaultMergeRadius);

// [1] + points + [L_w] as contiguous pairs sharing endpoints. `second_diff_values`,
// when given, is D2 of the trend (length L_w - 2) and drives the merge rule.
std::vector<SegmentSpec> boundaries_to_segments(std::span<const int> change_points, int window_length,
                                                const std::string& window_id = {},
                                                std::span<const double> second_diff_values = {},
                                                int merge_radius = kDefaultMergeRadius);

// Adaptive-lambda TV2 segmentation of one normalized window.
SegmentationResult segment_window(const Window& window, const SegmentationConfig& cfg,
                                  const Tv2Options& solver = {.method = Tv2Method::kDualNewton});

}  // namespace tsr
