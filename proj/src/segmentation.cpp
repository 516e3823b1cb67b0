#include "tsr/segmentation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tsr/error.hpp"

namespace tsr {

void SegmentationConfig::validate() const {
  if (!(lambda_init > 0.0)) throw InvalidInput("lambda_init must be > 0");
  if (!(lambda_factor > 1.0)) throw InvalidInput("lambda_factor must be > 1");
  if (max_segments < 1) throw InvalidInput("max_segments must be >= 1");
  if (min_length < 1) throw InvalidInput("min_length must be >= 1");
  if (!(sigma_multiplier >= 0.0)) throw InvalidInput("sigma_multiplier must be >= 0");
  if (max_escalations < 0) throw InvalidInput("max_escalations must be >= 0");
  if (merge_radius < 1) throw InvalidInput("merge_radius must be >= 1");
}

std::vector<int> detect_change_points(std::span<const double> trend, double sigma_multiplier) {
  const auto d2 = second_diff(trend);
  const double n = static_cast<double>(d2.size());
  const double mean = std::accumulate(d2.begin(), d2.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : d2) ss += (v - mean) * (v - mean);
  const double theta = sigma_multiplier * std::sqrt(ss / n);
  std::vector<int> points;
  for (std::size_t r = 0; r < d2.size(); ++r) {
    if (std::abs(d2[r]) > theta) points.push_back(static_cast<int>(r) + 2);
  }
  return points;
}

std::vector<int> merge_adjacent(std::span<const int> change_points,
                                std::span<const double> second_diff_values, int radius) {
  auto magnitude = [&](int t) {
    const auto r = static_cast<std::size_t>(t - 2);
    return r < second_diff_values.size() ? std::abs(second_diff_values[r]) : 0.0;
  };
  std::vector<int> out;
  std::size_t i = 0;
  while (i < change_points.size()) {
    std::size_t j = i;
    int best = change_points[i];
    while (j + 1 < change_points.size() && change_points[j + 1] - change_points[j] < radius) {
      ++j;
      if (magnitude(change_points[j]) > magnitude(best)) best = change_points[j];
    }
    out.push_back(best);
    i = j + 1;
  }
  return out;
}

std::vector<SegmentSpec> boundaries_to_segments(std::span<const int> change_points, int window_length,
                                                const std::string& window_id,
                                                std::span<const double> second_diff_values,
                                                int merge_radius) {
  if (merge_radius < 1) throw InvalidInput("boundaries_to_segments: merge radius must be >= 1");
  if (window_length < 2) throw InvalidInput("boundaries_to_segments: window_length must be >= 2");
  if (!std::is_sorted(change_points.begin(), change_points.end()) ||
      std::adjacent_find(change_points.begin(), change_points.end()) != change_points.end()) {
    throw InvalidInput("boundaries_to_segments: change points must be strictly increasing");
  }
  for (int t : change_points) {
    if (t <= 1 || t >= window_length) {
      throw InvalidInput("boundaries_to_segments: change point " + std::to_string(t) +
                         " outside (1, " + std::to_string(window_length) + ")");
    }
  }
  const auto merged = merge_adjacent(change_points, second_diff_values, merge_radius);
  std::vector<int> bounds;
  bounds.reserve(merged.size() + 2);
  bounds.push_back(1);
  bounds.insert(bounds.end(), merged.begin(), merged.end());
  bounds.push_back(window_length);
  std::vector<SegmentSpec> segments;
  segments.reserve(bounds.size() - 1);
  for (std::size_t m = 0; m + 1 < bounds.size(); ++m) {
    segments.push_back({window_id, bounds[m], bounds[m + 1]});
  }
  return segments;
}

namespace {

void fill_captionable(SegmentationResult& result, int min_length) {
  result.captionable.clear();
  for (const auto& s : result.segments) {
    if (s.length() >= min_length) result.captionable.push_back(s);
  }
}

}  // namespace

SegmentationResult segment_window(const Window& window, const SegmentationConfig& cfg,
                                  const Tv2Options& solver) {
  cfg.validate();
  const int L = static_cast<int>(window.length());
  if (L < 3) throw InvalidInput("segment_window: window shorter than 3 points");
  SegmentationResult result;
  if (window.degenerate) {
    result.lambda_used = cfg.lambda_init;
    result.segments = {{window.window_id, 1, L}};
    fill_captionable(result, cfg.min_length);
    return result;
  }

  double lambda = cfg.lambda_init;
  std::vector<double> d2;
  for (int escalation = 0;; ++escalation) {
    const auto sol = solve_tv2({window.values, lambda}, solver);
    d2 = second_diff(sol.u);
    const auto points = detect_change_points(sol.u, cfg.sigma_multiplier);
    result.segments = boundaries_to_segments(points, L, window.window_id, d2, cfg.merge_radius);
    result.lambda_used = lambda;
    result.escalations = escalation;
    if (static_cast<int>(result.segments.size()) <= cfg.max_segments) break;
    if (escalation == cfg.max_escalations) {
      // Keep the M_max - 1 strongest merged change points.
      std::vector<int> merged;
      for (std::size_t m = 1; m < result.segments.size(); ++m) merged.push_back(result.segments[m].a);
      std::stable_sort(merged.begin(), merged.end(), [&](int l, int r) {
        return std::abs(d2[l - 2]) > std::abs(d2[r - 2]);
      });
      merged.resize(cfg.max_segments - 1);
      std::sort(merged.begin(), merged.end());
      result.segments = boundaries_to_segments(merged, L, window.window_id, d2, cfg.merge_radius);
      result.fell_back = true;
      break;
    }
    lambda *= cfg.lambda_factor;
  }
  for (std::size_t m = 1; m < result.segments.size(); ++m) {
    result.change_points.push_back(result.segments[m].a);
  }
  fill_captionable(result, cfg.min_length);
  return result;
}

}  // namespace tsr
