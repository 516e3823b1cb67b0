#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace tsr {

// A raw univariate series as ingested from disk. Units are arbitrary.
struct RawSeries {
  std::string series_id;
  std::string subset_id;
  std::vector<double> values;
};

// Fixed-length window cut from a RawSeries. Once normalized, values lie in [0, 1].
struct Window {
  std::string window_id;
  std::string subset_id;
  std::string series_id;
  std::int64_t start_offset = 0;
  std::vector<double> values;
  bool normalized = false;
  bool degenerate = false;  // constant before normalization

  std::size_t length() const noexcept { return values.size(); }
};

struct SamplingConfig {
  int window_length = 1024;
  int target_windows = 1000;  // per subset
  int initial_stride = 1024;
  bool allow_duplicates = true;
  std::uint64_t rng_seed = 0;

  void validate() const;
};

struct Normalized {
  std::vector<double> values;
  double min = 0.0;
  double max = 0.0;
  bool degenerate = false;
};

// Per-series window counts: floor(N/S) each, plus one extra for the first
// N mod S series in input order.
std::vector<int> allocate_windows(int target, std::span<const std::int64_t> series_lengths);

// Piecewise-linear resampling; index i of the input maps affinely onto
// [0, target_length - 1], so both endpoints are preserved.
std::vector<double> interpolate_linear(std::span<const double> values, int target_length);

// Window start offsets for a series of `length` points (after interpolation
// to window_length when shorter). Exposed for testing the stride policy.
struct OffsetPlan {
  std::vector<std::int64_t> offsets;
  int stride = 0;
  bool duplicated = false;
};
OffsetPlan plan_offsets(std::int64_t length, int count, const SamplingConfig& cfg,
                        std::uint64_t series_seed);

// Cuts `count` raw (unnormalized) windows of cfg.window_length points.
std::vector<Window> extract_windows(const RawSeries& series, int count, const SamplingConfig& cfg);

// (v - min) / (max - min). Constant input maps to 0.5 everywhere and is flagged.
Normalized normalize_minmax(std::span<const double> values);

// Normalizes the window in place and sets the normalized/degenerate flags.
void normalize_window(Window& window);

// Runs allocation, extraction and normalization over every series of a subset.
std::vector<Window> sample_subset(std::span<const RawSeries> series, const SamplingConfig& cfg);

// 64-bit FNV-1a; stable across platforms, used wherever a string seeds
// something that must be reproducible.
std::uint64_t stable_hash(std::string_view text, std::uint64_t seed = 0);

}  // namespace tsr
