#include "tsr/core.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>

#include "tsr/error.hpp"

namespace tsr {

void SamplingConfig::validate() const {
  if (window_length < 3) throw InvalidInput("window_length must be >= 3");
  if (target_windows < 1) throw InvalidInput("target_windows must be >= 1");
  if (initial_stride < 1) throw InvalidInput("initial_stride must be >= 1");
}

std::uint64_t stable_hash(std::string_view text, std::uint64_t seed) {
  std::uint64_t h = 14695981039346656037ULL ^ (seed * 0x9E3779B97F4A7C15ULL);
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::vector<int> allocate_windows(int target, std::span<const std::int64_t> series_lengths) {
  if (series_lengths.empty()) throw InvalidInput("allocate_windows: empty series list");
  if (target < 1) throw InvalidInput("allocate_windows: target must be >= 1");
  const int n = static_cast<int>(series_lengths.size());
  std::vector<int> counts(n, target / n);
  const int extra = target % n;
  for (int i = 0; i < extra; ++i) ++counts[i];
  return counts;
}

std::vector<double> interpolate_linear(std::span<const double> values, int target_length) {
  if (values.empty()) throw InvalidInput("interpolate_linear: empty input");
  if (target_length < 1) throw InvalidInput("interpolate_linear: target_length must be >= 1");
  std::vector<double> out(target_length);
  const std::size_t n = values.size();
  if (n == 1 || target_length == 1) {
    std::fill(out.begin(), out.end(), values.front());
    return out;
  }
  const double scale = static_cast<double>(n - 1) / static_cast<double>(target_length - 1);
  for (int j = 0; j < target_length; ++j) {
    const double pos = j * scale;
    auto i = static_cast<std::size_t>(std::floor(pos));
    if (i >= n - 1) {
      out[j] = values[n - 1];
      continue;
    }
    const double frac = pos - static_cast<double>(i);
    out[j] = values[i] + frac * (values[i + 1] - values[i]);
  }
  out.back() = values.back();
  return out;
}

namespace {

// Number of windows the sliding scheme yields at `stride`; the last one is
// clamped to end flush with the series.
std::int64_t windows_at(std::int64_t room, std::int64_t stride) {
  return (room + stride - 1) / stride + 1;
}

std::vector<std::int64_t> offsets_at(std::int64_t room, std::int64_t stride) {
  std::vector<std::int64_t> out;
  const std::int64_t n = windows_at(room, stride);
  out.reserve(n);
  for (std::int64_t k = 0; k < n; ++k) out.push_back(std::min(k * stride, room));
  return out;
}

}  // namespace

OffsetPlan plan_offsets(std::int64_t length, int count, const SamplingConfig& cfg,
                        std::uint64_t series_seed) {
  cfg.validate();
  OffsetPlan plan;
  if (count <= 0) return plan;
  const std::int64_t effective = std::max<std::int64_t>(length, cfg.window_length);
  const std::int64_t room = effective - cfg.window_length;

  std::int64_t stride = cfg.initial_stride;
  if (windows_at(room, stride) >= count) {
    auto all = offsets_at(room, stride);
    if (static_cast<std::int64_t>(all.size()) > count) {
      std::mt19937_64 rng(series_seed);
      std::vector<std::size_t> idx(all.size());
      std::iota(idx.begin(), idx.end(), 0);
      for (int k = 0; k < count; ++k) {
        std::uniform_int_distribution<std::size_t> pick(k, idx.size() - 1);
        std::swap(idx[k], idx[pick(rng)]);
      }
      idx.resize(count);
      std::sort(idx.begin(), idx.end());
      std::vector<std::int64_t> chosen;
      for (auto i : idx) chosen.push_back(all[i]);
      all = std::move(chosen);
    }
    plan.offsets = std::move(all);
    plan.stride = static_cast<int>(stride);
    return plan;
  }

  while (stride > 1 && windows_at(room, stride) < count) --stride;
  auto all = offsets_at(room, stride);
  plan.stride = static_cast<int>(stride);
  if (static_cast<std::int64_t>(all.size()) >= count) {
    all.resize(count);
    plan.offsets = std::move(all);
    return plan;
  }
  if (!cfg.allow_duplicates) {
    throw InvalidInput("series provides only " + std::to_string(all.size()) +
                       " distinct windows but " + std::to_string(count) +
                       " were requested and duplicates are disabled");
  }
  plan.duplicated = true;
  plan.offsets.reserve(count);
  for (int k = 0; k < count; ++k) plan.offsets.push_back(all[k % all.size()]);
  return plan;
}

std::vector<Window> extract_windows(const RawSeries& series, int count, const SamplingConfig& cfg) {
  cfg.validate();
  if (count < 0) throw InvalidInput("extract_windows: count must be >= 0");
  if (count == 0) return {};
  if (series.values.empty()) {
    throw InvalidInput("extract_windows: series '" + series.series_id + "' is empty");
  }

  std::vector<double> source = series.values;
  if (static_cast<int>(source.size()) < cfg.window_length) {
    source = interpolate_linear(source, cfg.window_length);
  }
  const std::uint64_t seed =
      stable_hash(series.series_id, stable_hash(series.subset_id, cfg.rng_seed));
  const OffsetPlan plan = plan_offsets(static_cast<std::int64_t>(source.size()), count, cfg, seed);

  std::vector<Window> out;
  out.reserve(plan.offsets.size());
  for (std::size_t k = 0; k < plan.offsets.size(); ++k) {
    Window w;
    char ordinal[16];
    std::snprintf(ordinal, sizeof ordinal, "w%04zu", k);
    w.window_id = series.subset_id + "/" + series.series_id + "/" + ordinal;
    w.subset_id = series.subset_id;
    w.series_id = series.series_id;
    w.start_offset = plan.offsets[k];
    const auto first = source.begin() + plan.offsets[k];
    w.values.assign(first, first + cfg.window_length);
    out.push_back(std::move(w));
  }
  return out;
}

Normalized normalize_minmax(std::span<const double> values) {
  if (values.empty()) throw InvalidInput("normalize_minmax: empty input");
  for (double v : values) {
    if (!std::isfinite(v)) throw InvalidInput("normalize_minmax: non-finite value");
  }
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  Normalized out;
  out.min = *lo;
  out.max = *hi;
  out.values.resize(values.size());
  const double span = out.max - out.min;
  if (span == 0.0) {
    out.degenerate = true;
    std::fill(out.values.begin(), out.values.end(), 0.5);
    return out;
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    out.values[i] = std::clamp((values[i] - out.min) / span, 0.0, 1.0);
  }
  return out;
}

void normalize_window(Window& window) {
  auto n = normalize_minmax(window.values);
  window.values = std::move(n.values);
  window.degenerate = n.degenerate;
  window.normalized = true;
}

std::vector<Window> sample_subset(std::span<const RawSeries> series, const SamplingConfig& cfg) {
  cfg.validate();
  std::vector<std::int64_t> lengths;
  lengths.reserve(series.size());
  for (const auto& s : series) lengths.push_back(static_cast<std::int64_t>(s.values.size()));
  const auto counts = allocate_windows(cfg.target_windows, lengths);
  std::vector<Window> out;
  out.reserve(cfg.target_windows);
  for (std::size_t i = 0; i < series.size(); ++i) {
    for (auto& w : extract_windows(series[i], counts[i], cfg)) {
      normalize_window(w);
      out.push_back(std::move(w));
    }
  }
  return out;
}

}  // namespace tsr
