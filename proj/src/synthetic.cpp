#include "tsr/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>

#include "tsr/error.hpp"

namespace tsr {

PlantedWindow make_planted_window(int length, int n_knots, double noise_sigma, std::uint64_t seed,
                                  int min_spacing) {
  if (length < 3 || n_knots < 0) throw InvalidInput("make_planted_window: bad arguments");
  if ((n_knots + 1) * min_spacing > length) {
    throw InvalidInput("make_planted_window: knots do not fit at the requested spacing");
  }
  std::mt19937_64 rng(seed);
  PlantedWindow out;

  // Knot positions: stratified draws that keep every piece >= min_spacing long.
  const int slack = length - (n_knots + 1) * min_spacing;
  std::uniform_int_distribution<int> extra(0, slack);
  std::vector<int> cuts(n_knots);
  for (auto& c : cuts) c = extra(rng);
  std::sort(cuts.begin(), cuts.end());
  for (int k = 0; k < n_knots; ++k) out.knots.push_back(1 + (k + 1) * min_spacing + cuts[k]);

  // Slopes alternate direction so consecutive pieces differ clearly.
  std::uniform_real_distribution<double> mag(1.0, 3.0);
  std::vector<double> slopes(n_knots + 1);
  double sign = (rng() & 1) ? 1.0 : -1.0;
  for (auto& s : slopes) {
    s = sign * mag(rng);
    sign = -sign;
  }

  std::vector<double> clean(length);
  double level = 0.0;
  int piece = 0;
  for (int t = 1; t <= length; ++t) {
    if (t > 1) {
      level += slopes[piece];
    }
    clean[t - 1] = level;
    if (piece < n_knots && t == out.knots[piece]) ++piece;
  }
  const auto [lo, hi] = std::minmax_element(clean.begin(), clean.end());
  const double lo_v = *lo;
  const double span = *hi - *lo;
  std::normal_distribution<double> noise(0.0, noise_sigma);
  out.values.resize(length);
  for (int i = 0; i < length; ++i) out.values[i] = (clean[i] - lo_v) / span + noise(rng);
  return out;
}

RawSeries make_synthetic_series(const std::string& subset_id, const std::string& series_id,
                                std::int64_t length, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> piece_len(140, 520);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double scale = std::exp(6.0 * unit(rng) - 3.0);
  const double offset = 100.0 * gauss(rng);

  RawSeries s;
  s.subset_id = subset_id;
  s.series_id = series_id;
  s.values.reserve(length);
  double level = 0.0;
  while (static_cast<std::int64_t>(s.values.size()) < length) {
    const int n = piece_len(rng);
    const double u = unit(rng);
    double slope = 0.0;
    if (u < 0.3) {
      slope = 0.0;
    } else {
      slope = (u < 0.65 ? 1.0 : -1.0) * (0.5 + 3.0 * unit(rng)) / 1000.0;
    }
    const double v = unit(rng);
    const double noise = v < 0.35 ? 0.002 : (v < 0.7 ? 0.04 : 0.25);
    const bool oscillate = unit(rng) < 0.3;
    const double period = 15.0 + 40.0 * unit(rng);
    const double amp = oscillate ? 0.1 + 0.3 * unit(rng) : 0.0;
    for (int t = 0; t < n && static_cast<std::int64_t>(s.values.size()) < length; ++t) {
      level += slope;
      const double osc = amp * std::sin(2.0 * std::numbers::pi * t / period);
      s.values.push_back(offset + scale * (level + osc + noise * gauss(rng)));
    }
  }
  return s;
}

void write_fixture(const std::filesystem::path& dir, const FixtureSpec& spec) {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "splits");
  std::mt19937_64 rng(spec.seed);
  std::uniform_int_distribution<std::int64_t> len(spec.min_series_length, spec.max_series_length);

  auto write_split = [&](const std::string& split, int count, int& next_id) {
    std::ofstream list(dir / "splits" / (split + ".txt"));
    for (int k = 0; k < count; ++k) {
      char name[32];
      std::snprintf(name, sizeof name, "subset_%02d", next_id++);
      list << name << '\n';
      fs::create_directories(dir / name);
      std::vector<RawSeries> cols;
      for (int j = 0; j < spec.series_per_subset; ++j) {
        char sid[16];
        std::snprintf(sid, sizeof sid, "s%02d", j);
        cols.push_back(make_synthetic_series(name, sid, len(rng), rng()));
      }
      std::ofstream csv(dir / name / "series.csv");
      for (int j = 0; j < spec.series_per_subset; ++j) csv << (j ? "," : "") << cols[j].series_id;
      csv << '\n';
      std::size_t rows = 0;
      for (const auto& c : cols) rows = std::max(rows, c.values.size());
      char buf[32];
      for (std::size_t r = 0; r < rows; ++r) {
        for (int j = 0; j < spec.series_per_subset; ++j) {
          if (j) csv << ',';
          if (r < cols[j].values.size()) {
            std::snprintf(buf, sizeof buf, "%.9g", cols[j].values[r]);
            csv << buf;
          }
        }
        csv << '\n';
      }
    }
  };
  int next = 0;
  write_split("train", spec.train_subsets, next);
  write_split("val", spec.val_subsets, next);
  write_split("test", spec.test_subsets, next);
}

}  // namespace tsr
