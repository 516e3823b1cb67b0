#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "tsr/core.hpp"

namespace tsr {

// Piecewise-linear window with known interior knots (1-based indices) plus
// Gaussian noise; the clean part spans [0, 1] before noise is added.
struct PlantedWindow {
  std::vector<double> values;
  std::vector<int> knots;
};

PlantedWindow make_planted_window(int length, int n_knots, double noise_sigma, std::uint64_t seed,
                                  int min_spacing = 120);

// Long raw series built from random linear regimes with varying noise and
// oscillation, resembling sensor data after arbitrary rescaling.
RawSeries make_synthetic_series(const std::string& subset_id, const std::string& series_id,
                                std::int64_t length, std::uint64_t seed);

struct FixtureSpec {
  int train_subsets = 4;
  int val_subsets = 1;
  int test_subsets = 2;
  int series_per_subset = 4;
  std::int64_t min_series_length = 600;
  std::int64_t max_series_length = 9000;
  std::uint64_t seed = 7;
};

// Writes <dir>/<subset>/series.csv (one column per series, header = series ids)
// and <dir>/splits/{train,val,test}.txt listing subset ids.
void write_fixture(const std::filesystem::path& dir, const FixtureSpec& spec);

}  // namespace tsr
