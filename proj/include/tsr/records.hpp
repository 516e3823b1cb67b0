#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "tsr/captioning.hpp"
#include "tsr/core.hpp"
#include "tsr/segmentation.hpp"

namespace tsr {

namespace fs = std::filesystem;

// One row of the segments file: every tile of every window, captionable or not.
struct SegmentRow {
  SegmentSpec spec;
  double lambda_used = 0.0;
  bool captionable = false;
};

struct QueryItem {
  std::string query_id;
  std::string caption;
  SegmentSpec gt;
};

// Reads every *.csv and *.ndjson file of a subset directory, in file-name order.
// CSV: one column per series, optional header of series ids, ragged tails allowed.
// NDJSON: {"series_id": ..., "values": [...]} per line.
std::vector<RawSeries> load_subset(const fs::path& subset_dir);

// Subset ids per split from <splits_dir>/{train,val,test}.txt (one id per line,
// '#' comments). Throws InvalidInput when a subset appears in two splits.
std::map<std::string, std::vector<std::string>> load_split_lists(const fs::path& splits_dir);

void write_windows(const fs::path& path, std::span<const Window> windows);
std::vector<Window> read_windows(const fs::path& path);

void write_segments(const fs::path& path, std::span<const SegmentRow> rows);
std::vector<SegmentRow> read_segments(const fs::path& path);

void write_pairs(const fs::path& path, std::span<const SegmentRecord> records);
std::vector<SegmentRecord> read_pairs(const fs::path& path);

void write_queries(const fs::path& path, std::span<const QueryItem> queries);
std::vector<QueryItem> read_queries(const fs::path& path);

// Shared helpers for line-oriented files.
std::vector<std::string> read_nonempty_lines(const fs::path& path);
void write_text_file(const fs::path& path, const std::string& text);
std::string read_text_file(const fs::path& path);

}  // namespace tsr
