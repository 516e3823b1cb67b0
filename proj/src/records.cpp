#include "tsr/records.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

#include "tsr/error.hpp"

namespace tsr {

using nlohmann::json;

std::vector<std::string> read_nonempty_lines(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open '" + path.string() + "'");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    lines.push_back(std::move(line));
  }
  return lines;
}

void write_text_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw RuntimeFailure("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw RuntimeFailure("write failed for '" + path.string() + "'");
}

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

std::vector<json> read_ndjson(const fs::path& path) {
  std::vector<json> rows;
  std::size_t lineno = 0;
  for (const auto& line : read_nonempty_lines(path)) {
    ++lineno;
    json row = json::parse(line, nullptr, false);
    if (row.is_discarded() || !row.is_object()) {
      throw InvalidInput(path.string() + ": line " + std::to_string(lineno) + " is not a JSON object");
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

template <class T, class Fn>
void write_ndjson(const fs::path& path, std::span<const T> items, Fn&& to_json) {
  std::string text;
  for (const auto& item : items) {
    text += to_json(item).dump();
    text += '\n';
  }
  write_text_file(path, text);
}

template <class T>
T field(const json& row, const char* key, const fs::path& path) {
  auto it = row.find(key);
  if (it == row.end()) throw InvalidInput(path.string() + ": record lacks '" + key + "'");
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw InvalidInput(path.string() + ": field '" + key + "' has the wrong type");
  }
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  for (char c : line) {
    if (c == '"') {
      quoted = !quoted;
    } else if (c == ',' && !quoted) {
      cells.push_back(cell);
      cell.clear();
    } else {
      cell += c;
    }
  }
  cells.push_back(cell);
  for (auto& s : cells) {
    const auto first = s.find_first_not_of(" \t");
    const auto last = s.find_last_not_of(" \t");
    s = first == std::string::npos ? std::string{} : s.substr(first, last - first + 1);
  }
  return cells;
}

bool parse_double(const std::string& text, double& out) {
  if (text.empty()) return false;
  const char* begin = text.data();
  const char* end = begin + text.size();
  if (*begin == '+') ++begin;
  auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc{} && ptr == end;
}

void load_csv(const fs::path& path, const std::string& subset_id, std::vector<RawSeries>& out) {
  const auto lines = read_nonempty_lines(path);
  if (lines.empty()) return;
  auto first = split_csv_line(lines.front());
  bool header = false;
  for (const auto& cell : first) {
    double v;
    if (!cell.empty() && !parse_double(cell, v)) header = true;
  }
  const std::size_t ncols = first.size();
  std::vector<RawSeries> cols(ncols);
  for (std::size_t c = 0; c < ncols; ++c) {
    cols[c].subset_id = subset_id;
    cols[c].series_id = header ? first[c] : "col" + std::to_string(c);
    if (cols[c].series_id.empty()) cols[c].series_id = "col" + std::to_string(c);
  }
  std::vector<bool> ended(ncols, false);
  for (std::size_t r = header ? 1 : 0; r < lines.size(); ++r) {
    auto cells = split_csv_line(lines[r]);
    if (cells.size() > ncols) {
      throw InvalidInput(path.string() + ": row " + std::to_string(r + 1) + " has too many cells");
    }
    for (std::size_t c = 0; c < ncols; ++c) {
      const std::string empty;
      const std::string& cell = c < cells.size() ? cells[c] : empty;
      if (cell.empty()) {
        ended[c] = true;
        continue;
      }
      double v;
      if (!parse_double(cell, v) || !std::isfinite(v)) {
        throw InvalidInput(path.string() + ": non-numeric or non-finite value '" + cell +
                           "' in column " + cols[c].series_id);
      }
      if (ended[c]) {
        throw InvalidInput(path.string() + ": gap inside column " + cols[c].series_id);
      }
      cols[c].values.push_back(v);
    }
  }
  for (auto& s : cols) {
    if (s.values.empty()) throw InvalidInput(path.string() + ": column " + s.series_id + " is empty");
    out.push_back(std::move(s));
  }
}

void load_series_ndjson(const fs::path& path, const std::string& subset_id,
                        std::vector<RawSeries>& out) {
  for (const auto& row : read_ndjson(path)) {
    RawSeries s;
    s.subset_id = subset_id;
    s.series_id = field<std::string>(row, "series_id", path);
    s.values = field<std::vector<double>>(row, "values", path);
    if (s.values.empty()) throw InvalidInput(path.string() + ": series " + s.series_id + " is empty");
    for (double v : s.values) {
      if (!std::isfinite(v)) throw InvalidInput(path.string() + ": series " + s.series_id + " has non-finite values");
    }
    out.push_back(std::move(s));
  }
}

json spec_json(const SegmentSpec& s) { return {{"window_id", s.window_id}, {"a", s.a}, {"b", s.b}}; }

SegmentSpec spec_from(const json& row, const fs::path& path) {
  SegmentSpec s{field<std::string>(row, "window_id", path), field<int>(row, "a", path),
                field<int>(row, "b", path)};
  if (s.a < 1 || s.b < s.a) {
    throw InvalidInput(path.string() + ": bad segment (" + std::to_string(s.a) + ", " +
                       std::to_string(s.b) + ") in " + s.window_id);
  }
  return s;
}

}  // namespace

std::vector<RawSeries> load_subset(const fs::path& subset_dir) {
  if (!fs::is_directory(subset_dir)) {
    throw InvalidInput("subset directory '" + subset_dir.string() + "' does not exist");
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(subset_dir)) {
    const auto ext = entry.path().extension();
    if (entry.is_regular_file() && (ext == ".csv" || ext == ".ndjson")) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  const std::string subset_id = subset_dir.filename().string();
  std::vector<RawSeries> series;
  for (const auto& f : files) {
    if (f.extension() == ".csv") {
      load_csv(f, subset_id, series);
    } else {
      load_series_ndjson(f, subset_id, series);
    }
  }
  std::set<std::string> seen;
  for (const auto& s : series) {
    if (!seen.insert(s.series_id).second) {
      throw InvalidInput("duplicate series id '" + s.series_id + "' in " + subset_dir.string());
    }
  }
  return series;
}

std::map<std::string, std::vector<std::string>> load_split_lists(const fs::path& splits_dir) {
  std::map<std::string, std::vector<std::string>> splits;
  std::map<std::string, std::string> owner;
  for (const char* name : {"train", "val", "test"}) {
    const fs::path file = splits_dir / (std::string(name) + ".txt");
    if (!fs::exists(file)) throw InvalidInput("missing split list '" + file.string() + "'");
    auto& ids = splits[name];
    for (auto line : read_nonempty_lines(file)) {
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.resize(hash);
      const auto first = line.find_first_not_of(" \t");
      if (first == std::string::npos) continue;
      line = line.substr(first, line.find_last_not_of(" \t") - first + 1);
      auto [it, inserted] = owner.emplace(line, name);
      if (!inserted) {
        throw InvalidInput("subset '" + line + "' appears in both " + it->second + " and " + name +
                           " splits");
      }
      ids.push_back(line);
    }
  }
  return splits;
}

void write_windows(const fs::path& path, std::span<const Window> windows) {
  write_ndjson(path, windows, [](const Window& w) {
    return json{{"window_id", w.window_id}, {"subset_id", w.subset_id},
                {"series_id", w.series_id}, {"start_offset", w.start_offset},
                {"values", w.values},       {"degenerate", w.degenerate}};
  });
}

std::vector<Window> read_windows(const fs::path& path) {
  std::vector<Window> out;
  for (const auto& row : read_ndjson(path)) {
    Window w;
    w.window_id = field<std::string>(row, "window_id", path);
    w.subset_id = field<std::string>(row, "subset_id", path);
    w.series_id = field<std::string>(row, "series_id", path);
    w.start_offset = field<std::int64_t>(row, "start_offset", path);
    w.values = field<std::vector<double>>(row, "values", path);
    w.degenerate = field<bool>(row, "degenerate", path);
    w.normalized = true;
    out.push_back(std::move(w));
  }
  return out;
}

void write_segments(const fs::path& path, std::span<const SegmentRow> rows) {
  write_ndjson(path, rows, [](const SegmentRow& r) {
    json j = spec_json(r.spec);
    j["lambda_used"] = r.lambda_used;
    j["captionable"] = r.captionable;
    return j;
  });
}

std::vector<SegmentRow> read_segments(const fs::path& path) {
  std::vector<SegmentRow> out;
  for (const auto& row : read_ndjson(path)) {
    out.push_back({spec_from(row, path), field<double>(row, "lambda_used", path),
                   field<bool>(row, "captionable", path)});
  }
  return out;
}

void write_pairs(const fs::path& path, std::span<const SegmentRecord> records) {
  write_ndjson(path, records, [](const SegmentRecord& r) {
    json j = spec_json(r.spec);
    j["caption"] = r.caption;
    j["caption_source"] = to_string(r.source);
    return j;
  });
}

std::vector<SegmentRecord> read_pairs(const fs::path& path) {
  std::vector<SegmentRecord> out;
  for (const auto& row : read_ndjson(path)) {
    SegmentRecord r{spec_from(row, path), field<std::string>(row, "caption", path),
                    caption_source_from_string(field<std::string>(row, "caption_source", path))};
    if (r.caption.empty()) throw InvalidInput(path.string() + ": empty caption for " + r.spec.window_id);
    out.push_back(std::move(r));
  }
  return out;
}

void write_queries(const fs::path& path, std::span<const QueryItem> queries) {
  write_ndjson(path, queries, [](const QueryItem& q) {
    json j = spec_json(q.gt);
    j["query_id"] = q.query_id;
    j["caption"] = q.caption;
    return j;
  });
}

std::vector<QueryItem> read_queries(const fs::path& path) {
  std::vector<QueryItem> out;
  for (const auto& row : read_ndjson(path)) {
    out.push_back({field<std::string>(row, "query_id", path),
                   field<std::string>(row, "caption", path), spec_from(row, path)});
  }
  return out;
}

}  // namespace tsr
