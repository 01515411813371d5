#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include "json.hpp"
#include "pavetex/detection.hpp"
#include "pavetex/error.hpp"

namespace pavetex {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// CSV

// Splits one CSV record. Fields may be double-quoted, with "" inside quotes
// for a literal quote. Returns false on an unterminated quote.
inline bool split_csv_line(std::string_view line, std::vector<std::string>& fields) {
  fields.clear();
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(ch);
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  fields.push_back(std::move(cur));
  return !quoted;
}

inline std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += "\"\"";
    else out.push_back(ch);
  }
  out.push_back('"');
  return out;
}

// Shortest-safe text for a double that reads back to the same value.
inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  const char* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end;
}

// Lines of a text file with any trailing '\r' removed.
inline std::vector<std::string> read_lines(const fs::path& path, ErrorKind kind) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(kind, "cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  return lines;
}

inline void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::IoError, "cannot write " + path.string());
  out << text;
  if (!out) fail(ErrorKind::IoError, "write failed for " + path.string());
}

// ---------------------------------------------------------------------------
// Manifest

inline constexpr std::string_view kManifestHeader = "path,label,city,stream,frame_index,timestamp,split";

struct ManifestRow {
  std::string path;   // relative to the manifest's directory unless absolute
  std::string label;  // empty for unlabelled stream frames
  std::string city;
  std::string stream;  // empty for standalone patches
  std::int64_t frame_index = 0;
  double timestamp = 0.0;
  std::string split;

  bool operator==(const ManifestRow&) const = default;
};

struct Manifest {
  std::vector<std::string> classes;
  double fps = 30.0;
  std::vector<ManifestRow> rows;
  fs::path base_dir;

  fs::path resolve(const ManifestRow& row) const {
    const fs::path p(row.path);
    return p.is_absolute() ? p : base_dir / p;
  }
};

// The class list and fps live in a JSON file next to the CSV, same stem.
inline fs::path manifest_sidecar(const fs::path& csv) {
  fs::path p = csv;
  p.replace_extension(".json");
  return p;
}

/// Reads and validates a manifest CSV and its sidecar. Every problem is a
/// ManifestError naming the file line.
inline Manifest load_manifest(const fs::path& path, bool check_paths = true) {
  if (!fs::exists(path)) fail(ErrorKind::ManifestError, "manifest not found: " + path.string());
  const fs::path sidecar = manifest_sidecar(path);
  if (!fs::exists(sidecar)) fail(ErrorKind::ManifestError, "manifest sidecar not found: " + sidecar.string());

  Manifest m;
  m.base_dir = path.parent_path();
  try {
    std::ifstream in(sidecar);
    const auto meta = nlohmann::json::parse(in);
    m.classes = meta.at("classes").get<std::vector<std::string>>();
    m.fps = meta.at("fps").get<double>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::ManifestError, sidecar.string() + ": " + e.what());
  }
  if (!(m.fps > 0.0)) fail(ErrorKind::ManifestError, sidecar.string() + ": fps must be positive");
  const std::set<std::string> declared(m.classes.begin(), m.classes.end());
  if (declared.size() != m.classes.size()) fail(ErrorKind::ManifestError, sidecar.string() + ": duplicate class");

  const auto lines = read_lines(path, ErrorKind::ManifestError);
  if (lines.empty() || lines[0] != kManifestHeader) {
    fail(ErrorKind::ManifestError, path.string() + " line 1: header must be '" + std::string(kManifestHeader) + "'");
  }
  std::map<std::string, std::set<std::int64_t>> seen_frames;
  std::map<std::string, double> last_time;
  std::vector<std::string> f;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const std::string where = path.string() + " line " + std::to_string(i + 1) + ": ";
    if (!split_csv_line(lines[i], f) || f.size() != 7) fail(ErrorKind::ManifestError, where + "expected 7 fields");
    ManifestRow row{f[0], f[1], f[2], f[3], 0, 0.0, f[6]};
    if (row.path.empty()) fail(ErrorKind::ManifestError, where + "empty path");
    if (!parse_number(f[4], row.frame_index) || row.frame_index < 0) {
      fail(ErrorKind::ManifestError, where + "bad frame_index '" + f[4] + "'");
    }
    if (!parse_number(f[5], row.timestamp) || !std::isfinite(row.timestamp)) {
      fail(ErrorKind::ManifestError, where + "bad timestamp '" + f[5] + "'");
    }
    if (!row.label.empty() && !declared.contains(row.label)) {
      fail(ErrorKind::ManifestError, where + "label '" + row.label + "' is not a declared class");
    }
    if (!row.stream.empty()) {
      if (!seen_frames[row.stream].insert(row.frame_index).second) {
        fail(ErrorKind::ManifestError, where + "duplicate frame_index in stream '" + row.stream + "'");
      }
      auto [it, fresh] = last_time.emplace(row.stream, row.timestamp);
      if (!fresh) {
        if (row.timestamp < it->second) fail(ErrorKind::ManifestError, where + "timestamp decreases within stream");
        it->second = row.timestamp;
      }
    }
    if (check_paths && !fs::exists(m.resolve(row))) {
      fail(ErrorKind::ManifestError, where + "frame not found: " + m.resolve(row).string());
    }
    m.rows.push_back(std::move(row));
  }
  return m;
}

inline void write_manifest(const fs::path& path, const Manifest& m) {
  std::string csv(kManifestHeader);
  csv += '\n';
  for (const auto& r : m.rows) {
    csv += csv_field(r.path) + ',' + csv_field(r.label) + ',' + csv_field(r.city) + ',' + csv_field(r.stream) + ',' +
           std::to_string(r.frame_index) + ',' + format_double(r.timestamp) + ',' + csv_field(r.split) + '\n';
  }
  write_text(path, csv);
  nlohmann::ordered_json meta;
  meta["classes"] = m.classes;
  meta["fps"] = m.fps;
  write_text(manifest_sidecar(path), meta.dump(2) + '\n');
}

// Rows of each named stream as a FrameStream (ordered by frame index, paths
// resolved), in order of first appearance.
inline std::vector<FrameStream> manifest_streams(const Manifest& m) {
  std::vector<FrameStream> out;
  std::map<std::string, std::size_t> slot;
  for (const auto& r : m.rows) {
    if (r.stream.empty()) continue;
    auto [it, fresh] = slot.emplace(r.stream, out.size());
    if (fresh) out.push_back({r.stream, m.fps, {}});
    out[it->second].frames.push_back({r.frame_index, r.timestamp, m.resolve(r).string()});
  }
  for (auto& s : out) {
    std::sort(s.frames.begin(), s.frames.end(),
              [](const StreamFrame& a, const StreamFrame& b) { return a.frame_index < b.frame_index; });
  }
  return out;
}

// ---------------------------------------------------------------------------
// Annotations

inline constexpr std::string_view kAnnotationHeader = "stream,event,timestamp";

/// Reads `stream,event,timestamp` rows (event is entrance or exit). Events of
/// each stream must alternate, starting with an entrance.
inline std::map<std::string, GroundTruthAnnotation> load_annotations(const fs::path& path) {
  const auto lines = read_lines(path, ErrorKind::ManifestError);
  if (lines.empty() || lines[0] != kAnnotationHeader) {
    fail(ErrorKind::ManifestError, path.string() + " line 1: header must be '" + std::string(kAnnotationHeader) + "'");
  }
  struct Event {
    double t;
    bool entrance;
    std::size_t line;
  };
  std::map<std::string, std::vector<Event>> events;
  std::vector<std::string> f;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const std::string where = path.string() + " line " + std::to_string(i + 1) + ": ";
    if (!split_csv_line(lines[i], f) || f.size() != 3) fail(ErrorKind::ManifestError, where + "expected 3 fields");
    double t = 0.0;
    if (!parse_number(f[2], t) || !std::isfinite(t)) fail(ErrorKind::ManifestError, where + "bad timestamp");
    if (f[1] != "entrance" && f[1] != "exit") fail(ErrorKind::ManifestError, where + "event must be entrance or exit");
    events[f[0]].push_back({t, f[1] == "entrance", i + 1});
  }
  std::map<std::string, GroundTruthAnnotation> out;
  for (auto& [stream, list] : events) {
    std::stable_sort(list.begin(), list.end(), [](const Event& a, const Event& b) { return a.t < b.t; });
    auto& gt = out[stream];
    bool expect_entrance = true;
    for (const auto& e : list) {
      if (e.entrance != expect_entrance) {
        fail(ErrorKind::ManifestError, path.string() + " line " + std::to_string(e.line) +
                                           ": entrances and exits must alternate in stream '" + stream + "'");
      }
      (e.entrance ? gt.entrances : gt.exits).push_back(e.t);
      expect_entrance = !expect_entrance;
    }
  }
  return out;
}

inline void write_annotations(const fs::path& path, const std::map<std::string, GroundTruthAnnotation>& all) {
  std::string csv(kAnnotationHeader);
  csv += '\n';
  for (const auto& [stream, gt] : all) {
    std::vector<std::pair<double, bool>> list;
    for (double t : gt.entrances) list.emplace_back(t, true);
    for (double t : gt.exits) list.emplace_back(t, false);
    std::sort(list.begin(), list.end());
    for (const auto& [t, entrance] : list) {
      csv += csv_field(stream) + ',' + (entrance ? "entrance" : "exit") + ',' + format_double(t) + '\n';
    }
  }
  write_text(path, csv);
}

}  // namespace pavetex
