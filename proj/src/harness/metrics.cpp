#include "navrl/harness/metrics.hpp"

#include <charconv>
#include <sstream>

#include "navrl/common.hpp"
#include "navrl/harness/run_config.hpp"

namespace navrl::harness {

MetricsWriter::MetricsWriter(const std::string& path,
                             std::vector<std::string> columns)
    : path_(path), columns_(std::move(columns)) {
  check(!columns_.empty(), "metrics: need at least one column");
  out_.open(path, std::ios::binary | std::ios::trunc);
  if (!out_) fail("metrics: cannot open " + path);
  for (size_t i = 0; i < columns_.size(); ++i) {
    if (i) out_ << ',';
    out_ << csv_field(columns_[i]);
  }
  out_ << "\r\n";
}

void MetricsWriter::row(const std::vector<std::string>& fields) {
  check(fields.size() == columns_.size(),
        "metrics: row width does not match header of " + path_);
  for (size_t i = 0; i < fields.size(); ++i) {
    if (i) out_ << ',';
    out_ << csv_field(fields[i]);
  }
  out_ << "\r\n";
  ++rows_;
  if (!out_) fail("metrics: write failed for " + path_);
}

void MetricsWriter::flush() { out_.flush(); }

std::string csv_field(const std::string& raw) {
  if (raw.find_first_of(",\"\r\n") == std::string::npos) return raw;
  std::string quoted = "\"";
  for (char c : raw) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  quoted += '"';
  return quoted;
}

std::string csv_field(int64_t v) {
  char buf[24];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  check(ec == std::errc(), "csv_field: int conversion failed");
  return std::string(buf, p);
}

std::string csv_field(double v) { return format_double(v); }

std::string csv_without_column(const std::string& text,
                               const std::string& column) {
  std::istringstream is(text);
  std::ostringstream os;
  std::string line;
  int drop = -1;
  bool first = true;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() && is.eof()) break;
    // Fields here are never quoted-with-commas; a plain split suffices.
    std::vector<std::string> fields;
    size_t start = 0;
    while (true) {
      size_t comma = line.find(',', start);
      fields.push_back(line.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (first) {
      for (size_t i = 0; i < fields.size(); ++i)
        if (fields[i] == column) drop = static_cast<int>(i);
      if (drop < 0) fail("csv_without_column: no column named " + column);
      first = false;
    }
    bool wrote = false;
    for (size_t i = 0; i < fields.size(); ++i) {
      if (static_cast<int>(i) == drop) continue;
      if (wrote) os << ',';
      os << fields[i];
      wrote = true;
    }
    os << "\r\n";
  }
  return os.str();
}

}  // namespace navrl::harness
