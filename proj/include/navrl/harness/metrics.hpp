#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

namespace navrl::harness {

// RFC-4180 CSV with a header row. Numeric fields are written in shortest
// round-trip form so identical runs produce byte-identical files.
class MetricsWriter {
 public:
  MetricsWriter(const std::string& path, std::vector<std::string> columns);

  void row(const std::vector<std::string>& fields);  // one per column
  int64_t rows_written() const { return rows_; }
  const std::string& path() const { return path_; }
  void flush();

 private:
  std::string path_;
  std::vector<std::string> columns_;
  std::ofstream out_;
  int64_t rows_ = 0;
};

std::string csv_field(const std::string& raw);  // quotes when required
std::string csv_field(int64_t v);
std::string csv_field(double v);

// Drops one named column from CSV text; used to compare runs modulo
// wall-clock. Throws if the column is absent.
std::string csv_without_column(const std::string& text,
                               const std::string& column);

}  // namespace navrl::harness
