#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "mollescore/common.hpp"

namespace mollescore {

// %.17g formatting: shortest text that round-trips IEEE doubles.
std::string fmt_g17(double v);

class CsvWriter {
 public:
  explicit CsvWriter(const std::filesystem::path& path);
  ~CsvWriter();
  void header(const std::vector<std::string>& names);
  void row(const std::vector<double>& values);
  void raw_row(const std::string& line);
  void close();

 private:
  std::FILE* f_ = nullptr;
  std::filesystem::path path_;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

// Parses a numeric CSV; malformed cells raise parse_error naming the
// 1-based data row.
CsvTable read_csv(const std::filesystem::path& path);

}  // namespace mollescore
