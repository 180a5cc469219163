#include "mollescore/csv.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

namespace mollescore {

std::string fmt_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return std::string(buf);
}

CsvWriter::CsvWriter(const std::filesystem::path& path) : path_(path) {
  f_ = std::fopen(path.string().c_str(), "wb");
  if (!f_) throw io_error("cannot open for writing: " + path.string());
}

CsvWriter::~CsvWriter() { close(); }

void CsvWriter::close() {
  if (f_) {
    std::fclose(f_);
    f_ = nullptr;
  }
}

void CsvWriter::header(const std::vector<std::string>& names) {
  std::string line;
  for (size_t i = 0; i < names.size(); ++i) {
    if (i) line += ',';
    line += names[i];
  }
  raw_row(line);
}

void CsvWriter::row(const std::vector<double>& values) {
  std::string line;
  for (size_t i = 0; i < values.size(); ++i) {
    if (i) line += ',';
    line += fmt_g17(values[i]);
  }
  raw_row(line);
}

void CsvWriter::raw_row(const std::string& line) {
  if (!f_) throw io_error("write on closed csv: " + path_.string());
  std::fputs(line.c_str(), f_);
  std::fputc('\n', f_);
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open: " + path.string());
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw parse_error("empty csv: " + path.string());
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) table.header.push_back(cell);
  }
  size_t row_idx = 0;
  while (std::getline(in, line)) {
    ++row_idx;
    if (line.empty()) continue;
    std::vector<double> row;
    row.reserve(table.header.size());
    const char* p = line.c_str();
    const char* end = p + line.size();
    while (p < end) {
      char* after = nullptr;
      double v = std::strtod(p, &after);
      if (after == p)
        throw parse_error("malformed value in " + path.string() + " at row " +
                          std::to_string(row_idx));
      row.push_back(v);
      p = after;
      if (p < end) {
        if (*p != ',')
          throw parse_error("malformed row " + std::to_string(row_idx) +
                            " in " + path.string());
        ++p;
      }
    }
    if (row.size() != table.header.size())
      throw parse_error("row " + std::to_string(row_idx) + " in " +
                        path.string() + " has " + std::to_string(row.size()) +
                        " fields, expected " +
                        std::to_string(table.header.size()));
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace mollescore
