#pragma once

#include <string>
#include <vector>

namespace dbflu {

// Minimal comma-separated table support: a required header row, optional
// double-quoted fields, '#' comment lines ignored.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Column index for name (case-insensitive); -1 if absent.
  int column(const std::string& name) const;
};

CsvTable read_csv(const std::string& path);
std::vector<std::string> split_csv_line(const std::string& line);

// Writes a double with enough digits to round-trip.
std::string format_double(double v);

}  // namespace dbflu
