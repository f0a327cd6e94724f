#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace realism {

// Minimal CSV support for the trip/report formats used here: comma
// separated, one header row, optional leading '#' comment lines, optional
// double-quoted fields. No embedded newlines.

struct CsvTable {
  std::vector<std::string> header;                  // lower-cased
  std::vector<std::vector<std::string>> rows;
  std::unordered_map<std::string, int> columns;     // lower-cased name -> index

  // Column index by case-insensitive name; -1 if absent.
  int column(const std::string& name) const;
};

std::vector<std::string> split_csv_line(const std::string& line);

CsvTable read_csv(std::istream& in);
CsvTable read_csv_file(const std::string& path);

std::string trim(const std::string& s);
std::string to_lower(std::string s);

// Fixed formatting so emitted reports are byte-stable across runs.
std::string fmt_double(double v);

class CsvWriter {
 public:
  // Opens `path` and writes the provenance comment plus header.
  CsvWriter(const std::string& path, std::uint64_t config_hash,
            const std::vector<std::string>& header);
  ~CsvWriter();

  void row(const std::vector<std::string>& cells);

 private:
  struct Impl;
  Impl* impl_;
};

}  // namespace realism
