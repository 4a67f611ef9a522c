#pragma once

#include <fstream>
#include <string>
#include <vector>

namespace effscreen {

// Shortest round-trip decimal form of a double (never locale-dependent).
std::string format_double(double v);

// RFC 4180: quote fields containing commas, quotes, or newlines.
std::string csv_escape(const std::string& field);
std::string csv_join(const std::vector<std::string>& fields);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const;  // -1 when absent
};

CsvTable read_csv(const std::string& path);

class CsvWriter {
 public:
  explicit CsvWriter(const std::string& path);
  void write_row(const std::vector<std::string>& fields);
  bool good() const { return static_cast<bool>(out_); }

 private:
  std::ofstream out_;
};

}  // namespace effscreen
