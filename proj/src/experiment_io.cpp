#include "effscreen/experiment_io.hpp"

#include <algorithm>
#include <cstdlib>
#include <map>

#include "effscreen/csvutil.hpp"
#include "effscreen/design.hpp"
#include "effscreen/errors.hpp"

namespace effscreen {

namespace {

std::string trimmed(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t");
  std::size_t e = s.find_last_not_of(" \t");
  return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

// Map a level code to -1/+1, or throw naming the offending cell.
int parse_level(const std::string& raw, int row, char factor) {
  const std::string v = trimmed(raw);
  if (v == "-1" || v == "-" || v == "1" || v == "+1" || v == "+" || v == "2") {
    if (v == "-1" || v == "-") return -1;
    if (v == "1") return 0;  // ambiguous alone: +1 in {-1,+1}, low in {1,2}
    return +1;
  }
  throw validation_error("row " + std::to_string(row) + ", factor " + std::string(1, factor) +
                         ": unrecognized level code '" + raw + "'");
}

}  // namespace

Experiment parse_experiment_csv(const std::string& path) {
  const CsvTable table = read_csv(path);

  int y_col = -1;
  std::vector<std::pair<char, int>> factors;  // letter -> column
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    const std::string name = trimmed(table.header[c]);
    if (name == "y") {
      if (y_col >= 0) throw validation_error("duplicate response column 'y'");
      y_col = static_cast<int>(c);
    } else if (name.size() == 1 && name[0] >= 'A' && name[0] <= 'Z') {
      factors.push_back({name[0], static_cast<int>(c)});
    } else {
      throw validation_error("unexpected column '" + name +
                             "' (expected single factor letters and 'y')");
    }
  }
  if (y_col < 0) throw validation_error("missing response column 'y'");
  std::sort(factors.begin(), factors.end());
  const int k = static_cast<int>(factors.size());
  if (k < 2 || k > 8) {
    throw validation_error("expected between 2 and 8 factor columns, found " + std::to_string(k));
  }
  for (int f = 0; f < k; ++f) {
    if (factors[f].first != 'A' + f) {
      throw validation_error(std::string("factor columns must be consecutive letters A..") +
                             static_cast<char>('A' + k - 1) + "; found '" +
                             factors[f].first + "'");
    }
  }
  const int n = 1 << k;
  if (static_cast<int>(table.rows.size()) != n) {
    throw validation_error("a full 2^" + std::to_string(k) + " design needs " + std::to_string(n) +
                           " rows, found " + std::to_string(table.rows.size()));
  }

  // First pass: raw levels, resolving per-column codings. The code "1" means
  // +1 under {-1,+1} but the low level under {1,2}, so decide per column.
  std::vector<std::vector<int>> levels(n, std::vector<int>(k));
  std::vector<bool> col_has_two(k, false), col_has_minus(k, false);
  std::vector<double> y_raw(n);
  for (int r = 0; r < n; ++r) {
    const auto& row = table.rows[r];
    if (static_cast<int>(row.size()) != static_cast<int>(table.header.size())) {
      throw validation_error("row " + std::to_string(r + 2) + " has " +
                             std::to_string(row.size()) + " fields, expected " +
                             std::to_string(table.header.size()));
    }
    for (int f = 0; f < k; ++f) {
      const int lv = parse_level(row[factors[f].second], r + 2, factors[f].first);
      levels[r][f] = lv;
      if (lv == +1 && trimmed(row[factors[f].second]) == "2") col_has_two[f] = true;
      if (lv == -1) col_has_minus[f] = true;
    }
    const std::string ys = trimmed(row[y_col]);
    char* end = nullptr;
    y_raw[r] = std::strtod(ys.c_str(), &end);
    if (ys.empty() || end != ys.c_str() + ys.size()) {
      throw validation_error("row " + std::to_string(r + 2) + ": bad response value '" + ys + "'");
    }
  }
  for (int f = 0; f < k; ++f) {
    if (col_has_two[f] && col_has_minus[f]) {
      throw validation_error(std::string("factor ") + static_cast<char>('A' + f) +
                             " mixes {1,2} and sign codings");
    }
  }

  // Second pass: map rows to run indices and check completeness.
  Experiment exp;
  exp.k = k;
  exp.y.assign(n, 0.0);
  std::vector<int> seen(n, -1);
  std::vector<std::string> problems;
  for (int r = 0; r < n; ++r) {
    int run = 0;
    for (int f = 0; f < k; ++f) {
      int lv = levels[r][f];
      if (lv == 0) lv = col_has_two[f] ? -1 : +1;  // "1": low under {1,2}, else +1
      if (lv > 0) run |= 1 << f;
    }
    if (seen[run] >= 0) {
      problems.push_back("rows " + std::to_string(seen[run] + 2) + " and " + std::to_string(r + 2) +
                         " repeat the same treatment combination");
    }
    seen[run] = r;
    exp.y[run] = y_raw[r];
  }
  if (!problems.empty()) {
    std::string msg = "design is not a complete factorial:";
    for (const std::string& p : problems) msg += " " + p + ";";
    throw validation_error(msg);
  }
  return exp;
}

}  // namespace effscreen
