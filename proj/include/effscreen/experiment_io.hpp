#pragma once

#include <string>
#include <vector>

namespace effscreen {

// A parsed experiment file: responses reordered into standard run order
// (run i sets factor f high iff bit f of i is set).
struct Experiment {
  int k = 0;
  std::vector<double> y;
};

// CSV with one column per factor (single letters A, B, ...), one `y` column,
// rows in any order forming a complete 2^k design. Level codes per column may
// be {-1,+1}, {-,+} or {1,2}.
Experiment parse_experiment_csv(const std::string& path);

}  // namespace effscreen
