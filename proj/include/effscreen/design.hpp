#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace effscreen {

// One factorial effect column. The index doubles as a bitmask over factors:
// bit f is set when factor f participates, so index 0 is the intercept, 1 = A,
// 2 = B, 3 = AB, 4 = C, ... (standard Yates order when enumerated 0..n-1).
struct EffectId {
  int index = 0;
  std::string label;  // "(I)", "A", "BC", "ABCD", ...

  friend bool operator==(const EffectId& a, const EffectId& b) {
    return a.index == b.index;
  }
};

std::string effect_label(int index, int k);
int effect_index(const std::string& label, int k);

// Full 2^k design: an n x n matrix of +/-1 whose columns are the intercept and
// all n-1 factorial effect contrasts. Stored as int8 so orthogonality checks
// are exact integer arithmetic.
struct FactorialDesign {
  int k = 0;
  int n = 0;
  std::vector<std::int8_t> cells;  // row-major n*n
  std::vector<EffectId> effects;   // size n, Yates order

  int at(int run, int effect) const { return cells[static_cast<std::size_t>(run) * n + effect]; }
};

struct EffectEstimates {
  int design_k = 0;
  double intercept = 0.0;
  std::vector<double> values;  // beta_1 .. beta_{n-1}, Yates order
};

FactorialDesign build_design(int k);

// OLS on the saturated model: beta_j = x_j'y / n (exact by orthogonality).
EffectEstimates estimate_effects(const FactorialDesign& design, const std::vector<double>& y);

// Elementwise product of two effect columns = symmetric difference of letter sets.
EffectId interaction_product(const EffectId& a, const EffectId& b, int k);

// All unordered pairs {j1, j2} of non-intercept effects with j1 o j2 = d.
std::vector<std::pair<EffectId, EffectId>> interaction_pairs(const EffectId& d, int k);

}  // namespace effscreen
