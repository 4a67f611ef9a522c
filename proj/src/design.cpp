#include "effscreen/design.hpp"

#include <bit>

#include "effscreen/errors.hpp"

namespace effscreen {

namespace {

constexpr int kMinK = 2;
constexpr int kMaxK = 8;

void check_k(int k) {
  if (k < kMinK || k > kMaxK) {
    throw validation_error("number of factors must be between 2 and 8, got " + std::to_string(k));
  }
}

void check_effect(const EffectId& e, int k, const char* what) {
  if (e.index < 0 || e.index >= (1 << k)) {
    throw validation_error(std::string(what) + ": effect index " + std::to_string(e.index) +
                           " out of range for " + std::to_string(k) + " factors");
  }
}

}  // namespace

std::string effect_label(int index, int k) {
  if (index < 0 || index >= (1 << k)) {
    throw validation_error("effect index " + std::to_string(index) + " out of range for " +
                           std::to_string(k) + " factors");
  }
  if (index == 0) return "(I)";
  std::string label;
  for (int f = 0; f < k; ++f) {
    if (index & (1 << f)) label.push_back(static_cast<char>('A' + f));
  }
  return label;
}

int effect_index(const std::string& label, int k) {
  if (label == "(I)") return 0;
  int index = 0;
  char prev = 0;
  for (char c : label) {
    if (c < 'A' || c >= 'A' + k || c <= prev) {
      throw validation_error("bad effect label '" + label + "' for " + std::to_string(k) +
                             " factors");
    }
    index |= 1 << (c - 'A');
    prev = c;
  }
  if (index == 0) throw validation_error("empty effect label");
  return index;
}

FactorialDesign build_design(int k) {
  check_k(k);
  FactorialDesign d;
  d.k = k;
  d.n = 1 << k;
  d.cells.resize(static_cast<std::size_t>(d.n) * d.n);
  for (int run = 0; run < d.n; ++run) {
    for (int eff = 0; eff < d.n; ++eff) {
      // Run `run` sets factor f high iff bit f of run; column `eff` is the
      // product of its factors' levels: (-1)^{#factors of eff that are low}.
      int lows = std::popcount(static_cast<unsigned>(eff & ~run));
      d.cells[static_cast<std::size_t>(run) * d.n + eff] =
          static_cast<std::int8_t>((lows & 1) ? -1 : 1);
    }
  }
  d.effects.reserve(d.n);
  for (int eff = 0; eff < d.n; ++eff) {
    d.effects.push_back({eff, effect_label(eff, k)});
  }
  return d;
}

EffectEstimates estimate_effects(const FactorialDesign& design, const std::vector<double>& y) {
  if (static_cast<int>(y.size()) != design.n) {
    throw validation_error("response length " + std::to_string(y.size()) +
                           " does not match design size " + std::to_string(design.n));
  }
  EffectEstimates est;
  est.design_k = design.k;
  est.values.resize(design.n - 1);
  for (int eff = 0; eff < design.n; ++eff) {
    double acc = 0.0;
    for (int run = 0; run < design.n; ++run) {
      acc += design.at(run, eff) * y[run];
    }
    acc /= design.n;
    if (eff == 0) est.intercept = acc;
    else est.values[eff - 1] = acc;
  }
  return est;
}

EffectId interaction_product(const EffectId& a, const EffectId& b, int k) {
  check_k(k);
  check_effect(a, k, "interaction_product");
  check_effect(b, k, "interaction_product");
  int idx = a.index ^ b.index;
  return {idx, effect_label(idx, k)};
}

std::vector<std::pair<EffectId, EffectId>> interaction_pairs(const EffectId& d, int k) {
  check_k(k);
  check_effect(d, k, "interaction_pairs");
  if (d.index == 0) {
    throw validation_error("interaction_pairs: the intercept has no generating pairs");
  }
  std::vector<std::pair<EffectId, EffectId>> pairs;
  const int n = 1 << k;
  for (int j1 = 1; j1 < n; ++j1) {
    int j2 = j1 ^ d.index;
    if (j2 > j1 && j2 != 0) {
      pairs.push_back({{j1, effect_label(j1, k)}, {j2, effect_label(j2, k)}});
    }
  }
  return pairs;
}

}  // namespace effscreen
