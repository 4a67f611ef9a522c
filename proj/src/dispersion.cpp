#include "effscreen/dispersion.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "effscreen/errors.hpp"

namespace effscreen {

namespace {

// The dispersion-carrying effect indices, in ascending order.
std::vector<int> dispersion_columns(const DispersionSpec& disp) {
  std::vector<int> cols;
  for (const auto& [idx, delta] : disp.deltas) {
    if (delta != 1.0) cols.push_back(idx);
  }
  return cols;
}

// Correlation contributed by a single dispersion column (Hadamard algebra gives
// +g on pairs whose product is that column): g = (s - 1/s)/(s + 1/s), s = sqrt(delta).
double pair_corr(double delta) {
  double s = std::sqrt(delta);
  return (s - 1.0 / s) / (s + 1.0 / s);
}

}  // namespace

void validate_model(const ScenarioModel& model) {
  const int n = 1 << model.k;
  if (model.k < 2 || model.k > 8) {
    throw validation_error("model k must be between 2 and 8");
  }
  for (const auto& [idx, beta] : model.location.betas) {
    (void)beta;
    if (idx <= 0 || idx >= n) {
      throw validation_error("location effect index " + std::to_string(idx) +
                             " invalid for k=" + std::to_string(model.k));
    }
  }
  for (const auto& [idx, delta] : model.dispersion.deltas) {
    if (idx <= 0 || idx >= n) {
      throw validation_error("dispersion effect index " + std::to_string(idx) +
                             " invalid for k=" + std::to_string(model.k) +
                             (idx == 0 ? " (the intercept cannot carry a dispersion ratio)" : ""));
    }
    if (!(delta > 0.0)) {
      throw validation_error("dispersion ratio for effect " + effect_label(idx, model.k) +
                             " must be positive");
    }
  }
  if (!(model.dispersion.base_sigma2 > 0.0)) {
    throw validation_error("base variance must be positive");
  }
}

std::vector<double> variance_vector(const FactorialDesign& design, const DispersionSpec& disp) {
  std::vector<double> var(design.n, disp.base_sigma2);
  for (const auto& [idx, delta] : disp.deltas) {
    if (idx <= 0 || idx >= design.n) {
      throw validation_error("dispersion effect index " + std::to_string(idx) +
                             " invalid for this design");
    }
    if (!(delta > 0.0)) {
      throw validation_error("dispersion ratios must be positive");
    }
    if (delta == 1.0) continue;
    const double up = std::sqrt(delta);
    for (int run = 0; run < design.n; ++run) {
      var[run] *= (design.at(run, idx) > 0) ? up : 1.0 / up;
    }
  }
  return var;
}

std::vector<double> effect_covariance(const FactorialDesign& design, const DispersionSpec& disp) {
  const std::vector<double> var = variance_vector(design, disp);
  const int m = design.n - 1;
  const double scale = 1.0 / (static_cast<double>(design.n) * design.n);  // 1/2^{2k}
  std::vector<double> cov(static_cast<std::size_t>(m) * m);
  for (int a = 1; a < design.n; ++a) {
    for (int b = a; b < design.n; ++b) {
      double acc = 0.0;
      for (int run = 0; run < design.n; ++run) {
        acc += design.at(run, a) * design.at(run, b) * var[run];
      }
      acc *= scale;
      cov[static_cast<std::size_t>(a - 1) * m + (b - 1)] = acc;
      cov[static_cast<std::size_t>(b - 1) * m + (a - 1)] = acc;
    }
  }
  return cov;
}

double theoretical_correlation(const EffectId& j1, const EffectId& j2,
                               const DispersionSpec& disp, int k) {
  const int n = 1 << k;
  if (j1.index == j2.index || j1.index <= 0 || j2.index <= 0 || j1.index >= n ||
      j2.index >= n) {
    throw validation_error("theoretical_correlation needs two distinct non-intercept effects");
  }
  const std::vector<int> cols = dispersion_columns(disp);
  if (cols.size() > 2) {
    throw unsupported_error(
        "closed-form correlations cover at most two dispersion effects; "
        "use effect_covariance and normalize");
  }
  const int prod = j1.index ^ j2.index;
  if (cols.empty()) return 0.0;
  if (cols.size() == 1) {
    return prod == cols[0] ? pair_corr(disp.delta(cols[0])) : 0.0;
  }
  const double g1 = pair_corr(disp.delta(cols[0]));
  const double g2 = pair_corr(disp.delta(cols[1]));
  if (prod == cols[0]) return g1;
  if (prod == cols[1]) return g2;
  if (prod == (cols[0] ^ cols[1])) return g1 * g2;
  return 0.0;
}

double induced_delta(double delta_a, double delta_b) {
  if (!(delta_a > 0.0) || !(delta_b > 0.0)) {
    throw validation_error("induced_delta: ratios must be positive");
  }
  return (1.0 + delta_a * delta_b) / (delta_a + delta_b);
}

std::vector<std::vector<EffectId>> correlation_quadruples(const DispersionSpec& disp, int k) {
  const std::vector<int> cols = dispersion_columns(disp);
  if (cols.size() != 2) {
    throw unsupported_error("correlation quadruples require exactly two dispersion effects");
  }
  const int n = 1 << k;
  const int d1 = cols[0], d2 = cols[1];
  std::vector<std::vector<EffectId>> groups;
  std::vector<bool> seen(n, false);
  for (int idx = 0; idx < n; ++idx) {
    if (seen[idx]) continue;
    std::vector<int> coset = {idx, idx ^ d1, idx ^ d2, idx ^ d1 ^ d2};
    std::sort(coset.begin(), coset.end());
    std::vector<EffectId> group;
    for (int e : coset) {
      seen[e] = true;
      group.push_back({e, effect_label(e, k)});
    }
    groups.push_back(std::move(group));
  }
  return groups;
}

nlohmann::json model_to_json(const ScenarioModel& model) {
  validate_model(model);
  nlohmann::json loc = nlohmann::json::object();
  if (model.location.intercept != 0.0) loc["(I)"] = model.location.intercept;
  for (const auto& [idx, beta] : model.location.betas) {
    loc[effect_label(idx, model.k)] = beta;
  }
  nlohmann::json disp = nlohmann::json::object();
  for (const auto& [idx, delta] : model.dispersion.deltas) {
    disp[effect_label(idx, model.k)] = delta;
  }
  return nlohmann::json{{"k", model.k},
                        {"location", loc},
                        {"dispersion", disp},
                        {"sigma2", model.dispersion.base_sigma2}};
}

ScenarioModel model_from_json(const nlohmann::json& doc) {
  ScenarioModel model;
  if (!doc.contains("k")) throw validation_error("model JSON lacks \"k\"");
  model.k = doc["k"].get<int>();
  if (model.k < 2 || model.k > 8) {
    throw validation_error("model JSON: k must lie in [2, 8]");
  }
  if (doc.contains("location")) {
    for (const auto& [label, val] : doc["location"].items()) {
      if (label == "(I)") {
        model.location.intercept = val.get<double>();
      } else {
        model.location.betas[effect_index(label, model.k)] = val.get<double>();
      }
    }
  }
  if (doc.contains("dispersion")) {
    for (const auto& [label, val] : doc["dispersion"].items()) {
      model.dispersion.deltas[effect_index(label, model.k)] = val.get<double>();
    }
  }
  if (doc.contains("sigma2")) {
    model.dispersion.base_sigma2 = doc["sigma2"].get<double>();
  }
  validate_model(model);
  return model;
}

}  // namespace effscreen
