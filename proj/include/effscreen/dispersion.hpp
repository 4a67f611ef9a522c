#pragma once

#include <map>
#include <vector>

#include <json.hpp>

#include "effscreen/design.hpp"

namespace effscreen {

// Multiplicative dispersion model: run i has variance
//   sigma_i^2 = sigma^2 * prod_j delta_j^(x_ij / 2),
// so delta_j is the ratio of variances between the + and - levels of column j.
struct DispersionSpec {
  std::map<int, double> deltas;  // effect index -> delta (absent means 1)
  double base_sigma2 = 1.0;

  double delta(int effect_index) const {
    auto it = deltas.find(effect_index);
    return it == deltas.end() ? 1.0 : it->second;
  }
};

struct LocationSpec {
  std::map<int, double> betas;  // effect index -> beta (absent means 0)
  double intercept = 0.0;

  double beta(int effect_index) const {
    auto it = betas.find(effect_index);
    return it == betas.end() ? 0.0 : it->second;
  }
};

struct ScenarioModel {
  LocationSpec location;
  DispersionSpec dispersion;
  int k = 4;
};

void validate_model(const ScenarioModel& model);

// Per-run variances sigma_i^2 under the multiplicative model.
std::vector<double> variance_vector(const FactorialDesign& design, const DispersionSpec& disp);

// Covariance matrix of (beta_1 .. beta_{n-1}): X' Sigma X / 2^{2k}, row-major.
std::vector<double> effect_covariance(const FactorialDesign& design, const DispersionSpec& disp);

// Closed-form correlation between two estimates when at most two columns carry
// dispersion: nonzero only when j1 o j2 hits a dispersion column or the product
// of the two dispersion columns.
double theoretical_correlation(const EffectId& j1, const EffectId& j2,
                               const DispersionSpec& disp, int k);

// Variance ratio induced on the interaction column by two dispersion effects.
double induced_delta(double delta_a, double delta_b);

// With exactly two dispersion columns d1, d2: partition all 2^k columns into
// cosets of {0, d1, d2, d1^d2}; estimates are correlated only within a coset.
std::vector<std::vector<EffectId>> correlation_quadruples(const DispersionSpec& disp, int k);

// JSON form: {"k": 4, "location": {"A": 1.2, ...}, "dispersion": {"A": 9.0, ...},
// "sigma2": 1.0} with canonical effect labels as keys ("(I)" carries the
// location intercept when present).
nlohmann::json model_to_json(const ScenarioModel& model);
ScenarioModel model_from_json(const nlohmann::json& doc);

}  // namespace effscreen
