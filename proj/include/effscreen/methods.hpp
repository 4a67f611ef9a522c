#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "effscreen/design.hpp"
#include "effscreen/rng.hpp"

namespace effscreen {

enum class MethodKind { LEN89, BM86, BP91, LN97 };

inline constexpr std::array<MethodKind, 4> kAllMethods = {
    MethodKind::LEN89, MethodKind::BM86, MethodKind::BP91, MethodKind::LN97};

const char* method_name(MethodKind m);
std::optional<MethodKind> method_from_name(const std::string& name);

// Built-in critical values, calibrated for k = 4 to an individual error rate of
// 0.05 (1825 null replications, master seed 20250815; reproducible with the
// `calibrate` subcommand at those settings).
double default_lenth_critical();
double default_berk_picard_critical();
double default_box_meyer_threshold();
std::vector<double> default_loughin_noble_criticals();

struct MethodConfig {
  struct {
    double critical_value = default_lenth_critical();
  } len89;
  struct {
    double trim_fraction = 0.60;
    double critical_value = default_berk_picard_critical();
  } bp91;
  struct {
    double eta = 0.20;        // prior probability that an effect is active
    double inflation = 100.0; // variance inflation of active-effect estimates
    double threshold = default_box_meyer_threshold();
  } bm86;
  struct {
    int n_permutations = 5000;
    int max_steps = 12;  // at most n - k steps are testable
    std::vector<double> critical_values = default_loughin_noble_criticals();
  } ln97;
};

struct MethodDecision {
  MethodKind method = MethodKind::LEN89;
  std::vector<double> statistic;      // per effect, Yates order (index j-1)
  std::vector<std::uint8_t> active;   // per effect, 0/1
  // Method-specific diagnostics:
  double pse = 0.0;                   // LEN89 scale estimate
  double tmse = 0.0;                  // BP91 error estimate
  std::vector<double> step_pvalues;   // LN97 p-value per step
  std::vector<int> step_effect;       // LN97 effect index tested at each step
};

// Lenth: statistic |beta_j| / PSE against a fixed critical value.
MethodDecision lenth_analyze(const EffectEstimates& est, const MethodConfig& cfg);

// Two-sided p-value for a Lenth statistic under the t reference with m/3
// degrees of freedom (an alternative to the simulation-calibrated cutoff).
double lenth_t_pvalue(double statistic, int n_effects);

// Berk-Picard: statistic beta_j^2 / TMSE, TMSE from the smallest trim_fraction
// of squared estimates.
MethodDecision berk_picard_analyze(const EffectEstimates& est, const MethodConfig& cfg);

// Box-Meyer: posterior probability each effect is active under a
// scale-contaminated normal prior, sigma integrated out, exact enumeration of
// all 2^m activity patterns.
MethodDecision box_meyer_analyze(const EffectEstimates& est, const MethodConfig& cfg);

// Loughin-Noble: sequential permutation test on residuals, step-up decision
// against per-step critical values.
MethodDecision loughin_noble_analyze(const std::vector<double>& y, const FactorialDesign& design,
                                     const MethodConfig& cfg, const SeedSpec& seed);

}  // namespace effscreen
