#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "effscreen/methods.hpp"
#include "effscreen/rng.hpp"

namespace effscreen {

// Effect sizing convention: "small"/"medium"/"large" effects are the magnitudes
// at which a sigma-known two-sided Z test (alpha = 0.05) has power 0.2/0.5/0.9.
struct EPowerLevel {
  enum class Label { small, medium, large };
  Label label = Label::medium;
  double target = 0.5;

  static EPowerLevel from_label(const std::string& name);
  static EPowerLevel from_target(double target);
  const char* name() const;
};

// Solve for delta with 1 - Phi(z_.975 - delta) + Phi(-z_.975 - delta) = target.
double epower_delta(double target);

// The effect magnitude |beta| = delta * effect_sd achieving the level's power,
// where effect_sd is the (dispersion-adjusted) standard deviation of the
// estimate the Z test would use.
double epower_effect_size(const EPowerLevel& level, double effect_sd);

struct CalibrationResult {
  MethodKind method = MethodKind::LEN89;
  double target_ier = 0.05;
  double achieved_ier = 0.0;
  std::vector<double> values;  // one critical value, or one per step for LN97
  long n_reps = 0;
  SeedSpec seed;
};

struct CalibrateOptions {
  int k = 4;
  int n_permutations = 1000;  // permutations per step when calibrating LN97
  double base_sigma2 = 1.0;   // null variance; every statistic is scale-free
  double trim_fraction = 0.60;
  double eta = 0.20;
  double inflation = 100.0;
  // LN97 per-step quantile levels decay as lambda / s^level_decay; the scalar
  // lambda is searched so the step-up procedure attains the target IER.
  double level_decay = 1.3;
  int workers = 1;
};

// Simulate the homoscedastic null (beta = 0, all ratios 1, sigma^2 = 1) and
// pick the critical value / threshold / per-step cutoffs giving the target
// individual error rate.
CalibrationResult calibrate_method(MethodKind method, double target_ier, long n_reps,
                                   const SeedSpec& seed, const CalibrateOptions& options = {});

// JSON calibration file shared by the calibrate/simulate/analyze subcommands.
nlohmann::json calibration_to_json(const std::vector<CalibrationResult>& results,
                                   const CalibrateOptions& options);
void apply_calibration(const nlohmann::json& calib, MethodConfig& cfg);
nlohmann::json load_calibration_file(const std::string& path);

}  // namespace effscreen
