#include "effscreen/calibrate.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "effscreen/datagen.hpp"
#include "effscreen/errors.hpp"
#include "effscreen/parallel.hpp"

namespace effscreen {

using nlohmann::json;

EPowerLevel EPowerLevel::from_label(const std::string& name) {
  if (name == "small") return {Label::small, 0.2};
  if (name == "medium") return {Label::medium, 0.5};
  if (name == "large") return {Label::large, 0.9};
  throw config_error("unknown power level '" + name + "' (expected small|medium|large)");
}

EPowerLevel EPowerLevel::from_target(double target) {
  if (target == 0.2) return {Label::small, 0.2};
  if (target == 0.5) return {Label::medium, 0.5};
  if (target == 0.9) return {Label::large, 0.9};
  throw config_error("power target must be one of 0.2, 0.5, 0.9");
}

const char* EPowerLevel::name() const {
  switch (label) {
    case Label::small: return "small";
    case Label::medium: return "medium";
    case Label::large: return "large";
  }
  return "?";
}

double epower_delta(double target) {
  if (!(target > 0.0 && target < 1.0)) {
    throw config_error("power target must lie in (0,1)");
  }
  const double z = normal_quantile(0.975);
  auto power = [z](double d) {
    return 1.0 - normal_cdf(z - d) + normal_cdf(-z - d);
  };
  double lo = 0.0, hi = 10.0;
  for (int it = 0; it < 80 && hi - lo > 1e-12; ++it) {
    const double mid = 0.5 * (lo + hi);
    (power(mid) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double epower_effect_size(const EPowerLevel& level, double effect_sd) {
  if (!(effect_sd > 0.0)) {
    throw config_error("effect standard deviation must be positive");
  }
  return epower_delta(level.target) * effect_sd;
}

namespace {

// Empirical quantile, "inverted CDF" convention: the smallest order statistic
// whose cumulative share reaches p.
double quantile_sorted(const std::vector<double>& sorted, double p) {
  const double np = p * static_cast<double>(sorted.size());
  long idx = static_cast<long>(std::ceil(np)) - 1;
  idx = std::clamp<long>(idx, 0, static_cast<long>(sorted.size()) - 1);
  return sorted[idx];
}

struct LnNullTable {
  long n_reps = 0;
  int n_steps = 0;
  std::vector<double> p;  // row-major n_reps x n_steps

  double at(long rep, int step) const { return p[rep * n_steps + step]; }
};

// Realized IER of the step-up rule on the null table for given cutoffs.
double stepup_ier(const LnNullTable& tab, const std::vector<double>& cuts, int m) {
  long declared = 0;
  for (long r = 0; r < tab.n_reps; ++r) {
    for (int s = tab.n_steps; s >= 1; --s) {
      if (tab.at(r, s - 1) < cuts[s - 1]) {
        declared += s;
        break;
      }
    }
  }
  return static_cast<double>(declared) / (static_cast<double>(tab.n_reps) * m);
}

std::vector<double> cuts_for_lambda(const std::vector<std::vector<double>>& sorted_cols,
                                    double lambda, double decay) {
  std::vector<double> cuts(sorted_cols.size());
  for (std::size_t s = 0; s < sorted_cols.size(); ++s) {
    const double level = std::min(lambda / std::pow(static_cast<double>(s + 1), decay), 0.999);
    cuts[s] = quantile_sorted(sorted_cols[s], level);
  }
  return cuts;
}

}  // namespace

CalibrationResult calibrate_method(MethodKind method, double target_ier, long n_reps,
                                   const SeedSpec& seed, const CalibrateOptions& options) {
  if (!(target_ier > 0.0 && target_ier < 0.5)) {
    throw config_error("target IER must lie in (0, 0.5)");
  }
  if (n_reps < 500) {
    throw config_error("calibration needs at least 500 replications");
  }
  if (n_reps * 15 * target_ier < 10) {
    throw config_error("too few replications for the requested quantile");
  }
  const FactorialDesign design = build_design(options.k);
  const int m = design.n - 1;
  ScenarioModel null_model;
  null_model.k = options.k;
  null_model.dispersion.base_sigma2 = options.base_sigma2;
  validate_model(null_model);

  MethodConfig cfg;
  cfg.bp91.trim_fraction = options.trim_fraction;
  cfg.bm86.eta = options.eta;
  cfg.bm86.inflation = options.inflation;

  CalibrationResult result;
  result.method = method;
  result.target_ier = target_ier;
  result.n_reps = n_reps;
  result.seed = seed;

  if (method == MethodKind::LN97) {
    const int n_steps = design.n - options.k;
    cfg.ln97.n_permutations = options.n_permutations;
    cfg.ln97.max_steps = n_steps;
    cfg.ln97.critical_values.assign(n_steps, 0.0);  // p-values only; no decisions

    LnNullTable tab;
    tab.n_reps = n_reps;
    tab.n_steps = n_steps;
    tab.p.resize(n_reps * static_cast<long>(n_steps));
    parallel_reps(n_reps, options.workers, [&](long rep) {
      const SeedSpec rep_seed{seed.master_seed, seed.stream_index + static_cast<std::uint64_t>(rep)};
      const std::vector<double> y = generate_response(design, null_model, rep_seed);
      const MethodDecision d = loughin_noble_analyze(y, design, cfg, rep_seed);
      for (int s = 0; s < n_steps; ++s) tab.p[rep * n_steps + s] = d.step_pvalues[s];
    });

    std::vector<std::vector<double>> sorted_cols(n_steps, std::vector<double>(n_reps));
    for (int s = 0; s < n_steps; ++s) {
      for (long r = 0; r < n_reps; ++r) sorted_cols[s][r] = tab.at(r, s);
      std::sort(sorted_cols[s].begin(), sorted_cols[s].end());
    }

    // The cutoff at step s is the null quantile at level lambda / s^decay;
    // bisect the scalar lambda until the step-up rule hits the target IER.
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 50; ++it) {
      const double mid = 0.5 * (lo + hi);
      const double ier = stepup_ier(tab, cuts_for_lambda(sorted_cols, mid, options.level_decay), m);
      (ier < target_ier ? lo : hi) = mid;
    }
    const std::vector<double> cuts_lo = cuts_for_lambda(sorted_cols, lo, options.level_decay);
    const std::vector<double> cuts_hi = cuts_for_lambda(sorted_cols, hi, options.level_decay);
    const double ier_lo = stepup_ier(tab, cuts_lo, m);
    const double ier_hi = stepup_ier(tab, cuts_hi, m);
    const bool pick_lo = std::fabs(ier_lo - target_ier) < std::fabs(ier_hi - target_ier);
    result.values = pick_lo ? cuts_lo : cuts_hi;
    result.achieved_ier = pick_lo ? ier_lo : ier_hi;
    return result;
  }

  // Pooled per-effect statistics; IER is a per-effect rate, so the critical
  // value is the pooled upper-target quantile.
  std::vector<double> pooled(static_cast<std::size_t>(n_reps) * m);
  parallel_reps(n_reps, options.workers, [&](long rep) {
    const SeedSpec rep_seed{seed.master_seed, seed.stream_index + static_cast<std::uint64_t>(rep)};
    const std::vector<double> y = generate_response(design, null_model, rep_seed);
    const EffectEstimates est = estimate_effects(design, y);
    MethodDecision d;
    switch (method) {
      case MethodKind::LEN89: d = lenth_analyze(est, cfg); break;
      case MethodKind::BP91: d = berk_picard_analyze(est, cfg); break;
      case MethodKind::BM86: d = box_meyer_analyze(est, cfg); break;
      case MethodKind::LN97: break;  // handled above
    }
    for (int j = 0; j < m; ++j) pooled[rep * m + j] = d.statistic[j];
  });

  std::vector<double> sorted = pooled;
  std::sort(sorted.begin(), sorted.end());
  const double cut = quantile_sorted(sorted, 1.0 - target_ier);
  long exceed = 0;
  for (double v : pooled) exceed += v > cut ? 1 : 0;
  result.values = {cut};
  result.achieved_ier = static_cast<double>(exceed) / static_cast<double>(pooled.size());
  return result;
}

json calibration_to_json(const std::vector<CalibrationResult>& results,
                         const CalibrateOptions& options) {
  json out;
  out["k"] = options.k;
  for (const CalibrationResult& r : results) {
    json entry;
    entry["target_ier"] = r.target_ier;
    entry["achieved_ier"] = r.achieved_ier;
    entry["n_reps"] = r.n_reps;
    entry["master_seed"] = r.seed.master_seed;
    switch (r.method) {
      case MethodKind::LEN89:
        entry["critical_value"] = r.values.at(0);
        break;
      case MethodKind::BP91:
        entry["critical_value"] = r.values.at(0);
        entry["trim_fraction"] = options.trim_fraction;
        break;
      case MethodKind::BM86:
        entry["threshold"] = r.values.at(0);
        entry["eta"] = options.eta;
        entry["inflation"] = options.inflation;
        break;
      case MethodKind::LN97:
        entry["critical_values"] = r.values;
        entry["n_permutations"] = options.n_permutations;
        entry["level_decay"] = options.level_decay;
        break;
    }
    out[method_name(r.method)] = std::move(entry);
  }
  return out;
}

void apply_calibration(const json& calib, MethodConfig& cfg) {
  if (calib.contains("len89")) {
    cfg.len89.critical_value = calib["len89"].at("critical_value").get<double>();
  }
  if (calib.contains("bp91")) {
    const json& e = calib["bp91"];
    cfg.bp91.critical_value = e.at("critical_value").get<double>();
    if (e.contains("trim_fraction")) cfg.bp91.trim_fraction = e["trim_fraction"].get<double>();
  }
  if (calib.contains("bm86")) {
    const json& e = calib["bm86"];
    cfg.bm86.threshold = e.at("threshold").get<double>();
    if (e.contains("eta")) cfg.bm86.eta = e["eta"].get<double>();
    if (e.contains("inflation")) cfg.bm86.inflation = e["inflation"].get<double>();
  }
  if (calib.contains("ln97")) {
    const json& e = calib["ln97"];
    cfg.ln97.critical_values = e.at("critical_values").get<std::vector<double>>();
    cfg.ln97.max_steps = static_cast<int>(cfg.ln97.critical_values.size());
  }
}

json load_calibration_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open calibration file: " + path);
  json calib;
  try {
    in >> calib;
  } catch (const json::exception& e) {
    throw config_error("bad calibration file " + path + ": " + e.what());
  }
  return calib;
}

}  // namespace effscreen
