#include "effscreen/simstudy.hpp"

#include <algorithm>
#include <cmath>

#include "effscreen/datagen.hpp"
#include "effscreen/dispersion.hpp"
#include "effscreen/errors.hpp"
#include "effscreen/parallel.hpp"

namespace effscreen {

using nlohmann::json;

const std::array<double, 7> kDeltaGrid = {1, 4, 9, 25, 100, 400, 2500};

namespace {

std::string format_delta(double delta) {
  if (delta == std::floor(delta) && std::fabs(delta) < 1e15) {
    return std::to_string(static_cast<long long>(delta));
  }
  std::string s = std::to_string(delta);
  while (!s.empty() && s.back() == '0') s.pop_back();
  if (!s.empty() && s.back() == '.') s.pop_back();
  return s;
}

const char* epower_suffix(const EPowerLevel& e) {
  switch (e.label) {
    case EPowerLevel::Label::small: return "e20";
    case EPowerLevel::Label::medium: return "e50";
    case EPowerLevel::Label::large: return "e90";
  }
  return "e";
}

}  // namespace

std::string Scenario::family_id() const {
  std::string id = "D";
  for (int d : dispersion) id += "-" + effect_label(d, k);
  id += "_L";
  if (location.empty()) {
    id += "-none";
  } else {
    for (const SignedEffect& e : location) {
      id += std::string("-") + (e.sign >= 0 ? "p" : "m") + effect_label(e.index, k);
    }
  }
  return id;
}

std::string Scenario::instance_id() const {
  std::string id = family_id() + "_d" + format_delta(delta);
  if (!location.empty()) id += std::string("_") + epower_suffix(epower);
  return id;
}

std::vector<Scenario> table1_scenarios() {
  // Effect indices for k = 4: A=1, B=2, AB=3, C=4.
  struct Family {
    std::vector<int> dispersion;
    std::vector<int> location;
  };
  const std::vector<Family> families = {
      {{1}, {1}},     // dispersion A, location A
      {{1}, {2}},     // dispersion A, location B
      {{1}, {2, 4}},  // dispersion A, location B and C
      {{1}, {1, 2}},  // dispersion A, location A and B
      {{1}, {2, 3}},  // dispersion A, location B and its interaction with A
      {{1, 2}, {1}},  // dispersion A,B, location A
      {{1, 2}, {4}},  // dispersion A,B, location C
      {{1, 2}, {3}},  // dispersion A,B, location AB
  };
  const std::array<EPowerLevel, 3> levels = {
      EPowerLevel::from_target(0.2), EPowerLevel::from_target(0.5),
      EPowerLevel::from_target(0.9)};

  std::vector<Scenario> out;
  for (const Family& f : families) {
    for (double delta : kDeltaGrid) {
      for (const EPowerLevel& level : levels) {
        Scenario s;
        s.dispersion = f.dispersion;
        for (int e : f.location) s.location.push_back({e, +1});
        s.delta = delta;
        s.epower = level;
        out.push_back(std::move(s));
      }
    }
  }
  for (const std::vector<int>& disp : {std::vector<int>{1}, std::vector<int>{1, 2}}) {
    for (double delta : kDeltaGrid) {
      Scenario s;
      s.dispersion = disp;
      s.delta = delta;
      out.push_back(std::move(s));
    }
  }
  return out;
}

std::vector<Scenario> parse_scenarios_json(const json& doc) {
  if (!doc.contains("scenarios") || !doc["scenarios"].is_array()) {
    throw config_error("scenario file must contain a \"scenarios\" array");
  }
  std::vector<Scenario> out;
  for (const json& entry : doc["scenarios"]) {
    const int k = entry.value("k", 4);
    std::vector<SignedEffect> location;
    for (const json& eff : entry.value("location", json::array())) {
      std::string s = eff.get<std::string>();
      int sign = +1;
      if (!s.empty() && (s[0] == '+' || s[0] == '-')) {
        sign = s[0] == '-' ? -1 : +1;
        s.erase(0, 1);
      }
      location.push_back({effect_index(s, k), sign});
    }
    std::vector<int> dispersion;
    for (const json& eff : entry.value("dispersion", json::array())) {
      dispersion.push_back(effect_index(eff.get<std::string>(), k));
    }
    std::vector<double> deltas;
    if (entry.contains("deltas")) {
      deltas = entry["deltas"].get<std::vector<double>>();
    } else if (entry.contains("delta")) {
      deltas = {entry["delta"].get<double>()};
    } else {
      deltas = {1.0};
    }
    std::vector<EPowerLevel> levels;
    if (entry.contains("epower")) {
      const json& ep = entry["epower"];
      for (const json& v : ep.is_array() ? ep : json::array({ep})) {
        levels.push_back(v.is_string() ? EPowerLevel::from_label(v.get<std::string>())
                                       : EPowerLevel::from_target(v.get<double>()));
      }
    } else {
      levels = {EPowerLevel::from_target(0.5)};
    }
    for (double delta : deltas) {
      for (const EPowerLevel& level : levels) {
        Scenario s;
        s.k = k;
        s.location = location;
        s.dispersion = dispersion;
        s.delta = delta;
        s.epower = level;
        out.push_back(std::move(s));
      }
    }
  }
  return out;
}

MetricsRecord compute_metrics(const std::vector<MethodDecision>& decisions,
                              const Scenario& truth) {
  if (decisions.empty()) {
    throw validation_error("compute_metrics: empty decision list");
  }
  const int m = (1 << truth.k) - 1;
  const long n_reps = static_cast<long>(decisions.size());
  std::vector<bool> is_active(m, false);
  for (const SignedEffect& e : truth.location) is_active[e.index - 1] = true;
  const long n_active = static_cast<long>(truth.location.size());
  const long n_inactive = m - n_active;

  std::vector<long> declared(m, 0);
  std::array<long, 8> fr_hist{};
  long any_false = 0, all_true = 0;
  for (const MethodDecision& d : decisions) {
    if (static_cast<int>(d.active.size()) != m || d.method != decisions.front().method) {
      throw validation_error("compute_metrics: decisions disagree on method or size");
    }
    int false_count = 0;
    bool joint = true;
    for (int j = 0; j < m; ++j) {
      if (d.active[j]) {
        ++declared[j];
        if (!is_active[j]) ++false_count;
      } else if (is_active[j]) {
        joint = false;
      }
    }
    ++fr_hist[std::min(false_count, 7)];
    if (false_count > 0) ++any_false;
    if (joint) ++all_true;
  }

  MetricsRecord rec;
  rec.method = decisions.front().method;
  rec.scenario_family = truth.family_id();
  rec.delta = truth.delta;
  if (!truth.location.empty()) rec.epower_target = truth.epower.target;
  rec.k = truth.k;
  rec.n_reps = n_reps;
  rec.rr.resize(m);
  double ier_sum = 0.0, ap_sum = 0.0;
  for (int j = 0; j < m; ++j) {
    rec.rr[j] = static_cast<double>(declared[j]) / n_reps;
    (is_active[j] ? ap_sum : ier_sum) += rec.rr[j];
  }
  rec.ier = n_inactive > 0 ? ier_sum / n_inactive : 0.0;
  rec.eer = static_cast<double>(any_false) / n_reps;
  if (n_active > 0) rec.ap = ap_sum / n_active;
  if (n_active >= 2) rec.jp = static_cast<double>(all_true) / n_reps;
  for (int b = 0; b < 8; ++b) {
    rec.false_rejections[b] = static_cast<double>(fr_hist[b]) / n_reps;
  }
  return rec;
}

std::vector<MetricsRecord> run_scenario(const Scenario& scenario,
                                        const std::vector<MethodKind>& methods,
                                        const MethodConfig& cfg, long n_reps,
                                        const SeedSpec& seed, int workers) {
  if (n_reps < 1) throw config_error("n_reps must be at least 1");
  if (methods.empty()) throw config_error("no methods requested");
  const FactorialDesign design = build_design(scenario.k);

  ScenarioModel model;
  model.k = scenario.k;
  for (int d : scenario.dispersion) model.dispersion.deltas[d] = scenario.delta;
  if (!scenario.location.empty()) {
    // Size the location effects to the scenario's power level using the
    // dispersion-adjusted standard deviation of an effect estimate.
    const std::vector<double> cov = effect_covariance(design, model.dispersion);
    const double sd = std::sqrt(cov[0]);
    const double magnitude = epower_effect_size(scenario.epower, sd);
    for (const SignedEffect& e : scenario.location) {
      model.location.betas[e.index] = e.sign * magnitude;
    }
  }
  validate_model(model);

  std::vector<std::vector<MethodDecision>> decisions(methods.size());
  for (auto& v : decisions) v.resize(n_reps);
  parallel_reps(n_reps, workers, [&](long rep) {
    const SeedSpec rep_seed{seed.master_seed, seed.stream_index + static_cast<std::uint64_t>(rep)};
    const std::vector<double> y = generate_response(design, model, rep_seed);
    const EffectEstimates est = estimate_effects(design, y);
    for (std::size_t mi = 0; mi < methods.size(); ++mi) {
      switch (methods[mi]) {
        case MethodKind::LEN89: decisions[mi][rep] = lenth_analyze(est, cfg); break;
        case MethodKind::BP91: decisions[mi][rep] = berk_picard_analyze(est, cfg); break;
        case MethodKind::BM86: decisions[mi][rep] = box_meyer_analyze(est, cfg); break;
        case MethodKind::LN97:
          decisions[mi][rep] = loughin_noble_analyze(y, design, cfg, rep_seed);
          break;
      }
    }
  });

  std::vector<MetricsRecord> records;
  records.reserve(methods.size());
  for (std::size_t mi = 0; mi < methods.size(); ++mi) {
    records.push_back(compute_metrics(decisions[mi], scenario));
  }
  return records;
}

}  // namespace effscreen
