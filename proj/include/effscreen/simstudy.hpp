#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "effscreen/calibrate.hpp"
#include "effscreen/methods.hpp"

namespace effscreen {

struct SignedEffect {
  int index = 0;
  int sign = +1;
};

// One simulation cell: a (location set, dispersion set) pair, the common
// dispersion ratio applied to every dispersion effect, and the power level
// that sizes the location effects.
struct Scenario {
  std::vector<SignedEffect> location;
  std::vector<int> dispersion;
  double delta = 1.0;
  EPowerLevel epower = EPowerLevel::from_target(0.5);
  int k = 4;

  std::string family_id() const;    // identifies the (location, dispersion) pair
  std::string instance_id() const;  // family plus delta and power level
};

struct MetricsRecord {
  MethodKind method = MethodKind::LEN89;
  std::string scenario_family;
  double delta = 1.0;
  std::optional<double> epower_target;  // absent for null-location scenarios
  int k = 4;
  long n_reps = 0;
  std::vector<double> rr;  // per-effect rejection rate, Yates order
  double ier = 0.0;
  double eer = 0.0;
  std::optional<double> ap;  // absent when no location effects
  std::optional<double> jp;  // present only with >= 2 location effects
  // Share of replications declaring 0,1,...,6 and >=7 inactive effects active.
  std::array<double, 8> false_rejections{};
};

// The canonical study grid: every (location, dispersion) family crossed with
// the dispersion-ratio grid and the three power levels, plus null-location
// rows (crossed with the ratio grid only).
extern const std::array<double, 7> kDeltaGrid;
std::vector<Scenario> table1_scenarios();

// Scenario file: {"scenarios": [{"k":4, "location": ["+B","-AB"],
// "dispersion": ["A"], "deltas": [...], "epower": ["medium", ...]}, ...]}.
std::vector<Scenario> parse_scenarios_json(const nlohmann::json& doc);

MetricsRecord compute_metrics(const std::vector<MethodDecision>& decisions,
                              const Scenario& truth);

// Run one scenario: per replication a single dataset is generated and every
// requested method analyzes it (paired comparison). Deterministic for a fixed
// seed and any worker count.
std::vector<MetricsRecord> run_scenario(const Scenario& scenario,
                                        const std::vector<MethodKind>& methods,
                                        const MethodConfig& cfg, long n_reps,
                                        const SeedSpec& seed, int workers = 1);

}  // namespace effscreen
