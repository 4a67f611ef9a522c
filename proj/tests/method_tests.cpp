#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "effscreen/calibrate.hpp"
#include "effscreen/csvutil.hpp"
#include "effscreen/datagen.hpp"
#include "effscreen/design.hpp"
#include "effscreen/errors.hpp"
#include "effscreen/methods.hpp"
#include "effscreen/rng.hpp"
#include "testutil.hpp"

using namespace effscreen;

namespace {

EffectEstimates make_est(std::vector<double> values) {
  EffectEstimates est;
  est.design_k = 0;
  while ((1u << est.design_k) < values.size() + 1) ++est.design_k;
  est.values = std::move(values);
  return est;
}

std::vector<double> random_estimates(int m, std::uint64_t seed, double scale = 1.0,
                                     int n_large = 0, double large = 5.0) {
  CounterRng rng = CounterRng::from(SeedSpec{seed, 0}, kDomainResponse);
  std::vector<double> v(m);
  for (int j = 0; j < m; ++j) v[j] = scale * rng.next_normal();
  for (int j = 0; j < n_large && j < m; ++j) v[j] += large;
  return v;
}

// Independent Box-Meyer check: direct pattern summation in plain arithmetic
// (no log-space, no incremental updates), feasible for m <= 10.
std::vector<double> bm_brute_force(const std::vector<double>& b, double eta, double c) {
  const int m = static_cast<int>(b.size());
  std::vector<long double> num(m, 0.0L);
  long double denom = 0.0L;
  for (int pattern = 0; pattern < (1 << m); ++pattern) {
    long double q = 0.0L;
    int n_active = 0;
    for (int j = 0; j < m; ++j) {
      const bool act = pattern >> j & 1;
      n_active += act;
      q += static_cast<long double>(b[j]) * b[j] / (act ? c : 1.0L);
    }
    const long double w = std::pow(static_cast<long double>(eta), n_active) *
                          std::pow(1.0L - static_cast<long double>(eta), m - n_active) *
                          std::pow(static_cast<long double>(c), -0.5L * n_active) *
                          std::pow(q, -0.5L * m);
    denom += w;
    for (int j = 0; j < m; ++j) {
      if (pattern >> j & 1) num[j] += w;
    }
  }
  std::vector<double> post(m);
  for (int j = 0; j < m; ++j) post[j] = static_cast<double>(num[j] / denom);
  return post;
}

}  // namespace

// ---------------------------------------------------------------------------
// Lenth
// ---------------------------------------------------------------------------

TEST_CASE("lenth on equal magnitudes declares nothing") {
  const double c = 2.0;
  std::vector<double> v(15);
  for (int j = 0; j < 15; ++j) v[j] = (j % 2 ? c : -c);
  MethodConfig cfg;
  const MethodDecision d = lenth_analyze(make_est(v), cfg);
  CHECK(d.pse == doctest::Approx(1.5 * c).epsilon(1e-15));
  for (double s : d.statistic) CHECK(s == doctest::Approx(1.0 / 1.5).epsilon(1e-15));
  for (auto a : d.active) CHECK(a == 0);
}

TEST_CASE("lenth trims a single outlier before the scale estimate") {
  std::vector<double> v(15, 1.0);
  v[4] = 10.0;  // exceeds 3.75 * median = 3.75, so it is trimmed
  MethodConfig cfg;
  const MethodDecision d = lenth_analyze(make_est(v), cfg);
  CHECK(d.pse == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(d.statistic[4] == doctest::Approx(10.0 / 1.5).epsilon(1e-15));
  CHECK(d.active[4] == 1);
}

TEST_CASE("lenth matches a scripted implementation on 1000 random inputs") {
  const CsvTable tab = read_csv(testutil::data_path("lenth_bp_oracle.csv"));
  REQUIRE(tab.rows.size() == 1000);
  const int c_pse = tab.column("pse");
  const int c_mask = tab.column("len_mask");
  REQUIRE(c_pse >= 0);
  REQUIRE(c_mask >= 0);

  MethodConfig cfg;
  cfg.len89.critical_value = 2.16;  // the cutoff the script used
  for (const auto& row : tab.rows) {
    std::vector<double> v(15);
    for (int j = 0; j < 15; ++j) v[j] = std::stod(row[j]);
    const MethodDecision d = lenth_analyze(make_est(v), cfg);
    CHECK(d.pse == doctest::Approx(std::stod(row[c_pse])).epsilon(1e-12));
    unsigned mask = 0;
    for (int j = 0; j < 15; ++j) mask |= static_cast<unsigned>(d.active[j]) << j;
    CHECK(mask == std::stoul(row[c_mask], nullptr, 16));
  }
}

TEST_CASE("lenth decisions are scale equivariant") {
  MethodConfig cfg;
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto v = random_estimates(15, 100 + s, 0.7, 2, 4.0);
    std::vector<double> v10(v);
    for (double& x : v10) x *= 10.0;
    const MethodDecision a = lenth_analyze(make_est(v), cfg);
    const MethodDecision b = lenth_analyze(make_est(v10), cfg);
    CHECK(a.active == b.active);
    for (int j = 0; j < 15; ++j) {
      CHECK(a.statistic[j] == doctest::Approx(b.statistic[j]).epsilon(1e-13));
    }
  }
}

TEST_CASE("lenth rejects degenerate input") {
  MethodConfig cfg;
  CHECK_THROWS_AS(lenth_analyze(make_est({1.0, -1.0}), cfg), validation_error);
  CHECK_THROWS_AS(lenth_analyze(make_est(std::vector<double>(15, 0.0)), cfg),
                  degenerate_input_error);
}

TEST_CASE("lenth t reference p-values match the scaled-t table") {
  CHECK(lenth_t_pvalue(2.0, 15) == doctest::Approx(0.10193947882985828).epsilon(1e-10));
  CHECK(lenth_t_pvalue(-2.0, 15) == doctest::Approx(0.10193947882985828).epsilon(1e-10));
  CHECK(lenth_t_pvalue(2.0, 7) == doctest::Approx(0.16497747153653283).epsilon(1e-10));
  // the 0.975 quantile of t with 5 dof maps to p = 0.05
  CHECK(lenth_t_pvalue(2.570581835636314, 15) == doctest::Approx(0.05).epsilon(1e-12));
}

// ---------------------------------------------------------------------------
// Berk-Picard
// ---------------------------------------------------------------------------

TEST_CASE("berk-picard on equal magnitudes declares nothing") {
  const double c = 3.0;
  std::vector<double> v(15);
  for (int j = 0; j < 15; ++j) v[j] = (j % 2 ? c : -c);
  MethodConfig cfg;
  const MethodDecision d = berk_picard_analyze(make_est(v), cfg);
  CHECK(d.tmse == doctest::Approx(c * c).epsilon(1e-15));
  for (double s : d.statistic) CHECK(s == doctest::Approx(1.0).epsilon(1e-15));
  for (auto a : d.active) CHECK(a == 0);
}

TEST_CASE("berk-picard statistic is the squared estimate over the trimmed mean square") {
  // nine smallest squares equal 1, so TMSE = 1; the candidate 6 gives 36
  std::vector<double> v = {1, -1, 1, -1, 1, -1, 1, -1, 1, 4, -4, 4, -4, 4, 6};
  MethodConfig cfg;
  const MethodDecision d = berk_picard_analyze(make_est(v), cfg);
  CHECK(d.tmse == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(d.statistic[14] == doctest::Approx(36.0).epsilon(1e-15));
}

TEST_CASE("berk-picard matches a scripted implementation on 1000 random inputs") {
  const CsvTable tab = read_csv(testutil::data_path("lenth_bp_oracle.csv"));
  const int c_tmse = tab.column("tmse");
  const int c_mask = tab.column("bp_mask");
  REQUIRE(c_tmse >= 0);
  REQUIRE(c_mask >= 0);

  MethodConfig cfg;
  cfg.bp91.critical_value = 11.0;  // the cutoff the script used
  for (const auto& row : tab.rows) {
    std::vector<double> v(15);
    for (int j = 0; j < 15; ++j) v[j] = std::stod(row[j]);
    const MethodDecision d = berk_picard_analyze(make_est(v), cfg);
    CHECK(d.tmse == doctest::Approx(std::stod(row[c_tmse])).epsilon(1e-12));
    unsigned mask = 0;
    for (int j = 0; j < 15; ++j) mask |= static_cast<unsigned>(d.active[j]) << j;
    CHECK(mask == std::stoul(row[c_mask], nullptr, 16));
  }
}

TEST_CASE("berk-picard keeps floor(trim*m) squares and requires at least two") {
  MethodConfig cfg;
  // m = 15, trim 0.60: h = 9 exactly even under floating-point representation
  std::vector<double> v = random_estimates(15, 7);
  std::vector<double> sq(15);
  for (int j = 0; j < 15; ++j) sq[j] = v[j] * v[j];
  std::sort(sq.begin(), sq.end());
  double mean9 = 0.0;
  for (int j = 0; j < 9; ++j) mean9 += sq[j];
  mean9 /= 9.0;
  const MethodDecision d = berk_picard_analyze(make_est(v), cfg);
  CHECK(d.tmse == doctest::Approx(mean9).epsilon(1e-14));

  CHECK_THROWS_AS(berk_picard_analyze(make_est({1.0, 2.0, 3.0}), cfg), config_error);
  cfg.bp91.trim_fraction = 1.5;
  CHECK_THROWS_AS(berk_picard_analyze(make_est(v), cfg), config_error);
}

TEST_CASE("berk-picard decisions are scale equivariant and reject zero TMSE") {
  MethodConfig cfg;
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto v = random_estimates(15, 300 + s, 0.5, 3, 3.0);
    std::vector<double> v10(v);
    for (double& x : v10) x *= 10.0;
    const MethodDecision a = berk_picard_analyze(make_est(v), cfg);
    const MethodDecision b = berk_picard_analyze(make_est(v10), cfg);
    CHECK(a.active == b.active);
  }
  std::vector<double> degen(15, 0.0);
  degen[0] = 5.0;  // nine smallest squares are all zero
  CHECK_THROWS_AS(berk_picard_analyze(make_est(degen), cfg), degenerate_input_error);
}

// ---------------------------------------------------------------------------
// Box-Meyer
// ---------------------------------------------------------------------------

TEST_CASE("box-meyer with unit inflation returns the prior everywhere") {
  MethodConfig cfg;
  cfg.bm86.eta = 0.3;
  cfg.bm86.inflation = 1.0;
  const auto v = random_estimates(8, 11);
  const MethodDecision d = box_meyer_analyze(make_est(v), cfg);
  for (double p : d.statistic) CHECK(p == doctest::Approx(0.3).epsilon(1e-12));
}

TEST_CASE("box-meyer posterior vanishes as the prior activity rate vanishes") {
  MethodConfig cfg;
  cfg.bm86.eta = 1e-12;
  const auto v = random_estimates(10, 13, 1.0, 2, 6.0);
  const MethodDecision d = box_meyer_analyze(make_est(v), cfg);
  for (double p : d.statistic) CHECK(p < 1e-4);
  for (auto a : d.active) CHECK(a == 0);
}

TEST_CASE("box-meyer matches an independently scripted brute force") {
  std::ifstream f(testutil::data_path("bm86_oracle.json"));
  REQUIRE(f.good());
  const nlohmann::json cases = nlohmann::json::parse(f);
  for (const auto& c : cases) {
    MethodConfig cfg;
    cfg.bm86.eta = c["eta"].get<double>();
    cfg.bm86.inflation = c["inflation"].get<double>();
    const std::vector<double> v = c["estimates"].get<std::vector<double>>();
    const MethodDecision d = box_meyer_analyze(make_est(v), cfg);
    const auto& expect = c["posteriors"];
    REQUIRE(d.statistic.size() == expect.size());
    for (std::size_t j = 0; j < d.statistic.size(); ++j) {
      const double e = std::stod(expect[j].get<std::string>());
      CHECK(std::fabs(d.statistic[j] - e) < 1e-10);
    }
  }
}

TEST_CASE("box-meyer matches an in-process brute force for m up to 10") {
  for (int m : {2, 3, 5, 7, 10}) {
    for (std::uint64_t s = 0; s < 5; ++s) {
      MethodConfig cfg;
      cfg.bm86.eta = 0.1 + 0.05 * static_cast<double>(s);
      cfg.bm86.inflation = 10.0 + 30.0 * static_cast<double>(s);
      const auto v = random_estimates(m, 500 + 10 * m + s, 1.0, 1, 4.0);
      const MethodDecision d = box_meyer_analyze(make_est(v), cfg);
      const auto brute = bm_brute_force(v, cfg.bm86.eta, cfg.bm86.inflation);
      for (int j = 0; j < m; ++j) {
        CHECK(std::fabs(d.statistic[j] - brute[j]) < 1e-10);
      }
    }
  }
}

TEST_CASE("box-meyer posteriors are exactly scale invariant") {
  MethodConfig cfg;
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto v = random_estimates(12, 900 + s, 0.8, 2, 5.0);
    std::vector<double> v10(v);
    for (double& x : v10) x *= 10.0;
    const MethodDecision a = box_meyer_analyze(make_est(v), cfg);
    const MethodDecision b = box_meyer_analyze(make_est(v10), cfg);
    CHECK(a.active == b.active);
    for (std::size_t j = 0; j < a.statistic.size(); ++j) {
      CHECK(a.statistic[j] == doctest::Approx(b.statistic[j]).epsilon(1e-12));
    }
  }
}

TEST_CASE("box-meyer rejects invalid configurations and degenerate input") {
  MethodConfig cfg;
  CHECK_THROWS_AS(box_meyer_analyze(make_est(std::vector<double>(21, 1.0)), cfg),
                  unsupported_error);
  CHECK_THROWS_AS(box_meyer_analyze(make_est({1.0}), cfg), validation_error);
  CHECK_THROWS_AS(box_meyer_analyze(make_est(std::vector<double>(8, 0.0)), cfg),
                  degenerate_input_error);
  cfg.bm86.eta = 0.0;
  CHECK_THROWS_AS(box_meyer_analyze(make_est({1.0, 2.0}), cfg), config_error);
  cfg.bm86.eta = 0.2;
  cfg.bm86.inflation = 0.5;
  CHECK_THROWS_AS(box_meyer_analyze(make_est({1.0, 2.0}), cfg), config_error);
}

// ---------------------------------------------------------------------------
// relabeling equivariance (estimate-based methods)
// ---------------------------------------------------------------------------

TEST_CASE("relabeling factors permutes decisions correspondingly") {
  // permutation of factor bits: A->C, B->A, C->D, D->B
  const int perm[4] = {2, 0, 3, 1};
  auto map_index = [&](int j) {
    int out = 0;
    for (int f = 0; f < 4; ++f) {
      if (j >> f & 1) out |= 1 << perm[f];
    }
    return out;
  };
  MethodConfig cfg;
  const auto v = random_estimates(15, 1234, 0.8, 2, 4.0);
  std::vector<double> relabeled(15);
  for (int j = 1; j <= 15; ++j) relabeled[map_index(j) - 1] = v[j - 1];

  for (int method = 0; method < 3; ++method) {
    auto analyze = [&](const EffectEstimates& est) {
      switch (method) {
        case 0: return lenth_analyze(est, cfg);
        case 1: return berk_picard_analyze(est, cfg);
        default: return box_meyer_analyze(est, cfg);
      }
    };
    const MethodDecision a = analyze(make_est(v));
    const MethodDecision b = analyze(make_est(relabeled));
    for (int j = 1; j <= 15; ++j) {
      CHECK(a.active[j - 1] == b.active[map_index(j) - 1]);
      CHECK(a.statistic[j - 1] ==
            doctest::Approx(b.statistic[map_index(j) - 1]).epsilon(1e-12));
    }
  }
}

// ---------------------------------------------------------------------------
// Loughin-Noble
// ---------------------------------------------------------------------------

TEST_CASE("loughin-noble declares nothing when critical values are tiny") {
  const FactorialDesign design = build_design(4);
  ScenarioModel null_model;
  null_model.k = 4;
  const auto y = generate_response(design, null_model, SeedSpec{404, 0});
  MethodConfig cfg;
  cfg.ln97.n_permutations = 400;
  cfg.ln97.critical_values.assign(12, 1e-9);
  const MethodDecision d = loughin_noble_analyze(y, design, cfg, SeedSpec{404, 0});
  for (auto a : d.active) CHECK(a == 0);
}

TEST_CASE("loughin-noble separates a dominant effect at the minimum p-value") {
  const FactorialDesign design = build_design(4);
  CounterRng rng = CounterRng::from(SeedSpec{17, 0}, kDomainResponse);
  std::vector<double> y(design.n);
  for (int run = 0; run < design.n; ++run) {
    y[run] = 50.0 * design.at(run, 1) + 0.001 * rng.next_normal();
  }
  MethodConfig cfg;
  cfg.ln97.n_permutations = 500;
  const MethodDecision d = loughin_noble_analyze(y, design, cfg, SeedSpec{17, 0});
  CHECK(d.step_effect[0] == 1);  // A is tested first
  // p = (1 + hits) / (1 + N); a shuffle beats |beta_A| only when it happens to
  // align with one of the 15 columns (30 / C(16,8) of sign patterns), so hits
  // stay in single digits here.
  const double scaled = d.step_pvalues[0] * 501.0;
  CHECK(scaled == doctest::Approx(std::round(scaled)).epsilon(1e-12));
  CHECK(d.step_pvalues[0] <= 10.0 / 501.0);
  CHECK(d.active[0] == 1);
}

TEST_CASE("loughin-noble step-1 p-value matches exhaustive enumeration at k=3") {
  std::ifstream f(testutil::data_path("ln97_exact_k3.json"));
  REQUIRE(f.good());
  const nlohmann::json doc = nlohmann::json::parse(f);
  const std::vector<double> y = doc["y"].get<std::vector<double>>();
  const long hits = doc["hits_loose"].get<long>();
  const long n_all = doc["n_perms"].get<long>();
  const double p_exact = static_cast<double>(hits) / static_cast<double>(n_all);

  const FactorialDesign design = build_design(3);
  MethodConfig cfg;
  cfg.ln97.n_permutations = 40000;
  cfg.ln97.max_steps = 5;
  cfg.ln97.critical_values.assign(5, 0.01);
  const MethodDecision d = loughin_noble_analyze(y, design, cfg, SeedSpec{2718, 0});
  const double tol = 2.0 * std::sqrt(p_exact * (1.0 - p_exact) / 40000.0);
  CHECK(std::fabs(d.step_pvalues[0] - p_exact) <= tol);
}

TEST_CASE("loughin-noble resolves the step-up rule at the deepest significant step") {
  const FactorialDesign design = build_design(4);
  ScenarioModel model;
  model.k = 4;
  model.location.betas[2] = 2.0;
  model.dispersion.deltas[1] = 9.0;
  MethodConfig cfg;
  cfg.ln97.n_permutations = 300;

  for (std::uint64_t rep = 0; rep < 40; ++rep) {
    const auto y = generate_response(design, model, SeedSpec{31415, rep});
    const MethodDecision d = loughin_noble_analyze(y, design, cfg, SeedSpec{31415, rep});

    int deepest = 0;
    for (int s = 1; s <= cfg.ln97.max_steps; ++s) {
      if (d.step_pvalues[s - 1] < cfg.ln97.critical_values[s - 1]) deepest = s;
    }
    std::vector<std::uint8_t> expect(15, 0);
    for (int s = 0; s < deepest; ++s) expect[d.step_effect[s] - 1] = 1;
    CHECK(d.active == expect);
  }
}

TEST_CASE("loughin-noble is deterministic per seed and scale equivariant") {
  const FactorialDesign design = build_design(4);
  ScenarioModel model;
  model.k = 4;
  model.location.betas[2] = 1.5;
  const auto y = generate_response(design, model, SeedSpec{55, 3});
  MethodConfig cfg;
  cfg.ln97.n_permutations = 400;

  const MethodDecision a = loughin_noble_analyze(y, design, cfg, SeedSpec{55, 3});
  const MethodDecision b = loughin_noble_analyze(y, design, cfg, SeedSpec{55, 3});
  CHECK(a.step_pvalues == b.step_pvalues);
  CHECK(a.active == b.active);

  std::vector<double> y10(y);
  for (double& v : y10) v *= 10.0;
  const MethodDecision c = loughin_noble_analyze(y10, design, cfg, SeedSpec{55, 3});
  CHECK(a.active == c.active);
  CHECK(a.step_pvalues == c.step_pvalues);
}

TEST_CASE("loughin-noble orders ties by effect index and leaves untested effects at p=1") {
  const FactorialDesign design = build_design(4);
  std::vector<double> y(design.n);
  for (int run = 0; run < design.n; ++run) {
    y[run] = design.at(run, 1) + design.at(run, 2);  // exact tie |beta_A| = |beta_B| = 1
  }
  MethodConfig cfg;
  cfg.ln97.n_permutations = 200;
  cfg.ln97.max_steps = 3;
  const MethodDecision d = loughin_noble_analyze(y, design, cfg, SeedSpec{1, 0});
  CHECK(d.step_effect[0] == 1);
  CHECK(d.step_effect[1] == 2);
  // After removing A and B the residuals vanish, so step 3 ties every
  // permutation and lands at p = 1 along with the 12 untested effects.
  CHECK(d.step_pvalues[2] == 1.0);
  int at_one = 0;
  for (double p : d.statistic) at_one += p == 1.0;
  CHECK(at_one == 13);
}

TEST_CASE("loughin-noble rejects invalid configurations") {
  const FactorialDesign design = build_design(4);
  std::vector<double> y(design.n, 0.0);
  MethodConfig cfg;
  cfg.ln97.n_permutations = 99;
  CHECK_THROWS_AS(loughin_noble_analyze(y, design, cfg, SeedSpec{1, 0}), config_error);
  cfg.ln97.n_permutations = 200;
  cfg.ln97.max_steps = 13;  // only n - k = 12 steps are testable
  CHECK_THROWS_AS(loughin_noble_analyze(y, design, cfg, SeedSpec{1, 0}), config_error);
  cfg.ln97.max_steps = 12;
  cfg.ln97.critical_values.assign(5, 0.1);  // shorter than max_steps
  CHECK_THROWS_AS(loughin_noble_analyze(y, design, cfg, SeedSpec{1, 0}), config_error);
}

// ---------------------------------------------------------------------------
// calibration and effect sizing
// ---------------------------------------------------------------------------

TEST_CASE("power levels map labels to targets") {
  CHECK(EPowerLevel::from_label("small").target == 0.2);
  CHECK(EPowerLevel::from_label("medium").target == 0.5);
  CHECK(EPowerLevel::from_label("large").target == 0.9);
  CHECK(std::string(EPowerLevel::from_target(0.9).name()) == "large");
  CHECK_THROWS_AS(EPowerLevel::from_label("huge"), config_error);
  CHECK_THROWS_AS(EPowerLevel::from_target(0.3), config_error);
}

TEST_CASE("the power equation root matches reference values") {
  CHECK(epower_delta(0.2) == doctest::Approx(1.114571417228515).epsilon(1e-9));
  CHECK(epower_delta(0.5) == doctest::Approx(1.959852920520313).epsilon(1e-9));
  CHECK(epower_delta(0.9) == doctest::Approx(3.241514986806439).epsilon(1e-9));
  CHECK(epower_delta(0.05) <= 1e-6);  // the target equals the test size
  CHECK_THROWS_AS(epower_delta(0.0), config_error);
  CHECK_THROWS_AS(epower_delta(1.0), config_error);
}

TEST_CASE("a Z test at the solved shift attains the target power") {
  const double delta = epower_delta(0.5);
  const double z975 = normal_quantile(0.975);
  CounterRng rng = CounterRng::from(SeedSpec{808, 0}, kDomainResponse);
  const int n = 1000000;
  int rejections = 0;
  for (int i = 0; i < n; ++i) {
    rejections += std::fabs(rng.next_normal() + delta) > z975;
  }
  CHECK(static_cast<double>(rejections) / n == doctest::Approx(0.5).epsilon(0.004));
}

TEST_CASE("effect sizing scales the shift by the estimate sd") {
  const EPowerLevel level = EPowerLevel::from_label("medium");
  CHECK(epower_effect_size(level, 0.25) ==
        doctest::Approx(0.25 * 1.959852920520313).epsilon(1e-9));
  CHECK_THROWS_AS(epower_effect_size(level, 0.0), config_error);
}

TEST_CASE("calibration hits the target error rate on fresh null data") {
  CalibrateOptions opts;
  const CalibrationResult r =
      calibrate_method(MethodKind::LEN89, 0.05, 800, SeedSpec{606, 0}, opts);
  CHECK(std::fabs(r.achieved_ier - 0.05) <= 0.015);
  REQUIRE(r.values.size() == 1);

  // fresh null replications, disjoint seed
  const FactorialDesign design = build_design(4);
  ScenarioModel null_model;
  null_model.k = 4;
  MethodConfig cfg;
  cfg.len89.critical_value = r.values[0];
  long rejections = 0;
  const long reps = 800;
  for (long rep = 0; rep < reps; ++rep) {
    const auto y = generate_response(design, null_model,
                                     SeedSpec{999, static_cast<std::uint64_t>(rep)});
    const MethodDecision d = lenth_analyze(estimate_effects(design, y), cfg);
    for (auto a : d.active) rejections += a;
  }
  const double ier = static_cast<double>(rejections) / (reps * 15.0);
  CHECK(ier >= 0.03);
  CHECK(ier <= 0.07);
}

TEST_CASE("the box-meyer threshold calibrates near 0.32 under the default prior") {
  CalibrateOptions opts;
  const CalibrationResult r =
      calibrate_method(MethodKind::BM86, 0.05, 1825, SeedSpec{20250815, 0}, opts);
  REQUIRE(r.values.size() == 1);
  CHECK(std::fabs(r.values[0] - 0.3187) <= 0.05);
}

TEST_CASE("the lenth cutoff is invariant to the null variance") {
  CalibrateOptions opts;
  opts.base_sigma2 = 1.0;
  const CalibrationResult a =
      calibrate_method(MethodKind::LEN89, 0.05, 600, SeedSpec{42, 0}, opts);
  opts.base_sigma2 = 100.0;
  const CalibrationResult b =
      calibrate_method(MethodKind::LEN89, 0.05, 600, SeedSpec{42, 0}, opts);
  CHECK(a.values[0] == doctest::Approx(b.values[0]).epsilon(1e-12));
}

TEST_CASE("step-up calibration reports its achieved rate near target") {
  CalibrateOptions opts;
  opts.n_permutations = 300;
  const CalibrationResult r =
      calibrate_method(MethodKind::LN97, 0.05, 600, SeedSpec{77, 0}, opts);
  CHECK(r.values.size() == 12);
  CHECK(std::fabs(r.achieved_ier - 0.05) <= 0.02);
  for (double c : r.values) {
    CHECK(c >= 0.0);
    CHECK(c <= 1.0);
  }
}

TEST_CASE("calibration rejects out-of-range requests") {
  CalibrateOptions opts;
  CHECK_THROWS_AS(calibrate_method(MethodKind::LEN89, 0.6, 1000, SeedSpec{1, 0}, opts),
                  config_error);
  CHECK_THROWS_AS(calibrate_method(MethodKind::LEN89, 0.05, 100, SeedSpec{1, 0}, opts),
                  config_error);
}

TEST_CASE("calibration serialization round-trips into a method configuration") {
  CalibrateOptions opts;
  std::vector<CalibrationResult> results;
  results.push_back(calibrate_method(MethodKind::LEN89, 0.05, 600, SeedSpec{5, 0}, opts));
  results.push_back(calibrate_method(MethodKind::BP91, 0.05, 600, SeedSpec{5, 0}, opts));
  results.push_back(calibrate_method(MethodKind::BM86, 0.05, 600, SeedSpec{5, 0}, opts));

  const nlohmann::json doc = calibration_to_json(results, opts);
  CHECK(doc["k"] == 4);
  CHECK(doc["len89"]["n_reps"] == 600);

  MethodConfig cfg;
  apply_calibration(doc, cfg);
  CHECK(cfg.len89.critical_value == results[0].values[0]);
  CHECK(cfg.bp91.critical_value == results[1].values[0]);
  CHECK(cfg.bm86.threshold == results[2].values[0]);
  CHECK(cfg.bp91.trim_fraction == opts.trim_fraction);
  CHECK(cfg.bm86.eta == opts.eta);

  testutil::TempDir tmp("calibjson");
  std::ofstream f(tmp.file("c.json"));
  f << doc.dump();
  f.close();
  const nlohmann::json loaded = load_calibration_file(tmp.file("c.json"));
  CHECK(loaded == doc);
  CHECK_THROWS_AS(load_calibration_file(tmp.file("missing.json")), config_error);
}

TEST_CASE("method names round-trip") {
  for (MethodKind mk : kAllMethods) {
    const auto back = method_from_name(method_name(mk));
    REQUIRE(back.has_value());
    CHECK(*back == mk);
  }
  CHECK(!method_from_name("lenth").has_value());
}
