#include "effscreen/methods.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/students_t.hpp>

#include "effscreen/errors.hpp"

namespace effscreen {

namespace {

// Output of: calibrate --method all --ier 0.05 --reps 1825 --perms 1000
//            --seed 20250815
// (k = 4; achieved IER 0.0500 for the single-cutoff methods, 0.0521 for the
// step-up cutoffs).
constexpr double kLenthCritical = 2.1641671620231357;
constexpr double kBerkPicardCritical = 18.918458217810585;
constexpr double kBoxMeyerThreshold = 0.31695619193042934;
constexpr double kLoughinNobleCriticals[] = {
    0.16883116883116883,  0.12687312687312688,  0.11688311688311688,
    0.07692307692307693,  0.04195804195804196,  0.017982017982017984,
    0.008991008991008992, 0.003996003996003996, 0.001998001998001998,
    0.000999000999000999, 0.000999000999000999, 0.000999000999000999};

double median_inplace(std::vector<double>& v) {
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return (v.size() % 2 == 1) ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

}  // namespace

const char* method_name(MethodKind m) {
  switch (m) {
    case MethodKind::LEN89: return "len89";
    case MethodKind::BM86: return "bm86";
    case MethodKind::BP91: return "bp91";
    case MethodKind::LN97: return "ln97";
  }
  return "?";
}

std::optional<MethodKind> method_from_name(const std::string& name) {
  for (MethodKind m : kAllMethods) {
    if (name == method_name(m)) return m;
  }
  return std::nullopt;
}

double default_lenth_critical() { return kLenthCritical; }
double default_berk_picard_critical() { return kBerkPicardCritical; }
double default_box_meyer_threshold() { return kBoxMeyerThreshold; }
std::vector<double> default_loughin_noble_criticals() {
  return std::vector<double>(std::begin(kLoughinNobleCriticals), std::end(kLoughinNobleCriticals));
}

MethodDecision lenth_analyze(const EffectEstimates& est, const MethodConfig& cfg) {
  const std::size_t m = est.values.size();
  if (m < 3) throw validation_error("Lenth analysis needs at least 3 effect estimates");
  if (!(cfg.len89.critical_value > 0.0)) {
    throw config_error("Lenth critical value must be positive");
  }
  std::vector<double> mags(m);
  for (std::size_t j = 0; j < m; ++j) mags[j] = std::fabs(est.values[j]);

  std::vector<double> tmp = mags;
  const double med = median_inplace(tmp);
  // One trimming pass against the initial median; the cut is strict.
  std::vector<double> kept;
  kept.reserve(m);
  for (double a : mags) {
    if (a < 3.75 * med) kept.push_back(a);
  }
  if (kept.empty()) {
    throw degenerate_input_error("Lenth PSE undefined: every estimate was trimmed");
  }
  const double pse = 1.5 * median_inplace(kept);
  if (!(pse > 0.0)) {
    throw degenerate_input_error("Lenth PSE is zero: too many zero estimates");
  }

  MethodDecision d;
  d.method = MethodKind::LEN89;
  d.pse = pse;
  d.statistic.resize(m);
  d.active.resize(m);
  for (std::size_t j = 0; j < m; ++j) {
    d.statistic[j] = mags[j] / pse;
    d.active[j] = d.statistic[j] > cfg.len89.critical_value ? 1 : 0;
  }
  return d;
}

double lenth_t_pvalue(double statistic, int n_effects) {
  const double df = n_effects / 3.0;
  boost::math::students_t dist(df);
  return 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(statistic)));
}

MethodDecision berk_picard_analyze(const EffectEstimates& est, const MethodConfig& cfg) {
  const std::size_t m = est.values.size();
  if (m < 3) throw validation_error("Berk-Picard analysis needs at least 3 effect estimates");
  if (!(cfg.bp91.trim_fraction > 0.0 && cfg.bp91.trim_fraction < 1.0)) {
    throw config_error("trim fraction must lie in (0,1)");
  }
  if (!(cfg.bp91.critical_value > 0.0)) {
    throw config_error("Berk-Picard critical value must be positive");
  }
  // floor(trim_fraction * m), guarded so 0.60 * 15 lands on 9 despite rounding.
  const std::size_t h =
      static_cast<std::size_t>(cfg.bp91.trim_fraction * static_cast<double>(m) + 1e-9);
  if (h < 2) {
    throw config_error("trim fraction leaves fewer than 2 effects in the error estimate");
  }
  std::vector<double> sq(m);
  for (std::size_t j = 0; j < m; ++j) sq[j] = est.values[j] * est.values[j];
  std::vector<double> sorted_sq = sq;
  std::sort(sorted_sq.begin(), sorted_sq.end());
  double tmse = 0.0;
  for (std::size_t i = 0; i < h; ++i) tmse += sorted_sq[i];
  tmse /= static_cast<double>(h);
  if (!(tmse > 0.0)) {
    throw degenerate_input_error("Berk-Picard TMSE is zero: too many zero estimates");
  }

  MethodDecision d;
  d.method = MethodKind::BP91;
  d.tmse = tmse;
  d.statistic.resize(m);
  d.active.resize(m);
  for (std::size_t j = 0; j < m; ++j) {
    d.statistic[j] = sq[j] / tmse;
    d.active[j] = d.statistic[j] > cfg.bp91.critical_value ? 1 : 0;
  }
  return d;
}

MethodDecision box_meyer_analyze(const EffectEstimates& est, const MethodConfig& cfg) {
  const int m = static_cast<int>(est.values.size());
  if (m < 2) throw validation_error("Box-Meyer analysis needs at least 2 effect estimates");
  if (m > 20) {
    throw unsupported_error("Box-Meyer enumeration supports at most 20 effects (2^m patterns)");
  }
  const double eta = cfg.bm86.eta;
  const double c = cfg.bm86.inflation;
  if (!(eta > 0.0 && eta < 1.0)) throw config_error("Box-Meyer eta must lie in (0,1)");
  if (!(c >= 1.0)) throw config_error("Box-Meyer inflation must be >= 1");
  if (!(cfg.bm86.threshold > 0.0 && cfg.bm86.threshold < 1.0)) {
    throw config_error("Box-Meyer threshold must lie in (0,1)");
  }

  std::vector<double> sq(m);
  double total = 0.0;
  for (int j = 0; j < m; ++j) {
    sq[j] = est.values[j] * est.values[j];
    total += sq[j];
  }
  if (!(total > 0.0)) {
    throw degenerate_input_error("Box-Meyer posterior undefined: all estimates are zero");
  }

  // Marginal likelihood of an activity pattern `a` with sigma integrated out
  // under p(sigma) ~ 1/sigma:
  //   L(a) ~ eta^|a| (1-eta)^(m-|a|) c^(-|a|/2) Q(a)^(-m/2),
  //   Q(a) = sum_j beta_j^2 / (a_j ? c : 1) = T - (1 - 1/c) * sum_{j in a} beta_j^2.
  // Enumerate patterns in Gray-code order so Q updates by one term per step;
  // work with Q/T and log weights to stay scale-invariant and overflow-free.
  const std::uint32_t npat = 1u << m;
  const double per_active = std::log(eta / (1.0 - eta)) - 0.5 * std::log(c);
  const double shrink = 1.0 - 1.0 / c;
  const double half_m = 0.5 * m;
  std::vector<double> logw(npat);
  logw[0] = 0.0;  // empty pattern; the common factor (1-eta)^m cancels
  double active_sum = 0.0;
  int active_count = 0;
  double max_logw = 0.0;
  std::uint32_t gray = 0;
  for (std::uint32_t i = 1; i < npat; ++i) {
    const int bit = std::countr_zero(i);
    const std::uint32_t mask = 1u << bit;
    gray ^= mask;
    if (gray & mask) {
      active_sum += sq[bit];
      ++active_count;
    } else {
      active_sum -= sq[bit];
      --active_count;
    }
    const double q_ratio = std::max((total - shrink * active_sum) / total, 1e-300);
    const double lw = active_count * per_active - half_m * std::log(q_ratio);
    logw[gray] = lw;
    if (lw > max_logw) max_logw = lw;
  }

  std::vector<double> post(m, 0.0);
  double denom = std::exp(-max_logw);  // empty pattern
  gray = 0;
  for (std::uint32_t i = 1; i < npat; ++i) {
    gray ^= 1u << std::countr_zero(i);
    const double w = std::exp(logw[gray] - max_logw);
    denom += w;
    std::uint32_t bits = gray;
    while (bits) {
      const int j = std::countr_zero(bits);
      post[j] += w;
      bits &= bits - 1;
    }
  }

  MethodDecision d;
  d.method = MethodKind::BM86;
  d.statistic.resize(m);
  d.active.resize(m);
  for (int j = 0; j < m; ++j) {
    d.statistic[j] = post[j] / denom;
    d.active[j] = d.statistic[j] > cfg.bm86.threshold ? 1 : 0;
  }
  return d;
}

MethodDecision loughin_noble_analyze(const std::vector<double>& y, const FactorialDesign& design,
                                     const MethodConfig& cfg, const SeedSpec& seed) {
  const int n = design.n;
  const int m = n - 1;
  if (static_cast<int>(y.size()) != n) {
    throw validation_error("response length does not match design size");
  }
  if (cfg.ln97.n_permutations < 100) {
    throw config_error("step-up permutation test needs at least 100 permutations");
  }
  if (cfg.ln97.max_steps < 1 || cfg.ln97.max_steps > n - design.k) {
    throw config_error("max_steps must lie in [1, n-k]");
  }
  const int n_steps = cfg.ln97.max_steps;
  if (static_cast<int>(cfg.ln97.critical_values.size()) < n_steps) {
    throw config_error("need one critical value per step (" + std::to_string(n_steps) +
                       " steps, " + std::to_string(cfg.ln97.critical_values.size()) + " given)");
  }

  const EffectEstimates est = estimate_effects(design, y);
  std::vector<int> order(m);
  std::iota(order.begin(), order.end(), 1);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const double ma = std::fabs(est.values[a - 1]);
    const double mb = std::fabs(est.values[b - 1]);
    return ma != mb ? ma > mb : a < b;
  });

  // Column-major copy of the design for the hot permutation loop.
  std::vector<double> cols(static_cast<std::size_t>(n) * n);
  for (int e = 0; e < n; ++e) {
    for (int i = 0; i < n; ++i) {
      cols[static_cast<std::size_t>(e) * n + i] = design.at(i, e);
    }
  }

  const double inv_n = 1.0 / n;
  std::vector<double> resid(n), buf(n);
  std::vector<double> step_p(n_steps, 1.0);

  for (int s = 1; s <= n_steps; ++s) {
    // Residuals from the fit with the s-1 largest effects plus intercept; by
    // orthogonality the fitted coefficients equal the saturated-model estimates.
    for (int i = 0; i < n; ++i) resid[i] = y[i] - est.intercept;
    for (int f = 0; f < s - 1; ++f) {
      const int e = order[f];
      const double b = est.values[e - 1];
      const double* col = &cols[static_cast<std::size_t>(e) * n];
      for (int i = 0; i < n; ++i) resid[i] -= b * col[i];
    }
    // Canonical order: the permutation distribution only sees the multiset.
    std::sort(resid.begin(), resid.end());

    const double obs = std::fabs(est.values[order[s - 1] - 1]);
    // Ties count as exceedances; the epsilon absorbs summation-order noise when
    // a permutation reproduces the observed contrast exactly.
    const double bar = obs - 1e-9 * obs;
    int hits = 0;
    for (int p = 0; p < cfg.ln97.n_permutations; ++p) {
      CounterRng rng = CounterRng::from(
          seed, kDomainPermutation,
          (static_cast<std::uint64_t>(s) << 32) | static_cast<std::uint64_t>(p));
      buf = resid;
      rng.shuffle(buf.data(), buf.size());
      bool hit = false;
      for (int f = s - 1; f < m && !hit; ++f) {
        const double* col = &cols[static_cast<std::size_t>(order[f]) * n];
        double acc = 0.0;
        for (int i = 0; i < n; ++i) acc += col[i] * buf[i];
        hit = std::fabs(acc) * inv_n >= bar;
      }
      hits += hit ? 1 : 0;
    }
    step_p[s - 1] = (1.0 + hits) / (1.0 + cfg.ln97.n_permutations);
  }

  // Step-up: find the deepest significant step; everything larger is active.
  int s_star = 0;
  for (int s = n_steps; s >= 1; --s) {
    if (step_p[s - 1] < cfg.ln97.critical_values[s - 1]) {
      s_star = s;
      break;
    }
  }

  MethodDecision d;
  d.method = MethodKind::LN97;
  d.statistic.assign(m, 1.0);
  d.active.assign(m, 0);
  d.step_pvalues = step_p;
  d.step_effect.resize(n_steps);
  for (int s = 1; s <= n_steps; ++s) {
    d.step_effect[s - 1] = order[s - 1];
    d.statistic[order[s - 1] - 1] = step_p[s - 1];
  }
  for (int f = 0; f < s_star; ++f) d.active[order[f] - 1] = 1;
  return d;
}

}  // namespace effscreen
