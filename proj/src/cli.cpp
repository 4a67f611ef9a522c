#include "effscreen/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "effscreen/calibrate.hpp"
#include "effscreen/csvutil.hpp"
#include "effscreen/design.hpp"
#include "effscreen/errors.hpp"
#include "effscreen/experiment_io.hpp"
#include "effscreen/manifest.hpp"
#include "effscreen/methods.hpp"
#include "effscreen/simstudy.hpp"
#include "effscreen/svg.hpp"
#include "effscreen/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace effscreen {
namespace {

std::vector<MethodKind> parse_method_list(const std::string& spec) {
  std::vector<MethodKind> out;
  if (spec == "all") {
    out.assign(kAllMethods.begin(), kAllMethods.end());
    return out;
  }
  std::stringstream ss(spec);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    tok.erase(0, tok.find_first_not_of(" \t"));
    tok.erase(tok.find_last_not_of(" \t") + 1);
    if (tok.empty()) continue;
    auto m = method_from_name(tok);
    if (!m) {
      throw config_error("unknown method '" + tok +
                         "' (expected len89, bm86, bp91, ln97, or all)");
    }
    if (std::find(out.begin(), out.end(), *m) == out.end()) out.push_back(*m);
  }
  if (out.empty()) throw config_error("empty method list");
  return out;
}

std::string methods_to_string(const std::vector<MethodKind>& methods) {
  std::string out;
  for (MethodKind m : methods) {
    if (!out.empty()) out += ',';
    out += method_name(m);
  }
  return out;
}

bool has_method(const std::vector<MethodKind>& methods, MethodKind m) {
  return std::find(methods.begin(), methods.end(), m) != methods.end();
}

std::string opt_str(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string();
}

// ---------------------------------------------------------------------------
// analyze
// ---------------------------------------------------------------------------

struct AnalyzeOpts {
  std::string input;
  std::string calib;
  std::string methods = "all";
  std::string out;
  std::string len89_reference = "calibrated";  // or "t"
  double alpha = 0.05;
  std::uint64_t seed = 1;
  int perms = 5000;
  bool methods_explicit = false;
};

int cmd_analyze(const AnalyzeOpts& opt) {
  Experiment exp = parse_experiment_csv(opt.input);
  FactorialDesign design = build_design(exp.k);
  EffectEstimates est = estimate_effects(design, exp.y);
  const int m = design.n - 1;

  std::vector<MethodKind> methods = parse_method_list(opt.methods);

  MethodConfig cfg;
  json calib_doc;
  if (!opt.calib.empty()) {
    calib_doc = load_calibration_file(opt.calib);
    apply_calibration(calib_doc, cfg);
    if (calib_doc.contains("k") && calib_doc["k"].get<int>() != exp.k) {
      throw config_error("calibration file was produced for k = " +
                         std::to_string(calib_doc["k"].get<int>()) +
                         " but the experiment has k = " + std::to_string(exp.k));
    }
  }
  cfg.ln97.n_permutations = opt.perms;

  // The built-in cutoffs are calibrated for k = 4. For other k the step-up
  // procedure needs a per-step list of the right length, so recalibrate on the
  // fly (small k) or insist on an explicit calibration file (large k).
  if (exp.k != 4 && opt.calib.empty()) {
    std::cerr << "note: built-in critical values were calibrated for k = 4; "
                 "supply --calib for exact error control at k = "
              << exp.k << "\n";
    if (has_method(methods, MethodKind::LN97)) {
      if (exp.k < 4) {
        std::cerr << "note: calibrating step-up cutoffs for k = " << exp.k
                  << " (1825 null replications, seed " << opt.seed << ")\n";
        CalibrateOptions copt;
        copt.k = exp.k;
        CalibrationResult r = calibrate_method(MethodKind::LN97, 0.05, 1825,
                                               SeedSpec{opt.seed, 0}, copt);
        cfg.ln97.critical_values = r.values;
      } else {
        throw config_error(
            "no built-in step-up cutoffs for k > 4; run `calibrate --k " +
            std::to_string(exp.k) + "` and pass --calib");
      }
    }
  }
  cfg.ln97.max_steps =
      std::min<int>(static_cast<int>(cfg.ln97.critical_values.size()), design.n - exp.k);

  if (has_method(methods, MethodKind::BM86) && m > 20) {
    if (opt.methods_explicit) {
      throw unsupported_error(
          "bm86 enumerates all activity patterns and supports at most 20 "
          "effects (this design has " +
          std::to_string(m) + "); drop it from --methods");
    }
    std::cerr << "note: skipping bm86 (" << m
              << " effects exceeds its exact-enumeration limit of 20)\n";
    methods.erase(std::remove(methods.begin(), methods.end(), MethodKind::BM86),
                  methods.end());
  }
  const int bp_h = static_cast<int>(cfg.bp91.trim_fraction * m + 1e-9);
  if (has_method(methods, MethodKind::BP91) && bp_h < 2) {
    if (opt.methods_explicit) {
      throw config_error(
          "bp91 trim fraction " + std::to_string(cfg.bp91.trim_fraction) +
          " keeps fewer than 2 of " + std::to_string(m) +
          " effects for the error estimate; calibrate with a larger --trim");
    }
    std::cerr << "note: skipping bp91 (trim fraction keeps fewer than 2 of "
              << m << " effects for the error estimate)\n";
    methods.erase(std::remove(methods.begin(), methods.end(), MethodKind::BP91),
                  methods.end());
  }

  const bool t_reference = opt.len89_reference == "t";
  std::map<MethodKind, MethodDecision> decisions;
  std::vector<double> len89_pvalues;
  for (MethodKind mk : kAllMethods) {
    if (!has_method(methods, mk)) continue;
    try {
      switch (mk) {
        case MethodKind::LEN89: {
          MethodDecision d = lenth_analyze(est, cfg);
          if (t_reference) {
            len89_pvalues.resize(d.statistic.size());
            for (std::size_t j = 0; j < d.statistic.size(); ++j) {
              len89_pvalues[j] = lenth_t_pvalue(d.statistic[j], m);
              d.active[j] = len89_pvalues[j] < opt.alpha ? 1 : 0;
            }
          }
          decisions[mk] = std::move(d);
          break;
        }
        case MethodKind::BP91:
          decisions[mk] = berk_picard_analyze(est, cfg);
          break;
        case MethodKind::BM86:
          decisions[mk] = box_meyer_analyze(est, cfg);
          break;
        case MethodKind::LN97:
          decisions[mk] =
              loughin_noble_analyze(exp.y, design, cfg, SeedSpec{opt.seed, 0});
          break;
      }
    } catch (const degenerate_input_error& e) {
      // A flat response leaves the scale estimates at zero; report "nothing
      // declared" rather than failing the whole analysis.
      std::cerr << "note: " << method_name(mk) << ": " << e.what()
                << "; no effects declared\n";
      MethodDecision d;
      d.method = mk;
      d.statistic.assign(m, mk == MethodKind::LN97 ? 1.0 : 0.0);
      d.active.assign(m, 0);
      decisions[mk] = std::move(d);
    }
  }

  // Pretty table on stdout.
  auto dec = [&](MethodKind mk) -> const MethodDecision* {
    auto it = decisions.find(mk);
    return it == decisions.end() ? nullptr : &it->second;
  };
  const MethodDecision* len = dec(MethodKind::LEN89);
  const MethodDecision* bp = dec(MethodKind::BP91);
  const MethodDecision* bm = dec(MethodKind::BM86);
  const MethodDecision* ln = dec(MethodKind::LN97);

  std::printf("%-7s %10s", "effect", "estimate");
  if (len) std::printf(" %11s", "len89_stat");
  if (bp) std::printf(" %11s", "bp91_stat");
  if (bm) std::printf(" %11s", "bm86_post");
  if (ln) std::printf(" %11s", "ln97_p");
  std::printf("  %s\n", "active_by");
  for (int j = 1; j <= m; ++j) {
    std::printf("%-7s %10.4f", design.effects[j].label.c_str(), est.values[j - 1]);
    std::string active;
    auto cell = [&](const MethodDecision* d, MethodKind mk) {
      if (!d) return;
      std::printf(" %10.4f%c", d->statistic[j - 1], d->active[j - 1] ? '*' : ' ');
      if (d->active[j - 1]) {
        if (!active.empty()) active += ' ';
        active += method_name(mk);
      }
    };
    cell(len, MethodKind::LEN89);
    cell(bp, MethodKind::BP91);
    cell(bm, MethodKind::BM86);
    cell(ln, MethodKind::LN97);
    std::printf("  %s\n", active.empty() ? "-" : active.c_str());
  }
  std::printf("\nintercept %.6g", est.intercept);
  if (len) std::printf("   pse %.6g", len->pse);
  if (bp) std::printf("   tmse %.6g", bp->tmse);
  std::printf("\n");

  if (opt.out.empty()) return 0;

  fs::create_directories(opt.out);

  // Decision table with the full fixed column set; methods that were not run
  // leave their fields empty.
  CsvWriter table((fs::path(opt.out) / "decisions.csv").string());
  table.write_row({"effect", "estimate", "len89_stat", "len89_active",
                   "bp91_stat", "bp91_active", "bm86_posterior", "bm86_active",
                   "ln97_p", "ln97_active"});
  for (int j = 1; j <= m; ++j) {
    std::vector<std::string> row;
    row.push_back(design.effects[j].label);
    row.push_back(format_double(est.values[j - 1]));
    auto put = [&](const MethodDecision* d) {
      if (!d) {
        row.push_back("");
        row.push_back("");
      } else {
        row.push_back(format_double(d->statistic[j - 1]));
        row.push_back(d->active[j - 1] ? "1" : "0");
      }
    };
    put(len);
    put(bp);
    put(bm);
    put(ln);
    table.write_row(row);
  }
  if (!table.good()) throw validation_error("failed writing decisions.csv");

  // Config/diagnostics sidecar.
  json sidecar;
  sidecar["input"] = {{"path", opt.input}, {"k", exp.k}, {"n_runs", design.n}};
  sidecar["seed"] = opt.seed;
  json ms = json::object();
  if (len) {
    ms["len89"] = {{"reference", opt.len89_reference},
                   {"critical_value", cfg.len89.critical_value},
                   {"pse", len->pse}};
    if (t_reference) {
      ms["len89"]["alpha"] = opt.alpha;
      ms["len89"]["p_values"] = len89_pvalues;
    }
  }
  if (bp) {
    ms["bp91"] = {{"trim_fraction", cfg.bp91.trim_fraction},
                  {"critical_value", cfg.bp91.critical_value},
                  {"tmse", bp->tmse}};
  }
  if (bm) {
    ms["bm86"] = {{"eta", cfg.bm86.eta},
                  {"inflation", cfg.bm86.inflation},
                  {"threshold", cfg.bm86.threshold}};
  }
  if (ln) {
    json steps = json::array();
    for (std::size_t s = 0; s < ln->step_effect.size(); ++s) {
      steps.push_back({{"effect", design.effects[ln->step_effect[s]].label},
                       {"p", ln->step_pvalues[s]}});
    }
    ms["ln97"] = {{"n_permutations", cfg.ln97.n_permutations},
                  {"max_steps", cfg.ln97.max_steps},
                  {"critical_values", cfg.ln97.critical_values},
                  {"steps", steps}};
  }
  sidecar["methods"] = ms;
  std::ofstream sf(fs::path(opt.out) / "analysis.json");
  sf << sidecar.dump(1) << "\n";
  if (!sf) throw validation_error("failed writing analysis.json");
  sf.close();

  RunManifest man;
  man.subcommand = "analyze";
  man.config = {{"input", opt.input},
                {"methods", methods_to_string(methods)},
                {"calib", opt.calib},
                {"seed", opt.seed},
                {"perms", opt.perms},
                {"len89_reference", opt.len89_reference},
                {"alpha", opt.alpha}};
  add_input_digest(man, "experiment", opt.input);
  if (!opt.calib.empty()) add_input_digest(man, "calibration", opt.calib);
  man.outputs.push_back("analysis.json");
  man.outputs.push_back("decisions.csv");
  write_manifest(opt.out, man);
  return 0;
}

// ---------------------------------------------------------------------------
// calibrate
// ---------------------------------------------------------------------------

struct CalibrateOpts {
  std::string method = "all";
  std::string out = "calibration.json";
  double ier = 0.05;
  long reps = 1825;
  std::uint64_t seed = 1;
  CalibrateOptions lib;  // k, perms, priors, trim, decay, workers
};

int cmd_calibrate(const CalibrateOpts& opt) {
  std::vector<MethodKind> methods = parse_method_list(opt.method);
  std::vector<CalibrationResult> results;
  for (MethodKind mk : methods) {
    std::cerr << "calibrating " << method_name(mk) << " (k = " << opt.lib.k
              << ", " << opt.reps << " null replications)...\n";
    results.push_back(
        calibrate_method(mk, opt.ier, opt.reps, SeedSpec{opt.seed, 0}, opt.lib));
    const CalibrationResult& r = results.back();
    std::printf("%s: ", method_name(mk));
    if (r.values.size() == 1) {
      std::printf("cutoff %.10g", r.values[0]);
    } else {
      std::printf("%zu step cutoffs [%.4g .. %.4g]", r.values.size(),
                  r.values.front(), r.values.back());
    }
    std::printf("  (achieved ier %.4f, target %.4f)\n", r.achieved_ier,
                r.target_ier);
  }
  json doc = calibration_to_json(results, opt.lib);
  if (fs::path(opt.out).has_parent_path()) {
    fs::create_directories(fs::path(opt.out).parent_path());
  }
  std::ofstream f(opt.out);
  f << doc.dump(1) << "\n";
  if (!f) throw validation_error("failed writing " + opt.out);
  return 0;
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

struct SimulateOpts {
  std::string scenarios = "table1";
  std::string calib;
  std::string out = "sim_out";
  std::string methods = "all";
  std::string from_manifest;
  long reps = 1825;
  std::uint64_t seed = 1;
  int perms = 1000;
  int workers = 1;
  bool sd_ratios = false;  // scenario file deltas are sd ratios, square them
};

std::uint64_t scenario_master_seed(std::uint64_t master, const std::string& instance_id) {
  return seed_combine(seed_combine(master, kDomainScenario), fnv1a64(instance_id));
}

int cmd_simulate(SimulateOpts opt) {
  json replay_inputs;
  if (!opt.from_manifest.empty()) {
    json man = read_manifest(opt.from_manifest);
    if (man.value("subcommand", "") != "simulate") {
      throw config_error("manifest was not produced by `simulate` (subcommand: '" +
                         man.value("subcommand", "") + "')");
    }
    const json& c = man.at("config");
    opt.scenarios = c.at("scenarios").get<std::string>();
    opt.calib = c.value("calib", "");
    opt.methods = c.value("methods", "all");
    opt.reps = c.at("reps").get<long>();
    opt.seed = c.at("seed").get<std::uint64_t>();
    opt.perms = c.at("perms").get<int>();
    opt.workers = c.value("workers", 1);
    opt.sd_ratios = c.value("sd_ratios", false);
    if (man.contains("inputs")) replay_inputs = man["inputs"];
  }

  RunManifest man;
  man.subcommand = "simulate";

  std::vector<Scenario> scenarios;
  if (opt.scenarios == "table1") {
    if (opt.sd_ratios) {
      throw config_error(
          "--sd-ratios applies to scenario files; the table1 grid is defined "
          "on variance ratios");
    }
    scenarios = table1_scenarios();
  } else {
    std::ifstream f(opt.scenarios);
    if (!f) throw config_error("cannot open scenario file: " + opt.scenarios);
    json doc = json::parse(f);
    scenarios = parse_scenarios_json(doc);
    if (opt.sd_ratios) {
      for (Scenario& sc : scenarios) sc.delta *= sc.delta;
    }
    add_input_digest(man, "scenarios", opt.scenarios);
  }

  MethodConfig cfg;
  if (!opt.calib.empty()) {
    apply_calibration(load_calibration_file(opt.calib), cfg);
    add_input_digest(man, "calibration", opt.calib);
  }
  cfg.ln97.n_permutations = opt.perms;

  // When replaying a manifest, refuse silently different inputs.
  if (replay_inputs.is_object()) {
    for (auto& [name, entry] : replay_inputs.items()) {
      if (!man.inputs.contains(name)) continue;
      std::string then = entry.value("sha256", "");
      std::string now = man.inputs[name].value("sha256", "");
      if (!then.empty() && then != now) {
        throw validation_error("input '" + name + "' (" +
                               entry.value("path", "") +
                               ") changed since the manifest was written");
      }
    }
  }

  std::vector<MethodKind> methods = parse_method_list(opt.methods);

  fs::create_directories(fs::path(opt.out) / "rr");
  CsvWriter summary((fs::path(opt.out) / "summary.csv").string());
  summary.write_row(
      {"method", "scenario", "delta", "epower", "ier", "eer", "ap", "jp"});
  CsvWriter hist((fs::path(opt.out) / "hist.csv").string());
  hist.write_row({"method", "scenario", "delta", "epower", "h0", "h1", "h2",
                  "h3", "h4", "h5", "h6", "h7plus", "ier", "eer"});

  json seed_map = json::object();
  std::vector<std::string> rr_files;
  for (std::size_t si = 0; si < scenarios.size(); ++si) {
    const Scenario& sc = scenarios[si];
    const std::string id = sc.instance_id();
    std::cerr << "[" << (si + 1) << "/" << scenarios.size() << "] " << id << "\n";
    const std::uint64_t scen_master = scenario_master_seed(opt.seed, id);
    seed_map[id] = scen_master;

    std::vector<MetricsRecord> records = run_scenario(
        sc, methods, cfg, opt.reps, SeedSpec{scen_master, 0}, opt.workers);

    const std::string rr_name = "rr/" + id + ".csv";
    rr_files.push_back(rr_name);
    CsvWriter rr((fs::path(opt.out) / rr_name).string());
    rr.write_row({"method", "effect", "rr"});
    for (const MetricsRecord& rec : records) {
      const std::string ep = rec.epower_target ? format_double(*rec.epower_target)
                                               : std::string();
      for (std::size_t j = 0; j < rec.rr.size(); ++j) {
        rr.write_row({method_name(rec.method),
                      effect_label(static_cast<int>(j) + 1, rec.k),
                      format_double(rec.rr[j])});
      }
      summary.write_row({method_name(rec.method), rec.scenario_family,
                         format_double(rec.delta), ep, format_double(rec.ier),
                         format_double(rec.eer), opt_str(rec.ap),
                         opt_str(rec.jp)});
      std::vector<std::string> hrow = {method_name(rec.method),
                                       rec.scenario_family,
                                       format_double(rec.delta), ep};
      for (double h : rec.false_rejections) hrow.push_back(format_double(h));
      hrow.push_back(format_double(rec.ier));
      hrow.push_back(format_double(rec.eer));
      hist.write_row(hrow);
    }
    if (!rr.good()) throw validation_error("failed writing " + rr_name);
  }
  if (!summary.good() || !hist.good()) {
    throw validation_error("failed writing summary/hist CSVs");
  }

  man.config = {{"scenarios", opt.scenarios}, {"reps", opt.reps},
                {"seed", opt.seed},           {"perms", opt.perms},
                {"workers", opt.workers},     {"methods", opt.methods},
                {"calib", opt.calib},         {"sd_ratios", opt.sd_ratios},
                {"scenario_seeds", seed_map}};
  man.outputs.push_back("hist.csv");
  man.outputs.push_back("summary.csv");
  std::sort(rr_files.begin(), rr_files.end());
  for (const std::string& f : rr_files) man.outputs.push_back(f);
  write_manifest(opt.out, man);
  return 0;
}

// ---------------------------------------------------------------------------
// report
// ---------------------------------------------------------------------------

struct ReportOpts {
  std::string in;
  std::string out = "report_out";
};

struct SummaryRow {
  std::string method;
  std::string scenario;
  double delta = 0.0;
  std::string epower;
  std::map<std::string, std::string> metric;  // name -> raw field
};

double parse_or_nan(const std::string& s) {
  if (s.empty()) return std::nan("");
  return std::stod(s);
}

int cmd_report(const ReportOpts& opt) {
  const fs::path in(opt.in);
  CsvTable summary = read_csv((in / "summary.csv").string());
  const int c_method = summary.column("method");
  const int c_scen = summary.column("scenario");
  const int c_delta = summary.column("delta");
  const int c_epower = summary.column("epower");
  if (c_method < 0 || c_scen < 0 || c_delta < 0 || c_epower < 0) {
    throw validation_error("summary.csv is missing required columns");
  }
  static const char* kMetrics[] = {"ier", "eer", "ap", "jp"};
  std::map<std::string, int> metric_col;
  for (const char* mname : kMetrics) {
    int c = summary.column(mname);
    if (c < 0) throw validation_error(std::string("summary.csv lacks column ") + mname);
    metric_col[mname] = c;
  }

  std::vector<SummaryRow> rows;
  for (const auto& r : summary.rows) {
    SummaryRow row;
    row.method = r[c_method];
    row.scenario = r[c_scen];
    row.delta = std::stod(r[c_delta]);
    row.epower = r[c_epower];
    for (const char* mname : kMetrics) row.metric[mname] = r[metric_col[mname]];
    rows.push_back(std::move(row));
  }

  fs::create_directories(opt.out);
  RunManifest man;
  man.subcommand = "report";
  man.config = {{"in", opt.in}};
  add_input_digest(man, "summary", (in / "summary.csv").string());

  // One chart per (scenario, epower, metric): rate vs delta, one line per method.
  std::map<std::pair<std::string, std::string>, std::vector<const SummaryRow*>> groups;
  for (const SummaryRow& r : rows) groups[{r.scenario, r.epower}].push_back(&r);

  std::vector<std::string> svg_names;
  for (const auto& [key, grp] : groups) {
    const auto& [scen, epower] = key;
    std::vector<double> deltas;
    for (const SummaryRow* r : grp) deltas.push_back(r->delta);
    std::sort(deltas.begin(), deltas.end());
    deltas.erase(std::unique(deltas.begin(), deltas.end()), deltas.end());
    std::vector<std::string> x_labels;
    for (double d : deltas) x_labels.push_back(format_double(d));

    std::string suffix;
    if (!epower.empty()) {
      int pct = static_cast<int>(std::lround(std::stod(epower) * 100));
      suffix = "_e" + std::to_string(pct);
    }
    for (const char* mname : kMetrics) {
      std::vector<ChartSeries> series;
      bool any = false;
      for (MethodKind mk : kAllMethods) {
        ChartSeries s;
        s.name = method_name(mk);
        s.values.assign(deltas.size(), std::nan(""));
        bool present = false;
        for (const SummaryRow* r : grp) {
          if (r->method != method_name(mk)) continue;
          auto it = std::find(deltas.begin(), deltas.end(), r->delta);
          double v = parse_or_nan(r->metric.at(mname));
          if (!std::isnan(v)) {
            s.values[it - deltas.begin()] = v;
            present = true;
          }
        }
        if (present) {
          series.push_back(std::move(s));
          any = true;
        }
      }
      if (!any) continue;
      std::string metric_upper = mname;
      std::transform(metric_upper.begin(), metric_upper.end(),
                     metric_upper.begin(), ::toupper);
      std::string fname = std::string(mname) + "_" + scen + suffix + ".svg";
      std::string title = metric_upper + "  " + scen;
      if (!epower.empty()) title += "  (effect power " + epower + ")";
      write_rate_chart((fs::path(opt.out) / fname).string(), title,
                       metric_upper, x_labels, series);
      svg_names.push_back(fname);
    }
  }

  // Null-model false-rejection profile (homoscedastic rows of hist.csv).
  const fs::path hist_path = in / "hist.csv";
  bool wrote_table = false;
  if (fs::exists(hist_path)) {
    add_input_digest(man, "hist", hist_path.string());
    CsvTable hist = read_csv(hist_path.string());
    const int h_method = hist.column("method");
    const int h_scen = hist.column("scenario");
    const int h_delta = hist.column("delta");
    const int h_epower = hist.column("epower");
    const int h_first = hist.column("h0");
    const int h_ier = hist.column("ier");
    const int h_eer = hist.column("eer");
    if (h_method >= 0 && h_scen >= 0 && h_delta >= 0 && h_epower >= 0 &&
        h_first >= 0 && h_ier >= 0 && h_eer >= 0) {
      std::map<std::string, std::vector<const std::vector<std::string>*>> null_rows;
      for (const auto& r : hist.rows) {
        if (r[h_epower].empty() && std::stod(r[h_delta]) == 1.0) {
          null_rows[r[h_scen]].push_back(&r);
        }
      }
      if (!null_rows.empty()) {
        std::ofstream tf(fs::path(opt.out) / "table2.txt");
        tf << "Null-model false-rejection profile (no location effects, "
              "homoscedastic runs)\n"
           << "Cell (method, c): share of replications declaring exactly c "
              "effects active\n";
        for (const auto& [scen, rlist] : null_rows) {
          tf << "\nscenario " << scen << "\n";
          tf << "method      0      1      2      3      4      5      6    "
                ">=7    IER    EER\n";
          for (const auto* r : rlist) {
            char buf[160];
            int off = std::snprintf(buf, sizeof buf, "%-6s",
                                    (*r)[h_method].c_str());
            for (int c = 0; c < 8; ++c) {
              off += std::snprintf(buf + off, sizeof buf - off, " %6.3f",
                                   std::stod((*r)[h_first + c]));
            }
            off += std::snprintf(buf + off, sizeof buf - off, " %6.3f %6.3f",
                                 std::stod((*r)[h_ier]), std::stod((*r)[h_eer]));
            tf << buf << "\n";
          }
        }
        if (!tf) throw validation_error("failed writing table2.txt");
        wrote_table = true;
      }
    }
  }

  std::sort(svg_names.begin(), svg_names.end());
  for (const std::string& f : svg_names) man.outputs.push_back(f);
  if (wrote_table) man.outputs.push_back("table2.txt");
  write_manifest(opt.out, man);
  std::cout << "wrote " << svg_names.size() << " charts"
            << (wrote_table ? " and table2.txt" : "") << " to " << opt.out
            << "\n";
  return 0;
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{
      "effscreen: screen unreplicated two-level factorial experiments for "
      "active location effects (Lenth 1989, Box-Meyer 1986, Berk-Picard 1991, "
      "Loughin-Noble 1997) and measure the methods' error rates under "
      "multiplicative dispersion effects"};
  app.set_version_flag("--version", std::string("effscreen ") + kVersion);
  app.require_subcommand(1);

  AnalyzeOpts a;
  CLI::App* an = app.add_subcommand(
      "analyze", "Run the screening methods on an experiment CSV");
  an->add_option("experiment", a.input,
                 "CSV with one column per factor (A, B, ...) and a y column")
      ->required();
  an->add_option("--calib", a.calib, "calibration JSON from `calibrate`");
  CLI::Option* methods_opt =
      an->add_option("--methods", a.methods,
                     "comma list of len89,bm86,bp91,ln97 (default all)");
  an->add_option("--out", a.out, "output directory (decision table + sidecar)");
  an->add_option("--seed", a.seed, "master seed for the permutation test")
      ->default_val(a.seed);
  an->add_option("--perms", a.perms, "permutations per step-up step")
      ->default_val(a.perms)
      ->check(CLI::PositiveNumber);
  an->add_option("--len89-reference", a.len89_reference,
                 "lenth reference: calibrated cutoff or t (t_{m/3} p-values)")
      ->check(CLI::IsMember({"calibrated", "t"}));
  an->add_option("--alpha", a.alpha, "alpha for --len89-reference t")
      ->default_val(a.alpha);

  CalibrateOpts c;
  CLI::App* ca = app.add_subcommand(
      "calibrate", "Monte Carlo critical values hitting a target IER");
  ca->add_option("--method", c.method, "len89|bm86|bp91|ln97|all")
      ->default_val(c.method);
  ca->add_option("--ier", c.ier, "target individual error rate")
      ->default_val(c.ier);
  ca->add_option("--reps", c.reps, "null replications")->default_val(c.reps);
  ca->add_option("--seed", c.seed, "master seed")->default_val(c.seed);
  ca->add_option("--out", c.out, "output JSON file")->default_val(c.out);
  ca->add_option("--k", c.lib.k, "number of factors")->default_val(c.lib.k);
  ca->add_option("--perms", c.lib.n_permutations,
                 "permutations per step when calibrating ln97")
      ->default_val(c.lib.n_permutations);
  ca->add_option("--trim", c.lib.trim_fraction, "bp91 trim fraction")
      ->default_val(c.lib.trim_fraction);
  ca->add_option("--eta", c.lib.eta, "bm86 prior activity probability")
      ->default_val(c.lib.eta);
  ca->add_option("--inflation", c.lib.inflation,
                 "bm86 active-effect variance inflation")
      ->default_val(c.lib.inflation);
  ca->add_option("--decay", c.lib.level_decay,
                 "ln97 per-step quantile-level decay exponent")
      ->default_val(c.lib.level_decay);
  ca->add_option("--workers", c.lib.workers, "parallel workers")
      ->default_val(c.lib.workers);

  SimulateOpts s;
  CLI::App* si = app.add_subcommand(
      "simulate", "Run the scenario grid and write per-scenario metrics");
  si->add_option("--scenarios", s.scenarios, "table1 or a scenario JSON file")
      ->default_val(s.scenarios);
  si->add_option("--reps", s.reps, "replications per scenario")
      ->default_val(s.reps);
  si->add_option("--seed", s.seed, "master seed")->default_val(s.seed);
  si->add_option("--calib", s.calib, "calibration JSON from `calibrate`");
  si->add_option("--out", s.out, "output directory")->default_val(s.out);
  si->add_option("--methods", s.methods,
                 "comma list of len89,bm86,bp91,ln97 (default all)");
  si->add_option("--perms", s.perms, "ln97 permutations per step")
      ->default_val(s.perms)
      ->check(CLI::PositiveNumber);
  si->add_option("--workers", s.workers, "parallel workers")
      ->default_val(s.workers)
      ->check(CLI::PositiveNumber);
  si->add_option("--from-manifest", s.from_manifest,
                 "replay the configuration recorded in a simulate manifest");
  si->add_flag("--sd-ratios", s.sd_ratios,
               "scenario-file delta values are standard-deviation ratios "
               "(squared into variance ratios)");

  ReportOpts r;
  CLI::App* re = app.add_subcommand(
      "report", "Charts and the null-model table from simulate output");
  re->add_option("--in", r.in, "simulate output directory")->required();
  re->add_option("--out", r.out, "report output directory")->default_val(r.out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (an->parsed()) {
      a.methods_explicit = methods_opt->count() > 0;
      return cmd_analyze(a);
    }
    if (ca->parsed()) return cmd_calibrate(c);
    if (si->parsed()) return cmd_simulate(s);
    if (re->parsed()) return cmd_report(r);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace effscreen
