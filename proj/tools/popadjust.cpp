// Copyright 2026 The popadjust Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// popadjust: command-line front end for the population adjustment library.

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "popadj/datagen.hpp"
#include "popadj/errors.hpp"
#include "popadj/io.hpp"
#include "popadj/itc.hpp"
#include "popadj/maic.hpp"
#include "popadj/metrics.hpp"
#include "popadj/plot.hpp"
#include "popadj/simengine.hpp"
#include "popadj/stc.hpp"

namespace fs = std::filesystem;
using namespace popadj;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;
constexpr std::uint64_t kDefaultSeed = 20240601;

// Bad flag values found after CLI11 parsing; reported with exit code 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string fmt(const char* spec, ...) {
  char buf[256];
  va_list args;
  va_start(args, spec);
  std::vsnprintf(buf, sizeof buf, spec, args);
  va_end(args);
  return buf;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep))
    if (!item.empty()) out.push_back(item);
  return out;
}

// "x1,x2" or "1,2" -> {0, 1}
std::vector<std::size_t> parse_covariate_list(const std::string& s) {
  std::vector<std::size_t> out;
  for (std::string item : split(s, ',')) {
    if (!item.empty() && (item[0] == 'x' || item[0] == 'X')) item.erase(0, 1);
    long long k = 0;
    try {
      k = parse_integer(item);
    } catch (const ConfigError&) {
      throw UsageError("bad covariate '" + item + "' (use x1..x4)");
    }
    if (k < 1 || k > static_cast<long long>(kNumCovariates))
      throw UsageError("covariate index out of range: " + item + " (use x1..x4)");
    out.push_back(static_cast<std::size_t>(k - 1));
  }
  if (out.empty()) throw UsageError("at least one effect modifier is required");
  return out;
}

// "1-10,15" -> {1..10, 15}
std::set<int> parse_id_list(const std::string& s) {
  std::set<int> ids;
  for (const std::string& item : split(s, ',')) {
    const auto dash = item.find('-');
    try {
      if (dash == std::string::npos) {
        ids.insert(static_cast<int>(parse_integer(item)));
      } else {
        const auto lo = parse_integer(item.substr(0, dash));
        const auto hi = parse_integer(item.substr(dash + 1));
        if (hi < lo) throw UsageError("empty scenario range " + item);
        for (auto i = lo; i <= hi; ++i) ids.insert(static_cast<int>(i));
      }
    } catch (const ConfigError&) {
      throw UsageError("bad scenario list '" + s + "'");
    }
  }
  return ids;
}

bool in_list(double value, const std::vector<double>& list) {
  if (list.empty()) return true;
  return std::any_of(list.begin(), list.end(), [&](double v) { return std::abs(v - value) < 1e-9; });
}

std::vector<double> hr_to_coef(const std::vector<double>& hrs) {
  std::vector<double> out;
  for (double hr : hrs) {
    if (!(hr > 0.0)) throw UsageError("hazard ratios must be positive");
    out.push_back(-std::log(hr));
  }
  return out;
}

// ---------------------------------------------------------------- analyze

struct AnalyzeOptions {
  std::string ipd;
  std::string ald;
  std::string em = "x1,x2";
  double level = 0.95;
  std::string variance = "sandwich";
  int bootstrap_reps = 1000;
  std::uint64_t seed = kDefaultSeed;
};

void print_estimate(std::ostream& os, const std::string& label, const EstimateWithSE& e,
                    double level) {
  const IntervalEstimate ci = confidence_interval(e, level);
  os << "  " << label << '\n'
     << fmt("    log HR %9.4f   SE %7.4f   %g%% CI (%.4f, %.4f)   HR %.4f\n", e.value(), e.se(),
            100 * level, ci.lower, ci.upper, std::exp(e.value()));
}

void print_balance(std::ostream& os, const IpdTrial& ipd, const ObservationWeights& w,
                   const AldSummary& bc, const std::vector<std::size_t>& em) {
  const Covariates before = weighted_covariate_means(ipd, ObservationWeights::unit(ipd.size()));
  const Covariates after = weighted_covariate_means(ipd, w);
  os << "  balance     before      after     target   |after - target|\n";
  for (std::size_t k : em)
    os << fmt("    x%zu   %9.4f  %9.4f  %9.4f   %.2e\n", k + 1, before[k], after[k],
              bc.covariate_means[k], std::abs(after[k] - bc.covariate_means[k]));
}

VarianceMethod variance_method(const std::string& name, int reps) {
  if (name == "sandwich") return VarianceMethod::sandwich();
  if (name == "bootstrap") {
    if (reps < 2) throw UsageError("--bootstrap-reps must be at least 2");
    return VarianceMethod::bootstrap(reps);
  }
  throw UsageError("unknown variance method '" + name + "' (sandwich, bootstrap)");
}

std::string variance_label(const VarianceMethod& v) {
  return v.kind == VarianceMethod::Kind::kSandwich ? "sandwich"
                                                    : "bootstrap:" + std::to_string(v.resamples);
}

void report_maic(std::ostream& os, const IpdTrial& ipd, const AldSummary& bc,
                 const std::vector<std::size_t>& em, const MaicResult& r, double level) {
  os << "MAIC (n = " << ipd.size() << ")\n";
  print_estimate(os, "marginal log HR, A vs C in the BC population", r.effect, level);
  print_estimate(os, "indirect A vs B", indirect_comparison(r.effect, bc.effect), level);
  const double n = static_cast<double>(ipd.size());
  os << fmt("  ESS %.1f of %zu (%.1f%% reduction)\n", r.weights.ess, ipd.size(),
            100.0 * (1.0 - r.weights.ess / n));
  os << "  alpha1";
  for (Eigen::Index j = 0; j < r.weights.alpha1.size(); ++j)
    os << fmt("  x%zu=%.6f", em[static_cast<std::size_t>(j)] + 1, r.weights.alpha1[j]);
  os << '\n';
  if (r.bootstrap_failures) os << "  bootstrap resamples without finite weights: " << r.bootstrap_failures << '\n';
  print_balance(os, ipd, r.weights.weights, bc, em);
}

void report_stc(std::ostream& os, const AldSummary& bc, const StcResult& r, double level) {
  os << "STC\n";
  print_estimate(os, "conditional log HR (A vs C, BC-centered)", r.effect, level);
  print_estimate(os, "indirect A vs B", indirect_comparison(r.effect, bc.effect), level);
}

void report_bucher(std::ostream& os, const IpdTrial& ipd, const AldSummary& bc, double level) {
  os << "Bucher (unadjusted)\n";
  print_estimate(os, "log HR, A vs C in the AC population", unadjusted_effect(ipd), level);
  print_estimate(os, "indirect A vs B", bucher_estimate(ipd, bc), level);
}

void cmd_analyze(const std::string& method, const AnalyzeOptions& o) {
  const IpdTrial ipd = read_ipd_csv_file(o.ipd);
  const AldSummary bc = read_ald_file(o.ald);
  const auto em = parse_covariate_list(o.em);
  if (!(o.level > 0.0 && o.level < 1.0)) throw UsageError("--level must lie in (0, 1)");
  if (method == "maic") {
    const VarianceMethod v = variance_method(o.variance, o.bootstrap_reps);
    const MaicResult r = maic_estimate(ipd, bc, em, v, RandomStream(o.seed));
    report_maic(std::cout, ipd, bc, em, r, o.level);
    std::cout << "  SE method: " << (v.kind == VarianceMethod::Kind::kSandwich ? "robust sandwich" : "bootstrap") << '\n';
  } else if (method == "stc") {
    StcModelSpec spec;
    spec.effect_modifier_columns = em;
    report_stc(std::cout, bc, stc_estimate(ipd, bc, spec), o.level);
  } else {
    report_bucher(std::cout, ipd, bc, o.level);
  }
}

// ------------------------------------------------------------------- demo

void cmd_demo(std::uint64_t seed, const std::string& write_dir) {
  const Scenario s = build_grid()[0];
  const StudyConstants c;
  const auto sid = static_cast<std::uint64_t>(s.id);
  RandomStream ac_rng = RandomStream::derive(seed, {sid, 1, static_cast<std::uint64_t>(StreamRole::kAcTrial)});
  RandomStream bc_rng = RandomStream::derive(seed, {sid, 1, static_cast<std::uint64_t>(StreamRole::kBcTrial)});
  const OutcomeModelParams params = outcome_params(s, c);
  const IpdTrial ac = generate_trial(ac_covariates(s, c), params, static_cast<std::size_t>(s.n_ac), ac_rng);
  const AldSummary bc = aggregate_trial(generate_trial(bc_covariates(s, c), params,
                                                      static_cast<std::size_t>(c.bc_n), bc_rng));
  std::cout << "Scenario " << s.id << ": n_ac " << s.n_ac
            << fmt(", prognostic HR %.2f, interaction HR %.2f, rho %.2f, AC mean %.2f, BC mean %.2f\n",
                   std::exp(-s.prognostic_coef), std::exp(-s.interaction_coef), s.correlation,
                   s.ac_covariate_mean, c.bc_covariate_mean)
            << "seed " << seed << ", true marginal A vs B log HR " << kTrueEffect << "\n\n";
  std::cout << "Published B vs C summary\n";
  print_estimate(std::cout, "log HR, B vs C", bc.effect, 0.95);
  std::cout << '\n';

  const MaicResult maic = maic_estimate(ac, bc, c.effect_modifiers);
  report_maic(std::cout, ac, bc, c.effect_modifiers, maic, 0.95);
  std::cout << '\n';
  StcModelSpec spec;
  const StcResult stc = stc_estimate(ac, bc, spec);
  report_stc(std::cout, bc, stc, 0.95);
  std::cout << '\n';
  report_bucher(std::cout, ac, bc, 0.95);

  std::cout << "\nA vs B comparison (truth 0)\n"
            << "  method      log HR       SE        95% CI\n";
  const auto row = [](const char* name, const EstimateWithSE& e) {
    const IntervalEstimate ci = confidence_interval(e);
    std::cout << fmt("  %-8s %9.4f  %7.4f  (%.4f, %.4f)\n", name, e.value(), e.se(), ci.lower, ci.upper);
  };
  row("maic", indirect_comparison(maic.effect, bc.effect));
  row("stc", indirect_comparison(stc.effect, bc.effect));
  row("bucher", bucher_estimate(ac, bc));

  if (!write_dir.empty()) {
    fs::create_directories(write_dir);
    write_ipd_csv_file(fs::path(write_dir) / "ac_ipd.csv", ac);
    write_ald_file(fs::path(write_dir) / "bc_ald.txt", bc);
    std::cout << "\nwrote " << (fs::path(write_dir) / "ac_ipd.csv").string() << " and "
              << (fs::path(write_dir) / "bc_ald.txt").string() << '\n';
  }
}

// -------------------------------------------------------------------- run

struct RunOptions {
  std::string scenarios = "desk";
  std::vector<int> n_ac;
  std::vector<double> prognostic_hr;
  std::vector<double> interaction_hr;
  std::vector<double> rho;
  std::vector<double> ac_mean;
  int reps = 1000;
  std::uint64_t seed = kDefaultSeed;
  int workers = 0;
  std::string out = "popadjust-run";
  std::string variance = "sandwich";
  int bootstrap_reps = 1000;
  bool recalibrate = false;
  double censoring_target = 0.35;
  double covariate_sd = std::sqrt(0.2);
  bool overwrite = false;
  bool quiet = false;
};

std::vector<Scenario> select_grid(const RunOptions& o) {
  std::vector<Scenario> base;
  if (o.scenarios == "all") {
    base = build_grid();
  } else if (o.scenarios == "desk") {
    base = desk_grid();
  } else {
    const std::set<int> ids = parse_id_list(o.scenarios);
    base = build_grid([&](const Scenario& s) { return ids.count(s.id) > 0; });
    if (base.size() != ids.size()) throw UsageError("scenario ids must lie in 1..162");
  }
  const auto prog = hr_to_coef(o.prognostic_hr);
  const auto inter = hr_to_coef(o.interaction_hr);
  std::vector<double> n_ac(o.n_ac.begin(), o.n_ac.end());
  std::vector<Scenario> grid;
  for (const Scenario& s : base)
    if (in_list(s.n_ac, n_ac) && in_list(s.prognostic_coef, prog) &&
        in_list(s.interaction_coef, inter) && in_list(s.correlation, o.rho) &&
        in_list(s.ac_covariate_mean, o.ac_mean))
      grid.push_back(s);
  if (grid.empty()) throw UsageError("the scenario filters select no scenarios");
  return grid;
}

void print_failures(const std::vector<ReplicateResult>& rows) {
  std::map<std::pair<Method, Status>, int> counts;
  for (const auto& r : rows)
    if (r.status != Status::kOk) ++counts[{r.method, r.status}];
  if (counts.empty()) {
    std::cout << "failures: none\n";
    return;
  }
  std::cout << "failures (excluded from the summary):\n";
  for (const auto& [key, n] : counts)
    std::cout << "  " << to_string(key.first) << ' ' << to_string(key.second) << ": " << n << '\n';
}

void print_ess(const std::vector<ReplicateResult>& rows, const std::vector<Scenario>& grid) {
  std::map<int, Scenario> by_id;
  for (const auto& s : grid) by_id[s.id] = s;
  std::map<double, std::pair<double, int>> acc;
  for (const auto& r : rows)
    if (r.method == Method::kMaic && r.status == Status::kOk) {
      const Scenario& s = by_id.at(r.scenario_id);
      auto& [sum, n] = acc[s.ac_covariate_mean];
      sum += 100.0 * (1.0 - r.ess / s.n_ac);
      ++n;
    }
  if (acc.empty()) return;
  std::cout << "mean MAIC ESS reduction by AC covariate mean:";
  for (auto it = acc.rbegin(); it != acc.rend(); ++it)
    std::cout << fmt("  %.2f: %.1f%%", it->first, it->second.first / it->second.second);
  std::cout << '\n';
}

int cmd_run(const RunOptions& o) {
  if (o.reps < 1) throw UsageError("--reps must be at least 1");
  if (o.workers < 0) throw UsageError("--workers must be positive");
  if (!(o.covariate_sd > 0.0)) throw UsageError("--covariate-sd must be positive");
  const std::vector<Scenario> grid = select_grid(o);
  const int workers = o.workers > 0 ? o.workers : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));

  EngineConfig config;
  config.constants.covariate_sd = o.covariate_sd;
  config.maic_variance = variance_method(o.variance, o.bootstrap_reps);
  if (o.recalibrate) {
    RandomStream probe = RandomStream::derive(o.seed, {0, 0, static_cast<std::uint64_t>(StreamRole::kProbe)});
    config.constants.censoring_rate = calibrate_censoring_rate(
        o.censoring_target, outcome_params(grid.front(), config.constants), 1000000, probe);
    std::cout << "calibrated censoring rate " << format_double(config.constants.censoring_rate)
              << " for target " << o.censoring_target << '\n';
  }

  const fs::path dir(o.out);
  const fs::path results_path = dir / "replicates.csv";
  const fs::path summary_path = dir / "summary.csv";
  const fs::path manifest_path = dir / "manifest.txt";
  fs::create_directories(dir);

  RunManifest manifest{o.seed, grid_hash(grid), POPADJ_VERSION, o.reps, variance_label(config.maic_variance),
                       describe(config.constants)};

  std::vector<ReplicateResult> previous;
  if (fs::exists(results_path) && !o.overwrite) {
    std::ifstream mf(manifest_path);
    if (!mf) throw UsageError(results_path.string() + " exists without a manifest; use --overwrite");
    const RunManifest old = read_manifest(mf);
    if (old.seed_root != manifest.seed_root || old.grid_hash != manifest.grid_hash ||
        old.maic_variance != manifest.maic_variance || old.constants != manifest.constants)
      throw UsageError("existing results in " + dir.string() +
                       " were produced with different settings; use --overwrite or another --out");
    if (old.version != manifest.version)
      std::cerr << "warning: resuming results written by version " << old.version << '\n';
    std::ifstream in(results_path);
    previous = read_results_csv(in);
  }
  // Keep whole replicates only; a partly written one is run again.
  const auto done = completed_replicates(previous);
  std::erase_if(previous, [&](const ReplicateResult& r) { return !done.count({r.scenario_id, r.replicate_id}); });

  // Rewrite the kept rows so that a torn trailing line does not survive.
  {
    std::ofstream os(results_path, std::ios::trunc);
    write_results_header(os);
    for (const auto& r : previous) write_result(os, r);
    if (!os) throw std::runtime_error("cannot write " + results_path.string());
  }
  {
    std::ofstream os(manifest_path, std::ios::trunc);
    write_manifest(os, manifest);
  }

  std::ofstream append(results_path, std::ios::app);
  StudyHooks hooks;
  hooks.skip = [&](int sid, int rid) { return done.count({sid, rid}) > 0; };
  hooks.on_replicate = [&](const std::array<ReplicateResult, 3>& triple) {
    for (const auto& r : triple) write_result(append, r);
    append.flush();
  };
  std::size_t next_report = 0;
  if (!o.quiet)
    hooks.on_progress = [&](std::size_t k, std::size_t total) {
      if (k * 10 >= next_report * total || k == total) {
        std::cerr << "replicates " << k << '/' << total << '\n';
        next_report = k * 10 / total + 1;
      }
    };
  if (!o.quiet && !done.empty()) std::cerr << "resuming: " << done.size() << " replicates on disk\n";

  std::vector<ReplicateResult> rows = run_study(grid, o.reps, o.seed, workers, config, hooks);
  append.close();
  if (!append) throw std::runtime_error("error writing " + results_path.string());

  std::set<int> ids;
  for (const auto& s : grid) ids.insert(s.id);
  for (const auto& r : previous)
    if (ids.count(r.scenario_id) && r.replicate_id <= o.reps)
      rows.push_back(r);
  std::sort(rows.begin(), rows.end(), result_less);

  std::cout << grid.size() << " scenarios x " << o.reps << " replicates, seed " << o.seed << ", "
            << workers << " workers\n";
  print_failures(rows);
  print_ess(rows, grid);
  const auto summary = summarize(rows);
  std::ofstream so(summary_path, std::ios::trunc);
  write_summary_csv(so, summary);
  if (!so) throw std::runtime_error("cannot write " + summary_path.string());
  int flagged = 0;
  for (const auto& p : summary) flagged += p.problematic_bias();
  std::cout << "cells with |standardized bias| > " << kProblematicStdBiasPct << "%: " << flagged << " of "
            << summary.size() << '\n'
            << "wrote " << results_path.string() << ", " << summary_path.string() << ", "
            << manifest_path.string() << '\n';
  return 0;
}

// ------------------------------------------------------ summarize & plot

void cmd_summarize(const std::string& in_path, const std::string& out_path, double level) {
  std::ifstream in(in_path);
  if (!in) throw std::runtime_error("cannot open " + in_path);
  const auto summary = summarize(read_results_csv(in), kTrueEffect, level);
  if (out_path.empty()) {
    write_summary_csv(std::cout, summary);
    return;
  }
  std::ofstream os(out_path);
  write_summary_csv(os, summary);
  if (!os) throw std::runtime_error("cannot write " + out_path);
}

void cmd_plot(const std::string& summary_path, const std::string& metric, std::string prefix) {
  if (!is_plot_metric(metric)) throw UsageError("unknown metric '" + metric + "' (bias, vr, coverage, ese, mse)");
  std::ifstream in(summary_path);
  if (!in) throw std::runtime_error("cannot open " + summary_path);
  const NestedLoopPlot plot = build_nested_loop_plot(read_summary_csv(in), metric);
  if (prefix.empty()) prefix = (fs::path(summary_path).parent_path() / ("plot_" + metric)).string();
  std::ofstream csv(prefix + ".csv");
  write_plot_csv(csv, plot);
  std::ofstream svg(prefix + ".svg");
  write_plot_svg(svg, plot);
  if (!csv || !svg) throw std::runtime_error("cannot write " + prefix + ".csv/.svg");
  std::cout << "wrote " << prefix << ".csv and " << prefix << ".svg (" << plot.scenario_ids.size()
            << " scenarios)\n";
}

void cmd_calibrate(double target, std::size_t probe, std::uint64_t seed) {
  const StudyConstants c;
  const OutcomeModelParams params = outcome_params(build_grid()[0], c);
  RandomStream rng(seed);
  const double rate = calibrate_censoring_rate(target, params, probe, rng);
  std::cout << "censoring rate " << format_double(rate) << " (target censored proportion " << target
            << ", " << probe << " probe subjects, seed " << seed << ")\n";
}

// Values from the file fill options not given as flags or through the
// environment. Keys may be bare or under a [run] section.
void apply_config_file(CLI::App& cmd, const std::string& path) {
  std::vector<CLI::ConfigItem> items;
  try {
    items = CLI::ConfigTOML().from_file(path);
  } catch (const CLI::Error& e) {
    throw UsageError("cannot read config file " + path + ": " + e.what());
  }
  for (const CLI::ConfigItem& item : items) {
    if (item.name == "++" || item.name == "--") continue;  // section markers
    if (!item.parents.empty() && !(item.parents.size() == 1 && item.parents[0] == "run"))
      throw UsageError("config file " + path + ": unexpected section for '" + item.fullname() + "'");
    CLI::Option* opt = cmd.get_option_no_throw("--" + item.name);
    if (opt == nullptr || item.name == "config")
      throw UsageError("config file " + path + ": unknown key '" + item.name + "'");
    if (opt->count() > 0) continue;
    try {
      opt->add_result(item.inputs);
      opt->run_callback();
    } catch (const CLI::Error& e) {
      throw UsageError("config file " + path + ": bad value for '" + item.name + "': " + e.what());
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Population adjustment for anchored indirect comparisons of survival outcomes:\n"
               "MAIC, STC and the Bucher method, plus the simulation study that compares them."};
  app.set_version_flag("--version", std::string(POPADJ_VERSION));
  app.require_subcommand(1);

  // run
  RunOptions run;
  auto* run_cmd = app.add_subcommand("run", "Run the Monte Carlo study and summarize it");
  std::string run_config;
  run_cmd->add_option("--config", run_config, "TOML-style key = value file with run options")
      ->check(CLI::ExistingFile);
  run_cmd->add_option("--scenarios", run.scenarios, "all, desk (12 corner scenarios) or ids such as 1-10,15")
      ->capture_default_str();
  run_cmd->add_option("--n-ac", run.n_ac, "Keep AC sample sizes (150, 300, 600)")->delimiter(',');
  run_cmd->add_option("--prognostic-hr", run.prognostic_hr, "Keep prognostic HRs (0.67, 0.5, 0.33)")->delimiter(',');
  run_cmd->add_option("--interaction-hr", run.interaction_hr, "Keep interaction HRs (0.67, 0.5, 0.33)")->delimiter(',');
  run_cmd->add_option("--rho", run.rho, "Keep covariate correlations (0, 0.35)")->delimiter(',');
  run_cmd->add_option("--ac-mean", run.ac_mean, "Keep AC covariate means (0.45, 0.3, 0.15)")->delimiter(',');
  run_cmd->add_option("--reps", run.reps, "Replicates per scenario")->capture_default_str();
  run_cmd->add_option("--seed", run.seed, "Root seed")->envname("POPADJUST_SEED")->capture_default_str();
  run_cmd->add_option("--workers", run.workers, "Worker threads (default: all cores)");
  run_cmd->add_option("--out", run.out, "Output directory")->capture_default_str();
  run_cmd->add_option("--variance", run.variance, "MAIC SE: sandwich or bootstrap")->capture_default_str();
  run_cmd->add_option("--bootstrap-reps", run.bootstrap_reps, "Bootstrap resamples")->capture_default_str();
  run_cmd->add_flag("--recalibrate-censoring", run.recalibrate, "Calibrate the censoring rate instead of using 0.96");
  run_cmd->add_option("--censoring-target", run.censoring_target, "Censored proportion for recalibration")
      ->capture_default_str();
  run_cmd->add_option("--covariate-sd", run.covariate_sd, "Covariate standard deviation")->capture_default_str();
  run_cmd->add_flag("--overwrite", run.overwrite, "Discard existing results in the output directory");
  run_cmd->add_flag("--quiet", run.quiet, "No progress output");

  // summarize
  std::string sum_in, sum_out;
  double sum_level = 0.95;
  auto* sum_cmd = app.add_subcommand("summarize", "Performance measures from a replicates CSV");
  sum_cmd->add_option("--in", sum_in, "Replicates CSV")->required();
  sum_cmd->add_option("--out", sum_out, "Summary CSV (default: stdout)");
  sum_cmd->add_option("--level", sum_level, "Confidence level for coverage")->capture_default_str();

  // plot
  std::string plot_in, plot_metric = "bias", plot_out;
  auto* plot_cmd = app.add_subcommand("plot", "Nested loop plot (CSV and SVG) of one metric");
  plot_cmd->add_option("--summary", plot_in, "Summary CSV")->required();
  plot_cmd->add_option("--metric", plot_metric, "bias, vr, coverage, ese or mse")->capture_default_str();
  plot_cmd->add_option("--out", plot_out, "Output prefix (default: plot_<metric> next to the summary)");

  // analyze
  AnalyzeOptions an;
  auto* an_cmd = app.add_subcommand("analyze", "Analyze an IPD CSV against a published summary");
  an_cmd->require_subcommand(1);
  std::string an_method;
  for (const char* m : {"maic", "stc", "bucher"}) {
    auto* sub = an_cmd->add_subcommand(m, std::string("Run ") + m);
    sub->add_option("--ipd", an.ipd, "IPD CSV (x1,x2,x3,x4,trt,time,event)")->required()->check(CLI::ExistingFile);
    sub->add_option("--ald", an.ald, "Aggregate data (mean.xK=, logHR=, se=)")->required()->check(CLI::ExistingFile);
    sub->add_option("--em", an.em, "Effect modifiers")->capture_default_str();
    sub->add_option("--level", an.level, "Confidence level")->capture_default_str();
    if (std::string(m) == "maic") {
      sub->add_option("--variance", an.variance, "sandwich or bootstrap")->capture_default_str();
      sub->add_option("--bootstrap-reps", an.bootstrap_reps, "Bootstrap resamples")->capture_default_str();
      sub->add_option("--seed", an.seed, "Bootstrap seed")->capture_default_str();
    }
    sub->callback([&an_method, m] { an_method = m; });
  }

  // demo
  std::uint64_t demo_seed = kDefaultSeed;
  std::string demo_write;
  auto* demo_cmd = app.add_subcommand("demo", "Worked analysis of one simulated dataset (scenario 1)");
  demo_cmd->add_option("--seed", demo_seed, "Seed")->capture_default_str();
  demo_cmd->add_option("--write-data", demo_write, "Also write the simulated IPD and ALD to this directory");

  // calibrate-censoring
  double cal_target = 0.35;
  std::size_t cal_probe = 1000000;
  std::uint64_t cal_seed = kDefaultSeed;
  auto* cal_cmd = app.add_subcommand("calibrate-censoring", "Censoring rate for a target censored proportion");
  cal_cmd->add_option("--target", cal_target, "Censored proportion")->capture_default_str();
  cal_cmd->add_option("--probe", cal_probe, "Probe subjects")->capture_default_str();
  cal_cmd->add_option("--seed", cal_seed, "Seed")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*run_cmd && !run_config.empty()) apply_config_file(*run_cmd, run_config);
    if (*run_cmd) return cmd_run(run);
    if (*sum_cmd) cmd_summarize(sum_in, sum_out, sum_level);
    if (*plot_cmd) cmd_plot(plot_in, plot_metric, plot_out);
    if (*an_cmd) cmd_analyze(an_method, an);
    if (*demo_cmd) cmd_demo(demo_seed, demo_write);
    if (*cal_cmd) cmd_calibrate(cal_target, cal_probe, cal_seed);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return 0;
}
