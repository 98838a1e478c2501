// Copyright 2026 The infotraj Authors
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


// infotraj command-line front end.
//
//   infotraj select    --config c.kv [--seed S] [--outdir D]
//   infotraj run       --config c.kv [--arms a,b] [--budgets 20,40] [--resume]
//   infotraj correlate --config c.kv [--seed S]
//   infotraj plotdata  RUN_DIR
//   infotraj verify    [--only 1,2] [--configs DIR]
//
// Exit codes: 0 success, 1 failure or failed check, 2 config error,
// 3 selection error, 4 incomplete run directory.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "CLI11.hpp"
#include "infotraj/csv.hpp"
#include "infotraj/kv.hpp"
#include "infotraj/pipeline/config.hpp"
#include "infotraj/pipeline/experiment.hpp"
#include "infotraj/trajgen/selection.hpp"
#include "infotraj/verify/acceptance.hpp"

#ifndef INFOTRAJ_VERSION
#define INFOTRAJ_VERSION "0.0.0"
#endif
#ifndef INFOTRAJ_CONFIG_DIR
#define INFOTRAJ_CONFIG_DIR "configs"
#endif

namespace fs = std::filesystem;
using namespace infotraj;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitSelection = 3;
constexpr int kExitIncomplete = 4;

struct IncompleteRun : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  int jobs = 0;
  std::string outdir = "out";
  bool resume = false;
  std::string arms;
  std::string budgets;
  std::string run_dir;
  std::string only;
  std::string configs = INFOTRAJ_CONFIG_DIR;
  std::string work_dir;
};

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

// Command-line overrides go into the key-value form so that the resolved
// config, and therefore its hash, includes them.
pipeline::ExperimentConfig resolve_config(const Options& o, KeyValue& resolved) {
  KeyValue kv = KeyValue::load(o.config_path);
  if (o.seed) kv.set("run.seed", std::to_string(*o.seed));
  if (!o.arms.empty()) kv.set("experiment.arms", o.arms);
  if (!o.budgets.empty()) kv.set("experiment.budgets", o.budgets);
  pipeline::ExperimentConfig config = pipeline::ExperimentConfig::from_kv(kv);
  resolved = config.to_kv();
  return config;
}

KeyValue manifest(const Options& o, const std::string& command, const KeyValue& resolved,
                  const pipeline::ExperimentConfig& config) {
  KeyValue m;
  m.set("command", command);
  m.set("config_path", o.config_path);
  m.set("config_hash", hex64(resolved.hash()));
  m.set("master_seed", std::to_string(config.master_seed));
  m.set("version", INFOTRAJ_VERSION);
  m.set("fp_profile", std::getenv("INFOTRAJ_FP_PROFILE") ? std::getenv("INFOTRAJ_FP_PROFILE") : "default");
  m.set("jobs", o.jobs);
  m.set("started_utc", utc_now());
  return m;
}

// Manifest and resolved config go to disk before any computation.
KeyValue start(const Options& o, const std::string& command, const KeyValue& resolved,
               const pipeline::ExperimentConfig& config) {
  fs::create_directories(o.outdir);
  KeyValue m = manifest(o, command, resolved, config);
  m.save(o.outdir + "/manifest.kv");
  resolved.save(o.outdir + "/config.kv");
  return m;
}

void finish(const Options& o, KeyValue m) {
  m.set("finished_utc", utc_now());
  m.save(o.outdir + "/manifest.kv");
}

int cmd_select(const Options& o) {
  KeyValue resolved;
  const pipeline::ExperimentConfig config = resolve_config(o, resolved);
  const KeyValue m = start(o, "select", resolved, config);
  const std::uint64_t seed = config.master_seed;
  const pipeline::SeedSetup setup = pipeline::setup_seed(config, seed);
  systems::SealedPlant plant(setup.plant);
  const pipeline::PriorResult prior = pipeline::build_prior(plant, setup, config);

  trajgen::SelectionConfig sc = config.selection;
  sc.seed = derive_seed(seed, 0x73656c65, 1);
  sc.jobs = o.jobs;
  const trajgen::SelectionResult sel =
      trajgen::select_informative(setup.plant, setup.gains, prior.model, setup.task, sc);

  const double T = setup.plant.sampling_time();
  write_text(o.outdir + "/selection.csv", sel.report_csv());
  write_text(o.outdir + "/region.csv", sel.region.to_csv());
  write_text(o.outdir + "/task.csv", pipeline::reference_csv(setup.task, T));
  write_text(o.outdir + "/winner.csv", pipeline::reference_csv(sel.best().reference, T));
  KeyValue report = sel.region.metadata();
  report.set("winner", sel.best().id);
  report.set("winner_cost", sel.best().cost);
  report.set("candidates", static_cast<int>(sel.candidates.size()));
  report.save(o.outdir + "/selection.kv");
  std::cout << "winner " << sel.best().id << " cost " << format_double(sel.best().cost) << " of "
            << sel.candidates.size() << " candidates\n";
  finish(o, m);
  return 0;
}

int cmd_run(const Options& o) {
  KeyValue resolved;
  const pipeline::ExperimentConfig config = resolve_config(o, resolved);
  if (o.resume && fs::exists(o.outdir + "/config.kv")) {
    const KeyValue previous = KeyValue::load(o.outdir + "/config.kv");
    if (previous.hash() != resolved.hash()) {
      throw ConfigError("", 0, "--resume: " + o.outdir + " was produced by a different config");
    }
  }
  const KeyValue m = start(o, "run", resolved, config);
  const pipeline::ExperimentResult result = pipeline::compare_arms(config, o.outdir, o.jobs, o.resume);
  for (const auto& row : result.improvement) {
    std::printf("budget %d: informative wins %d/%d, median improvement %.2f%%\n", row.budget, row.wins,
                row.pairs, row.median_percent);
  }
  finish(o, m);
  return 0;
}

int cmd_correlate(const Options& o) {
  KeyValue resolved;
  const pipeline::ExperimentConfig config = resolve_config(o, resolved);
  const KeyValue m = start(o, "correlate", resolved, config);
  const pipeline::CorrelationResult r =
      pipeline::correlation_study(config, config.master_seed, o.outdir, o.jobs);
  std::printf("spearman rho %.4f%s over %zu candidates (%s)\n", r.rho, r.degenerate ? " (degenerate)" : "",
              r.points.size(), pipeline::to_string(r.metric).c_str());
  finish(o, m);
  return 0;
}

void require_files(const std::vector<std::string>& files) {
  std::string missing;
  for (const auto& f : files) {
    if (!fs::exists(f)) missing += "\n  " + f;
  }
  if (!missing.empty()) throw IncompleteRun("incomplete run directory, missing:" + missing);
}

// Rows of an executed-rollout CSV as (axis, x, xdot) with a forward difference.
void append_phase(CsvWriter& out, const CsvTable& executed, double T, const std::string& which) {
  int axes = 0;
  while (std::find(executed.header.begin(), executed.header.end(), "x_" + std::to_string(axes)) !=
         executed.header.end()) {
    ++axes;
  }
  for (int a = 0; a < axes; ++a) {
    const std::string col = "x_" + std::to_string(a);
    for (std::size_t k = 0; k + 1 < executed.rows.size(); ++k) {
      const double x = executed.number(k, col);
      out.cell(static_cast<long long>(a));
      out.cell(x);
      out.cell((executed.number(k + 1, col) - x) / T);
      out.cell(which);
      out.end_row();
    }
  }
}

int cmd_plotdata(const Options& o) {
  const std::string dir = o.run_dir;
  const bool has_run = fs::exists(dir + "/comparison.csv");
  const bool has_corr = fs::exists(dir + "/correlation.csv");
  if (!has_run && !has_corr) require_files({dir + "/comparison.csv or " + dir + "/correlation.csv"});
  const std::string plots = dir + "/plots";
  if (has_corr) {
    const CsvTable t = parse_csv(read_text(dir + "/correlation.csv"));
    CsvWriter scatter({"candidate_id", "is_task", "cost", "error"});
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      scatter.cell(t.rows[r][static_cast<std::size_t>(t.column("candidate_id"))]);
      scatter.cell(t.rows[r][static_cast<std::size_t>(t.column("is_task"))]);
      scatter.cell(t.number(r, "cost"));
      scatter.cell(t.number(r, "error"));
      scatter.end_row();
    }
    write_text(plots + "/scatter.csv", scatter.str());
  }
  if (has_run) {
    const auto rows = pipeline::parse_comparison_csv(read_text(dir + "/comparison.csv"));
    if (rows.empty()) throw IncompleteRun("incomplete run directory: comparison.csv has no rows");
    CsvWriter bars({"arm", "budget", "seeds", "mean_err_sq", "std_err_sq", "median_err_sq"});
    for (const auto& s : pipeline::summarize(rows)) {
      bars.cell(s.arm);
      bars.cell(static_cast<long long>(s.budget));
      bars.cell(static_cast<long long>(s.seeds));
      bars.cell(s.mean_err_sq);
      bars.cell(s.std_err_sq);
      bars.cell(s.median_err_sq);
      bars.end_row();
    }

    // Phase data for the first seed: the task run against the last executed
    // informative reference.
    const std::string seed = "seed_" + std::to_string(rows.front().seed);
    const int iterations = static_cast<int>(KeyValue::load(dir + "/config.kv").get_int("experiment.iterations"));
    std::vector<std::string> needed = {dir + "/config.kv", dir + "/prior/" + seed + "/executed.csv",
                                       dir + "/prior/" + seed + "/task.csv"};
    bool informative = false;
    for (const auto& r : rows) informative = informative || r.arm == "informative";
    const std::string modified = dir + "/informative/" + std::to_string(iterations) + "/" + seed + "/executed.csv";
    if (informative) needed.push_back(modified);
    require_files(needed);
    const CsvTable task = parse_csv(read_text(dir + "/prior/" + seed + "/task.csv"));
    require(task.rows.size() >= 2, "plotdata: task.csv too short");
    const double T = task.number(1, "t") - task.number(0, "t");
    CsvWriter phase({"axis", "x", "xdot", "which"});
    append_phase(phase, parse_csv(read_text(dir + "/prior/" + seed + "/executed.csv")), T, "task");
    if (informative) append_phase(phase, parse_csv(read_text(modified)), T, "modified");
    write_text(plots + "/bars.csv", bars.str());
    write_text(plots + "/phase.csv", phase.str());
  }
  std::cout << "plot data written to " << plots << "\n";
  return 0;
}

int cmd_verify(const Options& o, const std::string& self) {
  verify::VerifyOptions v;
  v.config_dir = o.configs;
  v.jobs = o.jobs;
  v.work_dir = o.work_dir.empty() ? (fs::temp_directory_path() / "infotraj_verify").string() : o.work_dir;
  fs::create_directories(v.work_dir);
  v.run_cli = [self](const std::vector<std::string>& args) {
    std::string cmd = "\"" + self + "\"";
    for (const auto& a : args) cmd += " \"" + a + "\"";
    cmd += " > /dev/null";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : kExitFailure;
  };
  std::vector<int> ids;
  if (!o.only.empty()) {
    for (const auto& part : KeyValue::parse("only = " + o.only).get_int_list("only")) {
      ids.push_back(static_cast<int>(part));
    }
  }
  bool all_ok = true;
  verify::run_checks(v, ids, [&](const verify::CheckResult& r) {
    std::cout << r.line() << std::endl;
    all_ok = all_ok && r.ok();
  });
  return all_ok ? 0 : kExitFailure;
}

// Strict profile: refuse to run a build that allows FMA contraction.
void check_fp_profile() {
  const char* profile = std::getenv("INFOTRAJ_FP_PROFILE");
  if (profile == nullptr || std::string(profile).empty()) return;
  if (std::string(profile) != "strict") {
    throw ConfigError("INFOTRAJ_FP_PROFILE", 0, "expected 'strict' or unset");
  }
#ifndef INFOTRAJ_STRICT_FP
  throw ConfigError("INFOTRAJ_FP_PROFILE", 0, "strict profile requested but this build allows FMA contraction");
#endif
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"infotraj: informative trajectory selection for residual-model learning"};
  app.require_subcommand(1);
  Options o;

  auto add_common = [&o](CLI::App* sub, bool needs_config) {
    auto* c = sub->add_option("--config", o.config_path, "flat key-value config file");
    if (needs_config) c->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", o.seed, "master seed (overrides run.seed)");
    sub->add_option("--jobs", o.jobs, "worker cap (0: hardware concurrency)")->check(CLI::NonNegativeNumber);
    sub->add_option("--outdir", o.outdir, "output directory");
  };
  auto* select = app.add_subcommand("select", "run one selection round and write its report");
  add_common(select, true);
  auto* run = app.add_subcommand("run", "compare the arms over all seeds and budgets");
  add_common(run, true);
  run->add_flag("--resume", o.resume, "reuse finished seeds in --outdir");
  run->add_option("--arms", o.arms, "comma-separated arms");
  run->add_option("--budgets", o.budgets, "comma-separated, strictly increasing data budgets");
  auto* correlate = app.add_subcommand("correlate", "informative cost versus post-update tracking error");
  add_common(correlate, true);
  auto* plotdata = app.add_subcommand("plotdata", "plot-ready CSVs from a finished output directory");
  plotdata->add_option("run_dir", o.run_dir, "output directory of run or correlate")->required();
  auto* verify_cmd = app.add_subcommand("verify", "run the acceptance checks");
  verify_cmd->add_option("--only", o.only, "comma-separated check ids");
  verify_cmd->add_option("--configs", o.configs, "directory with the acceptance presets");
  verify_cmd->add_option("--workdir", o.work_dir, "scratch directory");
  verify_cmd->add_option("--jobs", o.jobs, "worker cap (0: hardware concurrency)")->check(CLI::NonNegativeNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    check_fp_profile();
    if (o.jobs > 0) set_default_jobs(o.jobs);
    if (*select) return cmd_select(o);
    if (*run) return cmd_run(o);
    if (*correlate) return cmd_correlate(o);
    if (*plotdata) return cmd_plotdata(o);
    if (*verify_cmd) {
      std::error_code ec;
      const fs::path self = fs::canonical("/proc/self/exe", ec);
      return cmd_verify(o, ec ? std::string(argv[0]) : self.string());
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const SelectionError& e) {
    std::cerr << "selection error: " << e.what() << "\n";
    return kExitSelection;
  } catch (const EmptyRegionError& e) {
    std::cerr << "selection error: " << e.what() << "\n";
    return kExitSelection;
  } catch (const IncompleteRun& e) {
    std::cerr << e.what() << "\n";
    return kExitIncomplete;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitFailure;
}
