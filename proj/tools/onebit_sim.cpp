// Copyright 2026 The onebit-ar Authors. All Rights Reserved.
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

// onebit_sim: Monte Carlo driver for one-bit MIMO channel estimation.
//
//   onebit_sim simulate --preset downlink-fdd --snr 10 --trace
//   onebit_sim sweep --preset uplink-tdd --trials 50 --out uplink.csv --threads 4
//   onebit_sim check

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "onebit/checks.hpp"
#include "onebit/config.hpp"
#include "onebit/harness.hpp"

using namespace onebit;

namespace {

struct CommonOptions {
  std::string config_path;
  std::string preset_name;
  std::optional<std::uint64_t> seed;
  std::optional<Index> trials;
  std::string out;
  std::string estimators;
  std::optional<Index> threads;
};

void add_common(CLI::App* app, CommonOptions& o) {
  app->add_option("--config", o.config_path, "JSON experiment config")->check(CLI::ExistingFile);
  app->add_option("--preset", o.preset_name, "downlink-fdd | uplink-tdd");
  app->add_option("--seed", o.seed, "base seed");
  app->add_option("--trials", o.trials, "trials per grid point");
  app->add_option("--out", o.out, "output path");
  app->add_option("--estimators", o.estimators, "comma-separated subset of ar,biht");
  app->add_option("--threads", o.threads, "worker threads");
}

std::vector<Estimator> parse_estimator_list(const std::string& list) {
  std::vector<Estimator> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(parse_estimator(item));
  }
  return out;
}

ExperimentConfig resolve(const CommonOptions& o) {
  ExperimentConfig cfg;
  if (!o.preset_name.empty()) cfg = preset(o.preset_name);
  if (!o.config_path.empty()) {
    if (o.preset_name.empty()) {
      cfg = load_config(o.config_path);
    } else {
      std::ifstream f(o.config_path);
      nlohmann::json j = nlohmann::json::parse(f, nullptr, true, true);
      j.erase("preset");
      apply_json(cfg, j);
    }
  }
  if (o.seed) cfg.base_seed = *o.seed;
  if (o.trials) cfg.trials = *o.trials;
  if (!o.out.empty()) cfg.output_path = o.out;
  if (!o.estimators.empty()) cfg.estimators = parse_estimator_list(o.estimators);
  if (o.threads) cfg.threads = *o.threads;
  cfg.ar.k_paths = cfg.k_paths;
  cfg.validate();
  return cfg;
}

void print_matrix_row(std::ostream& os, const char* label, const RVector& v) {
  os << label;
  for (Index i = 0; i < v.size(); ++i) os << (i ? ", " : " ") << format_double(v(i));
  os << '\n';
}

int cmd_simulate(const CommonOptions& o, std::optional<double> snr, Index trial, bool trace) {
  ExperimentConfig cfg = resolve(o);
  if (snr) cfg.snr_grid_db = {*snr};
  const TrialRunner runner(cfg);
  const double snr_db = cfg.snr_grid_db.front();
  const Index n_train = cfg.effective_n_grid().front();
  const TrialSetup setup = make_trial(cfg, snr_db, n_train, trial_seed(cfg.base_seed, 0, 0, trial));

  std::ofstream trace_file;
  std::ostream* trace_os = &std::cout;
  if (trace && !o.out.empty()) {
    trace_file.open(o.out, std::ios::binary);
    if (!trace_file) throw std::runtime_error("cannot open '" + o.out + "'");
    trace_os = &trace_file;
  }

  std::cout << "scenario=" << to_string(cfg.scenario) << " m_r=" << cfg.m_r << " m_t=" << cfg.m_t
            << " n_train=" << n_train << " k_paths=" << cfg.k_paths << " snr_db=" << format_double(snr_db)
            << " seed=" << setup.seed << " R=" << format_double(setup.r_norm) << '\n';
  print_matrix_row(std::cout, "true_doa:", setup.truth.doa);
  if (setup.truth.dod.size() > 0) print_matrix_row(std::cout, "true_dod:", setup.truth.dod);

  for (Estimator est : cfg.estimators) {
    if (est == Estimator::kAr) {
      if (trace) *trace_os << "iteration,objective,data_term,model_term,ml_cost,rho,solver,step_sizes\n";
      const ArResult res = runner.run_ar_on(setup, [&](const IterationRecord& rec) {
        if (!trace) return;
        *trace_os << rec.iteration << ',' << format_double(rec.objective) << ',' << format_double(rec.data_term)
                  << ',' << format_double(rec.model_term) << ',' << format_double(rec.ml_cost) << ','
                  << format_double(rec.rho) << ',' << to_string(rec.solver) << ',';
        for (std::size_t i = 0; i < rec.step_sizes.size(); ++i)
          *trace_os << (i ? ";" : "") << format_double(rec.step_sizes[i]);
        *trace_os << '\n';
      });
      std::cout << "ar: nmse=" << format_double(nmse(res.h, setup.h))
                << " iterations=" << res.state.objective_trace.size() << " solver="
                << (res.state.diagnostics.empty() ? "none" : to_string(res.state.diagnostics.front().solver))
                << " final_objective="
                << (res.state.objective_trace.empty() ? "n/a" : format_double(res.state.objective_trace.back()))
                << '\n';
      print_matrix_row(std::cout, "ar_doa:", res.params.doa);
      if (res.params.dod.size() > 0) print_matrix_row(std::cout, "ar_dod:", res.params.dod);
    } else {
      const BihtResult res = runner.run_biht_on(setup);
      std::cout << "biht: nmse=" << format_double(nmse(res.h, setup.h)) << " support_size=" << res.support.size()
                << '\n';
    }
  }
  return 0;
}

int cmd_sweep(const CommonOptions& o, bool no_timing, bool quiet) {
  ExperimentConfig cfg = resolve(o);
  if (no_timing) cfg.record_timing = false;
  const SweepResult result = run_sweep(cfg, [&](Index done, Index total) {
    if (!quiet) std::cerr << "\rtrials " << done << '/' << total << std::flush;
  });
  if (!quiet) std::cerr << '\n';
  write_sweep_outputs(cfg, result);
  write_aggregate_csv(std::cout, result.aggregate);
  if (!quiet) std::cerr << "wrote " << cfg.output_path << " and " << trials_path_for(cfg.output_path) << '\n';
  return 0;
}

int cmd_check(std::uint64_t seed) {
  int failures = 0;
  for (const auto& c : run_checks(seed)) {
    std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << " (" << c.detail << ")\n";
    failures += c.passed ? 0 : 1;
  }
  std::cout << (failures == 0 ? "all checks passed" : std::to_string(failures) + " check(s) failed") << '\n';
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"One-bit MIMO channel estimation: amplitude retrieval vs. BIHT"};
  app.require_subcommand(1);

  CommonOptions sim_opts, sweep_opts;
  std::optional<double> snr;
  Index trial = 0;
  bool trace = false;
  auto* sim = app.add_subcommand("simulate", "run one trial and print diagnostics");
  add_common(sim, sim_opts);
  sim->add_option("--snr", snr, "SNR in dB (default: first grid point)");
  sim->add_option("--trial", trial, "trial index used for seeding");
  sim->add_flag("--trace", trace, "emit the per-iteration AR trace as CSV (to --out if given)");

  bool no_timing = false, quiet = false;
  auto* sweep = app.add_subcommand("sweep", "run the full experiment and write CSV");
  add_common(sweep, sweep_opts);
  sweep->add_flag("--no-timing", no_timing, "write 0 for wall_time_ms so both CSVs are reproducible");
  sweep->add_flag("--quiet", quiet, "no progress output");

  std::uint64_t check_seed = 7;
  auto* chk = app.add_subcommand("check", "run the invariant/oracle self-test");
  chk->add_option("--seed", check_seed, "seed for the random instances");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*sim) return cmd_simulate(sim_opts, snr, trial, trace);
    if (*sweep) return cmd_sweep(sweep_opts, no_timing, quiet);
    if (*chk) return cmd_check(check_seed);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
