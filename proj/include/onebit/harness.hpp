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

#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "onebit/ar_estimator.hpp"
#include "onebit/biht.hpp"

namespace onebit {

enum class Scenario { kDownlinkFdd, kUplinkTdd, kCustom };
enum class Estimator { kAr, kBiht };
/// How the estimators pick the norm budget R.
enum class NormMode {
  kOracle,    ///< R = ||H_true||_F^2
  kExpected,  ///< R = E||H||_F^2 under unit-variance gains
};

std::string_view to_string(Scenario s);
std::string_view to_string(Estimator e);
std::string_view to_string(NormMode m);
std::string_view to_string(TrainingKind k);
Scenario parse_scenario(std::string_view s);
Estimator parse_estimator(std::string_view s);
NormMode parse_norm_mode(std::string_view s);
TrainingKind parse_training(std::string_view s);
ArrayKind parse_tx_array(std::string_view s);
std::string_view to_string(ArrayKind k);

struct ExperimentConfig {
  Scenario scenario = Scenario::kCustom;
  Index m_r = 4;
  Index m_t = 64;
  Index n_train = 32;
  Index k_paths = 5;
  ArrayKind tx_array = ArrayKind::kUla;
  TrainingKind training = TrainingKind::kSemiUnitary;
  std::vector<double> snr_grid_db{10.0};
  /// Training lengths to sweep; empty means {n_train}.
  std::vector<Index> n_grid;
  Index trials = 50;
  double min_angle_sep = std::numbers::pi / 16.0;
  std::vector<Estimator> estimators{Estimator::kAr, Estimator::kBiht};
  std::uint64_t base_seed = 1;
  NormMode norm_mode = NormMode::kOracle;
  ArConfig ar;
  Index biht_grid_points = 128;
  Index biht_iters = 300;
  double biht_step = 0.0;
  Index threads = 1;
  /// Write wall-clock times into the per-trial CSV (the only
  /// non-reproducible column).
  bool record_timing = true;
  std::string output_path = "nmse.csv";

  Link link() const;
  std::vector<Index> effective_n_grid() const;
  void validate() const;
};

/// Experiment defaults for "downlink-fdd" or "uplink-tdd".
ExperimentConfig preset(std::string_view name);

struct TrialResult {
  Estimator estimator = Estimator::kAr;
  double snr_db = 0.0;
  Index n_train = 0;
  Index trial_idx = 0;
  double nmse = 0.0;
  Index iterations = 0;
  double wall_time_ms = 0.0;
  std::uint64_t seed = 0;
  /// Channel-update path taken by AR (first iteration), if AR ran.
  std::optional<RhoSolver> rho_solver;
};

/// ||H_hat/||H_hat|| - H/||H|| ||_F^2. Throws for zero-norm inputs.
double nmse(const CMatrix& h_hat, const CMatrix& h_true);

/// Order-independent per-trial seed from the grid/trial indices.
std::uint64_t trial_seed(std::uint64_t base_seed, Index snr_idx, Index n_idx, Index trial_idx);

/// Ground truth and observation for one trial.
struct TrialSetup {
  ChannelParams truth;
  CMatrix h;
  QuantizedObservation obs;
  double r_norm = 0.0;
  std::uint64_t seed = 0;
};

TrialSetup make_trial(const ExperimentConfig& cfg, double snr_db, Index n_train, std::uint64_t seed);

/// Runs the enabled estimators on trials of one experiment. Holds the
/// BIHT dictionary, built once and shared read-only between workers.
class TrialRunner {
 public:
  explicit TrialRunner(ExperimentConfig cfg);

  std::vector<TrialResult> run(Index snr_idx, Index n_idx, Index trial_idx) const;
  /// AR on a prepared trial; exposes the full result for diagnostics.
  ArResult run_ar_on(const TrialSetup& setup, const IterationCallback& cb = {}) const;
  BihtResult run_biht_on(const TrialSetup& setup) const;

  const ExperimentConfig& config() const { return cfg_; }

 private:
  ExperimentConfig cfg_;
  std::optional<AngularDictionary> dict_;
};

std::vector<TrialResult> run_trial(const ExperimentConfig& cfg, Index snr_idx, Index n_idx, Index trial_idx);

struct AggregateRow {
  Estimator estimator = Estimator::kAr;
  double snr_db = 0.0;
  Index n_train = 0;
  Index m_r = 0;
  Index m_t = 0;
  Index k_paths = 0;
  Index trials = 0;
  double mean_nmse = 0.0;
  double std_nmse = 0.0;
};

struct SweepResult {
  std::vector<TrialResult> trials;  ///< sorted by (snr, n, trial, estimator)
  std::vector<AggregateRow> aggregate;
};

using ProgressCallback = std::function<void(Index done, Index total)>;

/// All trials over snr_grid_db x n_grid, executed on cfg.threads workers.
/// The result does not depend on the thread count.
SweepResult run_sweep(const ExperimentConfig& cfg, const ProgressCallback& progress = {});

std::vector<AggregateRow> aggregate(const ExperimentConfig& cfg, const std::vector<TrialResult>& trials);

void write_aggregate_csv(std::ostream& os, const std::vector<AggregateRow>& rows);
void write_trials_csv(std::ostream& os, const ExperimentConfig& cfg, const std::vector<TrialResult>& trials,
                      bool include_timing);

/// "<dir>/<stem>_trials<ext>" next to the aggregate CSV.
std::string trials_path_for(const std::string& aggregate_path);

/// Writes both CSV files for a finished sweep.
void write_sweep_outputs(const ExperimentConfig& cfg, const SweepResult& result);

/// Shortest round-trip decimal form, '.' separator, locale independent.
std::string format_double(double v);

}  // namespace onebit
