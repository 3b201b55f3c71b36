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

#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "doctest.h"
#include "onebit/config.hpp"
#include "onebit/harness.hpp"
#include "test_util.hpp"

using namespace onebit;
using onebit::test::randn;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.m_r = 3;
  cfg.m_t = 6;
  cfg.n_train = 6;
  cfg.k_paths = 2;
  cfg.training = TrainingKind::kGaussian;
  cfg.snr_grid_db = {0.0, 10.0};
  cfg.trials = 3;
  cfg.ar.max_outer_iters = 15;
  cfg.biht_grid_points = 16;
  cfg.biht_iters = 20;
  cfg.record_timing = false;
  return cfg;
}

}  // namespace

TEST_CASE("nmse") {
  Rng rng(131);
  const CMatrix h = randn(3, 4, rng);
  CHECK(nmse(h, h) == doctest::Approx(0.0));
  CHECK(nmse(3.0 * h, h) < 1e-28);
  CMatrix a = CMatrix::Zero(2, 2), b = CMatrix::Zero(2, 2);
  a(0, 0) = 1.0;
  b(1, 1) = Complex(0, 2);
  CHECK(nmse(a, b) == doctest::Approx(2.0));
  CHECK(nmse(-h, h) == doctest::Approx(4.0));
  CHECK_THROWS_AS(nmse(CMatrix::Zero(3, 4), h), std::invalid_argument);
  CHECK_THROWS_AS(nmse(randn(2, 2, rng), h), std::invalid_argument);
}

TEST_CASE("presets") {
  const ExperimentConfig dl = preset("downlink-fdd");
  CHECK(dl.m_r == 4);
  CHECK(dl.m_t == 64);
  CHECK(dl.n_train == 32);
  CHECK(dl.k_paths == 5);
  CHECK(dl.ar.k_paths == 5);
  CHECK(dl.min_angle_sep == doctest::Approx(std::numbers::pi / 16));

  const ExperimentConfig ul = preset("uplink-tdd");
  CHECK(ul.m_r == 64);
  CHECK(ul.k_paths == 16);
  CHECK(ul.n_train == ul.k_paths);
  CHECK(ul.training == TrainingKind::kUnitary);
  CHECK(ul.tx_array == ArrayKind::kPerPathElement);
  CHECK_THROWS_AS(preset("nope"), std::invalid_argument);
}

TEST_CASE("uplink trial dispatches to the unitary path") {
  ExperimentConfig ul = preset("uplink-tdd");
  ul.estimators = {Estimator::kAr};
  ul.ar.max_outer_iters = 2;
  const TrialSetup t = make_trial(ul, 10.0, ul.n_train, 9);
  const CMatrix& s = t.obs.s;
  CHECK(test::max_abs_diff(s * s.adjoint(), CMatrix::Identity(16, 16)) < 1e-12);
  const auto results = TrialRunner(ul).run(0, 0, 0);
  REQUIRE(results.size() == 1);
  REQUIRE(results.front().rho_solver.has_value());
  CHECK(*results.front().rho_solver == RhoSolver::kUnitary);
}

TEST_CASE("trial_seed is order independent and distinct") {
  CHECK(trial_seed(1, 0, 0, 0) == trial_seed(1, 0, 0, 0));
  CHECK(trial_seed(1, 0, 0, 1) != trial_seed(1, 0, 1, 0));
  CHECK(trial_seed(1, 1, 0, 0) != trial_seed(1, 0, 1, 0));
  CHECK(trial_seed(1, 0, 0, 0) != trial_seed(2, 0, 0, 0));
}

TEST_CASE("run_trial is deterministic") {
  ExperimentConfig cfg = small_config();
  const auto a = run_trial(cfg, 1, 0, 2);
  const auto b = run_trial(cfg, 1, 0, 2);
  REQUIRE(a.size() == 2);
  REQUIRE(b.size() == 2);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].nmse == b[i].nmse);
    CHECK(a[i].seed == b[i].seed);
    CHECK(a[i].iterations == b[i].iterations);
    CHECK(a[i].estimator == b[i].estimator);
  }
  CHECK(a[0].snr_db == 10.0);
}

TEST_CASE("run_sweep aggregation") {
  ExperimentConfig cfg = small_config();
  const SweepResult r = run_sweep(cfg);
  CHECK(r.trials.size() == 2u * 2u * 3u);
  CHECK(r.aggregate.size() == 4u);

  std::map<std::pair<int, double>, std::vector<double>> groups;
  for (const auto& t : r.trials) groups[{static_cast<int>(t.estimator), t.snr_db}].push_back(t.nmse);
  for (const auto& row : r.aggregate) {
    const auto& v = groups.at({static_cast<int>(row.estimator), row.snr_db});
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    CHECK(std::abs(row.mean_nmse - mean) <= 1e-12);
    CHECK(row.std_nmse == doctest::Approx(std::sqrt(ss / static_cast<double>(v.size() - 1))));
    CHECK(row.trials == 3);
    CHECK(row.m_r == 3);
  }

  SUBCASE("one trial and one SNR point gives one row per estimator") {
    cfg.trials = 1;
    cfg.snr_grid_db = {5.0};
    const SweepResult one = run_sweep(cfg);
    CHECK(one.aggregate.size() == 2u);
    CHECK(one.aggregate[0].std_nmse == 0.0);
  }

  SUBCASE("thread count does not change results") {
    cfg.threads = 3;
    const SweepResult par = run_sweep(cfg);
    REQUIRE(par.trials.size() == r.trials.size());
    for (std::size_t i = 0; i < r.trials.size(); ++i) CHECK(par.trials[i].nmse == r.trials[i].nmse);
  }

  SUBCASE("n grid sweep") {
    cfg.n_grid = {4, 6, 8};
    cfg.snr_grid_db = {10.0};
    cfg.estimators = {Estimator::kAr};
    const SweepResult ns = run_sweep(cfg);
    CHECK(ns.aggregate.size() == 3u);
    CHECK(ns.aggregate[2].n_train == 8);
  }
}

TEST_CASE("CSV output") {
  ExperimentConfig cfg = small_config();
  cfg.trials = 2;
  cfg.snr_grid_db = {10.0};
  const SweepResult r = run_sweep(cfg);
  std::ostringstream agg, raw;
  write_aggregate_csv(agg, r.aggregate);
  write_trials_csv(raw, cfg, r.trials, false);
  const std::string a = agg.str();
  CHECK(a.rfind("estimator,snr_db,n_train,m_r,m_t,k_paths,trials,mean_nmse,std_nmse\n", 0) == 0);
  CHECK(std::count(a.begin(), a.end(), '\n') == 3);
  const std::string t = raw.str();
  CHECK(t.rfind("estimator,snr_db,n_train,m_r,m_t,k_paths,trial_idx,seed,nmse,iterations,wall_time_ms\n", 0) == 0);
  CHECK(std::count(t.begin(), t.end(), '\n') == 5);

  CHECK(trials_path_for("out/nmse.csv") == std::filesystem::path("out/nmse_trials.csv").string());
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(-2.0) == "-2");
  CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);

  const auto dir = std::filesystem::temp_directory_path() / "onebit_unit_csv";
  std::filesystem::create_directories(dir);
  cfg.output_path = (dir / "x.csv").string();
  write_sweep_outputs(cfg, r);
  CHECK(std::filesystem::exists(dir / "x_trials.csv"));
  std::filesystem::remove_all(dir);

  cfg.output_path = "/nonexistent-dir/for/sure/x.csv";
  CHECK_THROWS_AS(write_sweep_outputs(cfg, r), std::runtime_error);
}

TEST_CASE("config validation") {
  ExperimentConfig cfg = small_config();
  CHECK_NOTHROW(cfg.validate());
  cfg.trials = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = small_config();
  cfg.snr_grid_db.clear();
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = small_config();
  cfg.training = TrainingKind::kUnitary;
  cfg.n_train = 4;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = small_config();
  cfg.k_paths = 20;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("JSON config") {
  ExperimentConfig cfg;
  apply_json(cfg, nlohmann::json::parse(R"({"m_r": 2, "trials": 7, "estimators": ["biht"],
      "ar": {"lambda": 0.5, "grad_iters": 3}, "biht": {"iters": 11}, "training": "unitary", "m_t": 5,
      "n_train": 5, "k_paths": 2})"));
  CHECK(cfg.m_r == 2);
  CHECK(cfg.trials == 7);
  CHECK(cfg.estimators == std::vector<Estimator>{Estimator::kBiht});
  CHECK(cfg.ar.lambda == 0.5);
  CHECK(cfg.ar.grad_iters == 3);
  CHECK(cfg.ar.k_paths == 2);
  CHECK(cfg.biht_iters == 11);
  CHECK(cfg.training == TrainingKind::kUnitary);

  ExperimentConfig back;
  apply_json(back, to_json(cfg));
  CHECK(to_json(back) == to_json(cfg));

  CHECK_THROWS_AS(apply_json(cfg, nlohmann::json::parse(R"({"bogus": 1})")), std::invalid_argument);
  CHECK_THROWS_AS(apply_json(cfg, nlohmann::json::parse(R"({"ar": {"bogus": 1}})")), std::invalid_argument);
  CHECK_THROWS_AS(apply_json(cfg, nlohmann::json::parse(R"({"training": "weird"})")), std::invalid_argument);

  const auto path = std::filesystem::temp_directory_path() / "onebit_unit_cfg.json";
  {
    std::ofstream f(path);
    f << "// comment\n{\"preset\": \"uplink-tdd\", \"trials\": 3}\n";
  }
  const ExperimentConfig loaded = load_config(path.string());
  CHECK(loaded.m_r == 64);
  CHECK(loaded.trials == 3);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_config("/nonexistent/cfg.json"), std::runtime_error);
}
