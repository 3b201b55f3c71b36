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

#include "onebit/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <ostream>
#include <thread>

namespace onebit {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

template <typename Enum, std::size_t N>
Enum parse_enum(std::string_view s, const std::pair<std::string_view, Enum> (&table)[N],
                std::string_view what) {
  for (const auto& [name, value] : table)
    if (name == s) return value;
  throw std::invalid_argument("unknown " + std::string(what) + ": '" + std::string(s) + "'");
}

constexpr std::pair<std::string_view, Scenario> kScenarios[] = {
    {"downlink_fdd", Scenario::kDownlinkFdd},
    {"uplink_tdd", Scenario::kUplinkTdd},
    {"custom", Scenario::kCustom},
};
constexpr std::pair<std::string_view, Estimator> kEstimators[] = {
    {"ar", Estimator::kAr},
    {"biht", Estimator::kBiht},
};
constexpr std::pair<std::string_view, NormMode> kNormModes[] = {
    {"oracle", NormMode::kOracle},
    {"expected", NormMode::kExpected},
};
constexpr std::pair<std::string_view, TrainingKind> kTraining[] = {
    {"semi_unitary", TrainingKind::kSemiUnitary},
    {"unitary", TrainingKind::kUnitary},
    {"gaussian", TrainingKind::kGaussian},
};
constexpr std::pair<std::string_view, ArrayKind> kTxArrays[] = {
    {"ula", ArrayKind::kUla},
    {"single_antenna_users", ArrayKind::kPerPathElement},
};

template <typename Enum, std::size_t N>
std::string_view enum_name(Enum v, const std::pair<std::string_view, Enum> (&table)[N]) {
  for (const auto& [name, value] : table)
    if (value == v) return name;
  return "unknown";
}

}  // namespace

std::string_view to_string(Scenario s) { return enum_name(s, kScenarios); }
std::string_view to_string(Estimator e) { return enum_name(e, kEstimators); }
std::string_view to_string(NormMode m) { return enum_name(m, kNormModes); }
std::string_view to_string(TrainingKind k) { return enum_name(k, kTraining); }
std::string_view to_string(ArrayKind k) { return enum_name(k, kTxArrays); }
Scenario parse_scenario(std::string_view s) { return parse_enum(s, kScenarios, "scenario"); }
Estimator parse_estimator(std::string_view s) { return parse_enum(s, kEstimators, "estimator"); }
NormMode parse_norm_mode(std::string_view s) { return parse_enum(s, kNormModes, "norm mode"); }
TrainingKind parse_training(std::string_view s) { return parse_enum(s, kTraining, "training kind"); }
ArrayKind parse_tx_array(std::string_view s) { return parse_enum(s, kTxArrays, "tx array"); }

Link ExperimentConfig::link() const {
  return Link{ArrayGeometry{m_r, ArrayKind::kUla}, ArrayGeometry{m_t, tx_array}};
}

std::vector<Index> ExperimentConfig::effective_n_grid() const {
  return n_grid.empty() ? std::vector<Index>{n_train} : n_grid;
}

void ExperimentConfig::validate() const {
  if (m_r < 1 || m_t < 1 || k_paths < 1) throw std::invalid_argument("config: array sizes and K must be >= 1");
  if (trials < 1) throw std::invalid_argument("config: trials must be >= 1");
  if (snr_grid_db.empty()) throw std::invalid_argument("config: snr_grid_db is empty");
  if (estimators.empty()) throw std::invalid_argument("config: no estimator enabled");
  if (threads < 1) throw std::invalid_argument("config: threads must be >= 1");
  if (tx_array == ArrayKind::kPerPathElement && k_paths > m_t) {
    throw std::invalid_argument("config: single-antenna users need m_t >= k_paths");
  }
  if (!(min_angle_sep >= 0.0) || static_cast<double>(k_paths - 1) * min_angle_sep > std::numbers::pi) {
    throw std::invalid_argument("config: infeasible min_angle_sep");
  }
  for (double snr : snr_grid_db)
    if (std::isnan(snr)) throw std::invalid_argument("config: NaN in snr_grid_db");
  for (Index n : effective_n_grid()) {
    if (n < 1) throw std::invalid_argument("config: training length must be >= 1");
    if (training == TrainingKind::kSemiUnitary && n > m_t) {
      throw std::invalid_argument("config: semi-unitary training needs n_train <= m_t");
    }
    if (training == TrainingKind::kUnitary && n != m_t) {
      throw std::invalid_argument("config: unitary training needs n_train == m_t");
    }
  }
  ArConfig probe = ar;
  probe.k_paths = k_paths;
  probe.validate();
  if (biht_grid_points < 2 || biht_iters < 0) throw std::invalid_argument("config: invalid BIHT settings");
}

ExperimentConfig preset(std::string_view name) {
  ExperimentConfig cfg;
  if (name == "downlink-fdd" || name == "downlink_fdd") {
    cfg.scenario = Scenario::kDownlinkFdd;
    cfg.m_r = 4;
    cfg.m_t = 64;
    cfg.n_train = 32;
    cfg.k_paths = 5;
    cfg.tx_array = ArrayKind::kUla;
    cfg.training = TrainingKind::kSemiUnitary;
    cfg.snr_grid_db = {-10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0};
  } else if (name == "uplink-tdd" || name == "uplink_tdd") {
    cfg.scenario = Scenario::kUplinkTdd;
    cfg.m_r = 64;
    cfg.m_t = 16;
    cfg.n_train = 16;
    cfg.k_paths = 16;
    cfg.tx_array = ArrayKind::kPerPathElement;
    cfg.training = TrainingKind::kUnitary;
    cfg.snr_grid_db = {-10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0};
  } else {
    throw std::invalid_argument("unknown preset '" + std::string(name) + "'");
  }
  cfg.ar.k_paths = cfg.k_paths;
  return cfg;
}

double nmse(const CMatrix& h_hat, const CMatrix& h_true) {
  require_same_shape(h_hat, h_true, "nmse");
  const double a = h_hat.norm();
  const double b = h_true.norm();
  if (!(a > 0.0) || !(b > 0.0)) throw std::invalid_argument("nmse: zero-norm matrix");
  return (h_hat / a - h_true / b).squaredNorm();
}

std::uint64_t trial_seed(std::uint64_t base_seed, Index snr_idx, Index n_idx, Index trial_idx) {
  std::uint64_t h = splitmix64(base_seed);
  h = splitmix64(h ^ static_cast<std::uint64_t>(snr_idx));
  h = splitmix64(h ^ static_cast<std::uint64_t>(n_idx));
  h = splitmix64(h ^ static_cast<std::uint64_t>(trial_idx));
  return h;
}

TrialSetup make_trial(const ExperimentConfig& cfg, double snr_db, Index n_train, std::uint64_t seed) {
  const Link link = cfg.link();
  Rng rng(seed);
  TrialSetup t;
  t.seed = seed;
  t.truth.doa = gen_angles(cfg.k_paths, rng, cfg.min_angle_sep);
  if (link.has_dod()) t.truth.dod = gen_angles(cfg.k_paths, rng, cfg.min_angle_sep);
  t.truth.gains = gen_gains(cfg.k_paths, rng);
  t.h = synth_channel(t.truth, link);
  const CMatrix s = gen_training(cfg.m_t, n_train, cfg.training, rng);
  t.obs = observe(t.h, s, snr_db, rng);
  if (cfg.norm_mode == NormMode::kOracle) {
    t.r_norm = t.h.squaredNorm();
  } else {
    const Index tx_factor = link.has_dod() ? cfg.m_t : 1;
    t.r_norm = static_cast<double>(cfg.m_r * tx_factor * cfg.k_paths);
  }
  return t;
}

TrialRunner::TrialRunner(ExperimentConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.ar.k_paths = cfg_.k_paths;
  cfg_.validate();
  if (std::find(cfg_.estimators.begin(), cfg_.estimators.end(), Estimator::kBiht) != cfg_.estimators.end()) {
    dict_ = build_dictionary(cfg_.link(), cfg_.biht_grid_points);
  }
}

ArResult TrialRunner::run_ar_on(const TrialSetup& setup, const IterationCallback& cb) const {
  ArConfig ar = cfg_.ar;
  ar.r_norm = setup.r_norm;
  return run_ar(setup.obs, cfg_.link(), ar, cb);
}

BihtResult TrialRunner::run_biht_on(const TrialSetup& setup) const {
  if (!dict_) throw std::logic_error("BIHT is not enabled in this configuration");
  BihtConfig bc;
  bc.sparsity = cfg_.k_paths;
  bc.iters = cfg_.biht_iters;
  bc.step = cfg_.biht_step;
  bc.r_norm = setup.r_norm;
  return biht_estimate(setup.obs, *dict_, bc);
}

std::vector<TrialResult> TrialRunner::run(Index snr_idx, Index n_idx, Index trial_idx) const {
  const auto n_grid = cfg_.effective_n_grid();
  const double snr = cfg_.snr_grid_db.at(static_cast<std::size_t>(snr_idx));
  const Index n_train = n_grid.at(static_cast<std::size_t>(n_idx));
  const std::uint64_t seed = trial_seed(cfg_.base_seed, snr_idx, n_idx, trial_idx);
  const TrialSetup setup = make_trial(cfg_, snr, n_train, seed);

  std::vector<TrialResult> out;
  for (Estimator est : cfg_.estimators) {
    TrialResult r;
    r.estimator = est;
    r.snr_db = snr;
    r.n_train = n_train;
    r.trial_idx = trial_idx;
    r.seed = seed;
    const auto start = std::chrono::steady_clock::now();
    if (est == Estimator::kAr) {
      const ArResult ar = run_ar_on(setup);
      r.nmse = nmse(ar.h, setup.h);
      r.iterations = static_cast<Index>(ar.state.objective_trace.size());
      if (!ar.state.diagnostics.empty()) r.rho_solver = ar.state.diagnostics.front().solver;
    } else {
      const BihtResult b = run_biht_on(setup);
      r.nmse = nmse(b.h, setup.h);
      r.iterations = cfg_.biht_iters;
    }
    r.wall_time_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    out.push_back(r);
  }
  return out;
}

std::vector<TrialResult> run_trial(const ExperimentConfig& cfg, Index snr_idx, Index n_idx, Index trial_idx) {
  return TrialRunner(cfg).run(snr_idx, n_idx, trial_idx);
}

std::vector<AggregateRow> aggregate(const ExperimentConfig& cfg, const std::vector<TrialResult>& trials) {
  std::vector<AggregateRow> rows;
  const auto n_grid = cfg.effective_n_grid();
  for (Estimator est : cfg.estimators) {
    for (double snr : cfg.snr_grid_db) {
      for (Index n : n_grid) {
        std::vector<double> v;
        for (const auto& t : trials)
          if (t.estimator == est && t.snr_db == snr && t.n_train == n) v.push_back(t.nmse);
        if (v.empty()) continue;
        AggregateRow row;
        row.estimator = est;
        row.snr_db = snr;
        row.n_train = n;
        row.m_r = cfg.m_r;
        row.m_t = cfg.m_t;
        row.k_paths = cfg.k_paths;
        row.trials = static_cast<Index>(v.size());
        double sum = 0.0;
        for (double x : v) sum += x;
        row.mean_nmse = sum / static_cast<double>(v.size());
        double ss = 0.0;
        for (double x : v) ss += (x - row.mean_nmse) * (x - row.mean_nmse);
        row.std_nmse = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
        rows.push_back(row);
      }
    }
  }
  return rows;
}

SweepResult run_sweep(const ExperimentConfig& cfg, const ProgressCallback& progress) {
  const TrialRunner runner(cfg);
  const auto n_grid = cfg.effective_n_grid();
  const Index n_snr = static_cast<Index>(cfg.snr_grid_db.size());
  const Index n_n = static_cast<Index>(n_grid.size());
  const Index total = n_snr * n_n * cfg.trials;

  std::vector<std::vector<TrialResult>> slots(static_cast<std::size_t>(total));
  std::atomic<Index> next{0};
  std::atomic<Index> done{0};
  std::mutex mu;
  std::exception_ptr failure;

  auto worker = [&] {
    for (Index w = next++; w < total; w = next++) {
      const Index trial = w % cfg.trials;
      const Index n_idx = (w / cfg.trials) % n_n;
      const Index snr_idx = w / (cfg.trials * n_n);
      try {
        slots[static_cast<std::size_t>(w)] = runner.run(snr_idx, n_idx, trial);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!failure) failure = std::current_exception();
        next = total;
        return;
      }
      const Index d = ++done;
      if (progress) {
        std::lock_guard lock(mu);
        progress(d, total);
      }
    }
  };

  const Index n_threads = std::min<Index>(cfg.threads, std::max<Index>(total, 1));
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (Index i = 0; i < n_threads; ++i) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  SweepResult result;
  for (auto& slot : slots)
    for (auto& r : slot) result.trials.push_back(r);
  result.aggregate = aggregate(cfg, result.trials);
  return result;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_aggregate_csv(std::ostream& os, const std::vector<AggregateRow>& rows) {
  os << "estimator,snr_db,n_train,m_r,m_t,k_paths,trials,mean_nmse,std_nmse\n";
  for (const auto& r : rows) {
    os << to_string(r.estimator) << ',' << format_double(r.snr_db) << ',' << r.n_train << ',' << r.m_r << ','
       << r.m_t << ',' << r.k_paths << ',' << r.trials << ',' << format_double(r.mean_nmse) << ','
       << format_double(r.std_nmse) << '\n';
  }
}

void write_trials_csv(std::ostream& os, const ExperimentConfig& cfg, const std::vector<TrialResult>& trials,
                      bool include_timing) {
  os << "estimator,snr_db,n_train,m_r,m_t,k_paths,trial_idx,seed,nmse,iterations,wall_time_ms\n";
  for (const auto& t : trials) {
    os << to_string(t.estimator) << ',' << format_double(t.snr_db) << ',' << t.n_train << ',' << cfg.m_r << ','
       << cfg.m_t << ',' << cfg.k_paths << ',' << t.trial_idx << ',' << t.seed << ',' << format_double(t.nmse) << ',' << t.iterations << ','
       << (include_timing ? format_double(t.wall_time_ms) : std::string("0")) << '\n';
  }
}

std::string trials_path_for(const std::string& aggregate_path) {
  const std::filesystem::path p(aggregate_path);
  std::filesystem::path out = p.parent_path() / (p.stem().string() + "_trials" + p.extension().string());
  return out.string();
}

void write_sweep_outputs(const ExperimentConfig& cfg, const SweepResult& result) {
  auto open = [](const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
    return f;
  };
  {
    auto f = open(cfg.output_path);
    write_aggregate_csv(f, result.aggregate);
    if (!f) throw std::runtime_error("write failed: " + cfg.output_path);
  }
  const std::string raw = trials_path_for(cfg.output_path);
  auto f = open(raw);
  write_trials_csv(f, cfg, result.trials, cfg.record_timing);
  if (!f) throw std::runtime_error("write failed: " + raw);
}

}  // namespace onebit
