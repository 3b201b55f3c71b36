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

#include "onebit/config.hpp"

#include <fstream>
#include <set>

namespace onebit {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!known.contains(it.key())) throw std::invalid_argument("config: unknown key '" + where + it.key() + "'");
  }
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

void apply_ar(ArConfig& ar, const json& j) {
  reject_unknown(j,
                 {"lambda", "max_outer_iters", "outer_tol", "grad_iters", "armijo_initial_step",
                  "armijo_shrink", "armijo_slope", "init_grid_points", "secular_tol"},
                 "ar.");
  read(j, "lambda", ar.lambda);
  read(j, "max_outer_iters", ar.max_outer_iters);
  read(j, "outer_tol", ar.outer_tol);
  read(j, "grad_iters", ar.grad_iters);
  read(j, "armijo_initial_step", ar.armijo.initial_step);
  read(j, "armijo_shrink", ar.armijo.shrink);
  read(j, "armijo_slope", ar.armijo.slope);
  read(j, "init_grid_points", ar.init_grid_points);
  read(j, "secular_tol", ar.secular_tol);
}

}  // namespace

void apply_json(ExperimentConfig& cfg, const json& j) {
  if (!j.is_object()) throw std::invalid_argument("config: top level must be an object");
  reject_unknown(j,
                 {"preset", "scenario", "m_r", "m_t", "n_train", "k_paths", "tx_array", "training",
                  "snr_grid_db", "n_grid", "trials", "min_angle_sep", "estimators", "base_seed", "norm_mode",
                  "ar", "biht", "threads", "record_timing", "output_path"},
                 "");
  if (j.contains("scenario")) cfg.scenario = parse_scenario(j.at("scenario").get<std::string>());
  read(j, "m_r", cfg.m_r);
  read(j, "m_t", cfg.m_t);
  read(j, "n_train", cfg.n_train);
  read(j, "k_paths", cfg.k_paths);
  if (j.contains("tx_array")) cfg.tx_array = parse_tx_array(j.at("tx_array").get<std::string>());
  if (j.contains("training")) cfg.training = parse_training(j.at("training").get<std::string>());
  read(j, "snr_grid_db", cfg.snr_grid_db);
  read(j, "n_grid", cfg.n_grid);
  read(j, "trials", cfg.trials);
  read(j, "min_angle_sep", cfg.min_angle_sep);
  if (j.contains("estimators")) {
    cfg.estimators.clear();
    for (const auto& e : j.at("estimators")) cfg.estimators.push_back(parse_estimator(e.get<std::string>()));
  }
  read(j, "base_seed", cfg.base_seed);
  if (j.contains("norm_mode")) cfg.norm_mode = parse_norm_mode(j.at("norm_mode").get<std::string>());
  if (j.contains("ar")) apply_ar(cfg.ar, j.at("ar"));
  if (j.contains("biht")) {
    const json& b = j.at("biht");
    reject_unknown(b, {"grid_points", "iters", "step"}, "biht.");
    read(b, "grid_points", cfg.biht_grid_points);
    read(b, "iters", cfg.biht_iters);
    read(b, "step", cfg.biht_step);
  }
  read(j, "threads", cfg.threads);
  read(j, "record_timing", cfg.record_timing);
  read(j, "output_path", cfg.output_path);
  cfg.ar.k_paths = cfg.k_paths;
}

json to_json(const ExperimentConfig& cfg) {
  json est = json::array();
  for (Estimator e : cfg.estimators) est.push_back(std::string(to_string(e)));
  return json{
      {"scenario", std::string(to_string(cfg.scenario))},
      {"m_r", cfg.m_r},
      {"m_t", cfg.m_t},
      {"n_train", cfg.n_train},
      {"k_paths", cfg.k_paths},
      {"tx_array", std::string(to_string(cfg.tx_array))},
      {"training", std::string(to_string(cfg.training))},
      {"snr_grid_db", cfg.snr_grid_db},
      {"n_grid", cfg.effective_n_grid()},
      {"trials", cfg.trials},
      {"min_angle_sep", cfg.min_angle_sep},
      {"estimators", est},
      {"base_seed", cfg.base_seed},
      {"norm_mode", std::string(to_string(cfg.norm_mode))},
      {"ar",
       {{"lambda", cfg.ar.lambda},
        {"max_outer_iters", cfg.ar.max_outer_iters},
        {"outer_tol", cfg.ar.outer_tol},
        {"grad_iters", cfg.ar.grad_iters},
        {"armijo_initial_step", cfg.ar.armijo.initial_step},
        {"armijo_shrink", cfg.ar.armijo.shrink},
        {"armijo_slope", cfg.ar.armijo.slope},
        {"init_grid_points", cfg.ar.init_grid_points},
        {"secular_tol", cfg.ar.secular_tol}}},
      {"biht", {{"grid_points", cfg.biht_grid_points}, {"iters", cfg.biht_iters}, {"step", cfg.biht_step}}},
      {"threads", cfg.threads},
      {"record_timing", cfg.record_timing},
      {"output_path", cfg.output_path},
  };
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open config '" + path + "'");
  json j;
  try {
    j = json::parse(f, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument("config '" + path + "': " + e.what());
  }
  ExperimentConfig cfg;
  if (j.contains("preset")) cfg = preset(j.at("preset").get<std::string>());
  apply_json(cfg, j);
  return cfg;
}

}  // namespace onebit
