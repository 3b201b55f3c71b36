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

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "onebit/ar_estimator.hpp"
#include "onebit/biht.hpp"
#include "onebit/checks.hpp"
#include "onebit/config.hpp"
#include "onebit/harness.hpp"

namespace py = pybind11;
using namespace onebit;

namespace {

Link make_link(Index m_r, Index m_t, bool single_antenna_users) {
  Link link{{m_r, ArrayKind::kUla}, {m_t, single_antenna_users ? ArrayKind::kPerPathElement : ArrayKind::kUla}};
  link.validate();
  return link;
}

TrainingKind training_kind(const std::string& name) { return parse_training(name); }

py::dict params_dict(const ChannelParams& p) {
  py::dict d;
  d["doa"] = p.doa;
  d["dod"] = p.dod;
  d["gains"] = p.gains;
  return d;
}

py::list aggregate_rows(const std::vector<AggregateRow>& rows) {
  py::list out;
  for (const auto& r : rows) {
    py::dict d;
    d["estimator"] = std::string(to_string(r.estimator));
    d["snr_db"] = r.snr_db;
    d["n_train"] = r.n_train;
    d["m_r"] = r.m_r;
    d["m_t"] = r.m_t;
    d["k_paths"] = r.k_paths;
    d["trials"] = r.trials;
    d["mean_nmse"] = r.mean_nmse;
    d["std_nmse"] = r.std_nmse;
    out.append(d);
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_onebit_ar, m) {
  m.doc() = "One-bit MIMO channel estimation: amplitude retrieval and a BIHT baseline.";

  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

  m.def("sign_quantize", &sign_quantize, py::arg("z"));
  m.def("amplitude", &amplitude, py::arg("z"));
  m.def("odot_mix", &odot_mix, py::arg("a"), py::arg("b"));
  m.def("nmse", &nmse, py::arg("h_hat"), py::arg("h_true"));

  m.def(
      "steering_vector",
      [](Index m_elems, double angle) { return steering_vector({m_elems, ArrayKind::kUla}, angle); },
      py::arg("num_elements"), py::arg("angle"));

  m.def(
      "synth_channel",
      [](const RVector& doa, const RVector& dod, const CVector& gains, Index m_r, Index m_t,
         bool single_antenna_users) {
        ChannelParams p{doa, dod, gains};
        return synth_channel(p, make_link(m_r, m_t, single_antenna_users));
      },
      py::arg("doa"), py::arg("dod"), py::arg("gains"), py::arg("m_r"), py::arg("m_t"),
      py::arg("single_antenna_users") = false);

  m.def(
      "gen_training",
      [](Index m_t, Index n, const std::string& kind, std::uint64_t seed) {
        Rng rng(seed);
        return gen_training(m_t, n, training_kind(kind), rng);
      },
      py::arg("m_t"), py::arg("n"), py::arg("kind") = "semi_unitary", py::arg("seed") = 0);

  m.def(
      "observe",
      [](const CMatrix& h, const CMatrix& s, double snr_db, std::uint64_t seed) {
        Rng rng(seed);
        return observe(h, s, snr_db, rng).y;
      },
      py::arg("h"), py::arg("s"), py::arg("snr_db") = kNoiseless, py::arg("seed") = 0,
      "Y = csign(HS + N); snr_db=inf is noiseless.");

  m.def("update_gamma", &update_gamma, py::arg("y"), py::arg("hs"));
  m.def("secular_solve", &secular_solve, py::arg("lambda_mat"), py::arg("s"), py::arg("r_norm"),
        py::arg("tol") = 1e-12);
  m.def("special_case_semi_unitary", &special_case_semi_unitary, py::arg("lambda_mat"), py::arg("s"),
        py::arg("r_norm"), py::arg("tol") = 1e-12);
  m.def("special_case_unitary", &special_case_unitary, py::arg("lambda_mat"), py::arg("r_norm"));
  m.def("update_h", &update_h, py::arg("y"), py::arg("gamma"), py::arg("s"), py::arg("h_model"), py::arg("lam"),
        py::arg("r_norm"), py::arg("secular_tol") = 1e-12);
  m.def(
      "training_structure", [](const CMatrix& s) { return std::string(to_string(detect_training_structure(s))); },
      py::arg("s"));

  m.def(
      "khatri_rao_dict",
      [](const RVector& eta, Index m_r, Index m_t, bool users) {
        return khatri_rao_dict(eta, make_link(m_r, m_t, users));
      },
      py::arg("eta"), py::arg("m_r"), py::arg("m_t"), py::arg("single_antenna_users") = false);
  m.def(
      "ml_cost",
      [](const RVector& eta, const CVector& h_vec, Index m_r, Index m_t, bool users) {
        return ml_cost(eta, h_vec, make_link(m_r, m_t, users));
      },
      py::arg("eta"), py::arg("h_vec"), py::arg("m_r"), py::arg("m_t"), py::arg("single_antenna_users") = false);
  m.def(
      "ml_gradient",
      [](const RVector& eta, const CVector& h_vec, Index m_r, Index m_t, bool users) {
        return ml_gradient(eta, h_vec, make_link(m_r, m_t, users));
      },
      py::arg("eta"), py::arg("h_vec"), py::arg("m_r"), py::arg("m_t"), py::arg("single_antenna_users") = false);

  m.def(
      "run_ar",
      [](const CMatrix& y, const CMatrix& s, Index k_paths, double r_norm, bool users, double lam,
         Index max_outer_iters, double outer_tol, Index grad_iters) {
        ArConfig cfg;
        cfg.k_paths = k_paths;
        cfg.r_norm = r_norm;
        cfg.lambda = lam;
        cfg.max_outer_iters = max_outer_iters;
        cfg.outer_tol = outer_tol;
        cfg.grad_iters = grad_iters;
        QuantizedObservation obs{y, s, kNoiseless, 0};
        ArResult res;
        {
          py::gil_scoped_release release;
          res = run_ar(obs, make_link(y.rows(), s.rows(), users), cfg);
        }
        py::dict d = params_dict(res.params);
        d["h"] = res.h;
        d["gamma"] = res.state.gamma;
        d["objective_trace"] = res.state.objective_trace;
        d["solver"] = res.state.diagnostics.empty() ? std::string("none")
                                                    : std::string(to_string(res.state.diagnostics.front().solver));
        return d;
      },
      py::arg("y"), py::arg("s"), py::arg("k_paths"), py::arg("r_norm"), py::arg("single_antenna_users") = false,
      py::arg("lam") = 1.0, py::arg("max_outer_iters") = 200, py::arg("outer_tol") = 1e-6,
      py::arg("grad_iters") = 5);

  m.def(
      "biht_estimate",
      [](const CMatrix& y, const CMatrix& s, Index sparsity, double r_norm, bool users, Index grid_points,
         Index iters, double step) {
        const AngularDictionary dict = build_dictionary(make_link(y.rows(), s.rows(), users), grid_points);
        BihtConfig cfg{sparsity, iters, step, r_norm};
        BihtResult res;
        {
          py::gil_scoped_release release;
          res = biht_estimate(QuantizedObservation{y, s, kNoiseless, 0}, dict, cfg);
        }
        py::dict d;
        d["h"] = res.h;
        d["coefficients"] = res.coefficients;
        d["support"] = res.support;
        d["grid"] = dict.grid;
        return d;
      },
      py::arg("y"), py::arg("s"), py::arg("sparsity"), py::arg("r_norm") = 1.0,
      py::arg("single_antenna_users") = false, py::arg("grid_points") = 128, py::arg("iters") = 300,
      py::arg("step") = 0.0);

  m.def(
      "_run_sweep_json",
      [](const std::string& text) {
        const nlohmann::json j = nlohmann::json::parse(text);
        ExperimentConfig cfg;
        if (j.contains("preset")) cfg = preset(j.at("preset").get<std::string>());
        apply_json(cfg, j);
        cfg.validate();
        SweepResult res;
        {
          py::gil_scoped_release release;
          res = run_sweep(cfg);
        }
        py::list trials;
        for (const auto& t : res.trials) {
          py::dict d;
          d["estimator"] = std::string(to_string(t.estimator));
          d["snr_db"] = t.snr_db;
          d["n_train"] = t.n_train;
          d["trial_idx"] = t.trial_idx;
          d["seed"] = t.seed;
          d["nmse"] = t.nmse;
          d["iterations"] = t.iterations;
          trials.append(d);
        }
        return py::make_tuple(aggregate_rows(res.aggregate), trials);
      },
      py::arg("config_json"));

  m.def(
      "_preset_json", [](const std::string& name) { return to_json(preset(name)).dump(); }, py::arg("name"));

  m.def(
      "run_checks",
      [](std::uint64_t seed) {
        py::list out;
        for (const auto& c : run_checks(seed)) out.append(py::make_tuple(c.name, c.passed, c.detail));
        return out;
      },
      py::arg("seed") = 7);
}
