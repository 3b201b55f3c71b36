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

#include <functional>
#include <vector>

#include "onebit/channel_model.hpp"
#include "onebit/h_update.hpp"

namespace onebit {

struct ArmijoParams {
  double initial_step = 1.0;
  double shrink = 0.5;
  double slope = 1e-4;
  /// Backtracking gives up below this step (line-search failure).
  double min_step = 1e-20;
};

struct ArConfig {
  Index k_paths = 1;
  double lambda = 1.0;
  /// Norm budget R for ||H||_F^2.
  double r_norm = 1.0;
  Index max_outer_iters = 200;
  double outer_tol = 1e-6;
  Index grad_iters = 5;
  ArmijoParams armijo;
  Index init_grid_points = 64;
  double secular_tol = 1e-12;

  void validate() const;
};

/// One record per outer iteration.
struct IterationRecord {
  Index iteration = 0;
  double objective = 0.0;
  double data_term = 0.0;   ///< ||Y (odot) Gamma - H S||_F^2
  double model_term = 0.0;  ///< ||H - H_model||_F^2 (unweighted)
  double ml_cost = 0.0;     ///< concentrated cost after the angle step
  double rho = 0.0;
  RhoSolver solver = RhoSolver::kGeneral;
  std::vector<double> step_sizes;
};

struct ArState {
  CMatrix h;
  CMatrix gamma;
  RVector eta;  ///< [doa; dod], or [doa] without departure angles
  CVector beta;
  std::vector<double> objective_trace;
  std::vector<IterationRecord> diagnostics;
};

struct ArResult {
  ChannelParams params;
  CMatrix h;
  ArState state;
};

struct ObjectiveTerms {
  double data = 0.0;
  double model = 0.0;
  double total(double lambda) const { return data + lambda * model; }
};

/// A(eta) * beta reshaped to M_r x M_t.
CMatrix model_channel(const RVector& eta, const CVector& beta, const Link& link);

ObjectiveTerms objective_terms(const ArState& state, const CMatrix& y, const CMatrix& s, const Link& link);

/// ||Y (odot) Gamma - H S||_F^2 + lambda ||H - A_r diag(beta) A_t^H||_F^2.
double objective(const ArState& state, const CMatrix& y, const CMatrix& s, const Link& link,
                 double lambda);

/// Closed-form amplitude update: max(Re Y Re HS, 0) + j max(Im Y Im HS, 0).
CMatrix update_gamma(const CMatrix& y, const CMatrix& hs);

/// (M_r M_t) x K matrix with columns conj(a_t(dod_k)) kron a_r(doa_k), so that
/// vec(A_r diag(beta) A_t^H) = A beta (column-major vec).
CMatrix khatri_rao_dict(const RVector& eta, const Link& link);

/// Derivatives of the Khatri-Rao columns with respect to each entry of eta;
/// same column layout as eta.
CMatrix khatri_rao_derivative(const RVector& eta, const Link& link);

/// Concentrated ML cost ||(I - A A^+) h||^2 and its gradient.
struct MlEvaluation {
  double cost = 0.0;
  CVector beta;            ///< A^+ h
  CVector residual;        ///< (I - A A^+) h
  bool rank_deficient = false;
};

MlEvaluation ml_evaluate(const RVector& eta, const CVector& h_vec, const Link& link);
double ml_cost(const RVector& eta, const CVector& h_vec, const Link& link);
/// Entry i is -2 Re(beta_k * residual^H d_i) where d_i differentiates column k.
RVector ml_gradient(const RVector& eta, const CVector& h_vec, const Link& link);

struct AngleUpdate {
  RVector eta;
  CVector beta;
  std::vector<double> costs;  ///< ml_cost of the accepted iterates, starting with the input
  std::vector<double> step_sizes;
  bool line_search_failed = false;
};

/// Armijo-backtracked projected gradient steps on ml_cost (angles stay in
/// [0, pi]), followed by beta = A(eta)^+ h. Never increases ml_cost.
AngleUpdate refine_angles(const RVector& eta, const CMatrix& h, const Link& link, const ArConfig& cfg);

/// Least-squares warm start Y S^H (SS^H + eps I)^{-1} scaled to ||H||_F^2 = R.
CMatrix initial_channel(const CMatrix& y, const CMatrix& s, double r_norm);

/// Greedy peak picking of K atoms on a grid matched-filter spectrum, with the
/// selected atoms projected out of the residual after each pick.
RVector initial_angles(const CMatrix& h, const Link& link, Index k_paths, Index grid_points);

ChannelParams params_from_eta(const RVector& eta, const CVector& beta, const Link& link);

using IterationCallback = std::function<void(const IterationRecord&)>;

/// Alternates amplitude, angle/gain, and channel updates until the relative
/// objective change drops below cfg.outer_tol or cfg.max_outer_iters is hit.
/// The channel update path is picked from the structure of obs.s.
ArResult run_ar(const QuantizedObservation& obs, const Link& link, const ArConfig& cfg,
                const IterationCallback& on_iteration = {});

}  // namespace onebit
