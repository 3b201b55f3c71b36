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

#include "onebit/ar_estimator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>

namespace onebit {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kPinvThreshold = 1e-10;

Index paths_in_eta(const RVector& eta, const Link& link) {
  if (link.has_dod()) {
    if (eta.size() % 2 != 0) throw std::invalid_argument("eta must have even length [doa; dod]");
    return eta.size() / 2;
  }
  return eta.size();
}

Eigen::Map<const CVector> vec_view(const CMatrix& m) { return {m.data(), m.size()}; }

CMatrix unvec(const CVector& v, Index rows, Index cols) {
  return Eigen::Map<const CMatrix>(v.data(), rows, cols);
}

// Column k of the result is kron(conj(tx_k), rx_k).
CMatrix kron_columns(const CMatrix& tx, const CMatrix& rx) {
  const Index mr = rx.rows();
  const Index mt = tx.rows();
  CMatrix out(mr * mt, rx.cols());
  for (Index k = 0; k < rx.cols(); ++k)
    for (Index t = 0; t < mt; ++t) out.col(k).segment(t * mr, mr) = std::conj(tx(t, k)) * rx.col(k);
  return out;
}

RVector clamp_angles(RVector eta) { return eta.cwiseMax(0.0).cwiseMin(kPi); }

RVector uniform_grid(Index points) { return RVector::LinSpaced(points, 0.0, kPi); }

}  // namespace

void ArConfig::validate() const {
  if (k_paths < 1) throw std::invalid_argument("ArConfig: k_paths must be >= 1");
  if (!(lambda > 0.0)) throw std::invalid_argument("ArConfig: lambda must be positive");
  if (!(r_norm > 0.0)) throw std::invalid_argument("ArConfig: r_norm must be positive");
  if (!(outer_tol > 0.0) || !(secular_tol > 0.0)) {
    throw std::invalid_argument("ArConfig: tolerances must be positive");
  }
  if (max_outer_iters < 0 || grad_iters < 0) throw std::invalid_argument("ArConfig: negative iteration cap");
  if (init_grid_points < 2) throw std::invalid_argument("ArConfig: init_grid_points must be >= 2");
  if (!(armijo.initial_step > 0.0) || !(armijo.shrink > 0.0 && armijo.shrink < 1.0) ||
      !(armijo.slope > 0.0 && armijo.slope < 1.0) || !(armijo.min_step > 0.0)) {
    throw std::invalid_argument("ArConfig: invalid Armijo parameters");
  }
}

CMatrix khatri_rao_dict(const RVector& eta, const Link& link) {
  const Index k = paths_in_eta(eta, link);
  const RVector doa = eta.head(k);
  const RVector dod = link.has_dod() ? RVector(eta.tail(k)) : RVector();
  return kron_columns(tx_response(link, dod, k), steering_matrix(link.rx, doa));
}

CMatrix khatri_rao_derivative(const RVector& eta, const Link& link) {
  const Index k = paths_in_eta(eta, link);
  const RVector doa = eta.head(k);
  const CMatrix ar = steering_matrix(link.rx, doa);
  const CMatrix dar = steering_derivative(link.rx, doa);
  if (!link.has_dod()) return kron_columns(tx_response(link, RVector(), k), dar);
  const RVector dod = eta.tail(k);
  const CMatrix at = steering_matrix(link.tx, dod);
  const CMatrix dat = steering_derivative(link.tx, dod);
  CMatrix out(ar.rows() * at.rows(), 2 * k);
  out.leftCols(k) = kron_columns(at, dar);
  out.rightCols(k) = kron_columns(dat, ar);
  return out;
}

CMatrix model_channel(const RVector& eta, const CVector& beta, const Link& link) {
  const CMatrix a = khatri_rao_dict(eta, link);
  if (a.cols() != beta.size()) throw std::invalid_argument("model_channel: beta length != K");
  return unvec(a * beta, link.rx.num_elements, link.tx.num_elements);
}

ObjectiveTerms objective_terms(const ArState& state, const CMatrix& y, const CMatrix& s,
                               const Link& link) {
  ObjectiveTerms t;
  t.data = (odot_mix(y, state.gamma) - state.h * s).squaredNorm();
  t.model = (state.h - model_channel(state.eta, state.beta, link)).squaredNorm();
  return t;
}

double objective(const ArState& state, const CMatrix& y, const CMatrix& s, const Link& link,
                 double lambda) {
  return objective_terms(state, y, s, link).total(lambda);
}

CMatrix update_gamma(const CMatrix& y, const CMatrix& hs) {
  require_same_shape(y, hs, "update_gamma");
  return y.binaryExpr(hs, [](const Complex& a, const Complex& b) {
    return Complex(std::max(a.real() * b.real(), 0.0), std::max(a.imag() * b.imag(), 0.0));
  });
}

MlEvaluation ml_evaluate(const RVector& eta, const CVector& h_vec, const Link& link) {
  const CMatrix a = khatri_rao_dict(eta, link);
  if (a.rows() != h_vec.size()) throw std::invalid_argument("ml_evaluate: h length mismatch");
  MlEvaluation out;
  // Pivoted QR gives A^+ h directly for full column rank; otherwise fall back
  // to the thresholded SVD pseudo-inverse.
  Eigen::ColPivHouseholderQR<CMatrix> qr(a);
  qr.setThreshold(kPinvThreshold);
  if (qr.rank() == a.cols()) {
    out.beta = qr.solve(h_vec);
  } else {
    out.rank_deficient = true;
    out.beta = pinv(a, kPinvThreshold) * h_vec;
  }
  out.residual = h_vec - a * out.beta;
  out.cost = out.residual.squaredNorm();
  return out;
}

double ml_cost(const RVector& eta, const CVector& h_vec, const Link& link) {
  return ml_evaluate(eta, h_vec, link).cost;
}

namespace {

RVector gradient_from(const MlEvaluation& ev, const RVector& eta, const Link& link) {
  const CMatrix d = khatri_rao_derivative(eta, link);
  const Index k = ev.beta.size();
  RVector g(d.cols());
  for (Index i = 0; i < d.cols(); ++i) {
    g(i) = -2.0 * (ev.beta(i % k) * ev.residual.dot(d.col(i))).real();
  }
  return g;
}

}  // namespace

RVector ml_gradient(const RVector& eta, const CVector& h_vec, const Link& link) {
  return gradient_from(ml_evaluate(eta, h_vec, link), eta, link);
}

AngleUpdate refine_angles(const RVector& eta, const CMatrix& h, const Link& link, const ArConfig& cfg) {
  const auto h_vec = vec_view(h);
  AngleUpdate out;
  out.eta = clamp_angles(eta);
  MlEvaluation ev = ml_evaluate(out.eta, h_vec, link);
  out.costs.push_back(ev.cost);

  for (Index it = 0; it < cfg.grad_iters; ++it) {
    const RVector g = gradient_from(ev, out.eta, link);
    if (!g.allFinite() || g.squaredNorm() == 0.0) break;
    std::optional<MlEvaluation> accepted;
    RVector candidate;
    // Later searches restart from twice the last accepted step.
    double step = out.step_sizes.empty() ? cfg.armijo.initial_step
                                          : std::min(cfg.armijo.initial_step, 2.0 * out.step_sizes.back());
    for (; step >= cfg.armijo.min_step; step *= cfg.armijo.shrink) {
      candidate = clamp_angles(out.eta - step * g);
      MlEvaluation trial = ml_evaluate(candidate, h_vec, link);
      // Projected-gradient Armijo test; the explicit comparison guards rounding.
      if (trial.cost <= ev.cost - cfg.armijo.slope * g.dot(out.eta - candidate) && trial.cost <= ev.cost) {
        accepted = std::move(trial);
        break;
      }
    }
    if (!accepted) {
      out.line_search_failed = true;
      break;
    }
    const bool moved = candidate != out.eta;
    out.eta = candidate;
    ev = std::move(*accepted);
    out.costs.push_back(ev.cost);
    out.step_sizes.push_back(step);
    if (!moved) break;
  }
  out.beta = ev.beta;
  return out;
}

CMatrix initial_channel(const CMatrix& y, const CMatrix& s, double r_norm) {
  const double eps = 1e-3 * (s * s.adjoint()).trace().real() / static_cast<double>(s.rows());
  CMatrix h0 = h_from_rho(y * s.adjoint(), s, eps);
  const double n2 = h0.squaredNorm();
  if (!(n2 > 0.0) || !std::isfinite(n2)) throw NumericalError("initial_channel: degenerate warm start");
  h0 *= std::sqrt(r_norm / n2);
  return h0;
}

RVector initial_angles(const CMatrix& h, const Link& link, Index k_paths, Index grid_points) {
  const RVector grid = uniform_grid(grid_points);
  const CMatrix rx_grid = steering_matrix(link.rx, grid);

  if (!link.has_dod()) {
    // Each terminal sees its own path: pick the spectral peak per column.
    if (k_paths > h.cols()) throw std::invalid_argument("initial_angles: more paths than terminals");
    RVector eta(k_paths);
    for (Index k = 0; k < k_paths; ++k) {
      Index best = 0;
      (rx_grid.adjoint() * h.col(k)).cwiseAbs().maxCoeff(&best);
      eta(k) = grid(best);
    }
    return eta;
  }

  const CMatrix tx_grid = steering_matrix(link.tx, grid);
  const auto h_vec = vec_view(h);
  std::vector<std::pair<Index, Index>> picks;
  RVector doa(k_paths), dod(k_paths);
  CMatrix residual = h;
  for (Index k = 0; k < k_paths; ++k) {
    Eigen::MatrixXd spectrum = (rx_grid.adjoint() * residual * tx_grid).cwiseAbs();
    for (const auto& [i, j] : picks) spectrum(i, j) = -1.0;
    Index bi = 0, bj = 0;
    spectrum.maxCoeff(&bi, &bj);
    picks.emplace_back(bi, bj);
    doa(k) = grid(bi);
    dod(k) = grid(bj);

    RVector eta(2 * (k + 1));
    eta << doa.head(k + 1), dod.head(k + 1);
    const MlEvaluation ev = ml_evaluate(eta, h_vec, link);
    residual = unvec(ev.residual, h.rows(), h.cols());
  }
  RVector eta(2 * k_paths);
  eta << doa, dod;
  return eta;
}

ChannelParams params_from_eta(const RVector& eta, const CVector& beta, const Link& link) {
  const Index k = paths_in_eta(eta, link);
  ChannelParams p;
  p.doa = eta.head(k);
  if (link.has_dod()) p.dod = eta.tail(k);
  p.gains = beta;
  return p;
}

ArResult run_ar(const QuantizedObservation& obs, const Link& link, const ArConfig& cfg,
                const IterationCallback& on_iteration) {
  cfg.validate();
  link.validate();
  if (obs.y.rows() != link.rx.num_elements || obs.s.rows() != link.tx.num_elements ||
      obs.y.cols() != obs.s.cols()) {
    throw std::invalid_argument("run_ar: observation dimensions do not match the link");
  }
  require_finite(obs.y, "Y");
  require_finite(obs.s, "S");

  const ChannelUpdater updater(obs.s, cfg.secular_tol);
  std::optional<ChannelUpdater> fallback;

  ArState state;
  state.h = initial_channel(obs.y, obs.s, cfg.r_norm);
  state.eta = initial_angles(state.h, link, cfg.k_paths, cfg.init_grid_points);
  state.beta = ml_evaluate(state.eta, vec_view(state.h), link).beta;
  state.gamma = CMatrix::Zero(obs.y.rows(), obs.y.cols());

  for (Index r = 1; r <= cfg.max_outer_iters; ++r) {
    state.gamma = update_gamma(obs.y, state.h * obs.s);

    const AngleUpdate angles = refine_angles(state.eta, state.h, link, cfg);
    state.eta = angles.eta;
    state.beta = angles.beta;

    const CMatrix z = odot_mix(obs.y, state.gamma);
    const CMatrix h_model = model_channel(state.eta, state.beta, link);
    ChannelUpdater::Result upd;
    try {
      upd = updater.update(z, h_model, cfg.lambda, cfg.r_norm);
    } catch (const NumericalError&) {
      if (updater.solver() == RhoSolver::kGeneral) throw;
      if (!fallback) fallback.emplace(obs.s, RhoSolver::kGeneral, cfg.secular_tol);
      upd = fallback->update(z, h_model, cfg.lambda, cfg.r_norm);
    }
    state.h = std::move(upd.h);

    IterationRecord rec;
    rec.iteration = r;
    const ObjectiveTerms terms = objective_terms(state, obs.y, obs.s, link);
    rec.data_term = terms.data;
    rec.model_term = terms.model;
    rec.objective = terms.total(cfg.lambda);
    rec.ml_cost = angles.costs.back();
    rec.rho = upd.rho;
    rec.solver = upd.solver;
    rec.step_sizes = angles.step_sizes;

    const double prev = state.objective_trace.empty() ? 0.0 : state.objective_trace.back();
    state.objective_trace.push_back(rec.objective);
    if (on_iteration) on_iteration(rec);
    state.diagnostics.push_back(std::move(rec));

    if (state.objective_trace.size() >= 2) {
      const double cur = state.objective_trace.back();
      if (std::abs(prev - cur) <= cfg.outer_tol * std::max(prev, std::numeric_limits<double>::min())) break;
    }
  }

  ArResult result;
  result.params = params_from_eta(state.eta, state.beta, link);
  result.h = state.h;
  result.state = std::move(state);
  return result;
}

}  // namespace onebit
