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

#include "onebit/h_update.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace onebit {

namespace {

constexpr int kMaxRootIters = 500;
constexpr double kBracketOffset = 1e-12;

double max_abs_identity_deviation(const CMatrix& g) {
  return (g - CMatrix::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff();
}

void require_problem(const CMatrix& lambda_mat, double r_norm) {
  if (!(r_norm > 0.0)) throw std::invalid_argument("norm budget R must be positive");
  if (lambda_mat.size() == 0 || lambda_mat.squaredNorm() == 0.0) {
    throw std::invalid_argument("Lambda is zero: channel update undefined");
  }
  require_finite(lambda_mat, "Lambda");
}

// Root of g(p) = sum_i w_i / (p + e_i)^2 = R on p > -min(e).
double solve_secular_weights(const RVector& w, const RVector& e, double r_norm, double tol) {
  const double e_min = e.minCoeff();
  auto g = [&](double p) { return (w.array() / (p + e.array()).square()).sum(); };
  auto dg = [&](double p) { return -2.0 * (w.array() / (p + e.array()).cube()).sum(); };

  double lo = -e_min + kBracketOffset;
  if (!(g(lo) > r_norm)) {
    throw NumericalError("secular equation: no sign change above -s_min (hard case)");
  }
  double hi = std::max(lo + kBracketOffset, std::sqrt(w.sum() / r_norm));
  for (int i = 0; g(hi) > r_norm; ++i) {
    if (i > 200) throw NumericalError("secular equation: upper bracket did not close");
    hi = lo + 2.0 * (hi - lo);
  }
  if (g(hi) == r_norm) return hi;

  // Newton on phi(p) = 1/sqrt(g(p)) - 1/sqrt(R), which is close to linear.
  const double inv_sqrt_r = 1.0 / std::sqrt(r_norm);
  double p = hi;
  for (int it = 0; it < kMaxRootIters; ++it) {
    const double gp = g(p);
    if (std::abs(gp - r_norm) <= tol * r_norm) return p;
    if (gp > r_norm) lo = p; else hi = p;
    const double phi = 1.0 / std::sqrt(gp) - inv_sqrt_r;
    const double dphi = -0.5 * dg(p) / (gp * std::sqrt(gp));
    double next = p - phi / dphi;
    if (!std::isfinite(next) || next <= lo || next >= hi) next = 0.5 * (lo + hi);
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(p))) {
      return next;
    }
    p = next;
  }
  throw NumericalError("secular equation: root iteration did not converge");
}

}  // namespace

std::string_view to_string(RhoSolver solver) {
  switch (solver) {
    case RhoSolver::kGeneral: return "general";
    case RhoSolver::kSemiUnitary: return "semi_unitary";
    case RhoSolver::kUnitary: return "unitary";
  }
  return "unknown";
}

RhoSolver detect_training_structure(const CMatrix& s, double tol) {
  if (s.size() == 0) return RhoSolver::kGeneral;
  const bool orthonormal_cols = s.cols() <= s.rows() &&
                                max_abs_identity_deviation(s.adjoint() * s) <= tol;
  if (!orthonormal_cols) return RhoSolver::kGeneral;
  if (s.rows() == s.cols() && max_abs_identity_deviation(s * s.adjoint()) <= tol) {
    return RhoSolver::kUnitary;
  }
  return RhoSolver::kSemiUnitary;
}

double secular_solve(const CMatrix& lambda_mat, const CMatrix& s, double r_norm, double tol) {
  require_problem(lambda_mat, r_norm);
  if (lambda_mat.cols() != s.rows()) throw std::invalid_argument("secular_solve: Lambda/S mismatch");
  const HermEig eig = herm_eig(s * s.adjoint(), 1e-8);
  const RVector w = (lambda_mat * eig.eigenvectors).colwise().squaredNorm().transpose();
  return solve_secular_weights(w, eig.eigenvalues, r_norm, tol);
}

double special_case_semi_unitary(const CMatrix& lambda_mat, const CMatrix& s, double r_norm,
                                 double tol) {
  require_problem(lambda_mat, r_norm);
  if (lambda_mat.cols() != s.rows()) throw std::invalid_argument("semi-unitary: Lambda/S mismatch");
  if (s.cols() > s.rows() || max_abs_identity_deviation(s.adjoint() * s) > 1e-8) {
    throw std::invalid_argument("semi-unitary: S^H S != I");
  }
  const double t1 = lambda_mat.squaredNorm();
  const double t2 = (lambda_mat * s).squaredNorm();
  const double r = r_norm;
  auto q = [&](double p) {
    return (((r * p + 2.0 * r) * p + (r - t1)) * p + 2.0 * (t2 - t1)) * p + (t2 - t1);
  };
  auto dq = [&](double p) {
    return ((4.0 * r * p + 6.0 * r) * p + 2.0 * (r - t1)) * p + 2.0 * (t2 - t1);
  };

  // Every positive root satisfies p <= sqrt(t1/R); grow past it, then scan
  // down geometrically for a point where the quartic is negative.
  double hi = std::max(1.0, std::sqrt(t1 / r));
  for (int i = 0; q(hi) <= 0.0; ++i) {
    if (i > 200) throw NumericalError("semi-unitary quartic: no upper bracket");
    hi *= 2.0;
  }
  double lo = hi;
  for (int i = 0; q(lo) >= 0.0; ++i) {
    if (i > 1100 || lo == 0.0) throw NumericalError("semi-unitary quartic: no positive root");
    hi = lo;
    lo *= 0.5;
  }
  const double scale = std::max({r, t1, 1.0});
  double p = 0.5 * (lo + hi);
  for (int it = 0; it < kMaxRootIters; ++it) {
    const double qp = q(p);
    if (qp < 0.0) lo = p; else hi = p;
    // q(p) = p^2 (1+p)^2 (R - g(p)), so this bounds the secular residual by tol * R.
    const double ratio = p * p * (1.0 + p) * (1.0 + p);
    if (std::abs(qp) <= tol * r * ratio || std::abs(qp) <= std::numeric_limits<double>::epsilon() * scale) {
      return p;
    }
    double next = p - qp / dq(p);
    if (!std::isfinite(next) || next <= lo || next >= hi) next = 0.5 * (lo + hi);
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, p)) return next;
    p = next;
  }
  throw NumericalError("semi-unitary quartic: root iteration did not converge");
}

double special_case_unitary(const CMatrix& lambda_mat, double r_norm) {
  require_problem(lambda_mat, r_norm);
  return std::sqrt(lambda_mat.squaredNorm() / r_norm) - 1.0;
}

CMatrix h_from_rho(const CMatrix& lambda_mat, const CMatrix& s, double rho) {
  CMatrix m = s * s.adjoint();
  m.diagonal().array() += rho;
  // Right division: H M = Lambda  <=>  M^H H^H = Lambda^H, and M is Hermitian.
  return m.ldlt().solve(lambda_mat.adjoint()).adjoint();
}

CMatrix h_from_rho_semi_unitary(const CMatrix& lambda_mat, const CMatrix& s, double rho) {
  return lambda_mat / rho - ((lambda_mat * s) * s.adjoint()) / (rho * (1.0 + rho));
}

ChannelUpdater::ChannelUpdater(CMatrix s, double secular_tol)
    : ChannelUpdater(s, detect_training_structure(s), secular_tol) {}

ChannelUpdater::ChannelUpdater(CMatrix s, RhoSolver solver, double secular_tol)
    : s_(std::move(s)), solver_(solver), tol_(secular_tol) {
  require_finite(s_, "training S");
  const RhoSolver found = detect_training_structure(s_);
  const bool supported = solver_ == RhoSolver::kGeneral || solver_ == found ||
                         (solver_ == RhoSolver::kSemiUnitary && found == RhoSolver::kUnitary);
  if (!supported) {
    throw std::invalid_argument("ChannelUpdater: training does not have the structure the " +
                                std::string(to_string(solver_)) + " path needs");
  }
  HermEig eig = herm_eig(s_ * s_.adjoint(), 1e-8);
  eig_values_ = std::move(eig.eigenvalues);
  eig_vectors_ = std::move(eig.eigenvectors);
}

CMatrix ChannelUpdater::lambda_matrix(const CMatrix& z, const CMatrix& h_model, double lambda) const {
  return z * s_.adjoint() + lambda * h_model;
}

ChannelUpdater::Result ChannelUpdater::solve(const CMatrix& lambda_mat, double r_norm) const {
  require_problem(lambda_mat, r_norm);
  Result out;
  out.solver = solver_;
  switch (solver_) {
    case RhoSolver::kUnitary:
      out.rho = special_case_unitary(lambda_mat, r_norm);
      out.h = lambda_mat / (1.0 + out.rho);
      return out;
    case RhoSolver::kSemiUnitary:
      out.rho = special_case_semi_unitary(lambda_mat, s_, r_norm, tol_);
      out.h = h_from_rho_semi_unitary(lambda_mat, s_, out.rho);
      return out;
    case RhoSolver::kGeneral: {
      const CMatrix c = lambda_mat * eig_vectors_;
      const RVector w = c.colwise().squaredNorm().transpose();
      out.rho = solve_secular_weights(w, eig_values_, r_norm, tol_);
      const RVector inv = (eig_values_.array() + out.rho).inverse();
      out.h = c * inv.asDiagonal() * eig_vectors_.adjoint();
      return out;
    }
  }
  throw std::logic_error("unreachable");
}

ChannelUpdater::Result ChannelUpdater::update(const CMatrix& z, const CMatrix& h_model, double lambda,
                                              double r_norm) const {
  return solve(lambda_matrix(z, h_model, lambda), r_norm);
}

CMatrix update_h(const CMatrix& y, const CMatrix& gamma, const CMatrix& s, const CMatrix& h_model,
                 double lambda, double r_norm, double secular_tol) {
  ChannelUpdater updater(s, secular_tol);
  return updater.update(odot_mix(y, gamma), h_model, lambda, r_norm).h;
}

}  // namespace onebit
