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

#include <string_view>

#include "onebit/core_ops.hpp"

namespace onebit {

/// How the dual variable of the sphere-constrained channel update is found.
enum class RhoSolver {
  kGeneral,      ///< secular equation via eigendecomposition of SS^H
  kSemiUnitary,  ///< quartic for S^H S = I
  kUnitary,      ///< closed form for S^H S = S S^H = I
};

std::string_view to_string(RhoSolver solver);

/// Classifies the training matrix: unitary, semi-unitary (orthonormal
/// columns, N < M_t) or general. `tol` bounds the max-abs deviation from I.
RhoSolver detect_training_structure(const CMatrix& s, double tol = 1e-8);

/// Solves sum_i ||c_i||^2 / (rho + s_i)^2 = R for rho > -s_min, where s_i are
/// the eigenvalues of SS^H with eigenvectors U and c_i is the i-th column of
/// Lambda * U. Safeguarded Newton on 1/sqrt(g) - 1/sqrt(R) with bisection;
/// converged when the residual is within tol * R.
///
/// Throws std::invalid_argument for Lambda == 0 or R <= 0, NumericalError
/// when the secular function has no sign change on the bracket (the
/// "hard case" where Lambda has no component along the smallest eigenvector).
double secular_solve(const CMatrix& lambda_mat, const CMatrix& s, double r_norm, double tol = 1e-12);

/// Unique positive root of
///   R p^4 + 2R p^3 + (R - t1) p^2 + 2(t2 - t1) p + t2 - t1 = 0,
/// t1 = ||Lambda||_F^2, t2 = ||Lambda S||_F^2. Requires S^H S = I.
double special_case_semi_unitary(const CMatrix& lambda_mat, const CMatrix& s, double r_norm,
                                 double tol = 1e-12);

/// sqrt(||Lambda||_F^2 / R) - 1. Valid when S is square unitary.
double special_case_unitary(const CMatrix& lambda_mat, double r_norm);

/// H = Lambda (SS^H + rho I)^{-1}.
CMatrix h_from_rho(const CMatrix& lambda_mat, const CMatrix& s, double rho);

/// H = Lambda (I/rho - SS^H / (rho (1 + rho))), the inverse-free form for
/// semi-unitary S.
CMatrix h_from_rho_semi_unitary(const CMatrix& lambda_mat, const CMatrix& s, double rho);

/// Minimizer of ||Z - H S||_F^2 + lambda ||H - H_model||_F^2 over the sphere
/// ||H||_F^2 = R, where Z = Y (odot) Gamma. Caches the eigendecomposition of
/// SS^H so repeated updates with the same training only pay for the root.
class ChannelUpdater {
 public:
  struct Result {
    CMatrix h;
    double rho = 0.0;
    RhoSolver solver = RhoSolver::kGeneral;
  };

  /// `solver` forces a path; by default it is detected from `s`.
  explicit ChannelUpdater(CMatrix s, double secular_tol = 1e-12);
  ChannelUpdater(CMatrix s, RhoSolver solver, double secular_tol = 1e-12);

  /// Lambda = Z S^H + lambda * H_model.
  CMatrix lambda_matrix(const CMatrix& z, const CMatrix& h_model, double lambda) const;

  Result solve(const CMatrix& lambda_mat, double r_norm) const;
  Result update(const CMatrix& z, const CMatrix& h_model, double lambda, double r_norm) const;

  RhoSolver solver() const { return solver_; }
  const CMatrix& training() const { return s_; }
  const RVector& gram_eigenvalues() const { return eig_values_; }
  const CMatrix& gram_eigenvectors() const { return eig_vectors_; }

 private:
  CMatrix s_;
  RhoSolver solver_;
  double tol_;
  RVector eig_values_;
  CMatrix eig_vectors_;
};

/// Free-function form of ChannelUpdater::update with automatic dispatch.
CMatrix update_h(const CMatrix& y, const CMatrix& gamma, const CMatrix& s, const CMatrix& h_model,
                 double lambda, double r_norm, double secular_tol = 1e-12);

}  // namespace onebit
