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

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace onebit {

using Index = Eigen::Index;
using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

/// Raised when an iterative numerical routine cannot produce a result
/// (no bracketing interval, non-finite intermediate values, ...).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
struct HermEig {
  RVector eigenvalues;
  CMatrix eigenvectors;
};

bool all_finite(const CMatrix& m);
/// Throws std::invalid_argument naming `what` if any entry is NaN/Inf.
void require_finite(const CMatrix& m, const std::string& what);
void require_same_shape(const CMatrix& a, const CMatrix& b, const std::string& what);

/// sign(Re z) + j sign(Im z) entrywise, with sign(0) = +1.
CMatrix sign_quantize(const CMatrix& z);

/// |Re z| + j |Im z| entrywise. odot_mix(sign_quantize(z), amplitude(z)) == z.
CMatrix amplitude(const CMatrix& z);

/// Component-mixing product: Re(a)Re(b) + j Im(a)Im(b), entrywise.
CMatrix odot_mix(const CMatrix& a, const CMatrix& b);

/// Entrywise complex product.
CMatrix hadamard(const CMatrix& a, const CMatrix& b);

/// Moore-Penrose pseudo-inverse. Singular values below
/// `rel_threshold * sigma_max` are treated as zero.
CMatrix pinv(const CMatrix& a, double rel_threshold = 1e-10);

/// Eigen-decomposition of a Hermitian matrix. Throws std::invalid_argument
/// if `m` is not square or deviates from Hermitian by more than `tol`
/// (relative to its largest entry).
HermEig herm_eig(const CMatrix& m, double tol = 1e-10);

/// Sum of squared magnitudes.
double fro_norm_sq(const CMatrix& a);

}  // namespace onebit
