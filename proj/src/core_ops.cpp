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

#include "onebit/core_ops.hpp"

#include <algorithm>
#include <cmath>

namespace onebit {

namespace {

inline double sign_pos(double v) { return v >= 0.0 ? 1.0 : -1.0; }

}  // namespace

bool all_finite(const CMatrix& m) {
  for (Index i = 0; i < m.size(); ++i) {
    const Complex v = m.data()[i];
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
  }
  return true;
}

void require_finite(const CMatrix& m, const std::string& what) {
  if (!all_finite(m)) throw std::invalid_argument(what + ": non-finite entry");
}

void require_same_shape(const CMatrix& a, const CMatrix& b, const std::string& what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument(what + ": dimension mismatch (" + std::to_string(a.rows()) + "x" +
                                std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) +
                                "x" + std::to_string(b.cols()) + ")");
  }
}

CMatrix sign_quantize(const CMatrix& z) {
  return z.unaryExpr([](const Complex& v) { return Complex(sign_pos(v.real()), sign_pos(v.imag())); });
}

CMatrix amplitude(const CMatrix& z) {
  return z.unaryExpr([](const Complex& v) { return Complex(std::abs(v.real()), std::abs(v.imag())); });
}

CMatrix odot_mix(const CMatrix& a, const CMatrix& b) {
  require_same_shape(a, b, "odot_mix");
  return a.binaryExpr(b, [](const Complex& x, const Complex& y) {
    return Complex(x.real() * y.real(), x.imag() * y.imag());
  });
}

CMatrix hadamard(const CMatrix& a, const CMatrix& b) {
  require_same_shape(a, b, "hadamard");
  return a.cwiseProduct(b);
}

CMatrix pinv(const CMatrix& a, double rel_threshold) {
  if (a.size() == 0) throw std::invalid_argument("pinv: empty matrix");
  Eigen::JacobiSVD<CMatrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const RVector& sv = svd.singularValues();
  const double cutoff = rel_threshold * (sv.size() > 0 ? sv(0) : 0.0);
  RVector inv = RVector::Zero(sv.size());
  for (Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > cutoff && sv(i) > 0.0) inv(i) = 1.0 / sv(i);
  }
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().adjoint();
}

HermEig herm_eig(const CMatrix& m, double tol) {
  if (m.rows() != m.cols() || m.size() == 0) {
    throw std::invalid_argument("herm_eig: matrix must be square and nonempty");
  }
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.adjoint()).cwiseAbs().maxCoeff() > tol * scale) {
    throw std::invalid_argument("herm_eig: matrix is not Hermitian");
  }
  Eigen::SelfAdjointEigenSolver<CMatrix> es(m);
  if (es.info() != Eigen::Success) throw NumericalError("herm_eig: eigensolver failed");
  return {es.eigenvalues(), es.eigenvectors()};
}

double fro_norm_sq(const CMatrix& a) { return a.squaredNorm(); }

}  // namespace onebit
