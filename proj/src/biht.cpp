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

#include "onebit/biht.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace onebit {

namespace {

// Keeps the k largest-magnitude entries (ties broken by lower index).
std::vector<Index> hard_threshold(CMatrix& x, Index k) {
  const Index n = x.size();
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  if (k < n) {
    const Complex* data = x.data();
    auto by_magnitude = [data](Index a, Index b) {
      const double ma = std::norm(data[a]);
      const double mb = std::norm(data[b]);
      return ma != mb ? ma > mb : a < b;
    };
    std::nth_element(order.begin(), order.begin() + k, order.end(), by_magnitude);
    order.resize(static_cast<std::size_t>(k));
    std::vector<bool> keep(static_cast<std::size_t>(n), false);
    for (Index i : order) keep[static_cast<std::size_t>(i)] = true;
    for (Index i = 0; i < n; ++i)
      if (!keep[static_cast<std::size_t>(i)]) x.data()[i] = 0.0;
  }
  std::sort(order.begin(), order.end());
  return order;
}

}  // namespace

CVector AngularDictionary::column(Index index) const {
  if (index < 0 || index >= size()) throw std::out_of_range("AngularDictionary::column");
  const Index i = index % rx_size();
  const Index j = index / rx_size();
  const Index mr = rx_atoms.rows();
  CVector out(rows());
  for (Index t = 0; t < tx_atoms.rows(); ++t) {
    out.segment(t * mr, mr) = column_scale * std::conj(tx_atoms(t, j)) * rx_atoms.col(i);
  }
  return out;
}

CMatrix AngularDictionary::materialize() const {
  CMatrix d(rows(), size());
  for (Index c = 0; c < size(); ++c) d.col(c) = column(c);
  return d;
}

CMatrix AngularDictionary::synthesize(const CMatrix& coefficients) const {
  return column_scale * rx_atoms * coefficients * tx_atoms.adjoint();
}

AngularDictionary build_dictionary(const Link& link, Index grid_points) {
  link.validate();
  if (grid_points < 2) throw std::invalid_argument("build_dictionary: grid_points must be >= 2");
  AngularDictionary dict;
  dict.grid_points = grid_points;
  // Cell midpoints: 0 and pi give identical half-wavelength steering vectors.
  const double cell = std::numbers::pi / static_cast<double>(grid_points);
  dict.grid = RVector::LinSpaced(grid_points, 0.5 * cell, std::numbers::pi - 0.5 * cell);
  dict.rx_atoms = steering_matrix(link.rx, dict.grid);
  dict.tx_atoms = link.has_dod() ? steering_matrix(link.tx, dict.grid)
                                 : CMatrix(CMatrix::Identity(link.tx.num_elements, link.tx.num_elements));
  // Every rx atom has norm sqrt(M_r); every tx atom has the same norm too.
  dict.column_scale = 1.0 / (dict.rx_atoms.col(0).norm() * dict.tx_atoms.col(0).norm());
  return dict;
}

double sensing_norm_sq(const AngularDictionary& dict, const CMatrix& s) {
  // vec(R X B) = (B^T kron R) vec(X), and ||B^T kron R|| = ||B|| ||R||.
  const CMatrix b = dict.tx_atoms.adjoint() * s;
  const double nb = Eigen::JacobiSVD<CMatrix>(b).singularValues()(0);
  const double nr = Eigen::JacobiSVD<CMatrix>(dict.rx_atoms).singularValues()(0);
  return std::pow(dict.column_scale * nb * nr, 2.0);
}

BihtResult biht_estimate(const QuantizedObservation& obs, const AngularDictionary& dict,
                         const BihtConfig& cfg) {
  if (cfg.sparsity < 1) throw std::invalid_argument("biht_estimate: sparsity must be >= 1");
  if (cfg.iters < 0) throw std::invalid_argument("biht_estimate: negative iteration count");
  if (!(cfg.r_norm > 0.0)) throw std::invalid_argument("biht_estimate: r_norm must be positive");
  if (obs.y.rows() != dict.rx_atoms.rows() || obs.s.rows() != dict.tx_atoms.rows() ||
      obs.y.cols() != obs.s.cols()) {
    throw std::invalid_argument("biht_estimate: observation does not match dictionary");
  }
  const Index k = std::min(cfg.sparsity, dict.size());
  const double c = dict.column_scale;
  const CMatrix b = dict.tx_atoms.adjoint() * obs.s;  // G_t x N
  const CMatrix b_adj = b.adjoint();
  const CMatrix rx_adj = dict.rx_atoms.adjoint();
  const double step = cfg.step > 0.0 ? cfg.step : 1.0 / sensing_norm_sq(dict, obs.s);

  const Index rx_size = dict.rx_size();
  // x is k-sparse after thresholding, so the forward map only touches the support.
  auto forward = [&](const CMatrix& x, const std::vector<Index>& supp) -> CMatrix {
    CMatrix z = CMatrix::Zero(dict.rx_atoms.rows(), b.cols());
    for (Index idx : supp) {
      const Complex w = c * x.data()[idx];
      if (w != 0.0) z.noalias() += (w * dict.rx_atoms.col(idx % rx_size)) * b.row(idx / rx_size);
    }
    return z;
  };
  auto adjoint = [&](const CMatrix& r) -> CMatrix { return c * (rx_adj * (r * b_adj)); };

  CMatrix x = step * adjoint(obs.y);
  std::vector<Index> support = hard_threshold(x, k);
  for (Index it = 0; it < cfg.iters; ++it) {
    x += step * adjoint(obs.y - sign_quantize(forward(x, support)));
    support = hard_threshold(x, k);
  }

  BihtResult out;
  out.coefficients = std::move(x);
  out.support = std::move(support);
  out.h = dict.synthesize(out.coefficients);
  const double n2 = out.h.squaredNorm();
  if (n2 > 0.0) out.h *= std::sqrt(cfg.r_norm / n2);
  return out;
}

}  // namespace onebit
