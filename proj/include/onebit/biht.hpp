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

#include <vector>

#include "onebit/channel_model.hpp"

namespace onebit {

/// On-grid angular dictionary with columns vec(a_r(doa_i) a_t(dod_j)^H) / norm.
///
/// Stored in factored form: the full dictionary is never materialized by the
/// estimator. Column index is i + rx_size() * j (column-major over the
/// rx-by-tx coefficient grid). Without departure angles the transmit atoms
/// are the unit vectors of the single-antenna terminals.
struct AngularDictionary {
  Index grid_points = 0;
  RVector grid;       ///< cell midpoints of a uniform partition of [0, pi]
  CMatrix rx_atoms;   ///< M_r x grid_points
  CMatrix tx_atoms;   ///< M_t x G_t
  double column_scale = 1.0;

  Index rx_size() const { return rx_atoms.cols(); }
  Index tx_size() const { return tx_atoms.cols(); }
  Index size() const { return rx_size() * tx_size(); }
  Index rows() const { return rx_atoms.rows() * tx_atoms.rows(); }

  CVector column(Index index) const;
  /// Dense M_r M_t x size() matrix; for tests and small problems.
  CMatrix materialize() const;
  /// Coefficient grid (rx_size x tx_size) -> channel matrix.
  CMatrix synthesize(const CMatrix& coefficients) const;
};

AngularDictionary build_dictionary(const Link& link, Index grid_points = 128);

struct BihtConfig {
  Index sparsity = 1;
  Index iters = 300;
  /// Gradient step; <= 0 selects 1 / ||Phi||_2^2.
  double step = 0.0;
  double r_norm = 1.0;
};

struct BihtResult {
  CMatrix h;             ///< scaled to ||h||_F^2 = r_norm
  CMatrix coefficients;  ///< rx_size x tx_size, at most `sparsity` nonzeros
  std::vector<Index> support;  ///< dictionary column indices, ascending
};

/// Spectral norm squared of the sensing operator x -> vec(D(x) S).
double sensing_norm_sq(const AngularDictionary& dict, const CMatrix& s);

/// Binary iterative hard thresholding
///   x <- H_K(x + step * Phi^H (y - csign(Phi x)))
/// with Phi x = vec(D(x) S). The complex form is the real-composite iteration
/// written with complex arithmetic.
BihtResult biht_estimate(const QuantizedObservation& obs, const AngularDictionary& dict,
                         const BihtConfig& cfg);

}  // namespace onebit
