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

#include <limits>
#include <random>
#include <vector>

#include "onebit/core_ops.hpp"

namespace onebit {

using Rng = std::mt19937_64;

enum class ArrayKind {
  /// Uniform linear array, half-wavelength spacing: a_m = exp(j*pi*m*cos(angle)).
  kUla,
  /// One single-antenna terminal per path: path k leaves from element k and
  /// carries no departure angle (uplink with single-antenna users).
  kPerPathElement,
};

struct ArrayGeometry {
  Index num_elements = 1;
  ArrayKind kind = ArrayKind::kUla;
};

/// Receive and transmit sides of a link. The receiver is always a ULA.
struct Link {
  ArrayGeometry rx;
  ArrayGeometry tx;

  bool has_dod() const { return tx.kind == ArrayKind::kUla; }
  /// Length of the stacked angle vector [doa; dod] for `k` paths.
  Index eta_size(Index k) const { return has_dod() ? 2 * k : k; }
  void validate() const;
};

/// Path parameters. `dod` is empty when the transmit side is kPerPathElement.
struct ChannelParams {
  RVector doa;
  RVector dod;
  CVector gains;

  Index num_paths() const { return gains.size(); }
  void validate(const Link& link) const;
};

enum class TrainingKind { kSemiUnitary, kUnitary, kGaussian };

struct QuantizedObservation {
  CMatrix y;  ///< M_r x N, entries in {+-1 +-j}
  CMatrix s;  ///< M_t x N training
  double snr_db = std::numeric_limits<double>::infinity();
  std::uint64_t noise_seed = 0;
};

inline constexpr double kNoiseless = std::numeric_limits<double>::infinity();

CVector steering_vector(const ArrayGeometry& geom, double angle);

/// Columns are steering vectors for each angle (ULA only).
CMatrix steering_matrix(const ArrayGeometry& geom, const RVector& angles);

/// Derivative of each steering column with respect to its own angle.
CMatrix steering_derivative(const ArrayGeometry& geom, const RVector& angles);

/// Transmit response matrix A_t (M_t x K). For kPerPathElement the k-th
/// column is the unit vector e_k and `dod` is ignored.
CMatrix tx_response(const Link& link, const RVector& dod, Index k_paths);

/// H = A_r(doa) diag(gains) A_t(dod)^H.
CMatrix synth_channel(const ChannelParams& params, const Link& link);

/// `k` angles in [0, pi], pairwise separated by at least `min_sep`, drawn
/// uniformly from the feasible set. Returned in random order.
RVector gen_angles(Index k, Rng& rng, double min_sep);

/// i.i.d. CN(0, 1) path gains.
CVector gen_gains(Index k, Rng& rng);

CMatrix gen_training(Index m_t, Index n, TrainingKind kind, Rng& rng);

/// Y = sign_quantize(HS + N) with circular Gaussian noise of per-entry
/// variance mean(|HS|^2) / 10^(snr_db/10). `snr_db = +inf` is noiseless.
QuantizedObservation observe(const CMatrix& h, const CMatrix& s, double snr_db, Rng& rng);

}  // namespace onebit
