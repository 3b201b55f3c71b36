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

#include "onebit/channel_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace onebit {

namespace {

constexpr double kPi = std::numbers::pi;

void require_angle(double angle) {
  if (!(angle >= 0.0 && angle <= kPi)) {
    throw std::invalid_argument("angle " + std::to_string(angle) + " outside [0, pi]");
  }
}

void require_ula(const ArrayGeometry& geom) {
  if (geom.kind != ArrayKind::kUla) throw std::invalid_argument("steering requires a ULA");
  if (geom.num_elements < 1) throw std::invalid_argument("array needs at least one element");
}

Complex complex_normal(Rng& rng) {
  std::normal_distribution<double> nd(0.0, std::sqrt(0.5));
  const double re = nd(rng);
  const double im = nd(rng);
  return {re, im};
}

CMatrix complex_normal_matrix(Index rows, Index cols, Rng& rng) {
  CMatrix m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = complex_normal(rng);
  return m;
}

}  // namespace

void Link::validate() const {
  if (rx.kind != ArrayKind::kUla) throw std::invalid_argument("receive array must be a ULA");
  if (rx.num_elements < 1 || tx.num_elements < 1) {
    throw std::invalid_argument("arrays need at least one element");
  }
}

void ChannelParams::validate(const Link& link) const {
  const Index k = num_paths();
  if (k < 1) throw std::invalid_argument("ChannelParams: need at least one path");
  if (doa.size() != k) throw std::invalid_argument("ChannelParams: doa length != K");
  if (link.has_dod()) {
    if (dod.size() != k) throw std::invalid_argument("ChannelParams: dod length != K");
  } else if (k > link.tx.num_elements) {
    throw std::invalid_argument("ChannelParams: more paths than single-antenna terminals");
  }
  for (double a : doa) require_angle(a);
  if (link.has_dod())
    for (double a : dod) require_angle(a);
}

CVector steering_vector(const ArrayGeometry& geom, double angle) {
  require_ula(geom);
  require_angle(angle);
  const double c = std::cos(angle);
  CVector a(geom.num_elements);
  for (Index m = 0; m < geom.num_elements; ++m) a(m) = std::polar(1.0, kPi * m * c);
  return a;
}

CMatrix steering_matrix(const ArrayGeometry& geom, const RVector& angles) {
  require_ula(geom);
  CMatrix a(geom.num_elements, angles.size());
  for (Index k = 0; k < angles.size(); ++k) a.col(k) = steering_vector(geom, angles(k));
  return a;
}

CMatrix steering_derivative(const ArrayGeometry& geom, const RVector& angles) {
  CMatrix d = steering_matrix(geom, angles);
  for (Index k = 0; k < angles.size(); ++k) {
    const double s = -std::sin(angles(k));
    for (Index m = 0; m < geom.num_elements; ++m) d(m, k) *= Complex(0.0, kPi * m * s);
  }
  return d;
}

CMatrix tx_response(const Link& link, const RVector& dod, Index k_paths) {
  if (link.has_dod()) return steering_matrix(link.tx, dod);
  if (k_paths > link.tx.num_elements) {
    throw std::invalid_argument("tx_response: more paths than single-antenna terminals");
  }
  return CMatrix::Identity(link.tx.num_elements, k_paths);
}

CMatrix synth_channel(const ChannelParams& params, const Link& link) {
  link.validate();
  params.validate(link);
  const CMatrix ar = steering_matrix(link.rx, params.doa);
  const CMatrix at = tx_response(link, params.dod, params.num_paths());
  return ar * params.gains.asDiagonal() * at.adjoint();
}

RVector gen_angles(Index k, Rng& rng, double min_sep) {
  if (k < 1) throw std::invalid_argument("gen_angles: k must be >= 1");
  if (min_sep < 0.0) throw std::invalid_argument("gen_angles: negative separation");
  const double slack = kPi - static_cast<double>(k - 1) * min_sep;
  if (slack < 0.0) throw std::invalid_argument("gen_angles: infeasible separation");
  // Uniform order statistics on the slack interval, then re-inflate the gaps:
  // this is exactly the uniform law on the separated set.
  std::uniform_real_distribution<double> ud(0.0, slack);
  std::vector<double> u(static_cast<std::size_t>(k));
  for (auto& v : u) v = ud(rng);
  std::sort(u.begin(), u.end());
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = std::min(kPi, u[i] + static_cast<double>(i) * min_sep);
  std::shuffle(u.begin(), u.end(), rng);
  return Eigen::Map<const RVector>(u.data(), k);
}

CVector gen_gains(Index k, Rng& rng) {
  CVector g(k);
  for (Index i = 0; i < k; ++i) g(i) = complex_normal(rng);
  return g;
}

CMatrix gen_training(Index m_t, Index n, TrainingKind kind, Rng& rng) {
  if (m_t < 1 || n < 1) throw std::invalid_argument("gen_training: empty shape");
  switch (kind) {
    case TrainingKind::kGaussian:
      return complex_normal_matrix(m_t, n, rng);
    case TrainingKind::kSemiUnitary: {
      if (n > m_t) throw std::invalid_argument("gen_training: semi-unitary needs n <= m_t");
      const CMatrix g = complex_normal_matrix(m_t, n, rng);
      Eigen::HouseholderQR<CMatrix> qr(g);
      return qr.householderQ() * CMatrix::Identity(m_t, n);
    }
    case TrainingKind::kUnitary: {
      if (n != m_t) throw std::invalid_argument("gen_training: unitary needs n == m_t");
      const CMatrix g = complex_normal_matrix(m_t, n, rng);
      Eigen::HouseholderQR<CMatrix> qr(g);
      return qr.householderQ() * CMatrix::Identity(m_t, n);
    }
  }
  throw std::invalid_argument("gen_training: unknown kind");
}

QuantizedObservation observe(const CMatrix& h, const CMatrix& s, double snr_db, Rng& rng) {
  if (h.cols() != s.rows()) throw std::invalid_argument("observe: H and S inner dimensions differ");
  if (std::isnan(snr_db) || snr_db == -kNoiseless) throw std::invalid_argument("observe: invalid SNR");
  QuantizedObservation obs;
  obs.s = s;
  obs.snr_db = snr_db;
  obs.noise_seed = rng();
  CMatrix z = h * s;
  if (snr_db != kNoiseless) {
    const double signal = z.size() > 0 ? z.squaredNorm() / static_cast<double>(z.size()) : 0.0;
    // An all-zero channel still gets unit-power noise so the signs are random.
    const double sigma2 = signal > 0.0 ? signal / std::pow(10.0, snr_db / 10.0) : 1.0;
    Rng noise_rng(obs.noise_seed);
    z += std::sqrt(sigma2) * complex_normal_matrix(z.rows(), z.cols(), noise_rng);
  }
  obs.y = sign_quantize(z);
  return obs;
}

}  // namespace onebit
