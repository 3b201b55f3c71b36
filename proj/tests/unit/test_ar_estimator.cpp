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

#include <numbers>

#include "doctest.h"
#include "onebit/ar_estimator.hpp"
#include "onebit/harness.hpp"
#include "test_util.hpp"

using namespace onebit;
using onebit::test::randn;
using std::numbers::pi;

namespace {

const Link kLink88{{8, ArrayKind::kUla}, {8, ArrayKind::kUla}};

ArState state_from(const ChannelParams& p, const CMatrix& h, const CMatrix& gamma) {
  ArState st;
  st.h = h;
  st.gamma = gamma;
  st.eta.resize(p.doa.size() + p.dod.size());
  st.eta << p.doa, p.dod;
  st.beta = p.gains;
  return st;
}

ChannelParams random_params(Index k, Rng& rng, double sep = 0.3) {
  ChannelParams p;
  p.doa = gen_angles(k, rng, sep);
  p.dod = gen_angles(k, rng, sep);
  p.gains = gen_gains(k, rng);
  return p;
}

}  // namespace

TEST_CASE("update_gamma closed form") {
  CMatrix y(1, 2), hs(1, 2);
  y << Complex(1, 1), Complex(1, 1);
  hs << Complex(2, 3), Complex(-2, 3);
  const CMatrix g = update_gamma(y, hs);
  CHECK(g(0, 0) == Complex(2, 3));
  CHECK(g(0, 1) == Complex(0, 3));

  Rng rng(79);
  const CMatrix yr = sign_quantize(randn(3, 3, rng));
  const CMatrix hr = randn(3, 3, rng);
  const CMatrix gr = update_gamma(yr, hr);
  for (Index k = 0; k < 9; ++k) {
    const Complex a = yr.data()[k], b = hr.data()[k];
    CHECK(gr.data()[k].real() == std::max(a.real() * b.real(), 0.0));
    CHECK(gr.data()[k].imag() == std::max(a.imag() * b.imag(), 0.0));
  }
  CHECK_THROWS_AS(update_gamma(yr, randn(3, 2, rng)), std::invalid_argument);
}

TEST_CASE("objective terms") {
  Rng rng(83);
  const ChannelParams p = random_params(2, rng);
  const CMatrix h = synth_channel(p, kLink88);
  const CMatrix s = gen_training(8, 6, TrainingKind::kGaussian, rng);
  const CMatrix y = sign_quantize(h * s);

  SUBCASE("consistent noiseless point scores zero") {
    const ArState st = state_from(p, h, amplitude(h * s));
    CHECK(objective(st, y, s, kLink88, 1.0) < 1e-20);
  }
  SUBCASE("zero channel and amplitudes leave the model term") {
    const ArState st = state_from(p, CMatrix::Zero(8, 8), CMatrix::Zero(8, 6));
    CHECK(objective(st, y, s, kLink88, 0.7) == doctest::Approx(0.7 * h.squaredNorm()).epsilon(1e-12));
  }
  SUBCASE("random state against entrywise sums") {
    const ArState st = state_from(p, randn(8, 8, rng), amplitude(randn(8, 6, rng)));
    const CMatrix hs = st.h * s;
    double data = 0.0, model = 0.0;
    for (Index j = 0; j < 6; ++j)
      for (Index i = 0; i < 8; ++i) {
        const Complex yg(y(i, j).real() * st.gamma(i, j).real(), y(i, j).imag() * st.gamma(i, j).imag());
        data += std::norm(yg - hs(i, j));
      }
    for (Index j = 0; j < 8; ++j)
      for (Index i = 0; i < 8; ++i) model += std::norm(st.h(i, j) - h(i, j));
    const ObjectiveTerms t = objective_terms(st, y, s, kLink88);
    CHECK(t.data == doctest::Approx(data).epsilon(1e-12));
    CHECK(t.model == doctest::Approx(model).epsilon(1e-12));
    CHECK(objective(st, y, s, kLink88, 2.0) == doctest::Approx(data + 2.0 * model).epsilon(1e-12));
  }
}

TEST_CASE("khatri_rao_dict") {
  const Link l11{{1, ArrayKind::kUla}, {1, ArrayKind::kUla}};
  RVector eta(2);
  eta << 0.4, 1.9;
  const CMatrix a = khatri_rao_dict(eta, l11);
  CHECK(a.rows() == 1);
  CHECK(std::abs(a(0, 0) - Complex(1, 0)) < 1e-15);

  Rng rng(89);
  const Link l{{4, ArrayKind::kUla}, {5, ArrayKind::kUla}};
  const ChannelParams p = random_params(3, rng, 0.2);
  RVector e3(6);
  e3 << p.doa, p.dod;
  const CMatrix h = synth_channel(p, l);
  CHECK((khatri_rao_dict(e3, l) * p.gains - h.reshaped()).norm() <= 1e-12);

  RVector e1(2);
  e1 << p.doa(0), p.dod(0);
  const CMatrix rank_one = steering_vector(l.rx, e1(0)) * steering_vector(l.tx, e1(1)).adjoint();
  CHECK((khatri_rao_dict(e1, l).col(0) - rank_one.reshaped()).norm() < 1e-14);
}

TEST_CASE("khatri_rao_dict for single-antenna terminals") {
  const Link l{{6, ArrayKind::kUla}, {3, ArrayKind::kPerPathElement}};
  RVector eta(2);
  eta << 0.8, 2.2;
  const CMatrix a = khatri_rao_dict(eta, l);
  CHECK(a.rows() == 18);
  CHECK((a.col(1).segment(6, 6) - steering_vector(l.rx, 2.2)).norm() < 1e-14);
  CHECK(a.col(1).segment(0, 6).norm() == 0.0);
}

TEST_CASE("ml_cost") {
  Rng rng(97);
  const ChannelParams p = random_params(2, rng);
  RVector eta(4);
  eta << p.doa, p.dod;
  const CVector h = synth_channel(p, kLink88).reshaped();
  CHECK(ml_cost(eta, h, kLink88) < 1e-20 * h.squaredNorm() + 1e-24);

  // Orthogonal complement of range(A).
  const CMatrix a = khatri_rao_dict(eta, kLink88);
  CVector v = randn(64, 1, rng);
  v -= a * pinv(a) * v;
  CHECK(ml_cost(eta, v, kLink88) == doctest::Approx(v.squaredNorm()).epsilon(1e-10));

  SUBCASE("coincident paths are flagged rank deficient") {
    RVector dup(4);
    dup << 1.0, 1.0, 2.0, 2.0;
    const MlEvaluation ev = ml_evaluate(dup, h, kLink88);
    CHECK(ev.rank_deficient);
    CHECK(std::isfinite(ev.cost));
  }

  CHECK_THROWS_AS(ml_cost(eta, CVector::Ones(10), kLink88), std::invalid_argument);
}

TEST_CASE("ml_cost grid minimum sits at the true angles") {
  const Link l{{2, ArrayKind::kUla}, {2, ArrayKind::kUla}};
  ChannelParams p;
  // On the scan grid so the minimizer is exactly representable.
  const int n = 512;
  auto grid = [&](int i) { return pi * i / (n - 1); };
  p.doa = RVector::Constant(1, grid(140));
  p.dod = RVector::Constant(1, grid(333));
  p.gains = CVector::Constant(1, Complex(0.6, -1.1));
  const CVector h = synth_channel(p, l).reshaped();
  double best = std::numeric_limits<double>::infinity();
  int bi = -1, bj = -1;
  RVector e(2);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      e << grid(i), grid(j);
      const double c = ml_cost(e, h, l);
      if (c < best - 1e-15) {
        best = c;
        bi = i;
        bj = j;
      }
    }
  CHECK(bi == 140);
  CHECK(bj == 333);
}

TEST_CASE("ml_gradient") {
  Rng rng(101);
  SUBCASE("zero at a noiseless optimum") {
    const ChannelParams p = random_params(2, rng);
    RVector eta(4);
    eta << p.doa, p.dod;
    const CVector h = synth_channel(p, kLink88).reshaped();
    CHECK(ml_gradient(eta, h, kLink88).cwiseAbs().maxCoeff() < 1e-8);
  }
  SUBCASE("central differences") {
    for (int t = 0; t < 10; ++t) {
      RVector eta(4);
      eta << gen_angles(2, rng, 0.3).array().max(0.2).min(pi - 0.2), gen_angles(2, rng, 0.3).array().max(0.2).min(pi - 0.2);
      const CVector h = randn(64, 1, rng);
      const RVector g = ml_gradient(eta, h, kLink88);
      RVector fd(4);
      for (Index i = 0; i < 4; ++i) {
        RVector a = eta, b = eta;
        a(i) += 1e-6;
        b(i) -= 1e-6;
        fd(i) = (ml_cost(a, h, kLink88) - ml_cost(b, h, kLink88)) / 2e-6;
      }
      CHECK((g - fd).norm() <= 1e-5 * fd.norm());
    }
  }
  SUBCASE("symmetric instance has equal components") {
    // Hermitian H with identical arrays: the cost is invariant under
    // swapping the two angles.
    const Link l{{4, ArrayKind::kUla}, {4, ArrayKind::kUla}};
    CMatrix h = randn(4, 4, rng);
    h = (h + h.adjoint()).eval();
    RVector eta(2);
    eta << pi / 2, pi / 2;
    const CVector hv = h.reshaped();
    const RVector g = ml_gradient(eta, hv, l);
    CHECK(std::abs(g(0) - g(1)) < 1e-10 * std::max(1.0, g.norm()));
  }
}

TEST_CASE("refine_angles") {
  Rng rng(103);
  const ChannelParams p = random_params(2, rng, 0.5);
  RVector truth(4);
  truth << p.doa, p.dod;
  const CMatrix h = synth_channel(p, kLink88);
  ArConfig cfg;
  cfg.k_paths = 2;

  SUBCASE("true angles are a fixed point") {
    const AngleUpdate u = refine_angles(truth, h, kLink88, cfg);
    CHECK((u.eta - truth).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((u.beta - p.gains).norm() < 1e-8);
  }
  SUBCASE("small perturbations converge back") {
    cfg.grad_iters = 200;
    RVector start = truth;
    for (Index i = 0; i < 4; ++i) start(i) += (i % 2 ? -0.01 : 0.01);
    const AngleUpdate u = refine_angles(start, h, kLink88, cfg);
    CHECK((u.eta - truth).cwiseAbs().maxCoeff() < 1e-3);
    for (std::size_t i = 1; i < u.costs.size(); ++i) CHECK(u.costs[i] <= u.costs[i - 1]);
  }
  SUBCASE("costs never increase on noisy data") {
    const CMatrix noisy = h + 0.5 * randn(8, 8, rng);
    RVector start(4);
    start << gen_angles(2, rng, 0.3), gen_angles(2, rng, 0.3);
    cfg.grad_iters = 30;
    const AngleUpdate u = refine_angles(start, noisy, kLink88, cfg);
    for (std::size_t i = 1; i < u.costs.size(); ++i) CHECK(u.costs[i] <= u.costs[i - 1]);
    CHECK(u.eta.minCoeff() >= 0.0);
    CHECK(u.eta.maxCoeff() <= pi);
  }
  SUBCASE("line-search failure leaves the angles unchanged") {
    cfg.armijo.min_step = 1e300;
    RVector start = truth;
    start(0) += 0.05;
    const AngleUpdate u = refine_angles(start, h, kLink88, cfg);
    CHECK(u.line_search_failed);
    CHECK(u.eta == start);
  }
}

TEST_CASE("initial_angles finds well-separated on-grid paths") {
  const Link l{{16, ArrayKind::kUla}, {16, ArrayKind::kUla}};
  ChannelParams p;
  const RVector g = RVector::LinSpaced(64, 0.0, pi);
  p.doa = RVector(2);
  p.doa << g(20), g(45);
  p.dod = RVector(2);
  p.dod << g(30), g(10);
  p.gains = CVector::Ones(2);
  const RVector eta = initial_angles(synth_channel(p, l), l, 2, 64);
  const bool order_a = std::abs(eta(0) - p.doa(0)) < 1e-12 && std::abs(eta(2) - p.dod(0)) < 1e-12;
  const bool order_b = std::abs(eta(0) - p.doa(1)) < 1e-12 && std::abs(eta(2) - p.dod(1)) < 1e-12;
  CHECK((order_a || order_b));
}

TEST_CASE("run_ar") {
  ExperimentConfig cfg;
  cfg.m_r = 4;
  cfg.m_t = 8;
  cfg.n_train = 8;
  cfg.k_paths = 2;
  cfg.ar.k_paths = 2;
  cfg.training = TrainingKind::kGaussian;
  cfg.estimators = {Estimator::kAr};

  SUBCASE("trace is non-increasing") {
    const TrialRunner runner(cfg);
    for (int t = 0; t < 10; ++t) {
      const TrialSetup s = make_trial(cfg, 10.0, 8, 500 + t);
      const ArResult r = runner.run_ar_on(s);
      const auto& tr = r.state.objective_trace;
      REQUIRE(!tr.empty());
      for (std::size_t i = 1; i < tr.size(); ++i) CHECK(tr[i] <= tr[i - 1] * (1.0 + 1e-9));
      CHECK(r.h.squaredNorm() == doctest::Approx(s.r_norm).epsilon(1e-8));
      CHECK(r.state.diagnostics.size() == tr.size());
    }
  }

  SUBCASE("zero outer iterations returns the initialization") {
    cfg.ar.max_outer_iters = 0;
    const TrialSetup s = make_trial(cfg, 10.0, 8, 77);
    ArConfig ac = cfg.ar;
    ac.r_norm = s.r_norm;
    const ArResult r = run_ar(s.obs, cfg.link(), ac);
    CHECK(r.state.objective_trace.empty());
    CHECK(test::max_abs_diff(r.h, initial_channel(s.obs.y, s.obs.s, s.r_norm)) < 1e-14);
  }

  SUBCASE("callback sees every iteration") {
    const TrialSetup s = make_trial(cfg, 10.0, 8, 78);
    ArConfig ac = cfg.ar;
    ac.r_norm = s.r_norm;
    ac.max_outer_iters = 7;
    ac.outer_tol = 1e-300;
    int calls = 0;
    const ArResult r = run_ar(s.obs, cfg.link(), ac, [&](const IterationRecord& rec) {
      ++calls;
      CHECK(rec.iteration == calls);
      CHECK(rec.solver == RhoSolver::kGeneral);
    });
    CHECK(calls == 7);
    CHECK(r.state.objective_trace.size() == 7u);
  }

  SUBCASE("dispatches on training structure") {
    cfg.training = TrainingKind::kUnitary;
    const TrialSetup s = make_trial(cfg, 10.0, 8, 79);
    ArConfig ac = cfg.ar;
    ac.r_norm = s.r_norm;
    ac.max_outer_iters = 3;
    CHECK(run_ar(s.obs, cfg.link(), ac).state.diagnostics.front().solver == RhoSolver::kUnitary);
  }

  SUBCASE("input validation") {
    const TrialSetup s = make_trial(cfg, 10.0, 8, 80);
    ArConfig ac = cfg.ar;
    ac.r_norm = -1.0;
    CHECK_THROWS_AS(run_ar(s.obs, cfg.link(), ac), std::invalid_argument);
    ac.r_norm = 1.0;
    const Link wrong{{5, ArrayKind::kUla}, {8, ArrayKind::kUla}};
    CHECK_THROWS_AS(run_ar(s.obs, wrong, ac), std::invalid_argument);
  }
}
