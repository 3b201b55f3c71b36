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

#include "onebit/checks.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <functional>
#include <numbers>
#include <sstream>

#include "onebit/ar_estimator.hpp"
#include "onebit/harness.hpp"

namespace onebit {

namespace {

CMatrix random_complex(Index rows, Index cols, Rng& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  CMatrix m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = Complex(nd(rng), nd(rng));
  return m;
}

CheckOutcome check(const std::string& name, const std::function<std::string(bool&)>& body) {
  CheckOutcome out{name, false, {}};
  try {
    out.detail = body(out.passed);
  } catch (const std::exception& e) {
    out.passed = false;
    out.detail = std::string("exception: ") + e.what();
  }
  return out;
}

std::string fmt(const char* label, double v) {
  std::ostringstream os;
  os << label << '=' << v;
  return os.str();
}

}  // namespace

std::vector<CheckOutcome> run_checks(std::uint64_t seed) {
  std::vector<CheckOutcome> results;
  const Link link{{6, ArrayKind::kUla}, {6, ArrayKind::kUla}};

  results.push_back(check("sign/amplitude decomposition", [&](bool& ok) {
    Rng rng(seed);
    const CMatrix z = random_complex(5, 7, rng);
    const double err = (odot_mix(sign_quantize(z), amplitude(z)) - z).cwiseAbs().maxCoeff();
    ok = err == 0.0;
    return fmt("max_err", err);
  }));

  results.push_back(check("ml_gradient vs central differences", [&](bool& ok) {
    Rng rng(seed + 1);
    std::uniform_real_distribution<double> ud(0.3, std::numbers::pi - 0.3);
    RVector eta(4);
    for (auto& v : eta) v = ud(rng);
    const CMatrix h = random_complex(6, 6, rng);
    const CVector hv = Eigen::Map<const CVector>(h.data(), h.size());
    const RVector g = ml_gradient(eta, hv, link);
    RVector fd(eta.size());
    for (Index i = 0; i < eta.size(); ++i) {
      RVector a = eta, b = eta;
      a(i) += 1e-6;
      b(i) -= 1e-6;
      fd(i) = (ml_cost(a, hv, link) - ml_cost(b, hv, link)) / 2e-6;
    }
    const double rel = (g - fd).norm() / std::max(fd.norm(), 1e-12);
    ok = rel <= 1e-5;
    return fmt("rel_err", rel);
  }));

  results.push_back(check("secular solver residual and special cases", [&](bool& ok) {
    Rng rng(seed + 2);
    const CMatrix lam = random_complex(3, 6, rng);
    const CMatrix s_semi = gen_training(6, 3, TrainingKind::kSemiUnitary, rng);
    const CMatrix s_uni = gen_training(6, 6, TrainingKind::kUnitary, rng);
    const double r = 5.0;
    const double p_gen = secular_solve(lam, s_semi, r);
    const double p_quartic = special_case_semi_unitary(lam, s_semi, r);
    const double p_uni_gen = secular_solve(lam, s_uni, r);
    const double p_closed = special_case_unitary(lam, r);
    const double norm_err = std::abs(h_from_rho(lam, s_semi, p_gen).squaredNorm() - r) / r;
    const double d1 = std::abs(p_gen - p_quartic) / std::max(1.0, std::abs(p_gen));
    const double d2 = std::abs(p_uni_gen - p_closed) / std::max(1.0, std::abs(p_closed));
    ok = norm_err <= 1e-8 && d1 <= 1e-6 && d2 <= 1e-8;
    return fmt("norm_err", norm_err) + " " + fmt("quartic_gap", d1) + " " + fmt("closed_gap", d2);
  }));

  results.push_back(check("amplitude update beats 1-D scan", [&](bool& ok) {
    Rng rng(seed + 3);
    const CMatrix y = sign_quantize(random_complex(3, 3, rng));
    const CMatrix hs = random_complex(3, 3, rng);
    const CMatrix g = update_gamma(y, hs);
    double worst = 0.0;
    for (Index i = 0; i < y.size(); ++i) {
      const Complex yy = y.data()[i], t = hs.data()[i], gg = g.data()[i];
      auto cost = [&](double gr, double gi) {
        return std::pow(yy.real() * gr - t.real(), 2) + std::pow(yy.imag() * gi - t.imag(), 2);
      };
      const double best = cost(gg.real(), gg.imag());
      for (int c = 0; c <= 200; ++c) {
        const double v = 4.0 * c / 200.0;
        worst = std::max(worst, best - cost(v, gg.imag()));
        worst = std::max(worst, best - cost(gg.real(), v));
      }
    }
    ok = worst <= 1e-12;
    return fmt("max_improvement", worst);
  }));

  results.push_back(check("channel update beats random sphere points", [&](bool& ok) {
    Rng rng(seed + 4);
    const CMatrix s = random_complex(4, 5, rng);
    const CMatrix z = random_complex(4, 5, rng);
    const CMatrix hm = random_complex(4, 4, rng);
    const double lambda = 0.7, r = 3.0;
    auto f = [&](const CMatrix& h) { return (z - h * s).squaredNorm() + lambda * (h - hm).squaredNorm(); };
    const ChannelUpdater upd(s);
    const double best = f(upd.update(z, hm, lambda, r).h);
    double margin = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 2000; ++i) {
      CMatrix h = random_complex(4, 4, rng);
      h *= std::sqrt(r) / h.norm();
      margin = std::min(margin, f(h) - best);
    }
    ok = margin >= -1e-8;
    return fmt("min_margin", margin);
  }));

  results.push_back(check("AR objective non-increasing", [&](bool& ok) {
    ExperimentConfig cfg;
    cfg.m_r = 4;
    cfg.m_t = 8;
    cfg.n_train = 8;
    cfg.k_paths = 2;
    cfg.training = TrainingKind::kGaussian;
    cfg.estimators = {Estimator::kAr};
    cfg.ar.max_outer_iters = 50;
    const TrialRunner runner(cfg);
    const TrialSetup t = make_trial(cfg, 10.0, 8, seed + 5);
    const ArResult res = runner.run_ar_on(t);
    double worst = 0.0;
    const auto& tr = res.state.objective_trace;
    for (std::size_t i = 1; i < tr.size(); ++i) worst = std::max(worst, (tr[i] - tr[i - 1]) / std::max(tr[i - 1], 1e-300));
    ok = worst <= 1e-9;
    return fmt("max_rel_increase", worst) + " " + fmt("iters", static_cast<double>(tr.size()));
  }));

  results.push_back(check("noiseless single-path recovery", [&](bool& ok) {
    ExperimentConfig cfg;
    cfg.m_r = 4;
    cfg.m_t = 4;
    cfg.n_train = 4;
    cfg.k_paths = 1;
    cfg.training = TrainingKind::kUnitary;
    cfg.estimators = {Estimator::kAr};
    const TrialRunner runner(cfg);
    const TrialSetup t = make_trial(cfg, kNoiseless, 4, seed + 6);
    const double e = nmse(runner.run_ar_on(t).h, t.h);
    ok = e <= 0.01;
    return fmt("nmse", e);
  }));

  return results;
}

}  // namespace onebit
