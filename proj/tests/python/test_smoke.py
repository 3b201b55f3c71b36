# Copyright 2026 The onebit-ar Authors. All Rights Reserved.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

import math

import numpy as np
import pytest

import onebit_ar as ob


def test_sign_quantize_and_odot_mix():
    z = np.array([[1.5 - 2j, 0.0 + 0j], [-0.1 + 3j, -4 - 0j]])
    y = ob.sign_quantize(z)
    np.testing.assert_array_equal(y, [[1 - 1j, 1 + 1j], [-1 + 1j, -1 + 1j]])
    np.testing.assert_allclose(ob.amplitude(z), np.abs(z.real) + 1j * np.abs(z.imag))
    a = np.array([[1 + 2j]])
    b = np.array([[3 - 1j]])
    np.testing.assert_allclose(ob.odot_mix(a, b), [[3 - 2j]])


def test_steering_and_channel():
    a = ob.steering_vector(4, math.pi / 3)
    np.testing.assert_allclose(a, np.exp(1j * math.pi * np.arange(4) * 0.5))
    doa = np.array([0.4, 2.0])
    dod = np.array([1.1, 2.7])
    gains = np.array([1 + 0.5j, -0.3j])
    h = ob.synth_channel(doa, dod, gains, 3, 5)
    ar = np.exp(1j * math.pi * np.outer(np.arange(3), np.cos(doa)))
    at = np.exp(1j * math.pi * np.outer(np.arange(5), np.cos(dod)))
    np.testing.assert_allclose(h, ar @ np.diag(gains) @ at.conj().T, atol=1e-12)


def test_training_and_observe():
    s = ob.gen_training(4, 4, "unitary", seed=3)
    np.testing.assert_allclose(s @ s.conj().T, np.eye(4), atol=1e-12)
    assert ob.training_structure(s) == "unitary"
    assert ob.training_structure(ob.gen_training(4, 6, "gaussian", seed=3)) == "general"
    h = ob.synth_channel(np.array([1.0]), np.array([2.0]), np.array([1.0 + 0j]), 3, 4)
    y = ob.observe(h, s)
    np.testing.assert_array_equal(y, ob.sign_quantize(h @ s))
    y1 = ob.observe(h, s, 0.0, seed=11)
    y2 = ob.observe(h, s, 0.0, seed=11)
    np.testing.assert_array_equal(y1, y2)


def test_rho_solvers_agree():
    rng = np.random.default_rng(5)
    lam = rng.standard_normal((3, 4)) + 1j * rng.standard_normal((3, 4))
    s = ob.gen_training(4, 4, "unitary", seed=9)
    r = 2.0
    rho_u = ob.special_case_unitary(lam, r)
    assert rho_u == pytest.approx(math.sqrt(np.linalg.norm(lam) ** 2 / r) - 1.0)
    assert ob.secular_solve(lam, s, r) == pytest.approx(rho_u, rel=1e-9)
    assert ob.special_case_semi_unitary(lam, s, r) == pytest.approx(rho_u, rel=1e-6)


def test_update_gamma_and_h():
    y = np.array([[1 + 1j, -1 + 1j]])
    hs = np.array([[-2 + 3j, -0.5 - 1j]])
    np.testing.assert_allclose(ob.update_gamma(y, hs), [[0 + 3j, 0.5 + 0j]])
    rng = np.random.default_rng(1)
    s = rng.standard_normal((3, 5)) + 1j * rng.standard_normal((3, 5))
    hm = rng.standard_normal((2, 3)) + 1j * rng.standard_normal((2, 3))
    yy = ob.sign_quantize(rng.standard_normal((2, 5)) + 1j * rng.standard_normal((2, 5)))
    gamma = np.abs(rng.standard_normal((2, 5))) + 1j * np.abs(rng.standard_normal((2, 5)))
    h = ob.update_h(yy, gamma, s, hm, 1.0, 3.0)
    assert np.linalg.norm(h) ** 2 == pytest.approx(3.0, rel=1e-8)


def test_ml_cost_and_gradient():
    m_r, m_t = 4, 5
    eta = np.array([0.9, 2.1])
    d = ob.khatri_rao_dict(eta, m_r, m_t)
    assert d.shape == (m_r * m_t, 1)
    h = d[:, 0] * (0.7 - 0.2j)
    assert ob.ml_cost(eta, h, m_r, m_t) == pytest.approx(0.0, abs=1e-20)
    other = np.array([1.2, 1.8])
    g = ob.ml_gradient(other, h, m_r, m_t)
    eps = 1e-6
    fd = [
        (ob.ml_cost(other + eps * e, h, m_r, m_t) - ob.ml_cost(other - eps * e, h, m_r, m_t)) / (2 * eps)
        for e in np.eye(2)
    ]
    np.testing.assert_allclose(g, fd, rtol=1e-5)


def test_run_ar_and_biht():
    m_r, m_t, n = 4, 8, 8
    h = ob.synth_channel(np.array([0.8, 2.2]), np.array([1.3, 0.6]), np.array([1.0 + 0j, 0.5j]), m_r, m_t)
    s = ob.gen_training(m_t, n, "gaussian", seed=2)
    y = ob.observe(h, s, 10.0, seed=4)
    r = float(np.linalg.norm(h) ** 2)
    out = ob.run_ar(y, s, 2, r, max_outer_iters=30)
    assert out["h"].shape == (m_r, m_t)
    trace = out["objective_trace"]
    assert all(b <= a * (1 + 1e-9) for a, b in zip(trace, trace[1:]))
    assert out["doa"].shape == (2,)
    assert ob.nmse(out["h"], h) < 1.0

    res = ob.biht_estimate(y, s, 2, r_norm=r, grid_points=16, iters=20)
    assert len(res["support"]) == 2
    assert np.linalg.norm(res["h"]) ** 2 == pytest.approx(r)


def test_sweep_and_preset():
    dl = ob.preset("downlink-fdd")
    assert dl["m_r"] == 4 and dl["m_t"] == 64
    cfg = {
        "m_r": 3, "m_t": 6, "n_train": 6, "k_paths": 2, "training": "gaussian",
        "snr_grid_db": [0, 10], "trials": 2, "record_timing": False,
        "ar": {"max_outer_iters": 10}, "biht": {"grid_points": 16, "iters": 10},
    }
    agg, trials = ob.run_sweep(cfg)
    assert len(agg) == 4
    assert len(trials) == 8
    assert all(row["trials"] == 2 for row in agg)
    again, _ = ob.run_sweep(cfg)
    assert [r["mean_nmse"] for r in again] == [r["mean_nmse"] for r in agg]


def test_errors():
    with pytest.raises(ValueError):
        ob.nmse(np.zeros((2, 2), complex), np.ones((2, 2), complex))
    with pytest.raises(ValueError):
        ob.run_sweep({"bogus": 1})
    with pytest.raises(ValueError):
        ob.preset("nope")
