# Copyright 2026 The gpsindy Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#    http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

import pathlib

import numpy as np
import pytest

import gpsindy

ROOT = pathlib.Path(__file__).resolve().parents[2]


def test_wls_matches_lstsq():
    rng = np.random.default_rng(0)
    phi = rng.normal(size=(20, 3))
    z = rng.normal(size=20)
    c = gpsindy.wls_solve(phi, z, np.ones(20))
    np.testing.assert_allclose(c, np.linalg.lstsq(phi, z, rcond=None)[0], atol=1e-12)


def test_stwls_drops_small_terms():
    rng = np.random.default_rng(1)
    phi = rng.normal(size=(50, 4))
    truth = np.array([2.0, 0.0, -1.0, 0.0])
    z = phi @ truth + 1e-3 * rng.normal(size=50)
    sol = gpsindy.stwls(phi, z, np.full(50, 1e6), gpsindy.StwlsConfig([0.0, 0.1, 1.0], eta=5.0))
    assert sol.support == [0, 2]
    np.testing.assert_allclose(sol.coefficients, truth, atol=1e-2)


def test_gp_fit_and_derivative():
    x = np.linspace(0, 2 * np.pi, 40)[None, :]
    y = np.sin(x[0])
    cfg = gpsindy.GpConfig()
    cfg.restarts = 2
    model = gpsindy.fit_gp(x, y, cfg)
    xs = np.linspace(0.5, 5.5, 11)[None, :]
    mean, var = model.predict(xs, dim=0, order=1)
    np.testing.assert_allclose(mean, np.cos(xs[0]), atol=1e-2)
    assert np.all(var > 0)


def test_nlml_gradient_matches_fd():
    x = np.linspace(0, 3, 8)[None, :]
    y = np.cos(x[0])
    theta = gpsindy.SeHyperparams(1.3, np.array([0.7]))
    g = gpsindy.nlml_grad(theta, 0.05, x, y)
    h = 1e-6
    up = gpsindy.nlml(gpsindy.SeHyperparams(1.3 * np.exp(h), np.array([0.7])), 0.05, x, y)
    dn = gpsindy.nlml(gpsindy.SeHyperparams(1.3 * np.exp(-h), np.array([0.7])), 0.05, x, y)
    assert g[0] == pytest.approx((up - dn) / (2 * h), rel=1e-5)


def test_gp_sindy_linear_decay():
    t = np.arange(0, 2.0001, 0.02)
    data = gpsindy.Dataset(t[None, :], np.exp(-t)[:, None], ["t"], ["u"])
    lib = gpsindy.custom_library("cubic", ["u"], "0; 1; 2; 3")
    res = gpsindy.gp_sindy(data, lib, gpsindy.StwlsConfig([0.0, 0.1, 1.0], eta=10.0))
    assert res.feature_names == lib.names()
    c = res.coefficients[:, 0]
    assert c[1] == pytest.approx(-1.0, abs=1e-3)
    assert np.count_nonzero(c) == 1


def test_metrics_and_presets():
    truth = gpsindy.truth_coefficients("lorenz")
    assert gpsindy.e_2(truth, truth) == 0.0
    assert gpsindy.tpr(truth, truth) == 1.0
    assert "burgers-sf" in gpsindy.preset_names()
    clean = gpsindy.lorenz()
    assert gpsindy.noise_sigma(clean.values, 0.1) == pytest.approx(1.59742, abs=1e-5)


def test_errors_carry_kind():
    with pytest.raises(gpsindy.Error) as info:
        gpsindy.preset("no-such-kind")
    assert info.value.kind == "config-error"


def test_run_experiment_custom_config():
    cfg = gpsindy.load_config(str(ROOT / "configs" / "custom-decay.ini"))
    report = gpsindy.run_experiment(cfg)
    (run,) = report["runs"]
    assert run["status"] == "ok"
    u = report["feature_names"].index("u")
    assert run["coefficients"][u, 0] == pytest.approx(-1.0, abs=1e-3)
