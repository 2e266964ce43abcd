"""Integrator kernels against scipy references, plus the numba/numpy lane
switch."""

import json
import os
import subprocess
import sys

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from rydsim import kernels

RNG = np.random.default_rng(2024)


def random_generator(dim):
    a = RNG.normal(size=(dim, dim)) + 1j * RNG.normal(size=(dim, dim))
    h = 0.5 * (a + a.conj().T)
    return -2j * np.pi * h  # unitary generator keeps the norm


def test_rk45_linear_vs_scipy():
    gen = random_generator(6)
    y0 = RNG.normal(size=6) + 1j * RNG.normal(size=6)
    y0 /= np.linalg.norm(y0)
    y, t, ok = kernels.rk45_linear(gen, y0, 2.0, 1e-10, 1e-12, 10_000_000)
    assert ok and t == pytest.approx(2.0)
    ref = solve_ivp(
        lambda t, y: gen @ y, (0, 2.0), y0, rtol=1e-12, atol=1e-14, method="DOP853"
    ).y[:, -1]
    assert np.abs(y - ref).max() < 1e-8
    assert np.linalg.norm(y) == pytest.approx(1.0, abs=1e-9)


def test_rk45_linear_t_zero_identity():
    gen = random_generator(4)
    y0 = np.ones(4, dtype=complex)
    y, t, ok = kernels.rk45_linear(gen, y0, 0.0, 1e-8, 1e-10, 1000)
    assert ok
    np.testing.assert_array_equal(y, y0)


def test_rk4_fixed_converges_to_adaptive():
    gen = random_generator(4)
    y0 = np.zeros(4, dtype=complex)
    y0[0] = 1.0
    ya, _, _ = kernels.rk45_linear(gen, y0, 1.0, 1e-11, 1e-13, 10_000_000)
    yf = kernels.rk4_linear_fixed(gen, y0, 1.0, 20000)
    assert np.abs(ya - yf).max() < 1e-8


def test_rf_pair_matches_scipy():
    c = np.array([0.3, 0.7])
    ddc, mod, f, t_end = 4.0, 9.0, 15.0, 1.3
    y, t, ok = kernels.rk45_rf_pair(c, ddc, mod, f, t_end, 1e-10, 1e-12, 10_000_000)
    assert ok

    def rhs(t, psi):
        d = ddc - mod * np.sin(2 * np.pi * f * t)
        return [
            -2j * np.pi * (c[0] * psi[1] + c[1] * psi[2]),
            -2j * np.pi * (c[0] * psi[0] + d * psi[1]),
            -2j * np.pi * (c[1] * psi[0] + d * psi[2]),
        ]

    ref = solve_ivp(
        rhs, (0, t_end), np.array([1, 0, 0], dtype=complex), rtol=1e-12, atol=1e-14,
        method="DOP853",
    ).y[:, -1]
    assert np.abs(y - ref).max() < 1e-8


def test_rf_pair_zero_modulation_is_static():
    c = np.array([0.5])
    y, _, ok = kernels.rk45_rf_pair(c, 2.0, 0.0, 15.0, 0.8, 1e-11, 1e-13, 10_000_000)
    assert ok
    h = np.array([[0.0, 0.5], [0.5, 2.0]])
    w, v = np.linalg.eigh(h)
    ref = (v * np.exp(-2j * np.pi * w * 0.8)) @ v.T @ np.array([1.0, 0.0])
    assert np.abs(y - ref).max() < 1e-9


def test_chirp_norm_and_sudden_limit():
    y, _, ok = kernels.rk45_chirp(1.0, -30.0, 60.0 / 0.01, 0.01, 1e-10, 1e-12, 10_000_000)
    assert ok
    assert abs(np.linalg.norm(y) - 1.0) < 1e-9
    assert abs(y[1]) ** 2 < 1e-3  # sudden sweep leaves the state behind


def test_sweep_unitary_matches_state_kernel():
    om, d0, rate, T = 1.3, -25.0, 0.5, 100.0
    u0 = np.eye(2, dtype=complex)
    u, _, ok = kernels.rk45_sweep_unitary(om, 0.0, d0, rate, T, u0, 1e-10, 1e-12, 100_000_000)
    assert ok
    psi, _, ok2 = kernels.rk45_chirp(om, d0, rate, T, 1e-10, 1e-12, 100_000_000)
    assert ok2
    # long sweep: global error accumulates to ~1e-7 at rtol 1e-10
    assert np.abs(u[:, 0] - psi).max() < 1e-6
    assert np.abs(u.conj().T @ u - np.eye(2)).max() < 1e-6


def test_stirap_adaptive_vs_fixed():
    args = (12.0, 5.0, 1.0, 12.0, 3.8, 1.0, 0.0, 9.0)
    ya, _, ok = kernels.rk45_stirap(*args, 1e-10, 1e-12, 10_000_000)
    assert ok
    yf = kernels.rk4_stirap_fixed(*args, 120_000)
    assert np.abs(ya - yf).max() < 1e-7


_PROBE = r"""
import json
import numpy as np
from rydsim import kernels

gen = -2j*np.pi*np.array([[0.0, 0.5],[0.5, -3.0]], dtype=complex)
y0 = np.array([1.0, 0.0], dtype=complex)
y, t, ok = kernels.rk45_linear(gen, y0, 1.7, 1e-10, 1e-12, 10_000_000)
c = np.array([0.4])
z, _, _ = kernels.rk45_rf_pair(c, 2.0, 5.0, 15.0, 1.1, 1e-10, 1e-12, 10_000_000)
print(json.dumps({
    "numba": kernels.NUMBA_ENABLED,
    "lin": [[v.real, v.imag] for v in y],
    "rf": [[v.real, v.imag] for v in z],
}))
"""


def _probe_lanes(disable_numba):
    env = dict(os.environ)
    if disable_numba:
        env["RYDSIM_NO_NUMBA"] = "1"
    else:
        env.pop("RYDSIM_NO_NUMBA", None)
    out = subprocess.run(
        [sys.executable, "-c", _PROBE], env=env, capture_output=True, text=True, check=True
    )
    return json.loads(out.stdout)


def test_numpy_fallback_lane_matches_numba_lane():
    fast = _probe_lanes(disable_numba=False)
    slow = _probe_lanes(disable_numba=True)
    assert slow["numba"] is False
    for key in ("lin", "rf"):
        a = np.array(fast[key])
        b = np.array(slow[key])
        assert np.abs(a - b).max() < 1e-12
