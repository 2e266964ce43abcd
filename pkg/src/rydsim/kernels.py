"""Hot numeric kernels: adaptive Runge-Kutta integrators for the dynamics loops.

Every kernel is a plain numpy function; unless the environment variable
``RYDSIM_NO_NUMBA`` is set (or numba is unavailable) the whole family is
compiled with ``numba.njit`` at import time.  The selected lane is reported
by ``NUMBA_ENABLED``; tests and the benchmark compare both lanes by running
a fresh interpreter with the flag set.

Unit convention used throughout: Hamiltonians carry ordinary frequencies in
MHz, time is in microseconds, and phases accumulate as 2*pi*f*t, so the
Schroedinger kernels integrate psi' = -2j*pi*H(t) psi.
"""

import os

import numpy as np

TWO_PI = 2.0 * np.pi

# Dormand-Prince 5(4) tableau (FSAL: stage 7 equals the accepted solution).
_C2, _C3, _C4, _C5 = 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0
_A21 = 1.0 / 5.0
_A31, _A32 = 3.0 / 40.0, 9.0 / 40.0
_A41, _A42, _A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
_A51, _A52, _A53, _A54 = 19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0
_A61, _A62, _A63, _A64, _A65 = (
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
)
_B1, _B3, _B4, _B5, _B6 = 35.0 / 384.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0
# fifth-order weights minus the embedded fourth-order weights
_E1 = 35.0 / 384.0 - 5179.0 / 57600.0
_E3 = 500.0 / 1113.0 - 7571.0 / 16695.0
_E4 = 125.0 / 192.0 - 393.0 / 640.0
_E5 = -2187.0 / 6784.0 + 92097.0 / 339200.0
_E6 = 11.0 / 84.0 - 187.0 / 2100.0
_E7 = -1.0 / 40.0

_SAFETY = 0.9
_MIN_SCALE = 0.2
_MAX_SCALE = 5.0


def _error_norm(err, y_old, y_new, rtol, atol):
    n = err.shape[0]
    acc = 0.0
    for i in range(n):
        scale = atol + rtol * max(abs(y_old[i]), abs(y_new[i]))
        q = abs(err[i]) / scale
        acc += q * q
    return np.sqrt(acc / n)


def _step_scale(enorm):
    if enorm == 0.0:
        return _MAX_SCALE
    scale = _SAFETY * enorm ** -0.2
    if scale < _MIN_SCALE:
        return _MIN_SCALE
    if scale > _MAX_SCALE:
        return _MAX_SCALE
    return scale


def rk45_linear(gen, y0, t_end, rtol, atol, max_steps):
    """Adaptive integration of y' = gen @ y with a constant complex generator.

    Returns (y, t_reached, ok); ok is False when the step controller
    underflows or runs out of steps, with t_reached telling how far it got.
    """
    y = y0.copy()
    t = 0.0
    if t_end <= 0.0:
        return y, t, True
    k1 = gen @ y
    gscale = 0.0
    for i in range(gen.shape[0]):
        row = 0.0
        for j in range(gen.shape[1]):
            row += abs(gen[i, j])
        if row > gscale:
            gscale = row
    h = 0.1 / gscale if gscale > 0.0 else t_end
    if h > t_end:
        h = t_end
    steps = 0
    while t < t_end:
        if steps >= max_steps:
            return y, t, False
        if h < 1e-14 * max(t_end, 1.0):
            return y, t, False
        if t + h > t_end:
            h = t_end - t
        k2 = gen @ (y + h * (_A21 * k1))
        k3 = gen @ (y + h * (_A31 * k1 + _A32 * k2))
        k4 = gen @ (y + h * (_A41 * k1 + _A42 * k2 + _A43 * k3))
        k5 = gen @ (y + h * (_A51 * k1 + _A52 * k2 + _A53 * k3 + _A54 * k4))
        k6 = gen @ (y + h * (_A61 * k1 + _A62 * k2 + _A63 * k3 + _A64 * k4 + _A65 * k5))
        y_new = y + h * (_B1 * k1 + _B3 * k3 + _B4 * k4 + _B5 * k5 + _B6 * k6)
        k7 = gen @ y_new
        err = h * (_E1 * k1 + _E3 * k3 + _E4 * k4 + _E5 * k5 + _E6 * k6 + _E7 * k7)
        enorm = _error_norm(err, y, y_new, rtol, atol)
        if enorm <= 1.0:
            t += h
            y = y_new
            k1 = k7
        h *= _step_scale(enorm)
        steps += 1
    return y, t, True


def rk4_linear_fixed(gen, y0, t_end, n_steps):
    """Fixed-step classical RK4 for y' = gen @ y (verification mode)."""
    y = y0.copy()
    h = t_end / n_steps
    for _ in range(n_steps):
        k1 = gen @ y
        k2 = gen @ (y + 0.5 * h * k1)
        k3 = gen @ (y + 0.5 * h * k2)
        k4 = gen @ (y + h * k3)
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return y


def _rf_pair_rhs(c, delta, psi):
    # star-shaped pair Hamiltonian: H[0,k] = c[k-1], H[k,k] = delta
    n = psi.shape[0]
    out = np.empty(n, dtype=np.complex128)
    acc = 0.0 + 0.0j
    for k in range(1, n):
        acc += c[k - 1] * psi[k]
    out[0] = -2j * np.pi * acc
    for k in range(1, n):
        out[k] = -2j * np.pi * (c[k - 1] * psi[0] + delta * psi[k])
    return out


def rk45_rf_pair(couplings, delta_dc, mod_amp, f_rf, t_end, rtol, atol, max_steps):
    """Pair-flip dynamics under a sinusoidally modulated energy defect.

    State vector: [head state, one amplitude per flipped pair], starting in
    the head state.  delta(t) = delta_dc - mod_amp*sin(2*pi*f_rf*t) sits on
    the pair-state diagonal; couplings (MHz) join the head state to each
    pair state.  Returns (psi, t_reached, ok).
    """
    n = couplings.shape[0] + 1
    y = np.zeros(n, dtype=np.complex128)
    y[0] = 1.0 + 0.0j
    t = 0.0
    if t_end <= 0.0:
        return y, t, True
    cmax = 0.0
    for k in range(couplings.shape[0]):
        if abs(couplings[k]) > cmax:
            cmax = abs(couplings[k])
    h = 0.1 / (TWO_PI * (abs(delta_dc) + abs(mod_amp) + cmax + f_rf + 1e-12))
    if h > t_end:
        h = t_end
    k1 = _rf_pair_rhs(couplings, delta_dc - mod_amp * np.sin(0.0), y)
    steps = 0
    while t < t_end:
        if steps >= max_steps:
            return y, t, False
        if h < 1e-14 * max(t_end, 1.0):
            return y, t, False
        if t + h > t_end:
            h = t_end - t
        d2 = delta_dc - mod_amp * np.sin(TWO_PI * f_rf * (t + _C2 * h))
        d3 = delta_dc - mod_amp * np.sin(TWO_PI * f_rf * (t + _C3 * h))
        d4 = delta_dc - mod_amp * np.sin(TWO_PI * f_rf * (t + _C4 * h))
        d5 = delta_dc - mod_amp * np.sin(TWO_PI * f_rf * (t + _C5 * h))
        d6 = delta_dc - mod_amp * np.sin(TWO_PI * f_rf * (t + h))
        k2 = _rf_pair_rhs(couplings, d2, y + h * (_A21 * k1))
        k3 = _rf_pair_rhs(couplings, d3, y + h * (_A31 * k1 + _A32 * k2))
        k4 = _rf_pair_rhs(couplings, d4, y + h * (_A41 * k1 + _A42 * k2 + _A43 * k3))
        k5 = _rf_pair_rhs(couplings, d5, y + h * (_A51 * k1 + _A52 * k2 + _A53 * k3 + _A54 * k4))
        k6 = _rf_pair_rhs(
            couplings, d6, y + h * (_A61 * k1 + _A62 * k2 + _A63 * k3 + _A64 * k4 + _A65 * k5)
        )
        y_new = y + h * (_B1 * k1 + _B3 * k3 + _B4 * k4 + _B5 * k5 + _B6 * k6)
        k7 = _rf_pair_rhs(couplings, d6, y_new)
        err = h * (_E1 * k1 + _E3 * k3 + _E4 * k4 + _E5 * k5 + _E6 * k6 + _E7 * k7)
        enorm = _error_norm(err, y, y_new, rtol, atol)
        if enorm <= 1.0:
            t += h
            y = y_new
            k1 = k7
        h *= _step_scale(enorm)
        steps += 1
    return y, t, True


def _chirp_rhs(omega, delta, psi):
    out = np.empty(2, dtype=np.complex128)
    out[0] = -2j * np.pi * (0.5 * omega * psi[1])
    out[1] = -2j * np.pi * (0.5 * omega * psi[0] - delta * psi[1])
    return out


def rk45_chirp(omega, delta_start, rate, t_end, rtol, atol, max_steps):
    """Two-level sweep: coupling omega/2 and excited-level energy
    -delta(t) with delta(t) = delta_start + rate*t.  Starts in the lower
    level; returns (psi, t_reached, ok)."""
    y = np.zeros(2, dtype=np.complex128)
    y[0] = 1.0 + 0.0j
    t = 0.0
    if t_end <= 0.0:
        return y, t, True
    dmax = max(abs(delta_start), abs(delta_start + rate * t_end))
    h = 0.1 / (TWO_PI * (omega + dmax + 1e-12))
    if h > t_end:
        h = t_end
    k1 = _chirp_rhs(omega, delta_start, y)
    steps = 0
    while t < t_end:
        if steps >= max_steps:
            return y, t, False
        if h < 1e-14 * max(t_end, 1.0):
            return y, t, False
        if t + h > t_end:
            h = t_end - t
        k2 = _chirp_rhs(omega, delta_start + rate * (t + _C2 * h), y + h * (_A21 * k1))
        k3 = _chirp_rhs(omega, delta_start + rate * (t + _C3 * h), y + h * (_A31 * k1 + _A32 * k2))
        k4 = _chirp_rhs(
            omega, delta_start + rate * (t + _C4 * h), y + h * (_A41 * k1 + _A42 * k2 + _A43 * k3)
        )
        k5 = _chirp_rhs(
            omega,
            delta_start + rate * (t + _C5 * h),
            y + h * (_A51 * k1 + _A52 * k2 + _A53 * k3 + _A54 * k4),
        )
        k6 = _chirp_rhs(
            omega,
            delta_start + rate * (t + h),
            y + h * (_A61 * k1 + _A62 * k2 + _A63 * k3 + _A64 * k4 + _A65 * k5),
        )
        y_new = y + h * (_B1 * k1 + _B3 * k3 + _B4 * k4 + _B5 * k5 + _B6 * k6)
        k7 = _chirp_rhs(omega, delta_start + rate * (t + h), y_new)
        err = h * (_E1 * k1 + _E3 * k3 + _E4 * k4 + _E5 * k5 + _E6 * k6 + _E7 * k7)
        enorm = _error_norm(err, y, y_new, rtol, atol)
        if enorm <= 1.0:
            t += h
            y = y_new
            k1 = k7
        h *= _step_scale(enorm)
        steps += 1
    return y, t, True


def _sweep_rhs_u(omega, delta, u):
    # propagator version: columns of u evolve under the two-level sweep
    out = np.empty((2, 2), dtype=np.complex128)
    for col in range(2):
        out[0, col] = -2j * np.pi * (0.5 * omega * u[1, col])
        out[1, col] = -2j * np.pi * (0.5 * omega * u[0, col] - delta * u[1, col])
    return out


def rk45_sweep_unitary(
    omega_start, omega_slope, delta_start, delta_slope, t_end, u0, rtol, atol, max_steps
):
    """2x2 propagator of a two-level segment with linear ramps in both the
    coupling and the detuning, multiplied onto u0.  Returns (u, t_reached,
    ok)."""
    u = u0.copy()
    t = 0.0
    if t_end <= 0.0:
        return u, t, True
    dmax = max(abs(delta_start), abs(delta_start + delta_slope * t_end))
    omax = max(abs(omega_start), abs(omega_start + omega_slope * t_end))
    h = 0.1 / (TWO_PI * (omax + dmax + 1e-12))
    if h > t_end:
        h = t_end
    k1 = _sweep_rhs_u(omega_start, delta_start, u)
    steps = 0
    while t < t_end:
        if steps >= max_steps:
            return u, t, False
        if h < 1e-14 * max(t_end, 1.0):
            return u, t, False
        if t + h > t_end:
            h = t_end - t
        t2 = t + _C2 * h
        k2 = _sweep_rhs_u(
            omega_start + omega_slope * t2, delta_start + delta_slope * t2, u + h * (_A21 * k1)
        )
        t3 = t + _C3 * h
        k3 = _sweep_rhs_u(
            omega_start + omega_slope * t3,
            delta_start + delta_slope * t3,
            u + h * (_A31 * k1 + _A32 * k2),
        )
        t4 = t + _C4 * h
        k4 = _sweep_rhs_u(
            omega_start + omega_slope * t4,
            delta_start + delta_slope * t4,
            u + h * (_A41 * k1 + _A42 * k2 + _A43 * k3),
        )
        t5 = t + _C5 * h
        k5 = _sweep_rhs_u(
            omega_start + omega_slope * t5,
            delta_start + delta_slope * t5,
            u + h * (_A51 * k1 + _A52 * k2 + _A53 * k3 + _A54 * k4),
        )
        t6 = t + h
        k6 = _sweep_rhs_u(
            omega_start + omega_slope * t6,
            delta_start + delta_slope * t6,
            u + h * (_A61 * k1 + _A62 * k2 + _A63 * k3 + _A64 * k4 + _A65 * k5),
        )
        u_new = u + h * (_B1 * k1 + _B3 * k3 + _B4 * k4 + _B5 * k5 + _B6 * k6)
        k7 = _sweep_rhs_u(omega_start + omega_slope * t6, delta_start + delta_slope * t6, u_new)
        err = h * (_E1 * k1 + _E3 * k3 + _E4 * k4 + _E5 * k5 + _E6 * k6 + _E7 * k7)
        enorm = _error_norm(err.reshape(-1), u.reshape(-1), u_new.reshape(-1), rtol, atol)
        if enorm <= 1.0:
            t += h
            u = u_new
            k1 = k7
        h *= _step_scale(enorm)
        steps += 1
    return u, t, True


def _stirap_rhs(om_p, om_s, delta_mid, psi):
    out = np.empty(3, dtype=np.complex128)
    out[0] = -2j * np.pi * (0.5 * om_p * psi[1])
    out[1] = -2j * np.pi * (0.5 * om_p * psi[0] + delta_mid * psi[1] + 0.5 * om_s * psi[2])
    out[2] = -2j * np.pi * (0.5 * om_s * psi[1])
    return out


def _gauss_env(t, amp, center, width):
    return amp * np.exp(-0.5 * ((t - center) / width) ** 2)


def rk45_stirap(amp_p, t_p, w_p, amp_s, t_s, w_s, delta_mid, t_end, rtol, atol, max_steps):
    """Three-level ladder driven by Gaussian pump/Stokes envelopes, starting
    in level 1.  Returns (psi, t_reached, ok)."""
    y = np.zeros(3, dtype=np.complex128)
    y[0] = 1.0 + 0.0j
    t = 0.0
    if t_end <= 0.0:
        return y, t, True
    h = 0.1 / (TWO_PI * (amp_p + amp_s + abs(delta_mid) + 1e-12))
    if h > t_end:
        h = t_end
    k1 = _stirap_rhs(_gauss_env(t, amp_p, t_p, w_p), _gauss_env(t, amp_s, t_s, w_s), delta_mid, y)
    steps = 0
    while t < t_end:
        if steps >= max_steps:
            return y, t, False
        if h < 1e-14 * max(t_end, 1.0):
            return y, t, False
        if t + h > t_end:
            h = t_end - t
        t2 = t + _C2 * h
        k2 = _stirap_rhs(
            _gauss_env(t2, amp_p, t_p, w_p), _gauss_env(t2, amp_s, t_s, w_s), delta_mid,
            y + h * (_A21 * k1),
        )
        t3 = t + _C3 * h
        k3 = _stirap_rhs(
            _gauss_env(t3, amp_p, t_p, w_p), _gauss_env(t3, amp_s, t_s, w_s), delta_mid,
            y + h * (_A31 * k1 + _A32 * k2),
        )
        t4 = t + _C4 * h
        k4 = _stirap_rhs(
            _gauss_env(t4, amp_p, t_p, w_p), _gauss_env(t4, amp_s, t_s, w_s), delta_mid,
            y + h * (_A41 * k1 + _A42 * k2 + _A43 * k3),
        )
        t5 = t + _C5 * h
        k5 = _stirap_rhs(
            _gauss_env(t5, amp_p, t_p, w_p), _gauss_env(t5, amp_s, t_s, w_s), delta_mid,
            y + h * (_A51 * k1 + _A52 * k2 + _A53 * k3 + _A54 * k4),
        )
        t6 = t + h
        k6 = _stirap_rhs(
            _gauss_env(t6, amp_p, t_p, w_p), _gauss_env(t6, amp_s, t_s, w_s), delta_mid,
            y + h * (_A61 * k1 + _A62 * k2 + _A63 * k3 + _A64 * k4 + _A65 * k5),
        )
        y_new = y + h * (_B1 * k1 + _B3 * k3 + _B4 * k4 + _B5 * k5 + _B6 * k6)
        k7 = _stirap_rhs(
            _gauss_env(t6, amp_p, t_p, w_p), _gauss_env(t6, amp_s, t_s, w_s), delta_mid, y_new
        )
        err = h * (_E1 * k1 + _E3 * k3 + _E4 * k4 + _E5 * k5 + _E6 * k6 + _E7 * k7)
        enorm = _error_norm(err, y, y_new, rtol, atol)
        if enorm <= 1.0:
            t += h
            y = y_new
            k1 = k7
        h *= _step_scale(enorm)
        steps += 1
    return y, t, True


def rk4_stirap_fixed(amp_p, t_p, w_p, amp_s, t_s, w_s, delta_mid, t_end, n_steps):
    """Fixed-step RK4 twin of the STIRAP kernel (oracle mode)."""
    y = np.zeros(3, dtype=np.complex128)
    y[0] = 1.0 + 0.0j
    h = t_end / n_steps
    for i in range(n_steps):
        t = i * h
        k1 = _stirap_rhs(
            _gauss_env(t, amp_p, t_p, w_p), _gauss_env(t, amp_s, t_s, w_s), delta_mid, y
        )
        tm = t + 0.5 * h
        k2 = _stirap_rhs(
            _gauss_env(tm, amp_p, t_p, w_p), _gauss_env(tm, amp_s, t_s, w_s), delta_mid,
            y + 0.5 * h * k1,
        )
        k3 = _stirap_rhs(
            _gauss_env(tm, amp_p, t_p, w_p), _gauss_env(tm, amp_s, t_s, w_s), delta_mid,
            y + 0.5 * h * k2,
        )
        te = t + h
        k4 = _stirap_rhs(
            _gauss_env(te, amp_p, t_p, w_p), _gauss_env(te, amp_s, t_s, w_s), delta_mid,
            y + h * k3,
        )
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return y


KERNEL_NAMES = (
    "rk45_linear",
    "rk4_linear_fixed",
    "rk45_rf_pair",
    "rk45_chirp",
    "rk45_sweep_unitary",
    "rk45_stirap",
    "rk4_stirap_fixed",
)


def _numba_requested():
    return os.environ.get("RYDSIM_NO_NUMBA", "").strip().lower() not in ("1", "true", "yes", "on")


NUMBA_ENABLED = False
if _numba_requested():
    try:
        from numba import njit
    except ImportError:
        njit = None
    if njit is not None:
        _jit = njit(cache=True)
        _error_norm = _jit(_error_norm)
        _step_scale = _jit(_step_scale)
        _rf_pair_rhs = _jit(_rf_pair_rhs)
        _chirp_rhs = _jit(_chirp_rhs)
        _sweep_rhs_u = _jit(_sweep_rhs_u)
        _stirap_rhs = _jit(_stirap_rhs)
        _gauss_env = _jit(_gauss_env)
        rk45_linear = _jit(rk45_linear)
        rk4_linear_fixed = _jit(rk4_linear_fixed)
        rk45_rf_pair = _jit(rk45_rf_pair)
        rk45_chirp = _jit(rk45_chirp)
        rk45_sweep_unitary = _jit(rk45_sweep_unitary)
        rk45_stirap = _jit(rk45_stirap)
        rk4_stirap_fixed = _jit(rk4_stirap_fixed)
        NUMBA_ENABLED = True
