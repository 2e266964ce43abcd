"""Driven-dissipative dynamics of a single multilevel atom.

Four-level ladder (5S -> 5P -> 6S -> nP) under three lasers, with
spontaneous decay routed one step down the ladder and laser linewidths
entering as pure dephasing that accumulates along the ladder.  Spectrum
scans run over the third-step detuning; Doppler averaging samples
Maxwell-Boltzmann velocities for an arbitrary beam geometry.

The generator acts on the row-major vectorized density matrix, with every
rate converted to 1/us through the global 2*pi*f convention.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from . import kernels
from .model import BeamGeometry, LaserField
from .traces import Trace

KB_J_PER_K = 1.380649e-23
AMU_KG = 1.66053906660e-27

HERMITICITY_TOL = 1e-10
TRACE_TOL = 1e-8
POSITIVITY_TOL = -1e-8


class IntegrationError(RuntimeError):
    """Adaptive integration failed; carries the time actually reached."""

    def __init__(self, message, t_reached):
        super().__init__(f"{message} (reached t = {t_reached:.6g} us)")
        self.t_reached = t_reached


@dataclass
class DensityMatrix:
    """Quantum state of the ladder; validated against hermiticity, unit
    trace and positivity whenever produced by an evolution."""

    entries: np.ndarray

    def __post_init__(self):
        self.entries = np.asarray(self.entries, dtype=complex)
        if self.entries.ndim != 2 or self.entries.shape[0] != self.entries.shape[1]:
            raise ValueError(f"density matrix must be square, got shape {self.entries.shape}")

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @classmethod
    def ground(cls, dim: int) -> "DensityMatrix":
        rho = np.zeros((dim, dim), dtype=complex)
        rho[0, 0] = 1.0
        return cls(rho)

    def population(self, level: int) -> float:
        return float(self.entries[level, level].real)

    def validate(self) -> "DensityMatrix":
        rho = self.entries
        if np.abs(rho - rho.conj().T).max() > HERMITICITY_TOL:
            raise ValueError("density matrix is not Hermitian within tolerance")
        if abs(np.trace(rho).real - 1.0) > TRACE_TOL or abs(np.trace(rho).imag) > TRACE_TOL:
            raise ValueError(f"trace deviates from 1: {np.trace(rho)}")
        evals = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))
        if evals.min() < POSITIVITY_TOL:
            raise ValueError(f"negative eigenvalue {evals.min()}")
        return self


@dataclass(frozen=True)
class LevelScheme:
    """Four-level ladder drive: one LaserField per excitation step,
    population decay rates for levels 2..4 and the interaction time."""

    steps: tuple  # three LaserField
    spont_decay_MHz: tuple = (0.0, 0.0, 0.0)  # gamma_2, gamma_3, gamma_4
    interaction_time_us: float = 1.0

    def __post_init__(self):
        if len(self.steps) != 3:
            raise ValueError("LevelScheme needs exactly three excitation steps")
        for s in self.steps:
            if not isinstance(s, LaserField):
                raise TypeError("each step must be a LaserField")
        if len(self.spont_decay_MHz) != 3:
            raise ValueError("spont_decay_MHz needs rates for levels 2, 3 and 4")
        for g in self.spont_decay_MHz:
            if g < 0:
                raise ValueError(f"decay rates must be >= 0, got {g}")
        if self.interaction_time_us < 0:
            raise ValueError("interaction time must be >= 0")

    @property
    def dim(self) -> int:
        return 4

    def with_detunings(self, d1=None, d2=None, d3=None) -> "LevelScheme":
        new = []
        for step, d in zip(self.steps, (d1, d2, d3)):
            if d is None:
                new.append(step)
            else:
                new.append(
                    LaserField(step.wavelength_nm, float(d), step.rabi_MHz, step.linewidth_MHz)
                )
        return LevelScheme(tuple(new), self.spont_decay_MHz, self.interaction_time_us)


def hamiltonian(scheme: LevelScheme) -> np.ndarray:
    """Rotating-frame ladder Hamiltonian (MHz): cumulative detunings on the
    diagonal, Omega_i/2 between adjacent levels."""
    h = np.zeros((4, 4), dtype=complex)
    cum = 0.0
    for i, step in enumerate(scheme.steps):
        cum += step.detuning_MHz
        h[i + 1, i + 1] = -cum
        h[i, i + 1] = 0.5 * step.rabi_MHz
        h[i + 1, i] = 0.5 * step.rabi_MHz
    return h


def build_liouvillian(scheme: LevelScheme) -> np.ndarray:
    """Generator L (16x16, 1/us) acting on the row-major vec of rho.

    Contains the coherent commutator, spontaneous decay one step down the
    ladder and pure laser-linewidth dephasing: coherence (j,k) picks up the
    summed linewidth of every laser step between j and k.
    """
    dim = scheme.dim
    h = hamiltonian(scheme)
    eye = np.eye(dim)
    lv = -2j * np.pi * (np.kron(h, eye) - np.kron(eye, h.T))

    def dissipator(op, rate):
        opd = op.conj().T
        anti = opd @ op
        return 2.0 * np.pi * rate * (
            np.kron(op, op.conj()) - 0.5 * (np.kron(anti, eye) + np.kron(eye, anti.T))
        )

    for level, gamma in zip((1, 2, 3), scheme.spont_decay_MHz):
        if gamma > 0.0:
            op = np.zeros((dim, dim), dtype=complex)
            op[level - 1, level] = 1.0
            lv = lv + dissipator(op, gamma)

    widths = [s.linewidth_MHz for s in scheme.steps]
    deph = np.zeros((dim, dim))
    for j in range(dim):
        for k in range(dim):
            if j != k:
                deph[j, k] = sum(widths[min(j, k) : max(j, k)])
    lv = lv - 2.0 * np.pi * np.diag(deph.reshape(-1)).astype(complex)
    return lv


def evolve(
    rho0: DensityMatrix,
    lv: np.ndarray,
    t_us: float,
    tol: float = 1e-8,
    method: str = "rk45",
    n_steps: int = 2000,
    max_steps: int = 10_000_000,
) -> DensityMatrix:
    """Propagate rho0 for t_us under the generator lv.

    method "rk45" is the adaptive default; "rk4" is the fixed-step
    verification mode (n_steps); "expm" applies the dense matrix exponential
    exactly, which is what the scan drivers use for constant generators.
    """
    if t_us < 0:
        raise ValueError("evolution time must be >= 0")
    y0 = rho0.entries.reshape(-1).astype(complex)
    if method == "rk45":
        y, t_reached, ok = kernels.rk45_linear(
            np.ascontiguousarray(lv), y0, float(t_us), tol, tol * 1e-2, int(max_steps)
        )
        if not ok:
            raise IntegrationError("adaptive integration gave up", t_reached)
    elif method == "rk4":
        y = kernels.rk4_linear_fixed(np.ascontiguousarray(lv), y0, float(t_us), int(n_steps))
    elif method == "expm":
        y = expm(lv * t_us) @ y0
    else:
        raise ValueError(f"unknown method {method!r}")
    dim = rho0.dim
    return DensityMatrix(y.reshape(dim, dim)).validate()


def scan_spectrum(
    scheme: LevelScheme,
    delta3_grid,
    N0: float = 1.0,
    method: str = "expm",
    tol: float = 1e-8,
) -> Trace:
    """Rydberg-level population N0*rho_44(T) versus third-step detuning."""
    grid = np.asarray(delta3_grid, dtype=float)
    if grid.size == 0:
        raise ValueError("detuning grid is empty")
    if grid.size > 1 and not np.all(np.diff(grid) > 0):
        raise ValueError("detuning grid must be strictly increasing")
    rho0 = DensityMatrix.ground(scheme.dim)
    t_us = scheme.interaction_time_us
    signal = np.empty(grid.size)
    for i, d3 in enumerate(grid):
        lv = build_liouvillian(scheme.with_detunings(d3=d3))
        rho_t = evolve(rho0, lv, t_us, tol=tol, method=method)
        signal[i] = N0 * rho_t.population(3)
    return Trace(columns=("delta3_MHz", "signal"), data=np.column_stack([grid, signal]))


def maxwell_velocities(temperature_K, mass_amu, n_samples, seed) -> np.ndarray:
    """n_samples x 3 thermal velocity draws (m/s), reproducible from seed."""
    sigma = np.sqrt(KB_J_PER_K * temperature_K / (mass_amu * AMU_KG))
    rng = np.random.default_rng(np.random.SeedSequence(int(seed)))
    return rng.normal(0.0, sigma, size=(int(n_samples), 3))


def doppler_shifts_MHz(geometry: BeamGeometry, velocity) -> np.ndarray:
    """First-order Doppler shifts -k_i.v of the three steps for one velocity
    (m/s); returned in MHz."""
    khat = np.asarray(geometry.unit_wavevectors, dtype=float)
    lam = np.asarray(geometry.wavelengths_nm, dtype=float)
    return -(khat @ np.asarray(velocity, dtype=float)) * 1e3 / lam


def doppler_averaged_spectrum(
    scheme: LevelScheme,
    geometry: BeamGeometry,
    temperature_K: float,
    mass_amu: float,
    delta3_grid,
    n_velocity_samples: int = 32,
    seed: int = 0,
    method: str = "expm",
) -> Trace:
    """Spectrum averaged over Maxwell-Boltzmann velocity samples, each
    velocity shifting the per-step detunings by -k_i.v."""
    if n_velocity_samples < 1:
        raise ValueError("need at least one velocity sample")
    grid = np.asarray(delta3_grid, dtype=float)
    vels = maxwell_velocities(temperature_K, mass_amu, n_velocity_samples, seed)
    base = np.array([s.detuning_MHz for s in scheme.steps])
    acc = np.zeros(grid.size)
    for v in vels:
        d = base + doppler_shifts_MHz(geometry, v)
        shifted = scheme.with_detunings(d1=d[0], d2=d[1])
        # the third-step shift rides on the scanned detuning
        tr = scan_spectrum(shifted, grid + d[2], N0=1.0, method=method)
        acc += tr.column("signal")
    acc /= n_velocity_samples
    return Trace(columns=("delta3_MHz", "signal"), data=np.column_stack([grid, acc]))
