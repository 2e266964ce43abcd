"""Few-body Foerster-resonance dynamics for N = 1..5 atoms.

Collective basis truncated at one flipped pair: the all-initial state plus
one symmetrized state per unordered atom pair, coupled star-fashion with a
sqrt(2)-enhanced dipole-dipole element.  Covers Stark-scanned lineshapes,
interaction-time dependence, rf-assisted Floquet resonances, sideband
weights and detection-efficiency post-processing.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import jv

from . import kernels
from .bloch import IntegrationError
from .model import DetectionModel, FoersterChannel, RfField, foerster_defect
from .traces import ResonanceStats, Trace, lineshape_stats


@dataclass(frozen=True)
class PairBasis:
    """All-initial collective state plus one flipped-pair state per
    unordered pair (i, j)."""

    atom_count: int

    def __post_init__(self):
        if not 1 <= self.atom_count <= 5:
            raise ValueError(f"atom_count must be in [1, 5], got {self.atom_count}")

    @property
    def pairs(self) -> tuple:
        n = self.atom_count
        return tuple((i, j) for i in range(n) for j in range(i + 1, n))

    @property
    def dim(self) -> int:
        return 1 + len(self.pairs)


@dataclass(frozen=True)
class ExcitationVolume:
    """Random-placement region: a cube of the given edge or a sphere of the
    given radius, with a minimum pairwise distance enforced by resampling."""

    shape: str = "box"
    size_um: float = 25.0
    r_min_um: float = 2.0

    def __post_init__(self):
        if self.shape not in ("box", "sphere"):
            raise ValueError(f"volume shape must be 'box' or 'sphere', got {self.shape!r}")
        if self.size_um <= 0:
            raise ValueError("volume size must be > 0")


def pairwise_distances(positions) -> np.ndarray:
    """Upper-triangle pair distances, ordered like PairBasis.pairs."""
    pos = np.atleast_2d(np.asarray(positions, dtype=float))
    n = pos.shape[0]
    out = []
    for i in range(n):
        for j in range(i + 1, n):
            out.append(float(np.linalg.norm(pos[i] - pos[j])))
    return np.asarray(out)


@dataclass(frozen=True)
class AtomConfiguration:
    """N atom positions (um) inside an excitation volume."""

    positions: np.ndarray
    r_min_um: float = 0.0

    def __post_init__(self):
        pos = np.atleast_2d(np.asarray(self.positions, dtype=float))
        object.__setattr__(self, "positions", pos)
        if pos.shape[0] >= 2:
            dmin = pairwise_distances(pos).min()
            if dmin <= self.r_min_um:
                raise ValueError(
                    f"pair distance {dmin:.3g} um at or below the floor {self.r_min_um} um"
                )

    @property
    def atom_count(self) -> int:
        return self.positions.shape[0]


@dataclass(frozen=True)
class StarkSwitchProfile:
    """Stark-switching sequence: excitation plateau, scanned interaction
    field and interaction time.  Rise and fall are treated as instantaneous;
    the excitation plateau only prepares the initial state."""

    excitation_field_V_per_cm: float = 5.6
    interaction_field_V_per_cm: float = 1.79
    interaction_time_us: float = 3.0

    def __post_init__(self):
        if self.excitation_field_V_per_cm < 0 or self.interaction_field_V_per_cm < 0:
            raise ValueError("fields must be >= 0")
        if self.interaction_time_us <= 0:
            raise ValueError("interaction time must be > 0")


def sample_configuration(volume: ExcitationVolume, n: int, rng) -> AtomConfiguration:
    """Uniform atom placement in the volume, redrawn until the pair-distance
    floor holds."""
    for _ in range(10_000):
        if volume.shape == "box":
            pos = rng.uniform(-0.5 * volume.size_um, 0.5 * volume.size_um, size=(n, 3))
        else:
            pos = rng.normal(size=(n, 3))
            pos /= np.linalg.norm(pos, axis=1)[:, None]
            pos *= volume.size_um * rng.uniform(0.0, 1.0, size=(n, 1)) ** (1.0 / 3.0)
        if n < 2 or pairwise_distances(pos).min() > volume.r_min_um:
            return AtomConfiguration(pos, volume.r_min_um)
    raise RuntimeError("could not draw a configuration above the pair-distance floor")


def pair_couplings(channel: FoersterChannel, config: AtomConfiguration) -> np.ndarray:
    """Symmetrized couplings sqrt(2)*D/R_ij^3 (MHz), one per pair."""
    dists = pairwise_distances(config.positions)
    if dists.size and dists.min() <= 0:
        raise ValueError("coincident atoms")
    return math.sqrt(2.0) * channel.dd_coeff_MHz_um3 / dists**3


def build_pair_hamiltonian(
    channel: FoersterChannel, config: AtomConfiguration, E: float
) -> np.ndarray:
    """Star Hamiltonian on the PairBasis (MHz): zero for the all-initial
    state, defect(E) on each flipped-pair state, sqrt(2)*D/R_ij^3 couplings."""
    dim = PairBasis(config.atom_count).dim
    h = np.zeros((dim, dim))
    delta = foerster_defect(channel, E)
    c = pair_couplings(channel, config)
    for k in range(1, dim):
        h[0, k] = c[k - 1]
        h[k, 0] = c[k - 1]
        h[k, k] = delta
    return h


def _atom_count_from_dim(dim: int) -> int:
    n = int(round(0.5 * (1.0 + math.sqrt(max(1.0 + 8.0 * (dim - 1), 0.0)))))
    if 1 + n * (n - 1) // 2 != dim:
        raise ValueError(f"dimension {dim} is not 1 + N(N-1)/2 for any N")
    return n


def foerster_dynamics(h: np.ndarray, t_us):
    """Per-atom transition probability rho_S after evolving the all-initial
    state under exp(-2j*pi*h*t): the summed flipped-pair population divided
    by the atom count (each flipped pair hosts one final-state atom).

    Accepts a scalar time or a time grid; exact via diagonalization.
    """
    h = np.asarray(h, dtype=float)
    n_atoms = _atom_count_from_dim(h.shape[0])
    scalar = np.ndim(t_us) == 0
    t = np.atleast_1d(np.asarray(t_us, dtype=float))
    if np.any(t < 0):
        raise ValueError("time must be >= 0")
    if h.shape[0] == 1:
        out = np.zeros(t.shape)
        return float(out[0]) if scalar else out
    w, v = np.linalg.eigh(h)
    amp = v[0, :].conj()  # eigenbasis amplitudes of the initial state
    psi = (np.exp(-2j * np.pi * np.outer(t, w)) * amp) @ v.T  # (nt, dim)
    rho_s = (np.abs(psi[:, 1:]) ** 2).sum(axis=1) / n_atoms
    return float(rho_s[0]) if scalar else rho_s


def rf_dynamics(
    channel: FoersterChannel,
    config: AtomConfiguration,
    E_dc: float,
    rf: RfField | None,
    t_us: float,
    rtol: float = 1e-8,
) -> float:
    """rho_S at time t_us with the defect modulated by the rf drive:
    delta(t) = delta(E_dc) - m_rf*sin(2*pi*f_rf*t)."""
    n_atoms = config.atom_count
    if n_atoms == 1:
        return 0.0
    if rf is None or rf.defect_modulation_MHz == 0.0:
        h = build_pair_hamiltonian(channel, config, E_dc)
        return foerster_dynamics(h, t_us)
    c = pair_couplings(channel, config)
    return _rf_rho_s(c, foerster_defect(channel, E_dc), rf, t_us, n_atoms, rtol)


def _sample_rng(seed: int, index: int):
    # counter-based per-sample seeding: independent of scheduling order
    return np.random.default_rng(np.random.SeedSequence((int(seed), int(index))))


def scan_stark(
    channel: FoersterChannel,
    volume: ExcitationVolume,
    E_grid,
    t_us: float,
    n_atoms: int,
    n_samples: int = 32,
    seed: int = 0,
    rf: RfField | None = None,
) -> tuple[Trace, ResonanceStats]:
    """Disorder-averaged rho_S versus dc field, with optional rf drive.

    The same seeded configuration set is reused across the field grid
    (common random numbers), so the lineshape is smooth at small sample
    counts and fully reproducible.
    """
    grid = np.asarray(E_grid, dtype=float)
    if grid.size < 3 or not np.all(np.diff(grid) > 0):
        raise ValueError("field grid must be increasing with at least 3 points")
    if n_samples < 1:
        raise ValueError("need at least one configuration sample")
    configs = [
        sample_configuration(volume, n_atoms, _sample_rng(seed, i)) for i in range(n_samples)
    ]
    signal = np.zeros(grid.size)
    if n_atoms >= 2:
        for cfg in configs:
            c = pair_couplings(channel, cfg)
            if rf is None or rf.defect_modulation_MHz == 0.0:
                for i, e in enumerate(grid):
                    h = _star_hamiltonian(c, foerster_defect(channel, e))
                    signal[i] += foerster_dynamics(h, t_us)
            else:
                for i, e in enumerate(grid):
                    signal[i] += _rf_rho_s(c, foerster_defect(channel, e), rf, t_us, n_atoms)
        signal /= n_samples
    trace = Trace(columns=("E_Vcm", "rhoS"), data=np.column_stack([grid, signal]))
    stats = lineshape_stats(grid, signal)
    return trace, stats


def _star_hamiltonian(couplings: np.ndarray, delta: float) -> np.ndarray:
    dim = couplings.size + 1
    h = np.zeros((dim, dim))
    h[0, 1:] = couplings
    h[1:, 0] = couplings
    h[np.arange(1, dim), np.arange(1, dim)] = delta
    return h


def _rf_rho_s(couplings, delta_dc, rf: RfField, t_us, n_atoms, rtol=1e-8) -> float:
    psi, t_reached, ok = kernels.rk45_rf_pair(
        np.ascontiguousarray(couplings),
        float(delta_dc),
        float(rf.defect_modulation_MHz),
        float(rf.frequency_MHz),
        float(t_us),
        rtol,
        rtol * 1e-2,
        50_000_000,
    )
    if not ok:
        raise IntegrationError("rf pair integration failed", t_reached)
    return float((np.abs(psi[1:]) ** 2).sum() / n_atoms)


def time_dependence(
    channel: FoersterChannel,
    volume: ExcitationVolume,
    t_grid,
    E_grid,
    n_atoms: int,
    n_samples: int = 32,
    seed: int = 0,
) -> Trace:
    """Resonance amplitude and width versus interaction time, one Stark scan
    per grid time."""
    ts = np.asarray(t_grid, dtype=float)
    if np.any(ts <= 0):
        raise ValueError("interaction times must be > 0")
    rows = []
    for t_us in ts:
        _, stats = scan_stark(channel, volume, E_grid, t_us, n_atoms, n_samples, seed)
        rows.append([t_us, stats.amplitude, stats.fwhm])
    return Trace(columns=("T_us", "amplitude", "fwhm"), data=np.asarray(rows))


def floquet_crossings(
    channel: FoersterChannel, rf: RfField, m_max: int, E_range=(0.0, 3.0)
) -> list[tuple[int, float]]:
    """Fields where the dc defect matches an integer number of rf quanta:
    all real solutions of delta(E) = m*f_rf with |m| <= m_max inside
    E_range, exact from the quadratic defect."""
    if m_max < 0:
        raise ValueError("m_max must be >= 0")
    e_lo, e_hi = float(E_range[0]), float(E_range[1])
    if not (np.isfinite(e_lo) and np.isfinite(e_hi)) or e_hi <= e_lo:
        raise ValueError("E_range must be a finite increasing interval")
    s = channel.stark_coeff_MHz_per_V2cm2
    out = []
    for m in range(-m_max, m_max + 1):
        target = channel.defect_zero_field_MHz - m * rf.frequency_MHz
        if s == 0.0:
            continue
        e2 = target / s
        if e2 < 0:
            continue
        e = math.sqrt(e2)
        if e_lo <= e <= e_hi:
            out.append((m, e))
    out.sort(key=lambda me: me[1])
    return out


def generalized_bessel(m: int, x: float, y: float, k_terms: int = 80) -> float:
    """Two-argument Bessel coefficient J_m(x, y) = sum_k J_{m-2k}(x) J_k(y),
    the weight of sideband m for a phase x*sin(theta) + y*sin(2*theta)."""
    ks = np.arange(-k_terms, k_terms + 1)
    return float(np.sum(jv(m - 2 * ks, x) * jv(ks, y)))


def floquet_sideband_weights(
    channel: FoersterChannel, E_dc: float, rf: RfField, m_max: int
) -> dict[int, float]:
    """Sideband amplitudes of the modulated defect, one weight per order m.

    With a raw rf field amplitude the quadratic Stark effect modulates the
    defect at both f_rf and 2*f_rf, giving generalized Bessel weights
    J_m(x, y) with x = 2*s*E_dc*E_rf/f_rf and y = s*E_rf^2/(4*f_rf); with a
    defect-level modulation amplitude the second harmonic vanishes and the
    weights reduce to ordinary Bessel J_m(m_rf/f_rf).
    """
    f = rf.frequency_MHz
    if rf.field_amplitude_V_per_cm is not None:
        e_rf = rf.field_amplitude_V_per_cm
        s = channel.stark_coeff_MHz_per_V2cm2
        x = 2.0 * s * E_dc * e_rf / f
        y = s * e_rf * e_rf / (4.0 * f)
    else:
        x = rf.defect_modulation_MHz / f
        y = 0.0
    return {m: generalized_bessel(m, x, y) for m in range(-m_max, m_max + 1)}


def apply_detection(count_probabilities, det: DetectionModel, n_shots: int, seed: int):
    """Detected-count histogram under binomial thinning.

    count_probabilities[N] is the probability that a shot truly carries N
    atoms; each atom is independently seen with det.efficiency.  Returns an
    integer histogram over detected counts 0..N_max for n_shots draws.
    """
    p = np.asarray(count_probabilities, dtype=float)
    if p.ndim != 1 or p.size == 0 or np.any(p < 0):
        raise ValueError("count probabilities must be a nonnegative 1-d array")
    tot = p.sum()
    if tot <= 0:
        raise ValueError("count probabilities sum to zero")
    p = p / tot
    rng = np.random.default_rng(np.random.SeedSequence(int(seed)))
    true_counts = rng.choice(p.size, size=int(n_shots), p=p)
    detected = rng.binomial(true_counts, det.efficiency)
    return np.bincount(detected, minlength=p.size)


def detection_pmf(count_probabilities, efficiency: float) -> np.ndarray:
    """Exact detected-count distribution under binomial thinning (the
    analytic counterpart of apply_detection)."""
    p = np.asarray(count_probabilities, dtype=float)
    out = np.zeros_like(p)
    for n_true, pn in enumerate(p):
        if pn == 0:
            continue
        for k in range(n_true + 1):
            out[k] += pn * math.comb(n_true, k) * efficiency**k * (1 - efficiency) ** (n_true - k)
    return out
