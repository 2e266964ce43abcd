import math
import warnings

import numpy as np
import pytest

from rydsim import blockade, kernels
from rydsim.blockade import (
    ChirpPulse,
    CollectiveBasis,
    EnsembleSample,
    StirapPulses,
    build_blockade_hamiltonian,
    chirped_excitation,
    ensemble_average,
    excitation_dynamics,
    jc_reference,
    revival_contrast,
    revival_time_us,
    sample_ensemble,
    stirap_transfer,
)
from rydsim.traces import Trace


def fixed_sample(positions):
    return EnsembleSample(np.asarray(positions, dtype=float), 5.0, 0)


def test_basis_dimension():
    assert CollectiveBasis(7, 2).dim == 1 + 7 + 21
    assert CollectiveBasis(7, 1).dim == 8
    with pytest.raises(ValueError):
        CollectiveBasis(3, 3)


def test_sample_ensemble_reproducible_and_bounded():
    a = sample_ensemble(7.0, 2.0, seed=42)
    b = sample_ensemble(7.0, 2.0, seed=42)
    np.testing.assert_array_equal(a.positions, b.positions)
    assert np.linalg.norm(a.positions, axis=1).max() <= 2.0


def test_sample_ensemble_poisson_statistics():
    counts = [sample_ensemble(7.0, 2.0, seed=s).atom_count for s in range(4000)]
    mean = np.mean(counts)
    var = np.var(counts)
    sigma = math.sqrt(7.0 / len(counts))
    assert abs(mean - 7.0) < 3.0 * sigma
    assert abs(var - mean) < 0.25  # Poisson: variance tracks the mean


def test_single_atom_is_two_level():
    s = fixed_sample([[0.0, 0.0, 0.0]])
    h, basis = build_blockade_hamiltonian(s, 1.0, 0.0, 1e6)
    assert h.shape == (2, 2)
    tr = excitation_dynamics(h, basis, np.linspace(0, 1, 101))
    np.testing.assert_allclose(
        tr.column("P1"), np.sin(np.pi * np.linspace(0, 1, 101)) ** 2, atol=1e-9
    )


def test_two_atom_matrix_against_hand_diagonalization():
    r = 6.0
    c6 = 3.2e6
    s = fixed_sample([[0.0, 0.0, 0.0], [r, 0.0, 0.0]])
    h, basis = build_blockade_hamiltonian(s, 1.4, 0.3, c6)
    v = c6 / r**6
    hand = np.array(
        [
            [0.0, 0.7, 0.7, 0.0],
            [0.7, 0.3, 0.0, 0.7],
            [0.7, 0.0, 0.3, 0.7],
            [0.0, 0.7, 0.7, 0.6 + v],
        ]
    )
    np.testing.assert_allclose(h, hand, rtol=1e-12)
    np.testing.assert_allclose(np.linalg.eigvalsh(h), np.linalg.eigvalsh(hand), rtol=1e-12)


def test_full_blockade_collective_oscillation():
    # keep |H| sane: eigensolver accuracy is absolute in the matrix norm, so
    # the blockade limit is probed with large-but-finite shifts and spacings
    # above a micron
    from itertools import product

    rng = np.random.default_rng(0)
    cells = np.array(list(product((0.0, 2.0), repeat=3)))
    for n in (2, 4, 7):
        pos = cells[:n] + rng.uniform(-0.2, 0.2, size=(n, 3))  # compact cluster
        s = fixed_sample(pos)
        h, basis = build_blockade_hamiltonian(s, 1.0, 0.0, 1e9)
        t = np.linspace(0.0, 2.0, 801)
        tr = excitation_dynamics(h, basis, t)
        np.testing.assert_allclose(
            tr.column("P1"), np.sin(np.pi * math.sqrt(n) * t) ** 2, atol=1e-5
        )
        assert tr.column("P2").max() < 1e-10  # blockade limit


def test_enforced_blockade_truncation_is_exact_two_level():
    # k_max=1 removes the double shell outright: exact sqrt(N) oscillation
    s = fixed_sample(np.random.default_rng(2).uniform(-1, 1, size=(5, 3)))
    h, basis = build_blockade_hamiltonian(s, 1.0, 0.0, 0.0, k_max=1)
    t = np.linspace(0.0, 3.0, 400)
    tr = excitation_dynamics(h, basis, t)
    np.testing.assert_allclose(
        tr.column("P1"), np.sin(np.pi * math.sqrt(5) * t) ** 2, atol=1e-12
    )


def test_shell_populations_sum_to_one():
    s = fixed_sample(np.random.default_rng(4).uniform(-4, 4, size=(5, 3)))
    h, basis = build_blockade_hamiltonian(s, 2.0, 1.0, 1e4)
    tr = excitation_dynamics(h, basis, np.linspace(0, 5, 200))
    total = tr.column("P0") + tr.column("P1") + tr.column("P2")
    np.testing.assert_allclose(total, 1.0, atol=1e-8)


def test_t_zero_ground_state():
    s = fixed_sample([[0, 0, 0], [3, 0, 0]])
    h, basis = build_blockade_hamiltonian(s, 1.0, 0.0, 1e6)
    tr = excitation_dynamics(h, basis, np.array([0.0]))
    assert tr.column("P0")[0] == pytest.approx(1.0)


def test_jc_reference_features():
    t = np.linspace(0.0, 10.0, 400)
    p1 = jc_reference(7.0, 1.2, t)
    assert p1[0] == 0.0
    assert p1.max() <= 1.0
    # single-term limit: a tiny-variance substitute is a pure oscillation
    t2 = np.linspace(0.0, 3.0, 300)
    near_det = jc_reference(1e-6, 1.0, t2)  # only N=1 survives the tail cut
    np.testing.assert_allclose(
        near_det / max(near_det.max(), 1e-300),
        np.sin(np.pi * 1.0 * t2) ** 2 / max(np.sin(np.pi * t2).max() ** 2, 1e-300),
        atol=1e-6,
    )


def test_jc_matches_enforced_blockade_fixed_n():
    # exact oracle: with C6 -> inf and the atom number pinned, the ensemble
    # trace equals the single sin^2 term
    n = 6
    s = fixed_sample(np.random.default_rng(1).uniform(-1, 1, size=(n, 3)))
    h, basis = build_blockade_hamiltonian(s, 1.0, 0.0, 1e12)
    t = np.linspace(0.0, 8.0, 900)
    tr = excitation_dynamics(h, basis, t)
    np.testing.assert_allclose(
        tr.column("P1"), np.sin(np.pi * math.sqrt(n) * t) ** 2, atol=1e-6
    )


def test_revival_contrast_trivials():
    om1, nbar = 1.2, 7.0
    t = np.linspace(0.0, 10.0, 1200)
    fn = om1 * math.sqrt(nbar)
    pure = np.sin(np.pi * fn * t) ** 2
    tr = Trace(("t_us", "P0", "P1", "P2"), np.column_stack([t, 1 - pure, pure, 0 * t]))
    assert revival_contrast(tr, om1, nbar) == pytest.approx(1.0, abs=0.05)
    flat = Trace(("t_us", "P0", "P1", "P2"), np.column_stack([t, 0.6 + 0 * t, 0.4 + 0 * t, 0 * t]))
    assert revival_contrast(flat, om1, nbar) == 0.0
    short = Trace(("t_us", "P0", "P1", "P2"), np.column_stack([t[:100], 0 * t[:100], pure[:100], 0 * t[:100]]))
    with pytest.raises(ValueError, match="before the revival window"):
        revival_contrast(short, om1, nbar)


def test_jc_trace_beats_washed_out_ensemble():
    om1, nbar = 1.2094863136295272, 7.0
    t = np.linspace(0.0, 10.0, 601)
    jc = jc_reference(nbar, om1, t)
    jtr = Trace(("t_us", "P0", "P1", "P2"), np.column_stack([t, 1 - jc, jc, 0 * t]))
    c_jc = revival_contrast(jtr, om1, nbar)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        washed = ensemble_average(
            nbar, 5.0, om1, 3.2e6, t, n_samples=150, seed=3, distribution="gaussian"
        )
    c_washed = revival_contrast(washed, om1, nbar)
    assert c_jc > 0.2
    assert c_washed < c_jc / 3.0


def test_ensemble_average_deterministic():
    t = np.linspace(0.0, 2.0, 51)
    a = ensemble_average(3.0, 2.0, 1.0, 3.2e6, t, n_samples=20, seed=9)
    b = ensemble_average(3.0, 2.0, 1.0, 3.2e6, t, n_samples=20, seed=9)
    np.testing.assert_array_equal(a.data, b.data)


def test_ensemble_average_warns_on_truncation_breakdown():
    t = np.linspace(0.0, 2.0, 51)
    with pytest.warns(RuntimeWarning, match="two-excitation truncation"):
        ensemble_average(6.0, 9.0, 1.2, 1e3, t, n_samples=30, seed=2, distribution="gaussian")


def test_chirp_matches_landau_zener():
    for om, rate in ((1.0, 6.0), (0.7, 1.5)):
        d0 = 200.0 * om
        chirp = ChirpPulse(om, -d0, d0, 2 * d0 / rate)
        p = chirped_excitation(1, om, chirp)
        assert p == pytest.approx(1.0 - math.exp(-math.pi**2 * om**2 / rate), abs=0.01)


def test_chirp_limits_and_validation():
    chirp = ChirpPulse(1.0, -40.0, 40.0, 0.002)
    assert chirped_excitation(1, 1.0, chirp) < 1e-3  # sudden sweep
    with pytest.raises(ValueError, match="cross zero"):
        chirped_excitation(1, 1.0, ChirpPulse(1.0, 5.0, 40.0, 1.0))
    # rabi defaults to the pulse's own when not supplied
    slow = ChirpPulse(1.0, -30.0, 30.0, 120.0)
    assert chirped_excitation(4, None, slow) == pytest.approx(
        chirped_excitation(4, 1.0, slow), abs=1e-12
    )


def test_chirp_collective_speedup():
    # fixed marginal pulse transfers better for larger N (Omega sqrt(N))
    chirp = ChirpPulse(1.0, -50.0, 50.0, 10.0)  # rate 10: marginal for N=1
    p1 = chirped_excitation(1, 1.0, chirp)
    p9 = chirped_excitation(9, 1.0, chirp)
    assert p9 > p1


def test_stirap_counter_intuitive_beats_intuitive():
    counter = StirapPulses(20.0, 6.0, 1.0, 20.0, 4.8, 1.0)
    swapped = StirapPulses(20.0, 4.8, 1.0, 20.0, 6.0, 1.0)
    eff_c = stirap_transfer(counter)
    eff_i = stirap_transfer(swapped)
    assert eff_c > 0.99
    assert eff_i < eff_c


def test_stirap_zero_pump_transfers_nothing():
    pulses = StirapPulses(0.0, 6.0, 1.0, 20.0, 4.8, 1.0)
    assert stirap_transfer(pulses) == pytest.approx(0.0, abs=1e-12)


def test_stirap_against_fine_step_oracle():
    # independent check: fixed-step RK4 at ten times finer resolution
    pulses = StirapPulses(15.0, 6.5, 1.2, 15.0, 4.6, 1.2, intermediate_detuning_MHz=3.0)
    eff = stirap_transfer(pulses, rtol=1e-10)
    window = pulses.window_us()
    steps = int(window * 15.0 * 2 * np.pi * 10 * 10)  # ~100 steps per drive radian
    psi = kernels.rk4_stirap_fixed(15.0, 6.5, 1.2, 15.0, 4.6, 1.2, 3.0, window, steps)
    assert eff == pytest.approx(abs(psi[2]) ** 2, abs=1e-7)
