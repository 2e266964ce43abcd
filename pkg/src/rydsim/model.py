"""Physical parameter registry and closed-form helpers.

Atomic state labels, laser/rf fields, Stark-tuned dipole-dipole channels,
van-der-Waals couplings and the three-beam closure geometry.  Everything in
this module is a pure function of frozen value types.

Units: ordinary frequencies in MHz, electric fields in V/cm, distances in
micrometers, time in microseconds.  Phases accumulate as 2*pi*f*t.
"""

import math
from dataclasses import dataclass, field

import numpy as np

ORBITALS = ("S", "P", "D", "F")


class GeometryError(ValueError):
    """Wavevector triangle cannot close."""


@dataclass(frozen=True)
class RydbergStateLabel:
    """Label nL_J(|M_J|) of a Rydberg state, e.g. 37P_3/2(|MJ|=1/2)."""

    species: str
    n: int
    L: str
    J: float
    mJ_abs: float = 0.5

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"principal quantum number must be >= 1, got {self.n}")
        if self.L not in ORBITALS:
            raise ValueError(f"orbital letter must be one of {ORBITALS}, got {self.L!r}")
        l_num = ORBITALS.index(self.L)
        if self.J <= 0 or abs(abs(self.J - l_num) - 0.5) > 1e-12:
            raise ValueError(f"J must be L +/- 1/2 and positive, got L={self.L}, J={self.J}")
        if self.mJ_abs < 0 or self.mJ_abs > self.J:
            raise ValueError(f"|M_J| must lie in [0, J], got {self.mJ_abs}")

    def __str__(self):
        return f"{self.species}({self.n}{self.L}_{self.J})"


@dataclass(frozen=True)
class LaserField:
    """One excitation step: wavelength, detuning, Rabi frequency and the
    pure-dephasing linewidth contributed by the laser."""

    wavelength_nm: float
    detuning_MHz: float = 0.0
    rabi_MHz: float = 0.0
    linewidth_MHz: float = 0.0

    def __post_init__(self):
        if self.wavelength_nm <= 0:
            raise ValueError(f"wavelength_nm must be > 0, got {self.wavelength_nm}")
        if self.rabi_MHz < 0:
            raise ValueError(f"rabi_MHz must be >= 0, got {self.rabi_MHz}")
        if self.linewidth_MHz < 0:
            raise ValueError(f"linewidth_MHz must be >= 0, got {self.linewidth_MHz}")


@dataclass(frozen=True)
class RfField:
    """Radio-frequency drive, parameterized by the peak modulation of the
    energy defect it produces (the plate-voltage to field conversion is
    apparatus specific, so the raw amplitude is optional metadata)."""

    frequency_MHz: float
    defect_modulation_MHz: float = 0.0
    field_amplitude_V_per_cm: float | None = None

    def __post_init__(self):
        if self.frequency_MHz <= 0:
            raise ValueError(f"frequency_MHz must be > 0, got {self.frequency_MHz}")
        if self.defect_modulation_MHz < 0:
            raise ValueError(
                f"defect_modulation_MHz must be >= 0, got {self.defect_modulation_MHz}"
            )


@dataclass(frozen=True)
class FoersterChannel:
    """Two-channel dipole-dipole resonance with a quadratic Stark defect.

    defect(E) = defect_zero_field_MHz - stark_coeff * E**2, and the pair
    coupling is dd_coeff / R**3.
    """

    initial_pair: tuple
    final_pair: tuple
    defect_zero_field_MHz: float
    stark_coeff_MHz_per_V2cm2: float
    dd_coeff_MHz_um3: float

    def __post_init__(self):
        if self.dd_coeff_MHz_um3 <= 0:
            raise ValueError(f"dd_coeff_MHz_um3 must be > 0, got {self.dd_coeff_MHz_um3}")


@dataclass(frozen=True)
class BeamGeometry:
    """Three beams: wavelengths and unit wavevector directions."""

    wavelengths_nm: tuple
    unit_wavevectors: tuple

    def __post_init__(self):
        if len(self.wavelengths_nm) != 3 or len(self.unit_wavevectors) != 3:
            raise ValueError("BeamGeometry needs exactly three beams")
        for lam in self.wavelengths_nm:
            if lam <= 0:
                raise ValueError(f"wavelengths must be > 0, got {lam}")
        for k in self.unit_wavevectors:
            norm = math.sqrt(sum(c * c for c in k))
            if abs(norm - 1.0) > 1e-12:
                raise ValueError(f"unit wavevector has norm {norm}, expected 1")

    def wavevectors_inv_nm(self) -> np.ndarray:
        """The three wavevectors k_i = khat_i / lambda_i, in 1/nm."""
        ks = np.asarray(self.unit_wavevectors, dtype=float)
        return ks / np.asarray(self.wavelengths_nm, dtype=float)[:, None]

    def closure_residual(self) -> float:
        """|k1 + k2 + k3| relative to the largest |k_i| (reported, never
        silently assumed zero)."""
        ks = self.wavevectors_inv_nm()
        return float(np.linalg.norm(ks.sum(axis=0)) / np.abs(1.0 / np.asarray(self.wavelengths_nm)).max())


@dataclass(frozen=True)
class DetectionModel:
    """Selective-field-ionization detection with finite efficiency."""

    efficiency: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.efficiency <= 1.0:
            raise ValueError(f"efficiency must lie in [0, 1], got {self.efficiency}")


# Default channels.  Zero-field defects are quantum-defect-theory estimates
# from standard Rb quantum defects (literature values, not fit parameters);
# the Stark coefficients are calibrated below so the resonances land at the
# measured fields.  dd_coeff is a representative n~37 scale.
RB37P_STATES = (
    RydbergStateLabel("Rb", 37, "P", 1.5, 0.5),
    RydbergStateLabel("Rb", 37, "S", 0.5, 0.5),
    RydbergStateLabel("Rb", 38, "S", 0.5, 0.5),
)
RB39P_STATES = (
    RydbergStateLabel("Rb", 39, "P", 1.5, 0.5),
    RydbergStateLabel("Rb", 39, "S", 0.5, 0.5),
    RydbergStateLabel("Rb", 40, "S", 0.5, 0.5),
)
DEFAULT_DEFECT_37P_MHZ = 103.1
DEFAULT_DEFECT_39P_MHZ = -74.3
DEFAULT_DD_COEFF_MHZ_UM3 = 1000.0


def foerster_defect(channel: FoersterChannel, E: float) -> float:
    """Energy defect delta(E) = delta0 - s*E**2 at dc field E (V/cm)."""
    if E < 0:
        raise ValueError(f"field must be >= 0, got {E}")
    return channel.defect_zero_field_MHz - channel.stark_coeff_MHz_per_V2cm2 * E * E


def calibrate_channel(
    defect_zero_field_MHz: float,
    E_res: float,
    resonant_defect_MHz: float = 0.0,
    dd_coeff_MHz_um3: float = DEFAULT_DD_COEFF_MHZ_UM3,
    initial_pair: tuple = (),
    final_pair: tuple = (),
) -> FoersterChannel:
    """Fix the quadratic Stark coefficient so that the defect equals
    resonant_defect_MHz exactly at the field E_res.

    With the default resonant_defect_MHz=0 this pins the main resonance at
    E_res; a nonzero target pins an rf crossing instead.
    """
    if E_res <= 0:
        raise ValueError(f"calibration is degenerate at E_res={E_res}; need E_res > 0")
    s = (defect_zero_field_MHz - resonant_defect_MHz) / (E_res * E_res)
    return FoersterChannel(
        initial_pair=initial_pair,
        final_pair=final_pair,
        defect_zero_field_MHz=defect_zero_field_MHz,
        stark_coeff_MHz_per_V2cm2=s,
        dd_coeff_MHz_um3=dd_coeff_MHz_um3,
    )


def default_37p_channel(
    defect_zero_field_MHz: float = DEFAULT_DEFECT_37P_MHZ,
    E_res: float = 1.79,
    dd_coeff_MHz_um3: float = DEFAULT_DD_COEFF_MHZ_UM3,
) -> FoersterChannel:
    """Rb(37P+37P -> 37S+38S) channel, main resonance pinned at 1.79 V/cm."""
    return calibrate_channel(
        defect_zero_field_MHz,
        E_res,
        dd_coeff_MHz_um3=dd_coeff_MHz_um3,
        initial_pair=(RB37P_STATES[0], RB37P_STATES[0]),
        final_pair=(RB37P_STATES[1], RB37P_STATES[2]),
    )


def default_39p_channel(
    defect_zero_field_MHz: float = DEFAULT_DEFECT_39P_MHZ,
    E_first_order: float = 0.66,
    f_rf_MHz: float = 95.0,
    dd_coeff_MHz_um3: float = DEFAULT_DD_COEFF_MHZ_UM3,
) -> FoersterChannel:
    """Rb(39P+39P -> 39S+40S) channel.  The dc field alone cannot zero this
    defect; calibration pins the first-order rf crossing delta = -f_rf at
    E_first_order instead."""
    return calibrate_channel(
        defect_zero_field_MHz,
        E_first_order,
        resonant_defect_MHz=-f_rf_MHz,
        dd_coeff_MHz_um3=dd_coeff_MHz_um3,
        initial_pair=(RB39P_STATES[0], RB39P_STATES[0]),
        final_pair=(RB39P_STATES[1], RB39P_STATES[2]),
    )


def dd_coupling(channel: FoersterChannel, R: float) -> float:
    """Dipole-dipole matrix element D / R**3 (MHz) at distance R (um)."""
    if R <= 0:
        raise ValueError(f"distance must be > 0, got {R}")
    return channel.dd_coeff_MHz_um3 / R**3


def vdw_shift(C6: float, R: float) -> float:
    """Van-der-Waals level shift C6 / R**6 (MHz) at distance R (um)."""
    if R <= 0:
        raise ValueError(f"distance must be > 0, got {R}")
    return C6 / R**6


def blockade_radius(C6: float, rabi: float, N: int = 1) -> float:
    """Radius where the van-der-Waals shift equals the collective Rabi
    frequency rabi*sqrt(N): R = (C6 / (rabi*sqrt(N)))**(1/6)."""
    if rabi <= 0:
        raise ValueError(f"rabi must be > 0, got {rabi}")
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    return (C6 / (rabi * math.sqrt(N))) ** (1.0 / 6.0)


def beam_angles(wavelengths_nm) -> tuple:
    """Pairwise beam angles and a closed planar geometry for three beams.

    The wavenumbers 1/lambda_i must satisfy the triangle inequality so the
    wavevector sum can vanish.  Returns (angles, BeamGeometry) with angles =
    (theta_12, theta_23, theta_31) in radians, and the geometry's closure
    residual below 1e-12.
    """
    lam = [float(w) for w in wavelengths_nm]
    if len(lam) != 3:
        raise ValueError("need exactly three wavelengths")
    k = [1.0 / w for w in lam]
    for i in range(3):
        if k[i] > k[(i + 1) % 3] + k[(i + 2) % 3] + 1e-15 * max(k):
            raise GeometryError(
                f"wavenumber triangle cannot close for wavelengths {tuple(lam)} nm"
            )

    def _angle(ka, kb, kc):
        # |kc|^2 = |ka|^2 + |kb|^2 + 2 ka.kb cos(theta_ab) under closure
        c = (kc * kc - ka * ka - kb * kb) / (2.0 * ka * kb)
        return math.acos(min(1.0, max(-1.0, c)))

    th12 = _angle(k[0], k[1], k[2])
    th23 = _angle(k[1], k[2], k[0])
    th31 = _angle(k[2], k[0], k[1])

    # planar construction: beam 1 along +x, beam 2 rotated by theta_12,
    # beam 3 fixed by closure
    k1 = np.array([k[0], 0.0, 0.0])
    k2 = k[1] * np.array([math.cos(th12), math.sin(th12), 0.0])
    k3 = -(k1 + k2)
    units = tuple(tuple(v / np.linalg.norm(v)) for v in (k1, k2, k3))
    geom = BeamGeometry(wavelengths_nm=tuple(lam), unit_wavevectors=units)
    residual = geom.closure_residual()
    if residual > 1e-12:
        raise GeometryError(f"closure residual {residual} exceeds 1e-12")
    return (th12, th23, th31), geom


def collinear_geometry(wavelengths_nm) -> BeamGeometry:
    """All three beams along +x: the deliberately non-closed control case."""
    lam = tuple(float(w) for w in wavelengths_nm)
    unit = ((1.0, 0.0, 0.0),) * 3
    return BeamGeometry(wavelengths_nm=lam, unit_wavevectors=unit)
