"""Resonant dipole-dipole coupling between two J=1/2 -> J'=1/2 emitters.

The quantization axis is the chain axis (z). Couplings are scaled so that
the transverse spin-flip channel reproduces the far-field pair shift
``delta(r) = -(3/8) A_flip cos(kr) / kr`` with ``A_flip = (2/3) A0``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .constants import (
    SPIN_FLIP_FRACTION,
    SR_NATURAL_LINEWIDTH_MHZ,
    SR_OBSERVED_LINEWIDTH_MHZ,
    SR_OSCILLATOR_STRENGTH_MHZ,
    SR_WAVELENGTH_UM,
)
from .errors import DomainError, SingularityError

CHAIN_AXIS = np.array([0.0, 0.0, 1.0])


@dataclass(frozen=True)
class Transition:
    """Optical transition constants (um, MHz)."""

    wavelength: float = SR_WAVELENGTH_UM
    oscillator_strength_total: float = SR_OSCILLATOR_STRENGTH_MHZ
    natural_linewidth: float = SR_NATURAL_LINEWIDTH_MHZ
    effective_linewidth: float = SR_OBSERVED_LINEWIDTH_MHZ

    def __post_init__(self):
        for name in ("wavelength", "oscillator_strength_total", "natural_linewidth", "effective_linewidth"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be > 0, got {getattr(self, name)}")
        if self.effective_linewidth < self.natural_linewidth:
            raise DomainError("effective_linewidth must be >= natural_linewidth")

    @property
    def wavenumber(self) -> float:
        """k = 2 pi / lambda in rad/um."""
        return 2.0 * np.pi / self.wavelength

    @property
    def spin_flip_strength(self) -> float:
        return SPIN_FLIP_FRACTION * self.oscillator_strength_total

    @property
    def pair_amplitude(self) -> float:
        """(3/8) A_flip, the far-field prefactor in MHz."""
        return 0.375 * self.spin_flip_strength

    def with_oscillator_strength(self, a0: float) -> "Transition":
        return Transition(self.wavelength, a0, self.natural_linewidth, self.effective_linewidth)


@dataclass(frozen=True)
class PairGeometry:
    separation: float  # um
    axis_unit_vector: np.ndarray = CHAIN_AXIS

    def __post_init__(self):
        if not self.separation > 0:
            raise SingularityError(f"separation must be > 0, got {self.separation}")
        v = np.asarray(self.axis_unit_vector, dtype=float)
        if abs(np.linalg.norm(v) - 1.0) > 1e-12:
            raise DomainError("axis_unit_vector must have unit norm")
        object.__setattr__(self, "axis_unit_vector", v)


@dataclass(frozen=True)
class DipolePair:
    """Unit polarization vectors of the two transition dipoles."""

    dipole_a: np.ndarray
    dipole_b: np.ndarray

    def __post_init__(self):
        for name in ("dipole_a", "dipole_b"):
            v = np.asarray(getattr(self, name), dtype=complex)
            if v.shape != (3,) or abs(np.linalg.norm(v) - 1.0) > 1e-12:
                raise DomainError(f"{name} must be a unit-norm complex 3-vector")
            object.__setattr__(self, name, v)


class Polarization(enum.Enum):
    PerpendicularToAxis = "perp"
    ParallelToAxis = "par"

    @property
    def field_vector(self) -> np.ndarray:
        if self is Polarization.PerpendicularToAxis:
            return np.array([1.0, 0.0, 0.0])
        return CHAIN_AXIS.copy()

    @classmethod
    def parse(cls, text: str) -> "Polarization":
        t = str(text).strip().lower()
        for p in cls:
            if t in (p.value, p.name.lower()):
                return p
        raise DomainError(f"unknown polarization {text!r}; expected 'perp' or 'par'")


def _tensor_bracket(d_a, d_b, rhat, kr, near_field=True):
    """Dimensionless bracket of the dipole-dipole tensor (no complex conjugation)."""
    dd = np.dot(d_a, d_b)
    ra = np.dot(rhat, d_a)
    rb = np.dot(rhat, d_b)
    value = -(dd - ra * rb) * np.cos(kr) / kr
    if near_field:
        value = value + (dd - 3.0 * ra * rb) * (np.sin(kr) / kr**2 + np.cos(kr) / kr**3)
    return value


def coupling_strength(pair: DipolePair, geom: PairGeometry, transition: Transition,
                      near_field: bool = True) -> complex:
    """Exchange coupling in MHz between unit dipoles `pair` at geometry `geom`.

    All three distance terms (1/kr, 1/(kr)^2, 1/(kr)^3) are included unless
    `near_field` is False. The prefactor is (3/8) A_flip, so two transverse
    circular dipoles along the axis give exactly the far-field pair shift.
    """
    kr = transition.wavenumber * geom.separation
    value = transition.pair_amplitude * _tensor_bracket(
        pair.dipole_a, pair.dipole_b, geom.axis_unit_vector, kr, near_field
    )
    return complex(value)


def far_field_shift(separation, transition: Transition):
    """Far-field pair shift delta(r) = -(3/8)(2/3) A0 cos(kr)/kr in MHz.

    Accepts scalars or arrays of separations (um).
    """
    r = np.asarray(separation, dtype=float)
    if np.any(r <= 0):
        raise DomainError("separation must be > 0")
    kr = transition.wavenumber * r
    out = -transition.pair_amplitude * np.cos(kr) / kr
    return float(out) if out.ndim == 0 else out


def shift_envelope(separation, transition: Transition):
    """|delta|max at separation r: (3/8)(2/3) A0 / kr."""
    return transition.pair_amplitude / (transition.wavenumber * np.asarray(separation, dtype=float))


# ---------------------------------------------------------------------------
# two-ion singly-excited manifold

UP, DOWN = 0, 1
_SPIN_LABEL = {UP: "u", DOWN: "d"}
_S2 = np.sqrt(2.0)


def _emission_dipoles():
    """<g m'| d |e m> as Cartesian vectors, CG-weighted, indexed [m_e][m_g]."""
    pi_amp = 1.0 / np.sqrt(3.0)
    sigma_amp = np.sqrt(2.0 / 3.0)
    d = np.zeros((2, 2, 3), dtype=complex)
    d[UP, UP] = [0.0, 0.0, pi_amp]
    d[DOWN, DOWN] = [0.0, 0.0, -pi_amp]
    d[UP, DOWN] = sigma_amp * np.array([1.0, 1.0j, 0.0]) / _S2
    d[DOWN, UP] = sigma_amp * np.array([1.0, -1.0j, 0.0]) / _S2
    return d


EMISSION_DIPOLES = _emission_dipoles()


def absorption_dipole(m_g: int, m_e: int) -> np.ndarray:
    """<e m_e| d |g m_g>."""
    return EMISSION_DIPOLES[m_e, m_g].conj()


def manifold_basis() -> list[tuple[int, int, int]]:
    """Basis (excited_ion, spin_a, spin_b) for the 8 singly-excited states.

    Order: |e s_a, g s_b> for (s_a, s_b) in uu, ud, du, dd, then |g s_a, e s_b>.
    """
    return [(ion, sa, sb) for ion in (0, 1) for sa in (UP, DOWN) for sb in (UP, DOWN)]


def basis_labels() -> list[str]:
    labels = []
    for ion, sa, sb in manifold_basis():
        a = ("e" if ion == 0 else "g") + _SPIN_LABEL[sa]
        b = ("g" if ion == 0 else "e") + _SPIN_LABEL[sb]
        labels.append(f"{a}{b}")
    return labels


def manifold_matrix(separation: float, transition: Transition, include_near_field: bool = False) -> np.ndarray:
    """8x8 exchange-coupling matrix (MHz) of the two-ion singly-excited block.

    Each element moves the excitation from one ion to the other: the
    excited ion decays via its emission dipole while the other is excited
    via its absorption dipole.
    """
    if not separation > 0:
        raise SingularityError(f"separation must be > 0, got {separation}")
    kr = transition.wavenumber * separation
    # normalized so a pair of sigma dipoles (weight 2/3 each) gives (3/8) A_flip
    scale = transition.pair_amplitude / SPIN_FLIP_FRACTION
    basis = manifold_basis()
    h = np.zeros((8, 8), dtype=complex)
    for i, (ion_i, sa_i, sb_i) in enumerate(basis):
        for j, (ion_j, sa_j, sb_j) in enumerate(basis):
            if ion_i == ion_j:
                continue
            if ion_i == 0:
                # a: e sa_i -> g sa_j ; b: g sb_i -> e sb_j
                d_a = EMISSION_DIPOLES[sa_i, sa_j]
                d_b = absorption_dipole(sb_i, sb_j)
            else:
                d_b = EMISSION_DIPOLES[sb_i, sb_j]
                d_a = absorption_dipole(sa_i, sa_j)
            h[j, i] = scale * _tensor_bracket(d_a, d_b, CHAIN_AXIS, kr, include_near_field)
    return h


@dataclass(frozen=True)
class ManifoldSpectrum:
    separation: float
    matrix: np.ndarray
    eigenvalues: np.ndarray  # ascending, MHz
    eigenvectors: np.ndarray  # columns
    labels: tuple


def two_ion_manifold(separation: float, transition: Transition, include_near_field: bool = False) -> ManifoldSpectrum:
    """Diagonalize the 8-state singly-excited block of two ions."""
    h = manifold_matrix(separation, transition, include_near_field)
    w, v = np.linalg.eigh(h)
    return ManifoldSpectrum(separation, h, w, v, tuple(basis_labels()))


def probe_operator(pol: Polarization) -> np.ndarray:
    """Weak-probe excitation amplitudes, shape (8 excited, 4 ground).

    Ground states are ordered uu, ud, du, dd (ion a spin first). Both ions
    see the same probe phase.
    """
    eps = pol.field_vector
    basis = manifold_basis()
    grounds = [(sa, sb) for sa in (UP, DOWN) for sb in (UP, DOWN)]
    d = np.zeros((8, 4), dtype=complex)
    for g, (ga, gb) in enumerate(grounds):
        for i, (ion, sa, sb) in enumerate(basis):
            if ion == 0 and sb == gb:
                d[i, g] += np.dot(eps, absorption_dipole(ga, sa))
            elif ion == 1 and sa == ga:
                d[i, g] += np.dot(eps, absorption_dipole(gb, sb))
    return d


def transition_shifts(spectrum: ManifoldSpectrum, pol: Polarization) -> tuple[np.ndarray, np.ndarray]:
    """Line shift and strength of the probe transition from each ground state.

    The shift from ground state g is the eigenvalue average weighted by
    the overlap of the probe-excited state with each eigenvector.

    Returns
    -------
    shifts : ndarray, shape (4,)
        Shift in MHz per ground state (nan where the probe does not couple).
    strengths : ndarray, shape (4,)
        Squared excitation amplitude per ground state.
    """
    d = probe_operator(pol)
    overlaps = np.abs(spectrum.eigenvectors.conj().T @ d) ** 2  # (8 modes, 4 grounds)
    strengths = overlaps.sum(axis=0)
    with np.errstate(invalid="ignore", divide="ignore"):
        shifts = (spectrum.eigenvalues @ overlaps) / strengths
    shifts[strengths < 1e-14] = np.nan
    return shifts, strengths


def observed_pair_shift(spectrum: ManifoldSpectrum, pol: Polarization) -> float:
    """Strength-weighted mean shift of the probe transitions (MHz)."""
    shifts, strengths = transition_shifts(spectrum, pol)
    ok = strengths > 1e-14
    return float(np.sum(shifts[ok] * strengths[ok]) / np.sum(strengths[ok]))


def polarization_factor(pol: Polarization) -> float:
    """Fraction of the collective shift seen on the line center for `pol`."""
    return 0.5 if pol is Polarization.PerpendicularToAxis else 0.0
