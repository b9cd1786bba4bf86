"""Collective line shift of an M-ion chain in the symmetric single excitation."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .chain import IonChain, TrapConfig, axial_frequency_for_scale, equilibrium_positions, length_scale
from .dipole import Polarization, Transition, far_field_shift, polarization_factor
from .errors import DomainError

# draws per independently seeded chunk of the thermal Monte Carlo
CHUNK_DRAWS = 4096


@dataclass(frozen=True)
class ExcitationAmplitudes:
    amplitudes: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.amplitudes, dtype=complex)
        if abs(np.vdot(c, c).real - 1.0) > 1e-12:
            raise DomainError("excitation amplitudes must have unit norm")
        object.__setattr__(self, "amplitudes", c)

    @classmethod
    def symmetric(cls, m: int) -> "ExcitationAmplitudes":
        return cls(np.full(m, 1.0 / np.sqrt(m)))


@dataclass(frozen=True)
class ThermalModel:
    position_stddev_per_ion: np.ndarray  # um
    sample_count: int = 20000

    def __post_init__(self):
        s = np.atleast_1d(np.asarray(self.position_stddev_per_ion, dtype=float))
        if np.any(s < 0):
            raise DomainError("position standard deviations must be >= 0")
        if int(self.sample_count) != self.sample_count or self.sample_count < 1:
            raise DomainError("sample_count must be an integer >= 1")
        object.__setattr__(self, "position_stddev_per_ion", s)

    @classmethod
    def common(cls, sigma_um: float, ion_count: int, sample_count: int = 20000) -> "ThermalModel":
        return cls(np.full(ion_count, float(sigma_um)), sample_count)

    def sigmas_for(self, m: int) -> np.ndarray:
        s = self.position_stddev_per_ion
        if s.size == 1:
            return np.full(m, s[0])
        if s.size != m:
            raise DomainError(f"thermal model has {s.size} widths for a {m}-ion chain")
        return s


@dataclass(frozen=True)
class ShiftCurve:
    spacings: np.ndarray  # um, inner-pair distance
    predicted_shift: np.ndarray  # kHz, observable
    smeared_shift: np.ndarray | None = None  # kHz
    smeared_stderr: np.ndarray | None = None  # kHz
    axial_frequencies: np.ndarray | None = None  # MHz

    def __post_init__(self):
        if len(self.spacings) != len(self.predicted_shift):
            raise DomainError("spacings and predicted_shift differ in length")
        if np.any(np.diff(self.spacings) <= 0):
            raise DomainError("spacings must be strictly increasing")


def _require_pairs(positions):
    if len(positions) < 2:
        raise DomainError("collective shift needs at least 2 ions")


def pair_shift_sum(positions, transition: Transition) -> float:
    """delta_M = (1/M) sum_{m != n} delta(|r_m - r_n|) in MHz, no polarization factor."""
    pos = np.asarray(positions, dtype=float)
    _require_pairs(pos)
    return float(_kernels.collective_sums(pos[None, :], transition.wavenumber, transition.pair_amplitude)[0])


def collective_shift(chain: IonChain, transition: Transition, pol: Polarization) -> float:
    """Observable line-center shift of `chain` in MHz."""
    return polarization_factor(pol) * pair_shift_sum(chain.positions, transition)


def coupling_matrix(positions, transition: Transition) -> np.ndarray:
    """J_mn = delta(|r_m - r_n|), zero diagonal (MHz)."""
    pos = np.asarray(positions, dtype=float)
    m = len(pos)
    j = np.zeros((m, m))
    iu = np.triu_indices(m, 1)
    j[iu] = far_field_shift(np.abs(pos[iu[0]] - pos[iu[1]]), transition)
    return j + j.T


@dataclass(frozen=True)
class EigenmodeSpectrum:
    eigenvalues: np.ndarray  # MHz
    modes: np.ndarray  # columns
    symmetric_weights: np.ndarray  # |<mode|psi_sym>|^2

    @property
    def weighted_shift(self) -> float:
        return float(self.eigenvalues @ self.symmetric_weights)


def eigenmode_spectrum(chain: IonChain, transition: Transition) -> EigenmodeSpectrum:
    """Eigenmodes of the far-field coupling matrix and their overlap with the symmetric state."""
    _require_pairs(chain.positions)
    w, v = np.linalg.eigh(coupling_matrix(chain.positions, transition))
    psi = ExcitationAmplitudes.symmetric(chain.ion_count).amplitudes
    weights = np.abs(v.conj().T @ psi) ** 2
    return EigenmodeSpectrum(w, v, weights)


def _smear_chunk(positions, sigmas, draws, seq, transition):
    rng = np.random.default_rng(seq)
    jitter = rng.standard_normal((draws, len(positions))) * sigmas
    return _kernels.collective_sums(positions + jitter, transition.wavenumber, transition.pair_amplitude)


def smeared_pair_shift_sum(positions, transition: Transition, thermal: ThermalModel, seed: int) -> tuple[float, float]:
    """Thermal average of :func:`pair_shift_sum` with its Monte Carlo standard error.

    Each ion is displaced by an independent Gaussian of width sigma_m.
    Draws are split into chunks seeded from (seed, chunk index) and reduced
    in chunk order, so the result depends only on `seed`.
    """
    pos = np.asarray(positions, dtype=float)
    _require_pairs(pos)
    sigmas = thermal.sigmas_for(len(pos))
    if not np.any(sigmas > 0):
        return pair_shift_sum(pos, transition), 0.0
    n = int(thermal.sample_count)
    total = 0.0
    total_sq = 0.0
    for chunk, start in enumerate(range(0, n, CHUNK_DRAWS)):
        draws = min(CHUNK_DRAWS, n - start)
        seq = np.random.SeedSequence(seed, spawn_key=(chunk,))
        vals = _smear_chunk(pos, sigmas, draws, seq, transition)
        total += float(vals.sum())
        total_sq += float(vals @ vals)
    mean = total / n
    if n < 2:
        return mean, float("nan")
    var = max(total_sq / n - mean * mean, 0.0) * n / (n - 1)
    return mean, float(np.sqrt(var / n))


def smeared_collective_shift(chain: IonChain, transition: Transition, pol: Polarization,
                             thermal: ThermalModel, seed: int) -> tuple[float, float]:
    """Thermally averaged observable shift (MHz) and its standard error."""
    factor = polarization_factor(pol)
    mean, err = smeared_pair_shift_sum(chain.positions, transition, thermal, seed)
    return factor * mean, factor * err


def equidistant_shift(ion_count: int, spacing, transition: Transition, pol: Polarization):
    """Observable shift (MHz) of an evenly spaced chain, for comparison curves."""
    spacing = np.atleast_1d(np.asarray(spacing, dtype=float))
    pos = spacing[:, None] * np.arange(ion_count)[None, :]
    _require_pairs(pos[0])
    return polarization_factor(pol) * _kernels.collective_sums(pos, transition.wavenumber, transition.pair_amplitude)


def chain_for_spacing(trap_template: TrapConfig, spacing: float) -> tuple[IonChain, float]:
    """Chain whose inner-pair spacing equals `spacing` (um), and its axial frequency (MHz).

    The spacing scales exactly as p ~ omega_z^(-2/3), so the inversion is
    closed form.
    """
    t = equilibrium_positions(trap_template.ion_count)
    probe = IonChain(t, 1.0)
    p = spacing / probe.inner_spacing
    freq = axial_frequency_for_scale(p, trap_template.ion_mass, trap_template.ion_charge)
    cfg = TrapConfig(trap_template.ion_count, freq, trap_template.ion_mass, trap_template.ion_charge)
    return IonChain(t, length_scale(cfg)), freq


def shift_curve(trap_template: TrapConfig, spacing_range: tuple[float, float], points: int,
                transition: Transition, pol: Polarization, thermal: ThermalModel | None = None,
                seed: int = 0) -> ShiftCurve:
    """Observable shift (kHz) versus inner-pair spacing over `spacing_range` (um)."""
    lo, hi = map(float, spacing_range)
    if not (0 < lo < hi):
        raise DomainError(f"spacing range must satisfy 0 < min < max, got {spacing_range}")
    if int(points) != points or points < 2:
        raise DomainError("points must be an integer >= 2")
    if trap_template.ion_count < 2:
        raise DomainError("shift curve needs at least 2 ions")
    spacings = np.linspace(lo, hi, int(points))
    predicted = np.empty(points)
    freqs = np.empty(points)
    smeared = stderr = None
    if thermal is not None:
        smeared = np.empty(points)
        stderr = np.empty(points)
    for i, r in enumerate(spacings):
        chain, freqs[i] = chain_for_spacing(trap_template, r)
        predicted[i] = collective_shift(chain, transition, pol) * 1e3
        if thermal is not None:
            point_seed = np.random.SeedSequence(seed, spawn_key=(i,)).generate_state(1)[0]
            m, e = smeared_collective_shift(chain, transition, pol, thermal, int(point_seed))
            smeared[i], stderr[i] = m * 1e3, e * 1e3
    return ShiftCurve(spacings, predicted, smeared, stderr, freqs)
