"""Lorentzian line model and three-point line-center estimation."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import DomainError, IllConditionedSampleError, InvalidSampleError

# exact-estimator denominator must exceed this fraction of the largest flux
DEFAULT_REL_EPS = 1e-6


@dataclass(frozen=True)
class Lorentzian:
    center: float  # MHz
    width: float  # MHz, FWHM
    amplitude: float = 1.0

    def __post_init__(self):
        if not self.width > 0:
            raise DomainError(f"width must be > 0, got {self.width}")
        if not self.amplitude > 0:
            raise DomainError(f"amplitude must be > 0, got {self.amplitude}")


@dataclass(frozen=True)
class ThreePointSample:
    guess_center: float
    guess_width: float
    flux_center: float
    flux_plus: float
    flux_minus: float

    def __post_init__(self):
        if not self.guess_width > 0:
            raise DomainError("guess_width must be > 0")
        if min(self.flux_center, self.flux_plus, self.flux_minus) < 0:
            raise DomainError("fluxes must be >= 0")

    @classmethod
    def from_line(cls, line: Lorentzian, guess_center: float, guess_width: float) -> "ThreePointSample":
        """Noiseless sample of `line` at f' and f' +- guess_width/2."""
        half = 0.5 * guess_width
        return cls(
            guess_center,
            guess_width,
            float(lorentzian_flux(line, guess_center)),
            float(lorentzian_flux(line, guess_center + half)),
            float(lorentzian_flux(line, guess_center - half)),
        )


def lorentzian_flux(model: Lorentzian, detuning):
    """A / (1 + ((nu - f0) / (Gamma/2))^2)."""
    x = (np.asarray(detuning, dtype=float) - model.center) / (0.5 * model.width)
    return model.amplitude / (1.0 + x * x)


def probe_detunings(guess_center: float, guess_width: float) -> np.ndarray:
    """Detunings (center, plus, minus) of the three sampling points."""
    half = 0.5 * guess_width
    return np.array([guess_center, guess_center + half, guess_center - half])


def estimate_center_exact(sample: ThreePointSample, rel_eps: float = DEFAULT_REL_EPS) -> float:
    """Line center from three fluxes, exact for a Lorentzian when guess_width equals the true width.

    Raises
    ------
    InvalidSampleError
        If the center flux is zero.
    IllConditionedSampleError
        If the denominator is below `rel_eps` times the largest flux. The
        approximate form is never substituted.
    """
    l0, lp, lm = sample.flux_center, sample.flux_plus, sample.flux_minus
    if l0 <= 0:
        raise InvalidSampleError("center flux must be > 0")
    den = 2.0 * (lp + lm) - 4.0 * lp * lm / l0
    if abs(den) <= rel_eps * max(l0, lp, lm):
        raise IllConditionedSampleError(f"denominator {den:.3e} too small for fluxes ({l0}, {lp}, {lm})")
    return sample.guess_center + 0.5 * sample.guess_width * (lp - lm) / den


def estimate_center_approx(sample: ThreePointSample) -> float:
    """First-order form f' + (Gamma'/2)(L+ - L-)/L0."""
    if sample.flux_center <= 0:
        raise InvalidSampleError("center flux must be > 0")
    return sample.guess_center + 0.5 * sample.guess_width * (sample.flux_plus - sample.flux_minus) / sample.flux_center


def estimate_centers(flux_center, flux_plus, flux_minus, guess_center, guess_width,
                     rel_eps=DEFAULT_REL_EPS):
    """Vectorized exact estimator.

    Returns centers (nan where the sample was rejected) and a status array
    (0 ok, 1 non-positive center flux, 2 ill-conditioned).
    """
    return _kernels.three_point_centers(flux_center, flux_plus, flux_minus,
                                        float(guess_center), float(guess_width), float(rel_eps))


def shot_noise_sigma(linewidth: float, total_photons) -> float:
    """Gamma / (2 sqrt(N)).

    N counts the photons collected at the two half-width points f' +- Gamma'/2,
    which carry the center information. With equal dwell per point this is
    half of all photons in the measurement.
    """
    n = np.asarray(total_photons, dtype=float)
    if np.any(n < 1):
        raise DomainError("total_photons must be >= 1")
    out = linewidth / (2.0 * np.sqrt(n))
    return float(out) if out.ndim == 0 else out


def photons_for_sigma(linewidth: float, sigma: float) -> float:
    """Photon number needed to reach shot-noise uncertainty `sigma`."""
    return (linewidth / (2.0 * sigma)) ** 2
