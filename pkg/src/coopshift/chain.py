"""Equilibrium geometry of a linear ion chain in a harmonic axial trap."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .constants import ATOMIC_MASS, ELEMENTARY_CHARGE, EPSILON_0, SR88_MASS_U
from .errors import DomainError, SolverError

FORCE_TOLERANCE = 1e-10


@dataclass(frozen=True)
class TrapConfig:
    """Axial trap and ion species.

    Parameters
    ----------
    ion_count : int
        Number of ions in the chain.
    axial_com_frequency : float
        Axial center-of-mass mode frequency omega_z / 2pi in MHz.
    ion_mass : float
        Ion mass in atomic mass units.
    ion_charge : int
        Ion charge in elementary charges.
    """

    ion_count: int
    axial_com_frequency: float
    ion_mass: float = SR88_MASS_U
    ion_charge: int = 1

    def __post_init__(self):
        if int(self.ion_count) != self.ion_count or self.ion_count < 1:
            raise DomainError(f"ion_count must be an integer >= 1, got {self.ion_count}")
        if not self.axial_com_frequency > 0:
            raise DomainError(f"axial_com_frequency must be > 0, got {self.axial_com_frequency}")
        if not self.ion_mass > 0:
            raise DomainError(f"ion_mass must be > 0, got {self.ion_mass}")
        if int(self.ion_charge) != self.ion_charge or self.ion_charge < 1:
            raise DomainError(f"ion_charge must be an integer >= 1, got {self.ion_charge}")


@dataclass(frozen=True)
class IonChain:
    normalized_positions: np.ndarray
    length_scale: float  # um
    positions: np.ndarray = field(init=False)  # um

    def __post_init__(self):
        t = np.asarray(self.normalized_positions, dtype=float)
        t.setflags(write=False)
        object.__setattr__(self, "normalized_positions", t)
        r = t * self.length_scale
        r.setflags(write=False)
        object.__setattr__(self, "positions", r)

    @property
    def ion_count(self) -> int:
        return len(self.positions)

    def inner_pair(self) -> tuple[int, int]:
        """Indices of the adjacent pair nearest the chain center.

        For even M these are the two middle ions. For odd M the pair
        (M//2 - 1, M//2) is used; by mirror symmetry its spacing equals
        that of the pair on the other side of the center ion.
        """
        m = self.ion_count
        if m < 2:
            raise DomainError("a chain of fewer than 2 ions has no inner pair")
        return m // 2 - 1, m // 2

    @property
    def inner_spacing(self) -> float:
        i, j = self.inner_pair()
        return float(self.positions[j] - self.positions[i])


def _energy(u):
    d = np.abs(u[:, None] - u[None, :])
    iu = np.triu_indices(len(u), 1)
    return 0.5 * float(u @ u) + float(np.sum(1.0 / d[iu]))


def force_residual(u):
    """Gradient of the dimensionless potential, i.e. minus the net force on each ion."""
    u = np.asarray(u, dtype=float)
    diff = u[:, None] - u[None, :]
    np.fill_diagonal(diff, np.inf)
    return u - np.sum(np.sign(diff) / diff**2, axis=1)


def _hessian(u):
    diff = np.abs(u[:, None] - u[None, :])
    np.fill_diagonal(diff, np.inf)
    off = -2.0 / diff**3
    h = off.copy()
    np.fill_diagonal(h, 1.0 - off.sum(axis=1))
    return h


@lru_cache(maxsize=64)
def _equilibrium_cached(n, max_iter, tol):
    if n == 1:
        return (0.0,)
    # uniform guess with the empirical center spacing ~2.018 n^-0.559
    spacing = 2.018 * n**-0.559
    u = (np.arange(n) - (n - 1) / 2.0) * spacing
    energy = _energy(u)
    grad = force_residual(u)
    for it in range(max_iter):
        gnorm = float(np.linalg.norm(grad))
        if gnorm < tol * 1e-3:
            break
        step = np.linalg.solve(_hessian(u), -grad)
        lam = 1.0
        while True:
            trial = u + lam * step
            if np.all(np.diff(trial) > 0):
                e_trial = _energy(trial)
                g_trial = force_residual(trial)
                # energy differences drown in roundoff near the minimum; fall back on the residual
                if (e_trial <= energy + 1e-4 * lam * float(grad @ step)
                        or np.linalg.norm(g_trial) <= 0.9 * gnorm):
                    break
            lam *= 0.5
            if lam < 1e-12:
                raise SolverError("line search failed in chain equilibrium", gnorm, it)
        u, energy, grad = trial, e_trial, g_trial
    u = 0.5 * (u - u[::-1])  # exact mirror symmetry
    gnorm = float(np.linalg.norm(force_residual(u)))
    if gnorm >= tol:
        raise SolverError("chain equilibrium did not converge", gnorm, max_iter)
    return tuple(u)


def equilibrium_positions(n: int, max_iter: int = 100, tol: float = FORCE_TOLERANCE) -> np.ndarray:
    """Dimensionless equilibrium positions t_1 < ... < t_n.

    Minimizes ``sum(u**2)/2 + sum_{m<n} 1/|u_m - u_n|`` by damped Newton
    iteration started from a uniformly spaced chain.

    Raises
    ------
    SolverError
        If the force residual is not below `tol` after `max_iter` steps.
    """
    if int(n) != n or n < 1:
        raise DomainError(f"ion count must be an integer >= 1, got {n}")
    return np.array(_equilibrium_cached(int(n), int(max_iter), float(tol)))


def length_scale(cfg: TrapConfig) -> float:
    """Chain length scale p = (q^2 / (4 pi eps0 m omega_z^2))^(1/3) in um."""
    q = cfg.ion_charge * ELEMENTARY_CHARGE
    m = cfg.ion_mass * ATOMIC_MASS
    omega = 2.0 * np.pi * cfg.axial_com_frequency * 1e6
    return float((q**2 / (4.0 * np.pi * EPSILON_0 * m * omega**2)) ** (1.0 / 3.0) * 1e6)


def axial_frequency_for_scale(p_um: float, ion_mass: float = SR88_MASS_U, ion_charge: int = 1) -> float:
    """Inverse of :func:`length_scale`: axial COM frequency (MHz) giving scale `p_um`."""
    if not p_um > 0:
        raise DomainError(f"length scale must be > 0, got {p_um}")
    q = ion_charge * ELEMENTARY_CHARGE
    m = ion_mass * ATOMIC_MASS
    p = p_um * 1e-6
    omega = np.sqrt(q**2 / (4.0 * np.pi * EPSILON_0 * m * p**3))
    return float(omega / (2.0 * np.pi) / 1e6)


def build_chain(cfg: TrapConfig) -> IonChain:
    return IonChain(equilibrium_positions(cfg.ion_count), length_scale(cfg))
