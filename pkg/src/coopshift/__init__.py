"""Cooperative line shifts in trapped-ion chains: geometry, dipole coupling,
lineshape estimation and a virtual interlaced experiment."""

__version__ = "0.1.0"

from .chain import IonChain, TrapConfig, build_chain, equilibrium_positions, length_scale  # noqa: E402
from .collective import (  # noqa: E402
    ShiftCurve,
    ThermalModel,
    collective_shift,
    eigenmode_spectrum,
    shift_curve,
    smeared_collective_shift,
)
from .dipole import (  # noqa: E402
    DipolePair,
    PairGeometry,
    Polarization,
    Transition,
    coupling_strength,
    far_field_shift,
    polarization_factor,
    two_ion_manifold,
)
from .spectro import (  # noqa: E402
    Lorentzian,
    ThreePointSample,
    estimate_center_approx,
    estimate_center_exact,
    lorentzian_flux,
    shot_noise_sigma,
)
