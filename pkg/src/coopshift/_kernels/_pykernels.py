"""numpy implementations of the hot kernels (fallback backend)."""
import numpy as np

STATUS_OK = 0
STATUS_INVALID = 1
STATUS_ILL_CONDITIONED = 2


def collective_sums(positions, wavenumber, amplitude):
    """Per-row (1/M) * sum over ordered pairs of -amplitude*cos(kr)/kr."""
    pos = np.ascontiguousarray(positions, dtype=np.float64)
    m = pos.shape[1]
    iu, ju = np.triu_indices(m, 1)
    kr = wavenumber * np.abs(pos[:, iu] - pos[:, ju])
    return -amplitude * 2.0 * np.sum(np.cos(kr) / kr, axis=1) / m


def three_point_centers(flux_center, flux_plus, flux_minus, guess_center, guess_width, rel_eps):
    """Exact three-point line centers with per-sample status codes."""
    l0 = np.asarray(flux_center, dtype=np.float64)
    lp = np.asarray(flux_plus, dtype=np.float64)
    lm = np.asarray(flux_minus, dtype=np.float64)
    out = np.full(l0.shape, np.nan)
    status = np.zeros(l0.shape, dtype=np.int8)
    bad = l0 <= 0
    status[bad] = STATUS_INVALID
    ok = ~bad
    den = np.zeros(l0.shape)
    den[ok] = 2.0 * (lp[ok] + lm[ok]) - 4.0 * lp[ok] * lm[ok] / l0[ok]
    scale = np.maximum(np.maximum(l0, lp), lm)
    ill = ok & (np.abs(den) <= rel_eps * scale)
    status[ill] = STATUS_ILL_CONDITIONED
    good = ok & ~ill
    out[good] = guess_center + 0.5 * guess_width * (lp[good] - lm[good]) / den[good]
    return out, status
