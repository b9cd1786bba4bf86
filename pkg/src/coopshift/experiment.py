"""Virtual interlaced line-center experiment and its statistical analysis."""
from __future__ import annotations

import csv
import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .chain import TrapConfig
from .collective import chain_for_spacing, collective_shift
from .constants import SR_OBSERVED_LINEWIDTH_MHZ
from .dipole import Polarization, Transition, shift_envelope, polarization_factor
from .errors import DomainError, UnidentifiableError
from .spectro import estimate_centers, probe_detunings

SCHEDULES = ("cyclic", "mirrored")


@dataclass(frozen=True)
class DriftModel:
    """Common-mode drift of the line center: linear ramp plus Gaussian random walk."""

    linear_rate: float = 0.0  # kHz / hour
    random_walk_sigma: float = 5.9  # kHz / sqrt(s)

    def __post_init__(self):
        if self.linear_rate < 0 or self.random_walk_sigma < 0:
            raise DomainError("drift parameters must be >= 0")


@dataclass(frozen=True)
class ExperimentConfig:
    """Cadence and photon budget of the interlaced measurement.

    One measurement probes f' and f' +- Gamma'/2 with `pulses_per_point`
    probe pulses each. `measurements_per_dwell` measurements fill each dwell
    block; settings are visited in `schedule` order once per cycle.
    """

    distance_settings: tuple = (5.0, 5.2)  # um
    dwell_per_setting: float = 30.0  # s
    probe_pulse: float = 8.0  # us
    cooling_pulse: float = 8.0  # us
    measurements_per_dwell: int = 51
    photons_per_pulse_mean: float = 9.0  # scattered per pulse at line center
    detection_efficiency: float = 0.012
    background_per_pulse: float = 0.0  # detected counts per pulse, subtracted
    guess_center: float = 0.0  # MHz
    guess_width: float = SR_OBSERVED_LINEWIDTH_MHZ  # MHz
    linewidth: float = SR_OBSERVED_LINEWIDTH_MHZ  # MHz, true line
    drift: DriftModel = field(default_factory=DriftModel)
    seed: int = 0
    cycles: int = 100
    schedule: str = "cyclic"

    def __post_init__(self):
        settings = tuple(float(x) for x in np.atleast_1d(self.distance_settings))
        object.__setattr__(self, "distance_settings", settings)
        if not settings or any(s <= 0 for s in settings):
            raise DomainError("distance_settings must be a nonempty list of positive spacings")
        for name in ("dwell_per_setting", "probe_pulse", "photons_per_pulse_mean", "guess_width", "linewidth"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be > 0")
        if self.cooling_pulse < 0 or self.background_per_pulse < 0:
            raise DomainError("cooling_pulse and background_per_pulse must be >= 0")
        if not 0 < self.detection_efficiency <= 1:
            raise DomainError("detection_efficiency must lie in (0, 1]")
        for name in ("measurements_per_dwell", "cycles"):
            v = getattr(self, name)
            if int(v) != v or v < 1:
                raise DomainError(f"{name} must be an integer >= 1")
        if int(self.seed) != self.seed or self.seed < 0:
            raise DomainError("seed must be a nonnegative integer")
        if self.schedule not in SCHEDULES:
            raise DomainError(f"schedule must be one of {SCHEDULES}")

    @property
    def measurement_time(self) -> float:
        return self.dwell_per_setting / self.measurements_per_dwell

    @property
    def pulses_per_point(self) -> int:
        cycle_s = (self.probe_pulse + self.cooling_pulse) * 1e-6
        return max(1, int(round(self.measurement_time / (3.0 * cycle_s))))

    @property
    def detected_per_pulse(self) -> float:
        """Detected signal counts per pulse at line center."""
        return self.photons_per_pulse_mean * self.detection_efficiency

    @property
    def expected_side_photons(self) -> float:
        """Mean signal counts at one half-width point (n), for f' = f0, Gamma' = Gamma."""
        return 0.5 * self.pulses_per_point * self.detected_per_pulse

    @property
    def expected_photons_per_measurement(self) -> float:
        return 4.0 * self.expected_side_photons

    def setting_order(self, cycle: int) -> list[int]:
        order = list(range(len(self.distance_settings)))
        if self.schedule == "mirrored" and cycle % 2 == 1:
            order.reverse()
        return order


@dataclass
class MeasurementSeries:
    """Per-measurement line-center records in time order."""

    time_s: np.ndarray
    setting: np.ndarray
    center_mhz: np.ndarray
    photons: np.ndarray
    block: np.ndarray
    dwell_s: float
    settings_count: int
    skipped: int = 0
    drift_mhz: np.ndarray | None = None

    def __post_init__(self):
        n = len(self.time_s)
        for name in ("setting", "center_mhz", "photons", "block"):
            if len(getattr(self, name)) != n:
                raise DomainError(f"{name} length differs from time_s")
        if n and np.any(np.diff(self.time_s) < 0):
            raise DomainError("record times must be nondecreasing")
        if n and (self.setting.min() < 0 or self.setting.max() >= self.settings_count):
            raise DomainError("setting index out of range")

    def __len__(self):
        return len(self.time_s)

    @property
    def duration(self) -> float:
        return (int(self.block.max()) + 1) * self.dwell_s if len(self) else 0.0

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("time_s,setting,center_mhz,photons\n")
        for t, s, c, p in zip(self.time_s, self.setting, self.center_mhz, self.photons):
            buf.write(f"{t:.6f},{int(s)},{c:.12e},{int(p)}\n")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, dwell_s: float | None = None) -> "MeasurementSeries":
        """Parse ``series.csv``; dwell blocks are recovered as runs of equal setting."""
        rows = list(csv.DictReader(io.StringIO(text)))
        if not rows:
            raise DomainError("series CSV has no records")
        t = np.array([float(r["time_s"]) for r in rows])
        s = np.array([int(r["setting"]) for r in rows])
        c = np.array([float(r["center_mhz"]) for r in rows])
        p = np.array([int(r["photons"]) for r in rows])
        if dwell_s is not None:
            block = np.floor(t / dwell_s).astype(int)
        else:
            block = np.concatenate([[0], np.cumsum(s[1:] != s[:-1])])
            if block[-1] > 0:
                # blocks are contiguous, so consecutive block starts are one dwell apart
                first = t[np.r_[True, block[1:] != block[:-1]]]
                dwell_s = float(np.median(np.diff(first)))
            else:
                dwell_s = float(t[0] + t[-1]) if t[-1] > 0 else 1.0  # first and last records sit half a slot inside the block
        return cls(t, s, c, p, block, float(dwell_s), int(s.max()) + 1)


def drift_path(cfg: ExperimentConfig, times: np.ndarray, increments: np.ndarray) -> np.ndarray:
    """Drift (MHz) at `times` given unit-normal random-walk increments per measurement."""
    step = cfg.measurement_time
    rw = np.cumsum(increments) * (cfg.drift.random_walk_sigma * 1e-3) * np.sqrt(step)
    return cfg.drift.linear_rate * 1e-3 / 3600.0 * times + rw


def _block_rng(seed, block, stream):
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(block, stream)))


def simulate_series(true_centers, cfg: ExperimentConfig, workers: int = 1) -> MeasurementSeries:
    """Simulate the interlaced photon-counting experiment.

    Every measurement draws Poisson counts at the three probe detunings of a
    Lorentzian centered at ``true_centers[setting] + drift(t)`` and applies
    the exact three-point estimator. Random numbers for dwell block b come
    from streams seeded by (cfg.seed, b), so the output is bit-reproducible
    and independent of `workers`. Rejected samples are dropped and counted
    in ``skipped``.
    """
    truth = np.asarray(true_centers, dtype=float)
    n_set = len(cfg.distance_settings)
    if truth.shape != (n_set,):
        raise DomainError(f"need one true center per distance setting ({n_set}), got shape {truth.shape}")
    m = cfg.measurements_per_dwell
    n_blocks = cfg.cycles * n_set
    order = np.concatenate([cfg.setting_order(c) for c in range(cfg.cycles)])
    block_idx = np.repeat(np.arange(n_blocks), m)
    slot = np.tile(np.arange(m), n_blocks)
    times = block_idx * cfg.dwell_per_setting + (slot + 0.5) * cfg.measurement_time
    settings = order[block_idx]

    def increments(b):
        return _block_rng(cfg.seed, b, 0).standard_normal(m)

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        inc = np.concatenate(list(pool.map(increments, range(n_blocks))))
    drift = drift_path(cfg, times, inc)
    centers_true = truth[settings] + drift

    pulses = cfg.pulses_per_point
    bg = cfg.background_per_pulse
    nus = probe_detunings(cfg.guess_center, cfg.guess_width)

    def counts(b):
        sl = slice(b * m, (b + 1) * m)
        # unit-amplitude line shape at the three detunings, per measurement
        x = (nus[None, :] - centers_true[sl, None]) / (0.5 * cfg.linewidth)
        mu = pulses * (cfg.detected_per_pulse / (1.0 + x * x) + bg)
        return _block_rng(cfg.seed, b, 1).poisson(mu)

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        k = np.concatenate(list(pool.map(counts, range(n_blocks))))
    flux = k / pulses - bg
    est, status = estimate_centers(flux[:, 0], flux[:, 1], flux[:, 2], cfg.guess_center, cfg.guess_width)
    ok = status == 0
    return MeasurementSeries(
        time_s=times[ok],
        setting=settings[ok],
        center_mhz=est[ok],
        photons=k.sum(axis=1)[ok],
        block=block_idx[ok],
        dwell_s=cfg.dwell_per_setting,
        settings_count=n_set,
        skipped=int(np.count_nonzero(~ok)),
        drift_mhz=drift[ok],
    )


def true_centers(cfg: ExperimentConfig, trap_template: TrapConfig, transition: Transition,
                 pol: Polarization, line_center: float = 0.0) -> np.ndarray:
    """Line center (MHz) at each distance setting: `line_center` plus the observable collective shift."""
    out = []
    for r in cfg.distance_settings:
        chain, _ = chain_for_spacing(trap_template, r)
        out.append(line_center + collective_shift(chain, transition, pol))
    return np.array(out)


# ---------------------------------------------------------------------------
# analysis


@dataclass(frozen=True)
class Histogram:
    edges: np.ndarray
    counts: np.ndarray

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[1:] + self.edges[:-1])


@dataclass(frozen=True)
class RelativeShift:
    mean: float  # MHz
    stderr: float  # MHz
    std: float  # MHz
    differences: np.ndarray
    times: np.ndarray
    histogram: Histogram

    @property
    def count(self) -> int:
        return len(self.differences)


def _block_table(series):
    """(block id, setting, record slice) for each dwell block in time order."""
    blocks = []
    if not len(series):
        return blocks
    starts = np.flatnonzero(np.r_[True, series.block[1:] != series.block[:-1]])
    ends = np.r_[starts[1:], len(series)]
    for s, e in zip(starts, ends):
        blocks.append((int(series.block[s]), int(series.setting[s]), slice(s, e)))
    return blocks


def paired_differences(series: MeasurementSeries, setting_a: int, setting_b: int):
    """Differences a - b from consecutive (a, b) or (b, a) dwell blocks.

    Within a block pair the j-th valid records of each block are matched;
    an unmatched trailing block is dropped.
    """
    for s in (setting_a, setting_b):
        if not 0 <= s < series.settings_count or not np.any(series.setting == s):
            raise DomainError(f"setting {s} has no records")
    if setting_a == setting_b:
        raise DomainError("relative shift needs two different settings")
    blocks = [b for b in _block_table(series) if b[1] in (setting_a, setting_b)]
    diffs, times = [], []
    i = 0
    while i + 1 < len(blocks):
        (_, s1, sl1), (_, s2, sl2) = blocks[i], blocks[i + 1]
        if s1 == s2:
            i += 1
            continue
        sa, sb = (sl1, sl2) if s1 == setting_a else (sl2, sl1)
        k = min(sa.stop - sa.start, sb.stop - sb.start)
        ca = series.center_mhz[sa][:k]
        cb = series.center_mhz[sb][:k]
        diffs.append(ca - cb)
        times.append(0.5 * (series.time_s[sa][:k] + series.time_s[sb][:k]))
        i += 2
    if not diffs:
        return np.empty(0), np.empty(0)
    return np.concatenate(diffs), np.concatenate(times)


def histogram(values, bins="fd") -> Histogram:
    counts, edges = np.histogram(np.asarray(values, dtype=float), bins=bins)
    return Histogram(edges, counts)


def relative_shift(series: MeasurementSeries, setting_a: int, setting_b: int, bins="fd") -> RelativeShift:
    """Mean and standard error of the interlaced difference a - b, with its histogram."""
    diffs, times = paired_differences(series, setting_a, setting_b)
    if len(diffs) < 2:
        raise DomainError("fewer than 2 paired differences")
    std = float(np.std(diffs, ddof=1))
    return RelativeShift(float(np.mean(diffs)), std / np.sqrt(len(diffs)), std, diffs, times, histogram(diffs, bins))


def absolute_track(series: MeasurementSeries, setting: int) -> tuple[np.ndarray, float]:
    """Center estimates of one setting in time order, with their mean sample interval (s)."""
    values = series.center_mhz[series.setting == setting]
    if len(values) == 0:
        raise DomainError(f"setting {setting} has no records")
    return values, series.duration / len(values)


def difference_track(series: MeasurementSeries, setting_a: int, setting_b: int) -> tuple[np.ndarray, float]:
    diffs, _ = paired_differences(series, setting_a, setting_b)
    if len(diffs) == 0:
        raise DomainError("no paired differences")
    return diffs, series.duration / len(diffs)


def allan_deviation(values, sample_interval: float, taus) -> np.ndarray:
    """Non-overlapping Allan deviation of `values` at averaging times `taus`.

    sigma(tau) = sqrt(0.5 * mean((ybar_{k+1} - ybar_k)^2)) over consecutive
    windows of tau / sample_interval samples.
    """
    y = np.asarray(values, dtype=float)
    if y.size < 4:
        raise DomainError("Allan deviation needs at least 4 samples")
    if not sample_interval > 0:
        raise DomainError("sample_interval must be > 0")
    out = []
    for tau in np.atleast_1d(taus):
        ratio = tau / sample_interval
        m = int(round(ratio))
        if m < 1 or abs(ratio - m) > 1e-6 * max(1.0, ratio):
            raise DomainError(f"tau={tau} is not a multiple of the sample interval {sample_interval}")
        k = y.size // m
        if k < 2:
            raise DomainError(f"tau={tau} too large for {y.size} samples")
        means = y[: k * m].reshape(k, m).mean(axis=1)
        out.append(np.sqrt(0.5 * np.mean(np.diff(means) ** 2)))
    return np.array(out)


def octave_taus(n_samples: int, sample_interval: float, min_windows: int = 8) -> np.ndarray:
    """Octave-spaced averaging times keeping at least `min_windows` windows."""
    m = 1
    out = []
    while n_samples // m >= min_windows:
        out.append(m * sample_interval)
        m *= 2
    if not out:
        raise DomainError("series too short for the requested window count")
    return np.array(out)


def loglog_slope(taus, sigmas) -> float:
    return float(np.polyfit(np.log10(taus), np.log10(sigmas), 1)[0])


def anchor_mean(measured, theory) -> np.ndarray:
    """Shift `measured` by a constant so its mean equals the mean of `theory`.

    For parallel polarization the theory curve is identically zero, so the
    anchored mean is zero.
    """
    y = np.asarray(measured, dtype=float)
    th = np.asarray(getattr(theory, "predicted_shift", theory), dtype=float)
    if y.shape != th.shape:
        raise DomainError("measured and theory differ in length")
    return y - y.mean() + th.mean()


def predicted_shifts(spacings, trap_template: TrapConfig, transition: Transition,
                     pol: Polarization = Polarization.PerpendicularToAxis) -> np.ndarray:
    """Observable shift (kHz) at arbitrary inner-pair spacings (um)."""
    out = []
    for r in np.asarray(spacings, dtype=float):
        chain, _ = chain_for_spacing(trap_template, r)
        out.append(collective_shift(chain, transition, pol) * 1e3)
    return np.array(out)


@dataclass(frozen=True)
class OscillatorFit:
    a0: float  # MHz
    stderr: float  # MHz
    chi2: float
    dof: int
    residual_rms: float  # kHz, anchored data vs fitted model
    model: np.ndarray  # kHz, fitted model anchored to the data mean


def fit_oscillator_strength(shifts_khz, sigma_khz, spacings_um, trap_template: TrapConfig | None = None,
                            transition: Transition | None = None,
                            pol: Polarization = Polarization.PerpendicularToAxis) -> OscillatorFit:
    """Single-parameter weighted least-squares fit of A0 to relative shift data.

    The model (observable shift at each spacing, linear in A0) is re-anchored
    to the data mean at every trial A0, so only the shape is fitted. The
    1-sigma error comes from the curvature of chi^2 (delta chi^2 = 1).
    """
    y = np.asarray(shifts_khz, dtype=float)
    s = np.asarray(sigma_khz, dtype=float)
    r = np.asarray(spacings_um, dtype=float)
    if not (y.shape == s.shape == r.shape) or y.ndim != 1:
        raise DomainError("shifts, uncertainties and spacings must be 1-D of equal length")
    if y.size < 3:
        raise DomainError("need at least 3 data points")
    if np.any(s <= 0):
        raise DomainError("uncertainties must be > 0")
    trap_template = trap_template or TrapConfig(2, 0.5)
    transition = transition or Transition()
    unit = transition.with_oscillator_strength(1.0)
    g = predicted_shifts(r, trap_template, unit, pol)  # kHz per MHz of A0
    h = g - g.mean()
    w = 1.0 / s**2
    info = float(np.sum(w * h * h))
    env = 1e3 * polarization_factor(Polarization.PerpendicularToAxis) * float(np.max(shift_envelope(r, unit)))
    if info <= (1e-9 * env) ** 2 * float(np.sum(w)):
        raise UnidentifiableError("model shape is flat at these spacings; A0 is unidentifiable")
    yc = y - y.mean()
    a0 = float(np.sum(w * h * yc) / info)
    resid = yc - a0 * h
    chi2 = float(np.sum(w * resid**2))
    return OscillatorFit(a0, float(1.0 / np.sqrt(info)), chi2, int(y.size - 1),
                         float(np.sqrt(np.mean(resid**2))), a0 * h + y.mean())


def synthetic_relative_data(theory_khz, sigma_khz, seed: int, offset_khz: float = 0.0) -> np.ndarray:
    """Theory plus Gaussian noise plus an unknown common offset, as a relative measurement would give."""
    th = np.asarray(theory_khz, dtype=float)
    rng = np.random.default_rng(seed)
    return th + offset_khz + rng.standard_normal(th.shape) * np.asarray(sigma_khz, dtype=float)


def setting_offsets(series: MeasurementSeries) -> tuple[np.ndarray, np.ndarray]:
    """Per-setting line center relative to the cycle mean, with standard errors (MHz).

    Block means are referenced to the mean over all settings in the same
    cycle, removing common drift; the result is averaged over complete cycles.
    """
    n_set = series.settings_count
    if n_set < 2:
        raise DomainError("need at least 2 settings")
    cycle = series.block // n_set
    n_cyc = int(cycle.max()) + 1
    sums = np.zeros((n_cyc, n_set))
    counts = np.zeros((n_cyc, n_set))
    np.add.at(sums, (cycle, series.setting), series.center_mhz)
    np.add.at(counts, (cycle, series.setting), 1)
    full = np.all(counts > 0, axis=1)
    if full.sum() < 2:
        raise DomainError("fewer than 2 complete cycles")
    means = sums[full] / counts[full]
    rel = means - means.mean(axis=1, keepdims=True)
    return rel.mean(axis=0), rel.std(axis=0, ddof=1) / np.sqrt(full.sum())
