"""Flat ``key = value`` run configuration for the ``simulate`` subcommand."""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable

from .chain import TrapConfig
from .constants import (
    SR88_MASS_U,
    SR_NATURAL_LINEWIDTH_MHZ,
    SR_OBSERVED_LINEWIDTH_MHZ,
    SR_OSCILLATOR_STRENGTH_MHZ,
    SR_WAVELENGTH_UM,
)
from .dipole import Polarization, Transition
from .errors import CoopShiftError, ConfigError
from .experiment import SCHEDULES, DriftModel, ExperimentConfig


def _int(text):
    return int(text)


def _float_list(text):
    return tuple(float(x) for x in text.replace(";", ",").split(",") if x.strip())


def _int_list(text):
    return tuple(int(x) for x in text.replace(";", ",").split(",") if x.strip())


def _positive(v):
    return v > 0


def _nonneg(v):
    return v >= 0


@dataclass(frozen=True)
class Key:
    parse: Callable[[str], Any]
    default: Any
    check: Callable[[Any], bool] | None
    constraint: str
    doc: str


KEYS: dict[str, Key] = {
    "ions": Key(_int, 2, lambda v: v >= 1, ">= 1", "number of ions in the chain"),
    "polarization": Key(lambda s: Polarization.parse(s).value, "perp", None, "perp or par", "probe polarization"),
    "mass_u": Key(float, SR88_MASS_U, _positive, "> 0", "ion mass (u)"),
    "charge": Key(_int, 1, lambda v: v >= 1, ">= 1", "ion charge (e)"),
    "wavelength_um": Key(float, SR_WAVELENGTH_UM, _positive, "> 0", "transition wavelength (um)"),
    "a0_mhz": Key(float, SR_OSCILLATOR_STRENGTH_MHZ, _positive, "> 0", "total oscillator strength A0 (MHz)"),
    "natural_linewidth_mhz": Key(float, SR_NATURAL_LINEWIDTH_MHZ, _positive, "> 0", "natural linewidth (MHz)"),
    "linewidth_mhz": Key(float, SR_OBSERVED_LINEWIDTH_MHZ, _positive, "> 0", "observed (true simulated) linewidth (MHz)"),
    "distance_settings": Key(_float_list, (5.0, 5.2), lambda v: len(v) >= 1 and min(v) > 0,
                             "nonempty list of positive values", "inner-pair spacings visited (um), comma separated"),
    "line_center_mhz": Key(float, 0.0, None, "", "unshifted line center (MHz)"),
    "dwell_s": Key(float, 30.0, _positive, "> 0", "time per distance setting per cycle (s)"),
    "probe_pulse_us": Key(float, 8.0, _positive, "> 0", "probe pulse length (us)"),
    "cooling_pulse_us": Key(float, 8.0, _nonneg, ">= 0", "cooling pulse length between probes (us)"),
    "measurements_per_dwell": Key(_int, 51, lambda v: v >= 1, ">= 1", "line-center measurements per dwell block"),
    "photons_per_pulse": Key(float, 9.0, _positive, "> 0", "photons scattered per pulse at line center"),
    "detection_efficiency": Key(float, 0.012, lambda v: 0 < v <= 1, "in (0, 1]", "overall detection efficiency"),
    "background_per_pulse": Key(float, 0.0, _nonneg, ">= 0", "detected background counts per pulse (subtracted)"),
    "guess_center_mhz": Key(float, 0.0, None, "", "three-point guess center f' (MHz)"),
    "guess_width_mhz": Key(float, SR_OBSERVED_LINEWIDTH_MHZ, _positive, "> 0", "three-point guess width Gamma' (MHz)"),
    "drift_linear_khz_per_hour": Key(float, 0.0, _nonneg, ">= 0", "linear drift rate (kHz/hour)"),
    "drift_random_walk_khz_per_sqrt_s": Key(float, 5.9, _nonneg, ">= 0", "random-walk drift strength (kHz/sqrt(s))"),
    "seed": Key(_int, 0, _nonneg, ">= 0", "RNG seed"),
    "cycles": Key(_int, 100, lambda v: v >= 1, ">= 1", "number of interlace cycles"),
    "schedule": Key(str, "cyclic", lambda v: v in SCHEDULES, " or ".join(SCHEDULES), "setting order per cycle"),
    "compare_settings": Key(_int_list, (0, 1), lambda v: len(v) == 2 and v[0] != v[1] and min(v) >= 0,
                            "two distinct setting indices", "settings (a, b) for the relative-shift histogram"),
    "allan_min_windows": Key(_int, 8, lambda v: v >= 2, ">= 2", "minimum averaging windows per Allan point"),
}


def describe_keys() -> str:
    lines = []
    for name, key in KEYS.items():
        default = ",".join(map(str, key.default)) if isinstance(key.default, tuple) else key.default
        lines.append(f"  {name:34s} {key.doc} [default {default}]")
    return "\n".join(lines)


@dataclass(frozen=True)
class RunConfig:
    values: dict

    def __getitem__(self, name):
        return self.values[name]

    def echo(self) -> dict:
        return {k: list(v) if isinstance(v, tuple) else v for k, v in self.values.items()}

    @property
    def polarization(self) -> Polarization:
        return Polarization.parse(self["polarization"])

    def trap_template(self) -> TrapConfig:
        return TrapConfig(self["ions"], 0.5, self["mass_u"], self["charge"])

    def transition(self) -> Transition:
        return Transition(self["wavelength_um"], self["a0_mhz"], self["natural_linewidth_mhz"], self["linewidth_mhz"])

    def experiment(self) -> ExperimentConfig:
        return ExperimentConfig(
            distance_settings=self["distance_settings"],
            dwell_per_setting=self["dwell_s"],
            probe_pulse=self["probe_pulse_us"],
            cooling_pulse=self["cooling_pulse_us"],
            measurements_per_dwell=self["measurements_per_dwell"],
            photons_per_pulse_mean=self["photons_per_pulse"],
            detection_efficiency=self["detection_efficiency"],
            background_per_pulse=self["background_per_pulse"],
            guess_center=self["guess_center_mhz"],
            guess_width=self["guess_width_mhz"],
            linewidth=self["linewidth_mhz"],
            drift=DriftModel(self["drift_linear_khz_per_hour"], self["drift_random_walk_khz_per_sqrt_s"]),
            seed=self["seed"],
            cycles=self["cycles"],
            schedule=self["schedule"],
        )

    def replace(self, **changes) -> "RunConfig":
        values = dict(self.values)
        for k, v in changes.items():
            values[k] = _validate(k, v)
        return RunConfig(values)


def _validate(name, value, line=None):
    key = KEYS[name]
    if key.check is not None and not key.check(value):
        raise ConfigError(f"value {value!r} violates constraint: {name} {key.constraint}", key=name, line=line)
    return value


def parse_config_text(text: str) -> RunConfig:
    """Parse flat config text. Unknown keys, duplicates and bad values are rejected."""
    values = {name: key.default for name, key in KEYS.items()}
    seen = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", line=lineno)
        name, _, value = (part.strip() for part in line.partition("="))
        if name not in KEYS:
            raise ConfigError("unknown key", key=name, line=lineno)
        if name in seen:
            raise ConfigError("duplicate key", key=name, line=lineno)
        seen.add(name)
        try:
            parsed = KEYS[name].parse(value)
        except (ValueError, CoopShiftError) as exc:
            raise ConfigError(f"cannot parse {value!r}: {exc}", key=name, line=lineno) from None
        values[name] = _validate(name, parsed, lineno)
    cfg = RunConfig(values)
    a, b = cfg["compare_settings"]
    if max(a, b) >= len(cfg["distance_settings"]):
        raise ConfigError("setting index exceeds the number of distance_settings", key="compare_settings")
    return cfg


def parse_config(path) -> RunConfig:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {p}: {exc.strerror}") from None
    return parse_config_text(text)
