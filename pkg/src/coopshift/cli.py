"""Command-line entry point: ``coopshift <subcommand> ...``."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__, _kernels
from .chain import TrapConfig, build_chain
from .collective import ThermalModel, shift_curve
from .config import describe_keys, parse_config
from .constants import SR88_MASS_U
from .dipole import Polarization, Transition, far_field_shift, observed_pair_shift, two_ion_manifold
from .errors import CoopShiftError
from .experiment import (
    MeasurementSeries,
    absolute_track,
    allan_deviation,
    anchor_mean,
    difference_track,
    fit_oscillator_strength,
    loglog_slope,
    octave_taus,
    predicted_shifts,
    relative_shift,
    setting_offsets,
    simulate_series,
    true_centers,
)
from .outputs import RunManifest, csv_text, emit_outputs, to_json
from .spectro import shot_noise_sigma


def _emit(args, name, text, command, config, seed=None):
    """Print `text`, or write it under --out-dir together with a manifest."""
    if args.out_dir is None:
        sys.stdout.write(text)
        return
    manifest = RunManifest(__version__, command, seed, config)
    emit_outputs(args.out_dir, {name: text}, manifest)
    _say(args, f"wrote {Path(args.out_dir) / name}")


def _say(args, msg):
    if not args.quiet:
        print(msg, file=sys.stderr)


def _seed(args) -> int:
    # the shared --seed option defaults to None so that simulate can defer to its config
    return 0 if args.seed is None else args.seed


def cmd_chain(args):
    cfg = TrapConfig(args.ions, args.axial_freq_mhz, args.mass_u, args.charge)
    chain = build_chain(cfg)
    rows = [(i, float(t), float(r)) for i, (t, r) in enumerate(zip(chain.normalized_positions, chain.positions))]
    text = csv_text(("index", "t_m", "r_m_um"), rows)
    _emit(args, "chain.csv", text, "chain", vars_config(args))


def cmd_shift(args):
    transition = Transition(oscillator_strength_total=args.a0_mhz)
    spectrum = two_ion_manifold(args.separation_um, transition, include_near_field=args.near_field)
    payload = {
        "separation_um": args.separation_um,
        "kr": transition.wavenumber * args.separation_um,
        "near_field": args.near_field,
        "delta_mhz": far_field_shift(args.separation_um, transition),
        "eigenvalues_mhz": [float(x) for x in spectrum.eigenvalues],
        "observed_shift_khz": {
            pol.value: observed_pair_shift(spectrum, pol) * 1e3 for pol in Polarization
        },
    }
    _emit(args, "shift.json", to_json(payload), "shift", vars_config(args))


def cmd_curve(args):
    transition = Transition(oscillator_strength_total=args.a0_mhz)
    trap = TrapConfig(args.ions, 0.5, args.mass_u, args.charge)
    thermal = None
    if args.thermal_sigma_um is not None:
        thermal = ThermalModel.common(args.thermal_sigma_um, args.ions, args.samples)
    curve = shift_curve(trap, (args.spacing_min, args.spacing_max), args.points, transition,
                        Polarization.parse(args.pol), thermal, seed=_seed(args))
    rows = []
    for i, r in enumerate(curve.spacings):
        sm = None if curve.smeared_shift is None else float(curve.smeared_shift[i])
        se = None if curve.smeared_stderr is None else float(curve.smeared_stderr[i])
        rows.append((float(r), float(curve.predicted_shift[i]), sm, se))
    text = csv_text(("spacing_um", "shift_khz", "smeared_shift_khz", "stderr_khz"), rows)
    _emit(args, "curve.csv", text, "curve", vars_config(args), seed=_seed(args))


def _allan_csv(values, dt, min_windows):
    taus = octave_taus(len(values), dt, min_windows)
    sig = allan_deviation(values, dt, taus)
    return taus, sig, csv_text(("tau_s", "sigma_mhz"), zip(map(float, taus), map(float, sig)))


def cmd_simulate(args):
    cfg = parse_config(args.config)
    if args.seed is not None:
        cfg = cfg.replace(seed=args.seed)
    manifest = RunManifest(__version__, "simulate", cfg["seed"], cfg.echo())
    exp = cfg.experiment()
    transition = cfg.transition()
    pol = cfg.polarization
    truth = true_centers(exp, cfg.trap_template(), transition, pol, cfg["line_center_mhz"])
    series = simulate_series(truth, exp, workers=args.workers)
    a, b = cfg["compare_settings"]
    rel = relative_shift(series, a, b)
    abs_vals, abs_dt = absolute_track(series, a)
    diff_vals, diff_dt = difference_track(series, a, b)
    t_abs, s_abs, allan_abs = _allan_csv(abs_vals, abs_dt, cfg["allan_min_windows"])
    t_diff, s_diff, allan_diff = _allan_csv(diff_vals, diff_dt, cfg["allan_min_windows"])

    summary = {
        "seed": cfg["seed"],
        "config": cfg.echo(),
        "kernel_backend": _kernels.BACKEND,
        "records": len(series),
        "skipped": series.skipped,
        "pulses_per_point": exp.pulses_per_point,
        "expected_side_photons": exp.expected_side_photons,
        "mean_photons_per_measurement": float(np.mean(series.photons)),
        "true_centers_mhz": [float(x) for x in truth],
        "relative_shift": {
            "settings": [a, b],
            "injected_khz": float(truth[a] - truth[b]) * 1e3,
            "mean_khz": rel.mean * 1e3,
            "stderr_khz": rel.stderr * 1e3,
            "std_mhz": rel.std,
            "count": rel.count,
            "shot_noise_std_mhz": shot_noise_sigma(exp.linewidth, exp.expected_side_photons),
        },
        "allan": {
            "absolute_slope": loglog_slope(t_abs, s_abs),
            "absolute_min_khz": float(np.min(s_abs)) * 1e3,
            "difference_slope": loglog_slope(t_diff, s_diff),
            "difference_final_khz": float(s_diff[-1]) * 1e3,
        },
    }
    files = {"series.csv": series.to_csv()}
    if len(exp.distance_settings) >= 2:
        offs, errs = setting_offsets(series)
        theory = predicted_shifts(exp.distance_settings, cfg.trap_template(), transition, pol)
        anchored = anchor_mean(offs * 1e3, theory)
        summary["per_setting"] = {
            "spacing_um": list(exp.distance_settings),
            "theory_khz": [float(x) for x in theory],
            "anchored_khz": [float(x) for x in anchored],
            "stderr_khz": [float(x) for x in errs * 1e3],
            "rms_vs_theory_khz": float(np.sqrt(np.mean((anchored - theory) ** 2))),
        }
        if len(exp.distance_settings) >= 3 and pol is Polarization.PerpendicularToAxis:
            fit = fit_oscillator_strength(anchored, errs * 1e3, exp.distance_settings, cfg.trap_template(),
                                          transition, pol)
            summary["fit"] = {"a0_mhz": fit.a0, "stderr_mhz": fit.stderr, "chi2": fit.chi2, "dof": fit.dof,
                              "residual_rms_khz": fit.residual_rms}
    files["summary.json"] = to_json(summary)
    files["allan.csv"] = allan_diff
    files["allan_absolute.csv"] = allan_abs
    files["histogram.csv"] = csv_text(
        ("bin_center_mhz", "count"),
        zip(map(float, rel.histogram.centers), map(int, rel.histogram.counts)),
    )
    out_dir = args.out_dir or "."
    emit_outputs(out_dir, files, manifest)
    _say(args, f"relative shift {rel.mean * 1e3:.2f} +- {rel.stderr * 1e3:.2f} kHz "
               f"({rel.count} pairs, {series.skipped} skipped); outputs in {out_dir}")


def cmd_allan(args):
    text = Path(args.series).read_text(encoding="utf-8")
    series = MeasurementSeries.from_csv(text, args.dwell_s)
    if args.reference is None:
        values, dt = absolute_track(series, args.setting)
    else:
        values, dt = difference_track(series, args.setting, args.reference)
    _, _, out = _allan_csv(values, dt, args.min_windows)
    _emit(args, "allan.csv", out, "allan", vars_config(args))


def cmd_fit(args):
    import csv

    rows = list(csv.DictReader(Path(args.data).read_text(encoding="utf-8").splitlines()))
    try:
        r = np.array([float(x["spacing_um"]) for x in rows])
        y = np.array([float(x["shift_khz"]) for x in rows])
        s = np.array([float(x["sigma_khz"]) for x in rows])
    except (KeyError, ValueError) as exc:
        raise CoopShiftError(f"fit data needs columns spacing_um,shift_khz,sigma_khz: {exc}") from None
    trap = TrapConfig(args.ions, 0.5, args.mass_u, args.charge)
    transition = Transition(oscillator_strength_total=args.a0_mhz)
    pol = Polarization.parse(args.pol)
    fit = fit_oscillator_strength(y, s, r, trap, transition, pol)
    theory = predicted_shifts(r, trap, transition, pol)
    anchored = anchor_mean(y, theory)
    payload = {
        "a0_mhz": fit.a0,
        "stderr_mhz": fit.stderr,
        "chi2": fit.chi2,
        "dof": fit.dof,
        "residual_rms_khz": fit.residual_rms,
        "rms_vs_reference_theory_khz": float(np.sqrt(np.mean((anchored - theory) ** 2))),
        "points": len(r),
    }
    _emit(args, "fit.json", to_json(payload), "fit", vars_config(args))


def vars_config(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("func",) and not callable(v)}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="RNG seed (overrides config)")
    common.add_argument("--out-dir", default=None, help="write outputs and manifest.json here instead of stdout")
    common.add_argument("--quiet", action="store_true", help="suppress progress messages")

    species = argparse.ArgumentParser(add_help=False)
    species.add_argument("--mass-u", type=float, default=SR88_MASS_U, help="ion mass in u (default 88Sr+)")
    species.add_argument("--charge", type=int, default=1, help="ion charge in e")

    line = argparse.ArgumentParser(add_help=False)
    line.add_argument("--a0-mhz", type=float, default=Transition().oscillator_strength_total,
                      help="total oscillator strength A0 in MHz")

    p = argparse.ArgumentParser(prog="coopshift", description=__doc__)
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("chain", parents=[common, species], help="equilibrium ion positions (CSV)")
    s.add_argument("--ions", type=int, required=True, help="number of ions N")
    s.add_argument("--axial-freq-mhz", type=float, required=True, help="axial COM frequency in MHz")
    s.set_defaults(func=cmd_chain)

    s = sub.add_parser("shift", parents=[common, line], help="pair shift and two-ion eigenvalues (JSON)")
    s.add_argument("--separation-um", type=float, required=True, help="ion separation in um")
    s.add_argument("--near-field", action="store_true", help="include the 1/(kr)^2 and 1/(kr)^3 terms")
    s.set_defaults(func=cmd_shift)

    s = sub.add_parser("curve", parents=[common, species, line], help="shift versus inner-pair spacing (CSV)")
    s.add_argument("--ions", type=int, required=True, help="number of ions M")
    s.add_argument("--spacing-min", type=float, required=True, help="smallest inner-pair spacing (um)")
    s.add_argument("--spacing-max", type=float, required=True, help="largest inner-pair spacing (um)")
    s.add_argument("--points", type=int, required=True, help="number of spacings")
    s.add_argument("--pol", choices=("perp", "par"), default="perp", help="probe polarization")
    s.add_argument("--thermal-sigma-um", type=float, default=None, help="thermal position spread per ion (um)")
    s.add_argument("--samples", type=int, default=20000, help="Monte Carlo draws per spacing")
    s.set_defaults(func=cmd_curve)

    s = sub.add_parser(
        "simulate", parents=[common],
        help="virtual interlaced experiment",
        description="Run the virtual experiment. Writes series.csv, summary.json, allan.csv, "
                    "allan_absolute.csv, histogram.csv and manifest.json.",
        epilog="config keys (one 'key = value' per line, '#' comments):\n" + describe_keys(),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    s.add_argument("--config", required=True, help="flat key = value config file")
    s.add_argument("--workers", type=int, default=1, help="threads for block simulation")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("allan", parents=[common], help="Allan deviation of a series.csv track (CSV)")
    s.add_argument("--series", required=True, help="series.csv from simulate")
    s.add_argument("--setting", type=int, default=0, help="setting index of the track")
    s.add_argument("--reference", type=int, default=None, help="if given, analyze setting - reference differences")
    s.add_argument("--dwell-s", type=float, default=None, help="dwell per block (s); inferred if omitted")
    s.add_argument("--min-windows", type=int, default=8, help="minimum windows per tau")
    s.set_defaults(func=cmd_allan)

    s = sub.add_parser("fit", parents=[common, species, line], help="fit A0 to relative shift data (JSON)")
    s.add_argument("--data", required=True, help="CSV with spacing_um,shift_khz,sigma_khz")
    s.add_argument("--ions", type=int, default=2, help="number of ions M")
    s.add_argument("--pol", choices=("perp", "par"), default="perp", help="probe polarization")
    s.set_defaults(func=cmd_fit)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except (CoopShiftError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
