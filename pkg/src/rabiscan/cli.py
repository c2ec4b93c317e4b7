"""Command-line surface: single-point spectra, 2-D scans, boundary
detection, and wavefunction export.

Couplings are given in units of g_s = sqrt(omega*Omega)/2 by default
(--g-unit abs switches to bare units); omega and g are in units of
Omega = 1.  Exit codes: 0 success, 1 configuration error, 2 completed
scan with flagged per-point failures.
"""

import argparse
import dataclasses
import json
import math
import os
import sys

from . import boundaries as bnd
from . import observables as obs
from . import scanner
from .eigensolver import lowest_k, solve_point
from .model import Truncation, build_hamiltonian, build_params
from .realspace import GridConfig, count_zeros, spinor_wavefunction, write_wave_csv

__all__ = ["main", "build_parser"]


def _add_truncation_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n-max", type=int, default=None, help="boson cutoff (adaptive floor by default)")
    p.add_argument(
        "--fixed-truncation",
        action="store_true",
        help="use --n-max verbatim instead of the adaptive rule",
    )
    p.add_argument(
        "--allow-below-minimum",
        action="store_true",
        help="permit a fixed n_max below the adaptive floor",
    )


def _truncation_from(args) -> Truncation:
    return Truncation(
        n_max=args.n_max,
        policy="fixed" if args.fixed_truncation else "adaptive",
        allow_below_minimum=args.allow_below_minimum,
    )


def _abs_coupling(args, params_free_g: float, omega: float, Omega: float) -> float:
    if args.g_unit == "gs":
        return params_free_g * 0.5 * math.sqrt(omega * Omega)
    return params_free_g


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rabiscan",
        description="exact-diagonalization scanner for the anisotropic Rabi model",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("spectrum", help="energies and observables at one point")
    sp.add_argument("--omega", type=float, required=True)
    sp.add_argument("--Omega", type=float, default=1.0)
    sp.add_argument("--g", type=float, required=True)
    sp.add_argument("--g-unit", choices=("gs", "abs"), default="gs")
    sp.add_argument("--lam", type=float, required=True)
    sp.add_argument("--k", type=int, default=6, help="number of levels to print")
    _add_truncation_flags(sp)

    sc = sub.add_parser("scan", help="2-D (lambda, g) grid scan")
    sc.add_argument("--preset", help="named figure preset (see `rabiscan presets`)")
    sc.add_argument("--omega", type=float)
    sc.add_argument("--Omega", type=float, default=1.0)
    sc.add_argument("--lambda-min", type=float, dest="lambda_min")
    sc.add_argument("--lambda-max", type=float, dest="lambda_max")
    sc.add_argument("--lambda-steps", type=int, dest="lambda_steps")
    sc.add_argument("--g-min", type=float, help="in g_s units")
    sc.add_argument("--g-max", type=float, help="in g_s units")
    sc.add_argument("--g-steps", type=int)
    sc.add_argument("--skip", action="append", default=[], choices=("n_z", "duality"),
                    help="drop an expensive per-point quantity")
    sc.add_argument("--workers", type=int, default=None)
    sc.add_argument("--out", default="scan.csv")
    sc.add_argument("--format", choices=("csv", "json"), default=None)
    sc.add_argument("--config", help="JSON config file; keys override flags")
    _add_truncation_flags(sc)

    bd = sub.add_parser("boundary", help="parity-crossing detection per lambda slice")
    bd.add_argument("--omega", type=float, required=True)
    bd.add_argument("--Omega", type=float, default=1.0)
    bd.add_argument("--lam", type=float, action="append", required=True,
                    help="repeatable; one slice per value")
    bd.add_argument("--g-min", type=float, required=True, help="in g_s units")
    bd.add_argument("--g-max", type=float, required=True, help="in g_s units")
    bd.add_argument("--coarse-steps", type=int, default=25)
    bd.add_argument("--u1", action="store_true", help="also run the heuristic U(1) detector")
    bd.add_argument("--out", default=None, help="boundary CSV path")

    wv = sub.add_parser("wave", help="export ground-state spinor wavefunctions")
    wv.add_argument("--omega", type=float, required=True)
    wv.add_argument("--Omega", type=float, default=1.0)
    wv.add_argument("--g", type=float, required=True)
    wv.add_argument("--g-unit", choices=("gs", "abs"), default="gs")
    wv.add_argument("--lam", type=float)
    wv.add_argument("--space", choices=("position", "momentum"), default="position")
    wv.add_argument("--step", type=float, default=0.02)
    wv.add_argument("--out", default="wave.csv")
    wv.add_argument("--sweep", help="lambda sweep 'min,max,steps'; writes one file per value")
    wv.add_argument("--out-dir", default="waves", help="directory for sweep output")
    _add_truncation_flags(wv)

    sub.add_parser("presets", help="list the named figure presets")
    return parser


def _cmd_spectrum(args) -> int:
    g = _abs_coupling(args, args.g, args.omega, args.Omega)
    params = build_params(args.omega, args.Omega, g, args.lam)
    trunc = _truncation_from(args)
    H = build_hamiltonian(params, trunc)
    k = min(args.k, H.dim)
    solution = lowest_k(H, k)
    point = solve_point(params, trunc)
    result = obs.evaluate(point.ground, params)

    print(f"omega={params.omega} Omega={params.Omega} g={params.g} (g/g_s={params.g / params.g_s:.6g}) lambda={params.lam}")
    print(f"n_max={H.n_max} dim={H.dim}")
    for i, e in enumerate(solution.energies):
        print(f"E{i} = {float(e)!r}")
    print(f"gap = {float(point.gap)!r}   parity = {point.parity:+d}")
    print(f"<sigma_x> = {result.sigma_x:.8f}   <P_x> = {result.p_x:.8f}   <P_sigma> = {result.p_sigma:.8f}")
    a_text = "n/a (g=0)" if result.a_norm is None else f"{result.a_norm:.8f}"
    print(f"<a+a+> = {result.a_dag_a_dag:.8f}   A = {a_text}")
    print(f"<x^2> = {result.x2:.8f}   <p^2> = {result.p2:.8f}")
    print(f"excitation = {result.excitation:.8f}   |D| = {result.duality_mod:.8f}")
    return 0


def _scan_config(args) -> scanner.ScanConfig:
    overrides = {}
    if args.config:
        with open(args.config) as fh:
            overrides = json.load(fh)

    def pick(key, flag_value, default=None):
        if key in overrides:
            return overrides[key]
        return flag_value if flag_value is not None else default

    if args.preset:
        config = scanner.preset(args.preset)
        lam_axis = config.lam_axis
        g_axis = config.g_axis
        omega = config.omega
        Omega = config.Omega
    else:
        lam_axis = g_axis = None
        omega = Omega = None

    omega = pick("omega", args.omega, omega)
    Omega = pick("Omega", args.Omega, Omega or 1.0)
    if omega is None:
        raise ValueError("omega is required (flag, preset, or config file)")

    lam_axis = scanner.AxisSpec(
        lo=pick("lambda_min", args.lambda_min, lam_axis.lo if lam_axis else None),
        hi=pick("lambda_max", args.lambda_max, lam_axis.hi if lam_axis else None),
        steps=pick("lambda_steps", args.lambda_steps, lam_axis.steps if lam_axis else None),
    )
    g_axis = scanner.AxisSpec(
        lo=pick("g_min", args.g_min, g_axis.lo if g_axis else None),
        hi=pick("g_max", args.g_max, g_axis.hi if g_axis else None),
        steps=pick("g_steps", args.g_steps, g_axis.steps if g_axis else None),
    )
    if None in (lam_axis.lo, lam_axis.hi, lam_axis.steps, g_axis.lo, g_axis.hi, g_axis.steps):
        raise ValueError("scan axes are underspecified; give a preset or full ranges")

    selection = list(scanner.ALL_OBSERVABLES)
    for skipped in set(args.skip) | set(overrides.get("skip", [])):
        if skipped in selection:
            selection.remove(skipped)

    return scanner.ScanConfig(
        omega=omega,
        Omega=Omega,
        lam_axis=lam_axis,
        g_axis=g_axis,
        policy="fixed" if args.fixed_truncation else pick("policy", None, "adaptive"),
        n_max=pick("n_max", args.n_max),
        allow_below_minimum=args.allow_below_minimum or overrides.get("allow_below_minimum", False),
        selection=tuple(selection),
        workers=pick("workers", args.workers),
    )


def _cmd_scan(args) -> int:
    config = _scan_config(args)
    dataset = scanner.scan2d(config)
    fmt = args.format or ("json" if str(args.out).endswith(".json") else "csv")
    scanner.emit(dataset, args.out, fmt)
    failures = sum(1 for r in dataset.records if r.status != "ok")
    print(f"wrote {args.out}: {len(dataset.records)} points, {failures} flagged")
    return 2 if failures else 0


def _cmd_boundary(args) -> int:
    g_s = 0.5 * math.sqrt(args.omega * args.Omega)
    template = build_params(args.omega, args.Omega, 0.0, 0.0)
    curves = []
    for lam in args.lam:
        crossings = bnd.detect_crossings(
            template, lam, (args.g_min * g_s, args.g_max * g_s), coarse_steps=args.coarse_steps
        )
        print(f"lambda={lam}: crossings at g/g_s = "
              + (", ".join(f"{g / g_s:.6f}" for g in crossings) if crossings else "none"))
        if crossings:
            tol = 1e-6 * g_s
            curves.append(
                bnd.BoundaryCurve(
                    kind="topological",
                    points=[(lam, g) for g in crossings],
                    method="bisection",
                    residuals=[tol] * len(crossings),
                )
            )
        if args.u1:
            g_star = bnd.detect_u1_breaking(template, lam, (args.g_min * g_s, args.g_max * g_s))
            if g_star is not None:
                print(f"lambda={lam}: U(1) heuristic threshold at g/g_s = {g_star / g_s:.6f}")
                curves.append(
                    bnd.BoundaryCurve(kind="u1_breaking", points=[(lam, g_star)], method="bisection")
                )
    if args.out:
        bnd.boundaries_to_csv(curves, args.out, template)
        print(f"wrote {args.out}")
    return 0


def _cmd_wave(args) -> int:
    trunc = _truncation_from(args)
    grid = GridConfig(step=args.step)

    def export_one(lam: float, path: str) -> None:
        g = _abs_coupling(args, args.g, args.omega, args.Omega)
        params = build_params(args.omega, args.Omega, g, lam)
        point = solve_point(params, trunc)
        wave = spinor_wavefunction(point.ground, params, grid, space=args.space)
        write_wave_csv(wave, path)
        zeros = count_zeros(wave)
        print(f"lambda={lam}: wrote {path} (n_z={zeros.n_z}, parity={point.parity:+d})")

    if args.sweep:
        lo, hi, steps = args.sweep.split(",")
        values = [float(lo) + (float(hi) - float(lo)) * i / (max(int(steps) - 1, 1)) for i in range(int(steps))]
        os.makedirs(args.out_dir, exist_ok=True)
        for lam in values:
            export_one(lam, os.path.join(args.out_dir, f"wave_lam{lam:+.4f}.csv"))
    else:
        if args.lam is None:
            raise ValueError("--lam is required without --sweep")
        export_one(args.lam, args.out)
    return 0


def _cmd_presets(_args) -> int:
    for name in sorted(scanner.PRESETS):
        config, note = scanner.PRESETS[name]
        lam, g = config.lam_axis, config.g_axis
        print(
            f"{name}: omega={config.omega}  lambda [{lam.lo}, {lam.hi}] x{lam.steps}"
            f"  g/g_s [{g.lo}, {g.hi}] x{g.steps}  -- {note}"
        )
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "spectrum": _cmd_spectrum,
        "scan": _cmd_scan,
        "boundary": _cmd_boundary,
        "wave": _cmd_wave,
        "presets": _cmd_presets,
    }
    try:
        return handlers[args.command](args)
    except (ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
