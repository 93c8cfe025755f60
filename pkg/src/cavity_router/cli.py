"""
Command-line entry point.

Exit codes: 0 on success, 1 on a validation or usage error, 2 when a
verification or invariant check fails. Diagnostics go to stderr; data goes
to files (and, for ``points`` and ``dressed``, to stdout).
"""

from __future__ import annotations

import argparse
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .dressed import dressed_pair, extract_valley_widths, large_detuning_approx
from .model import CONFIG_KEYS, Port, RegimeWarning, ValidationError, load_config, parse_assignment, \
    system_from_mapping
from .oracle import VERIFY_COLUMNS, PropagationError, PropagationTooShort, decay_calibration, verify_sweep
from .scattering import special_points
from .selftest import run_selftest
from .sweep import (
    DEFAULT_1D_POINTS,
    DEFAULT_2D_POINTS,
    DEFAULT_SPAN,
    FIGURES,
    Axis,
    GridSpec,
    InvariantError,
    SweepTable,
    map_2d,
    overlay_curves,
    photon_number_scan,
    spectrum_1d,
)

EXIT_OK, EXIT_INVALID, EXIT_VERIFY = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    """Usage errors exit with the validation code rather than argparse's 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


class VerificationFailed(Exception):
    pass


def _err(msg: str):
    print(msg, file=sys.stderr)


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _common(p: argparse.ArgumentParser):
    p.add_argument("--config", type=Path, help="key = value parameter file")
    p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                   help=f"override one parameter (keys: {', '.join(CONFIG_KEYS)})")
    p.add_argument("--out", type=Path, default=Path("."), help="output directory")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--units", choices=("gamma", "absolute"), default="gamma",
                   help="rescale every frequency by the total rate (gamma) or use values as given")
    p.add_argument("--port", type=Port.parse, default=Port.R_A, help="input port, e.g. R_a, L_b")
    p.add_argument("--threads", type=int, default=None, help="worker threads (default ROUTER_THREADS)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cavity-router", description="Single-photon four-port router calculations.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("spectrum", help="coefficients against the photon detuning")
    _common(p)
    p.add_argument("--kmin", type=float, default=-DEFAULT_SPAN)
    p.add_argument("--kmax", type=float, default=DEFAULT_SPAN)
    p.add_argument("--points", type=int, default=DEFAULT_1D_POINTS)

    p = sub.add_parser("map2d", help="coefficients over (Delta_k_n, Delta_a)")
    _common(p)
    p.add_argument("--kmin", type=float, default=-DEFAULT_SPAN)
    p.add_argument("--kmax", type=float, default=DEFAULT_SPAN)
    p.add_argument("--kpoints", type=int, default=DEFAULT_2D_POINTS)
    p.add_argument("--amin", type=float, default=-DEFAULT_SPAN)
    p.add_argument("--amax", type=float, default=DEFAULT_SPAN)
    p.add_argument("--apoints", type=int, default=DEFAULT_2D_POINTS)

    p = sub.add_parser("nscan", help="coefficients against the cavity photon number")
    _common(p)
    p.add_argument("--nmax", type=int, default=50)
    p.add_argument("--delta-a", type=_float_list, default=None,
                   help="comma-separated Delta_a values (default: the configured one)")
    p.add_argument("--delta-k", type=float, default=0.0)

    p = sub.add_parser("dressed", help="dressed doublet and effective linewidths")
    _common(p)

    p = sub.add_parser("points", help="print the full-transmission line and pole roots")
    _common(p)

    p = sub.add_parser("verify", help="wavepacket oracle against the closed form")
    _common(p)
    p.add_argument("--carriers", type=_float_list, default=None,
                   help="comma-separated carrier detunings (default: five in [-2, 2] gamma)")
    p.add_argument("--tolerance", type=float, default=0.02)
    p.add_argument("--decay", action="store_true", help="also run the spontaneous-decay calibration")

    p = sub.add_parser("figure", help="write every dataset of one figure")
    _common(p)
    p.add_argument("figure_id", choices=sorted(FIGURES))

    p = sub.add_parser("selftest", help="run the invariant suite")
    p.add_argument("--threads", type=int, default=None)
    return parser


def _system(args):
    values = load_config(args.config) if args.config else {}
    for item in args.overrides:
        key, value = parse_assignment(item)
        values[key] = value
    system = system_from_mapping(values)
    return system.in_gamma_units() if args.units == "gamma" else system


def _write(table: SweepTable, args, stem: str) -> Path:
    path = table.write(args.out / f"{stem}.{args.format}", args.format)
    _err(f"wrote {path}")
    return path


def cmd_spectrum(args):
    system = _system(args)
    grid = GridSpec((Axis("Delta_k_n", args.kmin, args.kmax, args.points),), system, args.port)
    table = spectrum_1d(grid)
    _write(table, args, "spectrum")
    valleys = extract_valley_widths(table.column("Delta_k_n"), table.column("T_p"))
    for v in valleys:
        if v.truncated:
            _err(f"warning: truncated valley at Delta_k_n={v.center:g}")
    rows = np.array([v.as_row() for v in valleys]).reshape(-1, 3)
    _write(SweepTable(("center", "fwhm", "depth"), rows, {"kind": "valleys", **table.meta}), args, "valleys")


def cmd_map2d(args):
    system = _system(args)
    grid = GridSpec((Axis("Delta_k_n", args.kmin, args.kmax, args.kpoints),
                     Axis("Delta_a", args.amin, args.amax, args.apoints)), system, args.port)
    _write(map_2d(grid, args.threads), args, "map2d")
    pit, poles = overlay_curves(grid.axes[1].values(), system.cavity)
    _write(pit, args, "pit_line")
    _write(poles, args, "pole_curves")


def cmd_nscan(args):
    system = _system(args)
    if args.nmax < 0:
        raise ValidationError("must be non-negative", key="nmax")
    delta_a = args.delta_a if args.delta_a else [system.delta_a]
    table = photon_number_scan(system, np.arange(args.nmax + 1), delta_a, args.delta_k, args.port)
    _write(table, args, "nscan")


def cmd_dressed(args):
    system = _system(args)
    cav = system.cavity
    pair = dressed_pair(system.delta_a, cav.lam, cav.n, system.gamma)
    cols = ["E_plus", "E_minus", "Omega_n", "c_plus_2", "c_plus_3", "c_minus_2", "c_minus_3",
            "gamma_plus", "gamma_minus"]
    row = [pair.E_plus, pair.E_minus, pair.Omega_n, *pair.c_plus, *pair.c_minus,
           pair.gamma_plus, pair.gamma_minus]
    if pair.two_level:
        _err("note: n = 0, two-level limit (single bare level)")
    if system.delta_a > 0 and cav.n > 0:
        approx = large_detuning_approx(system.delta_a, cav.lam, cav.n, system.gamma)
        cols += ["gamma_plus_approx", "gamma_minus_approx", "mixing"]
        row += [approx.gamma_plus, approx.gamma_minus, approx.mixing]
    for name, value in zip(cols, row):
        print(f"{name} = {value!r}")
    table = SweepTable(tuple(cols), np.array([row]), {"kind": "dressed", "parameters": system.as_dict()})
    _write(table, args, "dressed")


def cmd_points(args):
    system = _system(args)
    sp = special_points(system.delta_a, system.cavity, system.gamma)
    print(f"pit_line = {sp.pit_line!r}")
    print(f"pole_roots = {sp.pole_roots[0]!r}, {sp.pole_roots[1]!r}")


def cmd_verify(args):
    system = _system(args)
    reports = verify_sweep(system, args.carriers, args.threads, args.tolerance)
    rows = [r for rep in reports for r in rep.rows()]
    table = SweepTable(VERIFY_COLUMNS, np.array(rows, dtype=float),
                       {"kind": "verify", "parameters": system.as_dict(), "tolerance": args.tolerance})
    _write(table, args, "verify")
    failed = []
    for rep in reports:
        status = "ok" if rep.passed else "FAIL"
        _err(f"carrier {rep.carrier:+.4f}: max |t_est - t| = {rep.max_error:.2e} "
             f"({len(rep.k)} modes, emitter {rep.emitter_population:.1e}) {status}")
        if not rep.passed:
            failed.append(f"carrier {rep.carrier:g}")
    if args.decay:
        decay = decay_calibration(system.gamma)
        ok = decay.max_relative_error < 0.01
        _err(f"decay calibration: max relative error {decay.max_relative_error:.2e} {'ok' if ok else 'FAIL'}")
        if not ok:
            failed.append("decay calibration")
    if failed:
        raise VerificationFailed("oracle mismatch at " + ", ".join(failed))


def cmd_figure(args):
    from .sweep import reproduce_figure

    for path in reproduce_figure(args.figure_id, args.out, args.format, args.threads):
        _err(f"wrote {path}")


def cmd_selftest(args):
    if not run_selftest(_err):
        raise VerificationFailed("selftest failed")


COMMANDS = {
    "spectrum": cmd_spectrum,
    "map2d": cmd_map2d,
    "nscan": cmd_nscan,
    "dressed": cmd_dressed,
    "points": cmd_points,
    "verify": cmd_verify,
    "figure": cmd_figure,
    "selftest": cmd_selftest,
}


def _showwarning(message, category, filename, lineno, file=None, line=None):
    _err(f"warning: {message}")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "threads", None) is not None and args.threads < 1:
        parser.error("--threads must be at least 1")
    with warnings.catch_warnings():
        warnings.simplefilter("always", RegimeWarning)
        warnings.showwarning = _showwarning
        try:
            COMMANDS[args.command](args)
        except ValidationError as exc:
            _err(f"validation error: {exc}")
            return EXIT_INVALID
        except (InvariantError, VerificationFailed, PropagationError, PropagationTooShort) as exc:
            _err(f"verification failed: {exc}")
            return EXIT_VERIFY
        except (ValueError, OSError) as exc:
            _err(f"error: {exc}")
            return EXIT_INVALID
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
