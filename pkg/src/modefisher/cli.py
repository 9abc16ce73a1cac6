"""Command-line interface: every computation, plus the data behind each figure.

Tables go to ``--out`` (or standard output) as CSV with 12 significant
digits, or as JSON ``{"columns": [...], "data": {name: [values]}}``.
Exit status: 0 on success, 1 on a numerical failure, 2 on a usage error.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ModeFisherError, NonSincError
from .estimation import load_config, run_study
from .export import format_csv, write_csv, write_json
from .fisher import (
    cumulative_fisher,
    direct_imaging_fisher,
    fisher_curve,
    plane_wave_fisher,
    quantum_fisher,
    sinc_per_mode_fisher_table,
)
from .mode_builder import (
    build_adapted_modes,
    build_hermite_gauss_modes,
    build_sinc_closed_form_modes,
)
from .psf_models import PsfModel, load_psf_csv, make_gaussian_psf, make_sinc_psf

DEFAULT_HG_SIGMA = float(np.pi)
BASES = ("adapted", "hermite_gauss")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}")


def _positive(text: str) -> float:
    v = float(text)
    if not np.isfinite(v) or v <= 0:
        raise argparse.ArgumentTypeError(f"must be a positive number, got {text}")
    return v


def _nonneg(text: str) -> float:
    v = float(text)
    if not np.isfinite(v) or v < 0:
        raise argparse.ArgumentTypeError(f"must be a nonnegative number, got {text}")
    return v


def _count(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {text}")
    return v


def _psf_arg(text: str) -> str:
    if text in ("gaussian", "sinc") or (text.startswith("file:") and len(text) > 5):
        return text
    raise argparse.ArgumentTypeError("expected gaussian, sinc or file:PATH")


# --- argument groups ----------------------------------------------------------

def _add_psf(p, default="sinc"):
    p.add_argument("--psf", type=_psf_arg, default=default,
                   help=f"gaussian, sinc or file:PATH to an x,amplitude CSV (default: {default})")
    p.add_argument("--sigma", type=_positive, default=1.0,
                   help="Gaussian PSF intensity standard deviation (default: 1)")


def _add_output(p):
    p.add_argument("--out", type=Path, default=None, help="output file (default: standard output)")
    p.add_argument("--format", choices=("csv", "json"), default="csv", help="table format (default: csv)")


def _add_s_grid(p, s_max=15.0, steps=151):
    p.add_argument("--s-min", type=_nonneg, default=0.0, help="smallest separation (default: 0)")
    p.add_argument("--s-max", type=_nonneg, default=s_max, help=f"largest separation (default: {s_max:g})")
    p.add_argument("--s-steps", type=_count, default=steps, help=f"number of separations (default: {steps})")


def _add_basis(p, n_modes=10):
    p.add_argument("--basis", choices=BASES, default="adapted", help="measurement basis (default: adapted)")
    p.add_argument("--n-modes", type=_count, default=n_modes, help=f"number of modes (default: {n_modes})")
    p.add_argument("--hg-sigma", type=_positive, default=DEFAULT_HG_SIGMA,
                   help="Hermite-Gauss basis width (default: pi)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="modefisher", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("qfi", help="print the quantum Fisher information of a PSF")
    _add_psf(p)
    _add_output(p)

    p = sub.add_parser("modes", help="export measurement modes sampled in position")
    _add_psf(p)
    p.add_argument("--basis", choices=BASES + ("sinc_closed_form",), default="adapted",
                   help="mode family (default: adapted)")
    p.add_argument("--n-modes", type=_count, default=4, help="number of modes (default: 4)")
    p.add_argument("--hg-sigma", type=_positive, default=DEFAULT_HG_SIGMA,
                   help="Hermite-Gauss basis width (default: pi)")
    p.add_argument("--x-max", type=_positive, default=None,
                   help="only write nodes with |x| <= X_MAX (default: whole grid)")
    p.add_argument("--every", type=_count, default=1, help="write every k-th node (default: 1)")
    _add_output(p)

    p = sub.add_parser("fisher", help="per-mode, direct-imaging and quantum Fisher versus separation")
    _add_psf(p)
    _add_basis(p)
    _add_s_grid(p)
    p.add_argument("--depth", type=_count, default=None,
                   help="modes summed in the cumulative_D column (default: --n-modes)")
    _add_output(p)

    p = sub.add_parser("cumulative", help="cumulative Fisher versus number of measured modes")
    _add_psf(p)
    _add_basis(p, n_modes=20)
    p.add_argument("--s", type=_nonneg, nargs="+", default=[1.0], help="separations (default: 1)")
    _add_output(p)

    p = sub.add_parser("planewave", help="Fisher of Fourier sine/cosine detection (sinc PSF only)")
    _add_psf(p)
    _add_s_grid(p)
    _add_output(p)

    p = sub.add_parser("simulate", help="Monte Carlo estimation study from a JSON/TOML config")
    p.add_argument("--config", type=Path, required=True, help="experiment config (.json or .toml)")
    p.add_argument("--seed", type=int, default=None, help="override the config seed")
    p.add_argument("--out", type=Path, required=True,
                   help="report JSON path; estimates go to <stem>_estimates.csv beside it")

    p = sub.add_parser("figure1", help="first slit-adapted modes, numerical and closed form")
    p.add_argument("--n-modes", type=_count, default=4, help="number of modes (default: 4)")
    p.add_argument("--x-max", type=_positive, default=20.0, help="half-width written (default: 20)")
    p.add_argument("--every", type=_count, default=1, help="write every k-th node (default: 1)")
    _add_output(p)

    p = sub.add_parser("figure2", help="cumulative Fisher versus D, adapted vs Hermite-Gauss, sinc PSF")
    p.add_argument("--s", type=_nonneg, default=1.0, help="separation (default: 1)")
    p.add_argument("--n-modes", type=_count, default=150, help="largest D (default: 150)")
    p.add_argument("--hg-sigma", type=_positive, default=DEFAULT_HG_SIGMA,
                   help="Hermite-Gauss basis width (default: pi)")
    _add_output(p)

    p = sub.add_parser("figure3", help="Fourier sine/cosine Fisher versus separation, sinc PSF")
    _add_s_grid(p)
    _add_output(p)
    return parser


# --- helpers ------------------------------------------------------------------

def _make_psf(args) -> PsfModel:
    if args.psf == "sinc":
        return make_sinc_psf()
    if args.psf == "gaussian":
        return make_gaussian_psf(args.sigma)
    return load_psf_csv(args.psf[5:])


def _modes(psf: PsfModel, basis: str, count: int, hg_sigma: float):
    if basis == "adapted":
        return build_adapted_modes(psf, count)
    return build_hermite_gauss_modes(hg_sigma, count, p=psf.p, p_weights=psf.p_weights)


def _s_grid(args) -> np.ndarray:
    if args.s_max < args.s_min:
        raise UsageError("--s-max must not be below --s-min")
    return np.linspace(args.s_min, args.s_max, args.s_steps)


def _emit(args, columns: list[str], data: list) -> None:
    """Write equal-length columns as CSV or JSON to --out or stdout."""
    cols = [np.asarray(c) for c in data]
    if args.format == "json":
        obj = {"columns": columns, "data": {n: c.tolist() for n, c in zip(columns, cols)}}
        if args.out is None:
            json.dump(obj, sys.stdout, indent=2, sort_keys=True)
            sys.stdout.write("\n")
        else:
            write_json(args.out, obj)
        return
    rows = zip(*(c.tolist() for c in cols))
    if args.out is None:
        format_csv(sys.stdout, columns, rows)
    else:
        write_csv(args.out, columns, rows)


def _window(x: np.ndarray, x_max: float | None, every: int) -> np.ndarray:
    """Indices of a mirror-symmetric subgrid: every k-th node outward from the centre."""
    n = x.size
    right = np.arange(n // 2, n, every)
    idx = np.union1d(n - 1 - right, right)
    if x_max is not None:
        idx = idx[np.abs(x[idx]) <= x_max]
    return idx


# --- subcommands ----------------------------------------------------------------

def cmd_qfi(args) -> None:
    q = quantum_fisher(_make_psf(args))
    print(f"{q:.6g}")
    if args.out is not None:
        _emit(args, ["qfi"], [[q]])


def cmd_modes(args) -> None:
    if args.basis == "sinc_closed_form":
        modes = build_sinc_closed_form_modes(args.n_modes)
    elif args.basis == "hermite_gauss":
        modes = build_hermite_gauss_modes(args.hg_sigma, args.n_modes)
    else:
        modes = build_adapted_modes(_make_psf(args), args.n_modes)
    sel = _window(modes.x, args.x_max, args.every)
    names = ["x"] + [f"phi_{n}" for n in range(len(modes))]
    _emit(args, names, [modes.x[sel]] + [m[sel] for m in modes.modes_x])


def cmd_fisher(args) -> None:
    psf = _make_psf(args)
    s = _s_grid(args)
    depth = args.depth or args.n_modes
    if depth > args.n_modes:
        raise UsageError("--depth must not exceed --n-modes")
    curve = fisher_curve(psf, _modes(psf, args.basis, args.n_modes, args.hg_sigma), s, with_direct=True)
    names = ["s", "F_direct", "F_quantum"] + [f"F_mode_{n}" for n in range(curve.n_modes)]
    names += [f"cumulative_{depth}", "tail"]
    data = [s, curve.direct, np.full(s.size, curve.quantum)] + list(curve.per_mode.T)
    data += [cumulative_fisher(curve, depth), curve.tail]
    _emit(args, names, data)


def cmd_cumulative(args) -> None:
    psf = _make_psf(args)
    s = np.asarray(args.s, dtype=float)
    curve = fisher_curve(psf, _modes(psf, args.basis, args.n_modes, args.hg_sigma), s)
    d = np.arange(1, curve.n_modes + 1)
    cum = curve.cumulative  # (len(s), n_modes)
    _emit(
        args,
        ["s", "D", "F_cumulative", "fraction"],
        [np.repeat(s, d.size), np.tile(d, s.size), cum.ravel(), cum.ravel() / curve.quantum],
    )


def _planewave_table(psf: PsfModel, s: np.ndarray):
    sine = [plane_wave_fisher(psf, v, "sine") for v in s]
    cosine = [plane_wave_fisher(psf, v, "cosine") for v in s]
    fs = np.array([r.derived for r in sine])
    fc = np.array([r.derived for r in cosine])
    return [s, fs, fc, fs + fc,
            np.array([r.as_printed for r in sine]), np.array([r.as_printed for r in cosine])]


PLANEWAVE_COLUMNS = ["s", "F_sine", "F_cosine", "F_total", "F_sine_as_printed", "F_cosine_as_printed"]


def cmd_planewave(args) -> None:
    psf = _make_psf(args)
    if psf.kind != "sinc":
        raise NonSincError("plane-wave Fisher is defined here for the sinc PSF only")
    _emit(args, PLANEWAVE_COLUMNS, _planewave_table(psf, _s_grid(args)))


def cmd_simulate(args) -> None:
    config = load_config(args.config)
    if args.seed is not None:
        from dataclasses import replace

        config = replace(config, seed=args.seed, source={**config.source, "seed": args.seed})
    report = run_study(config, workers=os.cpu_count())
    out = Path(args.out)
    report.write(out, out.with_name(f"{out.stem}_estimates.csv"))
    print(f"efficiency {report.efficiency:.6g}  variance {report.empirical_variance:.6g}  "
          f"crlb {report.crlb:.6g}")


def cmd_figure1(args) -> None:
    psf = make_sinc_psf()
    num = build_adapted_modes(psf, args.n_modes)
    ref = build_sinc_closed_form_modes(args.n_modes, psf.grid)
    sel = _window(psf.x, args.x_max, args.every)
    n = range(args.n_modes)
    names = ["x"] + [f"phi_{k}" for k in n] + [f"phi_{k}_closed_form" for k in n]
    data = [psf.x[sel]] + [m[sel] for m in num.modes_x] + [m[sel] for m in ref.modes_x]
    _emit(args, names, data)


def cmd_figure2(args) -> None:
    psf = make_sinc_psf()
    s = np.array([args.s])
    d = np.arange(1, args.n_modes + 1)
    adapted = np.cumsum(sinc_per_mode_fisher_table(args.n_modes - 1, s)[0])
    hg = build_hermite_gauss_modes(args.hg_sigma, args.n_modes, p=psf.p, p_weights=psf.p_weights)
    hg_cum = fisher_curve(psf, hg, s).cumulative[0]
    q = quantum_fisher(psf)
    _emit(
        args,
        ["D", "F_adapted", "F_hermite_gauss", "F_quantum", "threshold_98_5"],
        [d, adapted, hg_cum, np.full(d.size, q), np.full(d.size, 0.985 * q)],
    )


def cmd_figure3(args) -> None:
    psf = make_sinc_psf()
    s = _s_grid(args)
    table = _planewave_table(psf, s)
    direct = np.array([direct_imaging_fisher(psf, v) for v in s])
    _emit(args, PLANEWAVE_COLUMNS + ["F_direct", "F_quantum"],
          table + [direct, np.full(s.size, quantum_fisher(psf))])


COMMANDS = {
    "qfi": cmd_qfi,
    "modes": cmd_modes,
    "fisher": cmd_fisher,
    "cumulative": cmd_cumulative,
    "planewave": cmd_planewave,
    "simulate": cmd_simulate,
    "figure1": cmd_figure1,
    "figure2": cmd_figure2,
    "figure3": cmd_figure3,
}


def run(argv=None) -> int:
    """Parse ``argv`` and run one subcommand; returns the exit status."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        COMMANDS[args.command](args)
    except SystemExit as exc:  # --help and --version
        return int(exc.code or 0)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 2
    except ModeFisherError as exc:
        print(f"modefisher: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except BrokenPipeError:
        raise
    except (ValueError, OSError) as exc:
        code = 1 if isinstance(exc, OSError) else 2
        print(f"modefisher: {exc}", file=sys.stderr)
        return code
    return 0


def main() -> None:
    try:
        code = run()
        sys.stdout.flush()
    except BrokenPipeError:
        # reader went away (e.g. piped into head); silence the shutdown flush
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        code = 0
    sys.exit(code)


__all__ = ["build_parser", "main", "run"]
