"""
Command-line front end.

    telegraph params CONFIG [--json] [--emit-config OUT]
    telegraph eval CONFIG --s-re X --s-im Y --d D --quantity Q [--json]
    telegraph sweep CONFIG --f-start F0 --f-stop F1 --points N --spacing {linear,log}
                    --sigma S --d D --quantities chain,bounds --out FILE [--full-matrices]
    telegraph verify CONFIG [--suite FILE] --out FILE

Exit codes: 0 success, 2 parse or validation error, 3 domain error,
4 verification failure, 1 any other numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from importlib import resources

import numpy as np

from . import verify
from .errors import DomainError, ParseError, TelegraphError, UnknownCheck, ValidationFailure
from .line import LineConstants, bound_params
from .netparams import (
    abcd_direct, abscissa, admittance, chain_matrix, impedance, lead_factor,
)

EXIT_OK, EXIT_ERROR, EXIT_PARSE, EXIT_DOMAIN, EXIT_VERIFY = 0, 1, 2, 3, 4
UNITS = "si_per_meter"
QUANTITIES = ("chain", "abcd", "admittance", "impedance", "bounds")
EVAL_QUANTITIES = ("chain", "abcd", "admittance", "impedance", "lead")
SEED_ENV = "TELEGRAPH_SEED"

_PARAM_UNITS = {
    "alpha": "1/s", "gamma": "1/s", "rho": "1/s",
    "c0": "ohm/m or S/m", "c1": "H/m or F/m",
    "kappa_lower": "1", "kappa_upper": "1", "theta": "1/s",
    "nu_lower": "m/s", "nu_upper": "m/s", "b": "H/m or F/m",
}


def example_config_path():
    """Path of the bundled three-conductor example line."""
    return str(resources.files("telegraph") / "data" / "example_line.json")


# --- config I/O --------------------------------------------------------------

def _matrix_field(doc, key, n, required):
    if key not in doc:
        if required:
            raise ParseError(f"config: missing field {key!r}")
        return np.zeros((n, n))
    rows = doc[key]
    if not isinstance(rows, list) or len(rows) != n:
        raise ParseError(f"config: field {key!r} must be a list of {n} rows")
    for i, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != n:
            raise ParseError(f"config: {key}[{i}] must be a list of {n} numbers")
        for j, v in enumerate(row):
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise ParseError(f"config: {key}[{i}][{j}] = {v!r} is not a number")
    return np.array(rows, dtype=float)


def parse_config(text, source="<config>"):
    """Parse a JSON config document into validated :class:`LineConstants`."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{source}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise ParseError(f"{source}: top level must be a JSON object")
    units = doc.get("units", UNITS)
    if units != UNITS:
        raise ParseError(f"{source}: units must be {UNITS!r}, got {units!r}")
    n = doc.get("n")
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise ParseError(f"{source}: field 'n' must be a positive integer, got {n!r}")
    mats = {k: _matrix_field(doc, k, n, required=k in ("L", "C")) for k in ("L", "C", "R", "G")}
    return LineConstants.create(**mats)


def load_config(path):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ParseError(f"cannot read config {path}: {exc.strerror}") from exc
    return parse_config(text, source=str(path))


def config_document(constants):
    """JSON text that :func:`parse_config` turns back into bit-identical matrices."""
    doc = {"n": constants.n}
    for name, M in constants.matrices().items():
        doc[name] = [[float(v) for v in row] for row in M]
    doc["units"] = UNITS
    # json writes floats with repr(), which round-trips exactly
    return json.dumps(doc, indent=2) + "\n"


# --- formatting --------------------------------------------------------------

def _fmt(x):
    return f"{x:.16e}"


def _fmt_complex(z):
    z = complex(z)
    return f"{z.real:.16e}{z.imag:+.16e}j"


def format_matrix(M):
    return "\n".join("  ".join(_fmt_complex(z) for z in row) for row in M)


def _finite(x):
    return x if math.isfinite(x) else str(x)


# --- sweep -------------------------------------------------------------------

@dataclass(frozen=True)
class SweepSpec:
    f_start: float
    f_stop: float
    points: int
    spacing: str
    sigma: float
    d: float
    quantities: tuple
    full_matrices: bool = False

    def __post_init__(self):
        if self.spacing not in ("linear", "log"):
            raise ParseError(f"spacing must be 'linear' or 'log', got {self.spacing!r}")
        if self.points < 2:
            raise ParseError(f"points must be at least 2, got {self.points}")
        if not (math.isfinite(self.f_start) and math.isfinite(self.f_stop)) \
                or not self.f_start < self.f_stop:
            raise ParseError(f"need f_start < f_stop, got {self.f_start} and {self.f_stop}")
        if self.spacing == "log" and not self.f_start > 0:
            raise ParseError(f"log spacing needs f_start > 0, got {self.f_start}")
        bad = [q for q in self.quantities if q not in QUANTITIES]
        if bad or not self.quantities:
            raise ParseError(f"quantities must be a non-empty subset of {QUANTITIES}, got {bad}")
        if len(set(self.quantities)) != len(self.quantities):
            raise ParseError("quantities contain duplicates")
        immittance = {"admittance", "impedance"} & set(self.quantities)
        if immittance and not self.d > 0:
            raise ParseError(f"{sorted(immittance)} need d > 0, got {self.d}")
        if not self.d >= 0:
            raise ParseError(f"d must be >= 0, got {self.d}")

    def frequencies(self):
        if self.spacing == "log":
            f = np.logspace(math.log10(self.f_start), math.log10(self.f_stop), self.points)
        else:
            f = np.linspace(self.f_start, self.f_stop, self.points)
        f[0], f[-1] = self.f_start, self.f_stop
        return f


def sweep_header(spec, n):
    cols = ["f"]
    m = 2 * n
    for q in spec.quantities:
        if q == "bounds":
            cols.append("envelope")
            continue
        cols.append(f"{q}_norm")
        if spec.full_matrices:
            for i in range(m):
                for j in range(m):
                    cols += [f"{q}_{i}_{j}_re", f"{q}_{i}_{j}_im"]
    return cols


_EVALUATORS = {
    "chain": lambda c, s, d: chain_matrix(c, s, d),
    "abcd": lambda c, s, d: abcd_direct(c, s, d),
    "admittance": lambda c, s, d: admittance(c, s, d),
    "impedance": lambda c, s, d: impedance(c, s, d),
}


def sweep_rows(constants, spec, params=None, workers=None):
    """
    Evaluate the sweep; rows are returned in frequency order.

    Raises :class:`DomainError` before evaluating anything when an
    immittance is requested with ``sigma <= alpha``.
    """
    wants = set(spec.quantities)
    if wants & {"admittance", "impedance"}:
        alpha = abscissa(constants)
        if not spec.sigma > alpha:
            raise DomainError(
                f"admittance/impedance need sigma > alpha = {alpha:.6g}; got sigma = {spec.sigma:.6g}")
    if "bounds" in wants and params is None:
        params = bound_params(constants)
    envelope = params.envelope(spec.sigma, spec.d) if "bounds" in wants else None

    def row(f):
        s = complex(spec.sigma, 2.0 * math.pi * f)
        out = [f]
        for q in spec.quantities:
            if q == "bounds":
                out.append(envelope)
                continue
            M = _EVALUATORS[q](constants, s, spec.d)
            out.append(M.norm)
            if spec.full_matrices:
                for z in M.value.ravel():
                    out += [z.real, z.imag]
        return out

    freqs = spec.frequencies()
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(row, freqs))


def write_sweep(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(float(v)) for v in r])


# --- commands ----------------------------------------------------------------

def cmd_params(args, out):
    constants = load_config(args.config)
    params = bound_params(constants)
    if args.emit_config:
        with open(args.emit_config, "w", encoding="utf-8") as fh:
            fh.write(config_document(constants))
    if args.json:
        doc = {"n": constants.n, "params": {k: _finite(v) for k, v in params.as_dict().items()},
               "units": {k: _PARAM_UNITS[k] for k in _PARAM_UNITS},
               "validation": constants.report.summary()}
        out.write(json.dumps(doc, indent=2) + "\n")
        return EXIT_OK
    out.write(f"n = {constants.n}\n")
    for k, unit in _PARAM_UNITS.items():
        out.write(f"{k:12s} = {_fmt(getattr(params, k)):>24s}  [{unit}]\n")
    out.write(f"{'cl_normal':12s} = {params.cl_normal}\n")
    out.write(f"validation: {constants.report.summary()}\n")
    return EXIT_OK


def cmd_eval(args, out):
    constants = load_config(args.config)
    s = complex(args.s_re, args.s_im)
    if args.quantity == "lead":
        M = lead_factor(constants, s, args.d, bound_params(constants).nu_lower)
    else:
        M = _EVALUATORS[args.quantity](constants, s, args.d)
    if args.json:
        doc = {"quantity": M.kind, "s_re": s.real, "s_im": s.imag, "d": M.d,
               "norm": M.norm,
               "re": M.value.real.tolist(), "im": M.value.imag.tolist()}
        out.write(json.dumps(doc, indent=2) + "\n")
    else:
        out.write(f"# {M.kind} at s = {_fmt_complex(s)}, d = {_fmt(M.d)}\n")
        out.write(format_matrix(M.value) + "\n")
    return EXIT_OK


def cmd_sweep(args, out):
    constants = load_config(args.config)
    quantities = tuple(q.strip() for q in args.quantities.split(",") if q.strip())
    spec = SweepSpec(f_start=args.f_start, f_stop=args.f_stop, points=args.points,
                     spacing=args.spacing, sigma=args.sigma, d=args.d,
                     quantities=quantities, full_matrices=args.full_matrices)
    rows = sweep_rows(constants, spec, workers=args.workers)
    write_sweep(args.out, sweep_header(spec, constants.n), rows)
    out.write(f"wrote {len(rows)} rows to {args.out}\n")
    return EXIT_OK


def _seed(default):
    raw = os.environ.get(SEED_ENV)
    if raw is None or raw == "":
        return default
    try:
        return int(raw)
    except ValueError as exc:
        raise ParseError(f"{SEED_ENV} must be an integer, got {raw!r}") from exc


def cmd_verify(args, out):
    constants = load_config(args.config)
    seed = _seed(verify.DEFAULT_SEED)
    if args.suite and args.suite != "default":
        try:
            with open(args.suite, encoding="utf-8") as fh:
                doc = json.load(fh)
        except OSError as exc:
            raise ParseError(f"cannot read suite {args.suite}: {exc.strerror}") from exc
        except json.JSONDecodeError as exc:
            raise ParseError(f"{args.suite}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
        try:
            suite = verify.load_suite(doc, seed=seed)
        except (TypeError, KeyError) as exc:
            if isinstance(exc, UnknownCheck):
                raise
            raise ParseError(f"{args.suite}: malformed suite entry ({exc})") from exc
    else:
        suite = verify.default_suite(seed=seed)
    reports = verify.run_suite(constants, suite, workers=args.workers)
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(verify.report_to_json(reports, seed=seed) + "\n")
    for r in reports:
        out.write(f"{r.status.upper():4s}  {r.check_id:24s} worst_margin={r.worst_margin: .3e}"
                  f"  samples={r.samples_run}\n")
    failed = sum(not r.passed for r in reports)
    out.write(f"{len(reports) - failed}/{len(reports)} checks passed\n")
    return EXIT_VERIFY if failed else EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="telegraph",
                                description="Network matrices and growth bounds of uniform "
                                            "multiconductor transmission lines.")
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("params", help="print bound parameters of a line")
    sp.add_argument("config")
    sp.add_argument("--json", action="store_true", help="emit JSON instead of a table")
    sp.add_argument("--emit-config", metavar="OUT", help="write the parsed constants back as JSON")
    sp.set_defaults(func=cmd_params)

    sp = sub.add_parser("eval", help="evaluate one network matrix at a point")
    sp.add_argument("config")
    sp.add_argument("--s-re", type=float, required=True)
    sp.add_argument("--s-im", type=float, default=0.0)
    sp.add_argument("--d", type=float, required=True, help="line length in meters")
    sp.add_argument("--quantity", choices=EVAL_QUANTITIES, required=True)
    sp.add_argument("--json", action="store_true")
    sp.set_defaults(func=cmd_eval)

    sp = sub.add_parser("sweep", help="spectral norms over a frequency grid, written as CSV")
    sp.add_argument("config")
    sp.add_argument("--f-start", type=float, required=True, help="hertz")
    sp.add_argument("--f-stop", type=float, required=True, help="hertz")
    sp.add_argument("--points", type=int, required=True)
    sp.add_argument("--spacing", choices=("linear", "log"), default="log")
    sp.add_argument("--sigma", type=float, default=0.0, help="real part of s in 1/s")
    sp.add_argument("--d", type=float, required=True, help="line length in meters")
    sp.add_argument("--quantities", default="chain",
                    help=f"comma-separated subset of {','.join(QUANTITIES)}")
    sp.add_argument("--out", required=True)
    sp.add_argument("--full-matrices", action="store_true",
                    help="also write every matrix entry as _re/_im column pairs")
    sp.add_argument("--workers", type=int, default=None)
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("verify", help="run the property-check suite")
    sp.add_argument("config")
    sp.add_argument("--suite", default="default", help="suite JSON file, or 'default'")
    sp.add_argument("--out", required=True, help="JSON report path")
    sp.add_argument("--workers", type=int, default=1)
    sp.set_defaults(func=cmd_verify)
    return p


def main(argv=None, out=None):
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        return args.func(args, out)
    except (ParseError, ValidationFailure, UnknownCheck) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except DomainError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except TelegraphError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
