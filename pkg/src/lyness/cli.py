"""Command-line front end: ``lyness <verb> --cycle a1,...,ak [options]``.

Payloads (CSV or JSON) go to ``--out`` or, without it, to stdout; they never
contain timings, so identical arguments give byte-identical payloads. A short
report with the toolkit version and wall time goes to stdout when ``--out`` is
used and to stderr otherwise.

Exit codes: 0 ok, 1 usage error, 2 numerical failure (or failed ``verify``).
"""

from __future__ import annotations

import argparse
import io
import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import product

import numpy as np

from . import __version__
from .acceptance import CRITERIA, run_criterion
from .cycle import ParameterCycle
from .dynamics import (BURN_IN, GAP_FACTOR, MODES, adherence_intervals, classify_persistence,
                       detect_period, global_periodicity_test, iterate, persistence_probe,
                       rotation_number)
from .equilibria import Continuum, find_fixed_points, fixed_points_closed_form
from .errors import LynessError
from .invariants import nullspace_invariants

VERBS = ("simulate", "invariants", "fixed-points", "classify", "periods", "intervals",
         "rotation", "scan", "verify")
DIAGNOSTICS = ("kernel-dim", "fixed-point-count", "max-det-deviation", "escape-step",
               "rotation", "log-range")
EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2
PRECISION_ENV = "LYNESS_PRECISION"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# -- serialization ----------------------------------------------------------------

def _num(v: float) -> str:
    if math.isnan(v):
        return "NaN"
    if math.isinf(v):
        return "Infinity" if v > 0 else "-Infinity"
    s = format(v, ".17g")
    return s if any(ch in s for ch in ".en") else s + ".0"


def dumps(obj) -> str:
    """JSON with insertion-ordered keys and floats at 17 significant digits."""
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _num(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{dumps(str(k))}: {dumps(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ", ".join(dumps(v) for v in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


# -- command model ------------------------------------------------------------------

@dataclass
class Command:
    verb: str
    cycle: ParameterCycle | None
    start: tuple[float, float] | None = None
    steps: int | None = None
    seed: int = 0
    out: str | None = None
    fmt: str = "json"
    gap_factor: float = GAP_FACTOR
    mode: str = "standard"
    options: dict = field(default_factory=dict)


def _cycle(text: str) -> ParameterCycle:
    try:
        return ParameterCycle.parse(text)
    except LynessError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _pair(text: str) -> tuple[float, float]:
    parts = text.split(",")
    try:
        x, y = (float(p) for p in parts)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected 'x,y', got {text!r}") from exc
    if not (math.isfinite(x) and math.isfinite(y)):
        raise argparse.ArgumentTypeError(f"non-finite start {text!r}")
    return x, y


def _positive_int(text: str) -> int:
    v = int(text)
    if v <= 0:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _positive_float(text: str) -> float:
    v = float(text)
    if not (v > 0 and math.isfinite(v)):
        raise argparse.ArgumentTypeError("must be a positive number")
    return v


def _axis(text: str) -> tuple[int, float, float, int]:
    try:
        i, lo, hi, n = text.split(":")
        axis = int(i), float(lo), float(hi), int(n)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected 'index:lo:hi:n', got {text!r}") from exc
    if axis[0] < 1 or not (0 < axis[1] <= axis[2]) or axis[3] < 1:
        raise argparse.ArgumentTypeError(f"bad axis {text!r}")
    return axis


def default_mode() -> str:
    mode = os.environ.get(PRECISION_ENV, "standard")
    if mode not in ("standard", "extended"):
        raise UsageError(f"{PRECISION_ENV} must be 'standard' or 'extended', got {mode!r}")
    return mode


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="lyness", description="Periodic Lyness recurrence toolkit")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="verb", required=True, parser_class=_Parser)

    def verb(name, help_, cycle=True):
        p = sub.add_parser(name, help=help_)
        if cycle:
            p.add_argument("--cycle", type=_cycle, required=True,
                           help="comma-separated positive coefficients, p/q allowed")
        p.add_argument("--out", help="payload file (default: stdout)")
        p.add_argument("--seed", type=int, default=0)
        return p

    p = verb("simulate", "iterate the recurrence and emit the orbit")
    p.add_argument("--start", type=_pair, required=True, help="x1,x2 (log coordinates in log mode)")
    p.add_argument("--steps", type=_positive_int, default=1000)
    p.add_argument("--mode", choices=MODES)
    p.add_argument("--format", choices=("csv", "json"), default="csv")

    p = verb("invariants", "search for a polynomial non-autonomous invariant")
    p.add_argument("--backend", choices=("float", "exact"), default="float")
    p.add_argument("--format", choices=("json",), default="json")

    p = verb("fixed-points", "fixed or periodic points of the composed map")
    p.add_argument("--period", type=_positive_int, default=1)
    p.add_argument("--extended", action="store_true", help="include the origin when k = 5m")
    p.add_argument("--format", choices=("json",), default="json")

    p = verb("classify", "phi products, persistence verdict and an escape probe")
    p.add_argument("--start", type=_pair, default=(1.0, 1.0))
    p.add_argument("--steps", type=_positive_int, default=10_000)
    p.add_argument("--format", choices=("json",), default="json")

    p = verb("periods", "orbit period and global periodicity")
    p.add_argument("--start", type=_pair, default=(1.0, 1.0))
    p.add_argument("--max-period", type=_positive_int, default=100)
    p.add_argument("--samples", type=_positive_int, default=20)
    p.add_argument("--format", choices=("json",), default="json")

    p = verb("intervals", "adherence intervals of a long orbit")
    p.add_argument("--start", type=_pair, required=True, help="x1,x2 (log coordinates in log mode)")
    p.add_argument("--steps", type=_positive_int, default=1_000_000)
    p.add_argument("--mode", choices=MODES, default="log")
    p.add_argument("--gap-factor", type=_positive_float, default=GAP_FACTOR)
    p.add_argument("--burn-in", type=int, default=BURN_IN)
    p.add_argument("--format", choices=("csv", "json"), default="json")

    p = verb("rotation", "rotation number around the nearest elliptic fixed point")
    p.add_argument("--start", type=_pair, required=True)
    p.add_argument("--steps", type=_positive_int, default=1000)
    p.add_argument("--format", choices=("json",), default="json")

    p = verb("scan", "sweep a scalar diagnostic over a box of coefficients")
    p.add_argument("--axis", type=_axis, action="append", required=True,
                   help="index:lo:hi:n, log-spaced values for coefficient a_index")
    p.add_argument("--diagnostic", choices=DIAGNOSTICS, required=True)
    p.add_argument("--start", type=_pair, default=(1.0, 1.0))
    p.add_argument("--steps", type=_positive_int, default=10_000)
    p.add_argument("--jobs", type=_positive_int, default=os.cpu_count() or 1)
    p.add_argument("--format", choices=("csv",), default="csv")

    p = verb("verify", "run the acceptance criteria", cycle=False)
    p.add_argument("--only", help="comma-separated criterion numbers")
    p.add_argument("--format", choices=("json",), default="json")
    return parser


def parse(argv: list[str]) -> Command:
    """Validated command; raises :class:`UsageError` on bad input."""
    ns = build_parser().parse_args(argv)
    opts = {k: v for k, v in vars(ns).items()
            if k not in ("verb", "cycle", "start", "steps", "seed", "out", "format",
                         "gap_factor", "mode")}
    mode = getattr(ns, "mode", None) or default_mode()
    cmd = Command(ns.verb, getattr(ns, "cycle", None), getattr(ns, "start", None),
                  getattr(ns, "steps", None), ns.seed, ns.out, ns.format,
                  getattr(ns, "gap_factor", GAP_FACTOR), mode, opts)
    if cmd.start is not None and mode != "log" and cmd.verb in ("simulate", "intervals", "rotation",
                                                                "classify", "periods", "scan"):
        if min(cmd.start) <= 0:
            raise UsageError("--start must lie in the open first quadrant")
    if cmd.verb == "scan":
        k = cmd.cycle.k
        axes = opts["axis"]
        if len(axes) > 2 or any(ax[0] > k for ax in axes):
            raise UsageError(f"scan takes one or two axes with indices in 1..{k}")
    if cmd.verb == "verify" and opts.get("only"):
        try:
            opts["only"] = [int(t) for t in opts["only"].split(",")]
        except ValueError as exc:
            raise UsageError(f"bad --only {opts['only']!r}") from exc
        known = {c[0] for c in CRITERIA}
        if not set(opts["only"]) <= known:
            raise UsageError(f"--only accepts criteria {sorted(known)}")
    return cmd


# -- verbs --------------------------------------------------------------------------

def _report_dict(r) -> dict:
    return r.to_dict()


def _run_simulate(cmd: Command) -> tuple[str, dict]:
    rec = iterate(cmd.cycle, cmd.start, cmd.steps, mode=cmd.mode)
    summary = {"count": rec.count, "min": rec.min, "max": rec.max}
    if cmd.fmt == "csv":
        return rec.to_csv(), summary
    return dumps({"cycle": list(cmd.cycle.values), "mode": cmd.mode,
                  "x": [float(v) for v in rec.x]}) + "\n", summary


def _run_invariants(cmd: Command) -> tuple[str, dict]:
    forms = nullspace_invariants(cmd.cycle, backend=cmd.options["backend"])
    payload = {"kernel_dimension": len(forms), "k": cmd.cycle.k,
               "forms": [f.to_dict() for f in forms]}
    return dumps(payload) + "\n", {"kernel_dimension": len(forms)}


def _run_fixed_points(cmd: Command) -> tuple[str, dict]:
    period = cmd.options["period"]
    payload: dict = {}
    if period == 1 and cmd.cycle.k == 5:
        cf = fixed_points_closed_form(cmd.cycle)
        if isinstance(cf, Continuum):
            payload["continuum"] = {"quadratic": list(cf.quadratic)}
    reps = find_fixed_points(cmd.cycle, period, extended=cmd.options["extended"])
    payload["points"] = [r.to_dict() for r in reps]
    return dumps(payload) + "\n", {"count": len(reps)}


def _run_classify(cmd: Command) -> tuple[str, dict]:
    cls = classify_persistence(cmd.cycle)
    probe = persistence_probe(cmd.cycle, cmd.start, n=max(cmd.steps, 1000))
    payload = {"phi": list(cls.phi), "verdict": cls.verdict, "warning": cls.warning,
               "probe": {"kind": probe.kind, "x_min": probe.x_min, "x_max": probe.x_max,
                         "step": probe.step,
                         "start": list(cmd.start)}}
    return dumps(payload) + "\n", {"verdict": cls.verdict, "probe": probe.kind}


def _run_periods(cmd: Command) -> tuple[str, dict]:
    mp, samples = cmd.options["max_period"], cmd.options["samples"]
    q = detect_period(cmd.cycle, cmd.start, mp)
    g = global_periodicity_test(cmd.cycle, mp, samples=samples, seed=cmd.seed)
    payload = {"start": list(cmd.start), "composed_period": q,
               "recurrence_period": None if q is None else q * cmd.cycle.k,
               "global_period": g, "samples": samples, "seed": cmd.seed}
    return dumps(payload) + "\n", {"composed_period": q, "global_period": g}


def _run_intervals(cmd: Command) -> tuple[str, dict]:
    rec = iterate(cmd.cycle, cmd.start, cmd.steps, mode=cmd.mode)
    rep = adherence_intervals(rec.values, burn_in=cmd.options["burn_in"],
                              gap_factor=cmd.gap_factor)
    if cmd.mode == "log":  # counting ran on logarithms; report x-values
        ivals = [(math.exp(lo), math.exp(hi)) for lo, hi in rep.intervals]
    else:
        ivals = list(rep.intervals)
    if cmd.fmt == "csv":
        lines = ["i,lo,hi"] + [f"{i},{_num(lo)},{_num(hi)}" for i, (lo, hi) in
                               enumerate(ivals, start=1)]
        return "\n".join(lines) + "\n", {"count": rep.count}
    payload = {"count": rep.count, "gap_factor": cmd.gap_factor,
               "gap_threshold": rep.gap_threshold, "threshold_space": "log" if cmd.mode == "log" else "x",
               "sample_size": rep.sample_size, "intervals": [list(iv) for iv in ivals]}
    return dumps(payload) + "\n", {"count": rep.count}


def _run_rotation(cmd: Command) -> tuple[str, dict]:
    rho = rotation_number(cmd.cycle, cmd.start, n=cmd.steps)
    return dumps({"start": list(cmd.start), "steps": cmd.steps, "rotation_number": rho}) + "\n", \
        {"rotation_number": rho}


def scan_cell(args) -> float:
    """One scan diagnostic; numerical failures give NaN."""
    values, diagnostic, start, steps = args
    c = ParameterCycle(values)
    try:
        if diagnostic == "kernel-dim":
            return float(len(nullspace_invariants(c)))
        if diagnostic == "fixed-point-count":
            return float(sum(r.point.in_q_plus for r in find_fixed_points(c)))
        if diagnostic == "max-det-deviation":
            reps = [r for r in find_fixed_points(c) if r.point.in_q_plus]
            return max((r.det_deviation for r in reps), default=math.nan)
        if diagnostic == "escape-step":
            v = persistence_probe(c, start, n=max(steps, 1000))
            return float(v.step) if v.kind == "escape" else math.nan
        if diagnostic == "rotation":
            return rotation_number(c, start, n=steps)
        if diagnostic == "log-range":
            rec = iterate(c, (math.log(start[0]), math.log(start[1])), steps, mode="log")
            return float(rec.values.max() - rec.values.min())
    except (LynessError, ArithmeticError):
        return math.nan
    raise ValueError(f"unknown diagnostic {diagnostic!r}")


def _run_scan(cmd: Command) -> tuple[str, dict]:
    axes = cmd.options["axis"]
    grids = [np.geomspace(lo, hi, n) for _, lo, hi, n in axes]
    cells = []
    coords = list(product(*grids))
    for pt in coords:
        vals = list(cmd.cycle.values)
        for (idx, *_), v in zip(axes, pt):
            vals[idx - 1] = float(v)
        cells.append((tuple(vals), cmd.options["diagnostic"], cmd.start, cmd.steps))
    jobs = cmd.options["jobs"]
    if jobs == 1 or len(cells) == 1:
        results = [scan_cell(a) for a in cells]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            results = list(ex.map(scan_cell, cells, chunksize=max(1, len(cells) // (4 * jobs))))
    buf = io.StringIO()
    buf.write(",".join([f"a{ax[0]}" for ax in axes] + [cmd.options["diagnostic"]]) + "\n")
    for pt, r in zip(coords, results):
        buf.write(",".join([_num(float(v)) for v in pt] + [_num(r)]) + "\n")
    return buf.getvalue(), {"cells": len(cells)}


def _run_verify(cmd: Command) -> tuple[str, dict]:
    numbers = cmd.options.get("only") or [c[0] for c in CRITERIA]
    results = []
    first_failure = None
    for n in numbers:
        r = run_criterion(n)
        print(r.line(), file=sys.stderr, flush=True)
        results.append(r)
        if not r.passed and first_failure is None:
            first_failure = r
    if first_failure is not None:
        print(f"VERIFY FAILED at criterion {first_failure.number} "
              f"(module {first_failure.module}): {first_failure.detail}", file=sys.stderr)
    payload = {"passed": first_failure is None,
               "criteria": [{"number": r.number, "module": r.module, "title": r.title,
                             "passed": r.passed, "detail": r.detail} for r in results]}
    return dumps(payload) + "\n", {"passed": first_failure is None}


RUNNERS = {
    "simulate": _run_simulate, "invariants": _run_invariants, "fixed-points": _run_fixed_points,
    "classify": _run_classify, "periods": _run_periods, "intervals": _run_intervals,
    "rotation": _run_rotation, "scan": _run_scan, "verify": _run_verify,
}


def run(cmd: Command) -> tuple[dict, str]:
    """Execute ``cmd``; returns the report and the payload text."""
    t0 = time.perf_counter()
    payload, results = RUNNERS[cmd.verb](cmd)
    report = {
        "verb": cmd.verb,
        "input": {"cycle": None if cmd.cycle is None else list(cmd.cycle.values),
                  "start": None if cmd.start is None else list(cmd.start),
                  "steps": cmd.steps, "seed": cmd.seed, "mode": cmd.mode},
        "results": results,
        "version": __version__,
        "wall_time": time.perf_counter() - t0,
    }
    return report, payload


def _failing_module(exc: BaseException) -> str:
    """Innermost toolkit module on the traceback (the one that raised)."""
    name = "cli"
    tb = exc.__traceback__
    while tb is not None:
        mod = tb.tb_frame.f_globals.get("__name__", "")
        if mod.startswith("lyness.") and mod != "lyness.errors":
            name = mod.split(".", 1)[1]
        tb = tb.tb_next
    return name


def _error_payload(exc: BaseException) -> dict:
    d = {"error": type(exc).__name__, "module": _failing_module(exc), "message": str(exc)}
    for attr in ("step", "coordinate", "factor"):
        if getattr(exc, attr, None) is not None:
            d[attr] = getattr(exc, attr)
    return d


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cmd = parse(argv)
    except UsageError as exc:
        print(f"lyness: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    try:
        report, payload = run(cmd)
    except (LynessError, ArithmeticError, ValueError) as exc:
        print(dumps(_error_payload(exc)), file=sys.stderr)
        return EXIT_NUMERIC
    if cmd.out:
        with open(cmd.out, "w", newline="\n") as fh:
            fh.write(payload)
        print(dumps(report))
    else:
        sys.stdout.write(payload)
        print(dumps(report), file=sys.stderr)
    if cmd.verb == "verify" and not report["results"]["passed"]:
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
