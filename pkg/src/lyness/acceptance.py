"""Regression criteria shared by the test suite and ``lyness verify``.

Each criterion returns a :class:`CriterionResult`; a criterion passes only if
its numerical checks hold *and* it finishes inside its time budget.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .cycle import ParameterCycle
from .dynamics import (GAP_FACTOR, adherence_intervals, classify_persistence, detect_period,
                       iterate, persistence_probe, rotation_number)
from .equilibria import (Continuum, find_fixed_points, fixed_points_closed_form,
                         meromorphic_obstruction, origin_spectrum)
from .invariants import (InvariantForm, closed_numerator, eval_closed_integral,
                         kernel_dimension, nullspace_invariants)
from .maps import compose, jacobian
from .workbench import check_degenerate_family, check_lyness_conjugacy, ssnc_probe

GAP_SWEEP = (10.0, 20.0, 50.0)
ISLAND_CYCLE = (2.0, 4.0, 7.0, 0.001)
ISLAND_STARTS = {7: (14.8, 8.25), 20: (13.35, 7.27)}


@dataclass
class CriterionResult:
    number: int
    module: str
    title: str
    passed: bool
    detail: str
    seconds: float
    budget: float

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return (f"[{tag}] criterion {self.number:2d} ({self.module}) {self.title}: "
                f"{self.detail} [{self.seconds:.2f}s / {self.budget:g}s]")


class _Check:
    def __init__(self):
        self.failures: list[str] = []
        self.notes: list[str] = []

    def require(self, ok: bool, msg: str) -> None:
        if not ok:
            self.failures.append(msg)

    def note(self, msg: str) -> None:
        self.notes.append(msg)


def _rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(seed)


def _log_uniform(rng, lo, hi, size=None):
    return np.exp(rng.uniform(math.log(lo), math.log(hi), size=size))


def _random_primitive(rng, k: int) -> ParameterCycle:
    while True:
        c = ParameterCycle(_log_uniform(rng, 0.1, 10.0, k))
        if c.primitive_period == k:
            return c


# -- criteria -------------------------------------------------------------------

def global_five_periodicity(chk: _Check) -> None:
    rng = _rng(1)
    worst = 0.0
    for p in _log_uniform(rng, 0.1, 10.0, (100, 2)):
        q = tuple(p)
        for _ in range(5):
            q = compose((1.0,), q)
        worst = max(worst, float(np.max(np.abs(np.subtract(q, p)) / np.abs(p))))
    chk.require(worst < 1e-9, f"F^5 relative error {worst:.2e}")
    seq = list(iterate(ParameterCycle([1.0]), (1.0, 1.0), 7).values)
    chk.require(seq == [1, 1, 2, 3, 2, 1, 1], f"recurrence from (1,1) gave {seq}")
    chk.note(f"max rel err {worst:.1e}, sequence {[int(v) for v in seq]}")


def twenty_periodicity(chk: _Check) -> None:
    c = ParameterCycle([0.25, 0.5, 2.0, 4.0])
    rng = _rng(2)
    periods = set()
    worst = 0.0
    for p in _log_uniform(rng, 0.1, 10.0, (100, 2)):
        periods.add(detect_period(c, tuple(p), 10, tol=1e-8))
        xs = iterate(c, tuple(p), 42).values
        worst = max(worst, float(np.max(np.abs(xs[20:] - xs[:-20]) / xs[:-20])))
    chk.require(periods == {5}, f"composed periods {periods}")
    chk.require(worst < 1e-8, f"x_(n+20) vs x_n relative error {worst:.2e}")
    chk.note(f"composed period {sorted(periods, key=str)}, recurrence period 20 (err {worst:.1e})")


def invariant_discovery(chk: _Check) -> None:
    rng = _rng(3)
    dims = {}
    for k in (1, 2, 3, 6, 4, 5, 7):
        dims[k] = {kernel_dimension(_random_primitive(rng, k)) for _ in range(50)}
    for k in (1, 2, 3, 6):
        chk.require(dims[k] == {1}, f"k={k} kernel dims {dims[k]}")
    for k in (4, 5, 7):
        chk.require(dims[k] == {0}, f"k={k} kernel dims {dims[k]}")
    worst = 1.0
    for _ in range(10):
        c = _random_primitive(rng, 6)
        v = nullspace_invariants(c)[0].phase(1)
        w = closed_numerator(c)
        worst = min(worst, abs(float(v @ w)) / (np.linalg.norm(v) * np.linalg.norm(w)))
    chk.require(worst > 1 - 1e-8, f"k=6 cosine similarity {worst:.12f}")
    chk.note(f"dims {{{', '.join(f'{k}: {sorted(d)}' for k, d in dims.items())}}}, "
             f"min cosine {worst:.12f}")


def conservation(chk: _Check) -> None:
    rng = _rng(4)
    worst = 0.0
    for i in range(20):
        k = (1, 2, 3, 6)[i % 4]
        c = _random_primitive(rng, k)
        p = tuple(_log_uniform(rng, 0.2, 5.0, 2))
        v0 = eval_closed_integral(c, p)
        drift = 0.0
        for _ in range(10_000):
            p = compose(c, p)
            drift = max(drift, abs(eval_closed_integral(c, p) - v0) / abs(v0))
        worst = max(worst, drift)
    chk.require(worst < 1e-6, f"max relative drift {worst:.2e}")
    chk.note(f"max relative drift {worst:.1e}")


def determinant_law(chk: _Check) -> None:
    rng = _rng(5)
    worst_det = 0.0
    k4_counts = set()
    k6_min = math.inf
    worst_grad = 0.0
    for k in (4, 5, 6):
        for _ in range(100):
            c = _random_primitive(rng, k)
            reps = find_fixed_points(c)
            q_plus = [r for r in reps if r.point.in_q_plus]
            for r in q_plus:
                worst_det = max(worst_det, r.det_deviation)
            if k == 4:
                k4_counts.add(len(q_plus))
            if k == 6:
                k6_min = min(k6_min, len(q_plus))
                form = InvariantForm(closed_numerator(c)[None, :])
                for r in q_plus:
                    x, y = r.point
                    gx, gy = form.gradient(1, x, y)
                    v = form.value(1, x, y)
                    worst_grad = max(worst_grad, math.hypot(gx * x, gy * y) / abs(v))
    chk.require(worst_det < 1e-8, f"|det-1| up to {worst_det:.2e}")
    chk.require(k4_counts == {1}, f"k=4 fixed-point counts {k4_counts}")
    chk.require(k6_min >= 1, f"k=6 minimum count {k6_min}")
    chk.require(worst_grad < 1e-8, f"k=6 scaled gradient {worst_grad:.2e}")
    chk.note(f"max |det-1| {worst_det:.1e}, k=4 counts {sorted(k4_counts)}, "
             f"k=6 min count {k6_min}, max scaled |grad V| {worst_grad:.1e}")


def continuum_detection(chk: _Check) -> None:
    for cv in (0.5, 1.7, 3.0):
        res = fixed_points_closed_form(ParameterCycle([2.0, 1.0, cv, 1.0, 2.0]))
        chk.require(isinstance(res, Continuum), f"c={cv}: no continuum flag")
    chk.note("continuum flagged for c in {0.5, 1.7, 3}")


def non_persistence(chk: _Check) -> None:
    c = ParameterCycle([2.0, 6.0, 3.0, 0.5, 1.0 / 6.0])
    verdict = classify_persistence(c).verdict
    chk.require(verdict == "nonpersistent_by_theorem", f"classified {verdict}")
    probe = persistence_probe(c, (1.0, 1.0), n=1000)
    chk.require(probe.kind == "escape" and probe.step is not None and probe.step <= 300,
                f"probe {probe.kind} at step {probe.step}")
    unshifted = origin_spectrum(c)[-1]
    J = jacobian(c, (0.0, 0.0), extended=True)
    err = max(abs(unshifted[0] - 0.5), abs(unshifted[1] - 1 / 6),
              abs(J.a - 0.5), abs(J.d - 1 / 6), abs(J.b), abs(J.c))
    chk.require(err < 1e-12, f"origin spectrum error {err:.2e}")
    chk.note(f"{verdict}, escape at step {probe.step}, origin diag error {err:.1e}")


def meromorphic(chk: _Check) -> None:
    v1 = meromorphic_obstruction(ParameterCycle([1, 1, 1, 1, 2])).verdict
    chk.require(v1 == "no_meromorphic_integral", f"(1,1,1,1,2) gave {v1}")
    for a in (0.5, 2.0, 3.0):
        v2 = meromorphic_obstruction(ParameterCycle([a] * 5)).verdict
        chk.require(v2 == "inconclusive", f"({a},)*5 gave {v2}")
    chk.note(f"(1,1,1,1,2): {v1}; (a,a,a,a,a): inconclusive")


def interval_counts(chk: _Check) -> dict:
    """Counts for both island starts under every swept gap factor."""
    c = ParameterCycle(ISLAND_CYCLE)
    logs = {want: iterate(c, start, 1_000_000, mode="log").values
            for want, start in ISLAND_STARTS.items()}
    table = {g: {want: adherence_intervals(xs, gap_factor=g).count for want, xs in logs.items()}
             for g in GAP_SWEEP}
    ok_default = all(table[GAP_FACTOR][w] == w for w in ISLAND_STARTS)
    ok_sweep = [g for g in GAP_SWEEP if all(table[g][w] == w for w in ISLAND_STARTS)]
    chk.require(ok_default or bool(ok_sweep),
                "no gap factor gives both counts: "
                + "; ".join(f"g={g:g}: {t[7]} and {t[20]}" for g, t in table.items()))
    chk.note("counts (want 7, 20) " + "; ".join(f"g={g:g}: {t[7]}, {t[20]}"
                                                for g, t in table.items()))
    return table


def ssnc_evidence(chk: _Check) -> None:
    base = ssnc_probe(ParameterCycle(ISLAND_CYCLE), p_max=30, max_pairs=1)
    chk.require(bool(base), "no elliptic/hyperbolic pair found")
    if not base:
        return
    ev = base[0]
    chk.require(ev.elliptic_orbit.kind == "elliptic", "elliptic orbit misclassified")
    chk.require(ev.hyperbolic_orbit.kind == "hyperbolic_saddle", "hyperbolic orbit misclassified")
    chk.require(ev.hyperbolic_orbit.det_deviation < 1e-8,
                f"hyperbolic |det-1| {ev.hyperbolic_orbit.det_deviation:.2e}")
    padded = ssnc_probe(ParameterCycle(ISLAND_CYCLE + (1.0,) * 5), p_max=30, max_pairs=1)
    chk.require(bool(padded) and padded[0].period == ev.period, "padded cycle differs")
    if padded:
        pe = padded[0]
        diff = max(_rel_diff(pe.elliptic_points, ev.elliptic_points),
                   _rel_diff(pe.hyperbolic_points, ev.hyperbolic_points))
        chk.require(diff < 1e-8, f"padded orbits differ by {diff:.2e}")
        chk.note(f"period {ev.period}, hyperbolic |det-1| {ev.hyperbolic_orbit.det_deviation:.1e},"
                 f" padded orbit difference {diff:.1e}")


def _rel_diff(p: np.ndarray, q: np.ndarray) -> float:
    if p.shape != q.shape:
        return math.inf
    return float(np.max(np.abs(p - q) / np.abs(q)))


def conjugacy_checks(chk: _Check) -> None:
    rng = _rng(11)
    worst = 0.0
    for a, cc in _log_uniform(rng, 0.1, 10.0, (10, 2)):
        worst = max(worst, check_lyness_conjugacy(float(a), float(cc), samples=100))
    chk.require(worst < 1e-10, f"conjugacy error {worst:.2e}")
    p = check_degenerate_family(3.0, 1.0)
    grow = max(abs(p[0] - 1.0), abs(p[1] - 2.0) / 2.0)
    q = check_degenerate_family(3.0, 2.0)
    grow = max(grow, abs(q[0] - 1.0), abs(q[1] - 4.0) / 4.0)
    chk.require(grow < 1e-13, f"degenerate family error {grow:.2e}")
    dims = []
    for a, b in _log_uniform(rng, 0.1, 10.0, (5, 2)):
        dims.append(kernel_dimension(ParameterCycle(ISLAND_CYCLE + (float(a), float(b)))))
    chk.require(min(dims) >= 1, f"regularized 6-cycle kernel dims {dims}")
    chk.note(f"conjugacy err {worst:.1e}, family err {grow:.1e}, 6-cycle dims {dims}")


def rotation(chk: _Check) -> None:
    rho = rotation_number(ParameterCycle([1.0]), (1.0, 1.0))
    nearest = round(rho * 5) / 5
    chk.require(abs(rho - nearest) < 1e-6, f"rotation number {rho!r}")
    chk.require(detect_period(ParameterCycle([1.0]), (1.0, 1.0), 10) == 5, "orbit is not 5-periodic")
    chk.note(f"rotation number {rho:.12f}")


CRITERIA: list[tuple[int, str, str, float, Callable[[_Check], object]]] = [
    (1, "maps", "global 5-periodicity of F_1", 1.0, global_five_periodicity),
    (2, "dynamics", "20-periodicity of (1/4,1/2,2,4)", 1.0, twenty_periodicity),
    (3, "invariants", "invariant discovery by kernel dimension", 30.0, invariant_discovery),
    (4, "invariants", "conservation of closed-form integrals", 10.0, conservation),
    (5, "equilibria", "determinant law and fixed-point counts", 60.0, determinant_law),
    (6, "equilibria", "k=5 continuum detection", 1.0, continuum_detection),
    (7, "dynamics", "non-persistence for straddling phi", 1.0, non_persistence),
    (8, "equilibria", "meromorphic obstruction", 1.0, meromorphic),
    (9, "dynamics", "adherence interval counts 7 and 20", 60.0, interval_counts),
    (10, "workbench", "elliptic/hyperbolic periodic-orbit pairs", 120.0, ssnc_evidence),
    (11, "workbench", "conjugacy and identity checks", 10.0, conjugacy_checks),
    (12, "dynamics", "rotation number of F_1", 1.0, rotation),
]


def run_criterion(number: int) -> CriterionResult:
    for num, module, title, budget, fn in CRITERIA:
        if num == number:
            break
    else:
        raise KeyError(f"no criterion {number}")
    chk = _Check()
    t0 = time.perf_counter()
    try:
        fn(chk)
    except Exception as exc:  # a crash is a failure of the criterion, not of the runner
        chk.failures.append(f"{type(exc).__name__}: {exc}")
    dt = time.perf_counter() - t0
    if dt > budget:
        chk.failures.append(f"took {dt:.2f}s, budget {budget:g}s")
    passed = not chk.failures
    detail = "; ".join(chk.notes) if passed else "; ".join(chk.failures)
    return CriterionResult(number, module, title, passed, detail, dt, budget)


def run_all(numbers=None) -> list[CriterionResult]:
    nums = [c[0] for c in CRITERIA] if numbers is None else list(numbers)
    return [run_criterion(n) for n in nums]
