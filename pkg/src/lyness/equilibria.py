"""Fixed and periodic points of composed maps, their multipliers and type.

Also hosts the two necessary-condition tests for meromorphic integrability
near the origin when k is a multiple of 5.
"""

from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.optimize import brentq

from .cycle import ParameterCycle, phi_products
from .errors import DeterminantLawError, DomainError, UnsupportedPeriodError
from .maps import Jacobian2, PlanarPoint, compose, compose_many, jacobian

DET_TOL = 1e-8
PARABOLIC_TOL = 1e-8
NEWTON_TOL = 1e-12
NEWTON_MAXIT = 100
NEWTON_HALVINGS = 30
DEDUP_DIST = 1e-8
BOUNDARY_FLOOR = 1e-10
ESCAPE_CEIL = 1e12

KINDS = ("elliptic", "hyperbolic_saddle", "parabolic", "node", "degenerate")


@dataclass
class EquilibriumReport:
    point: PlanarPoint
    period: int = 1
    multipliers: tuple[complex, complex] | None = None
    det_deviation: float | None = None
    kind: str | None = None

    def to_dict(self) -> dict:
        m = self.multipliers or (complex("nan"), complex("nan"))
        return {
            "x": float(self.point[0]),
            "y": float(self.point[1]),
            "period": self.period,
            "multipliers": [m[0].real, m[0].imag, m[1].real, m[1].imag],
            "det_deviation": self.det_deviation,
            "class": self.kind,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


@dataclass(frozen=True)
class Continuum:
    """The fixed-point equations of a 5-cycle are dependent: a curve of solutions.

    Points satisfy ``(b-1)x + (1-d)y + (a-e) = 0`` and
    ``c x y - (e + x)(a + y) + b x + y + a = 0``.
    """

    cycle: ParameterCycle
    quadratic: tuple[float, float, float]

    def residuals(self, x: float, y: float) -> tuple[float, float]:
        a, b, c, d, e = self.cycle.values
        return ((b - 1) * x + (1 - d) * y + (a - e),
                c * x * y - (e + x) * (a + y) + b * x + y + a)


# -- classification -------------------------------------------------------------

def classify_multipliers(l1: complex, l2: complex, det: float | None = None) -> str:
    """Type of a planar equilibrium from its two multipliers."""
    l1, l2 = complex(l1), complex(l2)
    if det is None:
        det = (l1 * l2).real
    tr = (l1 + l2).real
    unit_det = abs(det - 1.0) < DET_TOL
    if unit_det and abs(abs(tr) - 2.0) < PARABOLIC_TOL:
        return "parabolic"
    is_complex = abs(l1.imag) > 0 or abs(l2.imag) > 0
    if is_complex:
        return "elliptic" if unit_det else "degenerate"
    if not unit_det:
        return "node" if det != 0 else "degenerate"
    return "hyperbolic_saddle" if abs(tr) > 2.0 else "degenerate"


def _period_jacobian(c: ParameterCycle, p, period: int, extended: bool) -> Jacobian2:
    J = Jacobian2(1.0, 0.0, 0.0, 1.0)
    q = PlanarPoint(*p)
    for _ in range(period):
        J = jacobian(c, q, extended=extended) @ J
        q = compose(c, q, extended=extended)
    return J


def classify(c: ParameterCycle, r: EquilibriumReport, *, extended: bool | None = None
             ) -> EquilibriumReport:
    """Fill multipliers (if missing), the determinant deviation and the type.

    For points of the open quadrant the unit-determinant law is enforced.
    """
    p = PlanarPoint(*r.point)
    if extended is None:
        extended = not p.in_q_plus
    if r.multipliers is None or r.det_deviation is None:
        J = _period_jacobian(c, p, r.period, extended)
        mult = J.eigenvalues
        det = J.det
    else:
        mult = r.multipliers
        det = (complex(mult[0]) * complex(mult[1])).real
    dev = abs(det - 1.0)
    if p.in_q_plus and dev >= DET_TOL:
        raise DeterminantLawError(f"interior point {tuple(p)} has det={det!r}")
    return replace(r, multipliers=tuple(mult), det_deviation=dev,
                   kind=classify_multipliers(mult[0], mult[1], det))


# -- closed-form systems for k = 4, 5, 6 -----------------------------------------

def _polish(c: ParameterCycle, pts) -> list[PlanarPoint]:
    out = []
    for p in pts:
        roots = _newton(c, np.array([p], dtype=float), 1)
        if len(roots):
            out.append(PlanarPoint(*roots[0]))
    return out


def _quartic_k4(c: ParameterCycle) -> list[PlanarPoint]:
    a, b, cc, d = c.values
    # x = y^2 + (a-c) y - d  and  y = x^2 + (d-b) x - a
    X = np.polynomial.Polynomial([-d, a - cc, 1.0])
    poly = X * X + (d - b) * X - a - np.polynomial.Polynomial([0.0, 1.0])
    pts = []
    for y in poly.roots():
        if abs(y.imag) < 1e-7 * max(1.0, abs(y)) and y.real > 0:
            x = X(y.real)
            if x > 0:
                pts.append(PlanarPoint(float(x), float(y.real)))
    return pts


def k5_quadratic(c: ParameterCycle) -> tuple[float, float, float]:
    """Coefficients ``(q2, q1, q0)`` of the quadratic met by fixed-point abscissae."""
    a, b, cc, d, e = c.values
    return ((cc - 1) * (b - 1),
            2 * e - 1 + b * d + a * cc - e * cc - e * b - a * d,
            (e - 1) * (e - a * d))


def _k5_points(c: ParameterCycle) -> list[PlanarPoint] | Continuum:
    a, b, cc, d, e = c.values
    q = k5_quadratic(c)
    scale = max(1.0, *(abs(v) for v in c.values)) ** 2
    if all(abs(v) / scale < 1e-12 for v in q):
        return Continuum(c, q)
    roots = np.polynomial.Polynomial(q[::-1]).roots() if abs(q[0]) > 1e-14 * scale else (
        [-q[2] / q[1]] if q[1] != 0 else [])
    pts = []
    for x in roots:
        x = complex(x)
        if abs(x.imag) > 1e-9 * max(1.0, abs(x)) or x.real <= 0:
            continue
        x = x.real
        if abs(d - 1) > 1e-14:
            y = ((b - 1) * x + (a - e)) / (d - 1)
        else:
            den = cc * x - (e + x) + 1
            if den == 0:
                continue
            y = ((e + x) * a - b * x - a) / den
        if y > 0:
            pts.append(PlanarPoint(x, y))
    return pts


def _k6_points(c: ParameterCycle) -> list[PlanarPoint]:
    a, b, cc, d, e, f = c.values

    def y_of(x):
        return math.sqrt((f + x) * (a + b * x) / (e + d * x))

    def g(x):
        y = y_of(x)
        return x * x - (a + y) * (f + e * y) / (b + cc * y)

    grid = np.geomspace(1e-8, 1e8, 4001)
    vals = [g(x) for x in grid]
    pts = []
    for x0, x1, v0, v1 in zip(grid[:-1], grid[1:], vals[:-1], vals[1:]):
        if v0 == 0:
            pts.append(x0)
        elif v0 * v1 < 0:
            pts.append(brentq(g, x0, x1, xtol=1e-15, rtol=1e-15))
    return [PlanarPoint(x, y_of(x)) for x in pts]


def fixed_points_closed_form(c: ParameterCycle) -> list[EquilibriumReport] | Continuum:
    """Fixed points in Q+ from the reduced two-equation systems (k = 4, 5, 6)."""
    k = c.k
    if k == 4:
        raw = _quartic_k4(c)
    elif k == 5:
        raw = _k5_points(c)
        if isinstance(raw, Continuum):
            return raw
    elif k == 6:
        raw = _k6_points(c)
    else:
        raise UnsupportedPeriodError(f"closed-form fixed points are available for k in {{4,5,6}}, got {k}")
    polished = _polish(c, raw)
    return [classify(c, EquilibriumReport(p)) for p in _dedupe(polished)]


# -- Newton multistart ------------------------------------------------------------

def default_seeds(n: int = 32, lo: float = 1e-3, hi: float = 1e3) -> np.ndarray:
    g = np.geomspace(lo, hi, n)
    gx, gy = np.meshgrid(g, g, indexing="ij")
    return np.stack([gx.ravel(), gy.ravel()], axis=1)


def _residual(c, z, period, space):
    w, J = compose_many(c, z, space, times=period)
    r = w - z
    if space == "standard":
        r[(z <= 0).any(axis=1)] = np.nan
    return r, J


def _newton(c: Sequence[float], seeds: np.ndarray, period: int, space: str = "standard",
            *, tol: float = NEWTON_TOL, maxit: int = NEWTON_MAXIT,
            halvings: int = NEWTON_HALVINGS, max_step: float | None = None) -> np.ndarray:
    """Damped Newton on ``map^period(p) - p`` for every seed; returns converged roots."""
    z = np.array(seeds, dtype=float)
    r, J = _residual(c, z, period, space)
    nr = np.linalg.norm(r, axis=1)
    active = np.isfinite(nr)
    done = np.zeros(len(z), bool)
    eye = np.eye(2)
    for _ in range(maxit):
        scale = np.maximum(1.0, np.abs(z).max(axis=1))
        done |= active & (nr < tol * scale)
        todo = active & ~done
        if not todo.any():
            break
        idx = np.flatnonzero(todo)
        A = J[idx] - eye
        det = A[:, 0, 0] * A[:, 1, 1] - A[:, 0, 1] * A[:, 1, 0]
        rr = r[idx]
        with np.errstate(all="ignore"):
            dx = -(A[:, 1, 1] * rr[:, 0] - A[:, 0, 1] * rr[:, 1]) / det
            dy = -(-A[:, 1, 0] * rr[:, 0] + A[:, 0, 0] * rr[:, 1]) / det
        dz = np.stack([dx, dy], axis=1)
        ok = np.isfinite(dz).all(axis=1)
        active[idx[~ok]] = False
        idx, dz = idx[ok], dz[ok]
        if max_step is not None:
            big = np.abs(dz).max(axis=1)
            f = np.minimum(1.0, max_step / np.maximum(big, 1e-300))
            dz *= f[:, None]
        # full step first; the remaining halvings are evaluated in one batch
        trial = z[idx] + dz
        rt, Jt = _residual(c, trial, period, space)
        nt = np.linalg.norm(rt, axis=1)
        better = np.isfinite(nt) & (nt < nr[idx])
        acc = idx[better]
        z[acc], r[acc], J[acc], nr[acc] = trial[better], rt[better], Jt[better], nt[better]
        pend = np.flatnonzero(~better)
        if len(pend) and halvings:
            lam = 0.5 ** np.arange(1, halvings + 1)
            base = z[idx[pend]]
            trials = (base[:, None, :] + lam[None, :, None] * dz[pend][:, None, :]).reshape(-1, 2)
            rt, Jt = _residual(c, trials, period, space)
            nt = np.linalg.norm(rt, axis=1).reshape(len(pend), halvings)
            ok = np.isfinite(nt) & (nt < nr[idx[pend]][:, None])
            has = ok.any(axis=1)
            first = np.argmax(ok, axis=1)
            sel = np.flatnonzero(has)
            flat = sel * halvings + first[sel]
            tgt = idx[pend[sel]]
            z[tgt] = trials[flat]
            r[tgt] = rt[flat]
            J[tgt] = Jt[flat]
            nr[tgt] = nt[sel, first[sel]]
            pending = pend[~has]
        else:
            pending = pend
        active[idx[pending]] = False
        if space == "standard":
            zi = z[idx]
            active[idx[(zi.min(axis=1) < BOUNDARY_FLOOR) | (zi.max(axis=1) > ESCAPE_CEIL)]] = False
    scale = np.maximum(1.0, np.abs(z).max(axis=1))
    done |= np.isfinite(nr) & (nr < tol * scale)
    for _ in range(2):
        # converged roots get undamped refinement steps kept only if they help
        idx = np.flatnonzero(done)
        A = J[idx] - eye
        rr = r[idx]
        det = A[:, 0, 0] * A[:, 1, 1] - A[:, 0, 1] * A[:, 1, 0]
        with np.errstate(all="ignore"):
            dz = np.stack([-(A[:, 1, 1] * rr[:, 0] - A[:, 0, 1] * rr[:, 1]) / det,
                           -(-A[:, 1, 0] * rr[:, 0] + A[:, 0, 0] * rr[:, 1]) / det], axis=1)
        trial = z[idx] + np.where(np.isfinite(dz), dz, 0.0)
        rt, Jt = _residual(c, trial, period, space)
        nt = np.linalg.norm(rt, axis=1)
        keep = np.isfinite(nt) & (nt <= nr[idx])
        k_ = idx[keep]
        z[k_], r[k_], J[k_], nr[k_] = trial[keep], rt[keep], Jt[keep], nt[keep]
    A = J[done] - eye
    det = A[:, 0, 0] * A[:, 1, 1] - A[:, 0, 1] * A[:, 1, 0]
    # drop non-isolated solutions (e.g. globally periodic maps)
    iso = np.abs(det) > 1e-9
    return z[done][iso]


def _dedupe(points, dist: float = DEDUP_DIST) -> list[PlanarPoint]:
    pts = sorted((float(p[0]), float(p[1])) for p in points)
    out: list[tuple[float, float]] = []
    for p in pts:
        if all(math.hypot(p[0] - q[0], p[1] - q[1]) > dist * max(1.0, abs(p[0]), abs(p[1]))
               for q in out):
            out.append(p)
    return [PlanarPoint(*p) for p in out]


def minimal_period(c: Sequence[float], p, period: int, space: str = "standard",
                   tol: float = 1e-9) -> int:
    """Smallest divisor ``d`` of ``period`` with ``map^d(p) = p``."""
    z = np.array([p], dtype=float)
    for d in range(1, period + 1):
        if period % d:
            continue
        w, _ = compose_many(c, z, space, times=d)
        if np.all(np.isfinite(w)) and np.abs(w - z).max() < tol * max(1.0, np.abs(z).max()):
            return d
    return period


def find_fixed_points(c: ParameterCycle, period: int = 1, seeds=None, *,
                      extended: bool = False, closed_form: bool = True
                      ) -> list[EquilibriumReport]:
    """Newton multistart for points of ``F^period``, deduplicated and classified.

    ``seeds`` is an ``(N, 2)`` array of Q+ starting points (default: a 32x32
    logarithmic grid over ``[1e-3, 1e3]^2``). With ``extended=True`` and k a
    multiple of 5 the origin, where the composed map extends analytically, is
    reported as well. Reported ``period`` is the minimal one.
    """
    if period < 1:
        raise DomainError("period must be >= 1")
    s = default_seeds() if seeds is None else np.asarray(seeds, dtype=float)
    if closed_form and period == 1 and c.k in (4, 5, 6):
        cf = {4: _quartic_k4, 5: _k5_points, 6: _k6_points}[c.k](c)
        if not isinstance(cf, Continuum) and cf:
            s = np.vstack([np.array(cf, dtype=float), s])
    roots = _newton(c.values, s, period)
    # iterates collapsing onto the boundary (e.g. an attracting origin) are not Q+ roots
    roots = roots[roots.min(axis=1) > BOUNDARY_FLOOR]
    reports = []
    for p in _dedupe(roots):
        mp = minimal_period(c.values, p, period)
        reports.append(classify(c, EquilibriumReport(p, period=mp), extended=False))
    if extended and c.k % 5 == 0:
        origin = PlanarPoint(0.0, 0.0)
        reports.insert(0, classify(c, EquilibriumReport(origin, period=1), extended=True))
    return reports


# -- spectrum at the origin and integrability tests --------------------------------

def origin_spectrum(c: ParameterCycle) -> list[tuple[float, float]]:
    """Multiplier pairs ``(1/phi_{i+1}, phi_i)``, i = 1..5, at the origin.

    Pair ``i`` belongs to the map of the cycle shifted by ``i`` (so the last
    pair, ``(1/phi_1, phi_5)``, is the unshifted map).
    """
    phi = phi_products(c).phi
    return [(1.0 / phi[(i + 1) % 5], phi[i]) for i in range(5)]


def resonance_test(lam: float, mu: float, bound: int, tol: float = 1e-10
                   ) -> tuple[int, int] | None:
    """Smallest nonzero ``(p, q)`` with ``|lam^p mu^q - 1| < tol`` and ``|p|, |q| <= bound``.

    Candidates come from the lattice relation ``p log|lam| + q log|mu| ~ 0``
    and are confirmed by evaluating the power product literally. Ties in
    ``|p| + |q|`` go to the pair with ``p > 0`` (or ``p = 0, q > 0``).
    """
    if lam == 0 or mu == 0:
        raise DomainError("multipliers must be nonzero")
    ll, lm = math.log(abs(lam)), math.log(abs(mu))
    cands = set()
    for q in range(-bound, bound + 1):
        if ll == 0:
            ps = range(-bound, bound + 1)
        else:
            p0 = -q * lm / ll
            ps = {math.floor(p0), math.ceil(p0)}
        for p in ps:
            if (p, q) != (0, 0) and abs(p) <= bound:
                cands.add((p, q))
    hits = []
    for p, q in cands:
        try:
            val = lam ** p * mu ** q
        except (OverflowError, ZeroDivisionError):
            continue
        if isinstance(val, complex):
            continue
        if abs(val - 1.0) < tol:
            hits.append((p, q))
    if not hits:
        return None
    hits = [(p, q) if (p > 0 or (p == 0 and q > 0)) else (-p, -q) for p, q in hits]
    return min(set(hits), key=lambda t: (abs(t[0]) + abs(t[1]), -t[0], -t[1]))


@dataclass(frozen=True)
class MeromorphicVerdict:
    verdict: str  # "no_meromorphic_integral" | "inconclusive"
    exponents: tuple[Fraction | None, ...]
    worst_residual: float
    reason: str = ""


def meromorphic_obstruction(c: ParameterCycle, qmax: int = 1000,
                            tol: float = 1e-12) -> MeromorphicVerdict:
    """Test whether every ``phi_i`` is a rational power of ``phi_1``.

    Each exponent ``log phi_i / log phi_1`` is replaced by its best rational
    approximation with denominator at most ``qmax``; the residual
    ``|log phi_i - r log phi_1|`` must stay below ``tol``. Failing any of the
    four rules out a meromorphic first integral; passing all of them is
    only ``inconclusive``.

    Keep ``qmax**2 * tol`` well below 1: every real ratio has an
    approximation with error about ``1/qmax**2``, so a larger ``qmax``
    accepts irrational exponents.
    """
    phi = phi_products(c).phi
    l1 = math.log(phi[0])
    others = [math.log(v) for v in phi[1:]]
    if abs(phi[0] - 1.0) <= 1e-12:
        if all(abs(v - 1.0) <= 1e-12 for v in phi[1:]):
            return MeromorphicVerdict("inconclusive", (None,) * 4, 0.0,
                                      "all phi products equal 1")
        return MeromorphicVerdict("no_meromorphic_integral", (None,) * 4, math.inf,
                                  "phi_1 = 1 while another phi_i differs from 1")
    exps = []
    worst = 0.0
    failed = False
    for li in others:
        r = Fraction(li / l1).limit_denominator(qmax)
        res = abs(li - float(r) * l1)
        worst = max(worst, res)
        exps.append(r)
        if res >= tol:
            failed = True
    return MeromorphicVerdict("no_meromorphic_integral" if failed else "inconclusive",
                              tuple(exps), worst)
