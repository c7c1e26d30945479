"""Orbits of the recurrence ``x_{n+2} = (a_n + x_{n+1}) / x_n`` and their diagnostics.

Orbits are always generated one factor at a time so that every term
``x_n`` is recorded, not just the points of the composed map.
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import mpmath
import numpy as np

from .cycle import ParameterCycle, phi_products
from .equilibria import find_fixed_points
from .errors import DomainError, GeometryError, PoleError, RangeError
from .maps import PlanarPoint, compose, compose_many

MODES = ("standard", "log", "extended")
EXTENDED_PREC = 113

ESCAPE_EPS = 1e-8
ESCAPE_BIG = 1e8
LOG_SWITCH_LO = 1e-12
LOG_SWITCH_HI = 1e12

BURN_IN = 1000
GAP_FACTOR = 20.0
MIN_SAMPLES = 10_000


@dataclass
class OrbitRecord:
    """Terms ``x_1, x_2, ...`` of one orbit.

    ``values`` holds the terms in the coordinates of ``mode``: plain values
    for ``standard`` and ``extended``, logarithms for ``log``.
    """

    cycle: ParameterCycle
    values: np.ndarray
    mode: str = "standard"
    exact_values: list | None = None

    @property
    def count(self) -> int:
        return len(self.values)

    @property
    def x(self) -> np.ndarray:
        if self.mode == "log":
            with np.errstate(over="ignore"):
                return np.exp(self.values)
        return self.values

    @property
    def log_x(self) -> np.ndarray:
        return self.values if self.mode == "log" else np.log(self.values)

    @property
    def min(self) -> float:
        return float(self.x.min())

    @property
    def max(self) -> float:
        return float(self.x.max())

    def points(self) -> np.ndarray:
        """Phase-plane pairs ``(x_n, x_{n+1})`` in the record's coordinates."""
        v = self.values
        return np.stack([v[:-1], v[1:]], axis=1)

    def to_csv(self) -> str:
        """``n,x,y`` rows with ``x = x_n`` and ``y = x_{n+1}`` (17 significant digits)."""
        xs = self.x
        buf = io.StringIO()
        buf.write("n,x,y\n")
        for n in range(len(xs) - 1):
            buf.write(f"{n + 1},{xs[n]:.17g},{xs[n + 1]:.17g}\n")
        return buf.getvalue()


def iterate(c: ParameterCycle, p0, n: int, mode: str = "standard") -> OrbitRecord:
    """First ``n`` terms of the recurrence from ``(x_1, x_2) = p0``.

    In ``log`` mode ``p0`` is given in log coordinates and the terms are
    logarithms. ``extended`` runs in 113-bit arithmetic. A pole or overflow
    raises with the step index and the partial record attached.
    """
    if mode not in MODES:
        raise DomainError(f"unknown mode {mode!r}")
    if n < 2:
        raise DomainError("need at least the two initial terms")
    coeffs = c.values
    k = c.k
    if mode == "log":
        logs = [math.log(a) for a in coeffs]
        out = np.empty(n)
        u, w = float(p0[0]), float(p0[1])
        out[0], out[1] = u, w
        for i in range(2, n):
            la = logs[(i - 2) % k]
            nw = (la + math.log1p(math.exp(w - la))) if la > w else (w + math.log1p(math.exp(la - w)))
            u, w = w, nw - u
            out[i] = w
        return OrbitRecord(c, out, mode)
    if mode == "extended":
        with mpmath.workprec(EXTENDED_PREC):
            seq = [mpmath.mpf(p0[0]), mpmath.mpf(p0[1])]
            cs = [mpmath.mpf(a) for a in coeffs]
            for i in range(2, n):
                if seq[-2] == 0:
                    raise PoleError("pole x_n = 0", step=i + 1,
                                    partial=OrbitRecord(c, np.array(seq, dtype=float), mode, seq))
                seq.append((cs[(i - 2) % k] + seq[-1]) / seq[-2])
            return OrbitRecord(c, np.array([float(v) for v in seq]), mode, seq)
    out = np.empty(n)
    x, y = float(p0[0]), float(p0[1])
    out[0], out[1] = x, y
    for i in range(2, n):
        if x == 0:
            raise PoleError("pole x_n = 0", step=i + 1, factor=(i - 2) % k + 1,
                            partial=OrbitRecord(c, out[:i].copy(), mode))
        x, y = y, (coeffs[(i - 2) % k] + y) / x
        if not (1e-300 <= abs(y) <= 1e300):
            raise RangeError(f"x_{i + 1}={y!r} left the standard range", step=i + 1,
                             partial=OrbitRecord(c, out[:i].copy(), mode))
        out[i] = y
    return OrbitRecord(c, out, mode)


def composed_orbit(c: ParameterCycle, p0, n: int) -> Iterator[PlanarPoint]:
    p = PlanarPoint(*p0)
    yield p
    for _ in range(n):
        p = compose(c, p)
        yield p


def detect_period(c: ParameterCycle, p0, max_period: int, tol: float = 1e-8) -> int | None:
    """Smallest ``q <= max_period`` with ``F^q(p0) ~ p0``, confirmed on three returns.

    The recurrence itself then has period ``q * k``.
    """
    p0 = np.asarray(p0, dtype=float)
    thresh = tol * (1.0 + np.linalg.norm(p0))
    pts = [p0]
    p = PlanarPoint(*p0)
    try:
        for _ in range(3 * max_period):
            p = compose(c, p)
            pts.append(np.array(p))
    except (PoleError, RangeError):
        pass
    for q in range(1, max_period + 1):
        if 3 * q >= len(pts):
            break
        if all(np.linalg.norm(pts[j * q] - p0) < thresh for j in (1, 2, 3)):
            return q
    return None


def global_periodicity_test(c: ParameterCycle, m_max: int, samples: int = 20,
                            seed: int = 0, tol: float = 1e-8) -> int | None:
    """Smallest ``m <= m_max`` such that ``F^m`` fixes every random Q+ sample."""
    if samples < 20:
        raise DomainError("use at least 20 samples")
    rng = np.random.default_rng(seed)
    pts = np.exp(rng.uniform(math.log(0.1), math.log(10.0), size=(samples, 2)))
    cur = pts.copy()
    for m in range(1, m_max + 1):
        cur, _ = compose_many(c.values, cur)
        if not np.isfinite(cur).all():
            return None
        rel = np.abs(cur - pts) / np.abs(pts)
        if rel.max() < tol:
            return m
    return None


@dataclass
class IntervalReport:
    intervals: list[tuple[float, float]]
    gap_threshold: float
    sample_size: int

    @property
    def count(self) -> int:
        return len(self.intervals)

    def to_dict(self) -> dict:
        return {"count": self.count, "gap_threshold": self.gap_threshold,
                "intervals": [[lo, hi] for lo, hi in self.intervals]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def adherence_intervals(xs: Sequence[float], burn_in: int = BURN_IN,
                        gap_factor: float = GAP_FACTOR) -> IntervalReport:
    """Split the sorted samples at gaps wider than ``gap_factor`` times the
    99th percentile of the nearest-neighbour gaps.

    The rule is unchanged by affine rescaling of the samples but not by
    nonlinear ones: log-mode orbits are clustered in log coordinates, where
    values spread over many decades are resolved evenly.
    """
    s = np.sort(np.asarray(xs, dtype=float)[burn_in:])
    if len(s) < MIN_SAMPLES:
        raise DomainError(f"need at least {MIN_SAMPLES} samples after burn-in, got {len(s)}")
    gaps = np.diff(s)
    thr = float(gap_factor * np.percentile(gaps, 99))
    cuts = np.flatnonzero(gaps > thr)
    starts = np.concatenate([[0], cuts + 1])
    ends = np.concatenate([cuts, [len(s) - 1]])
    return IntervalReport([(float(s[a]), float(s[b])) for a, b in zip(starts, ends)],
                          thr, len(s))


@dataclass(frozen=True)
class PersistenceVerdict:
    kind: str  # "bounded" | "escape" | "undecided"
    x_min: float
    x_max: float
    step: int | None = None


def persistence_probe(c: ParameterCycle, p0, n: int = 10_000, eps: float = ESCAPE_EPS,
                      big: float = ESCAPE_BIG) -> PersistenceVerdict:
    """Follow ``n`` recurrence steps looking for escape or evidence of boundedness.

    Escape means the running minimum fell below ``eps`` and the running
    maximum exceeded ``big``. Iteration moves to log coordinates once a term
    leaves ``[1e-12, 1e12]``.
    """
    if n < 1000:
        raise DomainError("persistence probe needs n >= 1000")
    coeffs = c.values
    logs = [math.log(a) for a in coeffs]
    k = c.k
    x, y = float(p0[0]), float(p0[1])
    lo = hi = None
    in_log = False
    lo, hi = min(x, y), max(x, y)
    revisit = False
    last_change = 0
    for i in range(n):
        j = i % k
        if not in_log:
            ny = (coeffs[j] + y) / x
            if not (LOG_SWITCH_LO <= ny <= LOG_SWITCH_HI):
                in_log = True
                x, y = math.log(x), math.log(y)
        if in_log:
            la = logs[j]
            nw = (la + math.log1p(math.exp(y - la))) if la > y else (y + math.log1p(math.exp(la - y)))
            x, y = y, nw - x
            val = math.exp(y) if y < 709 else math.inf
        else:
            x, y = y, ny
            val = y
        if val < lo * (1 - 1e-12) or val > hi * (1 + 1e-12):
            last_change = i
        lo, hi = min(lo, val), max(hi, val)
        if lo < eps and hi > big:
            return PersistenceVerdict("escape", lo, hi, i + 3)
        if not in_log and j == k - 1 and math.hypot(x - p0[0], y - p0[1]) < 1e-6:
            revisit = True
    if revisit or (n - last_change) > n // 10:
        return PersistenceVerdict("bounded", lo, hi)
    return PersistenceVerdict("undecided", lo, hi)


@dataclass(frozen=True)
class PersistenceClass:
    verdict: str  # "nonpersistent_by_theorem" | "hypothesis_fails"
    phi: tuple[float, ...]
    warning: str | None = None


def classify_persistence(c: ParameterCycle, tol: float = 1e-12) -> PersistenceClass:
    """Non-persistence criterion for k a multiple of 5 from the phi products."""
    phi = phi_products(c).phi
    straddle = min(phi) < 1.0 < max(phi)
    near_one = [i + 1 for i, v in enumerate(phi) if abs(v - 1.0) <= tol]
    if straddle and not near_one:
        return PersistenceClass("nonpersistent_by_theorem", phi)
    warning = None
    if near_one and straddle:
        warning = f"phi_{near_one} within {tol:g} of 1 while the others straddle 1"
    return PersistenceClass("hypothesis_fails", phi, warning)


def rotation_number(c: ParameterCycle, p0, n: int = 1000, center=None) -> float:
    """Mean counterclockwise advance, in turns, of ``F`` around an elliptic fixed point.

    Angles are measured from the positive x-direction at the fixed point;
    the result lies in ``[0, 1)``.
    """
    if center is None:
        fps = [r for r in find_fixed_points(c) if r.kind == "elliptic"]
        if not fps:
            raise GeometryError("no elliptic fixed point in Q+ to rotate around")
        p = np.asarray(p0, dtype=float)
        center = min(fps, key=lambda r: np.hypot(*(p - np.asarray(r.point)))).point
    cx, cy = float(center[0]), float(center[1])
    p = PlanarPoint(*p0)
    if math.hypot(p.x - cx, p.y - cy) <= 1e-6:
        raise GeometryError("starting point coincides with the fixed point")
    prev = math.atan2(p.y - cy, p.x - cx)
    total = 0.0
    signs = set()
    for _ in range(n):
        p = compose(c, p)
        if math.hypot(p.x - cx, p.y - cy) <= 1e-6:
            raise GeometryError("orbit passes through the fixed point")
        ang = math.atan2(p.y - cy, p.x - cx)
        d = (ang - prev) / (2 * math.pi)
        d -= round(d)
        if d != 0:
            signs.add(d > 0)
        total += d
        prev = ang
    if len(signs) > 1:
        raise GeometryError("orbit does not wind monotonically around the fixed point")
    return (total / n) % 1.0
