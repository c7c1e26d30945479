"""Constructive integrable cycles, identity checks and the numerical-chaos probe."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .cycle import ParameterCycle
from .equilibria import (EquilibriumReport, _dedupe, _newton, classify_multipliers,
                         minimal_period)
from .errors import DomainError, UnsupportedPeriodError
from .maps import PlanarPoint, compose, compose_many

LOG_LO, LOG_HI = math.log(0.2), math.log(5.0)
MAX_REDRAWS = 200

# ranks reached by build_integrable_cycle; see the k = 10 note there
_TABLE_RANK = {1: 1, 2: 2, 3: 3, 4: 4, 6: 6, 7: 3, 8: 4, 9: 5,
               10: 6, 11: 6, 12: 7, 13: 8, 14: 9}


def expected_rank(k: int) -> int:
    if k == 5:
        raise UnsupportedPeriodError("no integrable construction for k = 5")
    if k >= 15:
        return k
    return _TABLE_RANK[k]


def linear_block(a: float, c: float) -> tuple[float, ...]:
    """Five coefficients whose composed map is ``(x, y) -> (x/a, y/(a c))``."""
    return (a, a * c, c, 1.0 / a, 1.0 / (a * c))


def lyness_conjugate_tail(a: float, c: float) -> tuple[float, ...]:
    """Four coefficients whose composed map is conjugate to ``F_{1/(a c^2)}``."""
    return (a, a * c, c, 1.0 / a)


def _tail(ell: int, draw) -> tuple[float, ...]:
    if ell == 0:
        return ()
    if ell == 4:
        return lyness_conjugate_tail(draw(), draw())
    return tuple(draw() for _ in range(ell))


def build_integrable_cycle(k: int, seed: int = 0) -> ParameterCycle:
    """A primitive k-cycle whose composed map has a rational first integral.

    * ``k <= 4`` and ``k >= 15``: ``m`` linear blocks whose products of
      ``a_i`` and ``c_i`` are 1 (so they compose to the identity, which needs
      ``m >= 3``), followed by an integrable tail of length ``k mod 5``.
    * ``k = 6``: any six distinct values.
    * ``k = 7, 8, 9``: five ones (``F_1^5 = Id``) and an integrable tail.
    * ``10 <= k <= 14``: a linear block and its inverse block, then a tail.
      The two blocks carry six distinct values, so with distinct tails the
      rank is ``k - 4``; one tail value is tied to a block value to get
      ``k - 5`` whenever the tail is non-empty.
    """
    if k < 1:
        raise DomainError("k must be positive")
    if k == 5:
        raise UnsupportedPeriodError("no integrable construction for k = 5")
    rng = np.random.default_rng(seed)

    def draw() -> float:
        return float(np.exp(rng.uniform(LOG_LO, LOG_HI)))

    want = expected_rank(k)
    for _ in range(MAX_REDRAWS):
        vals = _candidate(k, draw)
        c = ParameterCycle(vals)
        if c.k == k and c.rank == want and c.primitive_period == k:
            return c
    raise RuntimeError(f"could not draw a k={k} cycle with rank {want}")


def _candidate(k: int, draw) -> tuple[float, ...]:
    if k == 6:
        return tuple(draw() for _ in range(6))
    if k in (7, 8, 9):
        return (1.0,) * 5 + _tail(k - 5, draw)
    if 10 <= k <= 14:
        a, c = draw(), draw()
        blocks = linear_block(a, c) + linear_block(1.0 / a, 1.0 / c)
        ell = k - 10
        if ell == 0:
            return blocks
        if ell == 4:
            return blocks + lyness_conjugate_tail(draw(), c)
        return blocks + (a,) + tuple(draw() for _ in range(ell - 1))
    m, ell = divmod(k, 5)
    if m in (1, 2):
        raise UnsupportedPeriodError(f"k={k} is not covered")
    blocks: tuple[float, ...] = ()
    if m:
        a_s = [draw() for _ in range(m - 1)]
        c_s = [draw() for _ in range(m - 1)]
        a_s.append(1.0 / math.prod(a_s))
        c_s.append(1.0 / math.prod(c_s))
        for a, c in zip(a_s, c_s):
            blocks += linear_block(a, c)
    return blocks + _tail(ell, draw)


def _rel_err(p, q) -> float:
    p, q = np.asarray(p, dtype=float), np.asarray(q, dtype=float)
    return float(np.max(np.abs(p - q) / np.maximum(np.abs(q), 1e-300)))


def _samples(n: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return np.exp(rng.uniform(math.log(0.1), math.log(10.0), size=(n, 2)))


def check_lyness_conjugacy(a: float, c: float, samples: int = 100, seed: int = 0) -> float:
    """Max relative error of ``phi o F_{[4]} o phi^{-1} = F_{1/(a c^2)}``.

    ``F_{[4]}`` is the map of the cycle ``(a, ac, c, 1/a)`` and
    ``phi(x, y) = (y/c, x/(a c))``.
    """
    tail = lyness_conjugate_tail(a, c)
    target = 1.0 / (a * c * c)
    err = 0.0
    for u, v in _samples(samples, seed):
        x, y = a * c * v, c * u  # phi^{-1}(u, v)
        fx, fy = compose(tail, (x, y))
        lhs = (fy / c, fx / (a * c))
        rhs = (v, (target + v) / u)
        err = max(err, _rel_err(lhs, rhs))
    return err


def check_linear_case(a: float, c: float, samples: int = 100, seed: int = 0) -> float:
    """Max relative error of the linear-block map against ``(x/a, y/(a c))``."""
    blk = linear_block(a, c)
    pts = np.vstack([[1.0, 1.0], _samples(samples, seed)])
    err = 0.0
    for x, y in pts:
        err = max(err, _rel_err(compose(blk, (x, y)), (x / a, y / (a * c))))
    return err


def check_degenerate_family(a: float, y: float) -> PlanarPoint:
    """Image of ``(1, y)`` under the cycle ``(1, 1, 1, 1, a)``; equals ``(1, (1+a) y / 2)``."""
    if a <= 0 or y <= 0:
        raise DomainError("a and y must be positive")
    return compose((1.0, 1.0, 1.0, 1.0, a), (1.0, y))


def unique_fixed_point_sufficient(c6: ParameterCycle) -> bool:
    """True when both monotonicity numerators have no root in ``(0, inf)``.

    Under that condition the two curves of the k = 6 fixed-point system are
    graphs of increasing functions and meet exactly once in Q+.
    """
    if c6.k != 6:
        raise UnsupportedPeriodError("the criterion is stated for k = 6")
    a, b, c, d, e, f = c6.values
    return (not _has_positive_root(b * d, 2 * b * e, a * e + b * e * f - a * d * f)
            and not _has_positive_root(c * e, 2 * b * e, b * f + a * b * e - a * c * f))


def _has_positive_root(q2: float, q1: float, q0: float) -> bool:
    # q2 > 0 and q1 > 0 for positive cycles: a positive root exists iff q0 < 0,
    # or q0 == 0 never gives a positive root (roots 0 and -q1/q2).
    if q2 == 0:
        return q1 != 0 and -q0 / q1 > 0
    disc = q1 * q1 - 4 * q2 * q0
    if disc < 0:
        return False
    r = math.sqrt(disc)
    return any(root > 0 for root in ((-q1 + r) / (2 * q2), (-q1 - r) / (2 * q2)))


# -- numerical chaos evidence ----------------------------------------------------

@dataclass
class SSNCEvidence:
    cycle: ParameterCycle
    period: int
    elliptic_orbit: EquilibriumReport
    hyperbolic_orbit: EquilibriumReport
    elliptic_points: np.ndarray
    hyperbolic_points: np.ndarray
    island_samples: np.ndarray

    def to_dict(self) -> dict:
        return {
            "cycle": list(self.cycle.values),
            "period": self.period,
            "elliptic_orbit": self.elliptic_orbit.to_dict(),
            "hyperbolic_orbit": self.hyperbolic_orbit.to_dict(),
            "elliptic_points": self.elliptic_points.tolist(),
            "hyperbolic_points": self.hyperbolic_points.tolist(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    def island_csv(self) -> str:
        lines = ["n,x,y"]
        for n, (x, y) in enumerate(self.island_samples, start=1):
            lines.append(f"{n},{x:.17g},{y:.17g}")
        return "\n".join(lines) + "\n"


def default_log_seeds(n: int = 32, lo: float = -8.0, hi: float = 16.0) -> np.ndarray:
    g = np.linspace(lo, hi, n)
    gx, gy = np.meshgrid(g, g, indexing="ij")
    return np.stack([gx.ravel(), gy.ravel()], axis=1)


def _orbit_points(c, z: np.ndarray, p: int) -> np.ndarray:
    pts = [z]
    cur = z[None, :]
    for _ in range(p - 1):
        cur, _ = compose_many(c, cur, "log")
        pts.append(cur[0])
    return np.array(pts)


def periodic_orbits(c: ParameterCycle, p: int, seeds=None) -> list[tuple[np.ndarray, EquilibriumReport]]:
    """Orbits of minimal period ``p`` found by Newton in log coordinates.

    Each entry holds the orbit points (log coordinates, sorted) and a report
    for its lexicographically smallest point, in standard coordinates.
    """
    s = default_log_seeds() if seeds is None else np.asarray(seeds, dtype=float)
    roots = _newton(c.values, s, p, "log", max_step=2.0)
    roots = roots[np.abs(roots).max(axis=1) < 200]
    seen: list[np.ndarray] = []
    out = []
    for z in _dedupe(roots):
        z = np.array(z)
        if minimal_period(c.values, z, p, "log") != p:
            continue
        orbit = _orbit_points(c.values, z, p)
        key = orbit[np.lexsort((orbit[:, 1], orbit[:, 0]))]
        if any(np.abs(key - o).max() < 1e-7 * max(1.0, np.abs(o).max()) for o in seen):
            continue
        seen.append(key)
        rep_z = key[0]
        _, J = compose_many(c.values, rep_z[None, :], "log", times=p)
        J = J[0]
        det = float(np.linalg.det(J))
        ev = np.linalg.eigvals(J)
        ev = tuple(sorted((complex(v) for v in ev), key=lambda v: (-v.real, -v.imag)))
        rep = EquilibriumReport(PlanarPoint(math.exp(rep_z[0]), math.exp(rep_z[1])), p, ev,
                                abs(det - 1.0), classify_multipliers(ev[0], ev[1], det))
        out.append((key, rep))
    return out


def ssnc_probe(c: ParameterCycle, p_max: int = 30, seeds=None,
               island_iterates: int = 0, max_pairs: int | None = None) -> list[SSNCEvidence]:
    """Pairs of elliptic and hyperbolic periodic orbits of equal minimal period.

    The search runs in log coordinates; reports are mapped back to the
    standard plane. Transversality of separatrices is not examined.
    ``island_iterates`` > 0 also samples the orbit of a point next to each
    elliptic orbit. With ``max_pairs`` the search stops after the period at
    which that many pairs have been collected.
    """
    if p_max < 2:
        raise DomainError("p_max must be >= 2")
    evidence = []
    for p in range(1, p_max + 1):
        orbits = periodic_orbits(c, p, seeds)
        ell = [o for o in orbits if o[1].kind == "elliptic"]
        hyp = [o for o in orbits if o[1].kind == "hyperbolic_saddle"]
        for (ez, er), (hz, hr) in zip(ell, hyp):
            island = np.empty((0, 2))
            if island_iterates:
                z = ez[0] + np.array([1e-2, 0.0])
                pts = [z]
                cur = z[None, :]
                for _ in range(island_iterates):
                    cur, _ = compose_many(c.values, cur, "log")
                    pts.append(cur[0])
                island = np.exp(np.array(pts))
            evidence.append(SSNCEvidence(c, p, er, hr, np.exp(ez), np.exp(hz), island))
        if max_pairs is not None and len(evidence) >= max_pairs:
            break
    return evidence
