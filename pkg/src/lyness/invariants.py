"""Rational non-autonomous invariants ``V(x, y, n) = Phi_n(x, y) / (x y)``.

Each ``Phi_n`` is a combination of 14 fixed monomials whose coefficients are
named by letters (there is no ``E``: the ``xy`` monomial would only add a
constant to ``V``):

    degree 0:  A = 1
    degree 1:  B = x,    C = y
    degree 2:  D = x^2,  F = y^2
    degree 3:  G = x^3,  H = x^2y,  I = xy^2,  J = y^3
    degree 4:  K = x^4,  L = x^3y,  M = x^2y^2,  N = xy^3,  O = y^4

Invariance ``V(y, (a_n + y)/x, n+1) = V(x, y, n)`` is imposed as the
polynomial identity ``x Psi_n(x, y) = x^3 (a_n + y) Phi_n(x, y)`` with
``Psi_n = x^4 Phi_{n+1}(y, (a_n + y)/x)``; matching the coefficient of every
monomial gives a homogeneous linear system in the ``14 k`` unknowns.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Sequence

import numpy as np
from scipy.optimize import minimize

from .cycle import ParameterCycle
from .errors import (DegenerateInvariantError, DomainError, EmptyLevelError,
                     IndeterminateRankError, UnsupportedPeriodError)
from .maps import PlanarPoint, step

LETTERS = ("A", "B", "C", "D", "F", "G", "H", "I", "J", "K", "L", "M", "N", "O")
# (x-degree, y-degree) of each letter's monomial
MONOMIALS = ((0, 0), (1, 0), (0, 1), (2, 0), (0, 2), (3, 0), (2, 1), (1, 2), (0, 3),
             (4, 0), (3, 1), (2, 2), (1, 3), (0, 4))
NTERMS = len(MONOMIALS)

RANK_TOL = 1e-10
GAP_MIN = 1e2


@dataclass
class InvariantForm:
    """Coefficients of ``Phi_1, ..., Phi_k``, one row of 14 per phase."""

    coefficients: np.ndarray
    residual: float = 0.0
    normalization: float = 1.0
    exact: bool = False

    def __post_init__(self):
        self.coefficients = np.asarray(self.coefficients, dtype=float).reshape(-1, NTERMS)

    @property
    def k(self) -> int:
        return self.coefficients.shape[0]

    def phase(self, n: int) -> np.ndarray:
        """Coefficients of ``Phi_n`` (1-based, k-periodic)."""
        return self.coefficients[(n - 1) % self.k]

    def numerator(self, n: int, x: float, y: float) -> float:
        co = self.phase(n)
        return float(sum(cf * x ** i * y ** j for cf, (i, j) in zip(co, MONOMIALS)))

    def value(self, n: int, x: float, y: float) -> float:
        return self.numerator(n, x, y) / (x * y)

    def __call__(self, x: float, y: float, n: int = 1) -> float:
        return self.value(n, x, y)

    def gradient(self, n: int, x: float, y: float) -> tuple[float, float]:
        co = self.phase(n)
        phi = self.numerator(n, x, y)
        px = sum(cf * i * x ** (i - 1) * y ** j for cf, (i, j) in zip(co, MONOMIALS) if i)
        py = sum(cf * j * x ** i * y ** (j - 1) for cf, (i, j) in zip(co, MONOMIALS) if j)
        xy = x * y
        return (px / xy - phi / (x * xy), py / xy - phi / (y * xy))

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "phases": [{L: float(v) for L, v in zip(LETTERS, row)} for row in self.coefficients],
            "residual": float(self.residual),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), default=_float17)

    @classmethod
    def from_dict(cls, d: dict) -> "InvariantForm":
        rows = [[ph.get(L, 0.0) for L in LETTERS] for ph in d["phases"]]
        if len(rows) != d["k"]:
            raise DomainError("phase count does not match k")
        return cls(np.array(rows, dtype=float), residual=d.get("residual", 0.0))


def _float17(v):
    return float(v)


# -- closed forms ---------------------------------------------------------------

def closed_numerator(c: ParameterCycle) -> np.ndarray:
    """Phase-1 coefficients of the known first integral for k in {1, 2, 3, 6}."""
    k = c.k
    co = np.zeros(NTERMS)
    idx = {L: i for i, L in enumerate(LETTERS)}
    if k == 1:
        (a,) = c.values
        vals = dict(A=a, B=a + 1, C=a + 1, D=1, F=1, H=1, I=1)
    elif k == 2:
        a, b = c.values
        vals = dict(A=a * b, B=a + b * b, C=b + a * a, D=b, F=a, H=a, I=b)
    elif k == 3:
        a, b, cc = c.values
        vals = dict(A=a * cc, B=a + b * cc, C=cc + a * b, D=b, F=b, H=cc, I=a)
    elif k == 6:
        a, b, cc, d, e, f = c.values
        vals = dict(A=a * f, B=a + b * f, C=f + a * e, D=b, F=e, H=cc, I=d)
    else:
        raise UnsupportedPeriodError(f"closed-form integrals exist only for k in {{1,2,3,6}}, got k={k}")
    for L, v in vals.items():
        co[idx[L]] = v
    return co


def eval_closed_integral(c: ParameterCycle, p) -> float:
    """Value of the closed-form first integral of the composed map at ``p``."""
    co = closed_numerator(c)
    x, y = p
    if not (x > 0 and y > 0):
        raise DomainError("closed-form integrals are evaluated in the open first quadrant")
    return float(sum(cf * x ** i * y ** j for cf, (i, j) in zip(co, MONOMIALS) if cf)) / (x * y)


# -- linear system --------------------------------------------------------------

@dataclass
class InvarianceSystem:
    """Coefficient-matching matrix; rows labelled ``(phase, x_deg, y_deg)``."""

    matrix: list | np.ndarray
    rows: list[tuple[int, int, int]]
    k: int
    exact: bool

    @property
    def shape(self) -> tuple[int, int]:
        return (len(self.rows), NTERMS * self.k)

    def as_array(self) -> np.ndarray:
        return np.array(self.matrix, dtype=float)


def build_invariance_system(c: ParameterCycle, *, exact: bool = False) -> InvarianceSystem:
    """Matrix of the linear conditions on the ``14 k`` coefficients.

    Rows are ordered by phase, then lexicographically by monomial with the
    x-degree major; columns by phase, then in ``LETTERS`` order.
    """
    k = c.k
    coeffs = c.as_fractions() if exact else tuple(c.values)
    zero = Fraction(0) if exact else 0.0
    entries: dict[tuple[int, int, int], dict[int, object]] = {}

    def add(row, col, v):
        r = entries.setdefault(row, {})
        r[col] = r.get(col, zero) + v

    for n in range(k):
        a = coeffs[n]
        nxt = (n + 1) % k
        for t, (i, j) in enumerate(MONOMIALS):
            # x * x^4 * y^i * ((a + y) / x)^j
            for l in range(j + 1):
                add((n, 5 - j, i + l), nxt * NTERMS + t, comb(j, l) * a ** (j - l))
            # - x^3 (a + y) x^i y^j
            add((n, 3 + i, j), n * NTERMS + t, -a)
            add((n, 3 + i, j + 1), n * NTERMS + t, -1 if exact else -1.0)
    rows = sorted(entries)
    ncols = NTERMS * k
    if exact:
        mat = [[entries[r].get(col, zero) for col in range(ncols)] for r in rows]
    else:
        mat = np.zeros((len(rows), ncols))
        for ri, r in enumerate(rows):
            for col, v in entries[r].items():
                mat[ri, col] = v
    return InvarianceSystem(mat, rows, k, exact)


def exact_nullspace(rows: list[list[Fraction]], ncols: int) -> list[list[Fraction]]:
    """Kernel basis of a rational matrix by reduced row echelon form."""
    m = [list(r) for r in rows]
    pivots: list[int] = []
    r = 0
    for col in range(ncols):
        piv = next((i for i in range(r, len(m)) if m[i][col] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        pv = m[r][col]
        m[r] = [v / pv for v in m[r]]
        for i in range(len(m)):
            if i != r and m[i][col] != 0:
                f = m[i][col]
                m[i] = [vi - f * vr for vi, vr in zip(m[i], m[r])]
        pivots.append(col)
        r += 1
        if r == len(m):
            break
    free = [col for col in range(ncols) if col not in pivots]
    basis = []
    for fcol in free:
        v = [Fraction(0)] * ncols
        v[fcol] = Fraction(1)
        for row_i, pcol in enumerate(pivots):
            v[pcol] = -m[row_i][fcol]
        basis.append(v)
    return basis


def float_nullspace(mat: np.ndarray, *, rtol: float = RANK_TOL, gap_min: float = GAP_MIN
                    ) -> np.ndarray:
    """Kernel basis (as rows) from the SVD; refuses ambiguous numerical rank."""
    _, s, vt = np.linalg.svd(mat)
    if s.size == 0 or s[0] == 0:
        return np.eye(mat.shape[1])
    cut = rtol * s[0]
    rank = int((s > cut).sum())
    if rank < len(s) and s[rank] > 0 and s[rank - 1] / s[rank] < gap_min:
        raise IndeterminateRankError("singular-value gap too small to fix the rank", s)
    if rank == len(s) and s[-1] / cut < gap_min:
        raise IndeterminateRankError("smallest singular value sits near the rank threshold", s)
    return vt[rank:]


def _normalize(v: np.ndarray) -> tuple[np.ndarray, float]:
    scale = float(np.max(np.abs(v)))
    v = v / scale
    nz = np.flatnonzero(np.abs(v) > 1e-14)
    if nz.size and v[nz[0]] < 0:
        v = -v
        scale = -scale
    return v, scale


def nullspace_invariants(c: ParameterCycle, backend: str = "float") -> list[InvariantForm]:
    """Basis of all invariants of the 14-monomial form for this cycle.

    ``backend`` is ``"float"`` (SVD, rank threshold ``1e-10`` relative) or
    ``"exact"`` (rational elimination on the exact binary values of the
    coefficients). An empty list means no invariant of this form exists.
    """
    if backend == "exact":
        system = build_invariance_system(c, exact=True)
        basis = exact_nullspace(system.matrix, NTERMS * c.k)
        vecs = [np.array([float(v) for v in b]) for b in basis]
    elif backend == "float":
        system = build_invariance_system(c)
        vecs = list(float_nullspace(system.matrix))
    else:
        raise DomainError(f"unknown backend {backend!r}")
    M = build_invariance_system(c).matrix if backend == "exact" else system.matrix
    if len(vecs) > 1 and backend == "float":
        # SVD bases are only defined up to rotation; echelon form is reproducible
        vecs = list(_echelon(np.array(vecs)))
    out = []
    for v in vecs:
        v, scale = _normalize(np.asarray(v, dtype=float))
        residual = float(np.max(np.abs(M @ v))) if M.size else 0.0
        out.append(InvariantForm(v.reshape(c.k, NTERMS), residual=residual,
                                 normalization=scale, exact=backend == "exact"))
    return out


def _echelon(B: np.ndarray) -> np.ndarray:
    B = B.copy()
    r = 0
    for col in range(B.shape[1]):
        if r == B.shape[0]:
            break
        piv = r + int(np.argmax(np.abs(B[r:, col])))
        if abs(B[piv, col]) < 1e-9:
            continue
        B[[r, piv]] = B[[piv, r]]
        B[r] /= B[r, col]
        for i in range(B.shape[0]):
            if i != r:
                B[i] -= B[i, col] * B[r]
        r += 1
    return B


def kernel_dimension(c: ParameterCycle, backend: str = "float") -> int:
    return len(nullspace_invariants(c, backend))


def identity_residual(c: ParameterCycle, inv: InvariantForm, n: int, x: float, y: float) -> float:
    """``x Psi_n - x^3 (a_n + y) Phi_n`` evaluated at ``(x, y)``."""
    a = c.a(n)
    u = (a + y) / x
    lhs = x ** 5 * inv.numerator(n + 1, y, u)
    rhs = x ** 3 * (a + y) * inv.numerator(n, x, y)
    return lhs - rhs


def verify_conservation(c: ParameterCycle, inv: InvariantForm, p0, steps: int) -> float:
    """Largest relative drift of ``V(x_n, x_{n+1}, n)`` along ``steps`` recurrence steps."""
    if inv.k != c.k:
        raise DomainError(f"invariant has {inv.k} phases but the cycle has k={c.k}")
    if not np.any(inv.coefficients):
        raise DegenerateInvariantError("all coefficients vanish")
    for n in range(1, c.k + 1):
        if not np.any(inv.phase(n)):
            raise DegenerateInvariantError(f"phase {n} numerator is identically zero")
    p = PlanarPoint(*p0)
    v0 = inv.value(1, *p)
    if v0 == 0:
        raise DegenerateInvariantError("invariant vanishes at the starting point")
    drift = 0.0
    for s in range(steps):
        n = s % c.k + 1
        p = step(c.values[n - 1], p)
        v = inv.value(n % c.k + 1, *p)
        drift = max(drift, abs(v - v0) / abs(v0))
    return drift


# -- level sets for k = 6 --------------------------------------------------------

def minimum_k6(c: ParameterCycle) -> tuple[float, PlanarPoint]:
    """Minimum of the closed-form integral on the open quadrant (k = 6)."""
    if c.k != 6:
        raise UnsupportedPeriodError("level bounds are implemented for k = 6")
    co = closed_numerator(c)

    def f(z):
        x, y = math.exp(z[0]), math.exp(z[1])
        return sum(cf * x ** i * y ** j for cf, (i, j) in zip(co, MONOMIALS) if cf) / (x * y)

    best = None
    for z0 in ((0.0, 0.0), (1.0, 1.0), (-1.0, -1.0), (2.0, 0.0), (0.0, 2.0)):
        r = minimize(f, z0, method="Nelder-Mead",
                     options={"xatol": 1e-12, "fatol": 1e-14, "maxiter": 4000})
        if best is None or r.fun < best.fun:
            best = r
    return float(best.fun), PlanarPoint(math.exp(best.x[0]), math.exp(best.x[1]))


def level_bounds_k6(c: ParameterCycle, h: float) -> tuple[tuple[float, float], tuple[float, float]]:
    """Box ``[x_lo, x_hi] x [y_lo, y_hi]`` containing the level set ``V = h`` in Q+."""
    if c.k != 6:
        raise UnsupportedPeriodError("level bounds are implemented for k = 6")
    vmin, _ = minimum_k6(c)
    if h < vmin * (1 - 1e-12):
        raise EmptyLevelError(f"level {h!r} is below the minimum {vmin!r}")
    a, b, cc, d, e, f = c.values
    return ((f + a * e) / h, h / cc), ((a + b * f) / h, h / d)
