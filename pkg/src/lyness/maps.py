"""Elementary Lyness steps, their compositions and the log-conjugate maps.

A cycle ``(a_1, ..., a_k)`` acts on the plane as ``F_{a_k} o ... o F_{a_1}``:
the factor ``a_1`` is applied first, so the composed map sends
``(x_1, x_2)`` to ``(x_{k+1}, x_{k+2})``.

In log coordinates ``z = log x`` every factor becomes
``G_a(z, w) = (w, -z + log(a + e^w))``, which is defined on the whole plane
and has unit Jacobian determinant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .cycle import ParameterCycle
from .errors import DomainError, PoleError, RangeError

TINY = 1e-300
HUGE = 1e300


class PlanarPoint(NamedTuple):
    x: float
    y: float

    @property
    def in_q_plus(self) -> bool:
        return self.x > 0 and self.y > 0

    @property
    def domain(self) -> str:
        """``"Q+"`` for the open first quadrant, ``"extended"`` otherwise."""
        return "Q+" if self.in_q_plus else "extended"


@dataclass(frozen=True)
class Jacobian2:
    """A 2x2 real matrix ``[[a, b], [c, d]]``."""

    a: float
    b: float
    c: float
    d: float

    @classmethod
    def from_array(cls, m) -> "Jacobian2":
        m = np.asarray(m, dtype=float)
        return cls(float(m[0, 0]), float(m[0, 1]), float(m[1, 0]), float(m[1, 1]))

    def as_array(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]])

    @property
    def det(self) -> float:
        return self.a * self.d - self.b * self.c

    @property
    def trace(self) -> float:
        return self.a + self.d

    @property
    def eigenvalues(self) -> tuple[complex, complex]:
        """Roots of ``t^2 - trace t + det``, larger real part (or +imag) first."""
        tr, det = self.trace, self.det
        disc = tr * tr - 4.0 * det
        if disc >= 0:
            r = math.sqrt(disc)
            # avoid cancellation in the smaller root
            big = 0.5 * (tr + math.copysign(r, tr)) if tr != 0 else 0.5 * r
            if big == 0:
                return complex(0.0), complex(0.0)
            small = det / big
            l1, l2 = sorted((big, small), reverse=True)
            return complex(l1), complex(l2)
        im = 0.5 * math.sqrt(-disc)
        return complex(0.5 * tr, im), complex(0.5 * tr, -im)

    def __matmul__(self, other: "Jacobian2") -> "Jacobian2":
        return Jacobian2(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )


IDENTITY = Jacobian2(1.0, 0.0, 0.0, 1.0)


def _check_range(v: float, *, allow_zero: bool, factor: int | None = None) -> None:
    av = abs(v)
    if not math.isfinite(av) or av > HUGE or (av < TINY and not (allow_zero and av == 0.0)):
        raise RangeError(f"coordinate {v!r} left the standard range [1e-300, 1e300]"
                         + (f" after factor {factor}" if factor else ""))


def step(a: float, p) -> PlanarPoint:
    """``F_a(x, y) = (y, (a + y) / x)``."""
    x, y = p
    if x == 0:
        raise PoleError(f"step with a={a!r} is singular at x=0", coordinate=x)
    return PlanarPoint(y, (a + y) / x)


def step_inverse(a: float, p) -> PlanarPoint:
    """``F_a^{-1}(x, y) = ((a + x) / y, x)``."""
    x, y = p
    if y == 0:
        raise PoleError(f"inverse step with a={a!r} is singular at y=0", coordinate=y)
    return PlanarPoint((a + x) / y, x)


def compose(c: ParameterCycle | Sequence[float], p, *, extended: bool = False) -> PlanarPoint:
    """Apply ``F_{a_1}``, then ``F_{a_2}``, ..., then ``F_{a_k}`` to ``p``.

    With ``extended=True`` (k a multiple of 5) the map is evaluated through
    the closed form of each block of five factors, which stays analytic on a
    neighbourhood of the closed quadrant, including the origin.
    """
    if extended:
        return _compose_blocks(tuple(c), p)
    x, y = p
    for j, a in enumerate(c, start=1):
        if x == 0:
            raise PoleError(f"factor {j} (a={a!r}) hit the pole x=0", coordinate=x, factor=j)
        x, y = y, (a + y) / x
        _check_range(y, allow_zero=False, factor=j)
    return PlanarPoint(x, y)


def compose_inverse(c: ParameterCycle | Sequence[float], p) -> PlanarPoint:
    x, y = p
    for j, a in reversed(list(enumerate(c, start=1))):
        if y == 0:
            raise PoleError(f"inverse factor {j} hit the pole y=0", coordinate=y, factor=j)
        x, y = (a + x) / y, x
    return PlanarPoint(x, y)


def _logaddexp(la: float, w: float) -> float:
    """``log(exp(la) + exp(w))`` without overflow."""
    if la > w:
        return la + math.log1p(math.exp(w - la))
    return w + math.log1p(math.exp(la - w))


def log_step(a: float, z) -> PlanarPoint:
    """``G_a(z, w) = (w, -z + log(a + e^w))``."""
    u, w = z
    return PlanarPoint(w, -u + _logaddexp(math.log(a), w))


def log_compose(c: ParameterCycle | Sequence[float], z) -> PlanarPoint:
    u, w = z
    for a in c:
        u, w = w, -u + _logaddexp(math.log(a), w)
    return PlanarPoint(u, w)


def to_log(p) -> PlanarPoint:
    return PlanarPoint(math.log(p[0]), math.log(p[1]))


def from_log(z) -> PlanarPoint:
    return PlanarPoint(math.exp(z[0]), math.exp(z[1]))


def _sigmoid_weight(a: float, w: float) -> float:
    """``e^w / (a + e^w)``, the derivative of ``log(a + e^w)``."""
    t = math.log(a) - w
    if t > 0:
        e = math.exp(-t)
        return e / (1.0 + e)
    return 1.0 / (1.0 + math.exp(t))


def jacobian(c: ParameterCycle | Sequence[float], p, space: str = "standard", *,
             extended: bool = False) -> Jacobian2:
    """Analytic Jacobian of the composed map at ``p`` (chain rule, no differencing).

    ``space`` is ``"standard"`` for ``F`` or ``"log"`` for its conjugate ``G``.
    """
    if space == "log":
        u, w = p
        J = IDENTITY
        for a in c:
            s = _sigmoid_weight(a, w)
            J = Jacobian2(0.0, 1.0, -1.0, s) @ J
            u, w = w, -u + _logaddexp(math.log(a), w)
        return J
    if space != "standard":
        raise DomainError(f"unknown space {space!r}")
    if extended:
        return _jacobian_blocks(tuple(c), p)
    x, y = p
    J = IDENTITY
    for j, a in enumerate(c, start=1):
        if x == 0:
            raise PoleError(f"factor {j} (a={a!r}) hit the pole x=0", coordinate=x, factor=j)
        J = Jacobian2(0.0, 1.0, -(a + y) / (x * x), 1.0 / x) @ J
        x, y = y, (a + y) / x
    return J


# -- blocks of five factors, analytic on a neighbourhood of the origin ---------

def _block_terms(a1, a2, a3, a4, a5, x, y):
    A = a3 * x * y + a4 * y * y + a2 * x + (a1 * a4 + 1) * y + a1
    B = a1 + y
    C = a1 + a2 * x + y
    N = (a3 * x * x * y + a4 * x * y * y + a2 * x * x + (a1 * a4 + a2 * a5 + 1) * x * y
         + a5 * y * y + a1 * (1 + a2 * a5) * x + 2 * a1 * a5 * y + a1 * a1 * a5)
    D = a1 + a2 * x + y + a3 * x * y
    return A, B, C, N, D


def _block(a, p):
    a1, a2, a3, a4, a5 = a
    x, y = p
    A, B, C, N, D = _block_terms(a1, a2, a3, a4, a5, x, y)
    if B == 0 or C == 0 or D == 0:
        raise PoleError("five-factor block is singular at this point", coordinate=(x, y))
    return PlanarPoint(x * A / (B * C), y * N / (D * C))


def _block_jacobian(a, p) -> Jacobian2:
    a1, a2, a3, a4, a5 = a
    x, y = p
    A, B, C, N, D = _block_terms(a1, a2, a3, a4, a5, x, y)
    if B == 0 or C == 0 or D == 0:
        raise PoleError("five-factor block is singular at this point", coordinate=(x, y))
    A_x = a3 * y + a2
    A_y = a3 * x + 2 * a4 * y + a1 * a4 + 1
    C_x, C_y = a2, 1.0
    N_x = (2 * a3 * x * y + a4 * y * y + 2 * a2 * x + (a1 * a4 + a2 * a5 + 1) * y
           + a1 * (1 + a2 * a5))
    N_y = a3 * x * x + 2 * a4 * x * y + (a1 * a4 + a2 * a5 + 1) * x + 2 * a5 * y + 2 * a1 * a5
    D_x, D_y = a2 + a3 * y, 1 + a3 * x
    BC, DC = B * C, D * C
    p1x = (A + x * A_x) / BC - x * A * C_x / (B * C * C)
    p1y = x * A_y / BC - x * A * (C + B * C_y) / (BC * BC)
    p2x = y * N_x / DC - y * N * (D_x * C + D * C_x) / (DC * DC)
    p2y = (N + y * N_y) / DC - y * N * (D_y * C + D * C_y) / (DC * DC)
    return Jacobian2(p1x, p1y, p2x, p2y)


def _blocks_of(c: tuple):
    if len(c) % 5:
        raise DomainError(f"the extended domain needs k to be a multiple of 5, got k={len(c)}")
    return [c[i:i + 5] for i in range(0, len(c), 5)]


def _compose_blocks(c: tuple, p) -> PlanarPoint:
    q = PlanarPoint(*p)
    for blk in _blocks_of(c):
        q = _block(blk, q)
    return q


def _jacobian_blocks(c: tuple, p) -> Jacobian2:
    q = PlanarPoint(*p)
    J = IDENTITY
    for blk in _blocks_of(c):
        J = _block_jacobian(blk, q) @ J
        q = _block(blk, q)
    return J


# -- vectorised evaluation used by the Newton solvers --------------------------

def compose_many(c: Sequence[float], pts: np.ndarray, space: str = "standard",
                 times: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """Apply the composed map ``times`` times to each row of ``pts``.

    Returns the images ``(N, 2)`` and Jacobians ``(N, 2, 2)``. Invalid
    evaluations (poles, overflow) come back as NaN rather than raising.
    """
    pts = np.asarray(pts, dtype=float)
    x = pts[:, 0].copy()
    y = pts[:, 1].copy()
    # J = [[j00, j01], [j10, j11]] kept as four arrays
    j00 = np.ones_like(x)
    j01 = np.zeros_like(x)
    j10 = np.zeros_like(x)
    j11 = np.ones_like(x)
    coeffs = [float(a) for a in c]
    logs = [math.log(a) for a in coeffs]
    with np.errstate(all="ignore"):
        for _ in range(times):
            for a, la in zip(coeffs, logs):
                if space == "log":
                    s = 1.0 / (1.0 + np.exp(la - y))
                    ny = -x + np.logaddexp(la, y)
                    # row0 <- row1 ; row1 <- -row0 + s*row1
                    n10 = -j00 + s * j10
                    n11 = -j01 + s * j11
                else:
                    inv = 1.0 / x
                    dfx = -(a + y) * inv * inv
                    ny = (a + y) * inv
                    n10 = dfx * j00 + inv * j10
                    n11 = dfx * j01 + inv * j11
                j00, j01 = j10, j11
                j10, j11 = n10, n11
                x, y = y, ny
    out = np.stack([x, y], axis=1)
    J = np.empty((len(x), 2, 2))
    J[:, 0, 0], J[:, 0, 1], J[:, 1, 0], J[:, 1, 1] = j00, j01, j10, j11
    bad = ~np.isfinite(out).all(axis=1) | ~np.isfinite(J).all(axis=(1, 2))
    out[bad] = np.nan
    J[bad] = np.nan
    return out, J
