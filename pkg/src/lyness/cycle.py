"""Periodic coefficient cycles ``a_1, ..., a_k`` and their arithmetic invariants."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import DomainError


@dataclass(frozen=True)
class PhiVector:
    """Products of the coefficients over the five residue classes mod 5."""

    phi: tuple[float, float, float, float, float]

    def __iter__(self):
        return iter(self.phi)

    def __getitem__(self, i):
        return self.phi[i]

    @property
    def straddles_one(self) -> bool:
        return min(self.phi) < 1.0 < max(self.phi)


@dataclass(frozen=True)
class ParameterCycle:
    """An immutable k-periodic sequence of positive coefficients.

    Entries are compared exactly (no tolerance) when computing the primitive
    period and the rank.
    """

    values: tuple[float, ...]

    def __init__(self, values: Iterable[float]):
        vals = tuple(float(v) for v in values)
        if not vals:
            raise DomainError("a cycle needs at least one coefficient")
        for i, v in enumerate(vals, start=1):
            if not math.isfinite(v) or v <= 0.0:
                raise DomainError(f"coefficient a_{i}={v!r} is not a positive finite number")
        object.__setattr__(self, "values", vals)

    # sequence protocol
    def __len__(self) -> int:
        return len(self.values)

    def __iter__(self):
        return iter(self.values)

    def __getitem__(self, i):
        return self.values[i]

    def __add__(self, other: "ParameterCycle | Sequence[float]") -> "ParameterCycle":
        return ParameterCycle(self.values + tuple(other))

    @property
    def k(self) -> int:
        return len(self.values)

    def a(self, n: int) -> float:
        """Coefficient ``a_n`` with the 1-based, k-periodic indexing of the recurrence."""
        return self.values[(n - 1) % self.k]

    @property
    def primitive_period(self) -> int:
        return primitive_period(self)

    @property
    def rank(self) -> int:
        return rank(self)

    def shift(self, s: int) -> "ParameterCycle":
        return shift(self, s)

    def phi_products(self) -> PhiVector:
        return phi_products(self)

    def as_fractions(self) -> tuple[Fraction, ...]:
        """Exact rational value of every stored binary float."""
        return tuple(Fraction(v) for v in self.values)

    @classmethod
    def parse(cls, text: str) -> "ParameterCycle":
        """Parse ``"2,4,7,0.001"``; tokens may also be written ``p/q``."""
        tokens = [t.strip() for t in text.split(",")]
        if not tokens or any(t == "" for t in tokens):
            raise DomainError(f"malformed cycle {text!r}")
        vals = []
        for t in tokens:
            try:
                vals.append(float(Fraction(t)) if "/" in t else float(t))
            except (ValueError, ZeroDivisionError) as exc:
                raise DomainError(f"malformed coefficient {t!r}") from exc
        return cls(vals)

    def to_string(self) -> str:
        return ",".join(format(v, ".17g") for v in self.values)

    def __str__(self) -> str:
        return self.to_string()


def primitive_period(c: ParameterCycle) -> int:
    k = c.k
    v = c.values
    for d in range(1, k + 1):
        if k % d == 0 and all(v[i] == v[(i + d) % k] for i in range(k)):
            return d
    return k  # unreachable: d = k always matches


def rank(c: ParameterCycle) -> int:
    return len(set(c.values))


def shift(c: ParameterCycle, s: int) -> ParameterCycle:
    """Cycle ``(a_{1+s}, ..., a_{k+s})`` with indices taken mod k."""
    s %= c.k
    return ParameterCycle(c.values[s:] + c.values[:s])


def phi_products(c: ParameterCycle) -> PhiVector:
    if c.k % 5:
        raise DomainError(f"phi products need k to be a multiple of 5, got k={c.k}")
    phi = [1.0] * 5
    for n, a in enumerate(c.values):
        phi[n % 5] *= a
    return PhiVector(tuple(phi))
