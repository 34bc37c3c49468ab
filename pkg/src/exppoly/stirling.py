"""Exact multivariate Stirling numbers of both kinds.

Second kind  {nu, kappa} = (1/kappa!) (Delta^kappa x^nu)(0)
First kind   [nu, kappa] = (1/kappa!) (D^kappa (x)_nu)(0)   (signed)

Both factor over coordinates, so the fast path multiplies memoized
univariate values; the defining alternating sum is kept as an independent
(slow) oracle.  ``functools.lru_cache`` is internally locked, so the
memo tables are safe to share between threads.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from math import prod
from typing import Sequence

from .indexsets import IndexSet, binom, box, factorial, grlex_key, leq, sub, unit


def _check_pair(nu: Sequence[int], kappa: Sequence[int]) -> None:
    if len(nu) != len(kappa):
        raise ValueError(f"dimension mismatch: nu has {len(nu)} entries, kappa has {len(kappa)}")
    if any(a < 0 for a in nu) or any(a < 0 for a in kappa):
        raise ValueError("Stirling numbers are only defined for nonnegative multiindices")


@lru_cache(maxsize=None)
def _s2(n: int, k: int) -> int:
    if n == 0 or k == 0:
        return 1 if n == k else 0
    if k > n:
        return 0
    return k * _s2(n - 1, k) + _s2(n - 1, k - 1)


@lru_cache(maxsize=None)
def _s1(n: int, k: int) -> int:
    # signed: (x)_{n} = (x)_{n-1} (x - (n-1))
    if n == 0 or k == 0:
        return 1 if n == k else 0
    if k > n:
        return 0
    return _s1(n - 1, k - 1) - (n - 1) * _s1(n - 1, k)


def stirling2(nu: Sequence[int], kappa: Sequence[int]) -> int:
    """Multivariate Stirling number of the second kind, exact.

    Zero whenever ``kappa`` is not componentwise below ``nu``.
    """
    _check_pair(nu, kappa)
    return prod(_s2(n, k) for n, k in zip(nu, kappa))


def stirling1(nu: Sequence[int], kappa: Sequence[int]) -> int:
    """Signed multivariate Stirling number of the first kind.

    This is the coefficient of x^kappa in the falling factorial (x)_nu.
    """
    _check_pair(nu, kappa)
    return prod(_s1(n, k) for n, k in zip(nu, kappa))


def stirling2_by_sum(nu: Sequence[int], kappa: Sequence[int]) -> int:
    """Second-kind value from the defining alternating sum over gamma <= kappa.

    Slow; used as an oracle only.  0**0 == 1 in Python, as required.
    """
    _check_pair(nu, kappa)
    if not leq(kappa, nu):
        return 0
    total = 0
    for gamma in box(kappa):
        sign = -1 if (sum(kappa) - sum(gamma)) % 2 else 1
        total += sign * binom(kappa, gamma) * prod(g**n for g, n in zip(gamma, nu))
    q, r = divmod(total, factorial(kappa))
    assert r == 0, "alternating sum must be divisible by kappa!"
    return q


def stirling2_recurrence_step(nu: Sequence[int], kappa: Sequence[int], j: int) -> int:
    """Value of {nu + e_j, kappa} from row ``nu`` via the Leibniz recurrence.

    ``j`` is a 0-based coordinate index.
    """
    _check_pair(nu, kappa)
    if not 0 <= j < len(nu):
        raise ValueError(f"coordinate {j} out of range for dimension {len(nu)}")
    value = kappa[j] * stirling2(nu, kappa)
    if kappa[j] > 0:
        value += stirling2(nu, sub(kappa, unit(len(kappa), j)))
    return value


@dataclass
class StirlingTable:
    kind: int
    dim: int
    entries: dict = field(default_factory=dict)

    def __getitem__(self, key):
        nu, kappa = key
        return self.entries.get((tuple(nu), tuple(kappa)), 0)

    def rows(self):
        """(nu, kappa, value) triples in grlex order of nu, then of kappa."""
        keys = sorted(self.entries, key=lambda k: (grlex_key(k[0]), grlex_key(k[1])))
        return [(nu, kappa, self.entries[(nu, kappa)]) for nu, kappa in keys]


def stirling_table(kind: int, dim: int, max_entry: int) -> StirlingTable:
    """All values with nu in {0..max_entry}^dim and kappa <= nu."""
    if kind not in (1, 2):
        raise ValueError("kind must be 1 or 2")
    fn = stirling1 if kind == 1 else stirling2
    nus = IndexSet(dim, box([max_entry] * dim))
    table = StirlingTable(kind, dim)
    for nu in nus:
        for kappa in box(nu):
            table.entries[(nu, kappa)] = fn(nu, kappa)
    return table


def falling_factorial_coefficients(nu: Sequence[int]) -> dict:
    """Monomial expansion of (x)_nu by direct multiplication of linear factors.

    Independent of the recurrences above; used to cross-check ``stirling1``.
    """
    univariate = []
    for n in nu:
        coeffs = [1]  # ascending powers
        for k in range(n):
            nxt = [0] * (len(coeffs) + 1)
            for i, c in enumerate(coeffs):
                nxt[i + 1] += c
                nxt[i] -= k * c
            coeffs = nxt
        univariate.append(coeffs)
    out = {}
    for combo in itertools.product(*(range(len(c)) for c in univariate)):
        value = prod(univariate[j][e] for j, e in enumerate(combo))
        if value:
            out[tuple(combo)] = value
    return out
