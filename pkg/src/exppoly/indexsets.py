"""Multiindices and the structured index sets used for matrix layouts.

All orderings are graded lexicographic with x1 > x2 > ... > xs: lower total
degree first, and within one degree the lexicographically larger exponent
first, so for s=2 the order starts (0,0), (1,0), (0,1), (2,0), (1,1), ...
"""
from __future__ import annotations

import itertools
from math import comb, prod
from math import factorial as _factorial
from typing import Iterable, Iterator, Sequence

MultiIndex = tuple[int, ...]


def _check_dim(s: int) -> None:
    if s < 1:
        raise ValueError(f"invalid dimension s={s}, must be >= 1")


def grlex_key(alpha: Sequence[int]) -> tuple:
    """Sort key realising the canonical graded-lex order (works for negative entries too)."""
    return (sum(alpha), tuple(-a for a in alpha))


def leq(alpha: Sequence[int], beta: Sequence[int]) -> bool:
    """Componentwise partial order alpha <= beta."""
    return all(a <= b for a, b in zip(alpha, beta))


def add(alpha: Sequence[int], beta: Sequence[int]) -> MultiIndex:
    return tuple(a + b for a, b in zip(alpha, beta))


def sub(alpha: Sequence[int], beta: Sequence[int]) -> MultiIndex:
    return tuple(a - b for a, b in zip(alpha, beta))


def unit(s: int, j: int) -> MultiIndex:
    return tuple(1 if k == j else 0 for k in range(s))


def factorial(alpha: Sequence[int]) -> int:
    return prod(_factorial(a) for a in alpha)


def binom(kappa: Sequence[int], gamma: Sequence[int]) -> int:
    return prod(comb(k, g) for k, g in zip(kappa, gamma))


def homogeneous(s: int, n: int) -> Iterator[MultiIndex]:
    """All alpha with |alpha| = n, lexicographically descending."""
    if s == 1:
        yield (n,)
        return
    for first in range(n, -1, -1):
        for rest in homogeneous(s - 1, n - first):
            yield (first,) + rest


def graded_enumerator(s: int) -> Iterator[MultiIndex]:
    """Yield all of N_0^s in graded-lex order (infinite stream)."""
    _check_dim(s)
    for n in itertools.count():
        yield from homogeneous(s, n)


def box(upper: Sequence[int], lower: Sequence[int] | None = None) -> Iterator[MultiIndex]:
    """Integer points of the box lower <= alpha <= upper (lower defaults to 0)."""
    lower = lower if lower is not None else [0] * len(upper)
    ranges = [range(lo, hi + 1) for lo, hi in zip(lower, upper)]
    return (tuple(a) for a in itertools.product(*ranges))


class IndexSet:
    """Finite, deduplicated, grlex-ordered set of multiindices.

    The position map ``index[alpha]`` gives the row/column of ``alpha`` in
    any matrix laid out over this set.
    """

    __slots__ = ("dim", "members", "index", "lower")

    def __init__(self, dim: int, members: Iterable[Sequence[int]] = (), lower: bool = False):
        _check_dim(dim)
        uniq = {tuple(int(a) for a in m) for m in members}
        for m in uniq:
            if len(m) != dim:
                raise ValueError(f"multiindex {m} does not have dimension {dim}")
        self.dim = dim
        self.members: tuple[MultiIndex, ...] = tuple(sorted(uniq, key=grlex_key))
        self.index = {m: i for i, m in enumerate(self.members)}
        self.lower = lower

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self) -> Iterator[MultiIndex]:
        return iter(self.members)

    def __contains__(self, alpha) -> bool:
        return tuple(alpha) in self.index

    def __getitem__(self, i: int) -> MultiIndex:
        return self.members[i]

    def __eq__(self, other) -> bool:
        if isinstance(other, IndexSet):
            return self.dim == other.dim and self.members == other.members
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self.dim, self.members))

    def __repr__(self) -> str:
        return f"IndexSet(dim={self.dim}, members={list(self.members)})"

    def is_lower(self) -> bool:
        """Check closure under componentwise decrease (only unit steps need checking)."""
        for m in self.members:
            for j in range(self.dim):
                if m[j] > 0 and sub(m, unit(self.dim, j)) not in self.index:
                    return False
        return True

    def union(self, other: "IndexSet") -> "IndexSet":
        return IndexSet(self.dim, self.members + other.members)

    def minkowski_sum(self, other: "IndexSet") -> "IndexSet":
        """The set A + B of all pairwise sums."""
        return IndexSet(self.dim, (add(a, b) for a in self.members for b in other.members))

    def max_degree(self) -> int:
        return max((sum(m) for m in self.members), default=-1)


def gamma_set(s: int, n: int) -> IndexSet:
    """Total degree simplex {alpha : |alpha| <= n}."""
    _check_dim(s)
    if n < 0:
        raise ValueError("degree must be >= 0")
    members = [a for k in range(n + 1) for a in homogeneous(s, k)]
    return IndexSet(s, members, lower=True)


def upsilon_set(s: int, N: int) -> IndexSet:
    """Hyperbolic orthant {alpha : prod(1 + alpha_j) <= N}."""
    _check_dim(s)
    if N < 1:
        raise ValueError(f"multiplicity bound N={N} must be >= 1")

    def grow(prefix: tuple[int, ...], budget: int) -> Iterator[MultiIndex]:
        if len(prefix) == s:
            yield prefix
            return
        # floor(floor(N/a)/b) == floor(N/(a*b)) keeps the product test exact
        for a in range(budget):
            yield from grow(prefix + (a,), budget // (1 + a))

    return IndexSet(s, grow((), N), lower=True)


def gamma_size(s: int, n: int) -> int:
    return comb(n + s, s)


def format_multiindex(alpha: Sequence[int]) -> str:
    return ",".join(str(a) for a in alpha)


def parse_multiindex(text: str) -> MultiIndex:
    text = text.strip().strip("()[]")
    if not text:
        raise ValueError("empty multiindex")
    return tuple(int(t) for t in text.split(","))
