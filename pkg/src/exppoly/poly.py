"""Sparse multivariate polynomials with complex coefficients and the
operator toolbox acting on them.

Operators (shift, difference, derivative, theta operator, the Newton/Taylor
change of basis ``L`` and its inverse, argument scaling) always take and
return monomial-basis polynomials.  The falling-factorial basis exists for
input and inspection only; convert with :meth:`Poly.to_monomial`.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from math import comb, prod
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import indexsets as ix
from ._linalg import range_basis, select_independent
from .errors import ParseError
from .indexsets import IndexSet, MultiIndex
from .stirling import stirling1, stirling2

MONOMIAL = "monomial"
FALLING = "falling"

SPAN_TOL = 1e-10


class Poly:
    """Immutable sparse polynomial ``sum_alpha c_alpha * b_alpha(x)``.

    ``b_alpha`` is ``x^alpha`` in the monomial basis and the falling factorial
    ``(x)_alpha`` in the falling-factorial basis.  Exact zeros are never stored.
    """

    __slots__ = ("dim", "terms", "basis")

    def __init__(self, dim: int, terms: Mapping[Sequence[int], complex] | None = None, basis: str = MONOMIAL):
        if dim < 1:
            raise ValueError(f"invalid dimension {dim}")
        if basis not in (MONOMIAL, FALLING):
            raise ValueError(f"unknown basis {basis!r}")
        clean: dict[MultiIndex, complex] = {}
        for alpha, c in (terms or {}).items():
            alpha = tuple(int(a) for a in alpha)
            if len(alpha) != dim or any(a < 0 for a in alpha):
                raise ValueError(f"bad exponent {alpha} for dimension {dim}")
            c = complex(c)
            if c != 0:
                clean[alpha] = clean.get(alpha, 0) + c
        object.__setattr__(self, "dim", dim)
        object.__setattr__(self, "basis", basis)
        object.__setattr__(self, "terms", {a: c for a, c in clean.items() if c != 0})

    def __setattr__(self, name, value):
        raise AttributeError("Poly is immutable")

    # -- constructors -------------------------------------------------------
    @classmethod
    def zero(cls, dim: int) -> "Poly":
        return cls(dim)

    @classmethod
    def constant(cls, dim: int, c: complex = 1.0) -> "Poly":
        return cls(dim, {(0,) * dim: c})

    @classmethod
    def monomial(cls, alpha: Sequence[int], c: complex = 1.0) -> "Poly":
        return cls(len(alpha), {tuple(alpha): c})

    @classmethod
    def variable(cls, dim: int, j: int) -> "Poly":
        return cls(dim, {ix.unit(dim, j): 1.0})

    @classmethod
    def from_vector(cls, index: IndexSet, coeffs: Sequence[complex]) -> "Poly":
        return cls(index.dim, {alpha: c for alpha, c in zip(index, coeffs)})

    # -- basic queries ------------------------------------------------------
    @property
    def degree(self) -> int:
        return max((sum(a) for a in self.terms), default=-1)

    def is_zero(self) -> bool:
        return not self.terms

    def coeff(self, alpha: Sequence[int]) -> complex:
        return self.terms.get(tuple(alpha), 0j)

    def support(self) -> IndexSet:
        return IndexSet(self.dim, self.terms)

    def coefficient_vector(self, index: IndexSet) -> np.ndarray:
        missing = [a for a in self.terms if a not in index]
        if missing:
            raise ValueError(f"terms {missing} not in the given index set")
        vec = np.zeros(len(index), dtype=complex)
        for alpha, c in self.terms.items():
            vec[index.index[alpha]] = c
        return vec

    def norm(self) -> float:
        return float(np.sqrt(sum(abs(c) ** 2 for c in self.terms.values())))

    def prune(self, threshold: float) -> "Poly":
        return Poly(self.dim, {a: c for a, c in self.terms.items() if abs(c) > threshold}, self.basis)

    def to_monomial(self) -> "Poly":
        if self.basis == MONOMIAL:
            return self
        out: dict[MultiIndex, complex] = {}
        for nu, c in self.terms.items():
            for kappa in ix.box(nu):
                s1 = stirling1(nu, kappa)
                if s1:
                    out[kappa] = out.get(kappa, 0) + s1 * c
        return Poly(self.dim, out)

    # -- arithmetic (monomial basis) ---------------------------------------
    def _same(self, other: "Poly") -> None:
        if self.dim != other.dim:
            raise ValueError(f"dimension mismatch: {self.dim} vs {other.dim}")
        if self.basis != other.basis:
            raise ValueError("cannot mix monomial and falling-factorial bases")

    def __add__(self, other):
        if isinstance(other, Poly):
            self._same(other)
            out = dict(self.terms)
            for a, c in other.terms.items():
                out[a] = out.get(a, 0) + c
            return Poly(self.dim, out, self.basis)
        return self + Poly.constant(self.dim, other) if self.basis == MONOMIAL else NotImplemented

    __radd__ = __add__

    def __neg__(self):
        return Poly(self.dim, {a: -c for a, c in self.terms.items()}, self.basis)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Poly):
            self._same(other)
            if self.basis != MONOMIAL:
                raise ValueError("products are only defined in the monomial basis")
            out: dict[MultiIndex, complex] = {}
            for a, c in self.terms.items():
                for b, d in other.terms.items():
                    key = ix.add(a, b)
                    out[key] = out.get(key, 0) + c * d
            return Poly(self.dim, out)
        return Poly(self.dim, {a: c * other for a, c in self.terms.items()}, self.basis)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return self * (1.0 / scalar)

    def __pow__(self, k: int) -> "Poly":
        out = Poly.constant(self.dim)
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other) -> bool:
        if not isinstance(other, Poly):
            return NotImplemented
        return self.dim == other.dim and self.basis == other.basis and self.terms == other.terms

    def __hash__(self):
        return hash((self.dim, self.basis, frozenset(self.terms.items())))

    def allclose(self, other: "Poly", atol: float = 1e-9) -> bool:
        diff = self.to_monomial() - other.to_monomial()
        return all(abs(c) <= atol for c in diff.terms.values())

    def __call__(self, x) -> complex:
        return evaluate(self, x)

    def __repr__(self) -> str:
        return f"Poly({format_poly(self)!r}, dim={self.dim}, basis={self.basis!r})"


def _check_monomial(p: Poly) -> None:
    if p.basis != MONOMIAL:
        raise ValueError("operator requires a monomial-basis polynomial; call to_monomial() first")


def _basis_value(alpha: Sequence[int], x: Sequence[complex], basis: str) -> complex:
    if basis == MONOMIAL:
        return prod(xj**a for xj, a in zip(x, alpha))
    return prod(prod(xj - k for k in range(a)) for xj, a in zip(x, alpha))


def evaluate(p: Poly, x) -> complex:
    """Direct sum of coefficient times basis function at the point ``x``."""
    x = np.atleast_1d(np.asarray(x, dtype=complex))
    if x.shape != (p.dim,):
        raise ValueError(f"point of shape {x.shape} does not match dimension {p.dim}")
    xs = [complex(v) for v in x]
    return complex(sum(c * _basis_value(a, xs, p.basis) for a, c in p.terms.items()))


def shift(p: Poly, alpha: Sequence[int]) -> Poly:
    """``x -> p(x + alpha)`` by binomial expansion of every term."""
    _check_monomial(p)
    if len(alpha) != p.dim:
        raise ValueError("shift vector has wrong dimension")
    out: dict[MultiIndex, complex] = {}
    for beta, c in p.terms.items():
        for gamma in ix.box(beta):
            w = prod(comb(b, g) * a ** (b - g) for a, b, g in zip(alpha, beta, gamma))
            if w:
                out[gamma] = out.get(gamma, 0) + c * w
    return Poly(p.dim, out)


def difference(p: Poly, kappa: Sequence[int]) -> Poly:
    """Forward difference ``(tau - I)^kappa p`` by inclusion-exclusion over shifts."""
    _check_monomial(p)
    out = Poly.zero(p.dim)
    for gamma in ix.box(kappa):
        sign = -1 if (sum(kappa) - sum(gamma)) % 2 else 1
        out = out + shift(p, gamma) * (sign * ix.binom(kappa, gamma))
    return out


def _falling(n: int, k: int) -> int:
    return prod(range(n - k + 1, n + 1))


def derivative(p: Poly, alpha: Sequence[int]) -> Poly:
    _check_monomial(p)
    out = {}
    for beta, c in p.terms.items():
        if ix.leq(alpha, beta):
            w = prod(_falling(b, a) for a, b in zip(alpha, beta))
            out[ix.sub(beta, alpha)] = c * w
    return Poly(p.dim, out)


def theta_apply(q: Poly, p: Poly) -> Poly:
    """Apply ``q(D^)`` with ``D^_j = x_j d/dx_j`` to ``p``.

    Uses the expansion ``D^alpha_hat = sum_{beta <= alpha} {alpha, beta} x^beta D^beta``.
    """
    _check_monomial(q)
    _check_monomial(p)
    if q.dim != p.dim:
        raise ValueError("dimension mismatch")
    out = Poly.zero(p.dim)
    for alpha, qa in q.terms.items():
        for beta in ix.box(alpha):
            s2 = stirling2(alpha, beta)
            if s2:
                out = out + Poly.monomial(beta) * derivative(p, beta) * (qa * s2)
    return out


def theta_apply_diagonal(q: Poly, p: Poly) -> Poly:
    """``q(D^) p`` through the eigenrelation ``D^alpha_hat x^beta = beta^alpha x^beta``."""
    _check_monomial(q)
    _check_monomial(p)
    return Poly(p.dim, {beta: c * evaluate(q, beta) for beta, c in p.terms.items()})


def L_apply(p: Poly) -> Poly:
    """Newton/Taylor change of basis: ``(Lp)_alpha = sum_beta {beta, alpha} p_beta``."""
    _check_monomial(p)
    out: dict[MultiIndex, complex] = {}
    for beta, c in p.terms.items():
        for alpha in ix.box(beta):
            s2 = stirling2(beta, alpha)
            if s2:
                out[alpha] = out.get(alpha, 0) + s2 * c
    return Poly(p.dim, out)


def L_inverse(p: Poly) -> Poly:
    """Inverse of :func:`L_apply`.

    The Taylor coefficients of ``p`` become falling-factorial coefficients,
    which are re-expanded to monomials.
    """
    _check_monomial(p)
    return Poly(p.dim, p.terms, FALLING).to_monomial()


def scale_argument(p: Poly, xi: Sequence[complex]) -> Poly:
    """``x -> p(xi_1 x_1, ..., xi_s x_s)``; every ``xi_j`` must be nonzero."""
    _check_monomial(p)
    xi = [complex(v) for v in xi]
    if len(xi) != p.dim:
        raise ValueError("scaling vector has wrong dimension")
    if any(v == 0 for v in xi):
        raise ValueError("argument scaling requires xi in (C \\ {0})^s")
    return Poly(p.dim, {a: c * prod(x**e for x, e in zip(xi, a)) for a, c in p.terms.items()})


def theta_equals_scaled_derivative_check(q: Poly, p: Poly, xi: Sequence[complex]) -> float:
    """``|q(D^)p(xi) - ((Lq)(xi D))p(xi)|`` with ``(xi D)^a = xi^a D^a``."""
    xi = np.atleast_1d(np.asarray(xi, dtype=complex))
    lhs = evaluate(theta_apply(q, p), xi)
    rhs = 0j
    for beta, c in L_apply(q).terms.items():
        rhs += c * prod(x**b for x, b in zip(xi, beta)) * evaluate(derivative(p, beta), xi)
    return abs(lhs - rhs)


@dataclass(frozen=True)
class PolySpace:
    """Span of linearly independent polynomials (monomial basis)."""

    dim: int
    basis: tuple

    def __len__(self) -> int:
        return len(self.basis)

    @property
    def dimension(self) -> int:
        return len(self.basis)

    def support(self) -> IndexSet:
        return IndexSet(self.dim, (a for q in self.basis for a in q.terms))

    def coefficient_matrix(self, index: IndexSet | None = None) -> np.ndarray:
        """Rows = basis elements, columns = monomials of ``index``."""
        index = index or self.support()
        return np.array([q.coefficient_vector(index) for q in self.basis]).reshape(len(self.basis), len(index))

    def contains(self, p: Poly, tol: float = 1e-8) -> bool:
        index = self.support().union(p.support())
        basis = range_basis(self.coefficient_matrix(index).T, SPAN_TOL)
        v = p.coefficient_vector(index)
        nv = np.linalg.norm(v)
        if nv == 0:
            return True
        resid = v - basis @ (basis.conj().T @ v)
        return np.linalg.norm(resid) <= tol * nv


def _span_from_generators(p: Poly, generators: Iterable[Poly], tol: float) -> PolySpace:
    gens = [g for g in generators if not g.is_zero()]
    index = IndexSet(p.dim, (a for g in gens for a in g.terms))
    mat = np.array([g.coefficient_vector(index) for g in gens]).T
    span = range_basis(mat, tol)
    # prefer p itself and the constant 1 as the first basis elements
    candidates = [p, Poly.constant(p.dim)] + gens
    cmat = np.array([c.coefficient_vector(index) for c in candidates]).T
    chosen = select_independent(cmat, tol, within=span)
    return PolySpace(p.dim, tuple(candidates[k] for k in chosen))


def shift_span(p: Poly, tol: float = SPAN_TOL) -> PolySpace:
    """Basis of ``span{p(. + alpha)}``; the basis starts with ``p`` and ``1``.

    Differences ``Delta^alpha p`` over the box ``alpha <= (deg p, ..., deg p)``
    generate the same span as the shifts.
    """
    _check_monomial(p)
    if p.is_zero():
        raise ValueError("the shift span of the zero polynomial is not defined")
    d = p.degree
    gens = [difference(p, a) for a in IndexSet(p.dim, ix.box([d] * p.dim))]
    return _span_from_generators(p, gens, tol)


def derivative_span(p: Poly, tol: float = SPAN_TOL) -> PolySpace:
    """Basis of ``span{D^alpha p}``; the basis starts with ``p`` and ``1``."""
    _check_monomial(p)
    if p.is_zero():
        raise ValueError("the derivative span of the zero polynomial is not defined")
    d = p.degree
    gens = [derivative(p, a) for a in IndexSet(p.dim, ix.box([d] * p.dim))]
    return _span_from_generators(p, gens, tol)


# -- text / JSON formats ----------------------------------------------------

def format_poly(p: Poly) -> str:
    """``re,im:e1,...,es;...`` in grlex order of the exponents."""
    if p.is_zero():
        return ""
    parts = []
    for alpha in sorted(p.terms, key=ix.grlex_key):
        c = p.terms[alpha]
        parts.append(f"{c.real!r},{c.imag!r}:{ix.format_multiindex(alpha)}")
    return ";".join(parts)


def parse_poly(text: str, dim: int | None = None, basis: str = MONOMIAL) -> Poly:
    terms: dict[MultiIndex, complex] = {}
    try:
        for chunk in filter(None, (t.strip() for t in text.split(";"))):
            coeff, exps = chunk.split(":")
            re_, im_ = coeff.split(",")
            alpha = ix.parse_multiindex(exps)
            terms[alpha] = terms.get(alpha, 0) + complex(float(re_), float(im_))
    except ValueError as exc:
        raise ParseError(f"malformed polynomial text {text!r}: {exc}") from exc
    dims = {len(a) for a in terms}
    if dim is None:
        if len(dims) != 1:
            raise ParseError("cannot infer the polynomial dimension")
        dim = dims.pop()
    elif dims - {dim}:
        raise ParseError(f"polynomial terms do not match dimension {dim}")
    return Poly(dim, terms, basis)


def poly_to_json(p: Poly) -> dict:
    return {
        "terms": [
            {"exp": list(a), "re": p.terms[a].real, "im": p.terms[a].imag}
            for a in sorted(p.terms, key=ix.grlex_key)
        ]
    }


def poly_from_json(obj, dim: int | None = None) -> Poly:
    """Accepts the JSON object form or the compact text form."""
    if isinstance(obj, str):
        return parse_poly(obj, dim)
    try:
        terms = {}
        for t in obj["terms"]:
            alpha = tuple(int(a) for a in t["exp"])
            terms[alpha] = terms.get(alpha, 0) + complex(float(t.get("re", 0.0)), float(t.get("im", 0.0)))
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed polynomial object: {exc}") from exc
    if dim is None:
        dims = {len(a) for a in terms}
        if len(dims) != 1:
            raise ParseError("cannot infer the polynomial dimension")
        dim = dims.pop()
    try:
        return Poly(dim, terms)
    except ValueError as exc:
        raise ParseError(str(exc)) from exc


def poly_json_dumps(p: Poly) -> str:
    return json.dumps(poly_to_json(p))
