"""Exponential-polynomial models, sample sources and the structured matrices
built from them (Hankel, Toeplitz, Hermite-Vandermonde).

A model is ``f(x) = sum_w f_w(x) exp(w . x)``; on the integer grid this is
``f(alpha) = sum_w f_w(alpha) xi_w^alpha`` with ``xi_w = exp(w)``.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
import scipy.linalg

from . import indexsets as ix
from .errors import CoverageError, ParseError
from .indexsets import IndexSet, MultiIndex
from .poly import Poly, PolySpace, evaluate, poly_from_json, poly_to_json, shift_span


def normalize_frequency(omega: Sequence[complex]) -> np.ndarray:
    """Reduce imaginary parts into the half-open interval [-pi, pi)."""
    omega = np.asarray(omega, dtype=complex).ravel()
    im = np.mod(omega.imag + np.pi, 2 * np.pi) - np.pi
    return omega.real + 1j * im


def principal_log(xi: Sequence[complex]) -> np.ndarray:
    """Componentwise log with arg in [-pi, pi); so -1 maps to -i*pi."""
    xi = np.asarray(xi, dtype=complex).ravel()
    arg = np.angle(xi)
    arg = np.where(arg >= np.pi, arg - 2 * np.pi, arg)
    return np.log(np.abs(xi)) + 1j * arg


@dataclass(frozen=True)
class Component:
    omega: np.ndarray
    poly: Poly

    @property
    def xi(self) -> np.ndarray:
        return np.exp(self.omega)


@dataclass(frozen=True)
class ExpPolyModel:
    """Finite sum of polynomial-times-exponential components."""

    dim: int
    components: tuple = ()

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dimension must be >= 1")
        comps = []
        for comp in self.components:
            if not isinstance(comp, Component):
                comp = Component(*comp)
            omega = normalize_frequency(comp.omega)
            if omega.shape != (self.dim,) or comp.poly.dim != self.dim:
                raise ValueError("component dimension does not match the model")
            if comp.poly.is_zero():
                raise ValueError("every coefficient polynomial must be nonzero")
            comps.append(Component(omega, comp.poly.to_monomial()))
        for i in range(len(comps)):
            for j in range(i):
                if np.allclose(comps[i].omega, comps[j].omega, rtol=0, atol=1e-12):
                    raise ValueError(f"duplicate frequency {comps[i].omega}")
        object.__setattr__(self, "components", tuple(comps))

    @classmethod
    def from_pairs(cls, dim: int, pairs: Iterable[tuple[Sequence[complex], Poly]]) -> "ExpPolyModel":
        return cls(dim, tuple(Component(np.asarray(w, dtype=complex), p) for w, p in pairs))

    def __len__(self) -> int:
        return len(self.components)

    @property
    def total_multiplicity(self) -> int:
        return sum(shift_span(c.poly).dimension for c in self.components)

    def __call__(self, alpha) -> complex:
        return synth_sample(self, alpha)


def synth_sample(model: ExpPolyModel, alpha: Sequence[int]) -> complex:
    """``f(alpha)``; integer points may be negative."""
    alpha = tuple(int(a) for a in alpha)
    if len(alpha) != model.dim:
        raise ValueError("sample point has wrong dimension")
    total = 0j
    for comp in model.components:
        total += evaluate(comp.poly, alpha) * np.prod(comp.xi ** np.array(alpha))
    return complex(total)


class SampleSource:
    """Anything that can return ``f(alpha)`` on (part of) the integer grid."""

    dim: int

    def sample(self, alpha: Sequence[int]) -> complex:
        raise NotImplementedError

    def samples(self, points: Iterable[Sequence[int]]) -> np.ndarray:
        return np.array([self.sample(p) for p in points], dtype=complex)

    def covers(self, points: Iterable[Sequence[int]]) -> bool:
        return True


@dataclass(frozen=True)
class ModelSource(SampleSource):
    """Exact synthesis from a known model; covers all of Z^s."""

    model: ExpPolyModel

    @property
    def dim(self) -> int:
        return self.model.dim

    def sample(self, alpha):
        return synth_sample(self.model, alpha)


class TableSource(SampleSource):
    """Stored samples on a dense box ``lo <= alpha <= hi``."""

    def __init__(self, dim: int, values: dict):
        if not values:
            raise ParseError("sample table is empty")
        pts = np.array(list(values), dtype=int)
        if pts.shape[1] != dim:
            raise ParseError("sample points do not match the dimension")
        self.dim = dim
        self.lo = tuple(int(v) for v in pts.min(axis=0))
        self.hi = tuple(int(v) for v in pts.max(axis=0))
        expected = math.prod(h - l + 1 for l, h in zip(self.lo, self.hi))
        if len(values) != expected:
            raise ParseError(f"sample table is not a dense box ({len(values)} of {expected} points)")
        self.values = {tuple(int(a) for a in k): complex(v) for k, v in values.items()}

    def covers(self, points):
        return all(tuple(p) in self.values for p in points)

    def sample(self, alpha):
        key = tuple(int(a) for a in alpha)
        try:
            return self.values[key]
        except KeyError:
            raise CoverageError(
                f"sample {key} outside the stored box {self.lo}..{self.hi}"
            ) from None

    def points(self) -> list[MultiIndex]:
        return sorted(self.values, key=ix.grlex_key)

    @classmethod
    def from_model(cls, model: ExpPolyModel, lo: Sequence[int], hi: Sequence[int]) -> "TableSource":
        return cls(model.dim, {a: synth_sample(model, a) for a in ix.box(hi, lo)})


@dataclass
class SampleMatrix:
    kind: str
    rows: IndexSet
    cols: IndexSet
    entries: np.ndarray = field(repr=False)


def _structured(source: SampleSource, A: IndexSet, B: IndexSet, sign: int) -> np.ndarray:
    cache: dict = {}
    mat = np.empty((len(A), len(B)), dtype=complex)
    for i, a in enumerate(A):
        for j, b in enumerate(B):
            key = tuple(x + sign * y for x, y in zip(a, b))
            if key not in cache:
                cache[key] = source.sample(key)
            mat[i, j] = cache[key]
    return mat


def build_hankel(source: SampleSource, A: IndexSet, B: IndexSet) -> SampleMatrix:
    """``F_{A,B} = [f(alpha + beta)]``."""
    return SampleMatrix("hankel", A, B, _structured(source, A, B, +1))


def build_toeplitz(source: SampleSource, A: IndexSet, B: IndexSet) -> SampleMatrix:
    """``T_{A,B} = [f(alpha - beta)]``; needs samples at negative points."""
    return SampleMatrix("toeplitz", A, B, _structured(source, A, B, -1))


def default_bases(model: ExpPolyModel) -> list[PolySpace]:
    return [shift_span(c.poly) for c in model.components]


def build_vandermonde(model: ExpPolyModel, bases: Sequence | None, A: IndexSet) -> np.ndarray:
    """Rows ``theta_w q(D^)``, columns ``x^alpha``; entry ``q(alpha) xi_w^alpha``.

    ``bases[k]`` spans the shift-invariant space of component ``k`` and must
    contain the constant 1 and the component polynomial itself.
    """
    if bases is None:
        bases = default_bases(model)
    rows = []
    for comp, space in zip(model.components, bases):
        qs = space.basis if isinstance(space, PolySpace) else tuple(space)
        if np.any(comp.xi == 0):
            raise ValueError("xi has a zero component")
        powers = np.array([np.prod(comp.xi ** np.array(a)) for a in A], dtype=complex)
        for q in qs:
            # q(D^) x^alpha = q(alpha) x^alpha
            rows.append([evaluate(q, a) * pw for a, pw in zip(A, powers)])
    return np.array(rows, dtype=complex).reshape(len(rows), len(A))


def annihilation_residual(source: SampleSource, q: Poly, testset: IndexSet) -> float:
    """``max_alpha |sum_beta q_beta f(alpha + beta)| / max |f|`` over the touched grid."""
    if q.is_zero() or len(testset) == 0:
        return 0.0
    touched = testset.minkowski_sum(q.support())
    values = {a: source.sample(a) for a in touched}
    scale = max(abs(v) for v in values.values())
    worst = 0.0
    for alpha in testset:
        acc = sum(c * values[ix.add(alpha, beta)] for beta, c in q.terms.items())
        worst = max(worst, abs(acc))
    if scale == 0:
        return worst
    return worst / scale


def linearization_matrix(poly: Poly, basis: Sequence[Poly]) -> np.ndarray:
    """Coefficients ``a_{q,q'}`` with ``g(x + y) = sum a_{q,q'} q(x) q'(y)``.

    Solved by least squares on the grid ``{0..deg}^s`` in both arguments,
    which is unisolvent for polynomials of total degree <= deg.
    """
    d = max(poly.degree, 0)
    grid = list(ix.box([d] * poly.dim))
    Q = np.array([[evaluate(q, x) for q in basis] for x in grid], dtype=complex)
    G = np.array([[evaluate(poly, ix.add(x, y)) for y in grid] for x in grid], dtype=complex)
    Qp = np.linalg.pinv(Q)
    amat = Qp @ G @ Qp.T
    recon = Q @ amat @ Q.T
    if np.linalg.norm(recon - G) > 1e-8 * max(np.linalg.norm(G), 1.0):
        raise ValueError("basis does not span the shift-invariant space of the polynomial")
    if np.linalg.cond(amat) > 1e12:
        raise ValueError("singular linearization block: invalid basis")
    return amat


def middle_factor(model: ExpPolyModel, bases: Sequence | None = None) -> np.ndarray:
    """Block-diagonal matrix of linearization blocks, one per component."""
    if bases is None:
        bases = default_bases(model)
    blocks = [
        linearization_matrix(c.poly, b.basis if isinstance(b, PolySpace) else b)
        for c, b in zip(model.components, bases)
    ]
    if not blocks:
        return np.zeros((0, 0), dtype=complex)
    return scipy.linalg.block_diag(*blocks)


def hankel_factorization_residual(model: ExpPolyModel, A: IndexSet, B: IndexSet, bases=None) -> float:
    """``||F_{A,B} - V_A^T F V_B|| / ||F_{A,B}||`` for the known model."""
    if bases is None:
        bases = default_bases(model)
    hankel = build_hankel(ModelSource(model), A, B).entries
    VA = build_vandermonde(model, bases, A)
    VB = build_vandermonde(model, bases, B)
    mid = middle_factor(model, bases)
    nrm = np.linalg.norm(hankel)
    diff = np.linalg.norm(hankel - VA.T @ mid @ VB) if mid.size else nrm
    return float(diff / nrm) if nrm else float(diff)


# -- file formats -----------------------------------------------------------

def _pair(z: complex) -> list:
    return [float(z.real), float(z.imag)]


def model_to_json(model: ExpPolyModel) -> dict:
    return {
        "dim": model.dim,
        "components": [
            {"omega": [_pair(w) for w in c.omega], "poly": poly_to_json(c.poly)}
            for c in model.components
        ],
    }


def model_from_json(obj: dict) -> ExpPolyModel:
    try:
        dim = int(obj["dim"])
        pairs = []
        for comp in obj.get("components", []):
            omega = [complex(float(w[0]), float(w[1])) for w in comp["omega"]]
            pairs.append((omega, poly_from_json(comp["poly"], dim)))
        return ExpPolyModel.from_pairs(dim, pairs)
    except ParseError:
        raise
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise ParseError(f"malformed model: {exc}") from exc


def load_model(path) -> ExpPolyModel:
    try:
        with open(path, encoding="utf-8") as fh:
            obj = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON ({exc})") from exc
    return model_from_json(obj)


def samples_to_csv(dim: int, points: Iterable[Sequence[int]], values: Sequence[complex]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([f"a{j + 1}" for j in range(dim)] + ["re", "im"])
    for p, v in zip(points, values):
        writer.writerow([*p, repr(float(v.real)), repr(float(v.imag))])
    return buf.getvalue()


def samples_from_csv(text: str) -> TableSource:
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError("empty sample file") from None
    header = [h.strip() for h in header]
    dim = len(header) - 2
    if dim < 1 or header[-2:] != ["re", "im"] or header[:-2] != [f"a{j + 1}" for j in range(dim)]:
        raise ParseError(f"unexpected CSV header {header}")
    values = {}
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != dim + 2:
            raise ParseError(f"line {lineno}: expected {dim + 2} fields, got {len(row)}")
        try:
            key = tuple(int(v) for v in row[:dim])
            values[key] = complex(float(row[dim]), float(row[dim + 1]))
        except ValueError as exc:
            raise ParseError(f"line {lineno}: {exc}") from exc
    return TableSource(dim, values)
