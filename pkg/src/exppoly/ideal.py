"""Graded kernel extraction from Hankel matrices.

Rows are fixed to the hyperbolic orthant Upsilon_N, which is a universal
interpolation space for every ideal of total multiplicity <= N.  Columns grow
one total degree at a time; kernel vectors of ``F_{Upsilon_N, Gamma_n}`` are
exactly the coefficient vectors of ideal elements of degree <= n, and the
rank sequence is the affine Hilbert function.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from . import indexsets as ix
from ._linalg import normalize_columns, null_space, singular_values
from .errors import CoverageError, MultiplicityBoundError, PronyError
from .indexsets import IndexSet
from .poly import Poly
from .signal import SampleSource, build_hankel

DEFAULT_TOL = 1e-10


class NumericalRankError(PronyError):
    exit_code = 4
    stage = "ideal"


@dataclass
class IdealData:
    dim: int
    mult_bound: int
    tol: float
    rows: IndexSet
    normal_set: IndexSet
    kernel_batches: list = field(default_factory=list)  # [(degree, [Poly, ...])]
    hilbert_trace: list = field(default_factory=list)  # [(degree, rank)]

    @property
    def kernel(self) -> list:
        return [q for _, batch in self.kernel_batches for q in batch]

    @property
    def multiplicity(self) -> int:
        return len(self.normal_set)

    @property
    def max_degree(self) -> int:
        return self.hilbert_trace[-1][0] if self.hilbert_trace else -1


def required_points(dim: int, N: int, n: int) -> IndexSet:
    """Sample points touched by ``F_{Upsilon_N, Gamma_n}``."""
    return ix.upsilon_set(dim, N).minkowski_sum(ix.gamma_set(dim, n))


def _coverage_hint(source: SampleSource, N: int, n: int) -> str:
    pts = required_points(source.dim, N, n)
    hi = [max(p[j] for p in pts) for j in range(source.dim)]
    return f"reconstruction with N={N} up to degree {n} needs the box 0..{hi}"


def _sample_hankel(source, A, B, N, n):
    try:
        return build_hankel(source, A, B).entries
    except CoverageError as exc:
        raise CoverageError(f"{exc.message}; {_coverage_hint(source, N, n)}", stage="ideal") from None


def reconstruct_ideal(source: SampleSource, N: int, tol: float = DEFAULT_TOL, check_bound: bool = True) -> IdealData:
    """Compute normal set, graded kernel batches and the Hilbert trace.

    Parameters
    ----------
    source : SampleSource
        Samples of the exponential polynomial.
    N : int
        Upper bound for the total multiplicity.
    tol : float
        Relative singular-value threshold for rank decisions.
    check_bound : bool
        After termination, compare ranks against the rows ``Upsilon_{N+1}``;
        growth there means ``N`` was too small.
    """
    if N < 1:
        raise ValueError("multiplicity bound must be >= 1")
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    s = source.dim
    A = ix.upsilon_set(s, N)
    normal: list = []
    batches: list = []
    trace: list = []
    prev_rank = 0
    prev_kernel = np.zeros((0, 0), dtype=complex)
    cols = np.zeros((len(A), 0), dtype=complex)

    for n in range(len(A) + 2):
        B = ix.gamma_set(s, n)
        new = list(ix.homogeneous(s, n))
        cols = np.hstack([cols, _sample_hankel(source, A, IndexSet(s, new), N, n)])
        scaled, norms = normalize_columns(cols)
        sv = singular_values(scaled)
        sigma1 = sv[0] if sv.size and sv[0] > 0 else 0.0
        rank = int(np.sum(sv > tol * sigma1)) if sigma1 else 0

        normal.extend(_pick_normal(scaled, B, normal, new, rank - len(normal), tol * sigma1))
        if len(normal) != rank:
            raise NumericalRankError(
                f"degree {n}: greedy normal set has {len(normal)} elements but rank is {rank}; "
                f"the rank gap is ambiguous at tol={tol:g}"
            )

        # kernel of this degree, orthogonal to the embedded lower-degree kernel
        kern = null_space(scaled, tol) / norms[:, None] if sigma1 else np.eye(len(B), dtype=complex)
        if kern.shape[1]:
            kern, _ = np.linalg.qr(kern)
        if prev_kernel.size:
            emb = np.zeros((len(B), prev_kernel.shape[1]), dtype=complex)
            emb[: prev_kernel.shape[0]] = prev_kernel
            resid = kern - emb @ (emb.conj().T @ kern)
        else:
            resid = kern
        count = kern.shape[1] - prev_kernel.shape[1]
        batch = []
        if count > 0:
            u, _, _ = scipy.linalg.svd(resid, full_matrices=False)
            for k in range(count):
                batch.append(Poly.from_vector(B, _fix_phase(u[:, k])))
        batches.append((n, batch))
        prev_kernel = kern
        trace.append((n, rank))

        if rank > N:
            raise MultiplicityBoundError(
                f"rank {rank} of the Hankel matrix exceeds the multiplicity bound N={N}: "
                "multiplicity bound too small"
            )
        if rank == prev_rank:
            break
        prev_rank = rank

    ideal = IdealData(s, N, tol, A, IndexSet(s, normal, lower=True), batches, trace)
    if not ideal.normal_set.is_lower():
        raise NumericalRankError(f"normal set {list(ideal.normal_set)} is not a lower set")
    if check_bound:
        _check_bound(source, ideal)
    return ideal


def _pick_normal(scaled, B: IndexSet, normal: list, new: list, count: int, floor: float) -> list:
    """Choose ``count`` new normal monomials of one degree.

    Only monomials whose lower neighbours are already normal are admissible,
    which keeps the normal set a lower set.  Their columns are projected off
    the span of the current normal columns and ranked by column-pivoted QR;
    a pick whose residual falls below ``floor`` is refused.
    """
    if count <= 0:
        return []
    have = set(normal)
    cand = [b for b in new if all(ix.sub(b, ix.unit(len(b), j)) in have for j in range(len(b)) if b[j])]
    if not cand:
        return []
    cols = scaled[:, [B.index[b] for b in cand]]
    if normal:
        q, _ = np.linalg.qr(scaled[:, [B.index[b] for b in normal]])
        cols = cols - q @ (q.conj().T @ cols)
    _, r, piv = scipy.linalg.qr(cols, mode="economic", pivoting=True)
    picked = [cand[p] for k, p in enumerate(piv[:count]) if k < r.shape[0] and abs(r[k, k]) > floor]
    return sorted(picked, key=ix.grlex_key)


def _fix_phase(v: np.ndarray) -> np.ndarray:
    """Make the largest-modulus entry real positive so output is reproducible."""
    k = int(np.argmax(np.abs(v)))
    if v[k] == 0:
        return v
    return v * (abs(v[k]) / v[k])


def _check_bound(source: SampleSource, ideal: IdealData) -> None:
    s, N = ideal.dim, ideal.mult_bound
    wider = ix.upsilon_set(s, N + 1)
    if len(wider) == len(ideal.rows):
        return
    B = ix.gamma_set(s, ideal.max_degree)
    try:
        mat = build_hankel(source, wider, B).entries
    except CoverageError as exc:
        raise CoverageError(
            f"{exc.message}; the multiplicity-bound check {_coverage_hint(source, N + 1, ideal.max_degree)}",
            stage="ideal",
        ) from None
    scaled, _ = normalize_columns(mat)
    sv = singular_values(scaled)
    rank = int(np.sum(sv > ideal.tol * sv[0])) if sv.size and sv[0] > 0 else 0
    if rank > ideal.multiplicity:
        raise MultiplicityBoundError(
            f"rank grows from {ideal.multiplicity} to {rank} when rows extend to Upsilon_{N + 1}: "
            f"multiplicity bound too small (N={N})"
        )


def hilbert_function(ideal: IdealData, n: int) -> int:
    for degree, rank in ideal.hilbert_trace:
        if degree == n:
            return rank
    raise ValueError(f"degree {n} is outside the computed trace (0..{ideal.max_degree})")


def normal_form(ideal: IdealData, source: SampleSource, p: Poly) -> Poly:
    """Reduce ``p`` onto the span of the normal-set monomials modulo the ideal.

    The Hankel image ``F_{A, supp p} p`` is matched by a combination of the
    normal-set columns; this is exact because the rows form an interpolation
    space, so ``F_{A,.}`` is injective on the quotient.
    """
    if p.dim != ideal.dim:
        raise ValueError("dimension mismatch")
    p = p.to_monomial()
    if p.degree > ideal.max_degree + 1:
        raise CoverageError(
            f"degree {p.degree} exceeds the available data (max {ideal.max_degree + 1})", stage="normal_form"
        )
    if p.is_zero() or ideal.multiplicity == 0:
        return Poly.zero(ideal.dim)
    return normal_forms(ideal, source, [p])[0]


def normal_forms(ideal: IdealData, source: SampleSource, polys: list) -> list:
    """Batch version of :func:`normal_form` sharing one factorisation."""
    support = IndexSet(ideal.dim, (a for p in polys for a in p.terms))
    coeffs = np.array([p.coefficient_vector(support) for p in polys]).T
    image = build_hankel(source, ideal.rows, support).entries @ coeffs
    basis = build_hankel(source, ideal.rows, ideal.normal_set).entries
    scaled, norms = normalize_columns(basis)
    sol, *_ = np.linalg.lstsq(scaled, image, rcond=None)
    sol = sol / norms[:, None]
    return [Poly.from_vector(ideal.normal_set, sol[:, k]) for k in range(len(polys))]
