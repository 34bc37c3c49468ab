"""Coefficient polynomials from known zeros: the confluent Vandermonde system
``G f = f(B)`` with ``G[beta; (w, alpha)] = beta^alpha xi_w^beta``."""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from math import comb

import numpy as np

from . import indexsets as ix
from ._linalg import normalize_columns, singular_values
from .errors import CoverageError, PronyError, SolveError
from .ideal import DEFAULT_TOL, IdealData, reconstruct_ideal
from .indexsets import IndexSet
from .poly import Poly
from .signal import ExpPolyModel, SampleSource, TableSource, synth_sample
from .zeros import (
    DEFAULT_CLUSTER_TOL,
    DEFAULT_SEED,
    build_tables,
    frequencies_from_zeros,
    joint_eigen,
)

PRUNE_REL = 1e-9
POLISH_ITERS = 8
ROW_WIDEN = 2


@dataclass
class CoefficientSystem:
    clusters: list
    exponent_sets: list  # Gamma_{d_w} per cluster
    rows: IndexSet
    matrix: np.ndarray = field(repr=False)
    rhs: np.ndarray = field(repr=False)


def universal_rows(dim: int, deg_bounds) -> IndexSet:
    """``Upsilon_K`` for ``K = sum_w C(d_w + s, s)`` unknowns: universal for the K conditions."""
    return ix.upsilon_set(dim, sum(comb(d + dim, dim) for d in deg_bounds))


def coefficient_rows(dim: int, deg_bounds, factor: int = 1) -> IndexSet:
    """Rows ``Gamma_n`` with ``n = factor * sum_w (d_w + 1)``.

    Taylor conditions of order ``d_w`` at distinct points are interpolated
    by ``Pi_{n-1}`` (products of linear forms give the fundamental
    polynomials), and one extra degree keeps the system overdetermined.
    In one variable this coincides with ``Upsilon_{K+1}``; for s > 1 its
    extent is much smaller, which keeps ``xi^beta`` in a sane range.
    ``factor > 1`` oversamples.
    """
    return ix.gamma_set(dim, factor * sum(d + 1 for d in deg_bounds))


def widened_rows(source: SampleSource, deg_bounds, factor: int = ROW_WIDEN) -> IndexSet:
    """Largest ``Gamma_n`` between the minimal rows and ``factor`` times them that the source covers.

    Extra rows cost nothing when samples exist and markedly improve the
    coefficients of weak components; without coverage we fall back to the
    minimal rows, whose coverage error is then reported by :func:`build_system`.
    """
    n_min = sum(d + 1 for d in deg_bounds)
    for n in range(factor * n_min, n_min, -1):
        rows = ix.gamma_set(source.dim, n)
        if source.covers(rows):
            return rows
    return ix.gamma_set(source.dim, n_min)


def vandermonde_columns(xis: list, sets: list, beta: np.ndarray) -> list:
    """Columns ``beta^alpha xi^beta`` for every zero and every alpha in its set."""
    cols = []
    for xi, A in zip(xis, sets):
        powers = np.prod(np.asarray(xi, dtype=complex)[None, :] ** beta, axis=1)
        for alpha in A:
            # 0**0 == 1 so the alpha = 0 column is the plain Vandermonde column
            cols.append(np.prod(beta ** np.array(alpha, dtype=float), axis=1) * powers)
    return cols


def build_system(clusters: list, source: SampleSource, rows: IndexSet | None = None) -> CoefficientSystem:
    if not clusters:
        raise ValueError("need at least one zero to set up the coefficient system")
    s = source.dim
    if rows is None:
        rows = coefficient_rows(s, [c.deg_bound for c in clusters])
    sets = [ix.gamma_set(s, c.deg_bound) for c in clusters]
    beta = np.array(rows.members, dtype=float).reshape(len(rows), s)
    cols = vandermonde_columns([c.xi for c in clusters], sets, beta)
    try:
        rhs = source.samples(rows)
    except CoverageError as exc:
        hi = [max(b[j] for b in rows) for j in range(s)]
        raise CoverageError(f"{exc.message}; coefficient recovery needs the box 0..{hi}", stage="coefficients") from None
    return CoefficientSystem(list(clusters), sets, rows, np.array(cols).T, rhs)


def polish(system: CoefficientSystem, sol: np.ndarray, weights: np.ndarray, iters: int = POLISH_ITERS):
    """Gauss-Newton on zeros and coefficients jointly.

    The model ``sum_w sum_a c_{w,a} beta^a xi_w^beta`` is holomorphic in all
    parameters, so a complex least-squares step is a true Gauss-Newton step.
    Eigenvalue errors of the tables are amplified by ``beta`` in the linear
    fit; a few steps remove most of that.  A step is kept only if the
    weighted residual drops.
    """
    s = system.rows.dim
    beta = np.array(system.rows.members, dtype=float).reshape(len(system.rows), s)
    xis = [np.asarray(c.xi, dtype=complex) for c in system.clusters]
    sizes = [len(A) for A in system.exponent_sets]

    def residual(xs, c):
        G = np.array(vandermonde_columns(xs, system.exponent_sets, beta)).T
        return weights * (G @ c - system.rhs), G

    r, G = residual(xis, sol)
    for _ in range(iters):
        jac = [G]
        offset = 0
        for xi, size in zip(xis, sizes):
            part = G[:, offset: offset + size] @ sol[offset: offset + size]
            offset += size
            jac.append(np.stack([part * beta[:, j] / xi[j] for j in range(s)], axis=1))
        J, norms = normalize_columns(weights[:, None] * np.hstack(jac))
        step, *_ = np.linalg.lstsq(J, -r, rcond=None)
        step = step / norms
        new_sol = sol + step[: len(sol)]
        dxi = step[len(sol):].reshape(len(xis), s)
        new_xis = [xi + d for xi, d in zip(xis, dxi)]
        new_r, new_G = residual(new_xis, new_sol)
        if not np.linalg.norm(new_r) < np.linalg.norm(r):
            break
        xis, sol, r, G = new_xis, new_sol, new_r, new_G
    clusters = [replace(c, xi=xi) for c, xi in zip(system.clusters, xis)]
    return replace(system, clusters=clusters, matrix=G), sol


def solve_coefficients(
    system: CoefficientSystem, tol: float = DEFAULT_TOL, prune: float = PRUNE_REL, refine: bool = True
) -> ExpPolyModel:
    """Least-squares solve, optional joint polish, prune, assemble the model.

    With ``refine`` the polished zeros are written back to ``system.clusters``.
    """
    G = system.matrix
    scaled, norms = normalize_columns(G)
    row_scale = np.max(np.abs(scaled), axis=1)
    row_scale = np.where(row_scale > 0, row_scale, 1.0)
    weighted = scaled / row_scale[:, None]
    sv = singular_values(weighted)
    if sv.size < G.shape[1] or sv[0] == 0 or sv[-1] <= tol * sv[0]:
        raise SolveError(
            "coefficient matrix is rank deficient: degree bounds inconsistent with data "
            "(degree overestimated with too few rows, or a clustering error)"
        )
    sol, *_ = np.linalg.lstsq(weighted, system.rhs / row_scale, rcond=None)
    sol = sol / norms
    if refine:
        polished, sol = polish(system, sol, 1.0 / row_scale)
        system.clusters, system.matrix = polished.clusters, polished.matrix
    cutoff = prune * np.linalg.norm(sol)
    s = system.rows.dim
    pairs = []
    offset = 0
    for c, A in zip(system.clusters, system.exponent_sets):
        block = sol[offset: offset + len(A)]
        offset += len(A)
        poly = Poly.from_vector(A, np.where(np.abs(block) > cutoff, block, 0))
        if poly.is_zero():
            continue
        pairs.append((c.omega, poly))
    return ExpPolyModel.from_pairs(s, pairs)


@dataclass
class Report:
    hilbert_trace: list
    normal_set: list
    clusters: list  # dicts with xi, omega, mult, deg_bound, residual
    lsq_residual: float
    resynthesis_error: float
    grid_size: int

    def to_json(self) -> dict:
        return {
            "hilbert_trace": [list(t) for t in self.hilbert_trace],
            "normal_set": [list(a) for a in self.normal_set],
            "clusters": self.clusters,
            "lsq_residual": self.lsq_residual,
            "resynthesis_error": self.resynthesis_error,
            "grid_size": self.grid_size,
        }


def _pair(z) -> list:
    return [float(np.real(z)), float(np.imag(z))]


def cluster_json(c) -> dict:
    return {
        "xi": [_pair(v) for v in c.xi],
        "omega": [_pair(v) for v in c.omega],
        "mult": int(c.multiplicity),
        "deg_bound": int(c.deg_bound),
        "residual": float(c.residual),
    }


def resynthesis_error(model: ExpPolyModel, source: SampleSource, points) -> float:
    points = list(points)
    if not points:
        return 0.0
    truth = source.samples(points)
    approx = np.array([synth_sample(model, p) for p in points])
    scale = np.max(np.abs(truth))
    err = np.max(np.abs(truth - approx))
    return float(err / scale) if scale > 0 else float(err)


def _stage(name: str, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except PronyError as exc:
        if exc.stage in ("general", "sampling"):
            exc.stage = name
        raise
    except (ValueError, np.linalg.LinAlgError) as exc:
        raise SolveError(str(exc), stage=name) from exc


def end_to_end(
    source: SampleSource,
    N: int,
    tol: float = DEFAULT_TOL,
    cluster_tol: float = DEFAULT_CLUSTER_TOL,
    seed: int = DEFAULT_SEED,
) -> tuple[ExpPolyModel, Report, IdealData]:
    """Ideal, tables, zeros, coefficients; returns model, report and ideal."""
    ideal = _stage("ideal", reconstruct_ideal, source, N, tol)
    if ideal.multiplicity == 0:
        model = ExpPolyModel(source.dim)
        report = Report(ideal.hilbert_trace, [], [], 0.0, _grid_error(model, source, ideal, None), 0)
        return model, report, ideal
    tables = _stage("tables", build_tables, ideal, source)
    clusters = _stage("zeros", joint_eigen, tables, cluster_tol, seed, ideal)
    _stage("zeros", frequencies_from_zeros, clusters)
    rows = widened_rows(source, [c.deg_bound for c in clusters])
    system = _stage("coefficients", build_system, clusters, source, rows)
    model = _stage("coefficients", solve_coefficients, system, tol)
    fitted = np.array([synth_sample(model, b) for b in system.rows])
    rhs_norm = np.linalg.norm(system.rhs)
    lsq = float(np.linalg.norm(fitted - system.rhs) / rhs_norm) if rhs_norm else 0.0
    points = _grid_points(source, ideal, system)
    report = Report(
        ideal.hilbert_trace,
        list(ideal.normal_set),
        [cluster_json(c) for c in system.clusters],
        lsq,
        resynthesis_error(model, source, points),
        len(points),
    )
    return model, report, ideal


def _grid_points(source, ideal, system):
    if isinstance(source, TableSource):
        return source.points()
    pts = ideal.rows.minkowski_sum(ix.gamma_set(ideal.dim, ideal.max_degree))
    if system is not None:
        pts = pts.union(system.rows)
    return list(pts)


def _grid_error(model, source, ideal, system):
    return resynthesis_error(model, source, _grid_points(source, ideal, system))
