"""Multiplication tables on the quotient ring and their joint eigenstructure.

Multiple zeros make the tables derogatory, so nothing here assumes
diagonalisability: a random combination of the tables is brought to
reordered Schur form, eigenvalues are grouped into clusters, and each
zero is read off the trace of the common invariant block.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import comb

import numpy as np
import scipy.linalg

from . import indexsets as ix
from .errors import ClusteringError, CoverageError
from .ideal import IdealData, normal_forms
from .poly import Poly, evaluate, theta_apply
from .signal import SampleSource, principal_log

# a defective eigenvalue of index k splits by ~ eps**(1/k); 1e-3 covers k <= 4
DEFAULT_CLUSTER_TOL = 1e-3
NILPOTENT_TOL = 1e-6
DEFAULT_SEED = 20170401
MAX_RETRIES = 5
ZERO_RESIDUAL_TOL = 1e-6


@dataclass
class MultiplicationTables:
    normal_set: ix.IndexSet
    matrices: list  # one (m x m) array per coordinate

    @property
    def dim(self) -> int:
        return len(self.matrices)

    def commutator_norms(self) -> list:
        out = []
        for j in range(self.dim):
            for k in range(j + 1, self.dim):
                a, b = self.matrices[j], self.matrices[k]
                out.append(float(np.linalg.norm(a @ b - b @ a)))
        return out


@dataclass
class ZeroCluster:
    xi: np.ndarray
    multiplicity: int
    deg_bound: int
    blocks: list = field(default_factory=list, repr=False)
    residual: float = 0.0

    @property
    def omega(self) -> np.ndarray:
        return principal_log(self.xi)


def build_tables(ideal: IdealData, source: SampleSource) -> MultiplicationTables:
    """Column ``beta`` of ``M_j`` holds the normal form of ``x_j * x^beta``."""
    normal = ideal.normal_set
    s = ideal.dim
    mats = []
    if len(normal) == 0:
        return MultiplicationTables(normal, [np.zeros((0, 0), dtype=complex) for _ in range(s)])
    for j in range(s):
        shifted = [Poly.monomial(ix.add(beta, ix.unit(s, j))) for beta in normal]
        try:
            forms = normal_forms(ideal, source, shifted)
        except CoverageError as exc:
            raise CoverageError(f"insufficient sample coverage for multiplication tables: {exc.message}", stage="tables") from None
        mats.append(np.array([f.coefficient_vector(normal) for f in forms]).T)
    return MultiplicationTables(normal, mats)


def _cluster(values: np.ndarray, radius: float) -> list:
    """Single-linkage grouping of eigenvalues closer than ``radius``."""
    n = len(values)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for k in range(i + 1, n):
            if abs(values[i] - values[k]) <= radius:
                parent[find(i)] = find(k)
    groups: dict = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return sorted(groups.values(), key=lambda g: g[0])


def _invariant_basis(mat: np.ndarray, center: complex, radius: float, size: int) -> np.ndarray:
    _, z, sdim = scipy.linalg.schur(mat, output="complex", sort=lambda v: abs(v - center) <= radius)
    if sdim != size:
        raise ClusteringError(f"reordered Schur form selected {sdim} eigenvalues, expected {size}")
    return z[:, :size]


def _nilpotency_degree(nil: np.ndarray, scale: float, tol: float) -> int:
    """Largest k with ``nil^k`` numerically nonzero."""
    k = 0
    power = np.eye(nil.shape[0], dtype=complex)
    while k < nil.shape[0]:
        power = power @ nil
        if np.linalg.norm(power) <= tol * scale ** (k + 1):
            break
        k += 1
    return k


def degree_bound(blocks: list, xi: np.ndarray, weights: np.ndarray, scale: float, tol: float) -> int:
    """Upper bound for the degree of the coefficient polynomial at one zero.

    The local algebra at ``xi`` is dual to the multiplicity space, so its
    Loewy length minus one equals the top degree of that space, which in
    turn equals the degree of the coefficient polynomial.  A generic linear
    combination of the nilpotent parts reaches that length.  The result is
    clamped to the always-valid range ``[d_min, m - 1]``, where ``d_min``
    is the smallest degree whose polynomial space has dimension ``>= m``.
    """
    m = blocks[0].shape[0]
    s = len(blocks)
    d_min = next(d for d in range(m + 1) if comb(d + s, s) >= m)
    nil = sum(w * (b - x * np.eye(m)) for w, b, x in zip(weights, blocks, xi))
    est = _nilpotency_degree(nil, max(scale, 1e-300), tol)
    return int(min(max(est, d_min), m - 1))


def verify_zero_residual(ideal: IdealData, cluster: ZeroCluster) -> float:
    """How well ``cluster.xi`` fits the computed ideal.

    Every kernel polynomial must vanish at ``xi`` (relative to the size of its
    terms there).  A zero of multiplicity > 1 has a multiplicity space with a
    degree-one element, so the theta-gradients of the kernel at ``xi`` must
    then be rank deficient; the smallest singular value is reported.
    """
    kernel = ideal.kernel
    if not kernel:
        return 0.0
    xi = np.asarray(cluster.xi, dtype=complex)
    s = ideal.dim
    worst = 0.0
    grads = []
    for q in kernel:
        mags = [abs(c) * np.prod(np.abs(xi) ** np.array(a)) for a, c in q.terms.items()]
        scale = sum(mags) or 1.0
        worst = max(worst, abs(evaluate(q, xi)) / scale)
        if cluster.multiplicity > 1:
            dscale = sum(m * max(sum(a), 1) for m, a in zip(mags, q.terms)) or 1.0
            grads.append([evaluate(theta_apply(Poly.variable(s, j), q), xi) / dscale for j in range(s)])
    if grads:
        sv = scipy.linalg.svdvals(np.array(grads))
        worst = max(worst, float(sv[s - 1]) if len(sv) >= s else 0.0)
    return float(worst)


def joint_eigen(
    tables: MultiplicationTables,
    cluster_tol: float = DEFAULT_CLUSTER_TOL,
    seed: int = DEFAULT_SEED,
    ideal: IdealData | None = None,
    retries: int = MAX_RETRIES,
    residual_tol: float = ZERO_RESIDUAL_TOL,
) -> list:
    """Common zeros of the ideal with multiplicities.

    With ``ideal`` given, every cluster is checked against the kernel
    polynomials and a failing draw of the random combination is retried.
    """
    m = len(tables.normal_set)
    if m == 0:
        return []
    s = tables.dim
    rng = np.random.default_rng(seed)
    last_err = "no attempt made"
    for _ in range(retries):
        weights = rng.dirichlet(np.ones(s))
        mc = sum(w * mj for w, mj in zip(weights, tables.matrices))
        scale = max(np.linalg.norm(mc, 2), max(np.linalg.norm(mj, 2) for mj in tables.matrices))
        radius = cluster_tol * max(scale, 1.0)
        eig = np.diag(scipy.linalg.schur(mc, output="complex")[0])
        groups = _cluster(eig, radius)
        try:
            clusters = []
            for grp in groups:
                center = eig[grp].mean()
                spread = max(abs(eig[g] - center) for g in grp)
                z = _invariant_basis(mc, center, spread + radius / 2, len(grp))
                blocks = [z.conj().T @ mj @ z for mj in tables.matrices]
                xi = np.array([np.trace(b) / len(grp) for b in blocks])
                dbound = degree_bound(blocks, xi, rng.dirichlet(np.ones(s)), scale, NILPOTENT_TOL)
                clusters.append(ZeroCluster(xi, len(grp), dbound, blocks))
        except ClusteringError as exc:
            last_err = str(exc)
            continue
        if ideal is not None:
            for c in clusters:
                c.residual = verify_zero_residual(ideal, c)
            bad = [c for c in clusters if c.residual > residual_tol]
            if bad:
                last_err = f"zero residual {max(c.residual for c in bad):.3g} exceeds {residual_tol:g}"
                continue
        return clusters
    raise ClusteringError(f"joint eigenvalue clustering failed after {retries} attempts: {last_err}")


def frequencies_from_zeros(clusters: list) -> list:
    """``(omega, multiplicity, degree bound)`` per cluster; ``omega = log xi``."""
    out = []
    for c in clusters:
        if np.any(np.abs(c.xi) < 1e-12):
            raise ClusteringError(f"numerically invalid zero {c.xi}: a component vanishes")
        out.append((principal_log(c.xi), c.multiplicity, c.deg_bound))
    return out
