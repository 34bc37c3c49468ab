"""Independent oracles and random generators shared by the test modules.

Everything here is computed by a route different from the library: Stirling
numbers by counting surjections or expanding products of linear factors,
the L operator by finite differences of point values, theta operators by
repeated ``x_j d/dx_j``.
"""
from __future__ import annotations

import itertools
from math import comb, factorial, prod

import numpy as np

from exppoly import indexsets as ix
from exppoly.poly import Poly, derivative, evaluate
from exppoly.signal import ExpPolyModel


# ---------------------------------------------------------------- Stirling

def surjections(n: int, k: int) -> int:
    """Number of maps {1..n} -> {1..k} hitting every value (brute force)."""
    if k == 0:
        return 1 if n == 0 else 0
    return sum(1 for f in itertools.product(range(k), repeat=n) if len(set(f)) == k)


def s2_oracle(nu, kappa) -> int:
    out = 1
    for n, k in zip(nu, kappa):
        if k > n:
            return 0
        count = surjections(n, k)
        assert count % factorial(k) == 0
        out *= count // factorial(k)
    return out


def falling_coeffs(n: int) -> list[int]:
    """Integer coefficients of x(x-1)...(x-n+1), lowest degree first."""
    c = [1]
    for r in range(n):
        # multiply by (x - r)
        nxt = [0] * (len(c) + 1)
        for i, v in enumerate(c):
            nxt[i + 1] += v
            nxt[i] -= r * v
        c = nxt
    return c


def s1_oracle(nu, kappa) -> int:
    out = 1
    for n, k in zip(nu, kappa):
        c = falling_coeffs(n)
        out *= c[k] if k < len(c) else 0
    return out


# ---------------------------------------------------------------- polynomials

def random_poly(rng, s: int, deg: int, scale: float = 10.0, dense: bool = True) -> Poly:
    terms = {}
    for a in ix.gamma_set(s, deg):
        if dense or rng.random() < 0.5:
            terms[a] = complex(rng.uniform(-scale, scale), rng.uniform(-scale, scale))
    if not terms:
        terms[(0,) * s] = 1.0
    return Poly(s, terms)


def L_oracle(p: Poly) -> Poly:
    """``(Lp)_alpha = (Delta^alpha p)(0) / alpha!`` from point values."""
    s = p.dim
    out = {}
    for alpha in ix.gamma_set(s, max(p.degree, 0)):
        total = 0j
        for gamma in ix.box(alpha):
            sign = (-1) ** (sum(alpha) - sum(gamma))
            total += sign * prod(comb(a, g) for a, g in zip(alpha, gamma)) * evaluate(p, gamma)
        out[alpha] = total / prod(factorial(a) for a in alpha)
    return Poly(s, out)


def theta_oracle(q: Poly, p: Poly) -> Poly:
    """``q(D_hat) p`` with each ``D_hat_j`` applied literally as ``x_j d/dx_j``."""
    s = p.dim
    total = Poly.zero(s)
    for alpha, c in q.terms.items():
        r = p
        for j, a in enumerate(alpha):
            for _ in range(a):
                r = Poly.variable(s, j) * derivative(r, ix.unit(s, j))
        total = total + c * r
    return total


def scaled_derivative_oracle(q: Poly, p: Poly, xi) -> complex:
    """``(Lq)(xi D) p`` at ``xi`` using the finite-difference L oracle."""
    lq = L_oracle(q)
    xi = np.asarray(xi, dtype=complex)
    return sum(c * np.prod(xi ** np.array(a)) * evaluate(derivative(p, a), xi) for a, c in lq.terms.items())


# ---------------------------------------------------------------- models

def random_model(rng, s: int, k: int, deg: int, re_max: float, min_sep: float = 0.3) -> ExpPolyModel:
    """``k`` components with ``|Re w| <= re_max`` and well separated zeros.

    Coefficients are dense on ``Gamma_d`` (random ``d <= deg``) with moduli
    log-uniform in [0.1, 10] and random phases.
    """
    xis, pairs = [], []
    while len(pairs) < k:
        w = rng.uniform(-re_max, re_max, s) + 1j * rng.uniform(-np.pi, np.pi, s)
        xi = np.exp(w)
        if any(np.linalg.norm(xi - x) < min_sep for x in xis):
            continue
        xis.append(xi)
        d = int(rng.integers(0, deg + 1))
        terms = {a: 10 ** rng.uniform(-1, 1) * np.exp(2j * np.pi * rng.random()) for a in ix.gamma_set(s, d)}
        pairs.append((w, Poly(s, terms)))
    return ExpPolyModel.from_pairs(s, pairs)


def match_errors(truth: ExpPolyModel, found: ExpPolyModel) -> tuple[float, float]:
    """Worst xi error and worst relative coefficient error after nearest-xi matching."""
    if len(found) == 0:
        return np.inf, np.inf
    xi_err = coef_err = 0.0
    for c in truth.components:
        d = [np.linalg.norm(c.xi - r.xi) for r in found.components]
        r = found.components[int(np.argmin(d))]
        xi_err = max(xi_err, min(d))
        coef_err = max(coef_err, (c.poly - r.poly).norm() / c.poly.norm())
    return xi_err, coef_err


def all_lower_sets(s: int, size: int) -> list[frozenset]:
    """Every lower set of the given cardinality, by growing corners."""
    level = {frozenset([(0,) * s])}
    for _ in range(size - 1):
        nxt = set()
        for lset in level:
            for a in lset:
                for j in range(s):
                    b = ix.add(a, ix.unit(s, j))
                    if b in lset:
                        continue
                    if all(ix.sub(b, ix.unit(s, i)) in lset for i in range(s) if b[i]):
                        nxt.add(lset | {b})
        level = nxt
    return list(level)
