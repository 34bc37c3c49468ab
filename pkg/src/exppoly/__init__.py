"""Multivariate Prony reconstruction of exponential polynomials.

A signal ``f(alpha) = sum_w f_w(alpha) exp(w . alpha)`` with polynomial
coefficients is recovered from samples on the integer grid: the Hankel
kernel gives the ideal of annihilating shift polynomials, its multiplication
tables give the zeros ``xi = exp(w)`` with multiplicities, and a confluent
Vandermonde system gives the coefficient polynomials.
"""
from .coeffs import Report, build_system, end_to_end, solve_coefficients
from .errors import (
    ClusteringError,
    CoverageError,
    MultiplicityBoundError,
    ParseError,
    PronyError,
    SolveError,
)
from .ideal import IdealData, NumericalRankError, hilbert_function, normal_form, reconstruct_ideal
from .indexsets import IndexSet, gamma_set, upsilon_set
from .poly import Poly, L_apply, L_inverse, derivative_span, shift_span, theta_apply
from .signal import (
    ExpPolyModel,
    ModelSource,
    TableSource,
    annihilation_residual,
    build_hankel,
    build_toeplitz,
    build_vandermonde,
    hankel_factorization_residual,
    synth_sample,
)
from .stirling import stirling1, stirling2, stirling_table
from .zeros import ZeroCluster, build_tables, joint_eigen

__version__ = "0.1.0"

__all__ = [
    "ClusteringError", "CoverageError", "ExpPolyModel", "IdealData", "IndexSet", "L_apply",
    "L_inverse", "ModelSource", "MultiplicityBoundError", "NumericalRankError", "ParseError",
    "Poly", "PronyError", "Report", "SolveError", "TableSource", "ZeroCluster",
    "annihilation_residual", "build_hankel", "build_system", "build_tables", "build_toeplitz",
    "build_vandermonde", "derivative_span", "end_to_end", "gamma_set",
    "hankel_factorization_residual", "hilbert_function", "joint_eigen", "normal_form",
    "reconstruct_ideal", "shift_span", "solve_coefficients", "stirling1", "stirling2",
    "stirling_table", "synth_sample", "theta_apply", "upsilon_set",
]
