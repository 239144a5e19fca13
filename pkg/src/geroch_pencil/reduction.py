"""Reductions h (left inverses of N^0), their companion h_delta and A(k)."""

from dataclasses import dataclass, field

import numpy as np

from .errors import ConditionN0Failure, DimensionMismatch, InvalidCoefficientLength
from .tensor_core import (
    DEFAULT_TOL,
    check_condition_N0,
    contract,
    left_null_space,
    time_slab,
)


@dataclass(frozen=True)
class ReductionPair:
    h: np.ndarray = field(repr=False)
    h_delta: np.ndarray = field(repr=False)
    k_dependent: bool = False

    def residuals(self, n0, C0):
        """Largest deviations from the inverse-pair relations."""
        u, e = self.h.shape
        c = self.h_delta.shape[1]
        out = {"hN0": float(np.abs(self.h @ n0 - np.eye(u)).max(initial=0.0))}
        out["block"] = float(np.abs(n0 @ self.h + self.h_delta @ C0 - np.eye(e)).max(initial=0.0))
        out["C0hd"] = float(np.abs(C0 @ self.h_delta - np.eye(c)).max(initial=0.0))
        out["hhd"] = float(np.abs(self.h @ self.h_delta).max(initial=0.0))
        return out


def constraint_rows(symbol, geroch=None, tol=DEFAULT_TOL):
    """C^0 from a Geroch basis, or an orthonormal left kernel of N^0."""
    if geroch is not None:
        return geroch.C0
    return left_null_space(time_slab(symbol), tol).T


def companion(h, n0, C0):
    """Solve h_delta C^0 = I - N^0 h for h_delta (C^0 has full row rank)."""
    e = n0.shape[0]
    c = C0.shape[0]
    if c == 0:
        return np.zeros((e, 0))
    rhs = np.eye(e) - n0 @ h
    # h_delta = rhs C0^T (C0 C0^T)^{-1}
    return np.linalg.solve(C0 @ C0.T, C0 @ rhs.T).T


def make_pair(h, symbol, geroch=None, k_dependent=False, tol=DEFAULT_TOL):
    n0 = time_slab(symbol)
    h = np.asarray(h, dtype=float)
    if h.shape != (symbol.u, symbol.e):
        raise DimensionMismatch(f"h must be {symbol.u}x{symbol.e}, got {h.shape}")
    C0 = constraint_rows(symbol, geroch, tol)
    return ReductionPair(h=h, h_delta=companion(h, n0, C0), k_dependent=k_dependent)


def base_reduction(symbol, fol=None, geroch=None, tol=DEFAULT_TOL):
    """Moore-Penrose left inverse of N^0 with its companion."""
    report = check_condition_N0(symbol, fol, tol)
    if not report.ok:
        raise ConditionN0Failure(f"rank(N^0) = {report.rank} < u = {symbol.u}")
    h = np.linalg.pinv(time_slab(symbol, fol))
    return make_pair(h, symbol, geroch, tol=tol)


@dataclass(frozen=True)
class ReductionFamily:
    h0: ReductionPair
    p_basis: np.ndarray = field(repr=False)  # (dim, u, e)
    n0: np.ndarray = field(repr=False)
    C0: np.ndarray = field(repr=False)

    @property
    def dim(self):
        return self.p_basis.shape[0]


def reduction_family(symbol, pair=None, geroch=None, tol=DEFAULT_TOL):
    """Orthonormal basis of {p : p N^0 = 0}; its dimension is u c."""
    pair = pair or base_reduction(symbol, geroch=geroch, tol=tol)
    n0 = time_slab(symbol)
    L = left_null_space(n0, tol)  # e x c
    u, c = symbol.u, L.shape[1]
    basis = np.zeros((u * c, u, symbol.e))
    for alpha in range(u):
        for j in range(c):
            basis[alpha * c + j, alpha, :] = L[:, j]
    return ReductionFamily(h0=pair, p_basis=basis, n0=n0, C0=constraint_rows(symbol, geroch, tol))


def apply_family(family, coefficients):
    coefficients = np.asarray(coefficients, dtype=float).ravel()
    if coefficients.size != family.dim:
        raise InvalidCoefficientLength(f"expected {family.dim} coefficients, got {coefficients.size}")
    if family.dim == 0:
        return family.h0
    h = family.h0.h + np.tensordot(coefficients, family.p_basis, axes=(0, 0))
    return ReductionPair(h=h, h_delta=companion(h, family.n0, family.C0), k_dependent=family.h0.k_dependent)


def evolution_symbol(pair, symbol, k):
    """A(k) = h N^i k_i."""
    return pair.h @ contract(symbol, k)
