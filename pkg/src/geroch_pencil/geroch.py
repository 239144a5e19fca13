"""Geroch fields: the solution space, its C/M split and the projected M."""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.linalg as sla

from .errors import Condition1Unsatisfiable, CountMismatch, DimensionMismatch, LemmaM0Violation
from .tensor_core import (
    DEFAULT_TOL,
    as_covector,
    contract,
    foliation,
    left_null_space,
    null_space,
    numerical_rank,
    orth,
    time_slab,
)
from . import kernels


@dataclass(frozen=True)
class GerochBasis:
    """C[Gamma, a, A], M[Dt, a, A] and, once projected, M_proj[Dt, a, Gamma]."""

    C: np.ndarray = field(repr=False)
    M: np.ndarray = field(repr=False)
    M_proj: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def c(self):
        return self.C.shape[0]

    @property
    def m(self):
        return self.M.shape[0]

    @property
    def C0(self):
        """n_a C^{Gamma a}_A, a c x e matrix."""
        n = foliation(self.C.shape[1] - 1).n_cov
        return np.einsum("a,gaA->gA", n, self.C)

    def Ck(self, k):
        return np.einsum("a,gaA->gA", as_covector(k), self.C)

    def Mk(self, k):
        """sum_i M_proj^{Dt i} k_i as an m x c matrix."""
        if self.M_proj is None:
            raise ValueError("M fields have not been projected; call project_M first")
        return np.einsum("a,daG->dG", as_covector(k), self.M_proj)

    def drop_M(self, index):
        """Copy with one M field removed (used to probe condition v)."""
        keep = [i for i in range(self.m) if i != index]
        proj = None if self.M_proj is None else self.M_proj[keep]
        return GerochBasis(C=self.C, M=self.M[keep], M_proj=proj)


def symmetrization_residual(X, symbol):
    """max |X^a N^b + X^b N^a| relative to |X| |N|."""
    T = np.einsum("aA,bAx->abx", X, symbol.coeffs)
    res = np.abs(T + T.transpose(1, 0, 2)).max() if T.size else 0.0
    scale = max(np.abs(X).max(initial=0.0) * np.abs(symbol.coeffs).max(initial=0.0), 1e-300)
    return float(res / scale)


def solve_geroch_space(symbol, tol=DEFAULT_TOL):
    """Orthonormal basis of all X^a_A with X^(a N^b) = 0, shape (dim, n+1, e)."""
    op = kernels.geroch_operator(symbol.coeffs)
    ns = null_space(op, tol)
    return np.ascontiguousarray(ns.T.reshape(-1, symbol.n1, symbol.e))


def split_basis(space, symbol, fol=None, tol=DEFAULT_TOL):
    """Split the Geroch space into M (annihilating N^0) and a complement C."""
    fol = fol or foliation(symbol.n_space)
    n0 = time_slab(symbol, fol)
    dim = space.shape[0]
    if dim == 0:
        if symbol.c != 0:
            raise CountMismatch(f"no Geroch fields but e - u = {symbol.c}")
        empty = np.zeros((0, symbol.n1, symbol.e))
        return GerochBasis(C=empty, M=empty.copy())
    # columns: X_j . N^0 flattened over (a, alpha)
    images = np.einsum("jaA,Ab->abj", space, n0).reshape(-1, dim)
    Y = null_space(images, tol)
    Z = null_space(Y.T, tol) if Y.shape[1] else np.eye(dim)
    M = np.einsum("jd,jaA->daA", Y, space)
    C = np.einsum("jg,jaA->gaA", Z, space)
    c_found = C.shape[0]
    if c_found != symbol.c:
        raise CountMismatch(
            f"Geroch space gives {c_found} constraint fields (dim {dim}, m {M.shape[0]}) but e - u = {symbol.c}"
        )
    if c_found:
        C0 = np.einsum("a,gaA->gA", fol.n_cov, C)
        # Column-pivoted QR of C0^T; remix so the new C0 has orthonormal rows.
        Q, R, piv = sla.qr(C0.T, mode="economic", pivoting=True)
        diag = np.abs(np.diag(R))
        if diag.size == 0 or diag.min() <= tol * diag.max():
            raise Condition1Unsatisfiable("C^0 does not reach rank c")
        W = np.zeros((c_found, c_found))
        W[piv, :] = sla.solve_triangular(R, np.eye(c_found))
        C = np.einsum("jg,jaA->gaA", W, C)
    return GerochBasis(C=np.ascontiguousarray(C), M=np.ascontiguousarray(M))


def geroch_basis(symbol, fol=None, tol=DEFAULT_TOL):
    return split_basis(solve_geroch_space(symbol, tol), symbol, fol, tol)


def decomposition_residual(space, basis):
    """Largest residual of projecting each space element onto span{C, M}."""
    if space.shape[0] == 0:
        return 0.0
    B = np.concatenate([basis.C, basis.M]).reshape(basis.c + basis.m, -1).T
    X = space.reshape(space.shape[0], -1).T
    coef, *_ = np.linalg.lstsq(B, X, rcond=None)
    return float(np.abs(B @ coef - X).max())


def project_M(basis, pair, symbol=None, zero_tol=1e-12, sym_tol=1e-10):
    """Attach M_proj[Dt, a, Gamma] = sum_A M^{Dt a}_A h^A_Gamma.

    The time component of the result must vanish; when ``symbol`` is given
    the equation M_proj^(a C^0 N^b) = 0 is checked as well.
    """
    h_delta = np.asarray(pair.h_delta)
    if basis.m and h_delta.shape[0] != basis.M.shape[2]:
        raise DimensionMismatch("h_delta does not match the equation dimension of M")
    Mp = np.einsum("daA,AG->daG", basis.M, h_delta) if basis.m else np.zeros((0, basis.C.shape[1], basis.c))
    if basis.m:
        scale = max(1.0, np.abs(basis.M).max() * np.abs(h_delta).max(initial=0.0))
        n = foliation(basis.C.shape[1] - 1).n_cov
        t_part = np.abs(np.einsum("a,daG->dG", n, Mp)).max()
        if t_part > zero_tol * scale:
            raise LemmaM0Violation(f"projected M has time component {t_part:.3e}")
        if symbol is not None:
            T = np.einsum("daG,GA,bAx->dabx", Mp, basis.C0, symbol.coeffs)
            res = np.abs(T + T.transpose(0, 2, 1, 3)).max()
            if res > sym_tol * scale * max(1.0, np.abs(symbol.coeffs).max()):
                raise LemmaM0Violation(f"projected M fails the Geroch equation, residual {res:.3e}")
    return GerochBasis(C=basis.C, M=basis.M, M_proj=np.ascontiguousarray(Mp))


@dataclass(frozen=True)
class ConditionVResult:
    ok: bool
    s: int
    rank_Mk: int
    y: int
    deficiency: np.ndarray = field(repr=False)


def check_condition_v(basis, symbol, k, tol=DEFAULT_TOL):
    """Do the contracted M fields span the left kernel of C^0 N(k)?"""
    cnk = basis.C0 @ contract(symbol, k)
    L = left_null_space(cnk, tol) if basis.c else np.zeros((0, 0))
    s = L.shape[1]
    if basis.m:
        Mk = basis.Mk(k)
        r_m = numerical_rank(Mk, tol)
        Qm = orth(Mk.T, tol)
    else:
        r_m = 0
        Qm = np.zeros((basis.c, 0))
    if s:
        rest = L - Qm @ (Qm.T @ L)
        deficiency = orth(rest, 1e-8) if np.abs(rest).max() > 1e-8 else np.zeros((basis.c, 0))
    else:
        deficiency = np.zeros((basis.c, 0))
    return ConditionVResult(ok=(r_m == s), s=s, rank_Mk=r_m, y=basis.m - r_m, deficiency=deficiency)
