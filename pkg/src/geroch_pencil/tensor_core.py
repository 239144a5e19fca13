"""Principal symbol, foliation objects and basic rank conditions.

A symbol is stored as a dense array ``coeffs[a, A, alpha]`` with ``a``
running over the n+1 spacetime directions, ``A`` over the e equations and
``alpha`` over the u unknowns.  Time is direction 0 throughout.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.linalg as sla

from .errors import DimensionMismatch, NonFiniteEntry, ZeroWaveVector
from . import kernels

DEFAULT_TOL = 1e-10


# -- small linear algebra helpers -------------------------------------------

def singular_values(mat):
    mat = np.asarray(mat)
    if mat.size == 0:
        return np.zeros(0)
    return sla.svdvals(mat)


def numerical_rank(mat, tol=DEFAULT_TOL):
    """Number of singular values above tol * sigma_max."""
    s = singular_values(mat)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s > tol * s[0]))


def null_space(mat, tol=DEFAULT_TOL):
    """Orthonormal basis (columns) of the right kernel, relative tolerance."""
    mat = np.asarray(mat)
    ncols = mat.shape[1]
    if mat.shape[0] == 0 or not np.any(mat):
        return np.eye(ncols, dtype=mat.dtype if np.iscomplexobj(mat) else float)
    return sla.null_space(mat, rcond=tol)


def null_space_abs(mat, atol):
    """Right kernel counting singular values <= atol as zero."""
    mat = np.asarray(mat)
    ncols = mat.shape[1]
    if mat.shape[0] == 0:
        return np.eye(ncols)
    _, s, vh = sla.svd(mat, full_matrices=True)
    rank = int(np.sum(s > atol))
    return vh[rank:].conj().T


def left_null_space(mat, tol=DEFAULT_TOL):
    """Orthonormal columns X with X^H mat = 0."""
    mat = np.asarray(mat)
    return null_space(mat.conj().T, tol)


def orth(mat, tol=DEFAULT_TOL):
    mat = np.asarray(mat)
    if mat.size == 0 or not np.any(mat):
        return np.zeros((mat.shape[0], 0), dtype=mat.dtype)
    return sla.orth(mat, rcond=tol)


# -- domain types -----------------------------------------------------------

@dataclass(frozen=True)
class PrincipalSymbol:
    n_space: int
    e: int
    u: int
    coeffs: np.ndarray = field(repr=False)
    name: str = "system"

    def __post_init__(self):
        arr = np.array(self.coeffs, dtype=float)
        if arr.shape != (self.n_space + 1, self.e, self.u):
            raise DimensionMismatch(
                f"coefficient array has shape {arr.shape}, expected {(self.n_space + 1, self.e, self.u)}"
            )
        if self.e < self.u:
            raise DimensionMismatch(f"need e >= u, got e={self.e}, u={self.u}")
        if not np.all(np.isfinite(arr)):
            raise NonFiniteEntry("symbol contains non-finite entries")
        arr.setflags(write=False)
        object.__setattr__(self, "coeffs", arr)

    @property
    def c(self):
        return self.e - self.u

    @property
    def n1(self):
        return self.n_space + 1


@dataclass(frozen=True)
class Foliation:
    n_cov: np.ndarray
    t_vec: np.ndarray

    @property
    def eta(self):
        """Projector delta^a_b - t^a n_b onto the spatial directions."""
        return np.eye(self.n_cov.size) - np.outer(self.t_vec, self.n_cov)


def foliation(n_space):
    n = np.zeros(n_space + 1)
    n[0] = 1.0
    n.setflags(write=False)
    return Foliation(n_cov=n, t_vec=n)


@dataclass(frozen=True)
class WaveCovector:
    k: np.ndarray
    normalized: bool = True

    @property
    def spatial(self):
        return self.k[1:]


def wave_covector(spatial, normalize=True):
    """Build k = (0, spatial); Euclidean normalization of the spatial part."""
    sp = np.asarray(spatial, dtype=float).ravel()
    if not np.all(np.isfinite(sp)):
        raise NonFiniteEntry("wave vector has non-finite entries")
    norm = np.linalg.norm(sp)
    if norm == 0.0:
        raise ZeroWaveVector("wave vector must have a nonzero spatial part")
    if normalize:
        sp = sp / norm
    k = np.concatenate([[0.0], sp])
    k.setflags(write=False)
    return WaveCovector(k=k, normalized=normalize)


def as_covector(k):
    """Accept a WaveCovector or a plain length n+1 array."""
    if isinstance(k, WaveCovector):
        return k.k
    return np.asarray(k, dtype=float)


def line(k, lam, fol):
    """l(lam) = -lam n + k."""
    return -lam * fol.n_cov + as_covector(k)


@dataclass(frozen=True)
class GramForm:
    G: np.ndarray

    def __post_init__(self):
        G = np.array(self.G, dtype=float)
        if G.ndim != 2 or G.shape[0] != G.shape[1]:
            raise DimensionMismatch("Gram form must be square")
        if not np.allclose(G, G.T, atol=1e-12, rtol=0):
            raise ValueError("Gram form is not symmetric")
        if np.linalg.eigvalsh(G).min() <= 0:
            raise ValueError("Gram form is not positive definite")
        G.setflags(write=False)
        object.__setattr__(self, "G", G)


def identity_gram(u):
    return GramForm(np.eye(u))


# -- operations -------------------------------------------------------------

def build_symbol(n_space, e, u, coeffs, name="system"):
    return PrincipalSymbol(n_space=int(n_space), e=int(e), u=int(u), coeffs=coeffs, name=name)


def contract(symbol, w):
    """sum_a w_a N^{Aa}_alpha as an e x u matrix."""
    w = as_covector(w)
    if w.shape != (symbol.n1,):
        raise DimensionMismatch(f"covector length {w.shape} does not match n+1={symbol.n1}")
    return np.tensordot(w, symbol.coeffs, axes=(0, 0))


def contract_batch(symbol, covectors):
    covectors = np.asarray(covectors, dtype=float)
    if covectors.ndim != 2 or covectors.shape[1] != symbol.n1:
        raise DimensionMismatch("covector batch must have shape (count, n+1)")
    return kernels.contract_many(symbol.coeffs, covectors)


def time_slab(symbol, fol: Optional[Foliation] = None):
    fol = fol or foliation(symbol.n_space)
    return contract(symbol, fol.n_cov)


@dataclass(frozen=True)
class RankReport:
    ok: bool
    rank: int
    required: int
    singular_values: tuple


def check_condition_N0(symbol, fol=None, tol=DEFAULT_TOL):
    """Full column rank of the time slab N^0."""
    n0 = time_slab(symbol, fol)
    s = singular_values(n0)
    r = numerical_rank(n0, tol)
    return RankReport(ok=r == symbol.u, rank=r, required=symbol.u, singular_values=tuple(float(x) for x in s))


def check_no_algebraic_constraints(symbol, tol=DEFAULT_TOL):
    """True when [N^0 | N^1 | ... | N^n] has a trivial left kernel."""
    stacked = np.concatenate(list(symbol.coeffs), axis=1)
    return numerical_rank(stacked, tol) == symbol.e
