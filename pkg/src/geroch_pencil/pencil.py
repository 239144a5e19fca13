"""Spectral and Kronecker analysis of the pencil -lam N^0 + N^i k_i.

Everything here works on the reduced form of the pencil,

    [h; C^0] (-lam N^0 + N k) = [-lam I + A(k); C^0 N k],

which has the same Kronecker structure because [h; C^0] is invertible.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
from scipy.optimize import minimize_scalar

from .errors import ComplexPhysicalEigenvalue, SubspaceDimensionMismatch
from .reduction import evolution_symbol
from .tensor_core import (
    DEFAULT_TOL,
    as_covector,
    contract,
    identity_gram,
    null_space,
    null_space_abs,
    numerical_rank,
    orth,
    time_slab,
)
from . import kernels

EIG_TOL = 1e-8      # kernel membership and clustering, relative
IMAG_TOL = 1e-8


@dataclass(frozen=True)
class KernelDims:
    d: int
    r: int
    s: int

    def as_tuple(self):
        return (self.d, self.r, self.s)


@dataclass(frozen=True)
class EigenRecord:
    value: complex
    multiplicity: int
    right_vectors: np.ndarray = field(repr=False)
    left_vectors: np.ndarray = field(repr=False)
    is_complex: bool = False


def _fmt(v):
    v = complex(v)
    if abs(v.imag) <= IMAG_TOL * max(1.0, abs(v)):
        return f"{v.real:.6g}"
    return f"{v.real:.6g}{v.imag:+.6g}j"


@dataclass(frozen=True)
class KroneckerStructure:
    """Block multiset of a pencil [-lam I + A; B] with ``cols`` columns.

    ``jordan`` lists size-1 Jordan blocks as (eigenvalue, count); larger
    blocks found on the partial path go to ``higher_jordan`` as
    (eigenvalue, size), one entry per block.
    """

    jordan: tuple
    l_blocks: tuple          # ((m, count), ...) with m >= 1
    zero_rows: int
    verified: str            # "lemma2_certified" or "partial"
    cols: int
    surplus: int             # rows - cols of the pencil
    deficit: int = 0
    higher_jordan: tuple = ()

    @property
    def l_dict(self):
        return dict(self.l_blocks)

    @property
    def certified(self):
        return self.verified == "lemma2_certified"

    def counting_identities(self):
        """(identity A, identity B) as exact integer checks."""
        a_ok = self.zero_rows + sum(n for _, n in self.l_blocks) == self.surplus
        jordan_total = sum(n for _, n in self.jordan) + sum(sz for _, sz in self.higher_jordan)
        b_ok = jordan_total + sum(m * n for m, n in self.l_blocks) == self.cols
        return a_ok, b_ok

    def jordan_multiset(self):
        out = []
        for v, n in self.jordan:
            out.extend([v] * n)
        return out

    def describe(self):
        parts = [f"{n}xJ1({_fmt(v)})" for v, n in self.jordan]
        parts += [f"J{sz}({_fmt(v)})" for v, sz in self.higher_jordan]
        parts += [f"{n}xL{m}T" for m, n in self.l_blocks]
        if self.zero_rows:
            parts.append(f"{self.zero_rows}xL0T")
        text = ", ".join(parts) if parts else "empty"
        if not self.certified:
            text += f" [partial, deficit {self.deficit}]"
        return text


# -- clustering and the reduced-pencil engine -------------------------------

def cluster_values(values, rtol=EIG_TOL):
    """Group indices of values closer than rtol * spectral radius (transitive)."""
    values = np.asarray(values, dtype=complex)
    n = values.size
    if n == 0:
        return []
    radius = np.abs(values).max()
    atol = rtol * max(radius, 1.0)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(values[i] - values[j]) <= atol:
                parent[find(i)] = find(j)
    groups = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    out = list(groups.values())
    out.sort(key=lambda g: (round(values[g].real.mean(), 9), round(values[g].imag.mean(), 9)))
    return out


def _clean(v):
    v = complex(v)
    if abs(v.imag) <= IMAG_TOL * max(1.0, abs(v)):
        return float(v.real)
    return v


def physical_clusters(A, Cb, eig_tol=EIG_TOL, scale=0.0):
    """Eigenvalues of A with eigenvectors inside ker(Cb).

    Returns (value, basis) pairs; basis spans ker [A - lam I; Cb].
    ``scale`` is the size of the operands A was built from, so that a
    matrix that is zero up to rounding is treated as zero.
    """
    u = A.shape[0]
    if u == 0:
        return []
    w = np.linalg.eigvals(A)
    scale = max(scale, np.linalg.norm(A, 2), np.linalg.norm(Cb, 2) if Cb.size else 0.0, np.abs(w).max(), 1e-300)
    out = []
    for g in cluster_values(w, eig_tol):
        lam = w[g].mean()
        if abs(lam.imag) <= IMAG_TOL * max(1.0, abs(lam)):
            lam = complex(lam.real, 0.0)
        stack = np.vstack([A - lam * np.eye(u), Cb])
        if lam.imag == 0.0:
            stack = stack.real
        ns = null_space_abs(stack, eig_tol * scale)
        if ns.shape[1]:
            out.append((_clean(lam), ns))
    return out


def _rank_abs(mat, atol):
    s = sla.svdvals(mat) if mat.size else np.zeros(0)
    return int(np.sum(s > atol))


def _staircase(A, Cb, tol):
    """Observability ranks give the L^T indices; the unobservable part the Jordan blocks."""
    u = A.shape[0]
    c = Cb.shape[0]
    scale = max(np.abs(A).max(initial=0.0), 1.0)
    Ah = A / scale
    rho = [0]
    blocks = []
    # one common scale: rescaling each block alone would inflate rounding noise in Cb A^j
    cnrm = np.abs(Cb).max(initial=0.0)
    cur = Cb / cnrm if cnrm > 0 else Cb
    for _ in range(u + 1):
        if cur.shape[0] == 0:
            break
        blocks.append(cur)
        O = np.vstack(blocks)
        rho.append(u - null_space(O, tol).shape[1] if np.any(O) else 0)
        if rho[-1] == rho[-2] or rho[-1] == u:
            break
        cur = cur @ Ah
    deltas = [rho[j] - rho[j - 1] for j in range(1, len(rho))] + [0]
    l_blocks = []
    for m in range(1, len(deltas)):
        n = deltas[m - 1] - deltas[m]
        if n > 0:
            l_blocks.append((m, n))
    zero_rows = c - (deltas[0] if rho[1:] else 0)
    if blocks and np.any(np.vstack(blocks)):
        V = null_space(np.vstack(blocks), tol)
    else:
        V = np.eye(u)
    jordan, higher = [], []
    if V.shape[1]:
        Av = V.conj().T @ A @ V
        a = Av.shape[0]
        w = np.linalg.eigvals(Av)
        nrm = max(np.linalg.norm(Av, 2), 1.0)
        for g in cluster_values(w):
            lam = w[g].mean()
            if abs(lam.imag) <= IMAG_TOL * max(1.0, abs(lam)):
                lam = lam.real
            Bm = Av - lam * np.eye(a)
            ranks = [a]
            P = np.eye(a)
            for j in range(1, len(g) + 1):
                P = P @ Bm
                ranks.append(_rank_abs(P, EIG_TOL * nrm ** j))
            at_least = [ranks[j - 1] - ranks[j] for j in range(1, len(ranks))] + [0]
            for j in range(1, len(at_least)):
                n = at_least[j - 1] - at_least[j]
                if n <= 0:
                    continue
                if j == 1:
                    jordan.append((_clean(lam), n))
                else:
                    higher.extend([(_clean(lam), j)] * n)
    return tuple(jordan), tuple(higher), tuple(l_blocks), zero_rows


def reduced_structure(A, Cb, tol=DEFAULT_TOL, force_staircase=False, scale=0.0):
    """Kronecker structure of the pencil [-lam I + A; Cb].

    Certified when the kernel-compatible eigenvectors fill ker Cb; the
    observability staircase then agrees with the certified answer, and it
    is used directly otherwise.
    """
    u = A.shape[0]
    c = Cb.shape[0]
    r = numerical_rank(Cb, tol) if c else 0
    d, s = u - r, c - r
    phys = physical_clusters(A, Cb, scale=scale)
    found = sum(ns.shape[1] for _, ns in phys)
    if found == d and not force_staircase:
        jordan = tuple((lam, ns.shape[1]) for lam, ns in phys)
        l_blocks = ((1, r),) if r else ()
        return KroneckerStructure(jordan=jordan, l_blocks=l_blocks, zero_rows=s,
                                  verified="lemma2_certified", cols=u, surplus=c), phys
    jordan, higher, l_blocks, zero_rows = _staircase(A, Cb, tol)
    verified = "lemma2_certified" if (found == d and not higher) else "partial"
    return KroneckerStructure(jordan=jordan, l_blocks=l_blocks, zero_rows=zero_rows, verified=verified,
                              cols=u, surplus=c, deficit=d - found, higher_jordan=higher), phys


# -- operations on a symbol -------------------------------------------------

def _a_scale(pair, symbol, k):
    return float(np.linalg.norm(pair.h, 2) * np.linalg.norm(contract(symbol, k), 2))


def _cnk(symbol, geroch, k):
    if geroch is None or geroch.c == 0:
        return np.zeros((0, symbol.u))
    return geroch.C0 @ contract(symbol, k)


def kernel_dims(symbol, geroch, k, tol=DEFAULT_TOL):
    cnk = _cnk(symbol, geroch, k)
    r = numerical_rank(cnk, tol) if cnk.shape[0] else 0
    dims = KernelDims(d=symbol.u - r, r=r, s=cnk.shape[0] - r)
    assert dims.r + dims.d == symbol.u and dims.r + dims.s == cnk.shape[0]
    return dims


def pencil_at(symbol, k, lam):
    return -lam * time_slab(symbol) + contract(symbol, k)


def _records(symbol, phys, k, raise_complex=True):
    nk = contract(symbol, k)
    n0 = time_slab(symbol)
    out = []
    for lam, ns in phys:
        is_c = isinstance(lam, complex)
        if is_c and raise_complex:
            raise ComplexPhysicalEigenvalue(lam, as_covector(k))
        P = nk - lam * n0
        left = null_space(P.T, EIG_TOL)
        if not is_c:
            ns, left = ns.real, left.real
        out.append(EigenRecord(value=lam, multiplicity=ns.shape[1], right_vectors=ns,
                               left_vectors=left, is_complex=is_c))
    return out


def generalized_eigens(symbol, pair, geroch, k, tol=DEFAULT_TOL, raise_complex=True):
    """Physical eigenpairs: eigenvectors of A(k) inside ker(C^0 N k)."""
    A = evolution_symbol(pair, symbol, k)
    phys = physical_clusters(A, _cnk(symbol, geroch, k), scale=_a_scale(pair, symbol, k))
    return _records(symbol, phys, k, raise_complex)


def kronecker_structure(symbol, pair, geroch, k, tol=DEFAULT_TOL, force_staircase=False):
    A = evolution_symbol(pair, symbol, k)
    struct, _ = reduced_structure(A, _cnk(symbol, geroch, k), tol, force_staircase, _a_scale(pair, symbol, k))
    return struct


def left_kernel_dim(symbol, k, lam, tol=EIG_TOL):
    P = pencil_at(symbol, k, lam)
    return P.shape[0] - numerical_rank(P, tol)


@dataclass(frozen=True)
class AngleRecord:
    value: float
    multiplicity: int
    cosines: tuple


def canonical_angles(symbol, pair, geroch, gram=None, k=None, tol=DEFAULT_TOL, records=None):
    """Cosines of the canonical angles between Phi_L and Phi_R per eigenvalue."""
    G = (gram or identity_gram(symbol.u)).G
    n0 = time_slab(symbol)
    c = symbol.c
    records = records if records is not None else generalized_eigens(symbol, pair, geroch, k, tol)
    cnk = _cnk(symbol, geroch, k)
    # The lam independent part of the projected left kernel is G (C^0 N k)^T.
    QR = orth(G @ cnk.T, tol) if cnk.shape[0] else np.zeros((symbol.u, 0))
    out = []
    for rec in records:
        di = rec.multiplicity
        if rec.left_vectors.shape[1] != c + di:
            raise SubspaceDimensionMismatch(
                f"left kernel at {rec.value} has dimension {rec.left_vectors.shape[1]}, expected {c + di}")
        W = G @ n0.T @ rec.left_vectors
        W = W - QR @ (QR.conj().T @ W)
        QL = orth(W, EIG_TOL)
        if QL.shape[1] != di:
            raise SubspaceDimensionMismatch(
                f"projected left space at {rec.value} has dimension {QL.shape[1]}, expected {di}")
        QRi = orth(rec.right_vectors, EIG_TOL)
        cos = np.clip(sla.svdvals(QL.conj().T @ QRi), 0.0, 1.0)
        out.append(AngleRecord(value=rec.value, multiplicity=di, cosines=tuple(float(x) for x in cos)))
    return out


# -- sweeps -----------------------------------------------------------------

@dataclass(frozen=True)
class Sampling:
    count: int = 200
    seed: int = 0


def sample_sphere(n_space, count, seed):
    """Seeded unit spatial covectors, returned as rows (0, k_1, ..., k_n)."""
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((count, n_space))
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    return np.concatenate([np.zeros((count, 1)), x], axis=1)


def _eigvec_cond(A):
    if A.shape[0] == 0:
        return 1.0
    _, V = np.linalg.eig(A)
    with np.errstate(all="ignore"):
        cn = np.linalg.cond(V)
    return float(cn) if np.isfinite(cn) else float("inf")


def analyze_k(symbol, pair, geroch, k, gram=None, tol=DEFAULT_TOL):
    """Per wave vector: dims, structure, eigenpairs and angle cosines."""
    A = evolution_symbol(pair, symbol, k)
    cnk = _cnk(symbol, geroch, k)
    struct, phys = reduced_structure(A, cnk, tol, scale=_a_scale(pair, symbol, k))
    dims = kernel_dims(symbol, geroch, k, tol)
    recs = _records(symbol, phys, k, raise_complex=False)
    max_imag = max((abs(complex(r.value).imag) for r in recs), default=0.0)
    real = not any(r.is_complex for r in recs)
    cosines = []
    angle_error = None
    if real:
        try:
            cosines = canonical_angles(symbol, pair, geroch, gram, k, tol, records=recs)
        except SubspaceDimensionMismatch as exc:
            angle_error = str(exc)
    all_cos = [x for a in cosines for x in a.cosines]
    return {
        "k": as_covector(k),
        "dims": dims,
        "structure": struct,
        "records": recs,
        "angles": cosines,
        "min_cos": min(all_cos) if all_cos else (0.0 if (angle_error or not real) else 1.0),
        "max_imag": float(max_imag),
        "real": real,
        "angle_error": angle_error,
        "cond_A": _eigvec_cond(A),
    }


@dataclass
class SweepReport:
    samples: list
    count: int
    seed: int
    threshold: float
    tol: float
    min_cos: float
    hyperbolic: bool
    certified_all: bool
    dims_constant: bool
    sh: bool
    extra: dict = field(default_factory=dict)


def _parallel_map(fn, items, jobs):
    if jobs and jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as ex:
            return list(ex.map(fn, items))
    return [fn(x) for x in items]


def sh_sweep(symbol, pair, geroch, gram=None, sampling=None, threshold=1e-3, tol=DEFAULT_TOL,
             jobs=1, raise_complex=True):
    """Strong hyperbolicity test over seeded unit wave vectors."""
    sampling = sampling or Sampling()
    ks = sample_sphere(symbol.n_space, sampling.count, sampling.seed)
    results = _parallel_map(lambda k: analyze_k(symbol, pair, geroch, k, gram, tol), list(ks), jobs)
    if raise_complex:
        for res in results:
            for rec in res["records"]:
                if rec.is_complex:
                    raise ComplexPhysicalEigenvalue(rec.value, res["k"])
    min_cos = min((r["min_cos"] for r in results), default=1.0)
    hyperbolic = all(r["real"] for r in results)
    certified = all(r["structure"].certified for r in results)
    dims = {r["dims"].as_tuple() for r in results}
    sh = hyperbolic and certified and min_cos >= threshold
    return SweepReport(samples=results, count=sampling.count, seed=sampling.seed, threshold=threshold, tol=tol,
                       min_cos=float(min_cos), hyperbolic=hyperbolic, certified_all=certified,
                       dims_constant=len(dims) <= 1, sh=sh)


# -- brute force diagnostic -------------------------------------------------

def scan_generalized_eigenvalues(symbol, k, step=1e-3, bound=None, tol=1e-7):
    """Locate rank drops of the pencil by a sigma_min grid scan plus refinement.

    Only real eigenvalues are visible to this scan.
    """
    n0 = time_slab(symbol)
    nk = contract(symbol, k)
    if bound is None:
        bound = np.linalg.norm(np.linalg.pinv(n0), 2) * np.linalg.norm(nk, 2) + 0.5
    lams = np.arange(-bound, bound + step, step)
    sig = kernels.sigma_min_scan(n0, nk, lams)
    scale = max(np.linalg.norm(n0, 2), np.linalg.norm(nk, 2))
    found = []
    for i in range(1, lams.size - 1):
        if sig[i] <= sig[i - 1] and sig[i] < sig[i + 1]:
            res = minimize_scalar(
                lambda x: sla.svdvals(nk - x * n0)[-1], bounds=(lams[i - 1], lams[i + 1]),
                method="bounded", options={"xatol": 1e-12})
            if res.fun < tol * scale:
                found.append(float(res.x))
    return found
