"""Principal symbol of the constraint evolution (subsidiary) system.

B(k) = C^i h_delta k_i + N_free M_proj^i k_i, with N_free a c x m matrix.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import ConditionVFailure, DimensionMismatch, SingularVelocityAssignment
from .geroch import check_condition_v
from .pencil import (
    EIG_TOL,
    IMAG_TOL,
    Sampling,
    _parallel_map,
    cluster_values,
    physical_clusters,
    reduced_structure,
    sample_sphere,
)
from .reduction import evolution_symbol
from .tensor_core import DEFAULT_TOL, contract, null_space_abs, orth


@dataclass(frozen=True)
class SubsidiarySymbol:
    B: np.ndarray = field(repr=False)
    N_free: np.ndarray = field(repr=False)
    pi_values: tuple = ()
    rho_values: tuple = ()


def _kb(geroch, pair, k):
    """C^i h_delta k_i (the N_free independent part of B)."""
    return geroch.Ck(k) @ pair.h_delta


def _scale(geroch, pair, k):
    return float(np.linalg.norm(geroch.Ck(k), 2) * np.linalg.norm(pair.h_delta, 2)) if geroch.c else 0.0


def _mk(geroch, k):
    if geroch.m == 0:
        return np.zeros((0, geroch.c))
    return geroch.Mk(k)


def _check_nfree(geroch, N_free):
    if N_free is None:
        return np.zeros((geroch.c, geroch.m))
    N_free = np.asarray(N_free, dtype=float)
    if N_free.shape != (geroch.c, geroch.m):
        raise DimensionMismatch(f"N_free must be {geroch.c}x{geroch.m}, got {N_free.shape}")
    return N_free


def inherited_modes(symbol, geroch, pair, k, tol=DEFAULT_TOL):
    """Eigenvalues pi and vectors delta_psi_pi inherited from A(k).

    They live on the range of C^0 N k, which C^i h_delta k_i maps into itself.
    """
    cnk = geroch.C0 @ contract(symbol, k)
    Q = orth(cnk, tol)
    if Q.shape[1] == 0:
        return np.zeros(0), np.zeros((geroch.c, 0))
    K = Q.T @ _kb(geroch, pair, k) @ Q
    w, V = np.linalg.eig(K)
    order = np.lexsort((w.imag, w.real))
    w, V = w[order], V[:, order]
    if np.all(np.abs(w.imag) <= IMAG_TOL * max(1.0, np.abs(w).max())):
        w = w.real
        V = V.real if np.all(np.abs(V.imag) < 1e-12) else V
    return w, Q @ V


def subsidiary_symbol(geroch, pair, N_free, k, pi_values=(), rho_values=()):
    N_free = _check_nfree(geroch, N_free)
    B = _kb(geroch, pair, k)
    if geroch.m:
        B = B + N_free @ _mk(geroch, k)
    return SubsidiarySymbol(B=B, N_free=N_free, pi_values=tuple(pi_values), rho_values=tuple(rho_values))


def verify_intertwining(symbol, pair, geroch, N_free, k, lambdas):
    """max over lambdas of |(C^0 N k)(-lam + A) - (-lam + B)(C^0 N k)|, relative."""
    A = evolution_symbol(pair, symbol, k)
    B = subsidiary_symbol(geroch, pair, N_free, k).B
    cnk = geroch.C0 @ contract(symbol, k)
    u, c = A.shape[0], B.shape[0]
    worst = 0.0
    for lam in np.atleast_1d(lambdas):
        lhs = cnk @ (-lam * np.eye(u) + A)
        rhs = (-lam * np.eye(c) + B) @ cnk
        scale = np.linalg.norm(cnk) * (abs(lam) + np.linalg.norm(A)) + (abs(lam) + np.linalg.norm(B)) * np.linalg.norm(cnk)
        if scale == 0.0:
            continue
        worst = max(worst, float(np.linalg.norm(lhs - rhs) / scale))
    return worst


def subsidiary_kronecker(symbol, geroch, pair, N_free, k, tol=DEFAULT_TOL, extend=False):
    """Structure of [-lam I + C^i h_delta k_i; M_proj^i k_i].

    Adding N_free M k to the top block is a row operation, so the result
    does not depend on N_free.  When condition v fails the deficiency rows
    X are appended (the extended symbol with N2 = 0); that structure is
    attached to the raised ConditionVFailure, or returned with a warning
    when ``extend`` is true.
    """
    _check_nfree(geroch, N_free)
    K = _kb(geroch, pair, k)
    Mk = _mk(geroch, k)
    cv = check_condition_v(geroch, symbol, k, tol)
    if not cv.ok:
        Xrows = cv.deficiency.T
        ext, _ = reduced_structure(K, np.vstack([Mk, Xrows]), tol, scale=_scale(geroch, pair, k))
        if extend:
            warnings.warn("condition v fails; classifying the extended pencil with N2 = 0. "
                          "A nonzero N2 makes the hyperbolization purely pseudo-differential.", stacklevel=2)
            return ext
        raise ConditionVFailure(f"contracted M fields span rank {cv.rank_Mk} < s = {cv.s}",
                                deficiency=cv.deficiency, extended=ext)
    struct, _ = reduced_structure(K, Mk, tol, scale=_scale(geroch, pair, k))
    return struct


def default_velocity_policy(pi_values, lambdas, s):
    """rho_j = (1 + max|pi u lam|)(1 + j/s), j = 1..s."""
    vals = [abs(complex(v)) for v in list(pi_values) + list(lambdas)]
    base = 1.0 + max(vals, default=0.0)
    return np.array([base * (1.0 + j / s) for j in range(1, s + 1)]) if s else np.zeros(0)


def assign_constraint_velocities(symbol, geroch, pair, k, rho_targets=None, tol=DEFAULT_TOL, policy=None):
    """Solve for N_free so that B(k) has eigenvalues {pi} u {rho}."""
    cv = check_condition_v(geroch, symbol, k, tol)
    if not cv.ok:
        raise ConditionVFailure(f"condition v fails at k (rank {cv.rank_Mk} < s = {cv.s})",
                                deficiency=cv.deficiency)
    pi, _ = inherited_modes(symbol, geroch, pair, k, tol)
    s = cv.s
    if rho_targets is None:
        A = evolution_symbol(pair, symbol, k)
        a_scale = float(np.linalg.norm(pair.h, 2) * np.linalg.norm(contract(symbol, k), 2))
        lams = [r[0] for r in physical_clusters(A, geroch.C0 @ contract(symbol, k), scale=a_scale)]
        rho_targets = (policy or default_velocity_policy)(pi, lams, s)
    rho = np.asarray(rho_targets, dtype=float).ravel()
    if rho.size != s:
        raise SingularVelocityAssignment(f"need {s} velocity targets, got {rho.size}")
    scale = max(1.0, np.abs(rho).max(initial=0.0), np.abs(pi).max(initial=0.0))
    if len(cluster_values(rho, EIG_TOL)) != rho.size:
        raise SingularVelocityAssignment("velocity targets are not distinct")
    for r_ in rho:
        if np.any(np.abs(np.asarray(pi) - r_) <= EIG_TOL * scale):
            raise SingularVelocityAssignment(f"target {r_} collides with an inherited eigenvalue")
    if s == 0:
        sub = subsidiary_symbol(geroch, pair, None, k, pi, ())
        return sub
    Mk = _mk(geroch, k)
    # rows of Mk span the s-dimensional complement of ker(Mk)
    psi_rho = orth(Mk.T, tol)
    K = _kb(geroch, pair, k)
    lhs = Mk @ psi_rho
    rhs = psi_rho * rho[None, :] - K @ psi_rho
    N_free = rhs @ np.linalg.pinv(lhs)
    return subsidiary_symbol(geroch, pair, N_free, k, pi, rho)


@dataclass
class SubsidiarySweepReport:
    samples: list
    count: int
    seed: int
    cond_threshold: float
    max_cond: float
    real: bool
    diagonalizable: bool
    ss_sh: bool
    mode: str


def jordan_defect(B, tol=1e-6, scale=0.0):
    """Sum over eigenvalues of algebraic minus geometric multiplicity."""
    c = B.shape[0]
    if c == 0:
        return 0
    w = np.linalg.eigvals(B)
    atol = tol * max(scale, np.linalg.norm(B, 2), 1e-300)
    defect = 0
    for g in cluster_values(w, tol):
        lam = w[g].mean()
        geo = null_space_abs(B - lam * np.eye(c), atol).shape[1]
        defect += max(len(g) - geo, 0)
    return defect


def _b_diagnostics(B, scale=0.0):
    c = B.shape[0]
    if c == 0:
        return {"eigenvalues": [], "cond": 1.0, "max_imag": 0.0, "defect": 0}
    w, V = np.linalg.eig(B)
    with np.errstate(all="ignore"):
        cn = np.linalg.cond(V)
    order = np.lexsort((w.imag, w.real))
    return {"eigenvalues": list(w[order]), "cond": float(cn) if np.isfinite(cn) else float("inf"),
            "max_imag": float(np.abs(w.imag).max()), "defect": jordan_defect(B, scale=scale)}


def subsidiary_sh_sweep(symbol, geroch, pair, velocity_policy=None, sampling=None, constant_N=None,
                        cond_threshold=1e8, tol=DEFAULT_TOL, jobs=1):
    """Per-sample diagonalizability of B(k).

    With ``constant_N`` the given N_free is used at every sample; otherwise
    N_free is solved per k from ``velocity_policy`` (default policy if None).
    """
    sampling = sampling or Sampling()
    ks = sample_sphere(symbol.n_space, sampling.count, sampling.seed)
    mode = "constant" if constant_N is not None else "per_k"

    def one(k):
        rec = {"k": k, "error": None, "N_free": None}
        try:
            if constant_N is not None:
                sub = subsidiary_symbol(geroch, pair, constant_N, k)
                pi, _ = inherited_modes(symbol, geroch, pair, k, tol)
                sub = SubsidiarySymbol(B=sub.B, N_free=sub.N_free, pi_values=tuple(pi))
            else:
                sub = assign_constraint_velocities(symbol, geroch, pair, k, tol=tol, policy=velocity_policy)
            rec["N_free"] = sub.N_free
            rec["pi"] = list(sub.pi_values)
            rec["rho"] = list(sub.rho_values)
            rec.update(_b_diagnostics(sub.B, _scale(geroch, pair, k)))
        except (ConditionVFailure, SingularVelocityAssignment) as exc:
            rec["error"] = f"{type(exc).__name__}: {exc}"
            rec.update({"eigenvalues": [], "cond": float("inf"), "max_imag": 0.0, "defect": -1, "pi": [], "rho": []})
        rec["real"] = rec["max_imag"] <= IMAG_TOL * max(1.0, max((abs(x) for x in rec["eigenvalues"]), default=0.0))
        rec["diagonalizable"] = rec["error"] is None and rec["defect"] == 0 and rec["cond"] < cond_threshold
        return rec

    recs = _parallel_map(one, list(ks), jobs)
    max_cond = max((r["cond"] for r in recs), default=1.0)
    real = all(r["real"] for r in recs)
    diag = all(r["diagonalizable"] for r in recs)
    return SubsidiarySweepReport(samples=recs, count=sampling.count, seed=sampling.seed,
                                 cond_threshold=cond_threshold, max_cond=float(max_cond), real=real,
                                 diagonalizable=diag, ss_sh=real and diag, mode=mode)


def constraint_of_constraints_check(symbol, geroch, k):
    """|(M_proj k)(C^0 N k)| relative to the operand norms."""
    if geroch.m == 0 or geroch.c == 0:
        return 0.0
    Mk = geroch.Mk(k)
    cnk = geroch.C0 @ contract(symbol, k)
    scale = np.linalg.norm(Mk) * np.linalg.norm(cnk)
    return float(np.linalg.norm(Mk @ cnk) / scale) if scale else 0.0
