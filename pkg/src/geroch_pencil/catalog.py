"""Worked systems: Maxwell electrodynamics and the first order wave equation.

Both are built in coordinates (t, x, y, z) with constant lapse N, constant
shift beta and flat spatial metric, so

    g_00 = -N^2 + beta.beta,  g_0i = beta_i,  g_ij = delta_ij,
    n_a = (1, 0, 0, 0),  nt_a = -N n_a,  mt^a = (1, -beta) / N,
    eta^a_b = delta^a_b + mt^a nt_b,  eps^{0123} = -1/N.

Antisymmetric index pairs are flattened in the order 01, 02, 03, 12, 13, 23
and a field acting on E_ab through a full double sum X^{ab} E_ab is stored
as the coefficient X^{ab} - X^{ba} of the pair a < b.
"""

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidLapse, UnknownCatalogName
from .geroch import GerochBasis, project_M
from .reduction import make_pair
from .tensor_core import build_symbol

PAIRS = ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))
SPATIAL_PAIRS = ((1, 2), (1, 3), (2, 3))


@dataclass(frozen=True)
class CatalogEntry:
    symbol: object
    named_geroch: object = None
    named_pair: object = None
    expected: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)
    layout: dict = field(default_factory=dict)


def _levi_civita():
    eps = np.zeros((4, 4, 4, 4))
    for p in itertools.permutations(range(4)):
        inversions = sum(1 for i in range(4) for j in range(i + 1, 4) if p[i] > p[j])
        eps[p] = -1.0 if inversions % 2 else 1.0
    return eps


def _frame(lapse, shift):
    if not np.isfinite(lapse) or lapse <= 0:
        raise InvalidLapse(f"lapse must be positive, got {lapse}")
    beta = np.asarray(shift, dtype=float).ravel()
    if beta.shape != (3,) or not np.all(np.isfinite(beta)):
        raise ValueError("shift must be a finite 3-vector")
    g = np.zeros((4, 4))
    g[0, 0] = -lapse ** 2 + beta @ beta
    g[0, 1:] = g[1:, 0] = beta
    g[1:, 1:] = np.eye(3)
    nt = np.array([-lapse, 0.0, 0.0, 0.0])
    mt = np.concatenate([[1.0], -beta]) / lapse
    eta = np.eye(4) + np.outer(mt, nt)
    eps_up = -_levi_civita() / lapse
    return dict(N=float(lapse), beta=beta, g=g, ginv=np.linalg.inv(g), nt=nt, mt=mt, eta=eta, eps=eps_up)


def _flat_pairs(X):
    return np.stack([X[..., a, b] - X[..., b, a] for a, b in PAIRS], axis=-1)


def _antisym3(T):
    out = np.zeros_like(T)
    for p in itertools.permutations(range(3)):
        inversions = sum(1 for i in range(3) for j in range(i + 1, 3) if p[i] > p[j])
        out += (-1.0 if inversions % 2 else 1.0) * T.transpose(p)
    return out / 6.0


def _k_dot(shift, k):
    return float(np.dot(shift, k))


def maxwell(lapse=1.0, shift=(0.0, 0.0, 0.0)):
    """Maxwell's equations for (E^i, B^i): 8 equations, 6 unknowns."""
    f = _frame(lapse, shift)
    N, g, mt, nt, eps = f["N"], f["g"], f["mt"], f["nt"], f["eps"]
    E_up = np.zeros((4, 6))
    E_up[1:, 0:3] = np.eye(3)
    B_up = np.zeros((4, 6))
    B_up[1:, 3:6] = np.eye(3)
    B_lo = g @ B_up
    F = (np.einsum("c,qb->cqb", mt, E_up) - np.einsum("q,cb->cqb", mt, E_up)
         + np.einsum("cqde,d,eb->cqb", eps, nt, B_lo))
    F_lo = np.einsum("cx,qy,xyb->cqb", g, g, F)
    F_dual = 0.5 * np.einsum("cqad,cqb->adb", eps, F_lo)
    coeffs = np.zeros((4, 8, 6))
    coeffs[:, 0:4, :] = F        # Q1^d = d_a F^{ad}
    coeffs[:, 4:8, :] = F_dual   # Q2^d = d_a *F^{ad}
    symbol = build_symbol(3, 8, 6, coeffs, name="maxwell")

    C = np.zeros((2, 4, 8))
    C[0, :, 0:4] = -N * np.eye(4)
    C[1, :, 4:8] = N * np.eye(4)
    h = np.zeros((6, 8))
    h[0:3, 0:4] = N * f["eta"][1:, :]
    h[3:6, 4:8] = -N * f["eta"][1:, :]
    basis = GerochBasis(C=C, M=np.zeros((0, 4, 8)))
    pair = make_pair(h, symbol, basis)
    basis = project_M(basis, pair, symbol)
    beta = f["beta"]

    def lambdas(k):
        k = np.asarray(k, float)
        nk, bk = N * np.linalg.norm(k), _k_dot(beta, k)
        return sorted([nk - bk] * 2 + [-nk - bk] * 2)

    expected = {
        "dims": (4, 2, 0), "c": 2, "m": 0, "geroch_dim": 2, "family_dim": 12,
        "lambdas": lambdas,
        "pi": lambda k: [-_k_dot(beta, k)] * 2,
        "l_blocks": {1: 2}, "zero_rows": 0,
        "sub_l_blocks": {}, "sub_zero_rows": 0,
    }
    layout = {"unknowns": ["E^1", "E^2", "E^3", "B^1", "B^2", "B^3"],
              "equations": [f"Q1^{d}" for d in range(4)] + [f"Q2^{d}" for d in range(4)]}
    return CatalogEntry(symbol=symbol, named_geroch=basis, named_pair=pair, expected=expected,
                        params={"lapse": float(lapse), "shift": [float(x) for x in beta]}, layout=layout)


def wave(lapse=1.0, shift=(0.0, 0.0, 0.0)):
    """First order wave equation for (u0, phi, u_i): 11 equations, 5 unknowns."""
    f = _frame(lapse, shift)
    N, ginv, mt, nt, eta, eps = f["N"], f["ginv"], f["mt"], f["nt"], f["eta"], f["eps"]
    beta = f["beta"]
    # u_b in terms of the unknowns: u_b = ut_b - nt_b u0 with ut_0 = beta.ut
    U = np.zeros((4, 5))
    U[0, 0] = N
    U[0, 2:] = beta
    U[1:, 2:] = np.eye(3)
    coeffs = np.zeros((4, 11, 5))
    coeffs[:, 0, :] = ginv @ U                      # E = g^{ab} d_a u_b
    for b in range(4):
        coeffs[b, 1 + b, 1] = 1.0                   # E_b = d_b phi - u_b
    for p, (a, b) in enumerate(PAIRS):              # E_ab = d_[a u_b]
        coeffs[a, 5 + p, :] += 0.5 * U[b]
        coeffs[b, 5 + p, :] -= 0.5 * U[a]
    symbol = build_symbol(3, 11, 5, coeffs, name="wave")

    C, M = [], []
    for r in (1, 2, 3):
        X = np.zeros((4, 11))
        X[:, 1:5] = N * (np.outer(mt, eta[:, r]) - np.outer(eta[:, r], mt))
        C.append(X)
    for gg, hh in SPATIAL_PAIRS:
        T = 3.0 * N * _antisym3(np.einsum("z,a,b->zab", mt, eta[:, gg], eta[:, hh]))
        X = np.zeros((4, 11))
        X[:, 5:] = _flat_pairs(T)
        C.append(X)
    for s, r in SPATIAL_PAIRS:
        X = np.zeros((4, 11))
        X[:, 1:5] = 0.5 * (np.outer(eta[:, s], eta[:, r]) - np.outer(eta[:, r], eta[:, s]))
        M.append(X)
    X = np.zeros((4, 11))
    X[:, 5:] = _flat_pairs(np.einsum("d,dzab->zab", nt, eps))
    M.append(X)
    h = np.zeros((5, 11))
    h[0, 0] = -N
    h[1, 1:5] = N * mt
    for i, q in enumerate((1, 2, 3)):
        h[2 + i, 5:] = _flat_pairs(-N * (np.outer(eta[:, q], mt) - np.outer(mt, eta[:, q])))
    basis = GerochBasis(C=np.array(C), M=np.array(M))
    pair = make_pair(h, symbol, basis)
    basis = project_M(basis, pair, symbol)

    def lambdas(k):
        k = np.asarray(k, float)
        nk, bk = N * np.linalg.norm(k), _k_dot(beta, k)
        return sorted([nk - bk, -nk - bk])

    expected = {
        "dims": (2, 3, 3), "c": 6, "m": 4, "geroch_dim": 10, "family_dim": 30,
        "lambdas": lambdas,
        "pi": lambda k: [-_k_dot(beta, k)] * 3,
        "l_blocks": {1: 3}, "zero_rows": 3,
        "sub_l_blocks": {1: 3}, "sub_zero_rows": 1,
    }
    layout = {"unknowns": ["u0", "phi", "u_1", "u_2", "u_3"],
              "equations": ["E"] + [f"E_{b}" for b in range(4)] + [f"E_{a}{b}" for a, b in PAIRS],
              "M_fields": ["eta_[1 eta_2]", "eta_[1 eta_3]", "eta_[2 eta_3]", "nt eps"]}
    return CatalogEntry(symbol=symbol, named_geroch=basis, named_pair=pair, expected=expected,
                        params={"lapse": float(lapse), "shift": [float(x) for x in beta]}, layout=layout)


def toy_weak():
    """Two unknowns in one space dimension with A(k) = k J_2(1): weakly hyperbolic."""
    coeffs = np.zeros((2, 2, 2))
    coeffs[0] = np.eye(2)
    coeffs[1] = np.array([[1.0, 1.0], [0.0, 1.0]])
    symbol = build_symbol(1, 2, 2, coeffs, name="toy_weak")
    expected = {"dims": (2, 0, 0), "c": 0, "m": 0, "lambdas": lambda k: [float(k[0])] * 2}
    return CatalogEntry(symbol=symbol, expected=expected, params={},
                        layout={"unknowns": ["v1", "v2"], "equations": ["E1", "E2"]})


CATALOG_NAMES = ("maxwell", "wave", "toy_weak")


def get_entry(name, lapse=1.0, shift=(0.0, 0.0, 0.0)):
    if name == "maxwell":
        return maxwell(lapse, shift)
    if name == "wave":
        return wave(lapse, shift)
    if name == "toy_weak":
        return toy_weak()
    raise UnknownCatalogName(f"unknown catalog name {name!r}; choose from {', '.join(CATALOG_NAMES)}")
