"""Inner loops shared by the sweeps, with numba and pure numpy variants.

The numba path is used when numba imports cleanly and the environment
variable ``GEROCH_PENCIL_DISABLE_NUMBA`` is unset or ``0``.  Both variants
are always importable so they can be compared directly.
"""

import os

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None


def _flag_disabled():
    return os.environ.get("GEROCH_PENCIL_DISABLE_NUMBA", "0").strip().lower() not in ("", "0", "false", "no")


USE_NUMBA = numba is not None and not _flag_disabled()


# -- numpy variants ---------------------------------------------------------

def contract_many_numpy(coeffs, covectors):
    """Stack of contractions sum_a w_a N^a, one per row of ``covectors``."""
    return np.einsum("ka,aAb->kAb", covectors, coeffs)


def geroch_operator_numpy(coeffs):
    """Matrix of X -> {X^a N^b + X^b N^a}_(a<=b, alpha), X flattened as [a][A]."""
    n1, e, u = coeffs.shape
    ia, ib = np.triu_indices(n1)
    npairs = ia.size
    op = np.zeros((npairs, u, n1, e))
    rows = np.arange(npairs)
    # X^a_A N^{Ab}_alpha lands in column block a; the mirrored term in block b.
    op[rows, :, ia, :] += coeffs[ib].transpose(0, 2, 1)
    op[rows, :, ib, :] += coeffs[ia].transpose(0, 2, 1)
    return op.reshape(npairs * u, n1 * e)


def sigma_min_scan_numpy(n0, nk, lams):
    """Smallest singular value of nk - lam*n0 for each lam."""
    stack = nk[None, :, :] - lams[:, None, None] * n0[None, :, :]
    return np.linalg.svd(stack, compute_uv=False)[:, -1]


# -- numba variants ---------------------------------------------------------

def _contract_many_loop(coeffs, covectors):
    nk = covectors.shape[0]
    n1, e, u = coeffs.shape
    out = np.zeros((nk, e, u))
    for s in range(nk):
        for a in range(n1):
            w = covectors[s, a]
            if w == 0.0:
                continue
            for A in range(e):
                for b in range(u):
                    out[s, A, b] += w * coeffs[a, A, b]
    return out


def _geroch_operator_loop(coeffs):
    n1, e, u = coeffs.shape
    npairs = n1 * (n1 + 1) // 2
    op = np.zeros((npairs * u, n1 * e))
    p = 0
    for a in range(n1):
        for b in range(a, n1):
            for al in range(u):
                r = p * u + al
                for A in range(e):
                    op[r, a * e + A] += coeffs[b, A, al]
                    op[r, b * e + A] += coeffs[a, A, al]
            p += 1
    return op


def _sigma_min_scan_loop(n0, nk, lams):
    out = np.empty(lams.shape[0])
    for i in range(lams.shape[0]):
        s = np.linalg.svd(nk - lams[i] * n0)[1]
        out[i] = s[s.shape[0] - 1]
    return out


if numba is not None:
    contract_many_numba = numba.njit(cache=True)(_contract_many_loop)
    geroch_operator_numba = numba.njit(cache=True)(_geroch_operator_loop)
    sigma_min_scan_numba = numba.njit(cache=True)(_sigma_min_scan_loop)
else:  # pragma: no cover
    contract_many_numba = _contract_many_loop
    geroch_operator_numba = _geroch_operator_loop
    sigma_min_scan_numba = _sigma_min_scan_loop


def _f64(x):
    return np.ascontiguousarray(x, dtype=np.float64)


def contract_many(coeffs, covectors):
    if USE_NUMBA:
        return contract_many_numba(_f64(coeffs), _f64(covectors))
    return contract_many_numpy(coeffs, covectors)


def geroch_operator(coeffs):
    if USE_NUMBA:
        return geroch_operator_numba(_f64(coeffs))
    return geroch_operator_numpy(coeffs)


def sigma_min_scan(n0, nk, lams):
    if USE_NUMBA:
        return sigma_min_scan_numba(_f64(n0), _f64(nk), _f64(lams))
    return sigma_min_scan_numpy(n0, nk, lams)
