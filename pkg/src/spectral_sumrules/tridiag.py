"""Symmetric tridiagonal eigensolver (implicit QL, Wilkinson-type shifts).

Only the first row of the eigenvector matrix is accumulated, which is all
Golub-Welsch needs: the squared first components are the weights of the
spectral measure at ``e_1``.  Cost is O(n^2) instead of O(n^3).
"""

from __future__ import annotations

import math

import numba
import numpy as np

_MAX_SWEEPS = 60


@numba.njit(cache=True)
def _ql_implicit(d, e, z, want_vectors):
    # d: diagonal (overwritten by eigenvalues); e: off-diagonal padded to len n
    # z: first row of the eigenvector matrix (updated in place)
    n = d.shape[0]
    eps = np.finfo(np.float64).eps
    for l in range(n):
        it = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= eps * dd:
                    break
                m += 1
            if m == l:
                break
            it += 1
            if it > _MAX_SWEEPS:
                return -1 - l
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + math.copysign(r, g))
            s = 1.0
            c = 1.0
            p = 0.0
            underflow = False
            i = m - 1
            while i >= l:
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    underflow = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                if want_vectors:
                    f = z[i + 1]
                    z[i + 1] = s * z[i] + c * f
                    z[i] = c * z[i] - s * f
                i -= 1
            if underflow:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
    return 0


def _prepare(diag, offdiag):
    d = np.array(diag, dtype=np.float64, copy=True)
    n = d.shape[0]
    if n == 0:
        raise ValueError("empty matrix")
    off = np.asarray(offdiag, dtype=np.float64)
    if off.shape[0] != n - 1:
        raise ValueError(f"off-diagonal must have length {n - 1}, got {off.shape[0]}")
    e = np.zeros(n)
    e[: n - 1] = off
    return d, e


def tridiagonal_eigh(diag, offdiag, *, weights: bool = True):
    """Eigenvalues (ascending) and squared first eigenvector components.

    Parameters
    ----------
    diag : array_like, shape (n,)
    offdiag : array_like, shape (n-1,)
    weights : bool
        When False the rotations are not accumulated and the second output
        is ``None``.
    """
    d, e = _prepare(diag, offdiag)
    z = np.zeros_like(d)
    z[0] = 1.0
    status = _ql_implicit(d, e, z, weights)
    if status != 0:
        raise np.linalg.LinAlgError(
            f"QL iteration did not converge for eigenvalue {-status - 1}"
        )
    order = np.argsort(d, kind="stable")
    if not weights:
        return d[order], None
    return d[order], (z * z)[order]


def tridiagonal_eigvals(diag, offdiag) -> np.ndarray:
    return tridiagonal_eigh(diag, offdiag, weights=False)[0]


def tridiagonal_logdet_shifted(diag, offdiag, shift: float) -> tuple[float, float]:
    """``(sign, log|det(shift*I - T)|)`` by the continuant recurrence.

    Runs in O(n) with per-step rescaling, so it never forms eigenvalues.
    """
    b = np.asarray(diag, dtype=float)
    a = np.asarray(offdiag, dtype=float)
    n = b.shape[0]
    # ratio form: r_k = D_k / D_{k-1}; D_k = (shift - b_k) D_{k-1} - a_{k-1}^2 D_{k-2}
    logabs = 0.0
    sign = 1.0
    prev_ratio = None
    for k in range(n):
        r = shift - b[k]
        if k > 0:
            r -= a[k - 1] ** 2 / prev_ratio
        if r == 0.0:
            return 0.0, -math.inf
        sign *= math.copysign(1.0, r)
        logabs += math.log(abs(r))
        prev_ratio = r
    return sign, logabs
