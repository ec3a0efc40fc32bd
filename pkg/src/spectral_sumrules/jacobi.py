"""Jacobi coefficients and their reparametrizations.

Conventions: ``b = (b_1, ..., b_n)``, ``a = (a_1, ..., a_{n-1})``; a z-chain
holds ``z_1, z_2, ...`` with ``z_0 = 0`` implicit; a Verblunsky sequence holds
``alpha_0, alpha_1, ...`` with ``alpha_{-1} = -1`` implicit.  A Verblunsky
sequence of length ``2n - 1`` determines an ``n x n`` Jacobi matrix; an
extra ``alpha_{2n-1}`` would only set ``a_n`` and is ignored.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .measures import (
    DiscreteMeasure,
    LawKind,
    MeasureS1,
    ReferenceLaw,
    UnsupportedOperation,
    kesten_mckay,
    measure_from_parts,
)
from .tridiag import tridiagonal_eigh

ALPHA_EDGE_TOL = 1e-14


class RankDeficiencyError(ValueError):
    def __init__(self, step: int, message: str):
        super().__init__(message)
        self.step = step


class HalfLineError(ValueError):
    """Coefficients admit no nonnegative z-chain: the measure is not on [0, inf)."""


class DegenerateVerblunskyError(ValueError):
    pass


class OutOfClassError(ValueError):
    def __init__(self, index: int, message: str):
        super().__init__(message)
        self.index = index


@dataclass(frozen=True)
class JacobiCoefficients:
    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        a = np.atleast_1d(np.asarray(self.a, dtype=float))
        b = np.atleast_1d(np.asarray(self.b, dtype=float))
        if b.ndim != 1 or b.size == 0:
            raise ValueError("b must be a nonempty vector")
        if a.size != b.size - 1:
            raise ValueError(f"a must have length n-1 = {b.size - 1}, got {a.size}")
        if np.any(a < 0) or not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
            raise ValueError("a must be nonnegative and all entries finite")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def n(self) -> int:
        return int(self.b.size)

    @property
    def degenerate(self) -> bool:
        return bool(np.any(self.a == 0))

    def truncate(self, n: int) -> JacobiCoefficients:
        return JacobiCoefficients(self.a[: n - 1], self.b[:n])

    def matrix(self) -> np.ndarray:
        return np.diag(self.b) + np.diag(self.a, 1) + np.diag(self.a, -1)

    def to_json(self) -> dict:
        return {"a": self.a.tolist(), "b": self.b.tolist()}

    @classmethod
    def from_json(cls, doc: dict) -> JacobiCoefficients:
        return cls(np.asarray(doc["a"], float), np.asarray(doc["b"], float))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["k", "a_k", "b_k"])
        for k in range(self.n):
            w.writerow([k + 1, repr(float(self.a[k])) if k < self.n - 1 else "", repr(float(self.b[k]))])
        return buf.getvalue()


@dataclass(frozen=True)
class ZChain:
    z: np.ndarray

    def __post_init__(self):
        z = np.atleast_1d(np.asarray(self.z, dtype=float))
        if np.any(z < 0):
            raise ValueError("z-chain entries must be nonnegative")
        object.__setattr__(self, "z", z)

    @property
    def odd(self) -> np.ndarray:
        """``z_1, z_3, ...``"""
        return self.z[0::2]

    @property
    def even(self) -> np.ndarray:
        """``z_2, z_4, ...``"""
        return self.z[1::2]


@dataclass(frozen=True)
class VerblunskySeq:
    alpha: np.ndarray

    def __post_init__(self):
        alpha = np.atleast_1d(np.asarray(self.alpha, dtype=float))
        if np.any(np.abs(alpha) > 1):
            raise ValueError("Verblunsky coefficients must lie in [-1, 1]")
        object.__setattr__(self, "alpha", alpha)


@dataclass(frozen=True)
class CanonicalMoments:
    p: np.ndarray

    def __post_init__(self):
        p = np.atleast_1d(np.asarray(self.p, dtype=float))
        if np.any((p < 0) | (p > 1)):
            raise ValueError("canonical moments must lie in [0, 1]")
        object.__setattr__(self, "p", p)


# --------------------------------------------------------------------------
# measure <-> coefficients


def coeffs_from_measure(mu: DiscreteMeasure, depth: int) -> JacobiCoefficients:
    """First ``depth`` recursion coefficients by Lanczos with full reorthogonalization."""
    if depth < 1:
        raise ValueError("depth must be >= 1")
    x = mu.nodes
    w = mu.weights
    support = int(np.count_nonzero(w > 0))
    if support < depth:
        raise RankDeficiencyError(
            support,
            f"measure has {support} support points, cannot produce depth {depth}: "
            f"Lanczos breaks down at step {support}",
        )
    q = np.sqrt(w / w.sum())
    basis = np.zeros((depth, x.size))
    basis[0] = q
    b = np.zeros(depth)
    a = np.zeros(depth - 1)
    b[0] = q @ (x * q)
    scale = max(np.max(np.abs(x)), 1.0)
    for k in range(1, depth):
        v = x * basis[k - 1] - b[k - 1] * basis[k - 1]
        if k >= 2:
            v -= a[k - 2] * basis[k - 2]
        for _ in range(2):
            v -= basis[:k].T @ (basis[:k] @ v)
        norm = float(np.linalg.norm(v))
        if norm <= 1e-13 * scale:
            raise RankDeficiencyError(k, f"Lanczos breakdown at step {k}: residual norm {norm:.3e}")
        a[k - 1] = norm
        basis[k] = v / norm
        b[k] = basis[k] @ (x * basis[k])
    return JacobiCoefficients(a, b)


def spectral_from_coeffs(j: JacobiCoefficients) -> DiscreteMeasure:
    """Golub-Welsch: eigenvalues and squared first eigenvector components."""
    nodes, weights = tridiagonal_eigh(j.b, j.a)
    return DiscreteMeasure(nodes, weights)


def orthonormal_polynomials(j: JacobiCoefficients, x) -> np.ndarray:
    """Values ``p_0(x), ..., p_{n-1}(x)`` from the three-term recursion."""
    x = np.asarray(x, dtype=float)
    out = np.zeros((j.n,) + x.shape)
    out[0] = 1.0
    if j.n > 1:
        out[1] = (x - j.b[0]) / j.a[0]
    for k in range(1, j.n - 1):
        out[k + 1] = ((x - j.b[k]) * out[k] - j.a[k - 1] * out[k - 1]) / j.a[k]
    return out


# --------------------------------------------------------------------------
# z-chains (measures on [0, inf))


def z_decompose(j: JacobiCoefficients) -> ZChain:
    n = j.n
    z = np.zeros(2 * n - 1)
    prev_even = 0.0
    for k in range(n):
        odd = j.b[k] - prev_even
        if odd < 0:
            raise HalfLineError(f"z_{2 * k + 1} = {odd:.3e} < 0: not supported on [0, inf)")
        z[2 * k] = odd
        if k < n - 1:
            if odd <= 0:
                raise HalfLineError(f"z_{2 * k + 1} = 0 with a_{k + 1} > 0: not supported on [0, inf)")
            prev_even = j.a[k] ** 2 / odd
            z[2 * k + 1] = prev_even
    return ZChain(z)


def z_compose(chain: ZChain) -> JacobiCoefficients:
    z = chain.z
    if z.size % 2 == 0:
        raise ValueError("z-chain must have odd length 2n-1")
    n = (z.size + 1) // 2
    zz = np.concatenate([[0.0], z])
    b = zz[0 : 2 * n - 1 : 2] + zz[1 : 2 * n : 2]
    a = np.sqrt(zz[1 : 2 * n - 2 : 2] * zz[2 : 2 * n - 1 : 2])
    return JacobiCoefficients(a, b)


def mp_zchain(tau: float, n: int) -> ZChain:
    z = np.empty(2 * n - 1)
    z[0::2] = 1.0
    z[1::2] = tau
    return ZChain(z)


# --------------------------------------------------------------------------
# Verblunsky coefficients (measures on [-2, 2] and [0, 1])


def geronimus_forward(v: VerblunskySeq) -> JacobiCoefficients:
    alpha = v.alpha
    if np.any(np.abs(alpha) >= 1):
        k = int(np.argmax(np.abs(alpha) >= 1))
        raise DegenerateVerblunskyError(f"|alpha_{k}| = {abs(alpha[k])} >= 1: finitely supported measure")
    n = (alpha.size + 1) // 2
    ext = np.concatenate([[0.0, -1.0], alpha])  # ext[i + 2] = alpha_i

    def al(i):
        return ext[i + 2]

    b = np.empty(n)
    a = np.empty(n - 1)
    for k in range(n):
        b[k] = (1 - al(2 * k - 1)) * al(2 * k) - (1 + al(2 * k - 1)) * al(2 * k - 2)
        if k < n - 1:
            a[k] = math.sqrt((1 - al(2 * k - 1)) * (1 - al(2 * k) ** 2) * (1 + al(2 * k + 1)))
    return JacobiCoefficients(a, b)


def geronimus_inverse(j: JacobiCoefficients) -> VerblunskySeq:
    n = j.n
    alpha = np.zeros(2 * n - 1)

    def check(i, value):
        if not abs(value) < 1 - ALPHA_EDGE_TOL:
            raise OutOfClassError(i, f"recovered alpha_{i} = {value:.6g} is not in (-1, 1)")
        alpha[i] = value

    check(0, j.b[0] / 2)
    prev_odd = -1.0  # alpha_{2k-1}
    for k in range(n - 1):
        even = alpha[2 * k]
        odd = j.a[k] ** 2 / ((1 - prev_odd) * (1 - even**2)) - 1
        check(2 * k + 1, odd)
        check(2 * k + 2, (j.b[k + 1] + (1 + odd) * even) / (1 - odd))
        prev_odd = odd
    return VerblunskySeq(alpha)


def szego_pushforward(j: JacobiCoefficients, direction: str) -> JacobiCoefficients:
    """Affine map ``x -> 1/2 - x/4`` (``to01``) between [-2, 2] and [0, 1], or its inverse."""
    if direction == "to01":
        return JacobiCoefficients(j.a / 4, (2 - j.b) / 4)
    if direction == "from01":
        return JacobiCoefficients(4 * j.a, 2 - 4 * j.b)
    raise ValueError(f"direction must be 'to01' or 'from01', got {direction!r}")


def canonical_from_verblunsky(v: VerblunskySeq) -> CanonicalMoments:
    return CanonicalMoments((v.alpha + 1) / 2)


def verblunsky_from_canonical(p: CanonicalMoments) -> VerblunskySeq:
    return VerblunskySeq(2 * p.p - 1)


def kmk_verblunsky(kappa1: float, kappa2: float, length: int) -> VerblunskySeq:
    c = 2.0 + kappa1 + kappa2
    alpha = np.empty(length)
    alpha[0::2] = (kappa1 - kappa2) / c
    alpha[1::2] = -(kappa1 + kappa2) / c
    return VerblunskySeq(alpha)


def verblunsky_from_coeffs01(j: JacobiCoefficients) -> VerblunskySeq:
    return geronimus_inverse(szego_pushforward(j, "from01"))


def coeffs01_from_verblunsky(v: VerblunskySeq) -> JacobiCoefficients:
    return szego_pushforward(geronimus_forward(v), "to01")


def killip_nenciu_logdets(v: VerblunskySeq) -> tuple[float, float]:
    """``log det(2I - T)`` and ``log det(2I + T)`` as Verblunsky products.

    ``T`` is the ``n x n`` matrix built from ``alpha_0..alpha_{2n-2}``.  The
    products run over those indices with the terminal ``alpha_{2n-1} = -1``
    of a finitely supported measure, which contributes the factor 2.
    """
    alpha = v.alpha
    if alpha.size % 2 == 0:
        alpha = alpha[:-1]
    signs = np.where(np.arange(alpha.size) % 2 == 0, 1.0, -1.0)
    minus = math.log(2.0) + float(np.sum(np.log1p(-alpha)))
    plus = math.log(2.0) + float(np.sum(np.log1p(signs * alpha)))
    return minus, plus


def killip_nenciu_determinants(v: VerblunskySeq) -> tuple[float, float]:
    minus, plus = killip_nenciu_logdets(v)
    return math.exp(minus), math.exp(plus)


# --------------------------------------------------------------------------
# closed forms


def _kmk_tail(kappa1: float, kappa2: float) -> tuple[float, float]:
    c = 2.0 + kappa1 + kappa2
    a = math.sqrt((1 + kappa1 + kappa2) * (1 + kappa1) * (1 + kappa2)) / c**2
    b = 0.5 * (1 - (kappa1**2 - kappa2**2) / c**2)
    return a, b


def _law_kappas(law: ReferenceLaw) -> tuple[float, float]:
    return (0.0, 0.0) if law.kind is LawKind.ARCSINE01 else law.params


def reference_coefficients(law: ReferenceLaw, depth: int) -> JacobiCoefficients:
    if depth < 1:
        raise ValueError("depth must be >= 1")
    kind = law.kind
    if kind is LawKind.SC:
        return JacobiCoefficients(np.ones(depth - 1), np.zeros(depth))
    if kind is LawKind.MP:
        (tau,) = law.params
        b = np.full(depth, 1 + tau)
        b[0] = 1.0
        return JacobiCoefficients(np.full(depth - 1, math.sqrt(tau)), b)
    if kind in (LawKind.KMK, LawKind.ARCSINE01):
        k1, k2 = _law_kappas(law)
        c = 2.0 + k1 + k2
        a_tail, b_tail = _kmk_tail(k1, k2)
        a = np.full(depth - 1, a_tail)
        b = np.full(depth, b_tail)
        if depth > 1:
            a[0] = math.sqrt((1 + k1) * (1 + k2)) / c**1.5
        b[0] = (1 + k2) / c
        return JacobiCoefficients(a, b)
    raise UnsupportedOperation(f"no closed-form coefficients for {law.name}")


def tail_coefficients(law: ReferenceLaw) -> tuple[float, float]:
    """``(A, B)`` with ``a_k -> A``, ``b_k -> B``; constant from ``k = 2`` on."""
    if law.kind is LawKind.SC:
        return 1.0, 0.0
    if law.kind is LawKind.MP:
        (tau,) = law.params
        return math.sqrt(tau), 1 + tau
    if law.kind in (LawKind.KMK, LawKind.ARCSINE01):
        return _kmk_tail(*_law_kappas(law))
    raise UnsupportedOperation(f"no constant tail for {law.name}")


def jcj_consistency_residual(kappa1: float, kappa2: float, depth: int = 20) -> float:
    """Largest gap between the closed-form KMK coefficients and the Geronimus image of the KMK Verblunsky values."""
    law_coeffs = reference_coefficients(kesten_mckay(kappa1, kappa2), depth)
    mapped = coeffs01_from_verblunsky(kmk_verblunsky(kappa1, kappa2, 2 * depth - 1))
    return float(max(np.max(np.abs(law_coeffs.a - mapped.a), initial=0.0), np.max(np.abs(law_coeffs.b - mapped.b))))


def gauss_rule(law: ReferenceLaw, n: int) -> DiscreteMeasure:
    """``n``-point Gauss rule of a classical law from its closed-form coefficients."""
    return spectral_from_coeffs(reference_coefficients(law, n))


# --------------------------------------------------------------------------
# eventually-constant Jacobi operators


def _free_m(zeta):
    # Stieltjes transform int dSC(x)/(x - zeta) on the physical sheet;
    # the product of principal roots picks the branch ~ zeta at infinity
    zeta = np.asarray(zeta, dtype=complex)
    return (-zeta + np.sqrt(zeta - 2) * np.sqrt(zeta + 2)) / 2


def _m_function(j: JacobiCoefficients, tail_a: float, tail_b: float, z):
    m = _free_m((np.asarray(z, dtype=complex) - tail_b) / tail_a) / tail_a
    couplings = np.concatenate([j.a, [tail_a]])
    for k in range(j.n - 1, -1, -1):
        m = 1.0 / (j.b[k] - z - couplings[k] ** 2 * m)
    return m


def measure_from_finite_perturbation(
    law: ReferenceLaw,
    j: JacobiCoefficients,
    *,
    truncation: int = 400,
) -> MeasureS1:
    """Spectral measure of ``j`` continued by the constant tail of ``law``.

    The operator has ``b_1..b_n``, ``a_1..a_{n-1}`` from ``j`` and
    ``a_k = A`` (k >= n), ``b_k = B`` (k > n).  Its m-function is a finite
    continued fraction ending in the scaled free m-function; the density is
    ``Im m(x + i0)/pi`` on the band and the outliers are the real poles,
    located from a large truncation and polished by Newton on ``1/m``.
    """
    A, B = tail_coefficients(law)
    band = (B - 2 * A, B + 2 * A)

    def dens(x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        inside = (x > band[0]) & (x < band[1])
        if np.any(inside):
            out[inside] = np.maximum(_m_function(j, A, B, x[inside] + 0j).imag / math.pi, 0.0)
        return out

    big = JacobiCoefficients(
        np.concatenate([j.a, np.full(truncation, A)]),
        np.concatenate([j.b, np.full(truncation, B)]),
    )
    guesses = tridiagonal_eigh(big.b, big.a, weights=False)[0]
    margin = 1e-9 * max(1.0, abs(B) + 2 * A)
    atoms = []
    for guess in guesses[(guesses < band[0] - margin) | (guesses > band[1] + margin)]:
        root = _newton_pole(j, A, B, float(guess), band)
        if root is None:
            continue
        lam, weight = root
        if weight > 0 and not any(abs(lam - l) < 1e-10 for l, _ in atoms):
            atoms.append((lam, weight))
    ac_mass = 1.0 - sum(g for _, g in atoms)
    spec = {
        "kind": "finite-perturbation",
        "params": {"law": law.kind.value, "law_params": list(law.params), "a": j.a.tolist(), "b": j.b.tolist()},
    }
    return measure_from_parts(band, dens, ac_mass, atoms, label=f"perturbed {law.name}", spec=spec)


def _newton_pole(j, A, B, x0, band, tol=1e-14, max_iter=60):
    h = 1e-30

    def inv_m_and_slope(x):
        val = 1.0 / _m_function(j, A, B, complex(x, h))
        return val.real, val.imag / h

    x = x0
    for _ in range(max_iter):
        f, df = inv_m_and_slope(x)
        if df == 0 or not math.isfinite(df):
            return None
        step = f / df
        x_new = x - step
        if band[0] <= x_new <= band[1]:
            x_new = 0.5 * (x + (band[0] if x < band[0] else band[1]))
        if abs(x_new - x) <= tol * max(1.0, abs(x)):
            x = x_new
            break
        x = x_new
    else:
        return None
    f, df = inv_m_and_slope(x)
    if abs(f) > 1e-9 * max(1.0, abs(df)):
        return None
    return x, -1.0 / df
