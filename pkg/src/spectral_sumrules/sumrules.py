"""Both sides of the Hermite, Laguerre and Jacobi sum rules.

Coefficient side: rate sums over Jacobi coefficients, z-chains or
Verblunsky coefficients.  Spectral side: reverse KL divergence plus outlier
costs.  Also the effective potential, the H-functional of a finite Jacobi
matrix and the gem-condition diagnostics.
"""

from __future__ import annotations

import csv
import functools
import io
import math
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import integrate, optimize

from .jacobi import (
    HalfLineError,
    JacobiCoefficients,
    OutOfClassError,
    VerblunskySeq,
    ZChain,
    coeffs_from_measure,
    geronimus_inverse,
    killip_nenciu_logdets,
    reference_coefficients,
    szego_pushforward,
    verblunsky_from_coeffs01,
    z_decompose,
)
from .measures import (
    DiscreteMeasure,
    Ensemble,
    InvalidMeasure,
    LawKind,
    MeasureS1,
    DEFAULT_PANELS,
    ReferenceLaw,
    kl_reverse_details,
    theta_quadrature,
)
from .tridiag import tridiagonal_logdet_shifted

EPS_TAIL = 1e-6
TAIL_WINDOW = 10
DEFAULT_TOL = 1e-4


class DomainError(ValueError):
    pass


# --------------------------------------------------------------------------
# scalar rates


def _scalar(fn):
    """Apply a scalar rate elementwise to arrays, keep floats as floats."""

    @functools.wraps(fn)
    def wrapper(x, *args):
        if np.ndim(x):
            return np.array([fn(float(v), *args) for v in np.ravel(x)]).reshape(np.shape(x))
        return fn(float(x), *args)

    return wrapper


@_scalar
def rate_G(x: float) -> float:
    if not x > 0:
        return math.inf
    return x - 1.0 - math.log(x)


@_scalar
def rate_L(theta: float) -> float:
    """Log-Laplace transform of the unit exponential law."""
    return -math.log1p(-theta) if theta < 1 else math.inf


@_scalar
def rate_L0(theta: float) -> float:
    return 0.5 * theta * theta


@_scalar
def rate_L0star(x: float) -> float:
    return 0.5 * x * x


def _log_or_minus_inf(x: float) -> float:
    return math.log(x) if x > 0 else -math.inf


@_scalar
def rate_H1(x: float, kappa1: float, kappa2: float) -> float:
    if not -1.0 <= x <= 1.0:
        return math.inf
    c = 2.0 + kappa1 + kappa2
    s = 1.0 + kappa1 + kappa2
    return -s * _log_or_minus_inf(c * (1 - x) / (2 * s)) - _log_or_minus_inf(c * (1 + x) / 2)


@_scalar
def rate_H2(x: float, kappa1: float, kappa2: float) -> float:
    if not -1.0 <= x <= 1.0:
        return math.inf
    c = 2.0 + kappa1 + kappa2
    return -(1 + kappa1) * _log_or_minus_inf(c * (1 + x) / (2 * (1 + kappa1))) - (1 + kappa2) * _log_or_minus_inf(
        c * (1 - x) / (2 * (1 + kappa2))
    )


class ScalarRates:
    """Namespace of the scalar rate functions."""

    G = staticmethod(rate_G)
    L = staticmethod(rate_L)
    Lstar = staticmethod(rate_G)
    L0 = staticmethod(rate_L0)
    L0star = staticmethod(rate_L0star)
    H1 = staticmethod(rate_H1)
    H2 = staticmethod(rate_H2)


# --------------------------------------------------------------------------
# coefficient side


@dataclass(frozen=True)
class SumSide:
    """A (possibly divergent) series of nonnegative terms."""

    value: float
    partial: float
    terms: np.ndarray = field(repr=False)
    tail_average: float
    divergent: bool

    def to_json(self) -> dict:
        return {
            "value": _json_float(self.value),
            "partial": _json_float(self.partial),
            "terms": [_json_float(t) for t in self.terms],
            "tail_average": _json_float(self.tail_average),
            "divergent": self.divergent,
        }


def _finish(terms, eps_tail: float, window: int) -> SumSide:
    terms = np.asarray(terms, dtype=float)
    partial = float(np.sum(terms)) if terms.size else 0.0
    if terms.size >= 2 * window:
        tail = float(np.mean(terms[-window:]))
    else:
        tail = 0.0 if math.isfinite(partial) else math.inf
    divergent = (not math.isfinite(partial)) or tail > eps_tail
    return SumSide(math.inf if divergent else partial, partial, terms, tail, divergent)


def sum_side_hermite(j: JacobiCoefficients, *, eps_tail: float = EPS_TAIL, window: int = TAIL_WINDOW) -> SumSide:
    a2 = np.concatenate([j.a**2, [1.0]])
    terms = 0.5 * j.b**2 + rate_G(a2)
    return _finish(terms, eps_tail, window)


def sum_side_laguerre(z: ZChain, tau: float, *, eps_tail: float = EPS_TAIL, window: int = TAIL_WINDOW) -> SumSide:
    odd, even = z.odd, z.even
    terms = rate_G(odd) / tau
    terms[: even.size] += rate_G(even / tau)
    return _finish(terms, eps_tail, window)


def sum_side_jacobi(
    v: VerblunskySeq, kappa1: float, kappa2: float, *, eps_tail: float = EPS_TAIL, window: int = TAIL_WINDOW
) -> SumSide:
    even = v.alpha[0::2]
    odd = v.alpha[1::2]
    terms = np.asarray(rate_H2(even, kappa1, kappa2), dtype=float)
    terms[: odd.size] += rate_H1(odd, kappa1, kappa2)
    return _finish(terms, eps_tail, window)


# --------------------------------------------------------------------------
# outlier rates


def _as_law(obj) -> ReferenceLaw:
    return obj.law if isinstance(obj, Ensemble) else obj


def _quad(fn, a, b):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, _ = integrate.quad(fn, a, b, epsabs=1e-13, epsrel=1e-12, limit=200)
    return float(val)


def _hermite_f(x: float) -> float:
    if x < 2.0:
        return math.inf
    root = math.sqrt(x * x - 4.0)
    return 0.5 * x * root - 2.0 * math.log((x + root) / 2.0)


def _boundary_blocks(law: ReferenceLaw, x: float) -> bool:
    """True when ``x`` sits on a domain boundary where the potential is infinite."""
    blo, bhi = law.domain
    return x in (blo, bhi) and math.isfinite(x) and not math.isfinite(float(law.potential(x)))


def f_plus(law, x: float) -> float:
    """Cost of a single outlier at ``x`` above the support."""
    law = _as_law(law)
    x = float(x)
    lo, hi = law.support
    if law.kind is LawKind.SC:
        return _hermite_f(x)
    if x == hi:
        return 0.0
    if x < hi or x > law.domain[1] or law.hard_edges[1]:
        return math.inf
    if _boundary_blocks(law, x):
        return math.inf

    def integrand(s):
        t = hi + s * s
        return 2.0 * s * s * float(law.s_factor(t)) * math.sqrt(t - lo)

    return _quad(integrand, 0.0, math.sqrt(x - hi))


def f_minus(law, x: float) -> float:
    """Cost of a single outlier at ``x`` below the support."""
    law = _as_law(law)
    x = float(x)
    lo, hi = law.support
    if law.kind is LawKind.SC:
        return _hermite_f(-x)
    if x == lo:
        return 0.0
    if x > lo or x < law.domain[0] or law.hard_edges[0]:
        return math.inf
    if _boundary_blocks(law, x):
        return math.inf

    def integrand(s):
        t = lo - s * s
        return 2.0 * s * s * float(law.s_factor(t)) * math.sqrt(hi - t)

    return _quad(integrand, 0.0, math.sqrt(lo - x))


# --------------------------------------------------------------------------
# spectral side


@dataclass(frozen=True)
class SpectralSide:
    value: float
    kl: float
    kl_cap_triggered: bool
    sum_f_plus: float
    sum_f_minus: float
    f_plus_atoms: tuple[float, ...]
    f_minus_atoms: tuple[float, ...]
    problems: tuple[str, ...] = ()

    def to_json(self) -> dict:
        return {
            "value": _json_float(self.value),
            "kl": _json_float(self.kl),
            "kl_cap_triggered": self.kl_cap_triggered,
            "sum_f_plus": _json_float(self.sum_f_plus),
            "sum_f_minus": _json_float(self.sum_f_minus),
            "f_plus_atoms": [_json_float(v) for v in self.f_plus_atoms],
            "f_minus_atoms": [_json_float(v) for v in self.f_minus_atoms],
            "problems": list(self.problems),
        }


_DOMAIN_PROBLEM = "atom outside the potential domain"
_HARD_EDGE_PROBLEM = "atom on a hard edge: contribution undefined"


def _at_edge(x: float, edge: float) -> bool:
    return abs(x - edge) <= 1e-12 * max(1.0, abs(edge))


def spectral_side(law, mu: MeasureS1, *, tol: float = 1e-8, panels: int = DEFAULT_PANELS) -> SpectralSide:
    law = _as_law(law)
    problems = mu.membership_problems(law, tol)
    structural = [p for p in problems if p != _DOMAIN_PROBLEM]
    if structural:
        raise InvalidMeasure("; ".join(structural))
    support_ok = np.allclose(mu.support, law.support, atol=1e-9)
    if not support_ok:
        problems.append(f"measure support {mu.support} differs from {law.support}")
    kl = kl_reverse_details(law, mu, panels=panels)
    fp = tuple(f_plus(law, lam) for lam, _ in mu.atoms_plus)
    fm = tuple(f_minus(law, lam) for lam, _ in mu.atoms_minus)
    total = kl.value + sum(fp) + sum(fm)
    if problems:
        total = math.inf
    hard = law.hard_edges
    at_hard_edge = [
        lam for lam, _ in mu.edge_atoms if (hard[0] and _at_edge(lam, law.support[0])) or (hard[1] and _at_edge(lam, law.support[1]))
    ]
    if at_hard_edge and math.isfinite(total):
        # the sum rule does not say what such an atom contributes; report it instead of assigning a value
        problems.append(f"{_HARD_EDGE_PROBLEM} at {at_hard_edge}")
        total = math.nan
    return SpectralSide(total, kl.value, kl.cap_triggered, float(sum(fp)), float(sum(fm)), fp, fm, tuple(problems))


# --------------------------------------------------------------------------
# effective potential


def _log_sin_half(u):
    """``log|sin(u/2)| - log|u|``, smooth for ``|u| < 2 pi``."""
    return np.log(0.5 * np.sinc(np.asarray(u) / (2 * math.pi)))


def _log_potential(law: ReferenceLaw, x: float) -> float:
    """``int log|x - xi| f_V(xi) dxi`` with the log singularity integrated by QAWS."""
    m, r = law.midpoint, law.half_width
    lo, hi = law.support

    def weight(theta):
        return float(law.density(m + r * math.cos(theta))) * r * math.sin(theta)

    def qaws(fn, a, b, kind):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            val, _ = integrate.quad(fn, a, b, weight=kind, wvar=(0.0, 0.0), epsabs=1e-13, epsrel=1e-12, limit=200)
        return float(val)

    base = math.log(2 * r)
    if x > hi or x < lo:
        return _quad(lambda t: weight(t) * math.log(abs(x - (m + r * math.cos(t)))), 0.0, math.pi)
    if x == hi:  # theta0 = 0: log|x - xi| = log 2r + 2 log sin(theta/2)
        smooth = _quad(lambda t: weight(t) * (base + 2 * float(_log_sin_half(t))), 0.0, math.pi)
        return smooth + 2 * qaws(weight, 0.0, math.pi, "alg-loga")
    if x == lo:  # theta0 = pi: log|x - xi| = log 2r + 2 log sin((pi - theta)/2)
        smooth = _quad(lambda t: weight(t) * (base + 2 * float(_log_sin_half(math.pi - t))), 0.0, math.pi)
        return smooth + 2 * qaws(weight, 0.0, math.pi, "alg-logb")
    th0 = math.acos(min(1.0, max(-1.0, (x - m) / r)))

    def smooth_fn(t):
        return weight(t) * (base + float(_log_sin_half(t - th0)) + math.log(math.sin((t + th0) / 2)))

    smooth = _quad(smooth_fn, 0.0, th0) + _quad(smooth_fn, th0, math.pi)
    return smooth + qaws(weight, 0.0, th0, "alg-logb") + qaws(weight, th0, math.pi, "alg-loga")


def effective_potential(law, x: float) -> float:
    """``J_V(x) = V(x) - 2 int log|x - xi| dmu_V(xi)``."""
    law = _as_law(law)
    x = float(x)
    blo, bhi = law.domain
    if not blo <= x <= bhi:
        raise DomainError(f"x = {x} outside the potential domain [{blo}, {bhi}]")
    v = float(law.potential(x))
    if not math.isfinite(v):
        return math.inf
    return v - 2.0 * _log_potential(law, x)


@dataclass(frozen=True)
class PotentialInfimum:
    value: float
    edge_value: float
    search_value: float

    @property
    def discrepancy(self) -> float:
        return abs(self.search_value - self.edge_value)


@functools.lru_cache(maxsize=64)
def effective_potential_infimum(law: ReferenceLaw) -> PotentialInfimum:
    """Infimum of ``J_V``: edge values and a bounded golden-section search over the support."""
    lo, hi = law.support
    edges = [effective_potential(law, lo), effective_potential(law, hi)]
    res = optimize.minimize_scalar(
        lambda t: effective_potential(law, t), bounds=(lo, hi), method="bounded", options={"xatol": 1e-6 * (hi - lo)}
    )
    edge = min(edges)
    search = float(res.fun)
    return PotentialInfimum(min(edge, search), edge, search)


def rate_from_effective_potential(law, x: float, side: str) -> float:
    law = _as_law(law)
    x = float(x)
    lo, hi = law.support
    blo, bhi = law.domain
    if side == "plus":
        if x == hi:
            return 0.0
        if x < hi or x > bhi or law.hard_edges[1]:
            return math.inf
    elif side == "minus":
        if x == lo:
            return 0.0
        if x > lo or x < blo or law.hard_edges[0]:
            return math.inf
    else:
        raise ValueError("side must be 'plus' or 'minus'")
    value = effective_potential(law, x) - effective_potential_infimum(law).value
    return max(value, 0.0)


# --------------------------------------------------------------------------
# H-functional of a finite Jacobi matrix


def _ensemble_for_h(ensemble) -> Ensemble:
    if not isinstance(ensemble, Ensemble):
        raise TypeError("expected an Ensemble")
    return ensemble


def h_functional(ensemble, j: JacobiCoefficients) -> float:
    """``H(T) = tr V(T) - 2 sum log a_k`` without a dense eigendecomposition.

    Hermite: traces of ``T`` and ``T^2``.  Laguerre: ``tr T`` and the
    determinant of the bidiagonal factor.  Jacobi (matrix on [-2, 2]):
    ``det(2I -+ T)`` as Verblunsky products.
    """
    ens = _ensemble_for_h(ensemble)
    if np.any(j.a <= 0):
        return math.inf
    log_a = 2.0 * float(np.sum(np.log(j.a)))
    if ens.name == "hermite":
        return 0.5 * float(np.sum(j.b**2)) + float(np.sum(j.a**2)) - log_a
    if ens.name == "laguerre":
        tau = ens.tau
        z = z_decompose(j)
        if np.any(z.odd <= 0):
            return math.inf
        log_det = float(np.sum(np.log(z.odd)))
        trace = float(np.sum(j.b))
        return trace / tau - (1.0 / tau - 1.0) * log_det - log_a
    try:
        alpha = geronimus_inverse(j).alpha
    except OutOfClassError:
        return math.inf
    ld_minus, ld_plus = killip_nenciu_logdets(VerblunskySeq(alpha))
    return -ens.kappa2 * ld_minus - ens.kappa1 * ld_plus - log_a


def h_functional_dense(ensemble, j: JacobiCoefficients) -> float:
    """Same functional through the continuant determinants (an independent path)."""
    ens = _ensemble_for_h(ensemble)
    log_a = 2.0 * float(np.sum(np.log(j.a)))
    if ens.name == "hermite":
        eig = np.linalg.eigvalsh(j.matrix())
        return 0.5 * float(np.sum(eig**2)) - log_a
    if ens.name == "laguerre":
        sign, ld = tridiagonal_logdet_shifted(j.b, j.a, 0.0)
        if sign * (-1) ** j.n <= 0:
            return math.inf
        return float(np.sum(j.b)) / ens.tau - (1.0 / ens.tau - 1.0) * ld - log_a
    s_minus, ld_minus = tridiagonal_logdet_shifted(j.b, j.a, 2.0)
    s_plus, ld_plus = tridiagonal_logdet_shifted(-j.b, j.a, 2.0)
    if s_minus <= 0 or s_plus <= 0:
        return math.inf
    return -ens.kappa2 * ld_minus - ens.kappa1 * ld_plus - log_a


def reference_matrix(ensemble, n: int) -> JacobiCoefficients:
    """Equilibrium coefficients truncated at ``n`` (on [-2, 2] for Jacobi)."""
    ens = _ensemble_for_h(ensemble)
    ref = reference_coefficients(ens.law, n)
    return szego_pushforward(ref, "from01") if ens.name == "jacobi" else ref


def h_normalized(ensemble, j: JacobiCoefficients) -> float:
    """``H(T) - H(T_ref)`` with ``T_ref`` the equilibrium coefficients of the same size."""
    return h_functional(ensemble, j) - h_functional(ensemble, reference_matrix(ensemble, j.n))


def _jacobi_boundary(alpha: np.ndarray, n: int, kappa1: float, kappa2: float) -> float:
    prev_odd = alpha[2 * n - 3] if n >= 2 else -1.0
    last = alpha[2 * n - 2]
    return math.log1p(-prev_odd) - kappa2 * math.log1p(-last) - kappa1 * math.log1p(last)


def h_finite_depth(ensemble, j: JacobiCoefficients) -> float:
    """Finite-depth partial sum plus boundary term, which ``h_normalized`` must equal."""
    ens = _ensemble_for_h(ensemble)
    n = j.n
    if ens.name == "hermite":
        return 0.5 * float(np.sum(j.b**2)) + float(np.sum(rate_G(j.a**2)))
    if ens.name == "laguerre":
        z = z_decompose(j)
        tau = ens.tau
        return float(np.sum(rate_G(z.odd))) / tau + float(np.sum(rate_G(z.even / tau))) + math.log(z.z[-1])
    alpha = geronimus_inverse(j).alpha
    k1, k2 = ens.kappa1, ens.kappa2
    body = float(np.sum(rate_H1(alpha[1 : 2 * n - 2 : 2], k1, k2))) + float(np.sum(rate_H2(alpha[0 : 2 * n - 2 : 2], k1, k2)))
    c = 2.0 + k1 + k2
    kmk = np.empty(2 * n - 1)
    kmk[0::2] = (k1 - k2) / c
    kmk[1::2] = -(k1 + k2) / c
    return body + _jacobi_boundary(alpha, n, k1, k2) - _jacobi_boundary(kmk, n, k1, k2)


# --------------------------------------------------------------------------
# gem diagnostics


@dataclass(frozen=True)
class GemReport:
    in_s1: bool
    s1_problems: tuple[str, ...]
    outlier_sum: float
    hard_edge_ok: bool
    outlier_condition: bool
    szego_integral: float
    szego_condition: bool

    @property
    def all_hold(self) -> bool:
        return self.in_s1 and self.outlier_condition and self.szego_condition

    def to_json(self) -> dict:
        out = asdict(self)
        out["s1_problems"] = list(self.s1_problems)
        out["outlier_sum"] = _json_float(self.outlier_sum)
        out["szego_integral"] = _json_float(self.szego_integral)
        out["all_hold"] = self.all_hold
        return out


def gem_diagnostics(law, mu: MeasureS1, *, panels: int = 128, order: int = 16) -> GemReport:
    law = _as_law(law)
    problems = tuple(mu.membership_problems(law))
    lo, hi = law.support
    blo, bhi = law.domain
    atoms = [lam for lam, _ in mu.atoms_plus + mu.atoms_minus]
    hard_ok = all((not math.isfinite(blo) or lam > blo) and (not math.isfinite(bhi) or lam < bhi) for lam in atoms)
    outliers = sum((lam - hi) ** 1.5 for lam, _ in mu.atoms_plus) + sum((lo - lam) ** 1.5 for lam, _ in mu.atoms_minus)
    outlier_ok = hard_ok and math.isfinite(outliers)

    x, w = theta_quadrature(law.support, panels, order)
    f = np.asarray(mu.density(x), dtype=float)
    if np.any(f <= 0):
        szego = -math.inf
    else:
        root = np.sqrt(np.maximum((hi - x) * (x - lo), 0.0))
        szego = float(np.sum(w * np.asarray(law.s_factor(x)) * root * np.log(f)))
    return GemReport(not problems, problems, float(outliers), hard_ok, outlier_ok, szego, math.isfinite(szego))


# --------------------------------------------------------------------------
# full sum-rule check


@dataclass(frozen=True)
class SumRuleReport:
    ensemble: str
    sum_side: SumSide
    spectral_side: SpectralSide
    abs_gap: float | None
    truncation_depth: int
    divergence_flags: dict
    status: str
    tol: float

    def to_json(self) -> dict:
        return {
            "ensemble": self.ensemble,
            "sum_side": self.sum_side.to_json(),
            "spectral_side": self.spectral_side.to_json(),
            "abs_gap": _json_float(self.abs_gap) if self.abs_gap is not None else None,
            "truncation_depth": self.truncation_depth,
            "divergence_flags": dict(self.divergence_flags),
            "status": self.status,
            "tol": self.tol,
        }

    CSV_FIELDS = (
        "ensemble",
        "status",
        "sum_side",
        "spectral_side",
        "abs_gap",
        "kl",
        "sum_f_plus",
        "sum_f_minus",
        "truncation_depth",
        "sum_divergent",
        "spectral_infinite",
    )

    def csv_row(self) -> dict:
        return {
            "ensemble": self.ensemble,
            "status": self.status,
            "sum_side": _json_float(self.sum_side.value),
            "spectral_side": _json_float(self.spectral_side.value),
            "abs_gap": "" if self.abs_gap is None else self.abs_gap,
            "kl": _json_float(self.spectral_side.kl),
            "sum_f_plus": _json_float(self.spectral_side.sum_f_plus),
            "sum_f_minus": _json_float(self.spectral_side.sum_f_minus),
            "truncation_depth": self.truncation_depth,
            "sum_divergent": self.divergence_flags["sum_divergent"],
            "spectral_infinite": self.divergence_flags["spectral_infinite"],
        }

    def to_csv(self, header: bool = True) -> str:
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=self.CSV_FIELDS, lineterminator="\n")
        if header:
            writer.writeheader()
        writer.writerow(self.csv_row())
        return buf.getvalue()


def _json_float(x):
    if x is None:
        return None
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


def _pad(j: JacobiCoefficients, ref: JacobiCoefficients) -> JacobiCoefficients:
    n = ref.n
    if j.n >= n:
        return j.truncate(n)
    a = np.concatenate([j.a, ref.a[j.n - 1 :]])
    b = np.concatenate([j.b, ref.b[j.n :]])
    return JacobiCoefficients(a, b)


def discretize_measure(mu: MeasureS1, nodes: int = 4096) -> DiscreteMeasure:
    """Quadrature discretization of an S1 measure (a.c. part plus atoms)."""
    x, w = theta_quadrature(mu.support, max(1, nodes // 16), 16)
    mass = w * np.asarray(mu.density(x), dtype=float)
    total = float(mass.sum())
    if total > 0:
        mass *= mu.ac_mass / total
    pts = list(zip(x, mass)) + list(mu.atoms_plus) + list(mu.atoms_minus)
    pts = [(float(p), float(q)) for p, q in pts if q > 0]
    pts.sort()
    return DiscreteMeasure(np.array([p for p, _ in pts]), np.array([q for _, q in pts]))


def coefficients_for(mu: MeasureS1, law: ReferenceLaw, depth: int, *, nodes: int = 4096):
    """Coefficient-side description of ``mu``.

    Known families get exact coefficients (a z-chain or Verblunsky sequence
    where that is their natural form); anything else goes through Lanczos
    on a fine discretization.
    """
    spec = mu.spec or {}
    kind = spec.get("kind")
    params = spec.get("params", {})
    if kind in ("SC", "MP", "KMK", "Arcsine01") and kind == law.kind.value:
        return reference_coefficients(law, depth)
    if kind == "rank-one":
        j = JacobiCoefficients(np.ones(depth - 1), np.zeros(depth))
        b = j.b.copy()
        b[0] = params["c"]
        return JacobiCoefficients(j.a, b)
    if kind == "finite-perturbation":
        given = JacobiCoefficients(np.asarray(params["a"], float), np.asarray(params["b"], float))
        return _pad(given, reference_coefficients(law, max(depth, given.n)))
    if kind == "atom-at-zero":
        # the z-chain is the natural (and well-conditioned) description here;
        # decomposing its Jacobi matrix again doubles rounding errors each step
        z = np.empty(2 * depth - 1)
        z[0::2] = params["tau"]
        z[1::2] = 1.0
        return ZChain(z)
    if kind == "bernstein-szego":
        alpha = np.zeros(2 * depth - 1)
        alpha[0] = params["r"]
        return VerblunskySeq(alpha)
    return coeffs_from_measure(discretize_measure(mu, nodes), depth)


def verify_sum_rule(
    ensemble: Ensemble,
    coefficients,
    mu: MeasureS1,
    depth: int = 50,
    *,
    tol: float = DEFAULT_TOL,
    eps_tail: float = EPS_TAIL,
    panels: int = DEFAULT_PANELS,
) -> SumRuleReport:
    """Evaluate both sides of the sum rule for ``ensemble`` and compare them.

    ``coefficients`` may be ``None`` (derived from ``mu``), a
    ``JacobiCoefficients`` (on [0, 1] for Jacobi), a ``ZChain`` (Laguerre) or
    a ``VerblunskySeq`` (Jacobi).  Short inputs are continued by the
    equilibrium coefficients up to ``depth``.
    """
    law = ensemble.law
    if coefficients is None:
        coefficients = coefficients_for(mu, law, depth)
    if ensemble.name == "hermite":
        j = _pad(coefficients, reference_coefficients(law, depth))
        side = sum_side_hermite(j, eps_tail=eps_tail)
    elif ensemble.name == "laguerre":
        if isinstance(coefficients, ZChain):
            z = coefficients
            if z.z.size < 2 * depth - 1:
                ref = np.empty(2 * depth - 1)
                ref[0::2], ref[1::2] = 1.0, ensemble.tau
                ref[: z.z.size] = z.z
                z = ZChain(ref)
            side = sum_side_laguerre(z, ensemble.tau, eps_tail=eps_tail)
        else:
            j = _pad(coefficients, reference_coefficients(law, depth))
            try:
                side = sum_side_laguerre(z_decompose(j), ensemble.tau, eps_tail=eps_tail)
            except HalfLineError:
                side = SumSide(math.inf, math.inf, np.array([math.inf]), math.inf, True)
    else:
        k1, k2 = ensemble.kappa1, ensemble.kappa2
        if isinstance(coefficients, VerblunskySeq):
            alpha = coefficients.alpha
            if alpha.size < 2 * depth:
                c = 2.0 + k1 + k2
                full = np.empty(2 * depth)
                full[0::2], full[1::2] = (k1 - k2) / c, -(k1 + k2) / c
                full[: alpha.size] = alpha
                alpha = full
            side = sum_side_jacobi(VerblunskySeq(alpha), k1, k2, eps_tail=eps_tail)
        else:
            j = _pad(coefficients, reference_coefficients(law, depth))
            try:
                side = sum_side_jacobi(verblunsky_from_coeffs01(j), k1, k2, eps_tail=eps_tail)
            except OutOfClassError:
                side = SumSide(math.inf, math.inf, np.array([math.inf]), math.inf, True)
    spec = spectral_side(law, mu, panels=panels)
    flags = {
        "sum_divergent": side.divergent,
        "spectral_infinite": math.isinf(spec.value),
        "kl_cap_triggered": spec.kl_cap_triggered,
        "interior_singular_mass": mu.interior_singular_flag,
        "dropped_atom_mass": mu.dropped_atom_mass,
        "hard_edge_atom": math.isnan(spec.value),
    }
    if math.isnan(spec.value):
        return SumRuleReport(ensemble.label, side, spec, None, depth, flags, "FLAGGED", tol)
    both_inf = not math.isfinite(side.value) and not math.isfinite(spec.value)
    if math.isfinite(side.value) and math.isfinite(spec.value):
        gap = abs(side.value - spec.value)
        status = "PASS" if gap <= tol else "FAIL"
    else:
        gap = None
        status = "PASS-inf" if both_inf else "FAIL"
    return SumRuleReport(ensemble.label, side, spec, gap, depth, flags, status, tol)
