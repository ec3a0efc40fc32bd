"""Random tridiagonal models and their spectral measures.

Each coefficient index owns a random stream derived from ``(seed, family,
index)``; draw ``d`` of a batch uses the ``d``-th uniform of that stream,
mapped through an inverse CDF.  So a single draw equals draw 0 of a batch
with the same seed, and growing ``n`` keeps the uniforms of the shared
indices (common random numbers across an ``n``-ladder).

Shape tables (``beta' = beta/2``):

Hermite
    ``b_k ~ N(0, 1/(beta' n))``, ``a_k^2 ~ Gamma(beta'(n-k), scale 1/(beta' n))``.
Laguerre(tau)
    ``z_{2k-1} ~ Gamma(n beta'(1/tau - 1) + beta'(n-k) + 1, scale tau/(n beta'))``,
    ``z_{2k} ~ Gamma(beta'(n-k), scale tau/(n beta'))``.
    This is the bidiagonal chi model rescaled to the weight
    ``x^{n beta'(1/tau-1)} exp(-n beta' x / tau)``; no rounding of ``n tau``.
Jacobi(kappa1, kappa2), matrix on [-2, 2]
    weight ``(2-x)^A (2+x)^B`` with ``A = n beta' kappa2``, ``B = n beta' kappa1``;
    ``alpha_k`` has density proportional to ``(1-x)^{s-1} (1+x)^{t-1}`` on (-1, 1),
    with ``s = (2n-k-2) beta/4 + A + 1``, ``t = (2n-k-2) beta/4 + B + 1`` for even ``k``
    and ``s = (2n-k-3) beta/4 + A + B + 2``, ``t = (2n-k-1) beta/4`` for odd ``k``.
    The eigenvalues are then pushed to [0, 1] by ``x -> 1/2 - x/4``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable

import numba
import numpy as np
from scipy import special
from scipy.linalg import eigvalsh_tridiagonal

from .jacobi import (
    JacobiCoefficients,
    VerblunskySeq,
    ZChain,
    geronimus_forward,
    spectral_from_coeffs,
    szego_pushforward,
    z_compose,
)
from .measures import DiscreteMeasure, Ensemble
from .tridiag import _ql_implicit

KINDS = ("hermite", "laguerre", "jacobi_kn", "general_v")

_FAMILY_B = 0
_FAMILY_A = 1
_FAMILY_WEIGHTS = 2


@dataclass(frozen=True)
class EnsembleSpec:
    kind: str
    n: int
    beta: float = 2.0
    seed: int = 0
    tau: float = 1.0
    kappa1: float = 0.0
    kappa2: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if not self.beta > 0:
            raise ValueError("beta must be > 0")
        if not 0 < self.tau <= 1:
            raise ValueError("tau must lie in (0, 1]")
        if self.kappa1 < 0 or self.kappa2 < 0:
            raise ValueError("kappa1, kappa2 must be nonnegative")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    @property
    def beta_prime(self) -> float:
        return self.beta / 2.0

    @property
    def ensemble(self) -> Ensemble:
        if self.kind == "hermite":
            return Ensemble.hermite()
        if self.kind == "laguerre":
            return Ensemble.laguerre(self.tau)
        if self.kind == "jacobi_kn":
            return Ensemble.jacobi(self.kappa1, self.kappa2)
        raise ValueError("a general-V spec has no classical ensemble")

    def with_n(self, n: int) -> EnsembleSpec:
        return EnsembleSpec(self.kind, n, self.beta, self.seed, self.tau, self.kappa1, self.kappa2)

    def with_seed(self, seed: int) -> EnsembleSpec:
        return EnsembleSpec(self.kind, self.n, self.beta, seed, self.tau, self.kappa1, self.kappa2)


@dataclass(frozen=True)
class SampledSpectralData:
    eigenvalues: np.ndarray
    weights: np.ndarray
    coefficients: object = field(repr=False)
    seed: int = 0

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["index", "eigenvalue", "weight"])
        for i, (lam, wt) in enumerate(zip(self.eigenvalues, self.weights), start=1):
            w.writerow([i, repr(float(lam)), repr(float(wt))])
        return buf.getvalue()

    def to_json(self) -> dict:
        coeffs = self.coefficients
        if isinstance(coeffs, VerblunskySeq):
            c = {"alpha": coeffs.alpha.tolist()}
        elif isinstance(coeffs, JacobiCoefficients):
            c = coeffs.to_json()
        else:
            c = None
        return {
            "seed": int(self.seed),
            "eigenvalues": self.eigenvalues.tolist(),
            "weights": self.weights.tolist(),
            "coefficients": c,
        }


# --------------------------------------------------------------------------
# uniform streams


def index_uniforms(seed: int, family: int, indices, draws: int, start: int = 0) -> np.ndarray:
    """Uniforms ``u[k, d]`` in (0, 1): one stream per ``(seed, family, index)``."""
    indices = list(indices)
    out = np.empty((len(indices), draws))
    for row, k in enumerate(indices):
        ss = np.random.SeedSequence(int(seed), spawn_key=(family, int(k)))
        gen = np.random.Generator(np.random.PCG64(ss))
        if start:
            gen.random(start)
        u = gen.random(draws)
        out[row] = np.where(u == 0.0, np.nextafter(0.0, 1.0), u)
    return out


def _gamma_icdf(shape, u, scale):
    return special.gammaincinv(shape, u) * scale


def _symmetric_beta_icdf(s, t, u):
    """Inverse CDF of the law on (-1, 1) with density proportional to ``(1-x)^{s-1}(1+x)^{t-1}``."""
    return 2.0 * special.betaincinv(t, s, u) - 1.0


# --------------------------------------------------------------------------
# coefficient batches (rows = draws)


def hermite_coefficient_batch(spec: EnsembleSpec, draws: int, start: int = 0):
    n, bp = spec.n, spec.beta_prime
    ub = index_uniforms(spec.seed, _FAMILY_B, range(1, n + 1), draws, start)
    b = special.ndtri(ub).T / math.sqrt(bp * n)
    if n == 1:
        return np.zeros((draws, 0)), b
    k = np.arange(1, n)
    ua = index_uniforms(spec.seed, _FAMILY_A, k, draws, start)
    a2 = _gamma_icdf(bp * (n - k)[:, None], ua, 1.0 / (bp * n)).T
    return np.sqrt(a2), b


def laguerre_z_batch(spec: EnsembleSpec, draws: int, start: int = 0) -> np.ndarray:
    n, bp, tau = spec.n, spec.beta_prime, spec.tau
    scale = tau / (n * bp)
    k = np.arange(1, n + 1)
    u_odd = index_uniforms(spec.seed, _FAMILY_B, k, draws, start)
    odd_shape = n * bp * (1.0 / tau - 1.0) + bp * (n - k) + 1.0
    z = np.empty((draws, 2 * n - 1))
    z[:, 0::2] = _gamma_icdf(odd_shape[:, None], u_odd, scale).T
    if n > 1:
        k = np.arange(1, n)
        u_even = index_uniforms(spec.seed, _FAMILY_A, k, draws, start)
        z[:, 1::2] = _gamma_icdf(bp * (n - k)[:, None], u_even, scale).T
    return z


def jacobi_shape_table(n: int, beta: float, kappa1: float, kappa2: float) -> tuple[np.ndarray, np.ndarray]:
    """Exponents ``(s_k, t_k)`` for ``alpha_0..alpha_{2n-2}``."""
    bp = beta / 2.0
    big_a = n * bp * kappa2
    big_b = n * bp * kappa1
    k = np.arange(2 * n - 1)
    even = k % 2 == 0
    s = np.where(even, (2 * n - k - 2) * beta / 4 + big_a + 1, (2 * n - k - 3) * beta / 4 + big_a + big_b + 2)
    t = np.where(even, (2 * n - k - 2) * beta / 4 + big_b + 1, (2 * n - k - 1) * beta / 4)
    return s, t


def jacobi_alpha_batch(spec: EnsembleSpec, draws: int, start: int = 0) -> np.ndarray:
    s, t = jacobi_shape_table(spec.n, spec.beta, spec.kappa1, spec.kappa2)
    u = index_uniforms(spec.seed, _FAMILY_B, range(2 * spec.n - 1), draws, start)
    alpha = _symmetric_beta_icdf(s[:, None], t[:, None], u).T
    # keep the open interval even when the inverse CDF rounds to the boundary
    edge = np.nextafter(1.0, 0.0)
    return np.clip(alpha, -edge, edge)


# --------------------------------------------------------------------------
# single draws


def _data(j: JacobiCoefficients, coeffs, seed) -> SampledSpectralData:
    mu = spectral_from_coeffs(j)
    return SampledSpectralData(mu.nodes, mu.weights, coeffs, seed)


def _require(spec: EnsembleSpec, kind: str):
    if spec.kind != kind:
        raise ValueError(f"expected a {kind} spec, got {spec.kind}")


def sample_hermite(spec: EnsembleSpec) -> SampledSpectralData:
    _require(spec, "hermite")
    a, b = hermite_coefficient_batch(spec, 1)
    j = JacobiCoefficients(a[0], b[0])
    return _data(j, j, spec.seed)


def sample_laguerre(spec: EnsembleSpec) -> SampledSpectralData:
    _require(spec, "laguerre")
    j = z_compose(ZChain(laguerre_z_batch(spec, 1)[0]))
    return _data(j, j, spec.seed)


def sample_jacobi_kn(spec: EnsembleSpec) -> SampledSpectralData:
    _require(spec, "jacobi_kn")
    v = VerblunskySeq(jacobi_alpha_batch(spec, 1)[0])
    j = szego_pushforward(geronimus_forward(v), "to01")
    return _data(j, v, spec.seed)


def sample(spec: EnsembleSpec) -> SampledSpectralData:
    return {"hermite": sample_hermite, "laguerre": sample_laguerre, "jacobi_kn": sample_jacobi_kn}[spec.kind](spec)


def coefficient_batch(spec: EnsembleSpec, draws: int, start: int = 0) -> list[JacobiCoefficients]:
    """Jacobi coefficients (on [0, 1] for Jacobi) of ``draws`` independent draws."""
    if spec.kind == "hermite":
        a, b = hermite_coefficient_batch(spec, draws, start)
        return [JacobiCoefficients(a[d], b[d]) for d in range(draws)]
    if spec.kind == "laguerre":
        z = laguerre_z_batch(spec, draws, start)
        return [z_compose(ZChain(row)) for row in z]
    if spec.kind == "jacobi_kn":
        alpha = jacobi_alpha_batch(spec, draws, start)
        return [szego_pushforward(geronimus_forward(VerblunskySeq(row)), "to01") for row in alpha]
    raise ValueError("no direct sampler for a general-V spec")


def coefficient_arrays(spec: EnsembleSpec, draws: int, start: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """``(a, b)`` arrays of shape ``(draws, n-1)`` and ``(draws, n)``, vectorized over draws."""
    if spec.kind == "hermite":
        return hermite_coefficient_batch(spec, draws, start)
    if spec.kind == "laguerre":
        z = laguerre_z_batch(spec, draws, start)
        zz = np.concatenate([np.zeros((draws, 1)), z], axis=1)
        n = spec.n
        b = zz[:, 0 : 2 * n - 1 : 2] + zz[:, 1 : 2 * n : 2]
        a = np.sqrt(zz[:, 1 : 2 * n - 2 : 2] * zz[:, 2 : 2 * n - 1 : 2])
        return a, b
    if spec.kind == "jacobi_kn":
        alpha = jacobi_alpha_batch(spec, draws, start)
        a, b = _geronimus_rows(alpha)
        return a / 4.0, (2.0 - b) / 4.0
    raise ValueError("no direct sampler for a general-V spec")


def _geronimus_rows(alpha: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    draws, length = alpha.shape
    n = (length + 1) // 2
    ext = np.concatenate([np.zeros((draws, 1)), -np.ones((draws, 1)), alpha], axis=1)
    b = np.empty((draws, n))
    a = np.empty((draws, n - 1))
    for k in range(n):
        prev_odd = ext[:, 2 * k + 1]
        b[:, k] = (1 - prev_odd) * ext[:, 2 * k + 2] - (1 + prev_odd) * ext[:, 2 * k]
        if k < n - 1:
            a[:, k] = np.sqrt((1 - prev_odd) * (1 - ext[:, 2 * k + 2] ** 2) * (1 + ext[:, 2 * k + 3]))
    return a, b


def extreme_eigenvalues(spec: EnsembleSpec, draws: int, start: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Smallest and largest eigenvalue of each of ``draws`` draws (Sturm bisection)."""
    a, b = coefficient_arrays(spec, draws, start)
    n = spec.n
    lo = np.empty(draws)
    hi = np.empty(draws)
    if n == 1:
        lo[:] = hi[:] = b[:, 0]
        return lo, hi
    for d in range(draws):
        lo[d] = eigvalsh_tridiagonal(b[d], a[d], select="i", select_range=(0, 0))[0]
        hi[d] = eigvalsh_tridiagonal(b[d], a[d], select="i", select_range=(n - 1, n - 1))[0]
    return lo, hi


def sample_dirichlet_weights(n: int, beta_prime: float, seed: int) -> np.ndarray:
    """``gamma_i ~ Gamma(beta', 1/(beta' n))`` normalized to the simplex."""
    if n < 1 or not beta_prime > 0:
        raise ValueError("need n >= 1 and beta' > 0")
    u = index_uniforms(seed, _FAMILY_WEIGHTS, range(1, n + 1), 1)[:, 0]
    gam = _gamma_icdf(beta_prime, u, 1.0 / (beta_prime * n))
    return gam / gam.sum()


def empirical_measure(data: SampledSpectralData, weighted: bool) -> DiscreteMeasure:
    n = data.eigenvalues.size
    weights = data.weights if weighted else np.full(n, 1.0 / n)
    return DiscreteMeasure(data.eigenvalues, weights)


# --------------------------------------------------------------------------
# Metropolis sampler for a general potential


@numba.njit(cache=True)
def _eigvals_kernel(b, a):
    n = b.shape[0]
    d = b.copy()
    e = np.zeros(n)
    e[: n - 1] = a
    z = np.zeros(n)
    status = _ql_implicit(d, e, z, False)
    d.sort()
    return d, status


def _eigvals(b, a):
    d, status = _eigvals_kernel(np.ascontiguousarray(b, dtype=np.float64), np.ascontiguousarray(a, dtype=np.float64))
    if status != 0:
        raise np.linalg.LinAlgError("QL iteration did not converge")
    return d


@numba.njit(cache=True)
def hermite_potential(x):
    return 0.5 * x * x


@dataclass(frozen=True)
class McmcResult:
    final: SampledSpectralData
    acceptance_rate: float
    rejected_domain: int
    steps: int
    trace: np.ndarray = field(repr=False)  # thinned post-burn-in states: b columns then log a columns
    trace_lambda_max: np.ndarray = field(repr=False)
    step_size: float = 0.0

    @property
    def trace_b1(self) -> np.ndarray:
        return self.trace[:, 0]


def default_step_size(n: int) -> float:
    return 0.5 / math.sqrt(n)


def _log_target(b, u, n, bp, beta, potential, domain):
    ev = _eigvals(b, np.exp(u))
    if ev[0] < domain[0] or ev[-1] > domain[1]:
        return -math.inf, ev
    vals = potential(ev)
    tr = float(np.sum(vals))
    if not math.isfinite(tr):
        return -math.inf, ev
    k = np.arange(1, n)
    return -n * bp * tr + beta * float(np.sum((n - k) * u)), ev


@numba.njit(cache=True)
def _mcmc_kernel(b, u, noise, logu, potential, bp, beta, lo, hi, offset, burn, thin, trace, tlmax):
    n = b.shape[0]
    steps = noise.shape[0]
    ev, _ = _eigvals_kernel(b, np.exp(u))
    tr = 0.0
    for i in range(n):
        tr += potential(ev[i])
    cur = -n * bp * tr
    for k in range(1, n):
        cur += beta * (n - k) * u[k - 1]
    accepted = 0
    rejected_domain = 0
    lmax = ev[n - 1]
    for step in range(steps):
        pb = b + noise[step, :n]
        pu = u + noise[step, n:]
        pev, status = _eigvals_kernel(pb, np.exp(pu))
        prop = -np.inf
        ok = status == 0 and pev[0] >= lo and pev[n - 1] <= hi
        if ok:
            tr = 0.0
            for i in range(n):
                tr += potential(pev[i])
            if np.isfinite(tr):
                prop = -n * bp * tr
                for k in range(1, n):
                    prop += beta * (n - k) * pu[k - 1]
            else:
                ok = False
        if not ok:
            rejected_domain += 1
        elif logu[step] < prop - cur:
            b[:] = pb
            u[:] = pu
            cur = prop
            lmax = pev[n - 1]
            accepted += 1
        g = offset + step
        if g >= burn and (g - burn) % thin == thin - 1:
            row = (g - burn) // thin
            if row < trace.shape[0]:
                trace[row, :n] = b
                trace[row, n:] = u
                tlmax[row] = lmax
    return accepted, rejected_domain


def sample_general_v_mcmc(
    spec: EnsembleSpec,
    potential: Callable,
    domain: tuple[float, float] = (-math.inf, math.inf),
    steps: int = 100_000,
    step_size: float | None = None,
    *,
    burn_in: float = 0.2,
    thin: int = 10,
    init: JacobiCoefficients | None = None,
    chunk: int = 65_536,
) -> McmcResult:
    """Random-walk Metropolis on ``(b_1..b_n, log a_1..log a_{n-1})``.

    Target log-density ``-n beta' tr V(T) + beta sum_k (n-k) log a_k``; the
    second term is the tridiagonal-model weight ``a_k^{beta(n-k)-1}`` times
    the Jacobian ``a_k`` of the log coordinates.  Proposals whose spectrum
    leaves ``domain`` (or where ``V`` is not finite) are rejected and
    counted.  ``potential`` acts elementwise; a numba-compiled scalar
    function runs the whole chain in compiled code, anything else runs a
    Python loop on the same random numbers.
    """
    n = spec.n
    if n < 2:
        raise ValueError("the Metropolis sampler needs n >= 2")
    bp, beta = spec.beta_prime, spec.beta
    step_size = default_step_size(n) if step_size is None else float(step_size)
    if init is None:
        b = np.zeros(n)
        u = np.zeros(n - 1)
        if math.isfinite(domain[0]) or math.isfinite(domain[1]):
            lo = domain[0] if math.isfinite(domain[0]) else domain[1] - 4.0
            hi = domain[1] if math.isfinite(domain[1]) else domain[0] + 4.0
            b[:] = 0.5 * (lo + hi)
            u[:] = math.log(0.25 * (hi - lo) * 0.9)
    else:
        b = init.b.astype(float).copy()
        u = np.log(init.a)
    burn = int(burn_in * steps)
    rows = max(0, (steps - burn) // thin)
    trace = np.zeros((rows, 2 * n - 1))
    tlmax = np.zeros(rows)
    rng = np.random.default_rng(spec.seed)
    compiled = isinstance(potential, numba.core.registry.CPUDispatcher)
    accepted = 0
    rejected = 0
    done = 0
    dlo, dhi = float(domain[0]), float(domain[1])
    cur = lmax = None
    while done < steps:
        m = min(chunk, steps - done)
        noise = rng.standard_normal((m, 2 * n - 1)) * step_size
        logu = np.log(rng.random(m))
        if compiled:
            acc, rej = _mcmc_kernel(b, u, noise, logu, potential, bp, beta, dlo, dhi, done, burn, thin, trace, tlmax)
        else:
            if cur is None:
                cur, ev = _log_target(b, u, n, bp, beta, potential, domain)
                lmax = ev[-1]
            acc = rej = 0
            for s in range(m):
                pb = b + noise[s, :n]
                pu = u + noise[s, n:]
                prop, pev = _log_target(pb, pu, n, bp, beta, potential, domain)
                if not math.isfinite(prop):
                    rej += 1
                elif logu[s] < prop - cur:
                    b, u, cur, lmax = pb, pu, prop, pev[-1]
                    acc += 1
                g = done + s
                if g >= burn and (g - burn) % thin == thin - 1 and (g - burn) // thin < rows:
                    row = (g - burn) // thin
                    trace[row, :n] = b
                    trace[row, n:] = u
                    tlmax[row] = lmax
        accepted += acc
        rejected += rej
        done += m
    j = JacobiCoefficients(np.exp(u), b)
    final = _data(j, j, spec.seed)
    return McmcResult(final, accepted / steps, rejected, steps, trace, tlmax, step_size)
