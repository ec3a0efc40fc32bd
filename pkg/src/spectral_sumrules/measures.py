"""Reference equilibrium laws, the measure class S1, and reverse KL divergence.

Every law carries its support ``[alpha-, alpha+]``, the potential domain
``[b-, b+]``, a density evaluator and, for the classical kinds, the factor
``S`` in ``f_V(x) = S(x) sqrt(|(x - alpha-)(x - alpha+)|) / (2 pi)``.

The Kesten-McKay law ``KMK(k1, k2)`` is labelled by its Verblunsky
coefficients: ``alpha_{2k} = (k1 - k2)/(2 + k1 + k2)``.  With that labelling
the mean is ``(1 + k2)/(2 + k1 + k2)``, the potential on ``[0, 1]`` is
``-k2 log x - k1 log(1 - x)`` and ``k2 = 0`` gives a hard edge at 0.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

DensityFn = Callable[[np.ndarray], np.ndarray]

KL_CAP = 1e6
DEFAULT_PANELS = 64
DEFAULT_ORDER = 16
N_MAX_ATOMS = 64


class UnsupportedOperation(ValueError):
    """Operation not defined for this kind of law."""


class InvalidMeasure(ValueError):
    """Measure fails the S1 membership checks."""


class LawKind(str, enum.Enum):
    SC = "SC"
    MP = "MP"
    KMK = "KMK"
    ARCSINE01 = "Arcsine01"
    GENERAL_V = "GeneralV"


@dataclass(frozen=True)
class ReferenceLaw:
    kind: LawKind
    params: tuple[float, ...]
    support: tuple[float, float]
    domain: tuple[float, float]
    density_fn: DensityFn | None = field(default=None, repr=False, compare=False)
    potential_fn: DensityFn | None = field(default=None, repr=False, compare=False)
    s_factor_fn: DensityFn | None = field(default=None, repr=False, compare=False)

    @property
    def name(self) -> str:
        if not self.params:
            return self.kind.value
        args = ",".join(f"{p:g}" for p in self.params)
        return f"{self.kind.value}({args})"

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.support[0] + self.support[1])

    @property
    def half_width(self) -> float:
        return 0.5 * (self.support[1] - self.support[0])

    @property
    def hard_edges(self) -> tuple[bool, bool]:
        """Whether each support endpoint coincides with the potential domain."""
        lo, hi = self.support
        blo, bhi = self.domain
        return (math.isclose(lo, blo, abs_tol=1e-14), math.isclose(hi, bhi, abs_tol=1e-14))

    def density(self, x):
        if self.density_fn is None:
            raise UnsupportedOperation(f"{self.name} has no density evaluator")
        x = np.asarray(x, dtype=float)
        lo, hi = self.support
        inside = (x > lo) & (x < hi)
        out = np.zeros_like(x)
        if np.any(inside):
            out[inside] = self.density_fn(x[inside])
        return out if out.ndim else float(out)

    def potential(self, x):
        if self.potential_fn is None:
            raise UnsupportedOperation(f"{self.name} has no potential")
        x = np.asarray(x, dtype=float)
        blo, bhi = self.domain
        out = np.full_like(x, np.inf)
        ok = (x >= blo) & (x <= bhi)
        if np.any(ok):
            with np.errstate(divide="ignore"):
                out[ok] = self.potential_fn(x[ok])
        return out if out.ndim else float(out)

    def s_factor(self, x):
        if self.s_factor_fn is None:
            raise UnsupportedOperation(f"{self.name} has no off-criticality factor")
        x = np.asarray(x, dtype=float)
        out = self.s_factor_fn(x)
        return out if np.ndim(out) else float(out)


def semicircle() -> ReferenceLaw:
    return ReferenceLaw(
        LawKind.SC,
        (),
        (-2.0, 2.0),
        (-math.inf, math.inf),
        density_fn=lambda x: np.sqrt(np.maximum(4.0 - x * x, 0.0)) / (2 * math.pi),
        potential_fn=lambda x: 0.5 * x * x,
        s_factor_fn=lambda x: np.ones_like(x),
    )


def mp_edges(tau: float) -> tuple[float, float]:
    s = math.sqrt(tau)
    return (1.0 - s) ** 2, (1.0 + s) ** 2


def marchenko_pastur(tau: float) -> ReferenceLaw:
    if not 0.0 < tau <= 1.0:
        raise ValueError(f"tau must lie in (0, 1], got {tau}")
    lo, hi = mp_edges(tau)

    def dens(x):
        return np.sqrt(np.maximum((hi - x) * (x - lo), 0.0)) / (2 * math.pi * tau * x)

    def pot(x):
        if tau == 1.0:
            return x.copy()
        return x / tau - (1.0 / tau - 1.0) * np.log(x)

    return ReferenceLaw(
        LawKind.MP,
        (tau,),
        (lo, hi),
        (0.0, math.inf),
        density_fn=dens,
        potential_fn=pot,
        s_factor_fn=lambda x: 1.0 / (tau * x),
    )


def kmk_edges(kappa1: float, kappa2: float) -> tuple[float, float]:
    c = 2.0 + kappa1 + kappa2
    root = 4.0 * math.sqrt((1 + kappa1) * (1 + kappa2) * (1 + kappa1 + kappa2))
    shift = kappa2**2 - kappa1**2
    lo = 0.5 + (shift - root) / (2 * c * c)
    hi = 0.5 + (shift + root) / (2 * c * c)
    # hard edges are exact; keep them off rounding noise
    if kappa2 == 0.0:
        lo = 0.0
    if kappa1 == 0.0:
        hi = 1.0
    return lo, hi


def kesten_mckay(kappa1: float, kappa2: float) -> ReferenceLaw:
    if kappa1 < 0 or kappa2 < 0:
        raise ValueError("kappa1, kappa2 must be nonnegative")
    lo, hi = kmk_edges(kappa1, kappa2)
    c = 2.0 + kappa1 + kappa2

    def dens(x):
        return c * np.sqrt(np.maximum((hi - x) * (x - lo), 0.0)) / (2 * math.pi * x * (1 - x))

    def pot(x):
        out = np.zeros_like(x)
        if kappa2:
            out -= kappa2 * np.log(x)
        if kappa1:
            out -= kappa1 * np.log1p(-x)
        return out

    return ReferenceLaw(
        LawKind.KMK,
        (kappa1, kappa2),
        (lo, hi),
        (0.0, 1.0),
        density_fn=dens,
        potential_fn=pot,
        s_factor_fn=lambda x: c / (x * (1 - x)),
    )


def arcsine01() -> ReferenceLaw:
    law = kesten_mckay(0.0, 0.0)
    return ReferenceLaw(
        LawKind.ARCSINE01,
        (),
        law.support,
        law.domain,
        density_fn=lambda x: 1.0 / (math.pi * np.sqrt(x * (1 - x))),
        potential_fn=law.potential_fn,
        s_factor_fn=law.s_factor_fn,
    )


def general_v(
    potential: DensityFn,
    support: tuple[float, float],
    domain: tuple[float, float],
    density: DensityFn | None = None,
    s_factor: DensityFn | None = None,
) -> ReferenceLaw:
    return ReferenceLaw(
        LawKind.GENERAL_V,
        (),
        (float(support[0]), float(support[1])),
        (float(domain[0]), float(domain[1])),
        density_fn=density,
        potential_fn=potential,
        s_factor_fn=s_factor,
    )


def law_from_name(kind: str, params: Sequence[float] = ()) -> ReferenceLaw:
    key = kind.strip().lower()
    if key == "sc":
        return semicircle()
    if key == "mp":
        return marchenko_pastur(float(params[0]))
    if key == "kmk":
        return kesten_mckay(float(params[0]), float(params[1]))
    if key in ("arcsine01", "arcsine"):
        return arcsine01()
    raise UnsupportedOperation(f"unknown law {kind!r}")


def density(law: ReferenceLaw, x):
    return law.density(x)


def support_endpoints(law: ReferenceLaw) -> tuple[float, float]:
    return law.support


@dataclass(frozen=True)
class Ensemble:
    """One of the three classical ensembles and its equilibrium law."""

    name: str
    tau: float = 1.0
    kappa1: float = 0.0
    kappa2: float = 0.0

    def __post_init__(self):
        if self.name not in ("hermite", "laguerre", "jacobi"):
            raise ValueError(f"unknown ensemble {self.name!r}")
        if self.name == "laguerre" and not 0 < self.tau <= 1:
            raise ValueError(f"tau must lie in (0, 1], got {self.tau}")
        if self.name == "jacobi" and (self.kappa1 < 0 or self.kappa2 < 0):
            raise ValueError("kappa1, kappa2 must be nonnegative")

    @classmethod
    def hermite(cls) -> Ensemble:
        return cls("hermite")

    @classmethod
    def laguerre(cls, tau: float) -> Ensemble:
        return cls("laguerre", tau=tau)

    @classmethod
    def jacobi(cls, kappa1: float, kappa2: float) -> Ensemble:
        return cls("jacobi", kappa1=kappa1, kappa2=kappa2)

    @property
    def law(self) -> ReferenceLaw:
        if self.name == "hermite":
            return semicircle()
        if self.name == "laguerre":
            return marchenko_pastur(self.tau)
        return kesten_mckay(self.kappa1, self.kappa2)

    @property
    def label(self) -> str:
        if self.name == "hermite":
            return "Hermite"
        if self.name == "laguerre":
            return f"Laguerre({self.tau:g})"
        return f"Jacobi({self.kappa1:g},{self.kappa2:g})"


# --------------------------------------------------------------------------
# measures


@dataclass(frozen=True)
class DiscreteMeasure:
    nodes: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        if nodes.ndim != 1 or nodes.shape != weights.shape:
            raise ValueError("nodes and weights must be 1-d arrays of equal length")
        if nodes.size > 1 and not np.all(np.diff(nodes) > 0):
            raise ValueError("nodes must be strictly increasing")
        if np.any(weights < 0):
            # exact zeros occur only by underflow of tiny spectral weights
            raise ValueError("weights must be nonnegative")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def from_points(cls, nodes, weights) -> DiscreteMeasure:
        nodes = np.asarray(nodes, dtype=float)
        weights = np.asarray(weights, dtype=float)
        order = np.argsort(nodes, kind="stable")
        return cls(nodes[order], weights[order])

    @property
    def size(self) -> int:
        return int(self.nodes.size)

    @property
    def total_mass(self) -> float:
        return float(self.weights.sum())


def quad_moments(mu: DiscreteMeasure, max_order: int) -> np.ndarray:
    if max_order < 0:
        raise ValueError("max_order must be >= 0")
    powers = np.vander(mu.nodes, max_order + 1, increasing=True)
    return mu.weights @ powers


@dataclass(frozen=True)
class MeasureS1:
    """A probability measure in S1: a.c. part on ``support`` plus outliers.

    ``atoms_plus`` is ordered from the outermost atom inwards
    (``lambda_1+ > lambda_2+ > ... > alpha+``), likewise ``atoms_minus``.
    ``spec`` is the JSON description used for serialization, when the
    measure came from a built-in family.
    """

    support: tuple[float, float]
    ac_density: DensityFn | None = field(repr=False, compare=False)
    ac_mass: float = 1.0
    atoms_plus: tuple[tuple[float, float], ...] = ()
    atoms_minus: tuple[tuple[float, float], ...] = ()
    interior_singular_mass: float = 0.0
    dropped_atom_mass: float = 0.0
    label: str = ""
    spec: dict | None = field(default=None, compare=False)
    edge_atoms: tuple[tuple[float, float], ...] = ()  # atoms sitting exactly on a support endpoint (also in interior_singular_mass)

    @property
    def interior_singular_flag(self) -> bool:
        return self.interior_singular_mass > 0

    @property
    def total_mass(self) -> float:
        return (
            self.ac_mass
            + self.interior_singular_mass
            + sum(g for _, g in self.atoms_plus)
            + sum(g for _, g in self.atoms_minus)
            + self.dropped_atom_mass
        )

    def density(self, x):
        if self.ac_density is None:
            raise InvalidMeasure(f"measure {self.label!r} has no density evaluator")
        x = np.asarray(x, dtype=float)
        out = np.asarray(self.ac_density(x), dtype=float)
        return out if out.ndim else float(out)

    def with_atoms(self, atoms_plus=(), atoms_minus=()) -> MeasureS1:
        return MeasureS1(
            self.support,
            self.ac_density,
            self.ac_mass,
            tuple(atoms_plus),
            tuple(atoms_minus),
            self.interior_singular_mass,
            self.dropped_atom_mass,
            self.label,
            None,
            self.edge_atoms,
        )

    def membership_problems(self, law: ReferenceLaw | None = None, tol: float = 1e-8) -> list[str]:
        lo, hi = self.support
        problems = []
        plus = [lam for lam, _ in self.atoms_plus]
        minus = [lam for lam, _ in self.atoms_minus]
        if any(lam <= hi for lam in plus):
            problems.append("atom_plus inside the support")
        if any(lam >= lo for lam in minus):
            problems.append("atom_minus inside the support")
        if any(p <= q for p, q in zip(plus, plus[1:])):
            problems.append("atoms_plus not strictly decreasing toward alpha+")
        if any(p >= q for p, q in zip(minus, minus[1:])):
            problems.append("atoms_minus not strictly increasing toward alpha-")
        if any(g <= 0 for _, g in self.atoms_plus + self.atoms_minus):
            problems.append("nonpositive atom weight")
        if not 0.0 <= self.ac_mass <= 1.0 + tol:
            problems.append(f"ac_mass {self.ac_mass} outside [0, 1]")
        if abs(self.total_mass - 1.0) > tol:
            problems.append(f"total mass {self.total_mass:.12g} != 1")
        if law is not None:
            blo, bhi = law.domain
            if any(lam < blo or lam > bhi for lam in plus + minus):
                problems.append("atom outside the potential domain")
        return problems

    def validate(self, law: ReferenceLaw | None = None, tol: float = 1e-8) -> None:
        problems = self.membership_problems(law, tol)
        if problems:
            raise InvalidMeasure("; ".join(problems))


def _split_atoms(atoms, support, n_max):
    lo, hi = support
    plus = sorted(((float(l), float(g)) for l, g in atoms if l > hi), reverse=True)
    minus = sorted((float(l), float(g)) for l, g in atoms if l < lo)
    inner = [(float(l), float(g)) for l, g in atoms if lo <= l <= hi]
    edge = tuple((l, g) for l, g in inner if _at(l, lo) or _at(l, hi))
    dropped = sum(g for _, g in plus[n_max:]) + sum(g for _, g in minus[n_max:])
    return tuple(plus[:n_max]), tuple(minus[:n_max]), inner, dropped, edge


def _at(x: float, edge: float) -> bool:
    return abs(x - edge) <= 1e-12 * max(1.0, abs(edge))


def measure_from_parts(
    support: tuple[float, float],
    ac_density: DensityFn | None,
    ac_mass: float,
    atoms: Sequence[tuple[float, float]] = (),
    *,
    label: str = "",
    spec: dict | None = None,
    n_max: int = N_MAX_ATOMS,
) -> MeasureS1:
    """Assemble an S1 measure, sorting atoms to either side of ``support``.

    Atoms inside the support are booked as interior singular mass.  At most
    ``n_max`` atoms per side are kept (the outermost ones); the mass of the
    rest is kept in ``dropped_atom_mass`` so callers can bound the tail.
    """
    plus, minus, inner, dropped, edge = _split_atoms(atoms, support, n_max)
    return MeasureS1(
        (float(support[0]), float(support[1])),
        ac_density,
        float(ac_mass),
        plus,
        minus,
        float(sum(g for _, g in inner)),
        float(dropped),
        label,
        spec,
        edge,
    )


def from_law(law: ReferenceLaw) -> MeasureS1:
    spec = {"kind": law.kind.value, "params": list(law.params)}
    return measure_from_parts(law.support, law.density, 1.0, label=law.name, spec=spec)


def polynomial_modulated(law: ReferenceLaw, coeffs: Sequence[float]) -> MeasureS1:
    """Density ``p(x) f_V(x)`` renormalized to mass one; ``p >= 0`` on the support."""
    poly = np.polynomial.Polynomial(coeffs)
    nodes, weights = _theta_rule(law.support, 512)
    vals = poly(nodes)
    if np.any(vals < 0):
        raise InvalidMeasure("modulating polynomial is negative on the support")
    mass = float(np.sum(weights * vals * law.density(nodes)))

    def dens(x):
        return poly(x) * law.density(x) / mass

    spec = {"kind": "poly-modulated", "params": {"law": law.kind.value, "law_params": list(law.params), "coeffs": list(coeffs)}}
    return measure_from_parts(law.support, dens, 1.0, label=f"poly*{law.name}", spec=spec)


def rank_one_hermite(c: float) -> MeasureS1:
    """Spectral measure of the free Jacobi matrix with ``b_1 = c``.

    The a.c. density is ``(1/pi) (sqrt(4-x^2)/2) / ((c-x/2)^2 + (4-x^2)/4)``;
    for ``|c| > 1`` there is one outlier at ``c + 1/c`` of mass ``1 - 1/c^2``.
    """
    c = float(c)

    def dens(x):
        x = np.asarray(x, dtype=float)
        q = np.maximum(4.0 - x * x, 0.0)
        return (np.sqrt(q) / 2) / ((c - x / 2) ** 2 + q / 4) / math.pi

    atoms = []
    ac_mass = 1.0
    if abs(c) > 1:
        atoms.append((c + 1 / c, 1 - 1 / c**2))
        ac_mass = 1 / c**2
    spec = {"kind": "rank-one", "params": {"c": c}}
    return measure_from_parts((-2.0, 2.0), dens, ac_mass, atoms, label=f"rank-one(c={c:g})", spec=spec)


def bernstein_szego01(r: float) -> MeasureS1:
    """Pushforward to [0, 1] of the circle measure with ``alpha_0 = r``, others 0.

    On the circle the density is ``(1 - r^2)/|1 - r e^{i theta}|^2``; under
    ``theta -> 1/2 - cos(theta)/2`` it becomes
    ``(1 - r^2) / (pi ((1-r)^2 + 4 r x) sqrt(x (1-x)))``.
    """
    r = float(r)
    if not -1 < r < 1:
        raise ValueError("r must lie in (-1, 1)")

    def dens(x):
        x = np.asarray(x, dtype=float)
        inside = (x > 0) & (x < 1)
        out = np.zeros_like(x)
        xi = x[inside]
        out[inside] = (1 - r * r) / (math.pi * ((1 - r) ** 2 + 4 * r * xi) * np.sqrt(xi * (1 - xi)))
        return out

    spec = {"kind": "bernstein-szego", "params": {"r": r}}
    return measure_from_parts((0.0, 1.0), dens, 1.0, label=f"bernstein-szego(r={r:g})", spec=spec)


def atom_at_zero_mp(tau: float) -> MeasureS1:
    """``(1 - tau) delta_0 + tau MP_tau``: z-chain ``(tau, 1, tau, 1, ...)``."""
    law = marchenko_pastur(tau)

    def dens(x):
        return tau * law.density(x)

    atoms = [(0.0, 1.0 - tau)] if tau < 1 else []
    spec = {"kind": "atom-at-zero", "params": {"tau": tau}}
    return measure_from_parts(law.support, dens, tau, atoms, label=f"atom-at-zero(tau={tau:g})", spec=spec)


# --------------------------------------------------------------------------
# quadrature


def _gl_panels(lo: float, hi: float, panels: int, order: int) -> tuple[np.ndarray, np.ndarray]:
    t, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(lo, hi, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * t[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def _theta_rule(support, n_points: int, panels: int = 1):
    """Nodes/weights for ``int_I g(x) dx`` via ``x = m + r cos(theta)``."""
    lo, hi = support
    m, r = 0.5 * (lo + hi), 0.5 * (hi - lo)
    order = max(n_points // panels, 1)
    theta, w = _gl_panels(0.0, math.pi, panels, order)
    return m + r * np.cos(theta), w * r * np.sin(theta)


def theta_quadrature(support, panels: int = DEFAULT_PANELS, order: int = DEFAULT_ORDER):
    """Composite Gauss-Legendre in ``theta`` for integrals over ``support``.

    Returns ``(x, dx_weights)``; an integrand with square-root behaviour at
    both edges becomes smooth in ``theta``.
    """
    return _theta_rule(support, panels * order, panels)


def discretize(law: ReferenceLaw, n: int) -> DiscreteMeasure:
    """``n``-point discretization of ``law`` from its density (not its coefficients)."""
    x, w = _theta_rule(law.support, n)
    mass = w * law.density(x)
    mass = mass / mass.sum()
    return DiscreteMeasure.from_points(x, mass)


def integrate_density(law: ReferenceLaw, panels: int = 512, order: int = 8, moment: int = 0) -> float:
    x, w = theta_quadrature(law.support, panels, order)
    return float(np.sum(w * law.density(x) * x**moment))


@dataclass(frozen=True)
class KLResult:
    value: float
    raw: float
    cap_triggered: bool


def kl_reverse_details(
    law: ReferenceLaw,
    mu: MeasureS1,
    panels: int = DEFAULT_PANELS,
    order: int = DEFAULT_ORDER,
    cap: float = KL_CAP,
) -> KLResult:
    if mu.ac_density is None:
        raise InvalidMeasure("reverse KL needs the a.c. density of mu")
    x, w = theta_quadrature(law.support, panels, order)
    fv = law.density(x)
    f = np.asarray(mu.density(x), dtype=float)
    active = fv > 0
    if np.any(f[active] <= 0):
        return KLResult(math.inf, math.inf, False)
    with np.errstate(divide="ignore"):
        integrand = np.where(active, fv * (np.log(np.where(active, fv, 1.0)) - np.log(np.where(active, f, 1.0))), 0.0)
    raw = float(np.sum(w * integrand))
    if not math.isfinite(raw) or raw > cap:
        return KLResult(math.inf, raw, math.isfinite(raw))
    return KLResult(max(raw, 0.0) if raw > -1e-12 else raw, raw, False)


def kl_reverse(law: ReferenceLaw, mu: MeasureS1, panels: int = DEFAULT_PANELS, order: int = DEFAULT_ORDER, cap: float = KL_CAP) -> float:
    """``K(mu_V | mu) = int f_V log(f_V / f)`` over the support of ``law``.

    Atoms and interior singular mass of ``mu`` do not enter.  Returns
    ``inf`` when ``f`` vanishes where ``f_V > 0`` or the value exceeds ``cap``.
    """
    return kl_reverse_details(law, mu, panels, order, cap).value


# --------------------------------------------------------------------------
# serialization


def measure_to_json(mu: MeasureS1) -> dict:
    spec = mu.spec or {"kind": "custom", "params": {}}
    return {
        "kind": spec["kind"],
        "params": spec["params"],
        "atoms_plus": [[l, g] for l, g in mu.atoms_plus],
        "atoms_minus": [[l, g] for l, g in mu.atoms_minus],
        "ac_mass": mu.ac_mass,
    }


def measure_from_json(doc: dict) -> MeasureS1:
    """Rebuild a built-in family from its JSON document.

    The family (``kind`` + ``params``) fixes the density; stored atom lists
    and ``ac_mass`` are checked against the rebuilt measure.
    """
    kind = doc["kind"]
    params = doc.get("params", {})
    mu = measure_from_family(kind, params)
    for key in ("atoms_plus", "atoms_minus"):
        if key in doc:
            stored = [tuple(map(float, p)) for p in doc[key]]
            have = list(getattr(mu, key))
            if len(stored) != len(have) or not np.allclose(np.array(stored).reshape(-1, 2), np.array(have).reshape(-1, 2), rtol=1e-9, atol=1e-12):
                raise InvalidMeasure(f"{key} in document disagree with family {kind!r}")
    if "ac_mass" in doc and abs(float(doc["ac_mass"]) - mu.ac_mass) > 1e-9:
        raise InvalidMeasure("ac_mass in document disagrees with family")
    return mu


def measure_from_family(kind: str, params) -> MeasureS1:
    key = kind.lower()
    if isinstance(params, (list, tuple)):
        params = list(params)
    if key in ("sc", "mp", "kmk", "arcsine01"):
        seq = params if isinstance(params, list) else [params[k] for k in sorted(params)]
        return from_law(law_from_name(key, seq))
    if key == "rank-one":
        return rank_one_hermite(float(params["c"]))
    if key == "bernstein-szego":
        return bernstein_szego01(float(params["r"]))
    if key == "atom-at-zero":
        return atom_at_zero_mp(float(params["tau"]))
    if key == "poly-modulated":
        law = law_from_name(params["law"], params.get("law_params", []))
        return polynomial_modulated(law, params["coeffs"])
    if key == "finite-perturbation":
        from .jacobi import JacobiCoefficients, measure_from_finite_perturbation

        law = law_from_name(params["law"], params.get("law_params", []))
        j = JacobiCoefficients(np.asarray(params["a"], float), np.asarray(params["b"], float))
        return measure_from_finite_perturbation(law, j)
    raise UnsupportedOperation(f"unknown measure family {kind!r}")
