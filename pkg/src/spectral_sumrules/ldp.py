"""Numerical probes of the large deviation statements at desk scale."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import stats

from .ensembles import EnsembleSpec, extreme_eigenvalues
from .measures import DiscreteMeasure, ReferenceLaw
from .sumrules import f_minus, f_plus, rate_from_effective_potential


class PreconditionError(ValueError):
    pass


def logarithmic_energy(mu: DiscreteMeasure, potential: Callable) -> float:
    """``sum_i w_i V(x_i) - sum_{i != j} w_i w_j log|x_i - x_j|``.

    The diagonal ``i = j`` is left out, the usual discretization of the
    double integral.
    """
    x, w = mu.nodes, mu.weights
    diff = np.abs(x[:, None] - x[None, :])
    np.fill_diagonal(diff, 1.0)
    if np.any(diff == 0):
        raise ValueError("coincident nodes: the discrete energy is infinite")
    pair = float(w @ np.log(diff) @ w)
    return float(np.sum(w * np.asarray(potential(x), dtype=float))) - pair


@dataclass(frozen=True)
class RateProbeReport:
    x: float
    side: str
    n_ladder: tuple[int, ...]
    draws: int
    hits: tuple[int, ...]
    tail_probs: tuple[float, ...]
    ci_low: tuple[float, ...]
    ci_high: tuple[float, ...]
    rate_estimates: tuple[float, ...]
    censored: tuple[bool, ...]
    target_rate: float
    within_factor3: bool
    approaching: bool
    tail_monotone: bool
    verdict: str
    beta: float = 2.0
    notes: tuple[str, ...] = field(default=())

    def to_json(self) -> dict:
        def f(v):
            return v if math.isfinite(v) else ("inf" if v > 0 else "-inf")

        rows = [
            {
                "n": n,
                "hits": h,
                "p_hat": p,
                "ci_lo": lo,
                "ci_hi": hi,
                "rate_estimate": f(r),
                "censored": c,
            }
            for n, h, p, lo, hi, r, c in zip(
                self.n_ladder, self.hits, self.tail_probs, self.ci_low, self.ci_high, self.rate_estimates, self.censored
            )
        ]
        return {
            "x": self.x,
            "side": self.side,
            "draws": self.draws,
            "beta": self.beta,
            "rows": rows,
            "target_rate": f(self.target_rate),
            "within_factor3": self.within_factor3,
            "approaching": self.approaching,
            "tail_monotone": self.tail_monotone,
            "verdict": self.verdict,
            "notes": list(self.notes),
        }

    CSV_FIELDS = ("n", "p_hat", "ci_lo", "ci_hi", "rate_estimate", "target")

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.CSV_FIELDS)
        for n, p, lo, hi, r in zip(self.n_ladder, self.tail_probs, self.ci_low, self.ci_high, self.rate_estimates):
            w.writerow([n, p, lo, hi, r, self.target_rate])
        return buf.getvalue()


def clopper_pearson(hits: int, trials: int, level: float = 0.95) -> tuple[float, float]:
    ci = stats.binomtest(hits, trials).proportion_ci(confidence_level=level, method="exact")
    return float(ci.low), float(ci.high)


def probe_extreme_rate(
    spec: EnsembleSpec,
    n_ladder: Sequence[int],
    x: float,
    side: str = "plus",
    draws: int = 5000,
) -> RateProbeReport:
    """Monte Carlo estimate of ``P(lambda_1^+ > x)`` (or ``P(lambda_1^- < x)``) along an ``n``-ladder.

    Every rung uses the same seed, so the draws are coupled across ``n``.
    A rung with no hits is censored: its rate estimate is the lower bound
    ``-log(CI upper)/(beta' n)``.  The verdict is deliberately weak: the last
    uncensored estimate lies within a factor 3 of the target, or the
    estimates move monotonically toward it.
    """
    if side not in ("plus", "minus"):
        raise ValueError("side must be 'plus' or 'minus'")
    if draws < 100:
        raise PreconditionError("need at least 100 draws")
    law: ReferenceLaw = spec.ensemble.law
    lo, hi = law.support
    if (side == "plus" and x <= hi) or (side == "minus" and x >= lo):
        raise PreconditionError(f"x = {x} is not strictly outside the support [{lo}, {hi}] on the {side} side")
    target = f_plus(law, x) if side == "plus" else f_minus(law, x)
    bp = spec.beta_prime
    hits, probs, cis_lo, cis_hi, rates, censored = [], [], [], [], [], []
    for n in n_ladder:
        lmin, lmax = extreme_eigenvalues(spec.with_n(int(n)), draws)
        h = int(np.sum(lmax > x)) if side == "plus" else int(np.sum(lmin < x))
        p = h / draws
        c_lo, c_hi = clopper_pearson(h, draws)
        hits.append(h)
        probs.append(p)
        cis_lo.append(c_lo)
        cis_hi.append(c_hi)
        if h == 0:
            rates.append(-math.log(c_hi) / (bp * n))
            censored.append(True)
        else:
            rates.append(-math.log(p) / (bp * n))
            censored.append(False)
    finite = [r for r, c in zip(rates, censored) if not c]
    within = bool(finite) and target / 3 <= finite[-1] <= 3 * target
    gaps = [abs(r - target) for r in finite]
    approaching = len(gaps) >= 2 and all(b <= a for a, b in zip(gaps, gaps[1:]))
    # nonincreasing tail fractions, allowing overlap of consecutive confidence intervals
    monotone = all(p2 <= p1 or cis_lo[i + 1] <= cis_hi[i] for i, (p1, p2) in enumerate(zip(probs, probs[1:])))
    notes = []
    if any(censored):
        notes.append("rungs without hits report a censored lower bound on the rate")
    verdict = "consistent" if (within or approaching) else "inconsistent"
    return RateProbeReport(
        float(x),
        side,
        tuple(int(n) for n in n_ladder),
        draws,
        tuple(hits),
        tuple(probs),
        tuple(cis_lo),
        tuple(cis_hi),
        tuple(rates),
        tuple(censored),
        float(target),
        within,
        approaching,
        monotone,
        verdict,
        spec.beta,
        tuple(notes),
    )


@dataclass(frozen=True)
class RateCurveRow:
    x: float
    direct: float
    effective: float
    discrepancy: float


def rate_curve(law: ReferenceLaw, side: str, grid: Sequence[float]) -> list[RateCurveRow]:
    """Outlier rate on ``grid`` by direct quadrature and via the effective potential."""
    direct_fn = f_plus if side == "plus" else f_minus
    rows = []
    for x in grid:
        d = direct_fn(law, x)
        e = rate_from_effective_potential(law, x, side)
        if math.isinf(d) and math.isinf(e):
            gap = 0.0
        elif math.isinf(d) or math.isinf(e):
            gap = math.inf
        else:
            gap = abs(d - e)
        rows.append(RateCurveRow(float(x), d, e, gap))
    return rows
