"""Symmetric-functional estimation from count data and fitted mixtures.

Targets take the additive form G(P) = sum_i g(p_i).  Estimators provided:
the mixture plug-in k * sum_j w_j g(r_j), a combined estimator that applies
the plug-in on small-rate cells and a bias-corrected empirical value on the
rest, the raw empirical plug-in, the Miller-Madow entropy baseline, and the
alternating-series unseen-categories baseline.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import xlogy

from .base import CountData, DomainError, MixingDistribution
from .npmle import (
    DEFAULT_MAX_ITER,
    DEFAULT_TOL,
    LocalizedConfig,
    LocalizedFit,
    build_grid,
    fit_localized,
    fit_npmle,
)

__all__ = [
    "EstimateReport",
    "FunctionalSpec",
    "bias_corrected_g",
    "discovery_curve",
    "empirical_plugin",
    "estimate",
    "estimate_combined",
    "g_eval",
    "good_turing_unseen",
    "miller_madow",
    "plugin",
    "unseen_plugin",
]

KINDS = ("entropy", "power_sum", "renyi", "support_size", "unseen")
METHODS = ("plugin", "localized", "empirical", "miller-madow", "good-turing")

POWER_SUM_LOG_GUARD = 1e-300


@dataclass(frozen=True)
class FunctionalSpec:
    """Which symmetric functional to estimate, with its parameters.

    ``alpha`` parametrizes power sums (0 < alpha < 1) and Renyi entropy
    (alpha > 0, alpha != 1, estimated through the power sum); ``min_mass`` is
    the declared smallest category mass for support-size estimation (defaults
    to 1/k at estimation time); ``horizon`` is the look-ahead factor t of the
    unseen-categories functional.  ``bounds`` overrides the default clamping
    interval.
    """

    kind: str
    alpha: Optional[float] = None
    min_mass: Optional[float] = None
    horizon: Optional[float] = None
    bounds: Optional[tuple[float, float]] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown functional kind {self.kind!r}")
        if self.kind == "power_sum":
            if self.alpha is None or not 0.0 < self.alpha < 1.0:
                raise DomainError("power sum requires alpha in (0, 1)")
        if self.kind == "renyi":
            if self.alpha is None or self.alpha <= 0.0 or self.alpha == 1.0:
                raise DomainError("Renyi entropy requires alpha > 0, alpha != 1")
        if self.kind == "support_size" and self.min_mass is not None:
            if not 0.0 < self.min_mass <= 1.0:
                raise DomainError("min_mass must lie in (0, 1]")
        if self.kind == "unseen":
            if self.horizon is None or self.horizon <= 0.0:
                raise DomainError("unseen functional requires a horizon t > 0")

    @classmethod
    def entropy(cls) -> "FunctionalSpec":
        return cls("entropy")

    @classmethod
    def power_sum(cls, alpha: float) -> "FunctionalSpec":
        return cls("power_sum", alpha=alpha)

    @classmethod
    def renyi(cls, alpha: float) -> "FunctionalSpec":
        return cls("renyi", alpha=alpha)

    @classmethod
    def support_size(cls, min_mass: Optional[float] = None) -> "FunctionalSpec":
        return cls("support_size", min_mass=min_mass)

    @classmethod
    def unseen(cls, horizon: float) -> "FunctionalSpec":
        return cls("unseen", horizon=horizon)

    def resolved_bounds(self, k: int) -> tuple[float, float]:
        """Clamping interval: explicit bounds if given, else the natural range."""
        if self.bounds is not None:
            return self.bounds
        if self.kind in ("entropy", "renyi"):
            return (0.0, math.log(k))
        if self.kind == "power_sum":
            return (0.0, k ** (1.0 - self.alpha))
        return (0.0, float(k))

    def resolved_min_mass(self, k: int) -> float:
        if self.min_mass is not None:
            return self.min_mass
        return 1.0 / k


@dataclass(frozen=True)
class EstimateReport:
    """An estimate plus how it was produced.

    ``raw`` is the value before clamping to ``bounds``; ``parts`` splits the
    combined estimator into its small-count and large-count contributions.
    """

    value: float
    method: str
    parts: Optional[tuple[float, float]] = None
    raw: Optional[float] = None
    bounds: Optional[tuple[float, float]] = None
    diagnostics: Optional[object] = None


def _clamped(raw: float, bounds: tuple[float, float]) -> float:
    return min(max(raw, bounds[0]), bounds[1])


def g_eval(spec: FunctionalSpec, x, n: Optional[int] = None):
    """Per-category target function g at rate ``x`` in [0, 1].

    Entropy: -x log x; power sum (and Renyi, which is estimated through the
    power sum): x^alpha; support size: 1{x > 0}; unseen categories:
    e^{-n x} (1 - e^{-t n x}), which needs the concentration ``n``.
    Values at 0 follow the continuous extensions (all zero).
    """
    x = np.asarray(x, dtype=float)
    if spec.kind == "entropy":
        out = -xlogy(x, x)
    elif spec.kind in ("power_sum", "renyi"):
        out = x**spec.alpha
    elif spec.kind == "support_size":
        out = (x > 0).astype(float)
    else:
        if n is None:
            raise DomainError("the unseen functional needs the concentration n")
        nx = n * x
        out = np.exp(-nx) * (-np.expm1(-spec.horizon * nx))
    if out.ndim == 0:
        return float(out)
    return out


def plugin(
    spec: FunctionalSpec,
    mixing: MixingDistribution,
    k: int,
    n: Optional[int] = None,
    diagnostics: Optional[object] = None,
) -> EstimateReport:
    """Plug-in estimate k * sum_j w_j g(r_j), clamped to the functional bounds.

    Renyi entropy is computed as log(power-sum plug-in)/(1 - alpha) with the
    power sum clamped away from zero before the log.
    """
    base = float(k * mixing.expectation(g_eval(spec, mixing.atoms, n)))
    raw = _transform(spec, base, k)
    bounds = spec.resolved_bounds(k)
    return EstimateReport(
        value=_clamped(raw, bounds),
        method="plugin",
        raw=raw,
        bounds=bounds,
        diagnostics=diagnostics,
    )


def _transform(spec: FunctionalSpec, additive_value: float, k: int) -> float:
    """Map the additive sum to the reported scale (log transform for Renyi)."""
    if spec.kind != "renyi":
        return additive_value
    alpha = spec.alpha
    lo = k ** (-(1.0 - alpha)) * POWER_SUM_LOG_GUARD
    hi = max(1.0, k ** (1.0 - alpha))
    return math.log(min(max(additive_value, lo), hi)) / (1.0 - alpha)


def bias_corrected_g(spec: FunctionalSpec, p_hat, n: int):
    """Second-order bias correction g(x) - (x / 2n) g''(x) for positive rates.

    Entropy becomes g + 1/(2n); the power sum picks up
    -(alpha (alpha - 1) / 2n) x^{alpha - 1}; the support-size indicator is
    left unchanged.
    """
    x = np.asarray(p_hat, dtype=float)
    if np.any(x <= 0):
        raise DomainError("bias correction is defined for positive rates only")
    if spec.kind == "entropy":
        out = -xlogy(x, x) + 1.0 / (2.0 * n)
    elif spec.kind in ("power_sum", "renyi"):
        a = spec.alpha
        out = x**a - (a * (a - 1.0) / (2.0 * n)) * x ** (a - 1.0)
    elif spec.kind == "support_size":
        out = np.ones_like(x)
    else:
        t = spec.horizon
        nx = n * x
        g2 = n**2 * np.exp(-nx) * (1.0 - (1.0 + t) ** 2 * np.exp(-t * nx))
        out = np.exp(-nx) * (-np.expm1(-t * nx)) - (x / (2.0 * n)) * g2
    if out.ndim == 0:
        return float(out)
    return out


def estimate_combined(
    counts: CountData, spec: FunctionalSpec, localized: LocalizedFit
) -> EstimateReport:
    """Combine the localized plug-in with bias-corrected large-count terms.

    value = clamp(|J| * sum_j w_j g(r_j) + sum_{i not in J} g_corrected(p_hat_i)),
    where J is the small-rate partition of the localized fit.
    """
    n, k = counts.n, counts.k
    if localized.empty:
        small = 0.0
    else:
        mixing = localized.fit.mixing
        small = float(
            localized.n_small * mixing.expectation(g_eval(spec, mixing.atoms, n))
        )
    if localized.large_counts.size:
        large = float(np.sum(bias_corrected_g(spec, localized.large_counts / n, n)))
    else:
        large = 0.0
    raw = _transform(spec, small + large, k)
    bounds = spec.resolved_bounds(k)
    return EstimateReport(
        value=_clamped(raw, bounds),
        method="localized",
        parts=(small, large),
        raw=raw,
        bounds=bounds,
        diagnostics=localized.fit,
    )


def empirical_plugin(counts: CountData, spec: FunctionalSpec) -> EstimateReport:
    """Plug-in at the empirical rates: clamp(sum_i g(N_i / n))."""
    positive = counts.counts[counts.counts > 0]
    raw = _transform(
        spec, float(np.sum(g_eval(spec, positive / counts.n, counts.n))), counts.k
    )
    bounds = spec.resolved_bounds(counts.k)
    return EstimateReport(
        value=_clamped(raw, bounds), method="empirical", raw=raw, bounds=bounds
    )


def miller_madow(counts: CountData, spec: Optional[FunctionalSpec] = None) -> EstimateReport:
    """Classical entropy baseline: empirical entropy + (k_+ - 1) / (2 sum_i N_i)."""
    if spec is not None and spec.kind != "entropy":
        raise DomainError("the Miller-Madow correction applies to entropy only")
    total = int(counts.counts.sum())
    positive = counts.counts[counts.counts > 0]
    if total == 0:
        return EstimateReport(value=0.0, method="miller-madow", raw=0.0)
    p = positive / total
    raw = float(np.sum(-xlogy(p, p))) + (positive.size - 1) / (2.0 * total)
    return EstimateReport(value=raw, method="miller-madow", raw=raw)


def good_turing_unseen(counts: CountData, horizon: float) -> EstimateReport:
    """Alternating-series unseen-categories baseline  -sum_j (-t)^j phi_j.

    The series is truncated at the largest observed count.  It is reliable
    for t <= 1 but its terms grow like t^j, so the value diverges for larger
    look-ahead horizons; ``raw`` keeps the signed series value and ``value``
    floors it at zero.
    """
    if horizon <= 0:
        raise DomainError("horizon t must be positive")
    values, mult = counts.unique_with_multiplicity()
    keep = values > 0
    values, mult = values[keep], mult[keep]
    with np.errstate(over="ignore", invalid="ignore"):
        terms = -np.power(-float(horizon), values.astype(float)) * mult
        raw = float(np.sum(terms))
    return EstimateReport(value=max(raw, 0.0), method="good-turing", raw=raw)


def unseen_plugin(
    mixing: MixingDistribution, k: int, n: int, horizon: float
) -> EstimateReport:
    """Plug-in estimate of the categories discovered in t*n further units."""
    return plugin(FunctionalSpec.unseen(horizon), mixing, k, n)


def discovery_curve(
    mixing: MixingDistribution, k: int, n: int, horizons
) -> list[tuple[float, float]]:
    """Unseen plug-in evaluated on a list of horizons against one fit."""
    return [(float(t), unseen_plugin(mixing, k, n, t).value) for t in horizons]


def estimate(
    counts: CountData,
    spec: FunctionalSpec,
    method: str,
    kernel=None,
    m: Optional[int] = None,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    localized_config: Optional[LocalizedConfig] = None,
) -> EstimateReport:
    """One-stop estimation routing to the requested method.

    Fitting methods apply the declared minimum-mass support constraint by
    removing grid atoms in (0, min_mass) when estimating the support size.
    """
    if method not in METHODS:
        raise DomainError(f"unknown method {method!r}")
    min_mass = (
        spec.resolved_min_mass(counts.k) if spec.kind == "support_size" else None
    )
    if method == "plugin":
        grid = build_grid(counts, m, min_mass=min_mass)
        fit = fit_npmle(counts, grid, kernel, tol, max_iter)
        report = plugin(spec, fit.mixing, counts.k, counts.n, diagnostics=fit)
        return report
    if method == "localized":
        loc = fit_localized(
            counts, localized_config, kernel, m, tol, max_iter, min_mass=min_mass
        )
        return estimate_combined(counts, spec, loc)
    if method == "empirical":
        return empirical_plugin(counts, spec)
    if method == "miller-madow":
        return miller_madow(counts, spec)
    if spec.kind != "unseen":
        raise DomainError("the Good-Turing baseline estimates the unseen functional")
    return good_turing_unseen(counts, spec.horizon)
