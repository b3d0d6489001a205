"""Distances and statistical tests for fitted count mixtures.

Wasserstein distances between mixing distributions are computed exactly via
the quantile coupling; Hellinger and the chi-squared goodness-of-fit test
operate on the induced count densities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.stats

from .base import CountData, DomainError, MixingDistribution, MixtureKernel
from .kernels import log_pmf, mixture_log_density, pmf_truncation_point
from .npmle import DEFAULT_MAX_ITER, DEFAULT_TOL, FitResult, build_grid, fit_npmle

__all__ = [
    "Fingerprint",
    "GofReport",
    "HellingerReport",
    "chi2_sf",
    "gof_test",
    "hellinger",
    "wasserstein",
]

GOF_MODELS = ("mixture", "p-model")


@dataclass(frozen=True)
class Fingerprint:
    """Occurrence counts of count values: phi[j] = number of cells observed j times."""

    phi: dict[int, int]

    def __post_init__(self):
        cleaned = {}
        for j, count in self.phi.items():
            j, count = int(j), int(count)
            if j < 0 or count < 0:
                raise DomainError("fingerprint entries must be nonnegative")
            if count:
                cleaned[j] = count
        object.__setattr__(self, "phi", cleaned)

    @classmethod
    def from_counts(cls, counts: CountData) -> "Fingerprint":
        values, mult = counts.unique_with_multiplicity()
        return cls({int(v): int(m) for v, m in zip(values, mult)})

    @property
    def k(self) -> int:
        return sum(self.phi.values())

    def truncated(self, T: int) -> tuple[np.ndarray, np.ndarray]:
        """(j, phi_j) arrays for j = 0..T, zeros filled in."""
        js = np.arange(T + 1)
        phis = np.array([self.phi.get(int(j), 0) for j in js])
        return js, phis

    def to_counts(self, n: Optional[int] = None, tail: int = 0) -> CountData:
        """Expand into the count multiset; n defaults to the total count mass."""
        counts = np.repeat(
            [j for j in sorted(self.phi)], [self.phi[j] for j in sorted(self.phi)]
        )
        if n is None:
            total = int(counts.sum())
            if total == 0:
                raise DomainError("cannot infer n from an all-zero fingerprint")
            n = total
        return CountData(counts, n=n, tail=tail)


@dataclass(frozen=True)
class GofReport:
    """Chi-squared goodness-of-fit summary on counts truncated at T."""

    statistic: float
    dof: int
    p_value: float
    expected: np.ndarray
    truncation: int
    degenerate: bool = False


@dataclass(frozen=True)
class HellingerReport:
    """Hellinger distance between two count densities, with truncation slack."""

    value: float
    truncation: int
    tail_bound: float


def wasserstein(
    p: MixingDistribution, q: MixingDistribution, order: float = 1.0
) -> float:
    """Exact q-Wasserstein distance between two discrete measures on [0, 1].

    Integrates |Q_p(u) - Q_q(u)|^order over the merged breakpoints of the two
    quantile functions, which is the optimal coupling on the line.
    """
    if order < 1.0:
        raise DomainError("Wasserstein order must be >= 1")
    cum_p = np.cumsum(p.weights)
    cum_q = np.cumsum(q.weights)
    edges = np.unique(np.clip(np.concatenate([[0.0], cum_p, cum_q]), 0.0, 1.0))
    if edges[-1] < 1.0:
        edges = np.append(edges, 1.0)
    mids = 0.5 * (edges[:-1] + edges[1:])
    lengths = np.diff(edges)
    qp = p.atoms[np.minimum(np.searchsorted(cum_p, mids), len(p) - 1)]
    qq = q.atoms[np.minimum(np.searchsorted(cum_q, mids), len(q) - 1)]
    total = float(np.sum(lengths * np.abs(qp - qq) ** order))
    return total ** (1.0 / order)


def hellinger(
    kernel: MixtureKernel,
    pi1: MixingDistribution,
    pi2: MixingDistribution,
    truncation: Optional[int] = None,
) -> HellingerReport:
    """Hellinger distance between the two induced count densities.

    H^2 = 1 - sum_{j<=J} sqrt(f1(j) f2(j)) with the sum truncated at J;
    ``tail_bound`` bounds the neglected Bhattacharyya mass by
    sqrt(tail1 * tail2).
    """
    if truncation is None:
        truncation = pmf_truncation_point(kernel)
    js = np.arange(truncation + 1, dtype=float)
    logf1 = np.atleast_1d(mixture_log_density(kernel, pi1, js))
    logf2 = np.atleast_1d(mixture_log_density(kernel, pi2, js))
    bc = float(np.sum(np.exp(0.5 * (logf1 + logf2))))
    tail1 = max(0.0, 1.0 - float(np.sum(np.exp(logf1))))
    tail2 = max(0.0, 1.0 - float(np.sum(np.exp(logf2))))
    value = math.sqrt(max(1.0 - bc, 0.0))
    return HellingerReport(
        value=value, truncation=truncation, tail_bound=math.sqrt(tail1 * tail2)
    )


def chi2_sf(x: float, dof: int) -> float:
    """Upper tail probability of the chi-squared distribution."""
    if dof < 1:
        raise DomainError("degrees of freedom must be >= 1")
    if math.isinf(x):
        return 0.0
    return float(scipy.stats.chi2.sf(x, dof))


def _expected_mixture(
    fit: FitResult, kernel: MixtureKernel, T: int, k_T: int
) -> np.ndarray:
    js = np.arange(T + 1, dtype=float)
    logf = np.atleast_1d(mixture_log_density(kernel, fit.mixing, js))
    f = np.exp(logf)
    return k_T * f / f.sum()


def _expected_empirical(values: np.ndarray, mult: np.ndarray, T: int) -> np.ndarray:
    # Each retained cell contributes the Poisson pmf at its own maximum-
    # likelihood rate (= its count); the aggregate is then conditioned on
    # {0..T} so the expected fingerprint totals the number of retained cells.
    js = np.arange(T + 1, dtype=float)
    kern = MixtureKernel.poisson(1)
    logq = np.atleast_2d(log_pmf(kern, js[None, :], values[:, None].astype(float)))
    agg = mult @ np.exp(logq)
    return mult.sum() * agg / agg.sum()


def gof_test(
    fingerprint: Fingerprint,
    model: str,
    T: int,
    fit: Optional[FitResult] = None,
    kernel: Optional[MixtureKernel] = None,
    m: Optional[int] = None,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> GofReport:
    """Chi-squared goodness of fit on the count histogram truncated at T.

    Both models use only the cells with counts <= T.  Under "mixture" the
    expected fingerprint is k_T * f(j) / F(<=T) for the fitted mixture
    (fitted here unless ``fit`` is supplied); under "p-model" each retained
    cell contributes a conditional Poisson at its empirical rate.  The
    statistic sum_j (phi_j - E[phi_j])^2 / E[phi_j] is referred to the
    chi-squared distribution with T degrees of freedom.
    """
    if model not in GOF_MODELS:
        raise DomainError(f"unknown goodness-of-fit model {model!r}")
    if T < 1:
        raise DomainError("truncation T must be >= 1")
    js, phis = fingerprint.truncated(T)
    k_T = int(phis.sum())
    if k_T == 0:
        raise DomainError("no cells with counts <= T")
    values = js[phis > 0]
    mult = phis[phis > 0].astype(float)
    if model == "mixture":
        if fit is None:
            retained = CountData(
                np.repeat(values, mult.astype(int)),
                n=max(int((values * mult).sum()), 1),
                k=k_T,
            )
            if kernel is None:
                kernel = MixtureKernel.poisson(retained.n)
            fit = fit_npmle(retained, build_grid(retained, m), kernel, tol, max_iter)
        elif kernel is None:
            raise DomainError("a pre-computed fit needs its kernel")
        expected = _expected_mixture(fit, kernel, T, k_T)
    else:
        expected = _expected_empirical(values, mult, T)
    degenerate = bool(np.any((expected == 0) & (phis > 0)))
    if degenerate:
        statistic = math.inf
        p_value = 0.0
    else:
        live = expected > 0
        statistic = float(np.sum((phis[live] - expected[live]) ** 2 / expected[live]))
        p_value = chi2_sf(statistic, T)
    return GofReport(
        statistic=statistic,
        dof=T,
        p_value=p_value,
        expected=expected,
        truncation=T,
        degenerate=degenerate,
    )
