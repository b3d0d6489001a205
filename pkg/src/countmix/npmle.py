"""Grid construction and mixing-distribution fits for count mixtures.

Three fitting procedures share one solver core: the plain fit over the full
count multiset, a localized fit restricted to small empirical rates, and a
penalized fit that jointly selects a support size when only the non-zero
counts are observed.

The solver maximizes sum_i m_i log sum_j w_j q(N_i, r_j) over the weight
simplex by multiplicative fixed-point updates interleaved (every 20
iterations) with a vertex-exchange step that line-searches toward the grid
atom with the largest directional derivative.  A final refinement manages a
small candidate support, solving each restriction exactly with an
equality-constrained Newton method whose discarded atoms carry weight
exactly zero.  Convergence is declared on the directional-derivative
certificate

    gap = max_j (1/k) sum_i m_i q(N_i, r_j) / f_w(N_i) - 1,

which is nonpositive at an exact maximizer and is recomputed from the final
mixing distribution, so correctness does not depend on the solver path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .base import (
    CountData,
    DomainError,
    FitError,
    Grid,
    MixingDistribution,
    MixtureKernel,
)
from .kernels import log_pmf, mixture_log_density

__all__ = [
    "FitResult",
    "LocalizedConfig",
    "LocalizedFit",
    "PenalizedFitResult",
    "build_grid",
    "certificate",
    "default_grid_size",
    "fit_localized",
    "fit_npmle",
    "fit_penalized",
    "log_likelihood",
    "prune",
    "scaled_kl_profile",
]

DEFAULT_TOL = 1e-6
DEFAULT_MAX_ITER = 20_000
WEIGHT_FLOOR = 1e-12
EM_BLOCK = 20
PHASE1_ITERS = 200


@dataclass(frozen=True)
class FitResult:
    """Fitted mixing distribution with its optimality certificate.

    ``optimality_gap`` is the largest directional-derivative violation over
    the grid, clamped below at zero; ``log_likelihood`` is the mixture
    log-likelihood of the data at the fit.
    """

    mixing: MixingDistribution
    log_likelihood: float
    optimality_gap: float
    iterations: int
    converged: bool
    grid: Grid


@dataclass(frozen=True)
class LocalizedConfig:
    """Small-rate localization rule: keep cells with p-hat <= kappa log(n)/n.

    ``split_counts`` optionally supplies an independent sample used only for
    the thresholding; the fit itself always uses the primary counts.
    """

    kappa: float = 3.6
    split_counts: Optional[CountData] = None

    def __post_init__(self):
        if self.kappa <= 0:
            raise DomainError("kappa must be positive")


@dataclass(frozen=True)
class LocalizedFit:
    """Localized fit plus the index partition it was computed on.

    ``small_mask`` flags the explicit counts whose (split) empirical rate fell
    below the threshold; implicit zero counts always do and are included in
    ``n_small``.  ``fit`` is None when no cell qualified.
    """

    fit: Optional[FitResult]
    small_mask: np.ndarray
    n_small: int
    large_counts: np.ndarray
    threshold: float

    @property
    def empty(self) -> bool:
        return self.fit is None


@dataclass(frozen=True)
class PenalizedFitResult:
    """Joint support-size and mixing fit from zero-padded counts.

    ``k_hat`` is the selected (real-valued) support size, ``profile`` the
    (k', objective) pairs evaluated during the search, and ``fit`` the inner
    fit at ``k_hat`` whose data included k_hat - k fractional zero counts.
    """

    k_hat: float
    mixing: MixingDistribution
    penalized_objective: float
    profile: list[tuple[float, float]]
    fit: FitResult


def default_grid_size(k: int) -> int:
    """Grid size rule: sqrt(k)*10 clipped to [500, 2000]."""
    return int(max(500, min(2000, math.ceil(math.sqrt(max(k, 1)) * 10))))


def build_grid(
    counts: CountData,
    m: Optional[int] = None,
    upper: Optional[float] = None,
    min_mass: Optional[float] = None,
) -> Grid:
    """Data-driven grid over candidate rates in [0, 1].

    Let pbar = min(max_i N_i / n, 1) and tau = min(1.6 log(n)/n, 1).  When
    pbar <= tau the grid is ``m`` uniform points on [0, pbar]; otherwise half
    of the points are placed uniformly on [0, tau] and the rest on
    (tau, pbar], concentrating resolution where small rates live.  The grid
    always contains 0 and pbar.

    ``upper`` caps pbar (used by the localized fit); atoms in the open
    interval (0, ``min_mass``) are discarded when a minimum category mass is
    declared, as in support-size estimation.  All-zero counts degenerate to
    {0} plus nine auxiliary points in [0, 1/n].
    """
    if m is None:
        m = default_grid_size(counts.k)
    if m < 2:
        raise DomainError("grid size m must be >= 2")
    n = counts.n
    pbar = min(counts.max_count() / n, 1.0)
    if upper is not None:
        pbar = min(pbar, upper)
    tau = min(1.6 * math.log(n) / n, 1.0)
    if pbar <= 0.0:
        atoms = np.linspace(0.0, 1.0 / n, 10)
    elif pbar <= tau:
        atoms = np.linspace(0.0, pbar, m)
    else:
        m_lo = math.ceil(m / 2)
        m_hi = m // 2
        lo = np.linspace(0.0, tau, m_lo)
        hi = tau + (pbar - tau) * np.arange(1, m_hi + 1) / m_hi
        atoms = np.concatenate([lo, hi])
    if min_mass is not None:
        atoms = atoms[(atoms <= 0.0) | (atoms >= min_mass)]
        atoms = np.concatenate([atoms, [0.0]])
    return Grid(np.unique(atoms))


def _line_search(s: np.ndarray, u: np.ndarray, mult: np.ndarray) -> float:
    """Maximizer of lam -> sum m_i log((1-lam) s_i + lam u_i) on [0, 1]."""
    diff = u - s

    def deriv(lam: float) -> float:
        with np.errstate(divide="ignore", invalid="ignore"):
            terms = mult * diff / (s + lam * diff)
        return float(np.sum(terms))

    if deriv(0.0) <= 0.0:
        return 0.0
    if np.all(u > 0) and deriv(1.0) >= 0.0:
        return 1.0
    lo, hi = 0.0, 1.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if deriv(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _segment_max(mult: np.ndarray, f: np.ndarray, direction: np.ndarray, hi: float) -> float:
    """argmax over [0, hi] of t -> sum m_i log(f_i + t * direction_i)."""

    def deriv(t: float) -> float:
        with np.errstate(divide="ignore", invalid="ignore"):
            return float(np.sum(mult * direction / (f + t * direction)))

    if deriv(0.0) <= 0.0:
        return 0.0
    if deriv(hi) >= 0.0:
        return hi
    lo_t, hi_t = 0.0, hi
    for _ in range(70):
        mid = 0.5 * (lo_t + hi_t)
        if deriv(mid) > 0.0:
            lo_t = mid
        else:
            hi_t = mid
    return 0.5 * (lo_t + hi_t)


def _restricted_newton(
    Bs: np.ndarray,
    mult: np.ndarray,
    u0: np.ndarray,
    ktot: float,
    kkt_tol: float,
    max_steps: int = 200,
) -> np.ndarray:
    """Maximize sum m_i log((Bs u)_i) over the simplex on a small support.

    Equality-constrained Newton with an active set.  The Hessian here is
    exact (the objective is a log of a linear form), so steps converge
    quadratically; the bordered KKT system is solved in the least-norm sense
    because the Hessian is rank-deficient whenever the support exceeds the
    number of distinct counts.  Moves along each Newton direction stop at
    the exact one-dimensional maximum, landing on the boundary when that is
    optimal, so discarded atoms carry weight exactly zero.  Terminates when
    every positive atom satisfies sum_i m_i Bs_ij / f_i = ktot and every
    zero atom satisfies <= ktot, within ``kkt_tol`` (relative).
    """
    u = np.array(u0, dtype=float)
    u /= u.sum()
    f = Bs @ u
    if f.min() <= 0.0:
        return u  # support does not cover every count; nothing to refine
    all_idx = np.arange(Bs.shape[1])
    for _ in range(max_steps):
        idx = np.flatnonzero(u > 0)
        grad = Bs.T @ (mult / f)
        resid = float(np.abs(grad[idx] - ktot).max())
        inactive = np.setdiff1d(all_idx, idx, assume_unique=False)
        resid_in = float(max(0.0, grad[inactive].max() - ktot)) if inactive.size else 0.0
        if max(resid, resid_in) <= kkt_tol * ktot:
            break
        if resid <= kkt_tol * ktot and resid_in > 0.0:
            # A previously discarded atom violates stationarity: reseed it.
            j = inactive[np.argmax(grad[inactive])]
            u[j] = 1e-12
            u /= u.sum()
            f = Bs @ u
            continue
        Bi = Bs[:, idx]
        W = Bi * (np.sqrt(mult) / f)[:, None]
        H = W.T @ W
        nsz = idx.size
        kkt = np.zeros((nsz + 1, nsz + 1))
        kkt[:nsz, :nsz] = H
        kkt[-1, :nsz] = 1.0
        kkt[:nsz, -1] = 1.0
        rhs = np.concatenate([grad[idx] - ktot, [0.0]])
        try:
            solution, *_ = np.linalg.lstsq(kkt, rhs, rcond=None)
        except np.linalg.LinAlgError:
            break
        delta = solution[:nsz]
        if not np.all(np.isfinite(delta)) or np.abs(delta).max() == 0.0:
            break
        negative = delta < 0
        if negative.any():
            alpha_max = float(np.min(-u[idx][negative] / delta[negative]))
        else:
            alpha_max = 1e3
        alpha = _segment_max(mult, f, Bi @ delta, alpha_max)
        if alpha <= 0.0:
            break
        stepped = np.clip(u[idx] + alpha * delta, 0.0, None)
        if stepped.max() > 0:
            # boundary hits leave float dust; snap it to exact zero
            stepped[stepped <= 1e-14 * stepped.max()] = 0.0
        new_u = np.zeros_like(u)
        new_u[idx] = stepped
        total = new_u.sum()
        if total <= 0.0:
            break
        candidate = new_u / total
        fc = Bs @ candidate
        if fc.min() <= 0.0:
            # zeroing removed the only atom covering some count; retreat to
            # a strictly interior step
            stepped = np.clip(u[idx] + 0.5 * min(alpha, alpha_max) * delta, 0.0, None)
            new_u = np.zeros_like(u)
            new_u[idx] = stepped
            total = new_u.sum()
            if total <= 0.0:
                break
            candidate = new_u / total
            fc = Bs @ candidate
            if fc.min() <= 0.0:
                break
        u, f = candidate, fc
    return u


def _solve_weights(
    B: np.ndarray,
    mult: np.ndarray,
    tol: float,
    max_iter: int,
    w0: Optional[np.ndarray] = None,
) -> tuple[np.ndarray, float, int, bool]:
    """Weight optimization over the simplex for a row-scaled pmf matrix."""
    d, m = B.shape
    ktot = mult.sum()
    w = np.full(m, 1.0 / m) if w0 is None else np.array(w0, dtype=float)
    s = B @ w
    obj = float(mult @ np.log(s))
    iterations = 0
    gap = math.inf

    def grad_ratio(sv: np.ndarray) -> np.ndarray:
        # g_j = (1/k) sum_i m_i B_ij / s_i; equals 1 + directional derivative.
        return (B.T @ (mult / sv)) / ktot

    def ascent_check(sv: np.ndarray) -> None:
        nonlocal obj
        if __debug__:
            new_obj = float(mult @ np.log(sv))
            assert new_obj >= obj - 1e-9 * (1.0 + abs(obj))
            obj = new_obj

    def multiplicative_block(budget: int) -> None:
        # Multiplicative updates with a vertex-exchange move every EM_BLOCK
        # iterations (line search toward the best-derivative atom).
        nonlocal w, s, gap, iterations
        stop = min(max_iter, iterations + budget)
        while iterations < stop:
            g = grad_ratio(s)
            gap = float(g.max() - 1.0)
            if gap <= tol:
                break
            if (iterations + 1) % EM_BLOCK == 0:
                j = int(np.argmax(g))
                lam = _line_search(s, B[:, j], mult)
                w *= 1.0 - lam
                w[j] += lam
            else:
                w *= g
                w /= w.sum()
            s = B @ w
            ascent_check(s)
            iterations += 1

    # Phase 1: global multiplicative / vertex-exchange sweep.
    multiplicative_block(PHASE1_ITERS)

    # Phase 2: support management around an exact restricted solver.  Each
    # pass solves the weight problem on the current support to stationarity
    # (active-set Newton, exact zeros there), then admits grid atoms whose
    # directional derivative is still positive.  The loop stops when no grid
    # atom violates the certificate; if no admissible atom remains while the
    # certificate is unmet (Newton stall), fall back to multiplicative sweeps.
    row_peaks = np.unique(np.argmax(B, axis=1))
    support = np.flatnonzero(w > max(WEIGHT_FLOOR, w.max() * 1e-14))
    cap = max(2 * d + 10, 30)
    if support.size > cap:
        support = support[np.argsort(w[support])[-cap:]]
    support = np.union1d(support, row_peaks)
    u = w[support] / w[support].sum()
    while iterations < max_iter:
        u = _restricted_newton(B[:, support], mult, u, ktot, kkt_tol=0.05 * tol)
        keep = u > 0
        support, u = support[keep], u[keep]
        w = np.zeros(m)
        w[support] = u
        s = B @ w
        obj = float(mult @ np.log(s))
        iterations += 1
        g = grad_ratio(s)
        gap = float(g.max() - 1.0)
        if gap <= tol:
            break
        # Admit up to five local maxima of the derivative, best first.
        violating = np.flatnonzero(g > 1.0 + 0.1 * tol)
        is_peak = np.ones(violating.size, dtype=bool)
        for t, j in enumerate(violating):
            if j > 0 and g[j - 1] > g[j]:
                is_peak[t] = False
            if j + 1 < m and g[j + 1] >= g[j]:
                is_peak[t] = False
        peaks = violating[is_peak]
        peaks = peaks[np.argsort(g[peaks])[-5:]]
        new_atoms = np.setdiff1d(peaks, support)
        if new_atoms.size == 0:
            top = int(np.argmax(g))
            if w[top] > 0:
                multiplicative_block(10 * EM_BLOCK)
                if gap <= tol:
                    break
                support = np.flatnonzero(w > 0)
                u = w[support] / w[support].sum()
                continue
            new_atoms = np.array([top])
        eps = 1e-3 / new_atoms.size
        u = np.concatenate([u * (1.0 - eps * new_atoms.size), np.full(new_atoms.size, eps)])
        support = np.concatenate([support, new_atoms])
        order = np.argsort(support)
        support, u = support[order], u[order]

    g = grad_ratio(s)
    gap = float(g.max() - 1.0)
    return w, gap, iterations, gap <= tol


def _prepare_rows(
    values: np.ndarray, grid: Grid, kernel: MixtureKernel
) -> np.ndarray:
    """Row-scaled pmf matrix exp(logA - rowmax); rows with no support raise."""
    logA = log_pmf(kernel, values[:, None].astype(float), grid.atoms[None, :])
    logA = np.atleast_2d(logA)
    rowmax = logA.max(axis=1)
    if not np.all(np.isfinite(rowmax)):
        bad = values[~np.isfinite(rowmax)]
        raise FitError(f"count {bad[0]} has zero probability under every grid atom")
    return np.exp(logA - rowmax[:, None])


def _directional_gap(
    mixing: MixingDistribution,
    values: np.ndarray,
    mult: np.ndarray,
    grid: Grid,
    kernel: MixtureKernel,
) -> float:
    """max_j (1/k) sum_i m_i q(v_i, r_j) / f(v_i) - 1, clamped at 0."""
    logq = np.atleast_2d(
        log_pmf(kernel, values[:, None].astype(float), grid.atoms[None, :])
    )
    logf = np.atleast_1d(mixture_log_density(kernel, mixing, values.astype(float)))
    if not np.all(np.isfinite(logf[mult > 0])):
        raise FitError("mixture density vanishes at an observed count")
    ratios = np.exp(logq - logf[:, None])
    per_atom = (mult @ ratios) / mult.sum()
    return max(float(per_atom.max() - 1.0), 0.0)


def _log_likelihood_rows(
    mixing: MixingDistribution,
    values: np.ndarray,
    mult: np.ndarray,
    kernel: MixtureKernel,
) -> float:
    logf = np.atleast_1d(mixture_log_density(kernel, mixing, values.astype(float)))
    return float(mult[mult > 0] @ logf[mult > 0])


def log_likelihood(
    counts: CountData, mixing: MixingDistribution, kernel: MixtureKernel
) -> float:
    """Mixture log-likelihood sum_i log f(N_i) over the effective multiset."""
    values, mult = counts.unique_with_multiplicity()
    return _log_likelihood_rows(mixing, values, mult, kernel)


def _fit_rows(
    values: np.ndarray,
    mult: np.ndarray,
    grid: Grid,
    kernel: MixtureKernel,
    tol: float,
    max_iter: int,
    weight_floor: float = WEIGHT_FLOOR,
) -> FitResult:
    live = mult > 0
    values_live, mult_live = values[live], mult[live]
    if values_live.size == 0:
        raise FitError("no counts to fit")
    B = _prepare_rows(values_live, grid, kernel)
    iterations = 0
    w0 = None
    mixing = None
    gap = math.inf
    while iterations < max_iter:
        w, _, used, _ = _solve_weights(B, mult_live, tol, max_iter - iterations, w0)
        iterations += max(used, 1)
        keep = w >= weight_floor
        if not keep.any():
            keep = w > 0
        mixing = MixingDistribution(grid.atoms[keep], w[keep])
        gap = _directional_gap(mixing, values_live, mult_live, grid, kernel)
        if gap <= tol:
            break
        # Pruning nudged the certificate above tol; resume from the kept atoms.
        w0 = np.zeros(len(grid))
        w0[keep] = mixing.weights
    return FitResult(
        mixing=mixing,
        log_likelihood=_log_likelihood_rows(mixing, values_live, mult_live, kernel),
        optimality_gap=gap,
        iterations=iterations,
        converged=gap <= tol,
        grid=grid,
    )


def fit_npmle(
    counts: CountData,
    grid: Optional[Grid] = None,
    kernel: Optional[MixtureKernel] = None,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> FitResult:
    """Maximum-likelihood mixing distribution over the grid atoms.

    Returns weights over ``grid`` approximately maximizing
    sum_i log sum_j w_j q(N_i, r_j), with ``optimality_gap <= tol`` on
    success; atoms whose final weight falls below 1e-12 are pruned.
    """
    if tol <= 0:
        raise DomainError("tol must be positive")
    if kernel is None:
        kernel = MixtureKernel.poisson(counts.n)
    if kernel.family == "binomial" and counts.max_count() > kernel.n:
        raise DomainError("binomial count exceeds the number of trials")
    if grid is None:
        grid = build_grid(counts)
    values, mult = counts.unique_with_multiplicity()
    return _fit_rows(values, mult, grid, kernel, tol, max_iter)


def certificate(
    fit: FitResult, counts: CountData, grid: Grid, kernel: MixtureKernel
) -> float:
    """Recompute the optimality gap of a fit from scratch.

    Evaluates max_j of the directional derivative toward each grid atom using
    fresh pmf evaluations and the reported mixing distribution only, so it
    checks the solver's answer rather than repeating its internal state.
    """
    values, mult = counts.unique_with_multiplicity()
    ktot = mult.sum()
    with np.errstate(divide="ignore"):
        logw = np.log(fit.mixing.weights)
    logq_mix = np.atleast_2d(
        log_pmf(kernel, values[:, None].astype(float), fit.mixing.atoms[None, :])
    )
    shifted = logq_mix + logw[None, :]
    rowmax = shifted.max(axis=1)
    if not np.all(np.isfinite(rowmax[mult > 0])):
        raise FitError("mixture density vanishes at an observed count")
    logf = rowmax + np.log(np.exp(shifted - rowmax[:, None]).sum(axis=1))
    logq_grid = np.atleast_2d(
        log_pmf(kernel, values[:, None].astype(float), grid.atoms[None, :])
    )
    per_atom = np.einsum("i,ij->j", mult / ktot, np.exp(logq_grid - logf[:, None]))
    return max(float(per_atom.max() - 1.0), 0.0)


def prune(mixing: MixingDistribution, weight_floor: float) -> MixingDistribution:
    """Drop atoms with weight below the floor and renormalize."""
    keep = mixing.weights >= weight_floor
    if not keep.any():
        raise FitError("every atom falls below the weight floor")
    return MixingDistribution(mixing.atoms[keep], mixing.weights[keep])


def fit_localized(
    counts: CountData,
    config: Optional[LocalizedConfig] = None,
    kernel: Optional[MixtureKernel] = None,
    m: Optional[int] = None,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    min_mass: Optional[float] = None,
) -> LocalizedFit:
    """Fit restricted to cells whose empirical rate is below kappa log(n)/n.

    The grid of the sub-fit is capped at the same threshold.  When
    ``config.split_counts`` is present its rates decide the partition (an
    independent-sample split); otherwise the counts threshold themselves.
    """
    if config is None:
        config = LocalizedConfig()
    n = counts.n
    if n < 2:
        raise DomainError("localization requires n >= 2")
    threshold = config.kappa * math.log(n) / n
    ref = config.split_counts if config.split_counts is not None else counts
    if ref.counts.size != counts.counts.size or ref.k != counts.k:
        raise DomainError("split counts must align with the primary counts")
    small_mask = (ref.counts / ref.n) <= threshold
    n_small = int(small_mask.sum()) + counts.implicit_zeros
    large_counts = counts.counts[~small_mask]
    if n_small == 0:
        return LocalizedFit(None, small_mask, 0, large_counts, threshold)
    sub = CountData(counts.counts[small_mask], n=n, k=n_small)
    grid = build_grid(sub, m, upper=threshold, min_mass=min_mass)
    fit = fit_npmle(sub, grid, kernel, tol, max_iter)
    return LocalizedFit(fit, small_mask, n_small, large_counts, threshold)


def _binary_entropy(p: float) -> float:
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return -(p * math.log(p) + (1.0 - p) * math.log(1.0 - p))


def _fit_padded(
    counts: CountData,
    k_prime: float,
    grid: Grid,
    kernel: MixtureKernel,
    tol: float,
    max_iter: int,
) -> FitResult:
    """Fit with k' - k fractional zero counts appended to the multiset."""
    values, mult = counts.unique_with_multiplicity()
    values = np.concatenate(([0], values))
    mult = np.concatenate(([k_prime - counts.k], mult))
    return _fit_rows(values, mult, grid, kernel, tol, max_iter)


def _penalized_objective(
    counts: CountData, fit: FitResult, k_prime: float, c0: float, c1: float
) -> float:
    k = counts.k
    return fit.log_likelihood + k_prime * _binary_entropy(k / k_prime) + c0 / k_prime**c1


def _kprime_root(f0: float, k: float, k_max: float) -> float:
    """Root of log f0 - log((k'-k)/k') = 0 on (k, k_max], by bisection."""

    def h(kp: float) -> float:
        return math.log(f0) - math.log1p(-k / kp)

    lo = k * (1.0 + 1e-15)
    hi = k_max
    if h(hi) > 0.0:
        return math.inf
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if h(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def fit_penalized(
    counts: CountData,
    m: Optional[int] = None,
    kernel: Optional[MixtureKernel] = None,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    reg: tuple[float, float] = (10.0, 1.0),
    k_max_factor: float = 50.0,
) -> PenalizedFitResult:
    """Joint fit of the mixing distribution and a real support size k' >= k.

    Input must be the observed non-zero counts.  The objective adds to the
    padded log-likelihood the binary-entropy term k' H(k/k') and the
    tie-breaking regularizer c0 / k'^c1, which prefers the smallest maximizer
    on the flat part of the profile.  The search alternates fits at fixed k'
    with a bisection on the k'-stationarity condition
    log f(0) = log((k'-k)/k'), so at any selected k_hat > k the fitted
    mixture satisfies f(0) ~= (k_hat - k)/k_hat.
    """
    if counts.counts.size == 0 or counts.counts.min() < 1:
        raise DomainError("penalized fit requires strictly positive counts")
    if counts.implicit_zeros:
        raise DomainError("zero padding is selected by the fit; supply only positive counts")
    c0, c1 = reg
    k = float(counts.k)
    k_max = k_max_factor * k
    if kernel is None:
        kernel = MixtureKernel.poisson(counts.n)
    grid = build_grid(counts, m)

    profile: list[tuple[float, float]] = []
    fits: dict[float, FitResult] = {}

    def evaluate(kp: float) -> FitResult:
        fit = _fit_padded(counts, kp, grid, kernel, tol, max_iter)
        fits[kp] = fit
        profile.append((kp, _penalized_objective(counts, fit, kp, c0, c1)))
        return fit

    # Alternation: fit at fixed k', then move k' to the stationary point of
    # the k'-section (the bisection root); a secant step on the fixed-point
    # residual accelerates convergence when f(0) reacts strongly to k'.
    kp = k
    fit = evaluate(kp)
    kp_prev = rho_prev = None
    for _ in range(80):
        f0 = math.exp(mixture_log_density(kernel, fit.mixing, 0))
        if f0 <= 0.0:
            break
        target = _kprime_root(f0, k, k_max)
        if not math.isfinite(target):
            raise FitError(f"support size search hit the bracket ceiling {k_max:g}")
        if kp == k and target <= k * (1.0 + 1e-12):
            break
        rho = target - kp
        if abs(rho) <= 1e-9 * kp:
            break
        kp_next = target
        if kp_prev is not None and rho != rho_prev:
            accelerated = kp - rho * (kp - kp_prev) / (rho - rho_prev)
            if k < accelerated <= k_max:
                kp_next = accelerated
        kp_prev, rho_prev = kp, rho
        kp = kp_next
        fit = evaluate(kp)

    best = max(obj for _, obj in profile)
    k_hat = min(kp for kp, obj in profile if obj >= best - 1e-8)
    final = fits[k_hat]
    objective = next(obj for kp, obj in profile if kp == k_hat)
    return PenalizedFitResult(
        k_hat=k_hat,
        mixing=final.mixing,
        penalized_objective=objective,
        profile=profile,
        fit=final,
    )


def scaled_kl_profile(
    counts: CountData,
    k_prime_list,
    m: Optional[int] = None,
    kernel: Optional[MixtureKernel] = None,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> list[tuple[float, float]]:
    """k' * KL(padded count histogram || fitted mixture) per candidate k'.

    The padded histogram puts mass c_x / k' on each observed count value x
    (multiplicity c_x) and (k' - k)/k' on zero.  The profile is monotone
    non-increasing in k' up to solver tolerance.
    """
    if counts.counts.size == 0 or counts.counts.min() < 1:
        raise DomainError("profile requires strictly positive counts")
    if kernel is None:
        kernel = MixtureKernel.poisson(counts.n)
    grid = build_grid(counts, m)
    values, mult = counts.unique_with_multiplicity()
    out: list[tuple[float, float]] = []
    for kp in k_prime_list:
        kp = float(kp)
        if kp < counts.k:
            raise DomainError("k' must be at least the number of positive counts")
        fit = _fit_padded(counts, kp, grid, kernel, tol, max_iter)
        pad_values = np.concatenate(([0], values))
        pad_mult = np.concatenate(([kp - counts.k], mult))
        logf = np.atleast_1d(
            mixture_log_density(kernel, fit.mixing, pad_values.astype(float))
        )
        live = pad_mult > 0
        kl = float(
            np.sum(pad_mult[live] * (np.log(pad_mult[live] / kp) - logf[live]))
        )
        out.append((kp, kl))
    return out
