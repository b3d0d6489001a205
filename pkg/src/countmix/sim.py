"""Ground-truth generators and the Monte-Carlo experiment runner.

All randomness flows through counter-based generators keyed by the experiment
seed and the (sample size, trial) pair, so results are bit-identical across
reruns and independent of how trials are scheduled over threads.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.special import xlogy

from .base import CountData, DomainError, MixingDistribution
from .evaluate import wasserstein
from .functionals import FunctionalSpec, estimate
from .npmle import DEFAULT_TOL, fit_npmle

__all__ = [
    "ExperimentConfig",
    "RmseEntry",
    "RmseReport",
    "TrueDistribution",
    "config_from_json",
    "histogram_distribution",
    "make_distribution",
    "report_to_csv",
    "report_to_json",
    "resolve_threads",
    "run_experiment",
    "sample",
    "true_value",
    "w1_curve",
]

DISTRIBUTION_KINDS = (
    "uniform",
    "two_mixed_uniform",
    "spike_and_uniform",
    "geometric",
    "log_series",
    "zipf",
    "custom",
)

SAMPLING_SCHEMES = ("multinomial", "poisson")

ESTIMATORS = ("empirical", "miller-madow", "plugin", "localized", "good-turing")

PROB_SUM_TOL = 1e-12


@dataclass(frozen=True)
class TrueDistribution:
    """A ground-truth probability vector over k categories."""

    kind: str
    k: int
    probs: np.ndarray

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=float)
        if probs.ndim != 1 or probs.size != self.k:
            raise DomainError("probability vector must have length k")
        if probs.min() < 0:
            raise DomainError("probabilities must be nonnegative")
        if abs(probs.sum() - 1.0) > 1e-9:
            raise DomainError("probabilities must sum to one")
        probs = probs / probs.sum()
        assert abs(probs.sum() - 1.0) <= PROB_SUM_TOL
        object.__setattr__(self, "probs", probs)


def make_distribution(
    kind: str, k: int, s: float = 1.0, probs=None
) -> TrueDistribution:
    """Standard synthetic distributions over k categories.

    uniform: p_i = 1/k.  two_mixed_uniform: 2/(5k) on the first half, 8/(5k)
    on the second (k even).  spike_and_uniform: 1/(2(k-3)) on the first k-3
    cells, then 1/8, 1/8, 1/4.  geometric: p_i proportional to (1-theta)^i
    with theta = 1/k; log_series: proportional to (1-theta)^i / i.
    zipf: p_i proportional to i^{-s}.  custom: probabilities given verbatim.
    """
    if kind not in DISTRIBUTION_KINDS:
        raise DomainError(f"unknown distribution kind {kind!r}")
    if kind == "custom":
        if probs is None:
            raise DomainError("custom distribution needs explicit probabilities")
        p = np.asarray(probs, dtype=float)
        return TrueDistribution("custom", p.size, p / p.sum())
    if k < 1:
        raise DomainError("k must be >= 1")
    i = np.arange(1, k + 1, dtype=float)
    if kind == "uniform":
        p = np.full(k, 1.0 / k)
    elif kind == "two_mixed_uniform":
        if k % 2:
            raise DomainError("two_mixed_uniform needs an even k")
        p = np.concatenate([np.full(k // 2, 2.0 / (5 * k)), np.full(k // 2, 8.0 / (5 * k))])
    elif kind == "spike_and_uniform":
        if k < 4:
            raise DomainError("spike_and_uniform needs k >= 4")
        p = np.concatenate([np.full(k - 3, 0.5 / (k - 3)), [0.125, 0.125, 0.25]])
    elif kind == "geometric":
        theta = 1.0 / k
        logp = i * math.log1p(-theta)
        p = np.exp(logp - logp.max())
        p /= p.sum()
    elif kind == "log_series":
        theta = 1.0 / k
        logp = i * math.log1p(-theta) - np.log(i)
        p = np.exp(logp - logp.max())
        p /= p.sum()
    else:
        p = i**-s
        p /= p.sum()
    return TrueDistribution(kind, k, p)


def histogram_distribution(dist: TrueDistribution) -> MixingDistribution:
    """The mixing measure placing mass 1/k at each category probability."""
    return MixingDistribution(dist.probs, np.full(dist.k, 1.0 / dist.k))


def true_value(
    dist: TrueDistribution, spec: FunctionalSpec, n: Optional[int] = None
) -> float:
    """Exact value of the target functional at the ground truth."""
    p = dist.probs
    if spec.kind == "entropy":
        return float(np.sum(-xlogy(p, p)))
    if spec.kind == "power_sum":
        return float(np.sum(p[p > 0] ** spec.alpha))
    if spec.kind == "renyi":
        return float(math.log(np.sum(p[p > 0] ** spec.alpha)) / (1.0 - spec.alpha))
    if spec.kind == "support_size":
        return float(np.sum(p > 0))
    if n is None:
        raise DomainError("the unseen functional needs the concentration n")
    np_ = n * p
    return float(np.sum(np.exp(-np_) * (-np.expm1(-spec.horizon * np_))))


def _rng(seed: int, stream: int) -> np.random.Generator:
    key = np.array([seed & 0xFFFFFFFFFFFFFFFF, stream & 0xFFFFFFFFFFFFFFFF], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def sample(
    dist: TrueDistribution, sampling: str, n: int, rng: np.random.Generator
) -> CountData:
    """Draw one count vector: multinomial sums to n; Poisson cells are independent."""
    if sampling not in SAMPLING_SCHEMES:
        raise DomainError(f"unknown sampling scheme {sampling!r}")
    if sampling == "multinomial":
        counts = rng.multinomial(n, dist.probs)
    else:
        counts = rng.poisson(n * dist.probs)
    return CountData(counts, n=max(n, 1), k=dist.k)


@dataclass(frozen=True)
class ExperimentConfig:
    """Fully reproducible description of one Monte-Carlo experiment."""

    distribution: TrueDistribution
    sampling: str
    n_list: tuple[int, ...]
    trials: int
    estimators: tuple[str, ...]
    seed: int
    functional: FunctionalSpec = field(default_factory=FunctionalSpec.entropy)
    pad_k: Optional[int] = None
    grid_size: Optional[int] = None
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        object.__setattr__(self, "n_list", tuple(int(n) for n in self.n_list))
        object.__setattr__(self, "estimators", tuple(self.estimators))
        if self.trials < 1:
            raise DomainError("trials must be >= 1")
        if self.sampling not in SAMPLING_SCHEMES:
            raise DomainError(f"unknown sampling scheme {self.sampling!r}")
        for name in self.estimators:
            if name not in ESTIMATORS:
                raise DomainError(f"unknown estimator {name!r}")
        if self.pad_k is not None and self.pad_k < self.distribution.k:
            raise DomainError("pad_k must be at least the true support size")


@dataclass(frozen=True)
class RmseEntry:
    estimator: str
    n: int
    k: int
    trial_count: int
    rmse: float
    mean: float
    std: float
    truth: float


@dataclass(frozen=True)
class RmseReport:
    config: ExperimentConfig
    entries: list[RmseEntry]


def resolve_threads(explicit: Optional[int] = None) -> int:
    """Thread cap: explicit argument, else COUNTMIX_THREADS (0 or unset = auto)."""
    if explicit is None:
        raw = os.environ.get("COUNTMIX_THREADS", "0")
        try:
            explicit = int(raw)
        except ValueError as exc:
            raise DomainError(f"COUNTMIX_THREADS must be an integer, got {raw!r}") from exc
    if explicit < 0:
        raise DomainError("thread count must be nonnegative")
    if explicit == 0:
        return min(os.cpu_count() or 1, 8)
    return explicit


def _one_trial(config: ExperimentConfig, n: int, stream: int) -> dict[str, float]:
    rng = _rng(config.seed, stream)
    counts = sample(config.distribution, config.sampling, n, rng)
    if config.pad_k is not None:
        counts = CountData(counts.counts, n=counts.n, k=config.pad_k)
    out = {}
    for name in config.estimators:
        out[name] = estimate(
            counts,
            config.functional,
            method=name,
            m=config.grid_size,
            tol=config.tol,
        ).value
    return out


def _map_trials(fn: Callable[[int], object], trials: int, threads: int) -> list:
    if threads <= 1:
        return [fn(t) for t in range(trials)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, range(trials)))


def run_experiment(config: ExperimentConfig, threads: Optional[int] = None) -> RmseReport:
    """Monte-Carlo RMSE of the configured estimators at each sample size.

    Per-trial random streams are derived from (seed, n index, trial index),
    and per-trial results are reduced in trial order, so the report does not
    depend on the degree of parallelism.
    """
    threads = resolve_threads(threads)
    entries: list[RmseEntry] = []
    k_report = config.pad_k if config.pad_k is not None else config.distribution.k
    for ni, n in enumerate(config.n_list):
        truth = true_value(config.distribution, config.functional, n)
        rows = _map_trials(
            lambda t: _one_trial(config, n, ni * 1_000_000 + t), config.trials, threads
        )
        for name in config.estimators:
            values = np.array([row[name] for row in rows])
            mean = float(values.mean())
            std = float(values.std())
            rmse = float(np.sqrt(np.mean((values - truth) ** 2)))
            entries.append(
                RmseEntry(
                    estimator=name,
                    n=n,
                    k=k_report,
                    trial_count=config.trials,
                    rmse=rmse,
                    mean=mean,
                    std=std,
                    truth=truth,
                )
            )
    return RmseReport(config=config, entries=entries)


def w1_curve(
    dist: TrueDistribution,
    n_list,
    trials: int,
    seed: int,
    sampling: str = "poisson",
    m: Optional[int] = None,
    tol: float = DEFAULT_TOL,
    threads: Optional[int] = None,
) -> list[tuple[int, float]]:
    """Mean 1-Wasserstein error of the fitted mixing distribution per n."""
    threads = resolve_threads(threads)
    target = histogram_distribution(dist)
    out = []
    for ni, n in enumerate(n_list):

        def one(t: int, n=n, ni=ni) -> float:
            rng = _rng(seed, ni * 1_000_000 + t)
            counts = sample(dist, sampling, n, rng)
            fit = fit_npmle(counts, None, None, tol)
            return wasserstein(fit.mixing, target)

        values = _map_trials(one, trials, threads)
        out.append((int(n), float(np.mean(values))))
    return out


def _config_to_dict(config: ExperimentConfig) -> dict:
    dist = {"kind": config.distribution.kind, "k": config.distribution.k}
    if config.distribution.kind == "custom":
        dist["probs"] = config.distribution.probs.tolist()
    spec = {"kind": config.functional.kind}
    for name in ("alpha", "min_mass", "horizon"):
        value = getattr(config.functional, name)
        if value is not None:
            spec[name] = value
    return {
        "distribution": dist,
        "sampling": config.sampling,
        "n_list": list(config.n_list),
        "trials": config.trials,
        "estimators": list(config.estimators),
        "seed": config.seed,
        "functional": spec,
        "pad_k": config.pad_k,
        "grid_size": config.grid_size,
        "tol": config.tol,
    }


def config_from_json(text: str) -> ExperimentConfig:
    """Parse an experiment description from its JSON form."""
    doc = json.loads(text)
    dist_doc = doc["distribution"]
    dist = make_distribution(
        dist_doc["kind"],
        int(dist_doc.get("k", len(dist_doc.get("probs", [])))),
        s=float(dist_doc.get("s", 1.0)),
        probs=dist_doc.get("probs"),
    )
    spec_doc = doc.get("functional", "entropy")
    if isinstance(spec_doc, str):
        spec = FunctionalSpec(spec_doc)
    else:
        spec = FunctionalSpec(
            spec_doc["kind"],
            alpha=spec_doc.get("alpha"),
            min_mass=spec_doc.get("min_mass"),
            horizon=spec_doc.get("horizon"),
        )
    return ExperimentConfig(
        distribution=dist,
        sampling=doc["sampling"],
        n_list=tuple(doc["n_list"]),
        trials=int(doc["trials"]),
        estimators=tuple(doc["estimators"]),
        seed=int(doc["seed"]),
        functional=spec,
        pad_k=doc.get("pad_k"),
        grid_size=doc.get("grid_size"),
        tol=float(doc.get("tol", DEFAULT_TOL)),
    )


def report_to_json(report: RmseReport) -> str:
    doc = {
        "v": 1,
        "type": "rmse",
        "config": _config_to_dict(report.config),
        "entries": [vars(e) for e in report.entries],
    }
    return json.dumps(doc, indent=2)


def report_to_csv(report: RmseReport) -> str:
    """Long-format table: estimator, n, k, trial_count, rmse, mean, std, truth."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["estimator", "n", "k", "trial_count", "rmse", "mean", "std", "truth"])
    for e in report.entries:
        writer.writerow([e.estimator, e.n, e.k, e.trial_count, e.rmse, e.mean, e.std, e.truth])
    return buf.getvalue()
