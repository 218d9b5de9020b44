"""Seeded discrete-event simulation of the K-source preemptive M/M/1/1 queue.

Packets arrive in one merged Poisson stream of rate lambda = sum(lambda_k);
each arrival is labeled source k with probability lambda_k/lambda and draws
an Exp(mu) service requirement.  Any arrival pushes out the packet currently
in service regardless of source, so arrival n completes service -- and
updates its source's monitor -- exactly when the following interarrival gap
exceeds its service requirement (strict inequality; ties have probability
zero).  This local validity rule replaces explicit server-state machinery.

Each source's age grows at slope 1 and drops to the just-completed service
time at its own update epochs, giving an exact piecewise-linear sample path.
The measurement window is clipped to [first usable update, last update] so
every downstream integral runs over complete update intervals: the first
usable update is the earliest one at which every source has been updated at
least once and the configured warm-up fraction of the horizon has elapsed.

Randomness comes from numpy's PCG64 generator seeded with a single integer.
Draw order is fixed: interarrival gaps, then source labels (inverse-CDF on
uniforms), then service times, so a given (seed, config) pair reproduces the
path bit for bit.
"""

from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import dataclass, field
from typing import IO

import numpy as np

from .errors import HorizonTooSmall, InsufficientSamples
from .model import ModelParams, effective_update_rate
from . import analytics

__all__ = [
    "RNG_NAME",
    "SimConfig",
    "SamplePath",
    "IntervalLawReport",
    "run",
    "run_replications",
    "replication_seeds",
    "validate_interval_law",
]

RNG_NAME = "PCG64"

DEFAULT_ARRIVALS = 1_000_000
DEFAULT_WARMUP_FRAC = 0.01


@dataclass(frozen=True)
class SimConfig:
    """One replication's configuration.

    Exactly one horizon may be given: a total arrival count (`arrivals`,
    the default, which makes runtime parameter-independent) or a total
    simulated time (`sim_time`).  `warmup_frac` discards that fraction of
    the horizon before measurement starts, on top of waiting for every
    source's first update.
    """

    params: ModelParams
    seed: int
    arrivals: int | None = None
    sim_time: float | None = None
    warmup_frac: float = DEFAULT_WARMUP_FRAC

    def __post_init__(self) -> None:
        if self.arrivals is not None and self.sim_time is not None:
            raise ValueError("give either arrivals or sim_time, not both")
        if self.arrivals is None and self.sim_time is None:
            object.__setattr__(self, "arrivals", DEFAULT_ARRIVALS)
        if self.arrivals is not None and self.arrivals < 1:
            raise ValueError(f"arrivals must be >= 1, got {self.arrivals}")
        if self.sim_time is not None and not self.sim_time > 0.0:
            raise ValueError(f"sim_time must be > 0, got {self.sim_time}")
        if not 0.0 <= self.warmup_frac < 1.0:
            raise ValueError(
                f"warmup_frac must lie in [0, 1), got {self.warmup_frac}"
            )
        object.__setattr__(self, "seed", int(self.seed))

    def to_dict(self) -> dict:
        return {
            "params": self.params.to_dict(),
            "seed": self.seed,
            "arrivals": self.arrivals,
            "sim_time": self.sim_time,
            "warmup_frac": self.warmup_frac,
        }


@dataclass
class SamplePath:
    """Exact piecewise-linear AoI sample path produced by one replication.

    epochs    : global update epochs (strictly increasing), shape (M,)
    sources   : 1-based source of each update, shape (M,)
    post_ages : post_ages[k-1, n] is source k's age immediately after
                epochs[n]; equals the update's service time when source k
                caused it, NaN before source k's first update
    window    : (lo, hi) epoch indices; estimators integrate over the
                complete intervals epochs[lo] .. epochs[hi]
    """

    params: ModelParams
    seed: int
    epochs: np.ndarray
    sources: np.ndarray
    post_ages: np.ndarray
    window: tuple[int, int]
    horizon_end: float
    n_arrivals: int
    arrival_counts: np.ndarray
    warmup_time: float
    rng_name: str = RNG_NAME
    config: dict = field(default_factory=dict)

    # -- basic counts -------------------------------------------------------

    @property
    def n_updates(self) -> int:
        return int(self.epochs.size)

    @property
    def n_valid(self) -> int:
        return self.n_updates

    @property
    def valid_fraction(self) -> float:
        return self.n_valid / self.n_arrivals if self.n_arrivals else math.nan

    @property
    def service_times(self) -> np.ndarray:
        """Service times of all valid packets, in global update order."""
        return self.post_ages[self.sources - 1, np.arange(self.n_updates)]

    def update_epochs_for(self, k: int) -> np.ndarray:
        self.params.arrival_rate(k)  # index check
        return self.epochs[self.sources == k]

    def service_times_for(self, k: int) -> np.ndarray:
        self.params.arrival_rate(k)
        mask = self.sources == k
        return self.post_ages[k - 1, mask]

    # -- measurement window -------------------------------------------------

    @property
    def window_interval_count(self) -> int:
        lo, hi = self.window
        return max(hi - lo, 0)

    @property
    def window_duration(self) -> float:
        lo, hi = self.window
        if hi <= lo:
            return 0.0
        return float(self.epochs[hi] - self.epochs[lo])

    def window_intervals(self) -> tuple[np.ndarray, np.ndarray]:
        """(interval lengths R_n, post-update ages at each interval start)."""
        lo, hi = self.window
        return np.diff(self.epochs[lo : hi + 1]), self.post_ages[:, lo:hi]

    # -- trajectory reconstruction ------------------------------------------

    def ages_at(self, t) -> np.ndarray:
        """A_k(t) for every source at the given time(s); NaN where a
        source has not yet been updated.  Shape (K,) or (K, len(t))."""
        t_arr = np.asarray(t, dtype=float)
        scalar = t_arr.ndim == 0
        t_arr = np.atleast_1d(t_arr)
        out = np.full((self.params.n_sources, t_arr.size), np.nan)
        for k in range(1, self.params.n_sources + 1):
            ep = self.update_epochs_for(k)
            sv = self.service_times_for(k)
            idx = np.searchsorted(ep, t_arr, side="right") - 1
            have = idx >= 0
            j = np.clip(idx, 0, None)
            if ep.size:
                out[k - 1] = np.where(have, (t_arr - ep[j]) + sv[j], np.nan)
        return out[:, 0] if scalar else out

    # -- construction from explicit updates (fixtures, tests) -----------------

    @classmethod
    def from_updates(
        cls,
        params: ModelParams,
        epochs,
        sources,
        service_times,
        *,
        window: tuple[int, int] | None = None,
        horizon_end: float | None = None,
        seed: int = 0,
    ) -> "SamplePath":
        """Build a path from an explicit list of updates.

        Intended for hand-computable fixtures: the post-update age matrix
        is reconstructed exactly from (epoch, source, service time) triples.
        The default window covers every complete interval after each source
        has updated once.
        """
        epochs = np.asarray(epochs, dtype=float)
        sources = np.asarray(sources, dtype=np.int64)
        svc = np.asarray(service_times, dtype=float)
        m = epochs.size
        if not (sources.size == m and svc.size == m):
            raise ValueError("epochs, sources, service_times must align")
        if m and (np.diff(epochs) <= 0).any():
            raise ValueError("epochs must be strictly increasing")
        if ((sources < 1) | (sources > params.n_sources)).any():
            raise ValueError("source labels must lie in 1..K")
        gen = epochs - svc
        post_ages = np.empty((params.n_sources, m))
        first = np.full(params.n_sources, -1)
        for k in range(params.n_sources):
            mask = sources == k + 1
            idx = np.flatnonzero(mask)
            if idx.size:
                first[k] = idx[0]
            filled = np.maximum.accumulate(np.where(mask, gen, -np.inf))
            ages = epochs - filled
            ages[np.isinf(ages)] = np.nan
            post_ages[k] = ages
        if m:
            post_ages[sources - 1, np.arange(m)] = svc
        if window is None:
            window = (int(first.max()), m - 1) if m and (first >= 0).all() else (0, 0)
        return cls(
            params=params,
            seed=seed,
            epochs=epochs,
            sources=sources,
            post_ages=post_ages,
            window=window,
            horizon_end=float(horizon_end if horizon_end is not None else (epochs[-1] if m else 0.0)),
            n_arrivals=m,
            arrival_counts=np.bincount(sources - 1, minlength=params.n_sources).astype(np.int64),
            warmup_time=0.0,
        )

    # -- export --------------------------------------------------------------

    def to_csv(self, fileobj: IO[str]) -> None:
        """One row per update: epoch, 1-based source, post-update age
        (the valid packet's service time)."""
        writer = csv.writer(fileobj, lineterminator="\n")
        writer.writerow(["epoch", "source", "post_update_age"])
        svc = self.service_times
        for n in range(self.n_updates):
            writer.writerow([repr(float(self.epochs[n])), int(self.sources[n]), repr(float(svc[n]))])

    def metadata(self) -> dict:
        lo, hi = self.window
        return {
            "seed": self.seed,
            "rng": self.rng_name,
            "config": self.config,
            "n_arrivals": self.n_arrivals,
            "n_updates": self.n_updates,
            "valid_fraction": self.valid_fraction,
            "horizon_end": self.horizon_end,
            "warmup_time": self.warmup_time,
            "window_start": float(self.epochs[lo]) if self.n_updates else None,
            "window_end": float(self.epochs[hi]) if self.n_updates else None,
        }

    def metadata_json(self) -> str:
        return json.dumps(self.metadata())


def _draw_labels(rng: np.random.Generator, p: ModelParams, n: int) -> np.ndarray:
    """0-based source labels via inverse CDF on uniforms (stable draw rule)."""
    probs = np.asarray(p.lambdas) / p.total_rate
    cum = np.cumsum(probs)
    u = rng.random(n)
    return np.clip(np.searchsorted(cum, u, side="right"), 0, p.n_sources - 1)


def run(cfg: SimConfig) -> SamplePath:
    """Simulate one replication and return its exact sample path.

    Deterministic given (seed, config).  Emits a HorizonTooSmall warning --
    not an error -- when some source ends up without a usable measurement
    window; estimators needing coverage raise on their own.
    """
    p = cfg.params
    lam, mu, n_src = p.total_rate, p.mu, p.n_sources
    rng = np.random.default_rng(np.random.SeedSequence(cfg.seed))

    if cfg.arrivals is not None:
        n = cfg.arrivals
        gaps = rng.exponential(1.0 / lam, size=n + 1)
        arrivals = np.cumsum(gaps[:-1])
        labels = _draw_labels(rng, p, n)
        services = rng.exponential(1.0 / mu, size=n)
        valid = gaps[1:] > services
        horizon_end = float(arrivals[-1] + gaps[-1])
    else:
        t_max = cfg.sim_time
        chunk = max(1024, int(lam * t_max * 1.1) + 64)
        gap_parts = [rng.exponential(1.0 / lam, size=chunk)]
        total = float(gap_parts[0].sum())
        while total <= t_max:
            gap_parts.append(rng.exponential(1.0 / lam, size=chunk))
            total += float(gap_parts[-1].sum())
        gaps = np.concatenate(gap_parts)
        times = np.cumsum(gaps)
        n = int(np.searchsorted(times, t_max, side="right"))
        # total gap mass exceeds t_max, so at least one arrival falls beyond
        # the horizon and every in-horizon arrival has a successor gap
        arrivals = times[:n]
        labels = _draw_labels(rng, p, n)
        services = rng.exponential(1.0 / mu, size=n)
        valid = gaps[1 : n + 1] > services
        valid &= arrivals + services <= t_max
        horizon_end = float(t_max)

    v_arr = arrivals[valid]
    v_src = labels[valid]
    v_svc = services[valid]
    epochs = v_arr + v_svc
    m = epochs.size

    post_ages = np.empty((n_src, m))
    first_update = np.full(n_src, -1)
    for k in range(n_src):
        mask = v_src == k
        idx = np.flatnonzero(mask)
        if idx.size:
            first_update[k] = idx[0]
        # arrival times are increasing, so max-accumulate == forward fill
        gen = np.maximum.accumulate(np.where(mask, v_arr, -np.inf))
        ages = epochs - gen
        ages[np.isinf(ages)] = np.nan
        post_ages[k] = ages
    if m:
        # the updater's post-update age is its service time, exactly
        post_ages[v_src, np.arange(m)] = v_svc

    warmup_time = cfg.warmup_frac * horizon_end
    if m == 0 or (first_update < 0).any():
        missing = [k + 1 for k in range(n_src) if m == 0 or first_update[k] < 0]
        warnings.warn(
            HorizonTooSmall(
                f"sources {missing} never updated within the horizon; "
                "window is empty"
            )
        )
        window = (0, 0)
    else:
        lo = max(int(first_update.max()), int(np.searchsorted(epochs, warmup_time)))
        hi = m - 1
        if hi <= lo:
            warnings.warn(
                HorizonTooSmall(
                    "no complete update interval after warm-up; "
                    "window is empty"
                )
            )
            window = (min(lo, hi), min(lo, hi))
        else:
            window = (lo, hi)
            in_window = np.unique(v_src[lo:hi])
            if in_window.size < n_src:
                missing = sorted(set(range(n_src)) - set(in_window.tolist()))
                warnings.warn(
                    HorizonTooSmall(
                        f"sources {[k + 1 for k in missing]} have no update "
                        "inside the measurement window"
                    )
                )

    return SamplePath(
        params=p,
        seed=cfg.seed,
        epochs=epochs,
        sources=(v_src + 1).astype(np.int64),
        post_ages=post_ages,
        window=window,
        horizon_end=horizon_end,
        n_arrivals=int(n),
        arrival_counts=np.bincount(labels, minlength=n_src).astype(np.int64),
        warmup_time=float(warmup_time),
        config=cfg.to_dict(),
    )


def replication_seeds(base_seed: int, n_reps: int) -> list[int]:
    """Derive n_reps independent 64-bit seeds from one base seed."""
    state = np.random.SeedSequence(base_seed).generate_state(n_reps, dtype=np.uint64)
    return [int(s) for s in state]


def run_replications(
    params: ModelParams,
    n_reps: int,
    base_seed: int,
    *,
    arrivals: int | None = None,
    sim_time: float | None = None,
    warmup_frac: float = DEFAULT_WARMUP_FRAC,
) -> list[SamplePath]:
    """Run n_reps independent replications with seeds derived from base_seed.

    Replications share no state and could run in parallel; they are executed
    sequentially here since each one is vectorized end to end.
    """
    seeds = replication_seeds(base_seed, n_reps)
    return [
        run(
            SimConfig(
                params=params,
                seed=s,
                arrivals=arrivals,
                sim_time=sim_time,
                warmup_frac=warmup_frac,
            )
        )
        for s in seeds
    ]


# ---------------------------------------------------------------------------
# Distributional check of update intervals
# ---------------------------------------------------------------------------

@dataclass
class IntervalLawRow:
    quantity: str
    analytic: float
    estimate: float
    se: float

    @property
    def z(self) -> float:
        if self.se == 0.0:
            return 0.0 if self.estimate == self.analytic else math.inf
        return (self.estimate - self.analytic) / self.se


@dataclass
class IntervalLawReport:
    """Standardized deviations of empirical update-interval statistics from
    the Exp(lambda)+Exp(mu) convolution law."""

    rows: list[IntervalLawRow]
    update_rate: float
    update_rate_analytic: float

    @property
    def update_rate_rel_err(self) -> float:
        return abs(self.update_rate - self.update_rate_analytic) / self.update_rate_analytic

    @property
    def max_abs_z(self) -> float:
        return max(abs(r.z) for r in self.rows)


def validate_interval_law(
    path: SamplePath,
    p: ModelParams | None = None,
    *,
    min_updates: int = 10_000,
) -> IntervalLawReport:
    """Compare empirical update-interval moments on the measurement window
    against their closed forms.

    Rows: first three moments of the global interval, and the mean interval
    per source.  Consecutive global intervals are i.i.d. (the system empties
    at every update), so in-path standard errors are valid.
    """
    p = p or path.params
    intervals, _ = path.window_intervals()
    n = intervals.size
    if n < min_updates:
        raise InsufficientSamples(
            f"need at least {min_updates} update intervals, got {n}"
        )
    m1, m2, m3 = analytics.global_interval_moments(p)
    rows = []
    for order, target in ((1, m1), (2, m2), (3, m3)):
        x = intervals**order
        rows.append(
            IntervalLawRow(
                quantity=f"interval_moment_{order}",
                analytic=target,
                estimate=float(x.mean()),
                se=float(x.std(ddof=1) / math.sqrt(n)),
            )
        )
    for k in range(1, p.n_sources + 1):
        ep = path.update_epochs_for(k)
        lo, hi = path.window
        ep = ep[(ep >= path.epochs[lo]) & (ep <= path.epochs[hi])]
        gaps = np.diff(ep)
        if gaps.size >= 2:
            rows.append(
                IntervalLawRow(
                    quantity=f"source_interval_mean[{k}]",
                    analytic=analytics.source_interval_mean(p, k),
                    estimate=float(gaps.mean()),
                    se=float(gaps.std(ddof=1) / math.sqrt(gaps.size)),
                )
            )
    rate = n / path.window_duration
    return IntervalLawReport(
        rows=rows,
        update_rate=float(rate),
        update_rate_analytic=1.0 / m1,
    )
