"""Model parameters for the multi-source preemptive M/M/1/1 status-update queue.

K sources emit packets as independent Poisson streams with rates lambda_k;
all packets share one server with Exp(mu) service and no buffer, and any new
arrival pushes out the packet in service.  Everything downstream (closed
forms and simulation) is a function of these rates, so this module is the
single source of truth for them.

Source indices are 1-based in the public API, matching the usual
k in {1, ..., K} convention.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable

from .errors import EmptySourceList, IndexOutOfRange, NonPositiveRate

__all__ = [
    "ModelParams",
    "validate",
    "valid_packet_probability",
    "effective_update_rate",
]


@dataclass(frozen=True)
class ModelParams:
    """Validated arrival rates and the shared service rate.

    lambdas : per-source Poisson arrival rates (events per unit time)
    mu      : exponential service rate shared by all sources
    """

    lambdas: tuple[float, ...]
    mu: float

    def __post_init__(self) -> None:
        lambdas = tuple(float(lam) for lam in self.lambdas)
        if not lambdas:
            raise EmptySourceList("at least one source is required")
        for i, lam in enumerate(lambdas, start=1):
            if not math.isfinite(lam) or lam <= 0.0:
                raise NonPositiveRate(
                    f"lambda_{i} must be a finite positive rate, got {lam!r}"
                )
        mu = float(self.mu)
        if not math.isfinite(mu) or mu <= 0.0:
            raise NonPositiveRate(f"mu must be a finite positive rate, got {mu!r}")
        object.__setattr__(self, "lambdas", lambdas)
        object.__setattr__(self, "mu", mu)

    @property
    def n_sources(self) -> int:
        return len(self.lambdas)

    @property
    def total_rate(self) -> float:
        """Merged arrival rate lambda = sum of all lambda_k."""
        return math.fsum(self.lambdas)

    def arrival_rate(self, k: int) -> float:
        """Arrival rate of source k (1-based)."""
        if not 1 <= k <= self.n_sources:
            raise IndexOutOfRange(
                f"source index {k} outside 1..{self.n_sources}"
            )
        return self.lambdas[k - 1]

    def to_dict(self) -> dict:
        return {"lambdas": list(self.lambdas), "mu": self.mu}

    @classmethod
    def from_dict(cls, d: dict) -> "ModelParams":
        return cls(lambdas=tuple(d["lambdas"]), mu=d["mu"])

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, s: str) -> "ModelParams":
        return cls.from_dict(json.loads(s))


def validate(lambdas: Iterable[float], mu: float) -> ModelParams:
    """Build ModelParams from raw rates, rejecting empty or non-positive input."""
    return ModelParams(lambdas=tuple(lambdas), mu=mu)


def valid_packet_probability(p: ModelParams) -> float:
    """Probability mu/(lambda+mu) that an arriving packet completes service
    before the next arrival (of any source) pushes it out."""
    return p.mu / (p.total_rate + p.mu)


def effective_update_rate(p: ModelParams, k: int) -> float:
    """Rate lambda_k * mu / (lambda + mu) at which source k's monitor is
    actually updated, i.e. the arrival rate of its valid packets."""
    return p.arrival_rate(k) * p.mu / (p.total_rate + p.mu)
