"""Closed-form age-of-information quantities for the preemptive M/M/1/1 queue.

Everything here is an exact function of the model rates: Laplace-Stieltjes
transforms (LSTs) of the stationary per-source age and of update intervals,
their moments, the explicit age density obtained by partial-fraction
inversion of the age LST, the post-update age moments, the stationary
cross moment E[A1*A2], and the Pearson correlation coefficient of the two
ages for K = 2.

Notation used throughout the docstrings: lambda_k is the rate of source k,
lambda = sum of all lambda_k, mu the service rate, A_k the stationary age
of source k, and R the interval between consecutive monitor updates of any
source.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    NegativeTime,
    NegativeTransformArgument,
    RequiresTwoSources,
)
from .model import ModelParams, effective_update_rate

__all__ = [
    "AoiDistribution",
    "CorrelationReport",
    "RhoPropertyReport",
    "aoi_lst",
    "aoi_lst_post",
    "aoi_lst_pre",
    "mean_aoi",
    "var_aoi",
    "aoi_distribution",
    "aoi_pdf",
    "aoi_cdf",
    "update_interval_lst_per_source",
    "update_interval_lst_global",
    "global_interval_moments",
    "source_interval_mean",
    "post_update_age_mean",
    "post_update_cross_moment",
    "stationary_cross_moment",
    "mean_interval_cross_area",
    "correlation_coefficient",
    "rho_properties_check",
]

# Confluent partial fractions are triggered when the discriminant of the
# age-LST denominator falls below this multiple of (lambda+mu)^2; avoids
# catastrophic cancellation when the two decay rates nearly coincide.
_CONFLUENT_REL_TOL = 1e-12


def _check_s(s):
    s = np.asarray(s, dtype=float)
    if np.any(s < 0.0):
        raise NegativeTransformArgument("transform argument s must be >= 0")
    return s


def _check_t(t):
    t = np.asarray(t, dtype=float)
    if np.any(t < 0.0):
        raise NegativeTime("time argument t must be >= 0")
    return t


def _maybe_scalar(x, arr):
    return arr.item() if np.isscalar(x) or np.ndim(x) == 0 else arr


def _require_two_sources(p: ModelParams) -> None:
    if p.n_sources != 2:
        raise RequiresTwoSources(
            f"this quantity is defined for exactly two sources, got K={p.n_sources}"
        )


# ---------------------------------------------------------------------------
# Per-source age LST and its moments
# ---------------------------------------------------------------------------

def aoi_lst(p: ModelParams, k: int, s) -> float | np.ndarray:
    """LST E[exp(-s*A_k)] of the stationary age of source k.

    Closed form: lambda_k*mu / ((s+lambda)(s+mu) - (lambda-lambda_k)*mu),
    whose denominator simplifies to s^2 + (lambda+mu)*s + lambda_k*mu.
    Accepts scalar or ndarray s >= 0; equals 1 at s = 0.
    """
    lam_k = p.arrival_rate(k)
    lam, mu = p.total_rate, p.mu
    s = _check_s(s)
    val = lam_k * mu / ((s + lam) * (s + mu) - (lam - lam_k) * mu)
    return _maybe_scalar(s, val)


def aoi_lst_post(p: ModelParams, k: int, s) -> float | np.ndarray:
    """LST of the age immediately after a source-k update.

    The post-update age equals the service time of the valid packet, which
    is Exp(lambda+mu), so the LST is (lambda+mu)/(s+lambda+mu) for every k.
    """
    p.arrival_rate(k)  # index check only; the law does not depend on k
    lam, mu = p.total_rate, p.mu
    s = _check_s(s)
    val = (lam + mu) / (s + lam + mu)
    return _maybe_scalar(s, val)


def aoi_lst_pre(p: ModelParams, k: int, s) -> float | np.ndarray:
    """LST of the age immediately before a source-k update.

    The pre-update age is the previous post-update age plus one source-k
    update interval, two independent terms, so the LST is the product of
    aoi_lst_post and update_interval_lst_per_source.
    """
    s = _check_s(s)
    val = aoi_lst_post(p, k, s) * update_interval_lst_per_source(p, k, s)
    return _maybe_scalar(s, np.asarray(val))


def mean_aoi(p: ModelParams, k: int) -> float:
    """Stationary mean age of source k: (1/lambda_k) * (1 + lambda/mu)."""
    lam_k = p.arrival_rate(k)
    return (1.0 / lam_k) * (1.0 + p.total_rate / p.mu)


def var_aoi(p: ModelParams, k: int) -> float:
    """Stationary age variance of source k:

    (1/lambda_k^2) * (1 + 2*(lambda-lambda_k)/mu + lambda^2/mu^2).
    """
    lam_k = p.arrival_rate(k)
    lam, mu = p.total_rate, p.mu
    return (1.0 + 2.0 * (lam - lam_k) / mu + (lam / mu) ** 2) / lam_k**2


# ---------------------------------------------------------------------------
# Explicit age distribution via partial fractions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AoiDistribution:
    """Stationary age distribution of one source as a two-rate density.

    The age LST has the quadratic denominator s^2 + (lambda+mu)*s +
    lambda_k*mu with provably real roots -r1, -r2, so the density is an
    explicit difference of exponentials,

        pdf(t) = scale * (exp(-r1*t) - exp(-r2*t)) / (r2 - r1),

    degenerating to scale * t * exp(-r1*t) when the roots coincide
    (possible only for a single source with lambda = mu).

    r1, r2  : decay rates, 0 < r1 <= r2, r1*r2 = lambda_k*mu,
              r1 + r2 = lambda + mu
    scale   : lambda_k * mu
    confluent : True when the roots coincide within tolerance
    """

    r1: float
    r2: float
    scale: float
    confluent: bool

    def pdf(self, t):
        return aoi_pdf(self, t)

    def cdf(self, t):
        return aoi_cdf(self, t)


def aoi_distribution(p: ModelParams, k: int) -> AoiDistribution:
    """Invert the age LST of source k into an explicit AoiDistribution.

    Roots: r1,2 = ((lambda+mu) -/+ sqrt((lambda+mu)^2 - 4*lambda_k*mu)) / 2.
    The discriminant equals (lambda-mu)^2 + 4*(lambda-lambda_k)*mu >= 0, so
    the roots are always real.  The smaller root is computed from the
    product identity r1 = lambda_k*mu / r2 to avoid cancellation.
    """
    lam_k = p.arrival_rate(k)
    lam, mu = p.total_rate, p.mu
    b = lam + mu
    scale = lam_k * mu
    disc = b * b - 4.0 * scale
    if disc < _CONFLUENT_REL_TOL * b * b:
        r = 0.5 * b
        return AoiDistribution(r1=r, r2=r, scale=scale, confluent=True)
    r2 = 0.5 * (b + math.sqrt(disc))
    r1 = scale / r2
    return AoiDistribution(r1=r1, r2=r2, scale=scale, confluent=False)


def aoi_pdf(d: AoiDistribution, t) -> float | np.ndarray:
    """Density of the stationary age at t >= 0 (scalar or ndarray)."""
    t = _check_t(t)
    if d.confluent:
        val = d.scale * t * np.exp(-d.r1 * t)
    else:
        delta = d.r2 - d.r1
        # exp(-r1 t) - exp(-r2 t) = exp(-r1 t) * (1 - exp(-delta t)), via expm1
        val = d.scale * np.exp(-d.r1 * t) * (-np.expm1(-delta * t)) / delta
    return _maybe_scalar(t, val)


def aoi_cdf(d: AoiDistribution, t) -> float | np.ndarray:
    """CDF of the stationary age at t >= 0 (scalar or ndarray).

    Non-confluent form: 1 - (r2*exp(-r1*t) - r1*exp(-r2*t)) / (r2 - r1),
    evaluated through expm1 so nearly equal roots stay accurate.
    """
    t = _check_t(t)
    if d.confluent:
        survival = (1.0 + d.r1 * t) * np.exp(-d.r1 * t)
    else:
        delta = d.r2 - d.r1
        survival = np.exp(-d.r1 * t) * (1.0 + d.r1 * (-np.expm1(-delta * t)) / delta)
    return _maybe_scalar(t, 1.0 - survival)


# ---------------------------------------------------------------------------
# Update-interval LSTs and moments
# ---------------------------------------------------------------------------

def update_interval_lst_per_source(p: ModelParams, k: int, s) -> float | np.ndarray:
    """LST of the interval between consecutive source-k updates.

    lambda_k*mu / ((s+lambda)(s+mu) - (lambda-lambda_k)*mu) -- the same
    expression as the stationary age LST of source k.
    """
    return aoi_lst(p, k, s)


def update_interval_lst_global(p: ModelParams, s) -> float | np.ndarray:
    """LST of the interval between consecutive updates of any source.

    (lambda/(s+lambda)) * (mu/(s+mu)): the interval is the independent sum
    of an Exp(lambda) and an Exp(mu) variable.
    """
    lam, mu = p.total_rate, p.mu
    s = _check_s(s)
    val = (lam / (s + lam)) * (mu / (s + mu))
    return _maybe_scalar(s, val)


def global_interval_moments(p: ModelParams) -> tuple[float, float, float]:
    """First three moments of the global update interval R = Exp(lambda)+Exp(mu):

    E[R]   = 1/lambda + 1/mu
    E[R^2] = 2*(1/lambda^2 + 1/(lambda*mu) + 1/mu^2)
    E[R^3] = 6*(1/lambda^3 + 1/(lambda^2*mu) + 1/(lambda*mu^2) + 1/mu^3)
    """
    a, b = 1.0 / p.total_rate, 1.0 / p.mu
    m1 = a + b
    m2 = 2.0 * (a * a + a * b + b * b)
    m3 = 6.0 * (a**3 + a * a * b + a * b * b + b**3)
    return m1, m2, m3


def source_interval_mean(p: ModelParams, k: int) -> float:
    """Mean interval between source-k updates: (lambda+mu)/(lambda_k*mu),
    the reciprocal of the effective update rate of source k."""
    return 1.0 / effective_update_rate(p, k)


# ---------------------------------------------------------------------------
# Post-update age moments and cross moment (K = 2)
# ---------------------------------------------------------------------------

def post_update_age_mean(p: ModelParams, k: int) -> float:
    """Mean age of source k sampled just after an update of either source:

    1/(lambda+mu) + ((lambda-lambda_k)/lambda_k) * (1/lambda + 1/mu).
    """
    _require_two_sources(p)
    lam_k = p.arrival_rate(k)
    lam, mu = p.total_rate, p.mu
    return 1.0 / (lam + mu) + ((lam - lam_k) / lam_k) * (1.0 / lam + 1.0 / mu)


def post_update_cross_moment(p: ModelParams) -> float:
    """Mean product of the two ages sampled just after any update:

    2/(lambda+mu)^2 + (lambda^2/(lambda1*lambda2) - 2)
                      * (1/lambda + 1/mu) / (lambda+mu).
    """
    _require_two_sources(p)
    lam1, lam2 = p.lambdas
    lam, mu = p.total_rate, p.mu
    er = 1.0 / lam + 1.0 / mu
    return 2.0 / (lam + mu) ** 2 + (lam * lam / (lam1 * lam2) - 2.0) * er / (lam + mu)


def stationary_cross_moment(p: ModelParams) -> float:
    """Stationary time-average cross moment E[A1*A2]:

    (lambda^2/(lambda1*lambda2)) * (1/lambda + 1/mu)^2
      - 2 * (1/lambda + 1/mu) / (lambda+mu).
    """
    _require_two_sources(p)
    lam1, lam2 = p.lambdas
    lam, mu = p.total_rate, p.mu
    er = 1.0 / lam + 1.0 / mu
    return (lam * lam / (lam1 * lam2)) * er * er - 2.0 * er / (lam + mu)


def mean_interval_cross_area(p: ModelParams) -> float:
    """Expected integral of A1(t)*A2(t) over one global update interval:

    (lambda^2/(lambda1*lambda2)) * (1/lambda + 1/mu)^3
      - 2 * (1/lambda + 1/mu)^2 / (lambda+mu).

    Dividing by the mean interval length 1/lambda + 1/mu recovers
    stationary_cross_moment (renewal-reward identity).
    """
    _require_two_sources(p)
    lam1, lam2 = p.lambdas
    lam, mu = p.total_rate, p.mu
    er = 1.0 / lam + 1.0 / mu
    return (lam * lam / (lam1 * lam2)) * er**3 - 2.0 * er * er / (lam + mu)


# ---------------------------------------------------------------------------
# Correlation coefficient (K = 2)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CorrelationReport:
    """Correlation of the two stationary ages with all ingredients exposed.

    rho is always in [-1/6, 0) for this model; cov and cross_moment carry
    units of time^2.
    """

    rho: float
    cov: float
    mean1: float
    mean2: float
    var1: float
    var2: float
    cross_moment: float

    def to_dict(self) -> dict:
        return {
            "rho": self.rho,
            "cov": self.cov,
            "mean1": self.mean1,
            "mean2": self.mean2,
            "var1": self.var1,
            "var2": self.var2,
            "cross_moment": self.cross_moment,
        }


def _rho_closed_form(lam1: float, lam2: float, mu: float) -> float:
    lam = lam1 + lam2
    d1 = lam * lam + 2.0 * lam1 * mu + mu * mu
    d2 = lam * lam + 2.0 * lam2 * mu + mu * mu
    return -2.0 * lam1 * lam2 * mu / (lam * math.sqrt(d1 * d2))


def _assembled_covariance(p: ModelParams) -> tuple[float, float]:
    # Exact rational assembly of cov = E[A1 A2] - E[A1] E[A2] and of
    # V[A1]*V[A2]; the float subtraction loses far more than 1e-12 of
    # relative accuracy when rho is tiny (very asymmetric rates).
    lam1, lam2 = (Fraction(lam) for lam in p.lambdas)
    mu = Fraction(p.mu)
    lam = lam1 + lam2
    er = 1 / lam + 1 / mu
    cross = (lam * lam / (lam1 * lam2)) * er * er - 2 * er / (lam + mu)
    m1 = (1 + lam / mu) / lam1
    m2 = (1 + lam / mu) / lam2
    v1 = (1 + 2 * (lam - lam1) / mu + (lam / mu) ** 2) / lam1**2
    v2 = (1 + 2 * (lam - lam2) / mu + (lam / mu) ** 2) / lam2**2
    cov = cross - m1 * m2
    return float(cov), float(v1 * v2)


def correlation_coefficient(p: ModelParams) -> CorrelationReport:
    """Pearson correlation of the two stationary ages, with full report.

    Closed form: rho = -2*lambda1*lambda2*mu /
        (lambda * sqrt((lambda^2+2*lambda1*mu+mu^2)*(lambda^2+2*lambda2*mu+mu^2))).

    The same value is assembled independently from the cross moment, means
    and variances; the two routes must agree to 1e-12 relative.
    """
    _require_two_sources(p)
    lam1, lam2 = p.lambdas
    rho = _rho_closed_form(lam1, lam2, p.mu)
    cov, var_prod = _assembled_covariance(p)
    rho_assembled = cov / math.sqrt(var_prod)
    if abs(rho_assembled - rho) > 1e-12 * abs(rho):
        raise ArithmeticError(
            "correlation routes disagree: "
            f"closed form {rho!r} vs assembled {rho_assembled!r}"
        )
    return CorrelationReport(
        rho=rho,
        cov=cov,
        mean1=mean_aoi(p, 1),
        mean2=mean_aoi(p, 2),
        var1=var_aoi(p, 1),
        var2=var_aoi(p, 2),
        cross_moment=stationary_cross_moment(p),
    )


# ---------------------------------------------------------------------------
# Grid property check for rho
# ---------------------------------------------------------------------------

@dataclass
class RhoPropertyReport:
    """Result of sweeping rho over a parameter grid.

    Checks, per point: rho < 0; rho >= -1/6 - floor_tol; |rho| <= limit_tol
    whenever some single rate exceeds limit_threshold (large-rate limit);
    and rho = -1/6 within floor_tol at balanced points lambda1 = lambda2 =
    mu/2.  Violations are collected rather than raised.
    """

    n_points: int = 0
    rho_min: float = math.inf
    argmin: tuple[float, float, float] | None = None
    floor_attained: bool = False
    nonnegative: list[tuple[tuple[float, float, float], float]] = field(default_factory=list)
    below_floor: list[tuple[tuple[float, float, float], float]] = field(default_factory=list)
    limit_violations: list[tuple[tuple[float, float, float], float]] = field(default_factory=list)
    floor_violations: list[tuple[tuple[float, float, float], float]] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not (
            self.nonnegative
            or self.below_floor
            or self.limit_violations
            or self.floor_violations
        )


def rho_properties_check(
    grid: Iterable[Sequence[float]],
    *,
    floor_tol: float = 1e-9,
    limit_threshold: float = 1e5,
    limit_tol: float = 1e-4,
) -> RhoPropertyReport:
    """Evaluate rho over a grid of (lambda1, lambda2, mu) triples and report
    where its structural properties fail (negativity, -1/6 floor, large-rate
    decay, exact floor at lambda1 = lambda2 = mu/2)."""
    report = RhoPropertyReport()
    floor = -1.0 / 6.0
    for triple in grid:
        lam1, lam2, mu = (float(x) for x in triple)
        p = ModelParams(lambdas=(lam1, lam2), mu=mu)
        rho = _rho_closed_form(lam1, lam2, p.mu)
        point = (lam1, lam2, mu)
        report.n_points += 1
        if rho < report.rho_min:
            report.rho_min = rho
            report.argmin = point
        if rho >= 0.0:
            report.nonnegative.append((point, rho))
        if rho < floor - floor_tol:
            report.below_floor.append((point, rho))
        if max(lam1, lam2, mu) >= limit_threshold and abs(rho) > limit_tol:
            report.limit_violations.append((point, rho))
        balanced = (
            math.isclose(lam1, lam2, rel_tol=1e-12)
            and math.isclose(mu, 2.0 * lam1, rel_tol=1e-12)
        )
        if balanced:
            if abs(rho - floor) <= floor_tol:
                report.floor_attained = True
            else:
                report.floor_violations.append((point, rho))
    return report
