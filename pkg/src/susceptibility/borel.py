"""Borel distribution Bo(lambda): pmf, moments, cumulants, size bias, sampling."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .poly import compute_p

__all__ = [
    "BorelParams",
    "BorelMomentTable",
    "ProgenyCapExceeded",
    "borel_logpmf",
    "borel_pmf",
    "pair_pmf",
    "size_biased_pmf",
    "borel_moment",
    "borel_cumulant",
    "size_biased_moment",
    "sample_borel",
    "mgf_series",
    "mgf_functional_check",
    "mgf_t_bound",
    "moment_table",
    "truncated_sum",
]

DEFAULT_CAP = 10**7
SERIES_RTOL = 1e-16


class ProgenyCapExceeded(RuntimeError):
    """A branching-process draw exceeded the truncation cap."""


@dataclass(frozen=True)
class BorelParams:
    lam: float
    truncation_cap: int = DEFAULT_CAP

    def __post_init__(self):
        _check_lambda(self.lam)
        if self.truncation_cap < 1:
            raise ValueError("truncation_cap must be >= 1")


@dataclass
class BorelMomentTable:
    lam: float
    moments: dict[int, float] = field(default_factory=dict)
    cumulants: dict[int, float] = field(default_factory=dict)
    size_biased_moments: dict[int, float] = field(default_factory=dict)


def _check_lambda(lam: float) -> None:
    if not (0.0 < lam < 1.0):
        raise ValueError(f"lambda must lie in (0, 1), got {lam}")


def borel_logpmf(lam: float, j: int) -> float:
    _check_lambda(lam)
    if j < 1:
        raise ValueError(f"Borel support starts at 1, got j={j}")
    return (j - 1) * math.log(j) - math.lgamma(j + 1) + (j - 1) * math.log(lam) - j * lam


def borel_pmf(lam: float, j: int) -> float:
    """P(beta = j) = j^(j-1)/j! * lam^(j-1) * exp(-j lam), evaluated in log space."""
    return math.exp(borel_logpmf(lam, j))


def pair_pmf(lam: float, j: int) -> float:
    """Law of the sum of two independent Bo(lam) variables."""
    _check_lambda(lam)
    if j < 2:
        raise ValueError(f"pair support starts at 2, got j={j}")
    logv = (
        math.log(2.0)
        + (j - 3) * math.log(j)
        - math.lgamma(j - 1)
        + (j - 2) * math.log(lam)
        - j * lam
    )
    return math.exp(logv)


def size_biased_pmf(lam: float, j: int) -> float:
    """P(hat beta = j) = j P(beta = j) / E beta."""
    return j * borel_pmf(lam, j) * (1.0 - lam)


def borel_moment(lam: float, m: int) -> float:
    """E beta^m = p_{m+1}(1/(1-lam))."""
    _check_lambda(lam)
    if m < 0:
        raise ValueError("moment order must be >= 0")
    if m == 0:
        return 1.0
    return compute_p(m + 1)(1.0 / (1.0 - lam))


def borel_cumulant(lam: float, m: int) -> float:
    _check_lambda(lam)
    if m < 1:
        raise ValueError("cumulant order must be >= 1")
    if m == 1:
        return 1.0 / (1.0 - lam)
    return lam * borel_moment(lam, m)


def size_biased_moment(lam: float, m: int) -> float:
    """E hat_beta^m = (1 - lam) p_{m+2}(1/(1-lam))."""
    _check_lambda(lam)
    if m < 0:
        raise ValueError("moment order must be >= 0")
    if m == 0:
        return 1.0
    return (1.0 - lam) * compute_p(m + 2)(1.0 / (1.0 - lam))


def truncated_sum(term, start: int = 1, rtol: float = SERIES_RTOL, min_terms: int = 20,
                  max_terms: int = 10**6) -> float:
    """Sum ``term(j)`` for j = start, start+1, ... until terms drop below rtol * partial.

    The stopping rule is only applied past the mode of the summand, once the
    terms are decreasing.
    """
    total = 0.0
    prev = None
    for j in range(start, start + max_terms):
        t = term(j)
        total += t
        if (
            j - start >= min_terms
            and prev is not None
            and t <= prev
            and t < rtol * abs(total)
        ):
            return total
        prev = t
    raise RuntimeError("series did not converge within max_terms")


def _poisson_inversion(lam: float, rng: np.random.Generator) -> int:
    # lam < 1: expected number of loop iterations is lam + 1
    u = rng.random()
    k = 0
    p = math.exp(-lam)
    cdf = p
    while u > cdf:
        k += 1
        p *= lam / k
        cdf += p
        if p == 0.0:
            break
    return k


def sample_borel(lam: float, rng: np.random.Generator, cap: int = DEFAULT_CAP) -> int:
    """Total progeny of a Galton-Watson tree with Poisson(lam) offspring.

    Raises
    ------
    ProgenyCapExceeded
        If the running total passes ``cap``.  The draw is discarded rather than
        clamped; the caller decides whether to retry.
    """
    _check_lambda(lam)
    pending = 1
    total = 1
    while pending:
        pending -= 1
        kids = _poisson_inversion(lam, rng)
        if kids:
            pending += kids
            total += kids
            if total > cap:
                raise ProgenyCapExceeded(f"progeny exceeded cap {cap} at lambda={lam}")
    return total


def mgf_t_bound(lam: float) -> float:
    """Radius of convergence of E exp(t beta): t < lam - 1 - log(lam)."""
    _check_lambda(lam)
    return lam - 1.0 - math.log(lam)


def mgf_series(lam: float, t: float) -> float:
    # exp(t*j + logpmf) stays finite in log space even where pmf underflows
    return truncated_sum(lambda j: math.exp(t * j + borel_logpmf(lam, j)))


def mgf_functional_check(lam: float, t: float, margin: float = 0.01) -> float:
    """Residual |log psi - (lam psi - lam + t)| of the mgf functional equation."""
    _check_lambda(lam)
    bound = mgf_t_bound(lam)
    if t > bound - margin:
        raise ValueError(
            f"t={t} outside the convergence-safe region t <= {bound - margin:.6f}"
        )
    psi = mgf_series(lam, t)
    return abs(math.log(psi) - (lam * psi - lam + t))


def moment_table(lam: float, max_order: int = 6) -> BorelMomentTable:
    table = BorelMomentTable(lam=lam)
    for m in range(0, max_order + 1):
        table.moments[m] = borel_moment(lam, m)
        table.size_biased_moments[m] = size_biased_moment(lam, m)
        if m >= 1:
            table.cumulants[m] = borel_cumulant(lam, m)
    return table
