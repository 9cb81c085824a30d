"""Single-pass summary statistics with associative merge.

Univariate central moments up to order four use the one-pass updates of
Pebay (2008); the merge is Chan et al.'s pairwise combination.  Co-moments of
a vector stream are accumulated the same way, so partial states from
independent workers can be merged in any order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "MomentAccumulator",
    "CovarianceAccumulator",
    "SummaryStats",
    "JB_CRITICAL_999",
    "jarque_bera",
    "summarize",
]

# 0.999 quantile of chi-square with two degrees of freedom: -2 log(0.001)
JB_CRITICAL_999 = -2.0 * math.log(1e-3)


class MomentAccumulator:
    """Running count, mean and central sums M2..M4 of a scalar stream."""

    __slots__ = ("n", "mean", "m2", "m3", "m4")

    def __init__(self):
        self.n = 0
        self.mean = 0.0
        self.m2 = 0.0
        self.m3 = 0.0
        self.m4 = 0.0

    def push(self, x: float) -> None:
        n1 = self.n
        self.n += 1
        n = self.n
        delta = x - self.mean
        dn = delta / n
        dn2 = dn * dn
        term1 = delta * dn * n1
        self.mean += dn
        self.m4 += term1 * dn2 * (n * n - 3 * n + 3) + 6 * dn2 * self.m2 - 4 * dn * self.m3
        self.m3 += term1 * dn * (n - 2) - 3 * dn * self.m2
        self.m2 += term1

    def extend(self, xs) -> "MomentAccumulator":
        for x in xs:
            self.push(float(x))
        return self

    def merge(self, other: "MomentAccumulator") -> "MomentAccumulator":
        if other.n == 0:
            return self
        if self.n == 0:
            for s in self.__slots__:
                setattr(self, s, getattr(other, s))
            return self
        na, nb = self.n, other.n
        n = na + nb
        delta = other.mean - self.mean
        d2, d3, d4 = delta**2, delta**3, delta**4
        m2 = self.m2 + other.m2 + d2 * na * nb / n
        m3 = (
            self.m3 + other.m3
            + d3 * na * nb * (na - nb) / n**2
            + 3 * delta * (na * other.m2 - nb * self.m2) / n
        )
        m4 = (
            self.m4 + other.m4
            + d4 * na * nb * (na * na - na * nb + nb * nb) / n**3
            + 6 * d2 * (na * na * other.m2 + nb * nb * self.m2) / n**2
            + 4 * delta * (na * other.m3 - nb * self.m3) / n
        )
        self.n, self.mean, self.m2, self.m3, self.m4 = n, self.mean + delta * nb / n, m2, m3, m4
        return self

    @property
    def variance(self) -> float:
        """Unbiased sample variance."""
        return self.m2 / (self.n - 1) if self.n > 1 else math.nan

    @property
    def skewness(self) -> float:
        """Moment estimator g1 = m3 / m2^(3/2) (population-style moments)."""
        if self.m2 <= 0:
            return math.nan
        return math.sqrt(self.n) * self.m3 / self.m2**1.5

    @property
    def excess_kurtosis(self) -> float:
        if self.m2 <= 0:
            return math.nan
        return self.n * self.m4 / (self.m2 * self.m2) - 3.0


class CovarianceAccumulator:
    """Running mean vector and co-moment matrix of a vector stream."""

    def __init__(self, dim: int):
        self.dim = dim
        self.n = 0
        self.mean = np.zeros(dim)
        self.comoment = np.zeros((dim, dim))

    def push(self, x) -> None:
        x = np.asarray(x, dtype=float)
        self.n += 1
        delta = x - self.mean
        self.mean += delta / self.n
        self.comoment += np.outer(delta, x - self.mean)

    def merge(self, other: "CovarianceAccumulator") -> "CovarianceAccumulator":
        if other.n == 0:
            return self
        na, nb = self.n, other.n
        n = na + nb
        delta = other.mean - self.mean
        self.comoment = self.comoment + other.comoment + np.outer(delta, delta) * na * nb / n
        self.mean = self.mean + delta * nb / n
        self.n = n
        return self

    @property
    def covariance(self) -> np.ndarray:
        if self.n < 2:
            return np.full((self.dim, self.dim), np.nan)
        return self.comoment / (self.n - 1)


def jarque_bera(n: int, g1: float, g2: float) -> float:
    return n * (g1 * g1 / 6.0 + g2 * g2 / 24.0)


@dataclass
class SummaryStats:
    name: str
    n: int
    mean: float
    variance: float
    skewness: float
    excess_kurtosis: float
    jb: float

    @property
    def se_mean(self) -> float:
        return math.sqrt(self.variance / self.n)

    @property
    def se_variance(self) -> float:
        # large-sample SE of the sample variance: var * sqrt((kurt - 1)/n), kurt = g2 + 3
        return self.variance * math.sqrt(max(self.excess_kurtosis + 2.0, 0.0) / self.n)

    @classmethod
    def from_accumulator(cls, name: str, acc: MomentAccumulator) -> "SummaryStats":
        g1, g2 = acc.skewness, acc.excess_kurtosis
        return cls(name, acc.n, acc.mean, acc.variance, g1, g2, jarque_bera(acc.n, g1, g2))


def summarize(name: str, xs) -> SummaryStats:
    return SummaryStats.from_accumulator(name, MomentAccumulator().extend(xs))
