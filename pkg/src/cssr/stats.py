"""Two-sample tests on next-symbol counts, and total-variation distance."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.stats import chi2

from .errors import DimensionMismatch, EmptySample, InvalidDistribution
from .parse_tree import CountVector

DEFAULT_ALPHA = 1e-3
KS = "ks"
CHISQ = "chisq"

_SERIES_EPS = 1e-12
_MIN_EXPECTED = 5.0


@dataclass(frozen=True)
class TestResult:
    statistic: float
    p_value: float
    reject: bool

    __test__ = False  # not a pytest class


@dataclass(frozen=True)
class DiscreteDistribution:
    probs: tuple[float, ...]

    def __post_init__(self):
        probs = tuple(float(p) for p in self.probs)
        if any(p < 0 or not math.isfinite(p) for p in probs) or abs(sum(probs) - 1.0) > 1e-9:
            raise InvalidDistribution(f"not a probability vector: {probs}")
        object.__setattr__(self, "probs", probs)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.probs, dtype=dtype)

    def __len__(self):
        return len(self.probs)


def total_variation(p: Sequence[float], q: Sequence[float]) -> float:
    """Sum of absolute differences, in [0, 2]."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise DimensionMismatch(f"distributions of shape {p.shape} and {q.shape}")
    return float(np.abs(p - q).sum())


def kolmogorov_sf(t: float) -> float:
    """P(K > t) for the limiting Kolmogorov distribution.

    Uses the alternating series 2 sum (-1)^(j-1) exp(-2 j^2 t^2) for t >= 1.
    Below that the series converges too slowly, so the Jacobi theta form of
    the CDF, sqrt(2 pi)/t sum exp(-(2j-1)^2 pi^2 / (8 t^2)), is used instead.
    Both are truncated once a term drops below 1e-12.
    """
    if t <= 0:
        return 1.0
    if t < 1.0:
        c = math.pi**2 / (8.0 * t * t)
        s = 0.0
        j = 1
        while True:
            term = math.exp(-((2 * j - 1) ** 2) * c)
            s += term
            if term < _SERIES_EPS:
                break
            j += 1
        return min(1.0, max(0.0, 1.0 - math.sqrt(2.0 * math.pi) / t * s))
    s = 0.0
    j = 1
    while True:
        term = math.exp(-2.0 * j * j * t * t)
        s += term if j % 2 else -term
        if term < _SERIES_EPS:
            break
        j += 1
    return min(1.0, max(0.0, 2.0 * s))


def _check_samples(c1: CountVector, c2: CountVector) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(c1.counts, dtype=float)
    b = np.asarray(c2.counts, dtype=float)
    if a.shape != b.shape:
        raise DimensionMismatch(f"count vectors of length {a.size} and {b.size}")
    if a.sum() < 1 or b.sum() < 1:
        raise EmptySample("both samples need at least one observation")
    return a, b


def ks_two_sample(c1: CountVector, c2: CountVector, alpha: float = DEFAULT_ALPHA) -> TestResult:
    """Kolmogorov-Smirnov test between two samples over an ordered alphabet.

    The empirical CDFs are taken over the fixed alphabet order. The p-value
    is the asymptotic Kolmogorov tail, which is conservative for discrete
    data.
    """
    a, b = _check_samples(c1, c2)
    n1, n2 = a.sum(), b.sum()
    d = float(np.max(np.abs(np.cumsum(a) / n1 - np.cumsum(b) / n2)))
    # cumsum rounding can leave ~1e-16 where the CDFs agree exactly
    if d < 1e-12:
        d = 0.0
    p = kolmogorov_sf(d * math.sqrt(n1 * n2 / (n1 + n2)))
    return TestResult(d, p, p < alpha)


def _merge_cells(pooled: np.ndarray, frac_min: float) -> list[list[int]]:
    bins: list[list[int]] = []
    current: list[int] = []
    acc = 0.0
    for i, total in enumerate(pooled):
        current.append(i)
        acc += total
        if acc * frac_min >= _MIN_EXPECTED:
            bins.append(current)
            current, acc = [], 0.0
    if current:
        if bins:
            bins[-1].extend(current)
        else:
            bins.append(current)
    return bins


def chi_squared_two_sample(c1: CountVector, c2: CountVector, alpha: float = DEFAULT_ALPHA) -> TestResult:
    """Pearson chi-squared test of homogeneity on the k x 2 table.

    Adjacent categories (alphabet order) are merged until every expected
    cell count is at least 5; a table left with fewer than two categories
    gives p = 1.
    """
    a, b = _check_samples(c1, c2)
    n1, n2 = a.sum(), b.sum()
    n = n1 + n2
    bins = _merge_cells(a + b, min(n1, n2) / n)
    if len(bins) < 2:
        return TestResult(0.0, 1.0, False)
    obs = np.array([[a[idx].sum(), b[idx].sum()] for idx in bins])
    expected = obs.sum(axis=1, keepdims=True) * np.array([n1, n2]) / n
    stat = float(((obs - expected) ** 2 / expected).sum())
    p = float(chi2.sf(stat, len(bins) - 1))
    return TestResult(stat, p, p < alpha)


TESTS = {KS: ks_two_sample, CHISQ: chi_squared_two_sample}


def get_test(name: str):
    try:
        return TESTS[name]
    except KeyError:
        raise ValueError(f"unknown test {name!r}; choose from {sorted(TESTS)}") from None
