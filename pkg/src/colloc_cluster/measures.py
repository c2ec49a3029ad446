"""Association measures over bigram contingency counts.

All three measures are computed from the same sufficient statistics:
``c12`` (joint count), ``c1`` (pairs starting with w1), ``c2`` (pairs ending
in w2) and ``N`` (pair positions). PMI is in bits; the log-likelihood
statistic is -2 log(lambda) with natural logs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

FULL = "full"
SIMPLIFIED = "simplified"


class InvalidStats(ValueError):
    pass


@dataclass(frozen=True)
class BigramStats:
    c12: int
    c1: int
    c2: int
    N: int

    def __post_init__(self):
        c12, c1, c2, n = self.c12, self.c1, self.c2, self.N
        if n < 1:
            raise InvalidStats(f"N must be >= 1, got {n}")
        if c12 < 1:
            raise InvalidStats(f"c12 must be >= 1 (log of zero), got {c12}")
        if c12 > min(c1, c2):
            raise InvalidStats(f"c12={c12} exceeds min(c1={c1}, c2={c2})")
        if c1 > n or c2 > n:
            raise InvalidStats(f"marginals c1={c1}, c2={c2} exceed N={n}")
        # The cell "neither w1 first nor w2 second" must be non-negative.
        if c1 + c2 - c12 > n:
            raise InvalidStats(f"inconsistent table: c1 + c2 - c12 > N ({c1}+{c2}-{c12} > {n})")


@dataclass(frozen=True)
class MeasureVector:
    mi: float
    t: float
    llr: float
    t_degenerate: bool = False

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.mi, self.t, self.llr)


def pmi(s: BigramStats) -> float:
    """Pointwise mutual information in bits."""
    # c12*N / (c1*c2) is exact in integers before the single log.
    return math.log2(s.c12 * s.N / (s.c1 * s.c2))


def t_stat(s: BigramStats, variance: str = FULL) -> float:
    """Student t of the bigram MLE against its independence expectation.

    ``variance="full"`` uses S^2 = p(1-p) for the Bernoulli pair indicator;
    ``"simplified"`` uses the common S^2 ~ p approximation. When the
    variance vanishes (c12 == N) the result is a signed infinity, or 0.0 if
    the numerator is also zero; :func:`measure_all` flags either case.
    """
    n = s.N
    xbar = s.c12 / n
    mu = (s.c1 / n) * (s.c2 / n)
    diff = xbar - mu
    if s.c12 * n == s.c1 * s.c2:
        diff = 0.0
    s2 = xbar if variance == SIMPLIFIED else xbar * (1.0 - xbar)
    if s2 <= 0.0:
        return 0.0 if diff == 0.0 else math.copysign(math.inf, diff)
    return diff / math.sqrt(s2 / n)


def _binom_ll(p: float, k: int, n: int) -> float:
    # 0 * log 0 := 0
    out = 0.0
    if k > 0:
        out += k * math.log(p)
    if n - k > 0:
        out += (n - k) * math.log1p(-p)
    return out


def log_likelihood_ratio(s: BigramStats) -> float:
    """-2 log(lambda) for independence vs. dependence of w2 on a preceding w1."""
    k1, n1 = s.c12, s.c1
    k2, n2 = s.c2 - s.c12, s.N - s.c1
    p = s.c2 / s.N
    p1 = k1 / n1
    p2 = k2 / n2 if n2 else 0.0
    return 2.0 * (
        _binom_ll(p1, k1, n1)
        + _binom_ll(p2, k2, n2)
        - _binom_ll(p, k1, n1)
        - _binom_ll(p, k2, n2)
    )


def measure_all(s: BigramStats, variance: str = FULL) -> MeasureVector:
    t = t_stat(s, variance)
    degenerate = s.c12 == s.N and variance != SIMPLIFIED
    return MeasureVector(pmi(s), t, log_likelihood_ratio(s), degenerate)


# Vectorized forms used by the pipeline; identical formulas over int64 arrays.


def _xlogy(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    out = np.zeros(np.broadcast(x, y).shape)
    mask = x > 0
    np.multiply(x, np.log(y, where=mask, out=np.ones_like(out)), out=out, where=mask)
    return out


def _xlog1my(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    out = np.zeros(np.broadcast(x, y).shape)
    mask = x > 0
    np.multiply(x, np.log1p(-y, where=mask, out=np.zeros_like(out)), out=out, where=mask)
    return out


def measure_arrays(c12, c1, c2, n, variance: str = FULL):
    """Compute (mi, t, llr, t_degenerate) arrays for aligned count arrays."""
    c12 = np.asarray(c12, dtype=np.int64)
    c1 = np.asarray(c1, dtype=np.int64)
    c2 = np.asarray(c2, dtype=np.int64)
    n = np.broadcast_to(np.asarray(n, dtype=np.int64), c12.shape)
    nf = n.astype(np.float64)

    mi = np.log2((c12 * n) / (c1 * c2))

    xbar = c12 / nf
    diff = xbar - (c1 / nf) * (c2 / nf)
    diff = np.where(c12 * n == c1 * c2, 0.0, diff)
    s2 = xbar if variance == SIMPLIFIED else xbar * (1.0 - xbar)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = diff / np.sqrt(s2 / nf)
    degenerate = s2 <= 0.0
    t = np.where(degenerate, np.where(diff == 0.0, 0.0, np.copysign(np.inf, diff)), t)
    degenerate = degenerate | ((c12 == n) & (variance != SIMPLIFIED))

    k1, n1 = c12, c1
    k2, n2 = c2 - c12, n - c1
    p = c2 / nf
    p1 = k1 / n1
    with np.errstate(divide="ignore", invalid="ignore"):
        p2 = np.where(n2 > 0, k2 / np.maximum(n2, 1), 0.0)

    def ll(prob, k, trials):
        return _xlogy(k, prob) + _xlog1my(trials - k, prob)

    llr = 2.0 * (ll(p1, k1, n1) + ll(p2, k2, n2) - ll(p, k1, n1) - ll(p, k2, n2))
    return mi, t, llr, degenerate
