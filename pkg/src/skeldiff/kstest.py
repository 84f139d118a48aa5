"""Two-sample Kolmogorov-Smirnov test over measurement count tables."""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import EmptySample
from .simulator import MeasurementSample


@dataclass(frozen=True)
class KsResult:
    k: float  # sup-distance between the empirical CDFs
    p: float  # significance from the asymptotic Kolmogorov distribution
    shots: tuple[int, int]


def kolmogorov_survival(lam: float) -> float:
    """Q_KS(lam) = 2 * sum_{j>=1} (-1)^{j-1} exp(-2 j^2 lam^2), truncated when
    a term drops below 1e-12; the series is taken as 1 near lam = 0."""
    if lam < 1e-3:
        return 1.0
    total = 0.0
    sign = 1.0
    for j in range(1, 101):
        term = math.exp(-2.0 * (j * lam) ** 2)
        if term < 1e-12:
            break
        total += sign * term
        sign = -sign
    return min(1.0, max(0.0, 2.0 * total))


def ks_two_sample(s1: MeasurementSample, s2: MeasurementSample) -> KsResult:
    """K-S statistic and p-value for two count tables over the same outcome
    space, ordered by basis-state index."""
    if s1.shots < 1 or s2.shots < 1:
        raise EmptySample("both samples need at least one shot")
    outcomes = sorted(set(s1.counts) | set(s2.counts))
    k = 0.0
    acc1 = acc2 = 0
    for x in outcomes:
        acc1 += s1.counts.get(x, 0)
        acc2 += s2.counts.get(x, 0)
        k = max(k, abs(acc1 / s1.shots - acc2 / s2.shots))
    n_e = s1.shots * s2.shots / (s1.shots + s2.shots)
    lam = (math.sqrt(n_e) + 0.12 + 0.11 / math.sqrt(n_e)) * k
    return KsResult(k, kolmogorov_survival(lam), (s1.shots, s2.shots))
