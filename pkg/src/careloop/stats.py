"""Statistical primitives: seeded percentile bootstrap, pooled-variance
two-sided t-test, and the StatResult container used by all analysis outputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import stats as sps

from .errors import DomainError

DEFAULT_N_BOOT = 10_000
DEFAULT_LEVEL = 0.95


@dataclass(frozen=True)
class StatResult:
    """Point estimate with bootstrapped CI and, where applicable, a t-test p."""

    estimate: float
    ci_low: float
    ci_high: float
    n: int
    p_value: float | None = None
    degenerate: bool = False

    def __post_init__(self) -> None:
        if not (self.ci_low <= self.estimate <= self.ci_high):
            raise ValueError(
                f"CI [{self.ci_low}, {self.ci_high}] does not bracket estimate {self.estimate}"
            )


def bootstrap_ci(
    samples: Sequence[float],
    level: float = DEFAULT_LEVEL,
    n_boot: int = DEFAULT_N_BOOT,
    seed: int = 0,
) -> tuple[float, float]:
    """Seeded percentile bootstrap interval for the mean.

    A single sample yields a degenerate zero-width interval at that value.
    """
    data = np.asarray(samples, dtype=float)
    if data.size == 0:
        raise DomainError("bootstrap_ci requires at least one sample")
    if not 0.0 < level < 1.0:
        raise DomainError("level must be in (0, 1)")
    if data.size == 1:
        return float(data[0]), float(data[0])
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, data.size, size=(n_boot, data.size))
    means = data[idx].mean(axis=1)
    alpha = (1.0 - level) / 2.0
    lo, hi = np.quantile(means, [alpha, 1.0 - alpha])
    # Guard against float quantile jitter on near-constant data: the interval
    # must bracket the sample mean.
    m = float(data.mean())
    return min(float(lo), m), max(float(hi), m)


def mean_with_ci(
    samples: Sequence[float],
    level: float = DEFAULT_LEVEL,
    n_boot: int = DEFAULT_N_BOOT,
    seed: int = 0,
) -> StatResult:
    data = np.asarray(samples, dtype=float)
    if data.size == 0:
        raise DomainError("mean_with_ci requires at least one sample")
    lo, hi = bootstrap_ci(data, level=level, n_boot=n_boot, seed=seed)
    return StatResult(
        estimate=float(data.mean()),
        ci_low=lo,
        ci_high=hi,
        n=int(data.size),
        degenerate=data.size == 1,
    )


def t_test_two_sided(a: Sequence[float], b: Sequence[float]) -> float:
    """Two-sided pooled-variance Student's t-test p-value.

    Identical groups (zero pooled variance and equal means) return p = 1.0.
    """
    xa = np.asarray(a, dtype=float)
    xb = np.asarray(b, dtype=float)
    if xa.size < 2 or xb.size < 2:
        raise DomainError("t-test requires at least two samples per group")
    na, nb = xa.size, xb.size
    va = xa.var(ddof=1)
    vb = xb.var(ddof=1)
    pooled = ((na - 1) * va + (nb - 1) * vb) / (na + nb - 2)
    diff = xa.mean() - xb.mean()
    if pooled == 0.0:
        return 1.0 if diff == 0.0 else 0.0
    t = diff / math.sqrt(pooled * (1.0 / na + 1.0 / nb))
    df = na + nb - 2
    return float(2.0 * sps.t.sf(abs(t), df))


def p_from_t(t: float, df: int) -> float:
    """Two-sided p for a given t statistic and degrees of freedom."""
    if df < 1:
        raise DomainError("df must be >= 1")
    return float(2.0 * sps.t.sf(abs(t), df))
