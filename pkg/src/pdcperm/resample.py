"""Bootstrap confidence intervals for the PDC.

The permuted statistics are resampled with replacement B times; each resample
gives a mean and sd and therefore a PDC for the fixed observed statistic.  The
interval is read off the empirical quantiles of those B values.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from ._parallel import chunk_ranges, ordered_map, substream
from .exceptions import DomainError, ZeroVarianceError

__all__ = ["CiReport", "bonferroni_level", "bootstrap_pdcs", "bootstrap_pdc_ci", "interval"]

MAX_REDRAWS = 10


@dataclass(frozen=True)
class CiReport:
    pdc_point: float
    level: float
    lower: float
    upper: float
    bonf_level: float
    lower_bonf: float
    upper_bonf: float
    k_tests: int
    b_reps: int
    seed: int

    def to_dict(self) -> dict:
        return asdict(self)


def bonferroni_level(level: float, k: int) -> float:
    """Per-interval level giving simultaneous coverage ``level`` over k intervals."""
    if int(k) != k or k < 1:
        raise DomainError(f"number of tests must be a positive integer, got {k!r}")
    if not 0.0 < level < 1.0:
        raise DomainError(f"level must lie in (0, 1), got {level!r}")
    return 1.0 - (1.0 - level) / k


def _one_replicate(c: float, null: np.ndarray, scale: float, seed: int, b: int) -> float:
    n = null.size
    for attempt in range(MAX_REDRAWS):
        sample = null[substream(seed, b, attempt).integers(0, n, size=n)]
        sd = float(np.std(sample, ddof=1))
        mean = float(np.mean(sample))
        if sd > 0 and sd > 1e-13 * abs(mean):
            return (c - mean) * scale / sd
    raise ZeroVarianceError(f"bootstrap replicate {b}: zero variance in {MAX_REDRAWS} resamples")


def bootstrap_pdcs(c: float, null_stats, corr: float, b_reps: int, seed: int, threads: int = 1) -> np.ndarray:
    """B resampled adjusted PDCs; replicate b uses substream (seed, b)."""
    null = np.asarray(null_stats, dtype=float)
    if null.size < 2:
        raise DomainError("need at least 2 permuted statistics")
    if not 0.0 <= corr < 1.0:
        raise DomainError(f"correlation must lie in [0, 1), got {corr!r}")
    if np.ptp(null) == 0:
        raise ZeroVarianceError("zero permutation variance: resampling cannot vary")
    scale = math.sqrt(1.0 - corr)

    def work(idx):
        return np.array([_one_replicate(c, null, scale, seed, b) for b in idx])

    return np.concatenate(ordered_map(work, chunk_ranges(b_reps), threads))


def interval(values: np.ndarray, level: float) -> tuple[float, float]:
    """Equal-tailed empirical quantile interval, linear interpolation between order statistics."""
    lo, hi = np.quantile(values, [(1.0 - level) / 2.0, (1.0 + level) / 2.0], method="linear")
    return float(lo), float(hi)


def bootstrap_pdc_ci(
    c: float,
    null_stats,
    corr: float = 0.0,
    b_reps: int = 1000,
    level: float = 0.95,
    seed: int = 0,
    k_tests: int = 1,
    threads: int = 1,
) -> CiReport:
    """Quantile interval for the (adjusted) PDC plus its Bonferroni-widened version."""
    if b_reps < 100:
        raise DomainError(f"b_reps must be >= 100, got {b_reps}")
    bonf = bonferroni_level(level, k_tests)
    null = np.asarray(null_stats, dtype=float)
    reps = bootstrap_pdcs(c, null, corr, b_reps, seed, threads)
    sd = float(np.std(null, ddof=1))
    point = (c - float(np.mean(null))) * math.sqrt(1.0 - corr) / sd
    lo, hi = interval(reps, level)
    blo, bhi = interval(reps, bonf)
    return CiReport(point, level, lo, hi, bonf, blo, bhi, int(k_tests), int(b_reps), int(seed))
