"""Permutation null distribution and the Population Difference Criterion.

    PDC          = (C - mean(C_i)) / sd(C_i)
    adjusted PDC = PDC * sqrt(1 - Corr)

``C`` is the observed projected mean difference, ``C_i`` the same statistic
with labels permuted and the direction recomputed, and ``Corr`` the large-d
correlation between two permuted statistics sharing the same data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ._parallel import chunk_ranges, ordered_map
from .data import TwoGroupData
from .direction import MD, DirectionFunction, get_direction, projected_mean_difference
from .exceptions import DegenerateDirectionError, DegenerateError, DomainError, ZeroVarianceError
from .perm import (
    PermutationScheme,
    apply_permutation,
    balanced_switch_count,
    coefficient_of_unbalance,
    draw_permutation,
)

__all__ = [
    "PdcReport",
    "observed_statistic",
    "permutation_null",
    "compute_pdc",
    "correlation_factor",
    "adjusted_pdc",
    "empirical_pvalue",
    "run_pdc",
]

MAX_RETRIES = 10


def _md_norm(diff: np.ndarray) -> np.ndarray:
    return np.sqrt(np.sum(diff * diff, axis=-1))


def observed_statistic(g: TwoGroupData, direction="md") -> float:
    """C for the data as labeled. For MD this is ``||mean(x) - mean(y)||``."""
    dirf = get_direction(direction)
    if dirf is MD:
        return float(_md_norm(g.x.mean(axis=0) - g.y.mean(axis=0)))
    return projected_mean_difference(g, dirf(g))


def _md_chunk(g: TwoGroupData, scheme, seed: int, idx: range) -> np.ndarray:
    m, n = g.m, g.n
    weights = np.empty((len(idx), m + n))
    for row, i in enumerate(idx):
        plus = draw_permutation(m, n, scheme, seed, i).plus_mask()
        weights[row] = np.where(plus, 1.0 / m, -1.0 / n)
    return _md_norm(weights @ g.stacked)


def _generic_chunk(g: TwoGroupData, dirf: DirectionFunction, scheme, seed: int, idx: range) -> np.ndarray:
    out = np.empty(len(idx))
    for row, i in enumerate(idx):
        for attempt in range(MAX_RETRIES + 1):
            gp = apply_permutation(g, draw_permutation(g.m, g.n, scheme, seed, i, attempt))
            try:
                out[row] = projected_mean_difference(gp, dirf(gp))
                break
            except DegenerateDirectionError:
                continue
        else:
            raise DegenerateError(
                f"direction {dirf.name!r} degenerate on permutation {i} after {MAX_RETRIES} retries"
            )
    return out


def permutation_null(
    g: TwoGroupData,
    direction="md",
    scheme=PermutationScheme.BALANCED,
    n_perms: int = 1000,
    seed: int = 0,
    threads: int = 1,
) -> np.ndarray:
    """N permuted statistics C_1..C_N, direction recomputed for every relabeling.

    Draw ``i`` uses its own random substream, so the vector is identical for any
    ``threads``.
    """
    if n_perms < 2:
        raise DomainError(f"n_perms must be >= 2, got {n_perms}")
    scheme = PermutationScheme.parse(scheme)
    scheme.check(g.m, g.n)
    dirf = get_direction(direction)
    if dirf is MD:
        work = lambda idx: _md_chunk(g, scheme, seed, idx)  # noqa: E731
    else:
        work = lambda idx: _generic_chunk(g, dirf, scheme, seed, idx)  # noqa: E731
    return np.concatenate(ordered_map(work, chunk_ranges(n_perms), threads))


def compute_pdc(c: float, null_stats, scale: float = 0.0) -> tuple[float, float, float]:
    """``(pdc_raw, null_mean, null_sd)`` with the N-1 denominator for the sd.

    ``scale`` is the magnitude of the data; a null sd at round-off level relative
    to it counts as zero.
    """
    null = np.asarray(null_stats, dtype=float)
    if null.size < 2:
        raise DomainError("need at least 2 permuted statistics")
    mean = float(np.mean(null))
    sd = float(np.std(null, ddof=1))
    if not sd > 0 or sd <= 1e-13 * abs(mean) or sd <= 1e-12 * scale:
        raise ZeroVarianceError("zero permutation variance")
    return (c - mean) / sd, mean, sd


def correlation_factor(m: int, n: int, scheme) -> float:
    """Large-d correlation between two permuted statistics.

    all:      (m + n) / (4mn - m - n)
    balanced: (m + n) / (4mn - 2m - 2n)
    """
    scheme = PermutationScheme.parse(scheme)
    if scheme is PermutationScheme.ALL:
        if m < 1 or n < 1 or m + n < 3:
            raise DomainError(f"invalid sizes for the all-permutation correlation: m={m}, n={n}")
        return (m + n) / (4 * m * n - m - n)
    if m < 2 or n < 2:
        raise DomainError(f"invalid sizes for the balanced correlation: m={m}, n={n}")
    return (m + n) / (4 * m * n - 2 * m - 2 * n)


def adjusted_pdc(pdc_raw: float, corr: float) -> float:
    if not 0.0 <= corr < 1.0:
        raise DomainError(f"correlation must lie in [0, 1), got {corr!r}")
    return pdc_raw * math.sqrt(1.0 - corr)


def empirical_pvalue(c: float, null_stats) -> float:
    """Add-one p-value ``(1 + #{C_i >= c}) / (N + 1)``."""
    null = np.asarray(null_stats, dtype=float)
    if null.size == 0:
        raise DomainError("empty null sample")
    return (1.0 + np.count_nonzero(null >= c)) / (null.size + 1.0)


@dataclass
class PdcReport:
    c_observed: float
    null_stats: np.ndarray = field(repr=False)
    null_mean: float
    null_sd: float
    corr_used: float
    pdc_raw: float
    pdc_adjusted: float
    p_empirical: float
    scheme: PermutationScheme
    n_perms: int
    seed: int
    direction: str = "md"
    m: Optional[int] = None
    n: Optional[int] = None
    d: Optional[int] = None
    approximate_balance: bool = False
    label_x: str = "x"
    label_y: str = "y"

    def to_dict(self, include_null: bool = False) -> dict:
        out = {
            "label_x": self.label_x,
            "label_y": self.label_y,
            "m": self.m,
            "n": self.n,
            "d": self.d,
            "direction": self.direction,
            "scheme": self.scheme.value,
            "n_perms": self.n_perms,
            "seed": self.seed,
            "c_observed": self.c_observed,
            "null_mean": self.null_mean,
            "null_sd": self.null_sd,
            "corr_used": self.corr_used,
            "approximate_balance": self.approximate_balance,
            "pdc_raw": self.pdc_raw,
            "pdc_adjusted": self.pdc_adjusted,
            "p_empirical": self.p_empirical,
        }
        if include_null:
            out["null_stats"] = [float(v) for v in self.null_stats]
        return out


def run_pdc(
    g: TwoGroupData,
    direction="md",
    scheme=PermutationScheme.BALANCED,
    n_perms: int = 1000,
    seed: int = 0,
    threads: int = 1,
) -> PdcReport:
    """Observed statistic, permutation null and both PDC variants for one pair."""
    scheme = PermutationScheme.parse(scheme)
    dirf = get_direction(direction)
    c = observed_statistic(g, dirf)
    null = permutation_null(g, dirf, scheme, n_perms, seed, threads)
    scale = float(np.abs(g.stacked).max()) * math.sqrt(g.d)
    raw, mean, sd = compute_pdc(c, null, scale)
    corr = correlation_factor(g.m, g.n, scheme)
    approx = False
    if scheme is PermutationScheme.BALANCED:
        approx = coefficient_of_unbalance(g.m, g.n, balanced_switch_count(g.m, g.n)) != 0.0
    return PdcReport(
        c_observed=c,
        null_stats=null,
        null_mean=mean,
        null_sd=sd,
        corr_used=corr,
        pdc_raw=raw,
        pdc_adjusted=adjusted_pdc(raw, corr),
        p_empirical=empirical_pvalue(c, null),
        scheme=scheme,
        n_perms=int(n_perms),
        seed=int(seed),
        direction=dirf.name,
        m=g.m,
        n=g.n,
        d=g.d,
        approximate_balance=approx,
        label_x=g.label_x,
        label_y=g.label_y,
    )
