"""Closed-form moments and surrogate curves under the two-class Gaussian model.

Model: x_j ~ N_d(g u, sigma^2 I) for j = 1..m and y_k ~ N_d(-g u, sigma^2 I) for
k = 1..n.  With ``h = 1/m + 1/n``, the observed MD statistic is
``sigma sqrt(h) chi_d(2g / (sigma sqrt(h)))``.  A relabeling switching r rows
per class shrinks the mean shift by the unbalance ``xi(r) = 1 - r/m - r/n``, so
the all-permutation null is the hypergeometric mixture over r of
``sigma sqrt(h) chi_d(2 g |xi(r)| / (sigma sqrt(h)))``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .exceptions import DomainError
from .pdc import correlation_factor  # noqa: F401  (re-exported for the theory surface)
from .perm import PermutationScheme, balanced_switch_count, coefficient_of_unbalance
from .specfun import (
    folded_normal_mean,
    gamma_ratio_half,
    hypergeom_pmf,
    hypergeom_pmf_vector,
    noncentral_chi_mean,
)

__all__ = [
    "ModelParams",
    "MixtureComponent",
    "expected_observed_stat",
    "mixture_components",
    "perm_mixture_moments",
    "balanced_moments",
    "f_all",
    "f_balanced",
    "limit_pdc_all",
    "cov_m0_mi",
    "corr_weighted_sum",
    "folded_f_all",
]


@dataclass(frozen=True)
class ModelParams:
    m: int
    n: int
    d: int
    g: float = 0.0
    sigma: float = 1.0
    u: Optional[tuple] = None

    def __post_init__(self):
        for name in ("m", "n", "d"):
            v = getattr(self, name)
            if int(v) != v or v < 1:
                raise DomainError(f"{name} must be a positive integer, got {v!r}")
            object.__setattr__(self, name, int(v))
        if not math.isfinite(self.g) or self.g < 0:
            raise DomainError(f"g must be finite and >= 0, got {self.g!r}")
        if not math.isfinite(self.sigma) or self.sigma <= 0:
            raise DomainError(f"sigma must be positive, got {self.sigma!r}")
        if self.u is not None:
            u = tuple(float(v) for v in np.ravel(self.u))
            if len(u) != self.d:
                raise DomainError(f"u has length {len(u)}, expected d={self.d}")
            if abs(math.sqrt(math.fsum(v * v for v in u)) - 1.0) > 1e-12:
                raise DomainError("u must be a unit vector")
            object.__setattr__(self, "u", u)

    @property
    def h(self) -> float:
        return 1.0 / self.m + 1.0 / self.n

    def direction(self) -> np.ndarray:
        if self.u is not None:
            return np.array(self.u)
        e1 = np.zeros(self.d)
        e1[0] = 1.0
        return e1

    def with_g(self, g: float) -> "ModelParams":
        return ModelParams(self.m, self.n, self.d, g, self.sigma, self.u)


@dataclass(frozen=True)
class MixtureComponent:
    r: int
    weight: float
    xi: float
    g_r: float
    lambda_r: float


def _lam(p: ModelParams, half_shift: float) -> float:
    return 2.0 * abs(half_shift) / (p.sigma * math.sqrt(p.h))


def expected_observed_stat(p: ModelParams) -> float:
    """E||xbar - ybar||."""
    return p.sigma * math.sqrt(p.h) * noncentral_chi_mean(p.d, _lam(p, p.g))


def mixture_components(p: ModelParams) -> list[MixtureComponent]:
    """One component per switch count r in 0..min(m, n).

    ``g_r = g * xi(r)`` is the half-separation of the permuted classes, so the
    r = 0 component reproduces the observed statistic exactly.
    """
    weights = hypergeom_pmf_vector(p.m, p.n)
    comps = []
    for r, w in enumerate(weights):
        xi = coefficient_of_unbalance(p.m, p.n, r)
        g_r = p.g * xi
        comps.append(MixtureComponent(r, float(w), xi, g_r, _lam(p, g_r)))
    return comps


def perm_mixture_moments(p: ModelParams) -> tuple[float, float]:
    """Mean and variance of an all-permutation statistic C_i."""
    comps = mixture_components(p)
    s = math.sqrt(p.h) * p.sigma
    mean = s * math.fsum(c.weight * noncentral_chi_mean(p.d, c.lambda_r) for c in comps)
    second = s * s * math.fsum(c.weight * (p.d + c.lambda_r**2) for c in comps)
    return mean, second - mean * mean


def balanced_moments(p: ModelParams) -> tuple[float, float]:
    """Mean and variance of a balanced-permutation statistic (g drops out)."""
    ratio = gamma_ratio_half(p.d)
    mean = math.sqrt(2.0) * p.sigma * math.sqrt(p.h) * ratio
    var = p.sigma**2 * p.h * (p.d - 2.0 * ratio * ratio)
    return mean, var


def f_all(p: ModelParams) -> float:
    """(E C - E C_i) / sd(C_i) under all permutations."""
    mean, var = perm_mixture_moments(p)
    return (expected_observed_stat(p) - mean) / math.sqrt(var)


def f_balanced(p: ModelParams) -> float:
    mean, var = balanced_moments(p)
    return (expected_observed_stat(p) - mean) / math.sqrt(var)


def _abs_unbalance_moment(m: int, n: int) -> float:
    w = hypergeom_pmf_vector(m, n)
    return math.fsum(float(w[r]) * abs(coefficient_of_unbalance(m, n, r)) for r in range(len(w)))


def limit_pdc_all(m: int, n: int) -> float:
    """Limit of :func:`f_all` as g -> infinity; the same for every d.

    ``(1 - E|xi|) / sqrt(1/(m+n-1) - (E|xi|)^2)`` with xi hypergeometric.
    """
    if m < 2 or n < 2:
        raise DomainError(f"limit_pdc_all needs m, n >= 2, got m={m}, n={n}")
    s = _abs_unbalance_moment(m, n)
    radicand = 1.0 / (m + n - 1) - s * s
    if not radicand > 0:
        raise DomainError(f"non-positive radicand {radicand!r} (E|xi| = {s!r}, m={m}, n={n})")
    return (1.0 - s) / math.sqrt(radicand)


def cov_m0_mi(n: int, d: int, sigma: float, r: int) -> float:
    """Cov of squared observed and squared permuted statistics for m = n, g = 0."""
    if r < 0 or r > n:
        raise DomainError(f"r={r} outside 0..{n}")
    return 8.0 * d * sigma**4 / n**4 * (2 * r - n) ** 2


def _overlap_pmf(size: int, r: int) -> np.ndarray:
    # |A ∩ B| for two independent uniform r-subsets A, B of a class of ``size`` rows
    return np.array([_overlap_prob(size, r, k) for k in range(r + 1)])


def _overlap_prob(size: int, r: int, k: int) -> float:
    if k < max(0, 2 * r - size) or k > r:
        return 0.0
    return math.comb(r, k) * math.comb(size - r, r - k) / math.comb(size, r)


def corr_weighted_sum(m: int, n: int, scheme) -> float:
    """Large-d correlation of two permuted statistics, as an exact weighted sum.

    The per-coordinate correlation between two relabelings equals the unbalance of
    the relabeling that maps one onto the other; the statistic correlation is its
    square, averaged over that relabeling.

    all:      sum_r p_R(r) xi(r)^2                         (= 1/(m+n-1))
    balanced: sum_{k1,k2} q_m(k1) q_n(k2) (1 - (2r - k1 - k2)(1/m + 1/n))^2

    where r is the balanced switch count and q_size(k) the chance two independent
    balanced draws share k switched rows in a class of that size.  For m = n these
    reduce to 1/(2n-1) and 1/(2n-2).
    """
    scheme = PermutationScheme.parse(scheme)
    if scheme is PermutationScheme.ALL:
        if m < 1 or n < 1 or m + n < 3:
            raise DomainError(f"invalid sizes m={m}, n={n}")
        return math.fsum(
            hypergeom_pmf(m, n, r) * coefficient_of_unbalance(m, n, r) ** 2 for r in range(min(m, n) + 1)
        )
    r = balanced_switch_count(m, n)
    h = 1.0 / m + 1.0 / n
    qx, qy = _overlap_pmf(m, r), _overlap_pmf(n, r)
    terms = []
    for k1, w1 in enumerate(qx):
        if w1 == 0.0:
            continue
        for k2, w2 in enumerate(qy):
            if w2 == 0.0:
                continue
            rho = 1.0 - (2 * r - k1 - k2) * h
            terms.append(w1 * w2 * rho * rho)
    return math.fsum(terms)


def folded_f_all(m: int, n: int, g: float) -> float:
    """``f_all`` at d = 1, sigma = 1 through folded-normal means (independent of the Laguerre path)."""
    h = 1.0 / m + 1.0 / n
    root = math.sqrt(h)
    e_obs = folded_normal_mean(2.0 * g, root)
    w = hypergeom_pmf_vector(m, n)
    xis = [coefficient_of_unbalance(m, n, r) for r in range(len(w))]
    e_perm = math.fsum(float(wr) * folded_normal_mean(2.0 * g * xi, root) for wr, xi in zip(w, xis))
    second = math.fsum(float(wr) * (4.0 * g * g * xi * xi + h) for wr, xi in zip(w, xis))
    return (e_obs - e_perm) / math.sqrt(second - e_perm * e_perm)
