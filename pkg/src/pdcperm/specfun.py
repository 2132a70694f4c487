"""Special functions: gamma ratios, non-central chi moments, folded normal, hypergeometric pmf.

The non-central chi mean is

    E chi_d(lam) = sqrt(2) * G((d+1)/2) / G(d/2) * 1F1(-1/2; d/2; -lam^2/2)

which is the Laguerre form sqrt(pi/2) * L_{1/2}^{d/2-1}(-lam^2/2) written as a
confluent hypergeometric function.  The alternating series of 1F1 at a negative
argument cancels catastrophically, so it is evaluated after Kummer's transform
``1F1(a; b; -x) = exp(-x) 1F1(b - a; b; x)`` whose terms are all positive.
Above ``x = 700`` the large-argument expansion is used instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .exceptions import DomainError

__all__ = [
    "ChiParams",
    "log_gamma",
    "gamma_ratio_half",
    "noncentral_chi_mean",
    "noncentral_chi_var",
    "folded_normal_mean",
    "hypergeom_pmf",
    "hypergeom_pmf_vector",
]

SERIES_SWITCH = 700.0
_SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class ChiParams:
    """Degrees of freedom ``d`` and non-centrality ``lam`` (lam**2 is the chi-square one)."""

    d: int
    lam: float = 0.0

    def __post_init__(self):
        if isinstance(self.d, bool) or int(self.d) != self.d or self.d < 1:
            raise DomainError(f"degrees of freedom must be a positive integer, got {self.d!r}")
        if not math.isfinite(self.lam) or self.lam < 0:
            raise DomainError(f"non-centrality must be finite and >= 0, got {self.lam!r}")
        object.__setattr__(self, "d", int(self.d))
        object.__setattr__(self, "lam", float(self.lam))


def log_gamma(x: float) -> float:
    """Natural log of the gamma function for ``x > 0``."""
    x = float(x)
    if not math.isfinite(x) or x <= 0:
        raise DomainError(f"log_gamma requires a finite positive argument, got {x!r}")
    return math.lgamma(x)


def gamma_ratio_half(d: int) -> float:
    """``Gamma((d+1)/2) / Gamma(d/2)`` evaluated in log space."""
    if int(d) != d or d < 1:
        raise DomainError(f"gamma_ratio_half requires an integer d >= 1, got {d!r}")
    return math.exp(log_gamma((d + 1) / 2.0) - log_gamma(d / 2.0))


def _kahan_sum(values) -> float:
    total = 0.0
    comp = 0.0
    for v in values:
        y = v - comp
        t = total + y
        comp = (t - total) - y
        total = t
    return total


def _kummer_series(b: float, x: float) -> float:
    """exp(-x) * 1F1(b + 1/2; b; x), summed with compensation to relative 1e-14."""
    a = b + 0.5
    n_terms = int(x + 12.0 * math.sqrt(x) + 60)
    while True:
        k = np.arange(1, n_terms, dtype=float)
        ratios = (a + k - 1.0) / (b + k - 1.0) * x / k
        # exp(-700) is still a normal double, so the products stay finite
        terms = math.exp(-x) * np.concatenate(([1.0], np.cumprod(ratios)))
        total = _kahan_sum(terms.tolist())
        if ratios[-1] < 1.0 and terms[-1] <= 1e-14 * total * (1.0 - ratios[-1]):
            return total
        n_terms *= 2


def _asymptotic_series(d: int, lam: float):
    """Large-lam expansion of E chi_d(lam); returns None when it fails to converge."""
    x = 0.5 * lam * lam
    c = (1.0 - d) / 2.0
    term = 1.0
    total = 1.0
    for k in range(1, 200):
        new = term * (k - 1.5) * (c + k - 1.0) / (k * x)
        if abs(new) > abs(term):
            return None
        term = new
        total += term
        if abs(term) <= 1e-16 * abs(total):
            return lam * total
    return None


def noncentral_chi_mean(p: ChiParams | int, lam: float | None = None) -> float:
    """Mean of the non-central chi distribution chi_d(lam).

    Accepts either a :class:`ChiParams` or ``(d, lam)`` positionally.
    """
    if not isinstance(p, ChiParams):
        p = ChiParams(p, 0.0 if lam is None else lam)
    d, lam = p.d, p.lam
    prefactor = _SQRT2 * gamma_ratio_half(d)
    if lam == 0.0:
        return prefactor
    x = 0.5 * lam * lam
    if x > SERIES_SWITCH:
        approx = _asymptotic_series(d, lam)
        if approx is not None:
            return approx
        return _log_kummer(d, x, prefactor)
    return prefactor * _kummer_series(d / 2.0, x)


def _log_kummer(d: int, x: float, prefactor: float) -> float:
    # fallback for huge d with x > 700, where the asymptotic expansion diverges early
    b = d / 2.0
    a = b + 0.5
    n_terms = int(x + 12.0 * math.sqrt(x) + 60)
    while True:
        k = np.arange(1, n_terms, dtype=float)
        ratios = (a + k - 1.0) / (b + k - 1.0) * x / k
        log_terms = np.concatenate(([0.0], np.cumsum(np.log(ratios))))
        if ratios[-1] < 1.0 and log_terms[-1] - log_terms.max() < -40:
            break
        n_terms *= 2
    top = log_terms.max()
    log_sum = top + math.log(math.fsum(np.exp(log_terms - top).tolist()))
    return prefactor * math.exp(log_sum - x)


def noncentral_chi_var(p: ChiParams | int, lam: float | None = None) -> float:
    """Variance ``d + lam**2 - mean**2``, clipped at zero."""
    if not isinstance(p, ChiParams):
        p = ChiParams(p, 0.0 if lam is None else lam)
    mean = noncentral_chi_mean(p)
    return max(p.d + p.lam * p.lam - mean * mean, 0.0)


def folded_normal_mean(mu: float, sigma: float) -> float:
    """Mean of |N(mu, sigma^2)|."""
    if not sigma > 0 or not math.isfinite(sigma):
        raise DomainError(f"sigma must be positive and finite, got {sigma!r}")
    mu = abs(float(mu))
    z = mu / sigma
    return sigma * math.sqrt(2.0 / math.pi) * math.exp(-0.5 * z * z) + mu * math.erf(z / _SQRT2)


EXACT_PMF_LIMIT = 20000


def _log_comb(n: int, k: int) -> float:
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)


def hypergeom_pmf(m: int, n: int, r: int) -> float:
    """P(R = r) for the number of labels switched in each class.

    ``C(m, r) C(n, n - r) / C(m + n, m)``; zero outside ``0..min(m, n)``.
    """
    if m < 1 or n < 1:
        raise DomainError(f"class sizes must be positive, got m={m}, n={n}")
    if r < 0 or r > min(m, n):
        return 0.0
    if m + n <= EXACT_PMF_LIMIT:
        # big-int true division is correctly rounded and cannot overflow
        return math.comb(m, r) * math.comb(n, n - r) / math.comb(m + n, m)
    log_p = _log_comb(m, r) + _log_comb(n, n - r) - _log_comb(m + n, m)
    return math.exp(log_p)


@lru_cache(maxsize=256)
def hypergeom_pmf_vector(m: int, n: int) -> np.ndarray:
    """pmf over the full support ``0..min(m, n)``, renormalised to sum to one (read-only)."""
    p = np.array([hypergeom_pmf(m, n, r) for r in range(min(m, n) + 1)])
    p = p / math.fsum(p.tolist())
    p.flags.writeable = False
    return p
