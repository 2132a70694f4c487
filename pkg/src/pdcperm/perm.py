"""Label permutations: all-random and balanced schemes.

A permutation of two groups of sizes ``m`` and ``n`` is described by the rows
that change class: ``r`` rows of ``x`` move to the permuted class -1 and ``r``
rows of ``y`` move to the permuted class +1.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ._parallel import substream
from .data import TwoGroupData
from .exceptions import DomainError

__all__ = [
    "PermutationScheme",
    "PermutationDraw",
    "coefficient_of_unbalance",
    "balanced_switch_count",
    "sample_permutation",
    "draw_permutation",
    "apply_permutation",
]


class PermutationScheme(str, enum.Enum):
    ALL = "all"
    BALANCED = "balanced"

    @classmethod
    def parse(cls, value) -> "PermutationScheme":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise DomainError(f"unknown permutation scheme {value!r}; use 'all' or 'balanced'") from None

    def check(self, m: int, n: int) -> None:
        if self is PermutationScheme.BALANCED and (m < 2 or n < 2):
            raise DomainError(f"balanced permutations need m, n >= 2, got m={m}, n={n}")


def coefficient_of_unbalance(m: int, n: int, r: int) -> float:
    """``1 - r/m - r/n``: 1 for the identity, 0 for a balanced relabeling."""
    if r < 0 or r > min(m, n):
        raise DomainError(f"switch count r={r} outside 0..{min(m, n)}")
    return float(1 - Fraction(r, m) - Fraction(r, n))


def balanced_switch_count(m: int, n: int) -> int:
    """Switch count in ``1..min(m, n)`` whose unbalance is closest to zero (ties to smaller r)."""
    if m < 2 or n < 2:
        raise DomainError(f"balanced permutations need m, n >= 2, got m={m}, n={n}")
    return min(range(1, min(m, n) + 1), key=lambda r: (abs(1 - Fraction(r, m) - Fraction(r, n)), r))


@dataclass(frozen=True, eq=False)
class PermutationDraw:
    switched_from_x: np.ndarray
    switched_from_y: np.ndarray
    m: int
    n: int

    def __post_init__(self):
        if len(self.switched_from_x) != len(self.switched_from_y):
            raise DomainError("switched index sets must have equal size")

    @property
    def r(self) -> int:
        return len(self.switched_from_x)

    @property
    def xi(self) -> float:
        return coefficient_of_unbalance(self.m, self.n, self.r)

    def plus_mask(self) -> np.ndarray:
        """Boolean mask over stacked rows (x then y) of the permuted class +1."""
        mask = np.zeros(self.m + self.n, dtype=bool)
        mask[: self.m] = True
        mask[self.switched_from_x] = False
        mask[self.m + self.switched_from_y] = True
        return mask


def sample_permutation(m: int, n: int, scheme, stream: np.random.Generator) -> PermutationDraw:
    """One relabeling drawn from ``stream``.

    ``ALL`` is uniform over the C(m+n, m) relabelings, so r is hypergeometric.
    ``BALANCED`` fixes r at :func:`balanced_switch_count` and picks the switched
    rows uniformly within each class.
    """
    scheme = PermutationScheme.parse(scheme)
    scheme.check(m, n)
    if scheme is PermutationScheme.ALL:
        chosen = np.zeros(m + n, dtype=bool)
        chosen[stream.choice(m + n, size=m, replace=False)] = True
        sx = np.flatnonzero(~chosen[:m])
        sy = np.flatnonzero(chosen[m:])
    else:
        r = balanced_switch_count(m, n)
        sx = np.sort(stream.choice(m, size=r, replace=False))
        sy = np.sort(stream.choice(n, size=r, replace=False))
    return PermutationDraw(sx, sy, m, n)


def draw_permutation(m: int, n: int, scheme, seed: int, index: int, attempt: int = 0) -> PermutationDraw:
    """Draw number ``index`` of the sequence identified by ``seed``."""
    return sample_permutation(m, n, scheme, substream(seed, index, attempt))


def fixed_r_permutation(m: int, n: int, r: int, stream: np.random.Generator) -> PermutationDraw:
    """Uniform relabeling conditional on switching exactly ``r`` rows per class."""
    if r < 0 or r > min(m, n):
        raise DomainError(f"switch count r={r} outside 0..{min(m, n)}")
    sx = np.sort(stream.choice(m, size=r, replace=False))
    sy = np.sort(stream.choice(n, size=r, replace=False))
    return PermutationDraw(sx, sy, m, n)


def apply_permutation(g: TwoGroupData, p: PermutationDraw) -> TwoGroupData:
    """Relabeled groups; sizes stay (m, n)."""
    if (p.m, p.n) != (g.m, g.n):
        raise DomainError(f"draw is for sizes ({p.m}, {p.n}), data has ({g.m}, {g.n})")
    if p.r and (p.switched_from_x.max() >= g.m or p.switched_from_y.max() >= g.n or
                p.switched_from_x.min() < 0 or p.switched_from_y.min() < 0):
        raise DomainError("permutation index out of range")
    keep_x = np.ones(g.m, dtype=bool)
    keep_x[p.switched_from_x] = False
    keep_y = np.ones(g.n, dtype=bool)
    keep_y[p.switched_from_y] = False
    new_x = np.vstack([g.x[keep_x], g.y[p.switched_from_y]])
    new_y = np.vstack([g.y[keep_y], g.x[p.switched_from_x]])
    return TwoGroupData(new_x, new_y, g.label_x, g.label_y)
