"""Separating directions and the projected mean-difference statistic.

Only the mean-difference (MD) direction is built in.  Other directions
(DWD, SVM, ...) are plugged in through :func:`register_direction`; a direction
function maps :class:`~pdcperm.data.TwoGroupData` to a unit vector and must be
free of shared mutable state, since permutation replicates may evaluate it
concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .data import TwoGroupData
from .exceptions import DegenerateDirectionError, DomainError, RegistryError

__all__ = [
    "DirectionFunction",
    "md_direction",
    "projected_mean_difference",
    "register_direction",
    "unregister_direction",
    "get_direction",
    "available_directions",
    "check_unit",
]

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class DirectionFunction:
    name: str
    compute: Callable[[TwoGroupData], np.ndarray]

    def __call__(self, g: TwoGroupData) -> np.ndarray:
        return check_unit(self.compute(g), g.d, self.name)


def check_unit(v, d: int | None = None, name: str = "direction") -> np.ndarray:
    v = np.asarray(v, dtype=float).ravel()
    if d is not None and v.shape[0] != d:
        raise DomainError(f"{name}: direction has length {v.shape[0]}, data has dimension {d}")
    if not np.all(np.isfinite(v)):
        raise DegenerateDirectionError(f"{name}: direction has non-finite entries")
    if abs(np.linalg.norm(v) - 1.0) > 1e-12:
        raise DomainError(f"{name}: direction is not unit length (norm {np.linalg.norm(v)!r})")
    return v


def mean_difference(g: TwoGroupData) -> np.ndarray:
    return g.x.mean(axis=0) - g.y.mean(axis=0)


def md_direction(g: TwoGroupData) -> np.ndarray:
    """Unit vector from the class -1 mean to the class +1 mean."""
    xbar, ybar = g.x.mean(axis=0), g.y.mean(axis=0)
    diff = xbar - ybar
    norm = np.linalg.norm(diff)
    scale = max(np.linalg.norm(xbar), np.linalg.norm(ybar))
    if norm == 0.0 or norm <= 16 * _EPS * scale:
        raise DegenerateDirectionError("zero mean difference: MD direction is undefined")
    return diff / norm


def projected_mean_difference(g: TwoGroupData, v) -> float:
    """``mean(X v) - mean(Y v)``."""
    v = np.asarray(v, dtype=float).ravel()
    if v.shape[0] != g.d:
        raise DomainError(f"direction has length {v.shape[0]}, data has dimension {g.d}")
    return float(np.mean(g.x @ v) - np.mean(g.y @ v))


_REGISTRY: dict[str, DirectionFunction] = {}


def register_direction(f: DirectionFunction | None = None, *, name: str | None = None, compute=None) -> DirectionFunction:
    """Make a direction selectable by name; duplicate names are rejected."""
    if f is None:
        if name is None or compute is None:
            raise DomainError("register_direction needs a DirectionFunction or name= and compute=")
        f = DirectionFunction(name, compute)
    if f.name in _REGISTRY:
        raise RegistryError(f"direction {f.name!r} is already registered")
    _REGISTRY[f.name] = f
    return f


def unregister_direction(name: str) -> None:
    if name == "md":
        raise RegistryError("the built-in 'md' direction cannot be removed")
    _REGISTRY.pop(name, None)


def get_direction(name) -> DirectionFunction:
    if isinstance(name, DirectionFunction):
        return name
    try:
        return _REGISTRY[name]
    except KeyError:
        raise RegistryError(f"unknown direction {name!r}; registered: {', '.join(sorted(_REGISTRY))}") from None


def available_directions() -> list[str]:
    return sorted(_REGISTRY)


MD = register_direction(DirectionFunction("md", md_direction))
