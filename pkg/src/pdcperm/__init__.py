"""Direction-projection-permutation tests and the Population Difference Criterion."""

from .data import LabeledDataset, TwoGroupData, load_dataset, split_two_groups
from .direction import available_directions, get_direction, register_direction
from .exceptions import (
    DataError,
    DegenerateDirectionError,
    DegenerateError,
    DomainError,
    PdcError,
    RegistryError,
    ZeroVarianceError,
)
from .pdc import PdcReport, adjusted_pdc, correlation_factor, empirical_pvalue, permutation_null, run_pdc
from .perm import PermutationScheme
from .resample import CiReport, bootstrap_pdc_ci
from .theory import ModelParams, f_all, f_balanced, limit_pdc_all

__version__ = "0.1.0"

__all__ = [
    "LabeledDataset",
    "TwoGroupData",
    "load_dataset",
    "split_two_groups",
    "available_directions",
    "get_direction",
    "register_direction",
    "PdcError",
    "DataError",
    "DomainError",
    "DegenerateError",
    "DegenerateDirectionError",
    "ZeroVarianceError",
    "RegistryError",
    "PdcReport",
    "run_pdc",
    "permutation_null",
    "adjusted_pdc",
    "correlation_factor",
    "empirical_pvalue",
    "PermutationScheme",
    "CiReport",
    "bootstrap_pdc_ci",
    "ModelParams",
    "f_all",
    "f_balanced",
    "limit_pdc_all",
    "DiProPerm",
]


def __getattr__(name):
    if name == "DiProPerm":
        from .estimator import DiProPerm

        return DiProPerm
    raise AttributeError(name)
