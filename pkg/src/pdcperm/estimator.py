"""scikit-learn style façade over the DiProPerm pipeline."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from ._parallel import derive_seed, fresh_seed
from .data import TwoGroupData
from .direction import get_direction
from .exceptions import DataError
from .pdc import PdcReport, run_pdc
from .perm import PermutationScheme
from .resample import CiReport, bootstrap_pdc_ci

__all__ = ["PairResult", "analyze_pair", "DiProPerm"]


@dataclass
class PairResult:
    pdc: PdcReport
    ci: CiReport

    def to_dict(self, include_null: bool = False) -> dict:
        out = self.pdc.to_dict(include_null)
        out["ci"] = self.ci.to_dict()
        return out


def analyze_pair(
    g: TwoGroupData,
    direction="md",
    scheme=PermutationScheme.BALANCED,
    n_perms: int = 1000,
    bootstrap_reps: int = 1000,
    level: float = 0.95,
    n_tests: int = 1,
    seed: int = 0,
    threads: int = 1,
) -> PairResult:
    """Permutation PDC plus bootstrap interval for one pair.

    The permutations use ``derive_seed(seed, 0)`` and the bootstrap
    ``derive_seed(seed, 1)`` so the two stages never share a stream.
    """
    rep = run_pdc(g, direction, scheme, n_perms, derive_seed(seed, 0), threads)
    ci = bootstrap_pdc_ci(
        rep.c_observed,
        rep.null_stats,
        rep.corr_used,
        bootstrap_reps,
        level,
        derive_seed(seed, 1),
        n_tests,
        threads,
    )
    rep.seed = int(seed)
    return PairResult(rep, ci)


class DiProPerm(BaseEstimator, TransformerMixin):
    """Direction-projection-permutation test for two classes.

    Parameters
    ----------
    direction : str
        Registered direction name, ``"md"`` by default.
    scheme : {"balanced", "all"}
    n_perms : int
        Number of relabelings N.
    bootstrap_reps : int
        Bootstrap replicates B for the interval.
    level : float
        Per-test confidence level.
    n_tests : int
        Number of simultaneous tests for the Bonferroni interval.
    random_state : int or None
        Base seed; ``None`` draws one from the OS and stores it in ``seed_``.
    n_jobs : int
        Worker threads. Results do not depend on it.
    pair : tuple of two labels, optional
        Which classes to compare when ``y`` has more than two.

    Attributes
    ----------
    classes_ : ndarray of the two compared labels (x class first)
    direction_ : unit direction fitted on the labeled data
    statistic_, null_stats_, pdc_, pdc_raw_, p_value_ : test results
    ci_ : CiReport
    report_ : PairResult
    """

    def __init__(self, direction="md", scheme="balanced", n_perms=1000, bootstrap_reps=1000, level=0.95,
                 n_tests=1, random_state=None, n_jobs=1, pair=None):
        self.direction = direction
        self.scheme = scheme
        self.n_perms = n_perms
        self.bootstrap_reps = bootstrap_reps
        self.level = level
        self.n_tests = n_tests
        self.random_state = random_state
        self.n_jobs = n_jobs
        self.pair = pair

    def _split(self, X, y) -> TwoGroupData:
        labels = np.asarray([str(v) for v in y], dtype=object)
        if self.pair is not None:
            a, b = (str(v) for v in self.pair)
        else:
            uniq = list(dict.fromkeys(labels))
            if len(uniq) != 2:
                raise DataError(f"y has {len(uniq)} classes; pass pair=(a, b) to choose two")
            a, b = uniq
        for lab in (a, b):
            if lab not in labels:
                raise DataError(f"unknown label {lab!r}")
        if a == b:
            raise DataError(f"cannot compare class {a!r} with itself")
        return TwoGroupData(X[labels == a], X[labels == b], a, b)

    def fit(self, X, y):
        X, y = check_X_y(X, y, dtype=float, ensure_min_samples=4, y_numeric=False)
        g = self._split(X, y)
        self.seed_ = fresh_seed() if self.random_state is None else int(self.random_state)
        res = analyze_pair(g, self.direction, self.scheme, self.n_perms, self.bootstrap_reps, self.level,
                           self.n_tests, self.seed_, self.n_jobs)
        self.classes_ = np.array([g.label_x, g.label_y], dtype=object)
        self.direction_ = get_direction(self.direction)(g)
        self.n_features_in_ = X.shape[1]
        self.statistic_ = res.pdc.c_observed
        self.null_stats_ = res.pdc.null_stats
        self.pdc_ = res.pdc.pdc_adjusted
        self.pdc_raw_ = res.pdc.pdc_raw
        self.p_value_ = res.pdc.p_empirical
        self.ci_ = res.ci
        self.report_ = res
        return self

    def transform(self, X):
        """Scores of ``X`` on the fitted direction."""
        check_is_fitted(self, "direction_")
        X = check_array(X, dtype=float)
        if X.shape[1] != self.n_features_in_:
            raise DataError(f"X has {X.shape[1]} features, fitted with {self.n_features_in_}")
        return (X @ self.direction_).reshape(-1, 1)

    def summary(self) -> Optional[dict]:
        check_is_fitted(self, "report_")
        return self.report_.to_dict()
