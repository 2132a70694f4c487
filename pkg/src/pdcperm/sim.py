"""Simulation drivers: the Gaussian two-class model, PDC curves and Monte Carlo checks of the theory."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np
from scipy import stats

from ._parallel import chunk_ranges, derive_seed, ordered_map, substream
from .data import LabeledDataset, TwoGroupData
from .kde import count_modes, kde_estimate
from .pdc import correlation_factor, observed_statistic, run_pdc
from .perm import (
    PermutationScheme,
    apply_permutation,
    draw_permutation,
    fixed_r_permutation,
    sample_permutation,
)
from .specfun import hypergeom_pmf_vector, noncentral_chi_mean
from .theory import ModelParams, cov_m0_mi, f_all, f_balanced, mixture_components, perm_mixture_moments

__all__ = [
    "generate_model",
    "CurveExperiment",
    "pdc_curve_experiment",
    "summarize_curves",
    "verify_mixture",
    "verify_correlation",
    "null_diagnostics",
    "make_five_class",
]


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(int(seed))


def generate_model(p: ModelParams, seed) -> TwoGroupData:
    """m rows from N_d(g u, sigma^2 I) and n rows from N_d(-g u, sigma^2 I)."""
    rng = _rng(seed)
    shift = p.g * p.direction()
    x = p.sigma * rng.standard_normal((p.m, p.d)) + shift
    y = p.sigma * rng.standard_normal((p.n, p.d)) - shift
    return TwoGroupData(x, y, "+1", "-1")


@dataclass(frozen=True)
class CurveExperiment:
    params_base: ModelParams
    g_grid: tuple
    d_list: tuple
    schemes: tuple = (PermutationScheme.ALL, PermutationScheme.BALANCED)
    n_perms: int = 1000
    replicates: int = 20
    seed: int = 0

    def __post_init__(self):
        if not len(self.g_grid) or not len(self.d_list):
            raise ValueError("g_grid and d_list must be non-empty")
        if self.replicates < 1:
            raise ValueError("replicates must be >= 1")
        object.__setattr__(self, "g_grid", tuple(float(g) for g in self.g_grid))
        object.__setattr__(self, "d_list", tuple(int(d) for d in self.d_list))
        object.__setattr__(self, "schemes", tuple(PermutationScheme.parse(s) for s in self.schemes))


def pdc_curve_experiment(e: CurveExperiment, threads: int = 1) -> list[dict]:
    """One PDC realization per (d, g, scheme, replicate), with the theory curves alongside.

    Both schemes are applied to the same simulated dataset in each cell.
    """
    base = e.params_base
    cells = [
        (di, gi, rep)
        for di in range(len(e.d_list))
        for gi in range(len(e.g_grid))
        for rep in range(e.replicates)
    ]
    theory = {}
    for d in e.d_list:
        for g in e.g_grid:
            p = ModelParams(base.m, base.n, d, g, base.sigma)
            theory[d, g] = (f_all(p), f_balanced(p))

    def run_cell(cell):
        di, gi, rep = cell
        d, g = e.d_list[di], e.g_grid[gi]
        p = ModelParams(base.m, base.n, d, g, base.sigma)
        data = generate_model(p, derive_seed(e.seed, di, gi, rep, 0))
        perm_seed = derive_seed(e.seed, di, gi, rep, 1)
        rows = []
        for scheme in e.schemes:
            rep_ = run_pdc(data, "md", scheme, e.n_perms, perm_seed)
            fa, fb = theory[d, g]
            rows.append({
                "d": d,
                "g": g,
                "scheme": scheme.value,
                "replicate": rep,
                "c_observed": rep_.c_observed,
                "null_mean": rep_.null_mean,
                "null_sd": rep_.null_sd,
                "pdc_raw": rep_.pdc_raw,
                "pdc_adjusted": rep_.pdc_adjusted,
                "p_empirical": rep_.p_empirical,
                "f_all": fa,
                "f_balanced": fb,
            })
        return rows

    out = []
    for rows in ordered_map(run_cell, cells, threads):
        out.extend(rows)
    return out


def summarize_curves(records: Sequence[dict]) -> list[dict]:
    """Mean and standard error of the PDC over replicates for each (d, g, scheme)."""
    groups: dict = {}
    for rec in records:
        groups.setdefault((rec["d"], rec["g"], rec["scheme"]), []).append(rec)
    out = []
    for (d, g, scheme), recs in groups.items():
        adj = np.array([r["pdc_adjusted"] for r in recs])
        raw = np.array([r["pdc_raw"] for r in recs])
        k = len(recs)
        se = (lambda v: float(np.std(v, ddof=1) / math.sqrt(k)) if k > 1 else float("nan"))
        out.append({
            "d": d,
            "g": g,
            "scheme": scheme,
            "replicates": k,
            "mean_pdc_adjusted": float(adj.mean()),
            "se_pdc_adjusted": se(adj),
            "mean_pdc_raw": float(raw.mean()),
            "se_pdc_raw": se(raw),
            "f_theory": recs[0]["f_all"] if scheme == "all" else recs[0]["f_balanced"],
        })
    return out


@dataclass
class StratumCheck:
    r: int
    xi: float
    count: int
    weight_expected: float
    mean_emp: float
    se: float
    mean_theory: float
    tested: bool
    passed: bool


@dataclass
class MixtureVerification:
    params: dict
    n_draws: int
    seed: int
    mean_emp: float
    mean_se: float
    mean_theory: float
    var_emp: float
    var_se: float
    var_theory: float
    strata: list = field(default_factory=list)
    weights_chi2_pvalue: float = float("nan")
    ordering_ok: bool = True
    mean_ok: bool = True
    var_ok: bool = True
    strata_ok: bool = True
    weights_ok: bool = True

    @property
    def passed(self) -> bool:
        return self.mean_ok and self.var_ok and self.strata_ok and self.weights_ok

    def to_dict(self) -> dict:
        out = asdict(self)
        out["passed"] = self.passed
        return out


def _mixture_chunk(p: ModelParams, seed: int, idx: range):
    stats_, rs = np.empty(len(idx)), np.empty(len(idx), dtype=int)
    for row, i in enumerate(idx):
        data = generate_model(p, substream(seed, i, 0))
        draw = sample_permutation(p.m, p.n, PermutationScheme.ALL, substream(seed, i, 1))
        stats_[row] = observed_statistic(apply_permutation(data, draw))
        rs[row] = draw.r
    return stats_, rs


def verify_mixture(p: ModelParams, n_draws: int = 100_000, seed: int = 0, threads: int = 1,
                   n_se: float = 3.0, min_stratum: int = 30) -> MixtureVerification:
    """Monte Carlo check of the all-permutation mixture law.

    Every draw uses a fresh dataset from the model and one uniformly random
    relabeling, so draws are independent and the Monte Carlo standard errors are
    plain ``sd / sqrt(N)``.
    """
    if n_draws < 10_000:
        raise ValueError("n_draws must be >= 10^4")
    parts = ordered_map(lambda idx: _mixture_chunk(p, seed, idx), chunk_ranges(n_draws), threads)
    c = np.concatenate([a for a, _ in parts])
    rs = np.concatenate([b for _, b in parts])
    N = c.size
    mean_t, var_t = perm_mixture_moments(p)
    mean_e = float(c.mean())
    var_e = float(c.var(ddof=1))
    m4 = float(np.mean((c - mean_e) ** 4))
    mean_se = math.sqrt(var_e / N)
    var_se = math.sqrt(max(m4 - var_e * var_e, 0.0) / N)

    scale = p.sigma * math.sqrt(p.h)
    strata = []
    for comp in mixture_components(p):
        sel = c[rs == comp.r]
        k = sel.size
        theory = scale * noncentral_chi_mean(p.d, comp.lambda_r)
        tested = k >= min_stratum
        if k >= 2:
            me, se = float(sel.mean()), float(sel.std(ddof=1) / math.sqrt(k))
        else:
            me, se = (float(sel.mean()) if k else float("nan")), float("nan")
        ok = (abs(me - theory) <= n_se * se) if tested else True
        strata.append(StratumCheck(comp.r, comp.xi, int(k), comp.weight, me, se, theory, tested, bool(ok)))

    # chi-square on stratum counts; cells with expected count < 5 pooled
    weights = hypergeom_pmf_vector(p.m, p.n)
    counts = np.bincount(rs, minlength=weights.size)
    expected = weights * N
    big = expected >= 5
    obs = list(counts[big]) + ([counts[~big].sum()] if (~big).any() else [])
    exp = list(expected[big]) + ([expected[~big].sum()] if (~big).any() else [])
    exp = np.array(exp) * (N / np.sum(exp))
    chi_p = float(stats.chisquare(obs, exp).pvalue) if len(obs) > 1 else 1.0

    tested = [s for s in strata if s.tested]
    ordering_ok = True
    lam = {comp.r: comp.lambda_r for comp in mixture_components(p)}
    for a in tested:
        for b in tested:
            if lam[a.r] < lam[b.r] - 1e-9 and not a.mean_emp < b.mean_emp:
                ordering_ok = False

    return MixtureVerification(
        params=asdict(p),
        n_draws=N,
        seed=int(seed),
        mean_emp=mean_e,
        mean_se=mean_se,
        mean_theory=mean_t,
        var_emp=var_e,
        var_se=var_se,
        var_theory=var_t,
        strata=[asdict(s) for s in strata],
        weights_chi2_pvalue=chi_p,
        ordering_ok=ordering_ok,
        mean_ok=abs(mean_e - mean_t) <= n_se * mean_se,
        var_ok=abs(var_e - var_t) <= n_se * var_se,
        strata_ok=all(s.passed for s in strata),
        weights_ok=chi_p >= 0.001,
    )


@dataclass
class CovarianceCheck:
    r: int
    cov_emp: float
    se: float
    cov_theory: float
    passed: bool


@dataclass
class CorrelationVerification:
    n: int
    d: int
    sigma: float
    scheme: str
    n_datasets: int
    seed: int
    estimate: float
    se: float
    theory: float
    tolerance: float
    observed_vs_permuted: float
    covariances: list = field(default_factory=list)
    corr_ok: bool = True
    cov_ok: bool = True

    @property
    def passed(self) -> bool:
        return self.corr_ok and self.cov_ok

    def to_dict(self) -> dict:
        out = asdict(self)
        out["passed"] = self.passed
        return out


def _corr_chunk(n: int, d: int, sigma: float, scheme, r_values, seed: int, idx: range):
    p = ModelParams(n, n, d, 0.0, sigma)
    k = 3 + len(r_values)
    out = np.empty((len(idx), k))
    w = np.empty((k, 2 * n))
    w[0] = np.repeat([1.0 / n, -1.0 / n], n)
    for row, i in enumerate(idx):
        data = generate_model(p, substream(seed, i, 0))
        for j in (1, 2):
            plus = sample_permutation(n, n, scheme, substream(seed, i, j)).plus_mask()
            w[j] = np.where(plus, 1.0 / n, -1.0 / n)
        for j, r in enumerate(r_values):
            plus = fixed_r_permutation(n, n, r, substream(seed, i, 3 + j)).plus_mask()
            w[3 + j] = np.where(plus, 1.0 / n, -1.0 / n)
        diff = w @ data.stacked
        out[row] = np.sqrt(np.sum(diff * diff, axis=1))
    return out


def verify_correlation(n: int, d: int, sigma: float = 1.0, scheme=PermutationScheme.ALL,
                       n_datasets: int = 100_000, seed: int = 0, r_values: Sequence[int] = (),
                       threads: int = 1, tolerance: float = 0.01, n_se: float = 3.0) -> CorrelationVerification:
    """Monte Carlo correlation between permuted statistics under the null model (m = n).

    Each replicate dataset yields the observed statistic C_0 and two permuted
    statistics C_1, C_2 from ``scheme``.  The estimate is Corr(C_1, C_2) across
    datasets, compared with :func:`~pdcperm.pdc.correlation_factor`.  For each r
    in ``r_values`` the covariance of C_0^2 with the squared statistic of a
    relabeling switching exactly r rows is compared with :func:`cov_m0_mi`.
    """
    scheme = PermutationScheme.parse(scheme)
    r_values = tuple(int(r) for r in r_values)
    parts = ordered_map(lambda idx: _corr_chunk(n, d, sigma, scheme, r_values, seed, idx),
                        chunk_ranges(n_datasets), threads)
    arr = np.concatenate(parts)
    N = arr.shape[0]
    est = float(np.corrcoef(arr[:, 1], arr[:, 2])[0, 1])
    se = (1.0 - est * est) / math.sqrt(N - 3)
    theory = correlation_factor(n, n, scheme)
    m0 = arr[:, 0] ** 2
    covs = []
    for j, r in enumerate(r_values):
        mr = arr[:, 3 + j] ** 2
        prod = (m0 - m0.mean()) * (mr - mr.mean())
        cov = float(prod.sum() / (N - 1))
        cse = float(prod.std(ddof=1) / math.sqrt(N))
        ct = cov_m0_mi(n, d, sigma, r)
        covs.append(CovarianceCheck(r, cov, cse, ct, abs(cov - ct) <= n_se * cse))
    return CorrelationVerification(
        n=n, d=d, sigma=sigma, scheme=scheme.value, n_datasets=N, seed=int(seed),
        estimate=est, se=se, theory=theory, tolerance=tolerance,
        observed_vs_permuted=float(np.corrcoef(arr[:, 0], arr[:, 1])[0, 1]),
        covariances=[asdict(c) for c in covs],
        corr_ok=abs(est - theory) <= tolerance,
        cov_ok=all(c.passed for c in covs),
    )


def null_diagnostics(p: ModelParams, scheme=PermutationScheme.ALL, n_perms: int = 1000, seed: int = 0,
                     threads: int = 1) -> dict:
    """Permuted statistics of one simulated dataset with their unbalance, KDE and mode count."""
    scheme = PermutationScheme.parse(scheme)
    data = generate_model(p, derive_seed(seed, 0))
    perm_seed = derive_seed(seed, 1)
    rep = run_pdc(data, "md", scheme, n_perms, perm_seed, threads)
    draws = [draw_permutation(p.m, p.n, scheme, perm_seed, i) for i in range(n_perms)]
    grid, dens = kde_estimate(rep.null_stats)
    return {
        "report": rep,
        "r": np.array([dr.r for dr in draws]),
        "xi": np.array([dr.xi for dr in draws]),
        "kde_grid": grid,
        "kde_density": dens,
        "modes": count_modes(dens),
    }


def make_five_class(seed: int = 20240601, d: int = 40) -> LabeledDataset:
    """Synthetic five-class fixture: one far class, two nearly overlapping, unequal sizes."""
    rng = np.random.default_rng(seed)
    spec = [("LAMLx", 14, 6.0), ("BLCAx", 12, 1.5), ("BRCAx", 40, 0.0), ("COADx", 16, -1.0), ("READx", 8, -1.2)]
    rows, labels, ids = [], [], []
    for name, size, shift in spec:
        mean = np.zeros(d)
        mean[0] = shift
        mean[1] = 0.5 * abs(shift)
        rows.append(rng.standard_normal((size, d)) + mean)
        labels += [name] * size
        ids += [f"{name}_{i:02d}" for i in range(size)]
    values = np.round(np.vstack(rows), 6)
    return LabeledDataset(values, tuple(labels), tuple(ids), tuple(f"gene{j:02d}" for j in range(d)))
