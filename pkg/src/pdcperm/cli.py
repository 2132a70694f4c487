"""Command line interface.

    pdcperm test      --input X.csv --pair A,B
    pdcperm pairwise  --input X.csv --scheme both
    pdcperm curve     --m 100 --n 100 --d 1,100 --g-range 0,20,21
    pdcperm simulate  {curves,null,correlation} ...
    pdcperm verify    {mixture,correlation} ...

Exit codes: 0 success, 2 input error, 3 degenerate statistics, 4 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from ._parallel import derive_seed, fresh_seed
from .data import load_dataset, split_two_groups
from .direction import available_directions
from .estimator import analyze_pair
from .exceptions import DataError, DegenerateError, DomainError, RegistryError
from .kde import kde_estimate, silverman_bandwidth
from .perm import PermutationScheme
from .resample import bonferroni_level
from .schemas import SCHEMA_VERSION
from .sim import (
    CurveExperiment,
    null_diagnostics,
    pdc_curve_experiment,
    summarize_curves,
    verify_correlation,
    verify_mixture,
)
from .theory import ModelParams, corr_weighted_sum, f_all, f_balanced, limit_pdc_all

EXIT_OK, EXIT_INPUT, EXIT_DEGENERATE, EXIT_VERIFY = 0, 2, 3, 4


class VerificationFailed(Exception):
    pass


# ---------------------------------------------------------------- parsing helpers


def _int_list(text: str) -> list[int]:
    try:
        out = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not out:
        raise argparse.ArgumentTypeError("empty list")
    return out


def _float_list(text: str) -> list[float]:
    try:
        out = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")
    if not out or not all(math.isfinite(v) for v in out):
        raise argparse.ArgumentTypeError(f"invalid number list {text!r}")
    return out


def _g_range(text: str) -> list[float]:
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("--g-range takes START,STOP,COUNT")
    try:
        lo, hi, k = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid --g-range {text!r}")
    if k < 1:
        raise argparse.ArgumentTypeError("--g-range COUNT must be >= 1")
    return [float(v) for v in np.linspace(lo, hi, k)]


def _pair(text: str) -> tuple[str, str]:
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 2 or not all(parts):
        raise argparse.ArgumentTypeError(f"--pair takes A,B, got {text!r}")
    return parts[0], parts[1]


def _schemes(text: str) -> list[PermutationScheme]:
    if text == "both":
        return [PermutationScheme.BALANCED, PermutationScheme.ALL]
    try:
        return [PermutationScheme.parse(text)]
    except (ValueError, DomainError) as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _positive_int(minimum: int):
    def parse(text: str) -> int:
        try:
            v = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
        if v < minimum:
            raise argparse.ArgumentTypeError(f"must be >= {minimum}, got {v}")
        return v

    return parse


def _level(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}")
    if not 0.0 < v < 1.0:
        raise argparse.ArgumentTypeError(f"level must lie in (0, 1), got {v}")
    return v


# ---------------------------------------------------------------- output


def _clean(obj):
    """JSON-ready copy: numpy scalars to Python, non-finite floats to null."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, PermutationScheme):
        return obj.value
    return obj


def _flatten(d: dict, prefix: str = "") -> dict:
    out = {}
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flatten(v, key + "_"))
        elif not isinstance(v, list):
            out[key] = v
    return out


def _csv_text(rows: list[dict]) -> str:
    rows = [_flatten(r) for r in rows]
    fields = list(dict.fromkeys(k for r in rows for k in r))
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: ("" if r.get(k) is None else r.get(k)) for k in fields})
    return buf.getvalue()


def _text(doc: dict, indent: int = 0) -> str:
    lines = []
    pad = "  " * indent
    for k, v in doc.items():
        if isinstance(v, dict):
            lines.append(f"{pad}{k}:")
            lines.append(_text(v, indent + 1))
        elif isinstance(v, list) and v and isinstance(v[0], dict):
            lines.append(f"{pad}{k}: {len(v)} rows")
            for i, row in enumerate(v):
                lines.append(f"{pad}  [{i}]")
                lines.append(_text(row, indent + 2))
        elif isinstance(v, list) and len(v) > 12:
            lines.append(f"{pad}{k}: [{len(v)} values]")
        elif isinstance(v, float):
            lines.append(f"{pad}{k}: {v:.6g}")
        else:
            lines.append(f"{pad}{k}: {v}")
    return "\n".join(lines)


def _emit(doc: dict, table: list[dict], args) -> None:
    doc = _clean(doc)
    if args.format == "json":
        text = json.dumps(doc, indent=2, allow_nan=False) + "\n"
    elif args.format == "csv":
        text = _csv_text(_clean(table))
    else:
        text = _text(doc) + "\n"
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _header(command: str, **extra) -> dict:
    return {"command": command, "schema_version": SCHEMA_VERSION, "version": __version__, **extra}


def _seed(args) -> int:
    return fresh_seed() if args.seed is None else int(args.seed)


def _write_columns(path, columns: dict) -> None:
    names = list(columns)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(names)
        for row in zip(*(columns[k] for k in names)):
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])


# ---------------------------------------------------------------- commands


def _load(args):
    return load_dataset(args.input, labels_path=args.labels, transpose=args.transpose)


def cmd_test(args) -> int:
    ds = _load(args)
    if args.pair is None:
        if len(ds.classes) != 2:
            raise DataError(f"dataset has {len(ds.classes)} classes ({', '.join(ds.classes)}); pass --pair A,B")
        pair = tuple(ds.classes)
    else:
        pair = args.pair
    g = split_two_groups(ds, *pair)
    seed = _seed(args)
    res = analyze_pair(g, args.direction, args.scheme[0], args.n_perms, args.bootstrap_reps, args.level, 1,
                       seed, args.threads)
    if args.dump_null:
        stats = res.pdc.null_stats
        _write_columns(args.dump_null, {"index": list(range(stats.size)), "null_stat": list(stats)})
    if args.kde:
        grid, dens = kde_estimate(res.pdc.null_stats)
        _write_columns(args.kde, {"x": list(grid), "density": list(dens)})
    result = res.to_dict()
    doc = _header("test", input=str(args.input), pair=list(pair), result=result)
    _emit(doc, [result], args)
    return EXIT_OK


def cmd_pairwise(args) -> int:
    ds = _load(args)
    seed = _seed(args)
    pairs = list(itertools.combinations(ds.classes, 2))
    k = len(pairs)
    schemes = args.scheme
    rows = []
    for idx, (a, b) in enumerate(pairs):
        row = {"label_x": a, "label_y": b, "status": "ok", "error": None, "results": {}}
        try:
            g = split_two_groups(ds, a, b)
            for scheme in schemes:
                res = analyze_pair(g, args.direction, scheme, args.n_perms, args.bootstrap_reps, args.level, k,
                                   derive_seed(seed, idx), args.threads)
                row["results"][scheme.value] = res.to_dict()
        except (DegenerateError, DataError, DomainError) as exc:
            row.update(status="failed", error=f"{type(exc).__name__}: {exc}", results={})
        rows.append(row)

    primary = schemes[0].value

    def key(row):
        if row["status"] != "ok":
            return (1, 0.0)
        return (0, -row["results"][primary]["pdc_adjusted"])

    rows.sort(key=key)
    doc = _header(
        "pairwise",
        input=str(args.input),
        schemes=[s.value for s in schemes],
        sort_scheme=primary,
        k_tests=k,
        level=args.level,
        bonf_level=bonferroni_level(args.level, k),
        seed=seed,
        rows=rows,
    )
    table = []
    for row in rows:
        if row["status"] != "ok":
            table.append({"label_x": row["label_x"], "label_y": row["label_y"], "status": "failed",
                          "error": row["error"]})
            continue
        for res in row["results"].values():
            table.append({"status": "ok", "error": None, **res})
    _emit(doc, table, args)
    return EXIT_OK


def _g_values(args) -> list[float]:
    g = args.g_range if args.g_range is not None else args.g
    if any(v < 0 for v in g):
        raise DomainError("g values must be >= 0")
    return g


def cmd_curve(args) -> int:
    gs = _g_values(args)
    limit = limit_pdc_all(args.m, args.n)
    rows = []
    for d in args.d:
        for g in gs:
            p = ModelParams(args.m, args.n, d, g, args.sigma)
            rows.append({"d": d, "g": g, "f_all": f_all(p), "f_balanced": f_balanced(p), "limit_pdc_all": limit})
    doc = _header("curve", m=args.m, n=args.n, sigma=args.sigma, rows=rows)
    _emit(doc, rows, args)
    return EXIT_OK


def cmd_simulate_curves(args) -> int:
    seed = _seed(args)
    e = CurveExperiment(
        ModelParams(args.m, args.n, 1, 0.0, args.sigma),
        tuple(_g_values(args)),
        tuple(args.d),
        tuple(args.scheme),
        args.n_perms,
        args.replicates,
        seed,
    )
    records = pdc_curve_experiment(e, args.threads)
    summary = summarize_curves(records)
    config = {"m": args.m, "n": args.n, "sigma": args.sigma, "d": list(e.d_list), "g": list(e.g_grid),
              "schemes": [s.value for s in e.schemes], "n_perms": e.n_perms, "replicates": e.replicates,
              "seed": seed}
    doc = _header("simulate_curves", config=config, summary=summary, records=records)
    _emit(doc, records, args)
    return EXIT_OK


def cmd_simulate_null(args) -> int:
    seed = _seed(args)
    p = ModelParams(args.m, args.n, args.d[0], args.g[0], args.sigma)
    out = null_diagnostics(p, args.scheme[0], args.n_perms, seed, args.threads)
    rep = out["report"]
    draws = [{"index": i, "r": int(r), "xi": float(xi), "null_stat": float(c)}
             for i, (r, xi, c) in enumerate(zip(out["r"], out["xi"], rep.null_stats))]
    config = {"m": p.m, "n": p.n, "d": p.d, "g": p.g, "sigma": p.sigma, "scheme": rep.scheme.value,
              "n_perms": rep.n_perms, "seed": seed}
    doc = _header(
        "simulate_null",
        config=config,
        report=rep.to_dict(),
        modes=out["modes"],
        kde={"bandwidth": silverman_bandwidth(rep.null_stats), "x": out["kde_grid"], "density": out["kde_density"]},
        draws=draws,
    )
    if args.kde:
        _write_columns(args.kde, {"x": list(out["kde_grid"]), "density": list(out["kde_density"])})
    _emit(doc, draws, args)
    return EXIT_OK


def cmd_simulate_correlation(args) -> int:
    seed = _seed(args)
    rows = []
    for i, n in enumerate(args.n):
        for j, d in enumerate(args.d):
            for scheme in args.scheme:
                v = verify_correlation(n, d, args.sigma, scheme, args.n_datasets, derive_seed(seed, i, j),
                                       threads=args.threads)
                rows.append({"n": n, "d": d, "scheme": scheme.value, "estimate": v.estimate, "se": v.se,
                             "closed_form": v.theory, "weighted_sum": corr_weighted_sum(n, n, scheme)})
    doc = _header("simulate_correlation", n_datasets=args.n_datasets, sigma=args.sigma, seed=seed, rows=rows)
    _emit(doc, rows, args)
    return EXIT_OK


def cmd_verify_mixture(args) -> int:
    seed = _seed(args)
    p = ModelParams(args.m, args.n, args.d[0], args.g[0], args.sigma)
    v = verify_mixture(p, args.n_draws, seed, args.threads)
    doc = _header("verify_mixture", **v.to_dict())
    _emit(doc, v.strata, args)
    if not v.passed:
        raise VerificationFailed("mixture verification failed")
    return EXIT_OK


def cmd_verify_correlation(args) -> int:
    seed = _seed(args)
    n = args.n[0]
    r_values = args.r_values if args.r_values is not None else sorted({0, round(0.3 * n), n // 2})
    runs = []
    for i, scheme in enumerate(args.scheme):
        v = verify_correlation(n, args.d[0], args.sigma, scheme, args.n_datasets, derive_seed(seed, i),
                               r_values=r_values, threads=args.threads)
        runs.append(v.to_dict())
    passed = all(r["passed"] for r in runs)
    doc = _header("verify_correlation", seed=seed, passed=passed, runs=runs)
    _emit(doc, runs, args)
    if not passed:
        raise VerificationFailed("correlation verification failed")
    return EXIT_OK


# ---------------------------------------------------------------- parser


def _common(p: argparse.ArgumentParser, scheme_default: str | None = "balanced", allow_both: bool = False) -> None:
    p.add_argument("--seed", type=int, default=None, help="base seed (default: drawn from the OS and reported)")
    p.add_argument("--threads", type=_positive_int(1), default=1, help="worker threads; results do not depend on it")
    p.add_argument("--format", choices=("json", "csv", "text"), default="json")
    p.add_argument("--output", default=None, help="write the report here instead of stdout")
    if scheme_default is None:
        return
    help_ = "all | balanced" + (" | both" if allow_both else "")
    p.add_argument("--scheme", type=_schemes, default=_schemes(scheme_default), help=help_)


def _data_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--input", required=True, help="delimited matrix, samples as rows")
    p.add_argument("--labels", default=None, help="sidecar file with sample_id,label rows")
    p.add_argument("--transpose", action="store_true", help="input holds features as rows")
    p.add_argument("--direction", default="md", help=f"direction name ({', '.join(available_directions())})")
    p.add_argument("--n-perms", type=_positive_int(2), default=1000)
    p.add_argument("--bootstrap-reps", type=_positive_int(100), default=1000)
    p.add_argument("--level", type=_level, default=0.95)


def _model_args(p: argparse.ArgumentParser, d_default: str, g_default: str) -> None:
    p.add_argument("--m", type=_positive_int(2), default=100)
    p.add_argument("--n", type=_positive_int(2), default=100)
    p.add_argument("--d", type=_int_list, default=_int_list(d_default), help="comma-separated dimensions")
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--g", type=_float_list, default=_float_list(g_default), help="comma-separated g values")
    p.add_argument("--g-range", type=_g_range, default=None, help="START,STOP,COUNT evenly spaced g values")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pdcperm", description="DiProPerm tests and PDC diagnostics.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("test", help="one pairwise DiProPerm test with a bootstrap interval")
    _data_args(p)
    _common(p)
    p.add_argument("--pair", type=_pair, default=None, help="labels A,B (optional for two-class data)")
    p.add_argument("--dump-null", default=None, help="write the permuted statistics as CSV")
    p.add_argument("--kde", default=None, help="write a KDE of the permuted statistics as CSV")
    p.set_defaults(func=cmd_test)

    p = sub.add_parser("pairwise", help="all pairwise tests with Bonferroni intervals")
    _data_args(p)
    _common(p, allow_both=True)
    p.set_defaults(func=cmd_pairwise)

    p = sub.add_parser("curve", help="theory curves f_all, f_balanced and the large-g limit")
    _model_args(p, "1,10,100", "0,2,4,20")
    p.add_argument("--format", choices=("json", "csv", "text"), default="json")
    p.add_argument("--output", default=None)
    p.set_defaults(func=cmd_curve)

    sim = sub.add_parser("simulate", help="simulation experiments").add_subparsers(dest="experiment", required=True)
    p = sim.add_parser("curves", help="PDC realizations over a (d, g) grid")
    _model_args(p, "100", "0,2,4,20")
    _common(p, "both", allow_both=True)
    p.add_argument("--n-perms", type=_positive_int(2), default=1000)
    p.add_argument("--replicates", type=_positive_int(1), default=20)
    p.set_defaults(func=cmd_simulate_curves)

    p = sim.add_parser("null", help="permutation null of one simulated dataset, with r, xi and a KDE")
    _model_args(p, "100", "20")
    _common(p, "all")
    p.add_argument("--n-perms", type=_positive_int(2), default=1000)
    p.add_argument("--kde", default=None, help="also write the KDE as CSV")
    p.set_defaults(func=cmd_simulate_null)

    p = sim.add_parser("correlation", help="Monte Carlo correlation of permuted statistics over n and d")
    _common(p, "both", allow_both=True)
    p.add_argument("--n", type=_int_list, default=_int_list("5,10,20"))
    p.add_argument("--d", type=_int_list, default=_int_list("1,1000"))
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--n-datasets", type=_positive_int(10), default=10_000)
    p.set_defaults(func=cmd_simulate_correlation)

    ver = sub.add_parser("verify", help="Monte Carlo checks of the theory").add_subparsers(dest="check", required=True)
    p = ver.add_parser("mixture", help="all-permutation mixture law")
    _model_args(p, "10", "2")
    p.set_defaults(m=50, n=50)
    _common(p, None)
    p.add_argument("--n-draws", type=_positive_int(10_000), default=100_000)
    p.set_defaults(func=cmd_verify_mixture)

    p = ver.add_parser("correlation", help="permuted-statistic correlation and conditional covariances")
    _common(p, "both", allow_both=True)
    p.add_argument("--n", type=_int_list, default=_int_list("10"))
    p.add_argument("--d", type=_int_list, default=_int_list("1000"))
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--n-datasets", type=_positive_int(10), default=100_000)
    p.add_argument("--r-values", type=_int_list, default=None,
                   help="switch counts for the covariance check (default: 0, round(0.3 n), n // 2)")
    p.set_defaults(func=cmd_verify_correlation)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except VerificationFailed as exc:
        print(f"pdcperm: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except DegenerateError as exc:
        print(f"pdcperm: degenerate statistics: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (DataError, DomainError, RegistryError, OSError) as exc:
        print(f"pdcperm: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
