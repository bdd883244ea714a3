"""Command-line surface.

Subcommands: bounds, simulate, dataset, centerpoint, sweep.
Exit codes: 0 success, 2 input error, 3 guard refusal, 4 solver failure.
Every JSON output embeds {version, seed, config, wall_time_ms}; repeated runs
with the same seed are byte-identical except for wall_time_ms.
"""

import argparse
import csv as _csv
import dataclasses
import io
import json
import os
import sys
import time

import numpy as np

from . import __version__
from .errors import GuardRefused, SolverFailure
from . import formulas
from . import montecarlo as mc
from . import separability as sep
from .centerpoint import centerpoint_allocation, centerpoint_equipartition, suggest_colors
from .geometry import ColoredPartition, PointSet
from .sampling import BalancedDistribution, KINDS, ModelSpec

DEFAULT_SEED = 0xC0FFEE
SEED_ENV_VAR = "TVERBERG_LAB_SEED"

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_GUARD = 3
EXIT_SOLVER = 4


def _jsonable(obj):
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: _jsonable(getattr(obj, f.name))
                for f in dataclasses.fields(obj)}
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    return obj


def _emit(args, payload: dict, started: float) -> None:
    out = {
        "version": __version__,
        "seed": args.seed,
        "config": _config_echo(args),
        "wall_time_ms": round((time.perf_counter() - started) * 1000.0, 3),
    }
    out.update(_jsonable(payload))
    text = json.dumps(out, indent=2, sort_keys=True) + "\n"
    _write_text(args.out, text)


def _emit_csv(args, rows, row_type=None) -> None:
    buf = io.StringIO()
    mc.rows_to_csv(rows, buf, row_type=row_type)
    _write_text(args.out, buf.getvalue())


def _write_text(out_path, text: str) -> None:
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _config_echo(args) -> dict:
    skip = {"func"}
    return {k: v for k, v in sorted(vars(args).items())
            if k not in skip and v is not None}


def _read_points_csv(path) -> PointSet:
    """Point-cloud CSV with header x1..xd; a trailing label column is ignored."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = _csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise ValueError("empty CSV: header row x1..xd required")
        d = len(header) - 1 if header and header[-1] == "label" else len(header)
        if d < 1 or header[:d] != [f"x{i+1}" for i in range(d)]:
            raise ValueError(f"line 1: expected header x1..xd[,label], got {header}")
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) < d:
                raise ValueError(f"line {lineno}: expected >= {d} fields")
            try:
                rows.append([float(v) for v in row[:d]])
            except ValueError:
                raise ValueError(f"line {lineno}: non-numeric coordinate")
    if not rows:
        raise ValueError("CSV has a header but no data rows")
    return PointSet.from_rows(rows)


# ---------------------------------------------------------------------------
# subcommands


def cmd_bounds(args) -> dict:
    params = {}
    for name in ("m", "n", "d", "k", "t", "x", "epsilon", "n_inner"):
        v = getattr(args, name, None)
        if v is not None:
            params[name] = v
    if args.formula == "threshold-size":
        value = formulas.threshold_sample_size(args.m, args.epsilon or 0.0, args.model)
        return {"formula_id": "threshold-size", "params": params | {"model": args.model},
                "value": value, "side": "exact",
                "notes": ["integer sample size, not a probability"]}
    if args.formula == "soberon-tolerance":
        value = formulas.soberon_tolerance_bound(args.big_n, args.m, args.d, args.epsilon)
        return {"formula_id": "soberon-tolerance",
                "params": params | {"N": args.big_n},
                "value": value, "side": "lower",
                "notes": ["reference curve: max tolerance guaranteed at "
                          "failure probability epsilon; -1 means none"]}
    if args.formula == "tverberg-tolerance-lower":
        params["corrected"] = not args.printed_sum
    report = formulas.bound_report(args.formula, **params)
    return _jsonable(report)


def cmd_simulate(args) -> dict | list:
    dist = BalancedDistribution(args.dist, args.d)
    if args.model == "equipartition":
        spec = ModelSpec("equipartition", m=args.m, n=args.n, dist=dist, seed=args.seed)
    else:
        spec = ModelSpec("allocation", m=args.m, k=args.k, dist=dist, seed=args.seed)
    est = mc.estimate_event(spec, args.event, args.trials, t=args.t,
                            threads=args.threads)
    if args.format == "csv":
        return [mc.SweepRow(event_id=est.event_id, m=args.m, d=args.d,
                            n=getattr(spec, "n", None), k=getattr(spec, "k", None),
                            t=args.t, successes=est.successes, trials=est.trials,
                            estimate=est.estimate, ci_low=est.ci_low,
                            ci_high=est.ci_high, seed=est.seed,
                            empty_class_trials=est.empty_class_trials)]
    return {"estimate": est, "model_spec": json.loads(spec.to_json())}


def cmd_dataset(args) -> dict:
    ds = sep.read_dataset_csv(args.csv)
    if args.check == "mle-pairs":
        if ds.m < 2:
            return {"check": "mle-pairs", "labels": list(ds.label_names),
                    "matrix": [], "all_pairs_mle_exists": None,
                    "warning": "single-label dataset: no pairs to check"}
        from .geometry import hulls_common_point

        m = ds.m
        matrix = [[None] * m for _ in range(m)]
        for i in range(1, m + 1):
            for j in range(i + 1, m + 1):
                pair = ds.pair_subset(i, j)
                exists = hulls_common_point(pair.to_partition()) is not None
                matrix[i - 1][j - 1] = matrix[j - 1][i - 1] = exists
        all_pairs = all(matrix[i][j] for i in range(m) for j in range(m) if i != j)
        return {"check": "mle-pairs", "labels": list(ds.label_names),
                "matrix": matrix, "all_pairs_mle_exists": all_pairs}
    if args.check == "pertsep0":
        report = sep.pertsep0(ds, override=args.override_guards)
        return {"check": "pertsep0", "report": report}
    if args.check == "degnsep":
        if ds.dim <= 2:
            return {"check": "degnsep", "method": "exact",
                    "value": sep.degnsep_exact_low_dim(ds)}
        return {"check": "degnsep", "method": "sampled",
                "upper_bound": True, "directions": args.directions,
                "value": sep.degnsep_sampled(ds, args.directions, seed=args.seed)}
    if args.check == "tolerance":
        part = ds.to_partition()
        res = sep.tolerance_exact(part, t_max=args.t_max,
                                  override=args.override_guards)
        return {"check": "tolerance", "result": res}
    raise ValueError(f"unknown dataset check {args.check!r}")


def cmd_centerpoint(args) -> dict:
    cloud = _read_points_csv(args.csv)
    if args.m == "auto":
        m = suggest_colors(len(cloud), cloud.dim, epsilon0=args.epsilon0)
    else:
        m = int(args.m)
    fn = centerpoint_equipartition if args.method == "equipartition" \
        else centerpoint_allocation
    result = fn(cloud, m, retries=args.retries, seed=args.seed)
    return {"m": m, "n_points": len(cloud), "dim": cloud.dim,
            "method": args.method, "retries": args.retries,
            "result": result, "success": result is not None}


_BUNDLED_CONFIGS = ("threshold_d2.json", "sandwich_small.json")


def _load_sweep_config(path: str) -> dict:
    if os.path.exists(path):
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    name = path if path.endswith(".json") else path + ".json"
    if name in _BUNDLED_CONFIGS:
        from importlib import resources

        ref = resources.files("tverberg_lab").joinpath("configs", name)
        return json.loads(ref.read_text(encoding="utf-8"))
    raise ValueError(f"config {path!r} not found (bundled: {_BUNDLED_CONFIGS})")


def cmd_sweep(args) -> tuple:
    cfg = _load_sweep_config(args.config)
    kind = cfg.get("experiment")
    seed = cfg.get("seed", args.seed)
    trials = cfg.get("trials", args.trials)
    if kind == "sandwich":
        grid = [tuple(cell) for cell in cfg["grid"]]
        rows = mc.sandwich_experiment(grid, cfg.get("dist", "standard_gaussian"),
                                      trials, seed, threads=args.threads)
        return rows, mc.SweepRow
    if kind == "threshold":
        rows = mc.threshold_sweep(cfg["d"], cfg["m_list"], cfg["c_list"],
                                  cfg.get("dist", "standard_gaussian"),
                                  trials, seed, model=cfg.get("model", "equipartition"),
                                  threads=args.threads)
        return rows, mc.SweepRow
    if kind == "pertsep":
        rows = mc.pertsep_convergence(cfg["m"], cfg["d"], cfg["k_list"],
                                      cfg.get("dist", "standard_gaussian"),
                                      trials, seed,
                                      override=args.override_guards)
        return rows, mc.PertsepRow
    raise ValueError(f"unknown experiment kind {kind!r} in config")


# ---------------------------------------------------------------------------
# parser


def _add_common(p: argparse.ArgumentParser) -> None:
    env_seed = os.environ.get(SEED_ENV_VAR)
    p.add_argument("--seed", type=lambda s: int(s, 0),
                   default=int(env_seed, 0) if env_seed else DEFAULT_SEED,
                   help=f"RNG seed (env {SEED_ENV_VAR}, default 0xC0FFEE)")
    p.add_argument("--trials", type=int, default=10000)
    p.add_argument("--threads", type=int, default=1,
                   help="worker cap; results are independent of it")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--out", default=None, help="output path (default stdout)")
    p.add_argument("--override-guards", action="store_true",
                   help="run past complexity guards")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tverberg-lab",
        description="Convex-position tests, partition-probability bounds, and "
                    "seeded Monte Carlo experiments for random colored point sets.")
    parser.add_argument("--version", action="version", version=__version__)
    subs = parser.add_subparsers(dest="command", required=True)

    b = subs.add_parser("bounds", help="evaluate a closed-form bound")
    b.add_argument("formula", choices=(
        "cover", "hemisphere", "tverberg-lower", "tverberg-upper",
        "tverberg-tolerance-lower", "radon-tolerance-lower", "urn",
        "allocation-lower", "erdos-renyi-limit", "threshold-size",
        "soberon-tolerance"))
    for name, typ in (("m", int), ("n", int), ("d", int), ("k", int),
                      ("t", int), ("x", float), ("epsilon", float),
                      ("n-inner", int), ("big-n", int)):
        b.add_argument(f"--{name}", type=typ, default=None,
                       dest=name.replace("-", "_"))
    b.add_argument("--model", choices=("equipartition", "allocation"),
                   default="equipartition")
    b.add_argument("--printed-sum", action="store_true",
                   help="use the tolerance bound exactly as printed (sum from i=1)")
    _add_common(b)
    b.set_defaults(func=cmd_bounds)

    s = subs.add_parser("simulate", help="Monte Carlo estimate of one event")
    s.add_argument("event", choices=mc.EVENTS)
    s.add_argument("--model", choices=("equipartition", "allocation"),
                   default="equipartition")
    s.add_argument("--m", type=int, required=True)
    s.add_argument("--n", type=int, default=None)
    s.add_argument("--k", type=int, default=None)
    s.add_argument("--d", type=int, required=True)
    s.add_argument("--t", type=int, default=None)
    s.add_argument("--dist", choices=KINDS, default="standard_gaussian")
    _add_common(s)
    s.set_defaults(func=cmd_simulate)

    ds = subs.add_parser("dataset", help="checks on a labeled CSV dataset")
    ds.add_argument("check", choices=("mle-pairs", "pertsep0", "degnsep", "tolerance"))
    ds.add_argument("--csv", required=True)
    ds.add_argument("--t-max", type=int, default=3, dest="t_max")
    ds.add_argument("--directions", type=int, default=10000)
    _add_common(ds)
    ds.set_defaults(func=cmd_dataset)

    cp = subs.add_parser("centerpoint", help="randomized approximate centerpoint")
    cp.add_argument("--csv", required=True)
    cp.add_argument("--m", default="auto", help="colors, or 'auto'")
    cp.add_argument("--method", choices=("equipartition", "allocation"),
                    default="equipartition")
    cp.add_argument("--retries", type=int, default=32)
    cp.add_argument("--epsilon0", type=float, default=0.5,
                    help="slack in the auto color suggestion")
    _add_common(cp)
    cp.set_defaults(func=cmd_centerpoint)

    sw = subs.add_parser("sweep", help="run an experiment config to CSV")
    sw.add_argument("--config", required=True,
                    help="config path or bundled name "
                         "(threshold_d2.json, sandwich_small.json)")
    _add_common(sw)
    sw.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    started = time.perf_counter()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        payload = args.func(args)
    except GuardRefused as exc:
        print(f"guard refused: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except SolverFailure as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (ValueError, OSError, KeyError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT

    if args.command == "sweep":
        rows, row_type = payload
        if args.format == "csv":
            _emit_csv(args, rows, row_type=row_type)
        else:
            _emit(args, {"rows": rows}, started)
    elif isinstance(payload, list):  # simulate --format csv
        _emit_csv(args, payload)
    else:
        _emit(args, payload, started)
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
