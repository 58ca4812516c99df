"""Command-line entry point: ``oslo {bench,synth,diag,sweep}``.

Exit codes: 0 ok, 1 usage error, 2 data error, 3 runtime error.
Options may also come from a JSON file passed with ``--config``; explicit
flags win over file values.
"""

from __future__ import annotations

import argparse
import itertools
import json
import logging
import sys
from dataclasses import replace

from . import bench, diagnostics
from .baselines import KnnConfig
from .episodes import SyntheticSpec, generate_synthetic_dataset
from .io import load_splits, write_features
from .types import SPLITS, DataError, Dataset, EpisodeSpec, SolverConfig

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_RUNTIME = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


# (flag, dest, type, default, help) for options shared by bench and sweep
_EPISODE_OPTS = [
    ("--features", "features", str, None, "feature file (JSON lines)"),
    ("--split", "split", str, "test", "split to sample episodes from"),
    ("--ways", "ways", int, 5, "closed-set classes per task"),
    ("--shots", "shots", int, 1, "support examples per class"),
    ("--queries", "queries", int, 15, "queries per class"),
    ("--open-classes", "open_classes", int, 5, "open-set classes (standard mode)"),
    ("--mode", "mode", str, "standard", "standard or broad"),
    ("--tasks", "tasks", int, 1000, "number of tasks"),
    ("--seed", "seed", int, 0, "episode seed"),
    ("--lambda-z", "lambda_z", float, 1.0, "entropy weight on assignments"),
    ("--lambda-xi", "lambda_xi", float, 1.0, "entropy weight on inlierness"),
    ("--max-iters", "max_iters", int, 100, "solver cycles"),
    ("--rel-tol", "rel_tol", float, 1e-6, "solver relative objective tolerance"),
    ("--offset", "likelihood_offset", float, 0.0, "constant added to log-likelihoods"),
    ("--knn-k", "knn_k", int, 1, "neighbours for the k-NN detector"),
    ("--knn-aggregation", "knn_aggregation", str, "kth_distance",
     "kth_distance or mean_of_k"),
    ("--workers", "workers", int, 1, "worker processes"),
]


def _add_episode_opts(p):
    p.add_argument("--config", help="JSON file with default option values")
    for flag, dest, typ, _, help_ in _EPISODE_OPTS:
        p.add_argument(flag, dest=dest, type=typ, default=None, help=help_)


def _resolve(args, extra_defaults=None):
    """Fill unset options from the config file, then from built-in defaults."""
    defaults = {dest: default for _, dest, _, default, _ in _EPISODE_OPTS}
    defaults.update(extra_defaults or {})
    file_values = {}
    if getattr(args, "config", None):
        with open(args.config, encoding="utf-8") as fh:
            file_values = json.load(fh)
        unknown = set(file_values) - set(defaults)
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
    out = {}
    for dest, default in defaults.items():
        value = getattr(args, dest, None)
        out[dest] = value if value is not None else file_values.get(dest, default)
    if not out.get("features"):
        raise UsageError("--features is required")
    return out


def _bench_config(opts) -> bench.BenchConfig:
    try:
        episode = EpisodeSpec(
            opts["ways"], opts["shots"], opts["queries"], opts["open_classes"],
            opts["mode"], opts["seed"],
        )
        solver_cfg = SolverConfig(
            lambda_z=opts["lambda_z"], lambda_xi=opts["lambda_xi"],
            max_iters=opts["max_iters"], rel_tol=opts["rel_tol"],
            likelihood_offset=opts["likelihood_offset"],
        )
        methods = opts.get("methods", ["oslo", "strong_baseline"])
        if isinstance(methods, str):
            methods = methods.split(",")
        centering = opts.get("centering") or {}
        if isinstance(centering, str):
            centering = {m: centering for m in methods}
        return bench.BenchConfig(
            features_path=opts["features"], split=opts["split"], episode=episode,
            methods=tuple(methods), solver=solver_cfg,
            knn=KnnConfig(opts["knn_k"], opts["knn_aggregation"]),
            n_tasks=opts["tasks"], centering=centering, output_path=opts.get("out"),
            seed=opts["seed"], workers=opts["workers"],
            record_time=not opts.get("no_timing", False),
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_bench(args) -> int:
    opts = _resolve(args, {"methods": "oslo,strong_baseline", "centering": None,
                           "out": None, "no_timing": False})
    if args.no_timing:
        opts["no_timing"] = True
    config = _bench_config(opts)
    _, summary = bench.run_benchmark(config)
    _print_summary(summary)
    return EXIT_OK


def _print_summary(summary):
    print(f"{'method':<20}" + "".join(f"{m:>20}" for m in ("acc", "auroc", "aupr", "prec_at_090")))
    for method, stats in summary.items():
        cells = []
        for name in ("acc", "auroc", "aupr", "prec_at_090"):
            s = stats[name]
            ci = f" ±{100 * s['ci95']:.2f}" if s["ci95"] is not None else ""
            cells.append(f"{100 * s['mean']:.2f}{ci}")
        print(f"{method:<20}" + "".join(f"{c:>20}" for c in cells))


def cmd_sweep(args) -> int:
    opts = _resolve(args, {"out": None})
    splits = load_splits(opts["features"])
    grid = list(itertools.product(args.lambda_z_grid, args.lambda_xi_grid))
    lines = ["lambda_z,lambda_xi,acc,auroc,aupr,prec_at_090"]
    print(lines[0])
    for lz, lx in grid:
        o = dict(opts, lambda_z=lz, lambda_xi=lx, methods="oslo")
        config = replace(_bench_config(o), output_path=None)
        _, summary = bench.run_benchmark(config, splits)
        means = [summary["oslo"][m]["mean"] for m in ("acc", "auroc", "aupr", "prec_at_090")]
        line = ",".join([repr(lz), repr(lx)] + [repr(v) for v in means])
        lines.append(line)
        print(line, flush=True)
    if opts.get("out"):
        with open(opts["out"], "w", encoding="utf-8") as fh:
            fh.write("\n".join(lines) + "\n")
    return EXIT_OK


def cmd_synth(args) -> int:
    try:
        spec = SyntheticSpec(args.classes, args.dim, args.separation,
                             args.per_class, args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if not 0 <= args.base_classes < args.classes:
        raise UsageError("--base-classes must be in [0, classes)")
    ds = generate_synthetic_dataset(spec)
    base = ds.labels < args.base_classes
    datasets = {"test": ds.subset(~base, "test")}
    if args.base_classes:
        datasets["base"] = ds.subset(base, "base")
    write_features(args.out, datasets)
    print(f"wrote {len(ds)} records to {args.out}")
    return EXIT_OK


def diag_values(dataset: Dataset) -> dict:
    return {
        "n_records": len(dataset),
        "n_classes": int(len(dataset.classes)),
        "mif": diagnostics.mean_imposture_factor(dataset),
        "rho": diagnostics.variance_ratio(dataset),
    }


def cmd_diag(args) -> int:
    splits = load_splits(args.features)
    names = [args.split] if args.split else [s for s in SPLITS if s in splits]
    out = {}
    for name in names:
        if name not in splits:
            raise DataError(f"feature file has no {name!r} split")
        out[name] = diag_values(splits[name])
    if args.json:
        print(json.dumps(out, indent=2, sort_keys=True))
    else:
        for name, v in out.items():
            print(f"{name}: classes={v['n_classes']} records={v['n_records']} "
                  f"MIF={v['mif']!r} rho={v['rho']!r}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="oslo", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("bench", help="run an episodic benchmark")
    _add_episode_opts(p)
    p.add_argument("--methods", help=f"comma-separated subset of {','.join(bench.METHODS)}")
    p.add_argument("--centering", choices=("base", "task"),
                   help="force one centering for every method")
    p.add_argument("--out", help="result CSV path (summary written alongside)")
    p.add_argument("--no-timing", action="store_true",
                   help="write 0 for wall_time_ms so output files are byte-stable")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("sweep", help="grid search over lambda_z and lambda_xi")
    _add_episode_opts(p)
    p.add_argument("--lz", dest="lambda_z_grid", type=float, nargs="+",
                   default=[0.1, 0.5, 1.0], help="lambda_z grid")
    p.add_argument("--lxi", dest="lambda_xi_grid", type=float, nargs="+",
                   default=[0.1, 0.5, 1.0], help="lambda_xi grid")
    p.add_argument("--out", help="CSV path for the grid table")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("synth", help="write a synthetic feature file")
    p.add_argument("--classes", type=int, default=20)
    p.add_argument("--dim", type=int, default=64)
    p.add_argument("--separation", type=float, default=3.0)
    p.add_argument("--per-class", type=int, default=100)
    p.add_argument("--base-classes", type=int, default=0,
                   help="first N classes go to the base split")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("diag", help="MIF and variance ratio of a feature file")
    p.add_argument("--features", required=True)
    p.add_argument("--split", choices=SPLITS)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_diag)
    return parser


def cli_main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_help(sys.stderr)
            return EXIT_USAGE
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        return args.func(args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except bench.BenchmarkError as exc:
        print(f"benchmark error: {exc}", file=sys.stderr)
        return EXIT_DATA if isinstance(exc.__cause__, DataError) else EXIT_RUNTIME
    except (DataError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # noqa: BLE001
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


def main():
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
