"""Command line interface.

Subcommands:

    check     evaluate one formula or named property over a dataset
    rates     satisfaction rates for the property library, per category
    metrics   engagement metric means among satisfying/violating records
    generate  write a synthetic dataset for a pattern mix
    expand    ground a formula over a day horizon, or render a query string
    kmeans    cluster position rows and test centroids for jump patterns

Exit codes: 0 on success, 1 for IO failures, 2 for usage, parse, or schema
errors (argparse's own usage failures also exit 2).
"""

from __future__ import annotations

import argparse
import sys

from . import __version__
from .analytics import (
    centroids_plot_data,
    cluster_kmeans,
    expand_propositional,
    expand_query,
    metric_distribution,
    rates_plot_data,
    satisfaction_rates,
)
from .core.semantics import EvaluationError, eval_fast
from .ingest import (
    DatasetError,
    filter_complete,
    generate,
    GeneratorConfig,
    labels_path_for,
    load_dataset,
    to_traceset,
    traceset_from_positions,
    write_csv,
    write_jsonl,
    write_labels,
)
from .parser import ParseError, parse_formula, print_formula
from .props import PROPERTY_NAMES, build, default_library

__all__ = ["main", "entry"]

_PARAM_FIELDS = ("w", "epsilon", "d", "s", "r", "eq_tolerance")


def _add_dataset_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--input", "-i", required=True, help="dataset file (csv or jsonl)")
    p.add_argument(
        "--days",
        type=int,
        default=14,
        help="length of the position day grid (default 14)",
    )
    p.add_argument(
        "--complete-only",
        action="store_true",
        help="drop records with missing days before evaluating",
    )


def _add_param_args(p: argparse.ArgumentParser) -> None:
    p.add_argument(
        "--param",
        action="append",
        default=[],
        metavar="NAME=VALUE",
        help="property parameter override, repeatable"
        f" (names: {', '.join(_PARAM_FIELDS)})",
    )
    p.add_argument("--w", type=float, help="window length in days")
    p.add_argument("--epsilon", type=float, help="flatness threshold")
    p.add_argument("--d", type=float, help="jump threshold")
    p.add_argument("--s", type=float, help="reach trigger position")
    p.add_argument("--r", type=float, help="reach target position")


def _add_formula_args(p: argparse.ArgumentParser) -> None:
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument(
        "--property",
        choices=PROPERTY_NAMES,
        help="named property from the built-in library",
    )
    g.add_argument("--formula", help="formula text")
    g.add_argument("--formula-file", help="file containing formula text")


def _collect_overrides(args: argparse.Namespace) -> dict[str, float]:
    overrides: dict[str, float] = {}
    for item in args.param:
        name, sep, value = item.partition("=")
        if not sep or name not in _PARAM_FIELDS:
            raise ValueError(
                f"bad --param {item!r}; expected NAME=VALUE with one of {_PARAM_FIELDS}"
            )
        try:
            overrides[name] = float(value)
        except ValueError:
            raise ValueError(f"bad --param {item!r}: {value!r} is not a number") from None
    for name in ("w", "epsilon", "d", "s", "r"):
        value = getattr(args, name, None)
        if value is not None:
            overrides[name] = value
    return overrides


def _resolve_formula(args: argparse.Namespace):
    """The formula to run, from --property/--formula/--formula-file."""
    overrides = _collect_overrides(args)
    if args.property:
        return build(args.property, **overrides).formula
    if overrides:
        raise ValueError("parameter overrides only apply to --property")
    if args.formula is not None:
        return parse_formula(args.formula)
    with open(args.formula_file, "r", encoding="utf-8") as fh:
        return parse_formula(fh.read().strip())


def _load(args: argparse.Namespace):
    ds = load_dataset(args.input, days=args.days)
    if getattr(args, "complete_only", False):
        ds = filter_complete(ds)
    return ds


def _write_text(path: str | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _cmd_check(args: argparse.Namespace) -> int:
    formula = _resolve_formula(args)
    ds = _load(args)
    satisfied = 0
    for rec in ds.records:
        verdict = eval_fast(formula, to_traceset(rec), until_strict=args.strict_until)
        if verdict.satisfied:
            satisfied += 1
        if args.each:
            state = "satisfied" if verdict.satisfied else "violated"
            print(f"{rec.product_id}\t{state}")
    total = len(ds.records)
    rate = satisfied / total if total else float("nan")
    print(f"formula: {print_formula(formula)}")
    print(f"satisfied {satisfied}/{total} ({rate:.4f})")
    return 0


def _cmd_rates(args: argparse.Namespace) -> int:
    specs = default_library(**_collect_overrides(args))
    ds = _load(args)
    table = satisfaction_rates(ds, specs, jobs=args.jobs)
    if args.output:
        _write_text(args.output, table.to_csv_text())
    else:
        sys.stdout.write(table.to_text())
    if args.emit_plot_data:
        _write_text(args.emit_plot_data, rates_plot_data(table))
    return 0


def _cmd_metrics(args: argparse.Namespace) -> int:
    specs = default_library(**_collect_overrides(args))
    ds = _load(args)
    table = metric_distribution(ds, specs, jobs=args.jobs)
    if args.output:
        _write_text(args.output, table.to_csv_text())
    else:
        sys.stdout.write(table.to_text())
    return 0


def _parse_mix(text: str) -> dict[str, float]:
    mix: dict[str, float] = {}
    for part in text.split(","):
        name, sep, value = part.partition("=")
        name = name.strip()
        if not sep or not name:
            raise ValueError(f"bad --mix entry {part!r}; expected NAME=SHARE")
        try:
            mix[name] = float(value)
        except ValueError:
            raise ValueError(f"bad --mix entry {part!r}: {value!r} is not a number") from None
    return mix


def _cmd_generate(args: argparse.Namespace) -> int:
    config = GeneratorConfig(
        n_records=args.n,
        pattern_mix=_parse_mix(args.mix),
        category_count=args.categories,
        noise_sigma=args.noise_sigma,
        seed=args.seed,
    )
    ds = generate(config)
    fmt = args.format
    if fmt is None:
        fmt = "jsonl" if args.output.endswith((".jsonl", ".ndjson")) else "csv"
    if fmt == "csv":
        write_csv(ds, args.output)
    else:
        write_jsonl(ds, args.output)
    print(f"wrote {len(ds)} records to {args.output}")
    if args.labels:
        path = labels_path_for(args.output)
        write_labels(ds, path)
        print(f"wrote planted-pattern labels to {path}")
    return 0


def _cmd_expand(args: argparse.Namespace) -> int:
    if args.query:
        if not args.property or args.property not in ("ditch", "spike"):
            raise ValueError("--query requires --property ditch or --property spike")
        overrides = _collect_overrides(args)
        spec = build(args.property, **overrides)
        text = expand_query(
            args.property,
            horizon=args.horizon,
            w=int(spec.params.w),
            d=spec.params.d,
        )
        _write_text(args.output, text + "\n")
        return 0
    formula = _resolve_formula(args)
    report = expand_propositional(formula, args.horizon)
    print(f"source formula: {report.source}")
    print(f"horizon: {report.horizon}")
    print(f"source operator count: {report.stl_operator_count}")
    print(f"grounded operator count: {report.operator_count}")
    print(f"grounded atom count: {report.atom_count}")
    _write_text(args.output, report.text + "\n")
    return 0


def _cmd_kmeans(args: argparse.Namespace) -> int:
    ds = _load(args)
    result = cluster_kmeans(ds, k=args.k, seed=args.seed, max_iter=args.max_iter)
    ditch = build("ditch").formula
    spike = build("spike").formula
    flagged = 0
    for c in range(args.k):
        size = int((result.assignments == c).sum())
        w = traceset_from_positions(result.centroids[c])
        has_ditch = eval_fast(ditch, w).satisfied
        has_spike = eval_fast(spike, w).satisfied
        flagged += int(has_ditch or has_spike)
        print(
            f"centroid {c}: size={size}"
            f" ditch={'yes' if has_ditch else 'no'}"
            f" spike={'yes' if has_spike else 'no'}"
        )
    print(f"iterations: {result.iterations}")
    print(f"distortion: {result.distortion_history[-1]:.4f}")
    print(f"centroids satisfying ditch or spike: {flagged}/{args.k}")
    if args.output:
        days = result.centroids.shape[1]
        lines = [",".join(["centroid"] + [f"pos_{i}" for i in range(days)])]
        for c in range(args.k):
            lines.append(
                ",".join([str(c)] + [f"{v:.6f}" for v in result.centroids[c]])
            )
        _write_text(args.output, "\n".join(lines) + "\n")
    if args.emit_plot_data:
        _write_text(args.emit_plot_data, centroids_plot_data(result))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stlrank",
        description="Temporal-logic monitoring for product ranking signals.",
    )
    parser.add_argument("--version", action="version", version=f"stlrank {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="evaluate one formula over a dataset")
    _add_dataset_args(p)
    _add_formula_args(p)
    _add_param_args(p)
    p.add_argument("--each", action="store_true", help="print one line per record")
    p.add_argument(
        "--strict-until",
        action="store_true",
        help="use the strict until variant (witness after the current day)",
    )
    p.set_defaults(func=_cmd_check)

    p = sub.add_parser("rates", help="property satisfaction rates per category")
    _add_dataset_args(p)
    _add_param_args(p)
    p.add_argument("--jobs", type=int, default=1, help="worker processes")
    p.add_argument("--output", "-o", help="write CSV here instead of printing")
    p.add_argument("--emit-plot-data", metavar="PATH", help="write gnuplot data file")
    p.set_defaults(func=_cmd_rates)

    p = sub.add_parser("metrics", help="engagement means among satisfying records")
    _add_dataset_args(p)
    _add_param_args(p)
    p.add_argument("--jobs", type=int, default=1, help="worker processes")
    p.add_argument("--output", "-o", help="write CSV here instead of printing")
    p.set_defaults(func=_cmd_metrics)

    p = sub.add_parser("generate", help="write a synthetic dataset")
    p.add_argument("--output", "-o", required=True, help="destination file")
    p.add_argument("--n", type=int, required=True, help="record count")
    p.add_argument(
        "--mix",
        required=True,
        help="pattern shares, e.g. cold=0.3,flat=0.5,spiky=0.2 (must sum to 1)",
    )
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--noise-sigma", type=float, default=0.0)
    p.add_argument("--categories", type=int, default=10)
    p.add_argument("--format", choices=("csv", "jsonl"))
    p.add_argument(
        "--labels",
        action="store_true",
        help="also write the planted-pattern sidecar next to the output",
    )
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("expand", help="ground a formula over a day horizon")
    _add_formula_args(p)
    _add_param_args(p)
    p.add_argument("--horizon", type=int, required=True, help="last position day")
    p.add_argument(
        "--query",
        action="store_true",
        help="render the pandas-style query string instead (ditch/spike only)",
    )
    p.add_argument("--output", "-o", help="write the expansion text here")
    p.set_defaults(func=_cmd_expand)

    p = sub.add_parser("kmeans", help="cluster position rows")
    _add_dataset_args(p)
    p.add_argument("--k", type=int, required=True, help="cluster count")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-iter", type=int, default=100)
    p.add_argument("--output", "-o", help="write centroid CSV here")
    p.add_argument("--emit-plot-data", metavar="PATH", help="write gnuplot data file")
    p.set_defaults(func=_cmd_kmeans)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    try:
        return args.func(args)
    except (ParseError, DatasetError, EvaluationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entry() -> None:
    raise SystemExit(main())
