"""Dataset-level analyses: satisfaction rates, engagement metrics,
propositional expansion, query rendering, and k-means clustering.

Satisfaction rates evaluate a property library over every record and report
per-category and overall counts. Metric distributions compare engagement
counters (impressions, clicks, purchases) between the records that satisfy
a property and the rest.

Propositional expansion grounds a temporal formula over an explicit day
horizon, which shows how large the equivalent flat boolean formula gets and
lets small verdicts be cross-checked against the trace evaluators. Query
rendering produces the equivalent pandas-style dataframe filter as a string
for documentation; it is never executed.

K-means is a plain seeded Lloyd iteration over position rows, used to show
what centroid averaging does to short-lived excursions.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .core.formula import (
    Abs,
    Add,
    Atom,
    Const,
    Eventually,
    FalseFormula,
    Formula,
    FormulaError,
    Globally,
    Implies,
    And,
    Mul,
    Neg,
    Not,
    Or,
    Predicate,
    Sub,
    TrueFormula,
    Until,
    Var,
    channels_of,
    operator_count,
)
from .core.semantics import eval_fast
from .ingest import Dataset, ProductRecord, to_traceset
from .props import PropertySpec

__all__ = [
    "OVERALL",
    "ExpansionError",
    "ExpansionReport",
    "GAnd",
    "GAtom",
    "GFalse",
    "GNot",
    "GOr",
    "GTrue",
    "KMeansResult",
    "MetricRow",
    "MetricTable",
    "RateRow",
    "RateTable",
    "centroids_plot_data",
    "cluster_kmeans",
    "evaluate_grounded",
    "expand_propositional",
    "expand_query",
    "metric_distribution",
    "rates_plot_data",
    "satisfaction_rates",
]

OVERALL = "(all)"

METRICS = ("impressions", "clicks", "purchases")


# ---------------------------------------------------------------------------
# Satisfaction rates.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RateRow:
    category: str
    property: str
    satisfied: int
    total: int

    @property
    def rate(self) -> float:
        return self.satisfied / self.total if self.total else math.nan


class RateTable:
    """Per-category satisfaction counts, with an overall rollup per property."""

    def __init__(self, rows: Sequence[RateRow]) -> None:
        self.rows = list(rows)

    def rate(self, category: str, property_name: str) -> float:
        for row in self.rows:
            if row.category == category and row.property == property_name:
                return row.rate
        raise KeyError((category, property_name))

    def overall(self, property_name: str) -> float:
        return self.rate(OVERALL, property_name)

    def to_csv_text(self) -> str:
        lines = ["category,property,satisfied,total,rate"]
        for row in self.rows:
            rate = "NA" if math.isnan(row.rate) else f"{row.rate:.6f}"
            lines.append(
                f"{row.category},{row.property},{row.satisfied},{row.total},{rate}"
            )
        return "\n".join(lines) + "\n"

    def to_text(self) -> str:
        headers = ("category", "property", "satisfied", "total", "rate")
        cells = [headers]
        for row in self.rows:
            rate = "NA" if math.isnan(row.rate) else f"{row.rate:.4f}"
            cells.append(
                (row.category, row.property, str(row.satisfied), str(row.total), rate)
            )
        widths = [max(len(r[i]) for r in cells) for i in range(len(headers))]
        lines = []
        for r in cells:
            lines.append(
                "  ".join(
                    r[i].ljust(widths[i]) if i < 2 else r[i].rjust(widths[i])
                    for i in range(len(headers))
                ).rstrip()
            )
        return "\n".join(lines) + "\n"


def _spec_verdicts(records: Sequence[ProductRecord], specs: Sequence[PropertySpec]) -> np.ndarray:
    """Boolean matrix: out[i, j] = record i satisfies spec j."""
    out = np.zeros((len(records), len(specs)), dtype=bool)
    for i, rec in enumerate(records):
        w = to_traceset(rec)
        for j, spec in enumerate(specs):
            out[i, j] = eval_fast(spec.formula, w).satisfied
    return out


def _verdict_chunk(args: tuple[tuple[ProductRecord, ...], tuple[PropertySpec, ...]]) -> np.ndarray:
    records, specs = args
    return _spec_verdicts(records, specs)


def _all_verdicts(
    ds: Dataset, specs: Sequence[PropertySpec], jobs: int
) -> np.ndarray:
    if jobs <= 1 or len(ds.records) < 2 * jobs:
        return _spec_verdicts(ds.records, specs)
    chunk = (len(ds.records) + jobs - 1) // jobs
    pieces = [
        (tuple(ds.records[i : i + chunk]), tuple(specs))
        for i in range(0, len(ds.records), chunk)
    ]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        parts = list(pool.map(_verdict_chunk, pieces))
    return np.concatenate(parts, axis=0)


def satisfaction_rates(
    ds: Dataset, specs: Sequence[PropertySpec], jobs: int = 1
) -> RateTable:
    """Satisfied/total counts per (category, property) plus overall rows.

    Records are evaluated as-is: differences adjacent to missing days are 0
    in the derivative channel, so filter with `filter_complete` first when a
    property should only see fully ranked histories.
    """
    verdicts = _all_verdicts(ds, specs, jobs)
    categories = ds.categories
    cat_index = {c: i for i, c in enumerate(categories)}
    rec_cat = np.array([cat_index[rec.category] for rec in ds.records], dtype=np.int64)

    rows: list[RateRow] = []
    for j, spec in enumerate(specs):
        col = verdicts[:, j]
        for c, cat in enumerate(categories):
            mask = rec_cat == c
            rows.append(
                RateRow(cat, spec.name, int(col[mask].sum()), int(mask.sum()))
            )
    for j, spec in enumerate(specs):
        col = verdicts[:, j]
        rows.append(RateRow(OVERALL, spec.name, int(col.sum()), len(ds.records)))
    return RateTable(rows)


# ---------------------------------------------------------------------------
# Metric distributions.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MetricRow:
    property: str
    group: str  # "satisfied" or "violated"
    metric: str
    count: int
    mean: float  # nan when count is 0


class MetricTable:
    def __init__(self, rows: Sequence[MetricRow]) -> None:
        self.rows = list(rows)

    def mean(self, property_name: str, group: str, metric: str) -> float:
        for row in self.rows:
            if (row.property, row.group, row.metric) == (property_name, group, metric):
                return row.mean
        raise KeyError((property_name, group, metric))

    def to_csv_text(self) -> str:
        lines = ["property,group,metric,count,mean"]
        for row in self.rows:
            mean = "NA" if math.isnan(row.mean) else f"{row.mean:.4f}"
            lines.append(f"{row.property},{row.group},{row.metric},{row.count},{mean}")
        return "\n".join(lines) + "\n"

    def to_text(self) -> str:
        headers = ("property", "group", "metric", "count", "mean")
        cells = [headers]
        for row in self.rows:
            mean = "NA" if math.isnan(row.mean) else f"{row.mean:.2f}"
            cells.append((row.property, row.group, row.metric, str(row.count), mean))
        widths = [max(len(r[i]) for r in cells) for i in range(len(headers))]
        lines = []
        for r in cells:
            lines.append(
                "  ".join(
                    r[i].ljust(widths[i]) if i < 3 else r[i].rjust(widths[i])
                    for i in range(len(headers))
                ).rstrip()
            )
        return "\n".join(lines) + "\n"


def metric_distribution(
    ds: Dataset, specs: Sequence[PropertySpec], jobs: int = 1
) -> MetricTable:
    """Mean engagement counters among satisfying and violating records."""
    verdicts = _all_verdicts(ds, specs, jobs)
    metric_values = {
        m: np.array([getattr(rec, m) for rec in ds.records], dtype=np.float64)
        for m in METRICS
    }
    rows: list[MetricRow] = []
    for j, spec in enumerate(specs):
        col = verdicts[:, j]
        for group, mask in (("satisfied", col), ("violated", ~col)):
            n = int(mask.sum())
            for m in METRICS:
                mean = float(metric_values[m][mask].mean()) if n else math.nan
                rows.append(MetricRow(spec.name, group, m, n, mean))
    return MetricTable(rows)


# ---------------------------------------------------------------------------
# Propositional expansion.
# ---------------------------------------------------------------------------

class ExpansionError(FormulaError):
    """The formula cannot be grounded over a finite day horizon."""


class GTrue:
    __slots__ = ()

    def __repr__(self) -> str:
        return "GTrue"


class GFalse:
    __slots__ = ()

    def __repr__(self) -> str:
        return "GFalse"


GTRUE = GTrue()
GFALSE = GFalse()


@dataclass(frozen=True)
class GAtom:
    predicate: Predicate
    day: int


@dataclass(frozen=True)
class GNot:
    child: object


@dataclass(frozen=True)
class GAnd:
    children: tuple


@dataclass(frozen=True)
class GOr:
    children: tuple


@dataclass(frozen=True)
class ExpansionReport:
    """A temporal formula flattened over days 0..horizon.

    `operator_count` counts the boolean connectives inside each top-level
    alternative of the grounded formula (the joins between alternatives are
    free), which is the size that grows with the horizon.
    `stl_operator_count` counts the operators of the original formula, which
    does not. `atom_count` counts grounded comparison leaves.
    """

    source: str
    horizon: int
    root: object
    text: str
    operator_count: int
    stl_operator_count: int
    atom_count: int


def _formula_horizon(f: Formula, horizon: int) -> int:
    """Last day the formula can be evaluated at: day `horizon` for the
    position channel, one less once the derivative channel is involved."""
    last = horizon
    for chan in channels_of(f):
        if chan == "x":
            pass
        elif chan == "d1(x)":
            last = min(last, horizon - 1)
        else:
            raise ExpansionError(f"cannot ground channel {chan!r} over a day horizon")
    return last


def _window_days(t: int, lo: float, hi: float, last: int) -> tuple[list[int], int]:
    """Integer days in [t+lo, t+hi] and how many fall past `last`."""
    start = math.ceil(t + lo)
    if math.isinf(hi):
        return list(range(start, last + 1)), 0
    stop = math.floor(t + hi)
    days = list(range(start, stop + 1))
    padded = sum(1 for u in days if u > last)
    return days, padded


def _ground(f: Formula, t: int, last: int) -> object:
    if isinstance(f, TrueFormula):
        return GTRUE
    if isinstance(f, FalseFormula):
        return GFALSE
    if isinstance(f, Atom):
        return GAtom(f.predicate, t)
    if isinstance(f, Not):
        return GNot(_ground(f.operand, t, last))
    if isinstance(f, And):
        return GAnd((_ground(f.left, t, last), _ground(f.right, t, last)))
    if isinstance(f, Or):
        return GOr((_ground(f.left, t, last), _ground(f.right, t, last)))
    if isinstance(f, Implies):
        return GOr((GNot(_ground(f.left, t, last)), _ground(f.right, t, last)))
    if isinstance(f, Eventually):
        days, _ = _window_days(t, f.interval.lo, f.interval.hi, last)
        if not days:
            return GFALSE
        return GOr(
            tuple(GFALSE if u > last else _ground(f.operand, u, last) for u in days)
        )
    if isinstance(f, Globally):
        days, _ = _window_days(t, f.interval.lo, f.interval.hi, last)
        if not days:
            return GTRUE
        return GAnd(
            tuple(GTRUE if u > last else _ground(f.operand, u, last) for u in days)
        )
    if isinstance(f, Until):
        raise ExpansionError("until is not supported by propositional expansion")
    raise ExpansionError(f"cannot ground {type(f).__name__}")


def _gcount(node: object) -> int:
    if isinstance(node, (GAnd, GOr)):
        return len(node.children) - 1 + sum(_gcount(c) for c in node.children)
    if isinstance(node, GNot):
        return 1 + _gcount(node.child)
    return 0


def _gatoms(node: object) -> int:
    if isinstance(node, (GAnd, GOr)):
        return sum(_gatoms(c) for c in node.children)
    if isinstance(node, GNot):
        return _gatoms(node.child)
    return 1 if isinstance(node, GAtom) else 0


def _rename_expr(e, day: int):
    if isinstance(e, Var):
        return Var(f"{e.name}[{day}]")
    if isinstance(e, Const):
        return e
    if isinstance(e, Neg):
        return Neg(_rename_expr(e.operand, day))
    if isinstance(e, Abs):
        return Abs(_rename_expr(e.operand, day))
    if isinstance(e, Add):
        return Add(_rename_expr(e.left, day), _rename_expr(e.right, day))
    if isinstance(e, Sub):
        return Sub(_rename_expr(e.left, day), _rename_expr(e.right, day))
    return Mul(_rename_expr(e.left, day), _rename_expr(e.right, day))


def _gtext(node: object) -> str:
    # Local import keeps the parser optional for code that never renders.
    from .parser import print_formula

    if isinstance(node, GTrue):
        return "true"
    if isinstance(node, GFalse):
        return "false"
    if isinstance(node, GAtom):
        pred = node.predicate
        shifted = Predicate(
            _rename_expr(pred.lhs, node.day),
            pred.op,
            _rename_expr(pred.rhs, node.day),
            eq_tolerance=pred.eq_tolerance,
        )
        return print_formula(Atom(shifted))
    if isinstance(node, GNot):
        return f"!({_gtext(node.child)})"
    if isinstance(node, GAnd):
        return " & ".join(f"({_gtext(c)})" for c in node.children)
    if isinstance(node, GOr):
        return " | ".join(f"({_gtext(c)})" for c in node.children)
    raise ExpansionError(f"cannot render {type(node).__name__}")


def expand_propositional(f: Formula, horizon: int) -> ExpansionReport:
    """Ground a temporal formula into a flat boolean formula over days.

    `horizon` is the last day the position channel carries a sample, so the
    position channel grounds over days 0..horizon and the derivative channel
    over days 0..horizon-1. Bounded windows keep their full slot span, with
    slots past the end written as the window's identity literal (false for
    an eventuality, true for an invariant); unbounded windows stop at the
    end. The grounded formula computes exactly the whole-trace verdict of
    the evaluators on a trace of that length.
    """
    from .parser import print_formula

    if horizon < 0:
        raise ExpansionError("horizon must be non-negative")
    last = _formula_horizon(f, horizon)
    if last < 0:
        raise ExpansionError("horizon too short for the derivative channel")
    root = _ground(f, 0, last)
    if isinstance(root, (GAnd, GOr)):
        ops = sum(_gcount(c) for c in root.children)
    else:
        ops = _gcount(root)
    return ExpansionReport(
        source=print_formula(f),
        horizon=horizon,
        root=root,
        text=_gtext(root),
        operator_count=ops,
        stl_operator_count=operator_count(f),
        atom_count=_gatoms(root),
    )


def _expr_value(e, channels: Mapping[str, np.ndarray], day: int) -> float:
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Var):
        try:
            return float(channels[e.name][day])
        except KeyError:
            raise ExpansionError(f"unknown channel {e.name!r}") from None
    if isinstance(e, Neg):
        return -_expr_value(e.operand, channels, day)
    if isinstance(e, Abs):
        return abs(_expr_value(e.operand, channels, day))
    if isinstance(e, Add):
        return _expr_value(e.left, channels, day) + _expr_value(e.right, channels, day)
    if isinstance(e, Sub):
        return _expr_value(e.left, channels, day) - _expr_value(e.right, channels, day)
    return _expr_value(e.left, channels, day) * _expr_value(e.right, channels, day)


def evaluate_grounded(node: object, channels: Mapping[str, np.ndarray]) -> bool:
    """Evaluate a grounded formula against per-channel day arrays."""
    if isinstance(node, GTrue):
        return True
    if isinstance(node, GFalse):
        return False
    if isinstance(node, GAtom):
        pred = node.predicate
        diff = _expr_value(pred.lhs, channels, node.day) - _expr_value(
            pred.rhs, channels, node.day
        )
        if pred.op == "<":
            return diff < 0
        if pred.op == "<=":
            return diff <= 0
        if pred.op == ">":
            return diff > 0
        if pred.op == ">=":
            return diff >= 0
        if pred.op == "==":
            return abs(diff) <= pred.eq_tolerance
        return abs(diff) > pred.eq_tolerance
    if isinstance(node, GNot):
        return not evaluate_grounded(node.child, channels)
    if isinstance(node, GAnd):
        return all(evaluate_grounded(c, channels) for c in node.children)
    if isinstance(node, GOr):
        return any(evaluate_grounded(c, channels) for c in node.children)
    raise ExpansionError(f"cannot evaluate {type(node).__name__}")


# ---------------------------------------------------------------------------
# Query rendering.
# ---------------------------------------------------------------------------

def _query_num(v: float) -> str:
    if v == int(v) and abs(v) < 1e15:
        return str(int(v))
    return repr(float(v))


def expand_query(name: str, horizon: int, w: int, d: float = 10.0) -> str:
    """Pandas-style dataframe filter equivalent to a jump-and-rebound search.

    Supported names are "ditch" and "spike". The string is documentation of
    what the hand-written query for these patterns looks like at a given
    horizon; it is returned, never executed. Each outer term anchors the
    first jump at one day, so the term count (horizon - w + 1) and the total
    comparison count grow linearly with the horizon.
    """
    if name == "ditch":
        first_op, rebound_op, first_d, rebound_d = ">", "<", d, -d
    elif name == "spike":
        first_op, rebound_op, first_d, rebound_d = "<", ">", -d, d
    else:
        raise ExpansionError(f"no query template for {name!r}")
    if w < 1:
        raise ExpansionError("w must be at least 1")
    if horizon < w:
        raise ExpansionError("horizon must be at least w")
    terms = []
    for i in range(0, horizon - w + 1):
        rebound = " | ".join(
            f"(df.pos_{j} {rebound_op} {_query_num(rebound_d)})"
            for j in range(i, i + w + 1)
        )
        terms.append(f"((df.pos_{i} {first_op} {_query_num(first_d)}) & ({rebound}))")
    return "df[" + " | ".join(terms) + "]"


# ---------------------------------------------------------------------------
# Clustering.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class KMeansResult:
    centroids: np.ndarray  # (k, days)
    assignments: np.ndarray  # (n,) cluster index, -1 for excluded records
    iterations: int
    distortion_history: tuple[float, ...]


def _impute_rows(ds: Dataset) -> tuple[np.ndarray, np.ndarray]:
    """Position matrix with -1 replaced by each row's own mean.

    Returns (matrix, included) where `included` marks rows that carry at
    least one real sample; fully missing rows get no cluster.
    """
    raw = np.array([rec.positions for rec in ds.records], dtype=np.float64)
    missing = raw == -1.0
    included = ~missing.all(axis=1)
    matrix = raw.copy()
    for i in np.flatnonzero(missing.any(axis=1) & included):
        row = raw[i]
        mean = row[~missing[i]].mean()
        matrix[i, missing[i]] = mean
    return matrix, included


def cluster_kmeans(
    ds: Dataset, k: int, seed: int = 0, max_iter: int = 100
) -> KMeansResult:
    """Seeded Lloyd k-means over position rows.

    Missing days are imputed with the record's own mean; records with no
    ranked day at all are excluded (assignment -1). Initial centroids are k
    distinct record rows drawn from a seeded shuffle. An empty cluster keeps
    its previous centroid. Distortion (sum of squared distances to the
    assigned centroid) never increases across iterations.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    matrix, included = _impute_rows(ds)
    X = matrix[included]
    if len(X) < k:
        raise ValueError(f"need at least k={k} usable records, have {len(X)}")

    rng = np.random.default_rng(seed)
    order = rng.permutation(len(X))
    chosen: list[np.ndarray] = []
    for idx in order:
        row = X[idx]
        if not any(np.array_equal(row, c) for c in chosen):
            chosen.append(row)
        if len(chosen) == k:
            break
    if len(chosen) < k:
        raise ValueError(f"fewer than k={k} distinct records to seed centroids")
    centroids = np.stack(chosen)

    assignments = np.full(len(X), -1, dtype=np.int64)
    history: list[float] = []
    iterations = 0
    for _ in range(max_iter):
        iterations += 1
        d2 = ((X[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
        new_assign = d2.argmin(axis=1)
        history.append(float(d2[np.arange(len(X)), new_assign].sum()))
        if np.array_equal(new_assign, assignments):
            break
        assignments = new_assign
        for c in range(k):
            members = X[assignments == c]
            if len(members):
                centroids[c] = members.mean(axis=0)

    full = np.full(len(ds.records), -1, dtype=np.int64)
    full[np.flatnonzero(included)] = assignments
    return KMeansResult(
        centroids=centroids,
        assignments=full,
        iterations=iterations,
        distortion_history=tuple(history),
    )


# ---------------------------------------------------------------------------
# Plot data.
# ---------------------------------------------------------------------------

def rates_plot_data(table: RateTable) -> str:
    """Gnuplot-ready satisfaction rates: one row per category, one column
    per property, in first-seen order."""
    properties: list[str] = []
    categories: list[str] = []
    for row in table.rows:
        if row.property not in properties:
            properties.append(row.property)
        if row.category not in categories:
            categories.append(row.category)
    lines = ["# category " + " ".join(properties)]
    for cat in categories:
        vals = []
        for prop in properties:
            r = table.rate(cat, prop)
            vals.append("NA" if math.isnan(r) else f"{r:.6f}")
        lines.append(" ".join([cat] + vals))
    return "\n".join(lines) + "\n"


def centroids_plot_data(result: KMeansResult) -> str:
    """Gnuplot-ready centroid curves: day column, then one column per
    centroid."""
    k, days = result.centroids.shape
    lines = ["# day " + " ".join(f"c{i}" for i in range(k))]
    for day in range(days):
        vals = [f"{result.centroids[i, day]:.4f}" for i in range(k)]
        lines.append(" ".join([str(day)] + vals))
    return "\n".join(lines) + "\n"
