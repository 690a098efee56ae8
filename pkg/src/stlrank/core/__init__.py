"""Core signal model, formula syntax, and evaluators."""

from .formula import (
    FULL,
    Abs,
    Add,
    And,
    Atom,
    Const,
    Eventually,
    FALSE,
    FalseFormula,
    Formula,
    FormulaError,
    Globally,
    Implies,
    Interval,
    Mul,
    Neg,
    Not,
    Or,
    Predicate,
    Sub,
    TRUE,
    TrueFormula,
    Until,
    Var,
    channels_of,
    desugar,
    operator_count,
)
from .semantics import (
    EvaluationError,
    SampleTimeError,
    UnknownChannelError,
    Verdict,
    eval_expr,
    eval_fast,
    eval_naive,
    evaluation_grid,
)
from .trace import Trace, TraceError, TraceSet

__all__ = [
    "FULL",
    "Abs",
    "Add",
    "And",
    "Atom",
    "Const",
    "Eventually",
    "FALSE",
    "FalseFormula",
    "Formula",
    "FormulaError",
    "Globally",
    "Implies",
    "Interval",
    "Mul",
    "Neg",
    "Not",
    "Or",
    "Predicate",
    "Sub",
    "TRUE",
    "TrueFormula",
    "Until",
    "Var",
    "channels_of",
    "desugar",
    "operator_count",
    "EvaluationError",
    "SampleTimeError",
    "UnknownChannelError",
    "Verdict",
    "eval_expr",
    "eval_fast",
    "eval_naive",
    "evaluation_grid",
    "Trace",
    "TraceError",
    "TraceSet",
]
