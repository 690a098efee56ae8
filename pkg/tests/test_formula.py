import math

import pytest

from stlrank import (
    And,
    Atom,
    Const,
    Eventually,
    FALSE,
    FormulaError,
    Globally,
    Interval,
    Not,
    Or,
    Predicate,
    TRUE,
    Until,
    Var,
    channels_of,
    desugar,
    operator_count,
)
from stlrank.core.formula import FULL


def atom(op="<", name="x", c=0.0):
    return Atom(Predicate(Var(name), op, Const(c)))


def test_interval_validation():
    assert Interval(0, math.inf) == FULL
    with pytest.raises(FormulaError):
        Interval(-1, 2)
    with pytest.raises(FormulaError):
        Interval(3, 2)
    with pytest.raises(FormulaError):
        Interval(math.inf, math.inf)


def test_temporal_operators_reject_singular_windows():
    body = atom()
    with pytest.raises(FormulaError):
        Globally(Interval(1, 1), body)
    with pytest.raises(FormulaError):
        Eventually(Interval(0, 0), body)
    with pytest.raises(FormulaError):
        Until(Interval(2, 2), body, body)
    # lo < hi is fine even when no integer falls inside
    Globally(Interval(0.25, 0.75), body)


def test_const_rejects_nonfinite():
    with pytest.raises(FormulaError):
        Const(math.nan)
    with pytest.raises(FormulaError):
        Const(math.inf)


def test_predicate_validation():
    with pytest.raises(FormulaError):
        Predicate(Var("x"), "~", Const(0.0))
    with pytest.raises(FormulaError):
        Predicate(Var("x"), "==", Const(0.0), eq_tolerance=-1.0)


def test_channels_of_walks_both_sides():
    f = And(
        Atom(Predicate(Var("x"), "<", Var("d1(x)"))),
        Eventually(FULL, atom(name="y")),
    )
    assert channels_of(f) == {"x", "d1(x)", "y"}
    assert channels_of(TRUE) == set()


def test_operator_count_ignores_atoms():
    assert operator_count(atom()) == 0
    assert operator_count(TRUE) == 0
    f = Eventually(FULL, And(atom(), Eventually(Interval(0, 2), atom())))
    assert operator_count(f) == 3
    assert operator_count(Not(Or(atom(), atom()))) == 2


def test_desugar_reaches_core_fragment():
    """Desugared formulas contain only true, atoms with < or <=, negation,
    conjunction, and until."""
    from stlrank.core.formula import FalseFormula, Implies

    f = Implies(
        Or(atom(">="), Not(atom("!="))),
        Globally(Interval(0, 3), Eventually(FULL, atom("=="))),
    )
    core = desugar(f)

    def walk(g):
        assert not isinstance(g, (FalseFormula, Or, Implies, Eventually, Globally))
        if isinstance(g, Atom):
            assert g.predicate.op in ("<", "<=")
        for fld in getattr(g, "__dataclass_fields__", ()):
            v = getattr(g, fld)
            if hasattr(v, "__dataclass_fields__") and not isinstance(v, (Interval, Predicate)):
                walk(v)

    walk(core)


def test_desugar_is_idempotent():
    f = Globally(Interval(0, 2), Or(atom(">"), FALSE))
    assert desugar(desugar(f)) == desugar(f)
