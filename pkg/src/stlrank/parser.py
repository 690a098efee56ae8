"""Surface syntax for formulas: parser and printer.

Grammar (loosest binding first):

    formula    := implies
    implies    := or ("->" implies)?                  right associative
    or         := and ("|" and)*
    and        := unary ("&" unary)*
    unary      := "!" unary | ("G"|"F") interval? unary | atom_or_until
    atom_or_until := primary ("U" interval? primary)?  no chaining
    primary    := "(" formula ")" | "true" | "false" | comparison
    comparison := expr ("<"|"<="|">"|">="|"=="|"!=") expr
    expr       := term (("+"|"-") term)*
    term       := factor ("*" factor)*
    factor     := "-" factor | "abs" "(" expr ")" | number
                | ident | "d1" "(" ident ")" | "(" expr ")"
    interval   := "[" number "," (number | "inf") "]"

Notes: an omitted interval means [0, inf]; `G`, `F`, `U` are case sensitive
and, with `true`, `false`, `inf`, `abs`, reserved; `d1(x)` names the derived
channel "d1(x)" as a single variable; `=` is accepted as an alias for `==`;
a minus applied directly to a number literal folds into a signed constant so
that printing and reparsing preserve structure; comparisons do not chain.

`print_formula` renders with explicit parentheses on operator bodies (the
form shown in the docs, for example `G[0,3](x <= 0)`), and
`parse_formula(print_formula(f))` returns a structurally equal formula.
Equality tolerances are not part of the surface syntax; `parse_formula`
applies its `eq_tolerance` argument to every `==`/`!=` atom it builds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .core.formula import (
    Abs,
    Add,
    And,
    Atom,
    Const,
    Eventually,
    FALSE,
    FalseFormula,
    Formula,
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
)

__all__ = ["ParseError", "SourceSpan", "parse_formula", "print_formula"]

_RESERVED = {"true", "false", "inf", "abs", "G", "F", "U"}

_TWO_CHAR = ("->", "<=", ">=", "==", "!=")
_ONE_CHAR = "<>=!&|+-*()[],"


@dataclass(frozen=True)
class SourceSpan:
    start: int
    end: int


class ParseError(Exception):
    def __init__(self, message: str, span: SourceSpan, expected: tuple[str, ...] = ()):
        self.message = message
        self.span = span
        self.expected = expected
        where = f"at offset {span.start}"
        hint = f" (expected {', '.join(expected)})" if expected else ""
        super().__init__(f"{message} {where}{hint}")


@dataclass(frozen=True)
class _Token:
    kind: str  # "num" | "ident" | "op" | "eof"
    text: str
    start: int
    end: int

    @property
    def span(self) -> SourceSpan:
        return SourceSpan(self.start, self.end)


def _tokenize(src: str) -> list[_Token]:
    toks: list[_Token] = []
    i = 0
    n = len(src)
    while i < n:
        c = src[i]
        if c.isspace():
            i += 1
            continue
        if c.isdigit() or (c == "." and i + 1 < n and src[i + 1].isdigit()):
            j = i
            seen_dot = False
            while j < n and (src[j].isdigit() or (src[j] == "." and not seen_dot)):
                if src[j] == ".":
                    seen_dot = True
                j += 1
            toks.append(_Token("num", src[i:j], i, j))
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (src[j].isalnum() or src[j] == "_"):
                j += 1
            toks.append(_Token("ident", src[i:j], i, j))
            i = j
            continue
        two = src[i : i + 2]
        if two in _TWO_CHAR:
            toks.append(_Token("op", two, i, i + 2))
            i += 2
            continue
        if c in _ONE_CHAR:
            toks.append(_Token("op", c, i, i + 1))
            i += 1
            continue
        raise ParseError(f"unexpected character {c!r}", SourceSpan(i, i + 1))
    toks.append(_Token("eof", "", n, n))
    return toks


class _Parser:
    def __init__(self, src: str, eq_tolerance: float):
        self.src = src
        self.toks = _tokenize(src)
        self.pos = 0
        self.eq_tolerance = eq_tolerance

    # -- token helpers ---------------------------------------------------

    def peek(self) -> _Token:
        return self.toks[self.pos]

    def advance(self) -> _Token:
        tok = self.toks[self.pos]
        self.pos += 1
        return tok

    def at_op(self, *texts: str) -> bool:
        tok = self.peek()
        return tok.kind == "op" and tok.text in texts

    def expect_op(self, text: str) -> _Token:
        tok = self.peek()
        if tok.kind == "op" and tok.text == text:
            return self.advance()
        raise ParseError(f"unexpected {self._describe(tok)}", tok.span, (repr(text),))

    @staticmethod
    def _describe(tok: _Token) -> str:
        return "end of input" if tok.kind == "eof" else f"token {tok.text!r}"

    # -- grammar ---------------------------------------------------------

    def parse(self) -> Formula:
        f = self.implies()
        tok = self.peek()
        if tok.kind != "eof":
            raise ParseError(f"unexpected {self._describe(tok)}", tok.span)
        return f

    def implies(self) -> Formula:
        left = self.or_()
        if self.at_op("->"):
            self.advance()
            return Implies(left, self.implies())
        return left

    def or_(self) -> Formula:
        f = self.and_()
        while self.at_op("|"):
            self.advance()
            f = Or(f, self.and_())
        return f

    def and_(self) -> Formula:
        f = self.unary()
        while self.at_op("&"):
            self.advance()
            f = And(f, self.unary())
        return f

    def unary(self) -> Formula:
        tok = self.peek()
        if self.at_op("!"):
            self.advance()
            return Not(self.unary())
        if tok.kind == "ident" and tok.text in ("G", "F"):
            self.advance()
            interval = self.interval_opt()
            body = self.unary()
            return Globally(interval, body) if tok.text == "G" else Eventually(interval, body)
        return self.atom_or_until()

    def atom_or_until(self) -> Formula:
        left = self.primary()
        tok = self.peek()
        if tok.kind == "ident" and tok.text == "U":
            self.advance()
            interval = self.interval_opt()
            right = self.primary()
            return Until(interval, left, right)
        return left

    def primary(self) -> Formula:
        tok = self.peek()
        if tok.kind == "ident" and tok.text == "true":
            self.advance()
            return TRUE
        if tok.kind == "ident" and tok.text == "false":
            self.advance()
            return FALSE
        if self.at_op("("):
            # Could open a subformula or a parenthesized arithmetic term;
            # try the formula reading and fall back to a comparison,
            # keeping whichever error got further into the input.
            mark = self.pos
            try:
                self.advance()
                inner = self.implies()
                self.expect_op(")")
                return inner
            except ParseError as formula_err:
                self.pos = mark
                try:
                    return self.comparison()
                except ParseError as cmp_err:
                    raise cmp_err if cmp_err.span.start >= formula_err.span.start else formula_err
        return self.comparison()

    def comparison(self) -> Formula:
        lhs = self.expr()
        tok = self.peek()
        if tok.kind == "op" and tok.text in ("<", "<=", ">", ">=", "==", "!=", "="):
            self.advance()
            op = "==" if tok.text == "=" else tok.text
            rhs = self.expr()
            if op in ("==", "!="):
                return Atom(Predicate(lhs, op, rhs, self.eq_tolerance))
            return Atom(Predicate(lhs, op, rhs))
        raise ParseError(
            f"unexpected {self._describe(tok)}",
            tok.span,
            ("'<'", "'<='", "'>'", "'>='", "'=='", "'!='"),
        )

    def expr(self):
        e = self.term()
        while self.at_op("+", "-"):
            op = self.advance().text
            rhs = self.term()
            e = Add(e, rhs) if op == "+" else Sub(e, rhs)
        return e

    def term(self):
        e = self.factor()
        while self.at_op("*"):
            self.advance()
            e = Mul(e, self.factor())
        return e

    def factor(self):
        tok = self.peek()
        if self.at_op("-"):
            self.advance()
            operand = self.factor()
            # Fold a sign applied directly to a literal so that printed
            # negative constants reparse to the same node.
            if isinstance(operand, Const):
                return Const(-operand.value)
            return Neg(operand)
        if self.at_op("("):
            self.advance()
            e = self.expr()
            self.expect_op(")")
            return e
        if tok.kind == "num":
            self.advance()
            return Const(float(tok.text))
        if tok.kind == "ident":
            if tok.text == "abs":
                self.advance()
                self.expect_op("(")
                e = self.expr()
                self.expect_op(")")
                return Abs(e)
            if tok.text == "d1":
                self.advance()
                self.expect_op("(")
                inner = self.peek()
                if inner.kind != "ident" or inner.text in _RESERVED:
                    raise ParseError(
                        f"unexpected {self._describe(inner)}", inner.span, ("channel name",)
                    )
                self.advance()
                self.expect_op(")")
                return Var(f"d1({inner.text})")
            if tok.text in _RESERVED:
                raise ParseError(
                    f"reserved word {tok.text!r} cannot name a channel", tok.span
                )
            self.advance()
            return Var(tok.text)
        raise ParseError(
            f"unexpected {self._describe(tok)}", tok.span, ("number", "channel name", "'('")
        )

    def interval_opt(self) -> Interval:
        if not self.at_op("["):
            return Interval(0.0, math.inf)
        open_tok = self.advance()
        lo_tok = self.peek()
        if lo_tok.kind != "num":
            raise ParseError(f"unexpected {self._describe(lo_tok)}", lo_tok.span, ("number",))
        self.advance()
        self.expect_op(",")
        hi_tok = self.peek()
        if hi_tok.kind == "num":
            hi = float(hi_tok.text)
        elif hi_tok.kind == "ident" and hi_tok.text == "inf":
            hi = math.inf
        else:
            raise ParseError(
                f"unexpected {self._describe(hi_tok)}", hi_tok.span, ("number", "'inf'")
            )
        self.advance()
        close_tok = self.expect_op("]")
        lo = float(lo_tok.text)
        if not lo < hi:
            raise ParseError(
                f"non-singular interval required (lo < hi), got [{lo_tok.text},{hi_tok.text}]",
                SourceSpan(open_tok.start, close_tok.end),
            )
        return Interval(lo, hi)


def parse_formula(src: str, *, eq_tolerance: float = 1e-9) -> Formula:
    """Parse the surface syntax into a formula.

    eq_tolerance is attached to every equality or inequality atom built from
    the source (the syntax itself carries no tolerance).
    """
    return _Parser(src, eq_tolerance).parse()


# ---------------------------------------------------------------------------
# Printing.
# ---------------------------------------------------------------------------

def _fmt_num(v: float) -> str:
    if v == int(v) and abs(v) < 1e15:
        return str(int(v))
    return repr(float(v))


def _fmt_interval(interval: Interval) -> str:
    if interval.lo == 0.0 and interval.unbounded:
        return ""
    hi = "inf" if interval.unbounded else _fmt_num(interval.hi)
    return f"[{_fmt_num(interval.lo)},{hi}]"


def _expr_str(e, level: int = 0) -> str:
    # levels: 0 = sum, 1 = product, 2 = factor
    if isinstance(e, Const):
        return _fmt_num(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Abs):
        return f"abs({_expr_str(e.operand, 0)})"
    if isinstance(e, Neg):
        return _wrap_expr(f"-{_expr_str(e.operand, 2)}", level, 2)
    if isinstance(e, (Add, Sub)):
        op = "+" if isinstance(e, Add) else "-"
        text = f"{_expr_str(e.left, 0)} {op} {_expr_str(e.right, 1)}"
        return _wrap_expr(text, level, 0)
    if isinstance(e, Mul):
        text = f"{_expr_str(e.left, 1)} * {_expr_str(e.right, 2)}"
        return _wrap_expr(text, level, 1)
    raise TypeError(f"not a term: {e!r}")


def _wrap_expr(text: str, want: int, have: int) -> str:
    return f"({text})" if have < want else text


def _formula_str(f: Formula, level: int) -> str:
    # levels: 0 = implies, 1 = or, 2 = and, 3 = unary, 4 = primary
    if isinstance(f, TrueFormula):
        return "true"
    if isinstance(f, FalseFormula):
        return "false"
    if isinstance(f, Atom):
        p = f.predicate
        text = f"{_expr_str(p.lhs)} {p.op} {_expr_str(p.rhs)}"
        return f"({text})" if level >= 4 else text
    if isinstance(f, Implies):
        text = f"{_formula_str(f.left, 1)} -> {_formula_str(f.right, 0)}"
        return f"({text})" if level >= 1 else text
    if isinstance(f, Or):
        text = f"{_formula_str(f.left, 1)} | {_formula_str(f.right, 2)}"
        return f"({text})" if level >= 2 else text
    if isinstance(f, And):
        text = f"{_formula_str(f.left, 2)} & {_formula_str(f.right, 3)}"
        return f"({text})" if level >= 3 else text
    if isinstance(f, Not):
        return f"!({_formula_str(f.operand, 0)})"
    if isinstance(f, Eventually):
        return f"F{_fmt_interval(f.interval)}({_formula_str(f.operand, 0)})"
    if isinstance(f, Globally):
        return f"G{_fmt_interval(f.interval)}({_formula_str(f.operand, 0)})"
    if isinstance(f, Until):
        text = (
            f"({_formula_str(f.left, 0)}) U{_fmt_interval(f.interval)}"
            f" ({_formula_str(f.right, 0)})"
        )
        return f"({text})" if level >= 4 else text
    raise TypeError(f"not a formula: {f!r}")


def print_formula(f: Formula) -> str:
    """Render a formula; parsing the result reproduces the same structure."""
    return _formula_str(f, 0)
