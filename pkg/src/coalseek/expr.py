"""Scalar expression trees: parsing, rendering, evaluation, symbolic differentiation.

Cost functions are plain expression trees over named real variables.  Trees are
immutable, so they are safe to share between threads and to cache derivatives of.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Iterator, Mapping, Union

__all__ = [
    "Expression",
    "Const",
    "Var",
    "Unary",
    "Binary",
    "ParseError",
    "DomainError",
    "MissingVariableError",
    "parse",
    "render",
    "evaluate",
    "differentiate",
    "free_variables",
]


class ParseError(ValueError):
    """Malformed input text; ``offset`` is the byte offset of the fault."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


class DomainError(ArithmeticError):
    """Evaluation left the real domain: log of a non-positive number, division
    by zero, a fractional power of a negative number, or a non-finite
    intermediate value."""


class MissingVariableError(KeyError):
    """The assignment does not cover a free variable of the expression."""


class _Node:
    """Operator sugar shared by all node kinds; builds plain trees, no folding."""

    __slots__ = ()

    def __add__(self, other):
        return Binary("add", self, _coerce(other))

    def __radd__(self, other):
        return Binary("add", _coerce(other), self)

    def __sub__(self, other):
        return Binary("sub", self, _coerce(other))

    def __rsub__(self, other):
        return Binary("sub", _coerce(other), self)

    def __mul__(self, other):
        return Binary("mul", self, _coerce(other))

    def __rmul__(self, other):
        return Binary("mul", _coerce(other), self)

    def __truediv__(self, other):
        return Binary("div", self, _coerce(other))

    def __rtruediv__(self, other):
        return Binary("div", _coerce(other), self)

    def __pow__(self, other):
        return Binary("pow", self, _coerce(other))

    def __neg__(self):
        return Unary("neg", self)


@dataclass(frozen=True)
class Const(_Node):
    value: float


@dataclass(frozen=True)
class Var(_Node):
    name: str


@dataclass(frozen=True)
class Unary(_Node):
    op: str  # "neg" | "exp" | "log"
    arg: "Expression"


@dataclass(frozen=True)
class Binary(_Node):
    op: str  # "add" | "sub" | "mul" | "div" | "pow"
    left: "Expression"
    right: "Expression"


Expression = Union[Const, Var, Unary, Binary]


def _coerce(value) -> Expression:
    if isinstance(value, _Node):
        return value
    return Const(float(value))


# ---------------------------------------------------------------------------
# Lexing / parsing
#
# expr   := term  (('+'|'-') term)*          left-associative
# term   := unary (('*'|'/') unary)*         left-associative
# unary  := '-' unary | power
# power  := atom ('^' signed-number)?        binds tighter than unary minus
# atom   := number | name | '(' expr ')' | ('exp'|'log') atom
#
# A leading '-' on a numeric literal folds into the constant so that rendered
# negative constants reparse to an identical tree.
# ---------------------------------------------------------------------------

_NUMBER_RE = re.compile(r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?")
_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_ACTION_RE = re.compile(r"x[1-9]\d*_[1-9]\d*\Z")
_FUNCTIONS = ("exp", "log")


class _Lexer:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def byte_offset(self, pos: int | None = None) -> int:
        pos = self.pos if pos is None else pos
        return len(self.text[:pos].encode("utf-8"))

    def skip_ws(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def take(self, char: str) -> bool:
        if self.peek() == char:
            self.pos += 1
            return True
        return False

    def expect(self, char: str) -> None:
        if not self.take(char):
            found = self.peek() or "end of input"
            raise ParseError(f"expected '{char}', found {found!r}", self.byte_offset())

    def number(self) -> float | None:
        self.skip_ws()
        m = _NUMBER_RE.match(self.text, self.pos)
        if m is None:
            return None
        self.pos = m.end()
        return float(m.group())

    def name(self) -> str | None:
        self.skip_ws()
        m = _NAME_RE.match(self.text, self.pos)
        if m is None:
            return None
        self.pos = m.end()
        return m.group()

    def at_end(self) -> bool:
        self.skip_ws()
        return self.pos >= len(self.text)


def parse(text: str) -> Expression:
    """Parse ``text`` into an expression tree.

    Variables are free-form identifiers; names that start with ``x<digit>``
    must be well-formed action identifiers ``x<coalition>_<agent>`` with
    1-based indices (anything else of that shape is rejected as malformed).
    """
    lex = _Lexer(text)
    tree = _parse_expr(lex)
    if not lex.at_end():
        raise ParseError(
            f"unexpected trailing input {lex.peek()!r}", lex.byte_offset()
        )
    return tree


def _parse_expr(lex: _Lexer) -> Expression:
    node = _parse_term(lex)
    while True:
        if lex.take("+"):
            node = Binary("add", node, _parse_term(lex))
        elif lex.take("-"):
            node = Binary("sub", node, _parse_term(lex))
        else:
            return node


def _parse_term(lex: _Lexer) -> Expression:
    node = _parse_unary(lex)
    while True:
        if lex.take("*"):
            node = Binary("mul", node, _parse_unary(lex))
        elif lex.take("/"):
            node = Binary("div", node, _parse_unary(lex))
        else:
            return node


def _parse_unary(lex: _Lexer) -> Expression:
    if lex.take("-"):
        inner = _parse_unary(lex)
        if isinstance(inner, Const):
            return Const(-inner.value)
        return Unary("neg", inner)
    return _parse_power(lex)


def _parse_power(lex: _Lexer) -> Expression:
    base = _parse_atom(lex)
    if lex.take("^"):
        sign = -1.0 if lex.take("-") else 1.0
        at = lex.byte_offset()
        value = lex.number()
        if value is None:
            raise ParseError("exponent must be a numeric literal", at)
        return Binary("pow", base, Const(sign * value))
    return base


def _parse_atom(lex: _Lexer) -> Expression:
    at = lex.byte_offset()
    value = lex.number()
    if value is not None:
        return Const(value)
    if lex.take("("):
        node = _parse_expr(lex)
        lex.expect(")")
        return node
    name = lex.name()
    if name is not None:
        if name in _FUNCTIONS:
            return Unary(name, _parse_atom(lex))
        if lex.peek() == "(":
            raise ParseError(f"unknown function name '{name}'", at)
        if name[0] == "x" and len(name) > 1 and name[1].isdigit():
            if _ACTION_RE.match(name) is None:
                raise ParseError(f"malformed variable token '{name}'", at)
        return Var(name)
    found = lex.peek() or "end of input"
    raise ParseError(f"expected a number, variable or '(', found {found!r}", at)


# ---------------------------------------------------------------------------
# Rendering
# ---------------------------------------------------------------------------

_PREC = {"add": 1, "sub": 1, "mul": 2, "div": 2, "neg": 3, "pow": 4}


def _prec(e: Expression) -> int:
    if isinstance(e, Unary):
        return _PREC["neg"] if e.op == "neg" else 5
    if isinstance(e, Binary):
        return _PREC[e.op]
    if isinstance(e, Const) and e.value < 0:
        return _PREC["neg"]
    return 5


def _fmt_number(value: float) -> str:
    if value == int(value) and abs(value) < 1e16:
        return str(int(value))
    return repr(value)


def render(e: Expression) -> str:
    """Render a tree to text that reparses to an identical tree."""
    if isinstance(e, Const):
        return _fmt_number(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Unary):
        if e.op == "neg":
            arg = render(e.arg)
            if _prec(e.arg) < _PREC["neg"]:
                arg = f"({arg})"
            return f"-{arg}"
        return f"{e.op}({render(e.arg)})"
    left, right = render(e.left), render(e.right)
    mine = _PREC[e.op]
    if e.op == "pow":
        # The grammar does not chain '^', so a pow base that is not atomic is
        # always parenthesized; a literal exponent renders bare (incl. sign).
        if _prec(e.left) <= mine:
            left = f"({left})"
        if not isinstance(e.right, Const):
            right = f"({right})"
        return f"{left}^{right}"
    if _prec(e.left) < mine:
        left = f"({left})"
    if _prec(e.right) <= mine:
        right = f"({right})"
    if e.op == "add":
        return f"{left} + {right}"
    if e.op == "sub":
        return f"{left} - {right}"
    if e.op == "mul":
        return f"{left}*{right}"
    return f"{left}/{right}"


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------


def _finite(value: float) -> float:
    if not math.isfinite(value):
        raise DomainError("non-finite intermediate value")
    return value


def _pow_value(base: float, exponent: float) -> float:
    try:
        return math.pow(base, exponent)
    except (ValueError, OverflowError) as err:
        raise DomainError(f"pow({base!r}, {exponent!r}) left the real domain") from err


def evaluate(e: Expression, assignment: Mapping[str, float]) -> float:
    """Evaluate at an assignment covering all free variables; returns a finite real."""
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Var):
        try:
            return float(assignment[e.name])
        except KeyError:
            raise MissingVariableError(e.name) from None
    if isinstance(e, Unary):
        a = evaluate(e.arg, assignment)
        if e.op == "neg":
            return -a
        if e.op == "exp":
            try:
                return _finite(math.exp(a))
            except OverflowError as err:
                raise DomainError(f"exp({a!r}) overflows") from err
        if a <= 0.0:
            raise DomainError(f"log of non-positive value {a!r}")
        return _finite(math.log(a))
    left = evaluate(e.left, assignment)
    right = evaluate(e.right, assignment)
    if e.op == "add":
        return _finite(left + right)
    if e.op == "sub":
        return _finite(left - right)
    if e.op == "mul":
        return _finite(left * right)
    if e.op == "div":
        if right == 0.0:
            raise DomainError("division by zero")
        return _finite(left / right)
    return _finite(_pow_value(left, right))


# ---------------------------------------------------------------------------
# Differentiation
#
# Results are simplified just enough to drop literal-zero additions and
# literal-one multiplications; no algebraic rewriting beyond that.
# ---------------------------------------------------------------------------


def _is(e: Expression, value: float) -> bool:
    return isinstance(e, Const) and e.value == value


def _neg(a: Expression) -> Expression:
    if isinstance(a, Const):
        return Const(-a.value)
    return Unary("neg", a)


def _add(a: Expression, b: Expression) -> Expression:
    if _is(a, 0.0):
        return b
    if _is(b, 0.0):
        return a
    return Binary("add", a, b)


def _sub(a: Expression, b: Expression) -> Expression:
    if _is(b, 0.0):
        return a
    if _is(a, 0.0):
        return _neg(b)
    return Binary("sub", a, b)


def _mul(a: Expression, b: Expression) -> Expression:
    if _is(a, 0.0) or _is(b, 0.0):
        return Const(0.0)
    if _is(a, 1.0):
        return b
    if _is(b, 1.0):
        return a
    return Binary("mul", a, b)


def _div(a: Expression, b: Expression) -> Expression:
    if _is(a, 0.0):
        return Const(0.0)
    if _is(b, 1.0):
        return a
    return Binary("div", a, b)


def _pow(a: Expression, b: Expression) -> Expression:
    if _is(b, 1.0):
        return a
    if _is(b, 0.0):
        return Const(1.0)
    return Binary("pow", a, b)


def differentiate(e: Expression, name: str) -> Expression:
    """Exact symbolic derivative of ``e`` with respect to the variable ``name``."""
    if isinstance(e, Const):
        return Const(0.0)
    if isinstance(e, Var):
        return Const(1.0) if e.name == name else Const(0.0)
    if isinstance(e, Unary):
        da = differentiate(e.arg, name)
        if e.op == "neg":
            return _neg(da)
        if e.op == "exp":
            return _mul(Unary("exp", e.arg), da)
        return _div(da, e.arg)
    dl = differentiate(e.left, name)
    dr = differentiate(e.right, name)
    if e.op == "add":
        return _add(dl, dr)
    if e.op == "sub":
        return _sub(dl, dr)
    if e.op == "mul":
        return _add(_mul(dl, e.right), _mul(e.left, dr))
    if e.op == "div":
        return _div(
            _sub(_mul(dl, e.right), _mul(e.left, dr)), _pow(e.right, Const(2.0))
        )
    if isinstance(e.right, Const):
        c = e.right.value
        return _mul(_mul(Const(c), _pow(e.left, Const(c - 1.0))), dl)
    # General exponent: u^v * (v' * log(u) + v * u' / u).
    return _mul(
        Binary("pow", e.left, e.right),
        _add(_mul(dr, Unary("log", e.left)), _div(_mul(e.right, dl), e.left)),
    )


def _walk(e: Expression) -> Iterator[Expression]:
    stack = [e]
    while stack:
        node = stack.pop()
        yield node
        if isinstance(node, Unary):
            stack.append(node.arg)
        elif isinstance(node, Binary):
            stack.append(node.left)
            stack.append(node.right)


def free_variables(e: Expression) -> frozenset[str]:
    """Exact set of variable names occurring in the tree (syntactic dependence)."""
    return frozenset(n.name for n in _walk(e) if isinstance(n, Var))
