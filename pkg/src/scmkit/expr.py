"""Expression language for structural equations.

Equations are written as plain strings such as ``"U + 5"``, ``"2*a^3 - -b"``
or ``"min(exp(U), 7)"`` and parsed into small immutable trees.  Keeping
equations in a closed expression language, instead of host-language
callables, is what makes models serializable: every equation can be printed
back to source and re-parsed to an identical tree.

Grammar, lowest to highest precedence::

    expr    := term (("+" | "-") term)*           left associative
    term    := factor (("*" | "/") factor)*       left associative
    factor  := "-" factor | power
    power   := atom ("^" factor)?                 right associative
    atom    := NUMBER | IDENT | IDENT "(" expr ("," expr)* ")" | "(" expr ")"

``-x^2`` parses as ``-(x^2)`` and ``2^3^2`` as ``2^(3^2)``, matching the
usual mathematical convention.  Whitespace is insignificant.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Union

__all__ = [
    "NumberLiteral",
    "VariableRef",
    "UnaryNeg",
    "BinaryOp",
    "FunctionCall",
    "Expr",
    "FUNCTIONS",
    "BINARY_OPS",
    "ParseError",
    "EvalError",
    "UnboundVariableError",
    "DomainError",
    "parse",
    "evaluate",
    "free_variables",
    "to_source",
]

#: arity of every function callable from an equation
FUNCTIONS = {
    "exp": 1,
    "log": 1,
    "sin": 1,
    "cos": 1,
    "abs": 1,
    "sign": 1,
    "min": 2,
    "max": 2,
}

#: operator tag -> surface symbol
BINARY_OPS = {"add": "+", "sub": "-", "mul": "*", "div": "/", "pow": "^"}

_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


class ParseError(Exception):
    """Raised when a source string is not a valid expression."""

    def __init__(self, position: int, message: str, expected: str | None = None):
        self.position = position
        self.message = message
        self.expected = expected
        hint = f" (expected {expected})" if expected else ""
        super().__init__(f"{message} at position {position}{hint}")


class EvalError(Exception):
    """Base class for evaluation failures."""


class UnboundVariableError(EvalError):
    """An equation referenced a variable with no binding."""

    def __init__(self, name: str):
        self.name = name
        super().__init__(f"unbound variable '{name}'")


class DomainError(EvalError):
    """Arithmetic left the real domain.

    Covers division by zero, logarithms of non-positive values, fractional
    powers of negatives, and any operation whose result is not finite.
    Raising instead of letting NaN or infinity through keeps bad values out
    of generated datasets, where they would be silent.
    """


@dataclass(frozen=True)
class NumberLiteral:
    value: float

    def __post_init__(self):
        object.__setattr__(self, "value", float(self.value))


@dataclass(frozen=True)
class VariableRef:
    name: str

    def __post_init__(self):
        if not _IDENT_RE.match(self.name):
            raise ValueError(f"invalid variable name {self.name!r}")


@dataclass(frozen=True)
class UnaryNeg:
    operand: "Expr"


@dataclass(frozen=True)
class BinaryOp:
    op: str
    left: "Expr"
    right: "Expr"

    def __post_init__(self):
        if self.op not in BINARY_OPS:
            raise ValueError(f"unknown binary operator {self.op!r}")


@dataclass(frozen=True)
class FunctionCall:
    name: str
    args: tuple["Expr", ...]

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(self.args))
        arity = FUNCTIONS.get(self.name)
        if arity is None:
            raise ValueError(f"unknown function {self.name!r}")
        if len(self.args) != arity:
            raise ValueError(f"{self.name} takes {arity} argument(s), got {len(self.args)}")


Expr = Union[NumberLiteral, VariableRef, UnaryNeg, BinaryOp, FunctionCall]


# --- scanner ---------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
      (?P<number>(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?)
    | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
    | (?P<punct>[-+*/^(),])
    """,
    re.VERBOSE,
)


def _tokenize(source: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    n = len(source)
    while pos < n:
        if source[pos].isspace():
            pos += 1
            continue
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            raise ParseError(pos, f"unexpected character {source[pos]!r}")
        kind = m.lastgroup
        tokens.append((kind, m.group(), pos))
        pos = m.end()
    tokens.append(("eof", "", n))
    return tokens


# --- parser ----------------------------------------------------------------


class _Parser:
    def __init__(self, source: str):
        self._tokens = _tokenize(source)
        self._index = 0

    def parse(self) -> Expr:
        expr = self._expr()
        kind, text, pos = self._peek()
        if kind != "eof":
            raise ParseError(pos, f"trailing input {text!r}", expected="end of input")
        return expr

    def _peek(self) -> tuple[str, str, int]:
        return self._tokens[self._index]

    def _advance(self) -> tuple[str, str, int]:
        token = self._tokens[self._index]
        self._index += 1
        return token

    def _match_punct(self, *symbols: str) -> str | None:
        kind, text, _ = self._peek()
        if kind == "punct" and text in symbols:
            self._advance()
            return text
        return None

    def _expect_punct(self, symbol: str, context: str) -> None:
        kind, text, pos = self._peek()
        if kind != "punct" or text != symbol:
            raise ParseError(pos, f"unexpected {text!r} in {context}" if text else f"unexpected end of input in {context}", expected=f"'{symbol}'")
        self._advance()

    def _expr(self) -> Expr:
        left = self._term()
        while (symbol := self._match_punct("+", "-")) is not None:
            op = "add" if symbol == "+" else "sub"
            left = BinaryOp(op, left, self._term())
        return left

    def _term(self) -> Expr:
        left = self._factor()
        while (symbol := self._match_punct("*", "/")) is not None:
            op = "mul" if symbol == "*" else "div"
            left = BinaryOp(op, left, self._factor())
        return left

    def _factor(self) -> Expr:
        if self._match_punct("-") is not None:
            return UnaryNeg(self._factor())
        return self._power()

    def _power(self) -> Expr:
        base = self._atom()
        if self._match_punct("^") is not None:
            return BinaryOp("pow", base, self._factor())
        return base

    def _atom(self) -> Expr:
        kind, text, pos = self._advance()
        if kind == "number":
            return NumberLiteral(float(text))
        if kind == "ident":
            if self._match_punct("(") is not None:
                return self._call(text, pos)
            return VariableRef(text)
        if kind == "punct" and text == "(":
            expr = self._expr()
            self._expect_punct(")", "parenthesized expression")
            return expr
        shown = repr(text) if text else "end of input"
        raise ParseError(pos, f"unexpected {shown}", expected="a number, variable, function call, or '('")

    def _call(self, name: str, pos: int) -> Expr:
        arity = FUNCTIONS.get(name)
        if arity is None:
            known = ", ".join(sorted(FUNCTIONS))
            raise ParseError(pos, f"unknown function {name!r}", expected=f"one of: {known}")
        args = [self._expr()]
        while self._match_punct(",") is not None:
            args.append(self._expr())
        self._expect_punct(")", f"arguments of {name}")
        if len(args) != arity:
            raise ParseError(pos, f"{name} takes {arity} argument(s), got {len(args)}")
        return FunctionCall(name, tuple(args))


def parse(source: str) -> Expr:
    """Parse ``source`` into an expression tree, raising ParseError on bad input."""
    return _Parser(source).parse()


# --- evaluation ------------------------------------------------------------


def evaluate(expr: Expr, bindings: dict[str, float]) -> float:
    """Evaluate ``expr`` with the given variable bindings.

    Every free variable of ``expr`` must be bound; extra bindings are
    ignored.  Raises UnboundVariableError for a missing binding and
    DomainError whenever the arithmetic leaves the finite reals.
    """
    if isinstance(expr, NumberLiteral):
        return _finite(expr.value, "number literal")
    if isinstance(expr, VariableRef):
        try:
            return float(bindings[expr.name])
        except KeyError:
            raise UnboundVariableError(expr.name) from None
    if isinstance(expr, UnaryNeg):
        return -evaluate(expr.operand, bindings)
    if isinstance(expr, BinaryOp):
        left = evaluate(expr.left, bindings)
        right = evaluate(expr.right, bindings)
        return _apply_binary(expr.op, left, right)
    if isinstance(expr, FunctionCall):
        args = [evaluate(arg, bindings) for arg in expr.args]
        return _apply_function(expr.name, args)
    raise TypeError(f"not an expression node: {expr!r}")


def _apply_binary(op: str, left: float, right: float) -> float:
    if op == "add":
        return _finite(left + right, "'+'")
    if op == "sub":
        return _finite(left - right, "'-'")
    if op == "mul":
        return _finite(left * right, "'*'")
    if op == "div":
        if right == 0.0:
            raise DomainError("division by zero")
        return _finite(left / right, "'/'")
    try:
        return _finite(math.pow(left, right), "'^'")
    except ValueError:
        raise DomainError(f"invalid power {left!r} ^ {right!r}") from None
    except OverflowError:
        raise DomainError(f"overflow in power {left!r} ^ {right!r}") from None


def _apply_function(name: str, args: list[float]) -> float:
    if name == "exp":
        try:
            return math.exp(args[0])
        except OverflowError:
            raise DomainError(f"overflow in exp({args[0]!r})") from None
    if name == "log":
        if args[0] <= 0.0:
            raise DomainError(f"log of non-positive value {args[0]!r}")
        return math.log(args[0])
    if name == "sin":
        return math.sin(args[0])
    if name == "cos":
        return math.cos(args[0])
    if name == "abs":
        return abs(args[0])
    if name == "sign":
        return float((args[0] > 0.0) - (args[0] < 0.0))
    if name == "min":
        return min(args[0], args[1])
    if name == "max":
        return max(args[0], args[1])
    raise TypeError(f"unknown function {name!r}")


def _finite(value: float, what: str) -> float:
    if math.isfinite(value):
        return value
    raise DomainError(f"non-finite result from {what}")


# --- inspection and printing -----------------------------------------------


def free_variables(expr: Expr) -> frozenset[str]:
    """Names of all variables referenced anywhere in ``expr``."""
    names: set[str] = set()
    stack: list[Expr] = [expr]
    while stack:
        node = stack.pop()
        if isinstance(node, VariableRef):
            names.add(node.name)
        elif isinstance(node, UnaryNeg):
            stack.append(node.operand)
        elif isinstance(node, BinaryOp):
            stack.append(node.left)
            stack.append(node.right)
        elif isinstance(node, FunctionCall):
            stack.extend(node.args)
    return frozenset(names)


def to_source(expr: Expr) -> str:
    """Print ``expr`` in fully parenthesized canonical form.

    ``parse(to_source(e)) == e`` for every tree the parser can produce.
    A hand-built negative literal prints as a plain negative number, which
    re-parses as a negation node instead; build ``UnaryNeg(NumberLiteral(x))``
    when round-tripping matters.
    """
    if isinstance(expr, NumberLiteral):
        return _format_number(expr.value)
    if isinstance(expr, VariableRef):
        return expr.name
    if isinstance(expr, UnaryNeg):
        return f"(-{to_source(expr.operand)})"
    if isinstance(expr, BinaryOp):
        return f"({to_source(expr.left)} {BINARY_OPS[expr.op]} {to_source(expr.right)})"
    if isinstance(expr, FunctionCall):
        return f"{expr.name}({', '.join(to_source(arg) for arg in expr.args)})"
    raise TypeError(f"not an expression node: {expr!r}")


def _format_number(value: float) -> str:
    if value.is_integer() and abs(value) < 1e16:
        return str(int(value))
    return repr(value)
