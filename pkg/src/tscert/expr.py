"""Parser and evaluator for scalar membership-function expressions.

Grammar (whitespace insensitive):

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' atom)*        # left associative: 2^3^2 == 64
    atom   := NUMBER | 'pi' | VAR | FUNC '(' expr ')' | '(' expr ')'
    FUNC   := 'sin' | 'cos' | 'exp'
    VAR    := 'x' k   for state coordinate k, counted from 1

Parsed trees evaluate against a state vector; ``compile_fn`` emits a
plain Python closure for hot loops (same semantics, checked by tests).
All failures raise ExprError with the offending source column.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

from .errors import ExprError

_FUNCS = {"sin": math.sin, "cos": math.cos, "exp": math.exp}

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>\d+(?:\.\d*)?(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^(),]))"
)

_VAR_RE = re.compile(r"^x([1-9][0-9]*)$")


class Node:
    """Base AST node."""

    def evaluate(self, x) -> float:
        raise NotImplementedError

    def codegen(self) -> str:
        raise NotImplementedError

    def max_var(self) -> int:
        """Largest 1-based state index referenced, 0 when none."""
        return 0


@dataclass(frozen=True)
class Num(Node):
    value: float

    def evaluate(self, x):
        return self.value

    def codegen(self):
        return repr(self.value)


@dataclass(frozen=True)
class Var(Node):
    index: int  # 0-based into the state vector

    def evaluate(self, x):
        if self.index >= len(x):
            raise ExprError(f"x{self.index + 1} needs {self.index + 1} values, got {len(x)}")
        return float(x[self.index])

    def codegen(self):
        return f"x[{self.index}]"

    def max_var(self):
        return self.index + 1


@dataclass(frozen=True)
class Neg(Node):
    arg: Node

    def evaluate(self, x):
        return -self.arg.evaluate(x)

    def codegen(self):
        return f"(-{self.arg.codegen()})"

    def max_var(self):
        return self.arg.max_var()


@dataclass(frozen=True)
class Bin(Node):
    op: str
    left: Node
    right: Node

    def evaluate(self, x):
        a = self.left.evaluate(x)
        b = self.right.evaluate(x)
        try:
            if self.op == "+":
                return a + b
            if self.op == "-":
                return a - b
            if self.op == "*":
                return a * b
            if self.op == "/":
                return a / b
            return math.pow(a, b)
        except (ZeroDivisionError, OverflowError, ValueError) as exc:
            raise ExprError(f"evaluation failed for '{self.op}': {exc}") from exc

    def codegen(self):
        sym = "**" if self.op == "^" else self.op
        return f"({self.left.codegen()} {sym} {self.right.codegen()})"

    def max_var(self):
        return max(self.left.max_var(), self.right.max_var())


@dataclass(frozen=True)
class Call(Node):
    func: str
    arg: Node

    def evaluate(self, x):
        try:
            return _FUNCS[self.func](self.arg.evaluate(x))
        except (OverflowError, ValueError) as exc:
            raise ExprError(f"evaluation failed for {self.func}(): {exc}") from exc

    def codegen(self):
        return f"math.{self.func}({self.arg.codegen()})"

    def max_var(self):
        return self.arg.max_var()


def _tokenize(text):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            stripped = text[pos:].lstrip()
            if not stripped:
                break
            col = len(text) - len(stripped)
            raise ExprError(f"unexpected character {stripped[0]!r}", col)
        if m.group("num") is not None:
            tokens.append(("num", m.group("num"), m.start("num")))
        elif m.group("ident") is not None:
            tokens.append(("ident", m.group("ident"), m.start("ident")))
        else:
            tokens.append(("op", m.group("op"), m.start("op")))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, op):
        kind, value, pos = self.peek()
        if kind != "op" or value != op:
            raise ExprError(f"expected {op!r}", pos)
        return self.advance()

    def parse(self):
        node = self.expr()
        kind, value, pos = self.peek()
        if kind != "end":
            raise ExprError(f"unexpected trailing input {value!r}", pos)
        return node

    def expr(self):
        node = self.term()
        while True:
            kind, value, _ = self.peek()
            if kind == "op" and value in "+-":
                self.advance()
                node = Bin(value, node, self.term())
            else:
                return node

    def term(self):
        node = self.unary()
        while True:
            kind, value, _ = self.peek()
            if kind == "op" and value in "*/":
                self.advance()
                node = Bin(value, node, self.unary())
            else:
                return node

    def unary(self):
        kind, value, _ = self.peek()
        if kind == "op" and value == "-":
            self.advance()
            return Neg(self.unary())
        return self.power()

    def power(self):
        node = self.atom()
        while True:
            kind, value, _ = self.peek()
            if kind == "op" and value == "^":
                self.advance()
                node = Bin("^", node, self.atom())
            else:
                return node

    def atom(self):
        kind, value, pos = self.advance()
        if kind == "num":
            return Num(float(value))
        if kind == "ident":
            if value == "pi":
                return Num(math.pi)
            if value in _FUNCS:
                self.expect_op("(")
                arg = self.expr()
                k2, v2, p2 = self.peek()
                if k2 == "op" and v2 == ",":
                    raise ExprError(f"{value}() takes exactly one argument", p2)
                self.expect_op(")")
                return Call(value, arg)
            m = _VAR_RE.match(value)
            if m:
                return Var(int(m.group(1)) - 1)
            raise ExprError(f"unknown identifier {value!r}", pos)
        if kind == "op" and value == "(":
            node = self.expr()
            self.expect_op(")")
            return node
        shown = value if value else "end of input"
        raise ExprError(f"unexpected {shown!r}", pos)


def parse(text: str) -> Node:
    """Parse an expression string into an AST."""
    if not isinstance(text, str) or not text.strip():
        raise ExprError("empty expression", 0)
    return _Parser(text).parse()


def compile_fn(node: Node):
    """Compile an AST to a Python closure f(x) -> float.

    The source is generated from the validated AST only, never from raw
    user text, so exec here cannot run anything but arithmetic.
    """
    source = f"def _f(x):\n    return {node.codegen()}\n"
    namespace = {"math": math}
    exec(source, namespace)  # noqa: S102
    raw = namespace["_f"]

    def fn(x):
        try:
            return raw(x)
        except (ZeroDivisionError, OverflowError, ValueError, IndexError) as exc:
            raise ExprError(f"evaluation failed: {exc}") from exc

    return fn
