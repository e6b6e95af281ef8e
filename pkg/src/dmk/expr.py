"""Small arithmetic expression language for specifying data on the sphere.

Grammar (standard precedence, ^ binds tightest and is right-associative):

    expr    = term (("+" | "-") term)*
    term    = factor (("*" | "/") factor)*
    factor  = "-" factor | power
    power   = atom ("^" factor)?
    atom    = number | name | name "(" expr ")" | "(" expr ")"

Names are either the variables -- ``theta`` on the circle, ``x``, ``y``, ``z``
on the 2-sphere -- or one of the functions sin, cos, exp, log, sqrt, abs.
Errors carry 1-based column numbers.
"""

from __future__ import annotations

import re

import numpy as np

FUNCTIONS = {
    "sin": np.sin, "cos": np.cos, "exp": np.exp,
    "log": np.log, "sqrt": np.sqrt, "abs": np.abs,
}
VARIABLES = ("theta", "x", "y", "z")

_TOKEN = re.compile(r"\s*(?:(\d+\.?\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)"
                    r"|([A-Za-z_]\w*)|([-+*/^()]))")


class ExpressionError(ValueError):
    def __init__(self, message: str, column: int):
        super().__init__(f"{message} at column {column}")
        self.column = column


class Expression:
    """Parsed expression; call evaluate() with a dict of variable arrays."""

    def __init__(self, node, variables: frozenset, text: str):
        self._node = node
        self.variables = variables
        self.text = text

    def evaluate(self, env: dict) -> np.ndarray:
        missing = self.variables - set(env)
        if missing:
            raise ExpressionError(f"undefined variable {sorted(missing)[0]!r}", 1)
        return self._node(env)

    def __repr__(self):
        return f"Expression({self.text!r})"


def _tokenize(text: str):
    tokens, pos = [], 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            col = pos + len(text[pos:]) - len(text[pos:].lstrip()) + 1
            raise ExpressionError(f"unexpected character {text[pos:].lstrip()[0]!r}", col)
        num, name, op = m.groups()
        col = m.start(1 if num else (2 if name else 3)) + 1
        tokens.append((("num", float(num)) if num else
                       ("name", name) if name else ("op", op)) + (col,))
        pos = m.end()
    tokens.append(("end", None, len(text) + 1))
    return tokens


def parse_expression(text: str) -> Expression:
    tokens = _tokenize(text)
    idx = [0]
    used = set()

    def peek():
        return tokens[idx[0]]

    def take():
        tok = tokens[idx[0]]
        idx[0] += 1
        return tok

    def expect_op(op):
        kind, val, col = take()
        if kind != "op" or val != op:
            raise ExpressionError(f"expected {op!r}", col)

    def atom():
        kind, val, col = take()
        if kind == "num":
            return lambda env, v=val: v
        if kind == "name":
            if val in FUNCTIONS:
                expect_op("(")
                arg = expr()
                expect_op(")")
                return lambda env, f=FUNCTIONS[val], a=arg: f(a(env))
            if val in VARIABLES:
                used.add(val)
                return lambda env, v=val: env[v]
            raise ExpressionError(f"unknown identifier {val!r}", col)
        if kind == "op" and val == "(":
            inner = expr()
            expect_op(")")
            return inner
        raise ExpressionError("expected number, name, or '('",
                              col)

    def power():
        base = atom()
        if peek()[:2] == ("op", "^"):
            take()
            exponent = factor()          # right-associative via factor recursion
            return lambda env, b=base, e=exponent: b(env) ** e(env)
        return base

    def factor():
        if peek()[:2] == ("op", "-"):
            take()
            inner = factor()
            return lambda env, a=inner: -a(env)
        return power()

    def term():
        node = factor()
        while peek()[:2] in (("op", "*"), ("op", "/")):
            _, op, _ = take()
            rhs = factor()
            if op == "*":
                node = (lambda env, a=node, b=rhs: a(env) * b(env))
            else:
                node = (lambda env, a=node, b=rhs: a(env) / b(env))
        return node

    def expr():
        node = term()
        while peek()[:2] in (("op", "+"), ("op", "-")):
            _, op, _ = take()
            rhs = term()
            if op == "+":
                node = (lambda env, a=node, b=rhs: a(env) + b(env))
            else:
                node = (lambda env, a=node, b=rhs: a(env) - b(env))
        return node

    node = expr()
    kind, val, col = peek()
    if kind != "end":
        raise ExpressionError(f"unexpected trailing input {val!r}", col)
    return Expression(node, frozenset(used), text)


def evaluate_on_grid(expression: Expression, grid) -> np.ndarray:
    """Evaluate at the grid nodes; theta on the circle, x/y/z on the sphere."""
    if grid.dimension == 2:
        env = {"theta": grid.theta}
        bad = expression.variables - {"theta"}
    else:
        env = {"x": grid.nodes[:, 0], "y": grid.nodes[:, 1], "z": grid.nodes[:, 2]}
        bad = expression.variables - {"x", "y", "z"}
    if bad:
        raise ExpressionError(
            f"variable {sorted(bad)[0]!r} is not available in dimension {grid.dimension}", 1)
    with np.errstate(all="ignore"):
        vals = np.broadcast_to(np.asarray(expression.evaluate(env), dtype=float),
                               (grid.num_nodes,)).copy()
    if not np.all(np.isfinite(vals)):
        raise ExpressionError("expression is not finite at every grid node", 1)
    return vals
