"""Safe arithmetic expressions over component frame coordinates.

Variables: ``s`` on segments, ``u``, ``v`` on planar patches, and ``t`` for
time-dependent data. Functions: sin, cos, tan, exp, log, sqrt, abs.
"""
from __future__ import annotations

import ast
import math

import numpy as np

FUNCTIONS = {
    "sin": np.sin,
    "cos": np.cos,
    "tan": np.tan,
    "exp": np.exp,
    "log": np.log,
    "sqrt": np.sqrt,
    "abs": np.abs,
}
CONSTANTS = {"pi": math.pi, "e": math.e}
VARIABLES = {1: ("s",), 2: ("u", "v")}

_BINOPS = {
    ast.Add: np.add,
    ast.Sub: np.subtract,
    ast.Mult: np.multiply,
    ast.Div: np.divide,
    ast.Pow: np.power,
}


class ExpressionError(ValueError):
    def __init__(self, message, position=None, text=None):
        self.position = position
        where = f" at position {position}" if position is not None else ""
        super().__init__(f"{message}{where}" + (f" in {text!r}" if text else ""))


def _rewrite_powers(text):
    """Replace "^" by "**" (Python gives "^" the wrong precedence); returns the
    new text and a map from new offsets back to the original ones."""
    out, back = [], []
    for k, ch in enumerate(text):
        if ch == "^":
            out.append("**")
            back.extend([k, k])
        else:
            out.append(ch)
            back.append(k)
    back.append(len(text))
    return "".join(out), back


def _compile(node, names, text):
    if isinstance(node, ast.Expression):
        return _compile(node.body, names, text)
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) and not isinstance(node.value, bool):
        value = np.float64(node.value)
        return lambda env: value
    if isinstance(node, ast.Name):
        if node.id in names:
            key = node.id
            return lambda env: env[key]
        if node.id in CONSTANTS:
            value = np.float64(CONSTANTS[node.id])
            return lambda env: value
        raise ExpressionError(f"unknown name {node.id!r}", node.col_offset, text)
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        op = _BINOPS[type(node.op)]
        left, right = _compile(node.left, names, text), _compile(node.right, names, text)
        return lambda env: op(left(env), right(env))
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        inner = _compile(node.operand, names, text)
        if isinstance(node.op, ast.USub):
            return lambda env: np.negative(inner(env))
        return inner
    if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and not node.keywords:
        if node.func.id not in FUNCTIONS:
            raise ExpressionError(f"unknown function {node.func.id!r}", node.col_offset, text)
        if len(node.args) != 1:
            raise ExpressionError(f"{node.func.id} takes one argument", node.col_offset, text)
        fn = FUNCTIONS[node.func.id]
        arg = _compile(node.args[0], names, text)
        return lambda env: fn(arg(env))
    raise ExpressionError("unsupported syntax", getattr(node, "col_offset", None), text)


class Expression:
    """Compiled expression; call with frame points ``xi`` of shape (n, dim) and optional time."""

    def __init__(self, text, dim):
        if dim not in VARIABLES:
            raise ValueError("dim must be 1 or 2")
        self.text = text
        self.dim = dim
        src, back = _rewrite_powers(text)
        lead = len(src) - len(src.lstrip())
        src, back = src.strip(), back[lead:]
        try:
            tree = ast.parse(src, mode="eval")
        except SyntaxError as exc:
            pos = min(max((exc.offset or 1) - 1, 0), len(back) - 1)
            raise ExpressionError(f"syntax error: {exc.msg}", back[pos], text) from None
        try:
            self._fn = _compile(tree, VARIABLES[dim] + ("t",), text)
        except ExpressionError as exc:
            if exc.position is None:
                raise
            raise ExpressionError(str(exc).split(" at position")[0], back[min(exc.position, len(back) - 1)], text) from None
        self.names = frozenset(n.id for n in ast.walk(tree) if isinstance(n, ast.Name))

    @property
    def time_dependent(self):
        return "t" in self.names

    def _env(self, xi, t):
        xi = np.asarray(xi, dtype=float).reshape(-1, self.dim)
        env = {name: xi[:, k] for k, name in enumerate(VARIABLES[self.dim])}
        env["t"] = np.float64(t)
        return env, len(xi)

    def __call__(self, xi, t=0.0):
        env, n = self._env(xi, t)
        try:
            with np.errstate(divide="raise", invalid="raise", over="raise"):
                out = self._fn(env)
        except FloatingPointError as exc:
            bad = self._first_bad_point(xi, t)
            raise ExpressionError(f"evaluation error ({exc}) at frame point {bad}", None, self.text) from None
        return np.broadcast_to(np.asarray(out, dtype=float), (n,)).copy()

    def _first_bad_point(self, xi, t):
        xi = np.asarray(xi, dtype=float).reshape(-1, self.dim)
        for p in xi:
            env, _ = self._env(p[None, :], t)
            try:
                with np.errstate(all="raise"):
                    self._fn(env)
            except FloatingPointError:
                return p.tolist()
        return None

    def at_time(self, t):
        return lambda xi: self(xi, t)

    def __repr__(self):
        return f"Expression({self.text!r}, dim={self.dim})"


def parse_expression(text, dim):
    return Expression(text, dim)


def parse_component_expressions(specs, structure):
    """Turn ``["1=s", "2=0"]`` or a single bare expression into ``{cid: Expression}``.

    Components without an entry get the zero function.
    """
    specs = list(specs or [])
    out = {}
    bare = [sp for sp in specs if "=" not in sp]
    if bare and len(specs) > 1:
        raise ExpressionError("mix of per-component and global expressions")
    for c in structure.components:
        text = bare[0] if bare else "0"
        out[c.id] = text
    for sp in specs:
        if "=" in sp:
            key, text = sp.split("=", 1)
            try:
                cid = int(key.strip())
            except ValueError:
                raise ExpressionError(f"bad component id {key!r}") from None
            structure.component(cid)
            out[cid] = text
    return {cid: Expression(text, structure.component(cid).dim) for cid, text in out.items()}
