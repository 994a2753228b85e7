"""Real potentials on the half-line: arithmetic expressions or sampled data."""
from __future__ import annotations

import ast
import json
import math
import operator
import warnings
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy import integrate

from .errors import PotentialError

_FUNCS = {"exp": (np.exp, math.exp), "sin": (np.sin, math.sin), "cos": (np.cos, math.cos)}
_CONSTS = {"pi": math.pi}
_BINOPS = {ast.Add: (np.add, operator.add), ast.Sub: (np.subtract, operator.sub),
           ast.Mult: (np.multiply, operator.mul), ast.Div: (np.divide, operator.truediv),
           ast.Pow: (np.power, operator.pow)}


def _compile(node, scalar=False):
    """Turn a whitelisted AST into a closure of ``t``.

    ``scalar=True`` uses plain float arithmetic, much cheaper per call inside
    an integrator; otherwise numpy ufuncs broadcast over arrays.
    """
    pick = 1 if scalar else 0
    if isinstance(node, ast.Expression):
        return _compile(node.body, scalar)
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) \
            and not isinstance(node.value, bool):
        v = float(node.value)
        return (lambda t: v) if scalar else (lambda t: v + 0.0 * t)
    if isinstance(node, ast.Name):
        if node.id == "t":
            return lambda t: t
        if node.id in _CONSTS:
            v = _CONSTS[node.id]
            return (lambda t: v) if scalar else (lambda t: v + 0.0 * t)
        raise PotentialError(f"unknown name {node.id!r}")
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        inner = _compile(node.operand, scalar)
        if isinstance(node.op, ast.USub):
            return lambda t: -inner(t)
        return inner
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        op = _BINOPS[type(node.op)][pick]
        lhs, rhs = _compile(node.left, scalar), _compile(node.right, scalar)
        return lambda t: op(lhs(t), rhs(t))
    if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) \
            and node.func.id in _FUNCS and len(node.args) == 1 and not node.keywords:
        fn = _FUNCS[node.func.id][pick]
        arg = _compile(node.args[0], scalar)
        return lambda t: fn(arg(t))
    raise PotentialError(f"unsupported syntax: {ast.dump(node)[:60]}")


def _parse(text):
    if not isinstance(text, str) or not text.strip():
        raise PotentialError("empty potential expression")
    try:
        return ast.parse(text.replace("^", "**"), mode="eval")
    except SyntaxError as exc:
        raise PotentialError(f"cannot parse {text!r}: {exc.msg}") from None


def parse_expression(text, scalar=False):
    """Compile ``text`` (``+ - * / ^``, exp, sin, cos, variable ``t``)."""
    return _compile(_parse(text), scalar)


@dataclass(frozen=True, eq=False)
class Potential:
    """Vectorized real function ``p(t)``; ``zero`` marks the free case."""

    func: Callable
    kind: str
    source: object = None
    scalar_func: Optional[Callable] = None

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            return np.asarray(self.func(t), dtype=float)

    def scalar(self, t):
        """Fast path for a single float (integrator right-hand sides)."""
        if self.scalar_func is None:
            return float(self.func(t))
        try:
            return float(self.scalar_func(t))
        except OverflowError:
            return math.inf
        except ZeroDivisionError:
            return math.nan

    @property
    def zero(self):
        return self.kind == "expr" and str(self.source).strip() in ("0", "0.0")

    @classmethod
    def expr(cls, text):
        tree = _parse(text)
        return cls(_compile(tree), "expr", text, _compile(tree, scalar=True))

    @classmethod
    def sampled(cls, samples):
        """Piecewise-linear through ``[[t, p], ...]``; constant beyond the ends."""
        arr = np.asarray(samples, dtype=float)
        if arr.ndim != 2 or arr.shape[1] != 2 or len(arr) < 2:
            raise PotentialError("samples must be a list of at least two [t, p] pairs")
        if not np.all(np.isfinite(arr)):
            raise PotentialError("samples must be finite")
        if np.any(np.diff(arr[:, 0]) <= 0):
            raise PotentialError("sample abscissas must be strictly increasing")
        ts, ps = arr[:, 0].copy(), arr[:, 1].copy()
        return cls(lambda t: np.interp(t, ts, ps), "sampled", arr.tolist())

    @classmethod
    def from_json(cls, doc):
        if isinstance(doc, str):
            doc = json.loads(doc)
        kind = doc.get("kind")
        if kind == "expr":
            return cls.expr(doc.get("expr"))
        if kind == "sampled":
            return cls.sampled(doc.get("samples"))
        raise PotentialError(f"unknown potential kind {kind!r}")

    def to_json(self):
        if self.kind == "expr":
            return {"kind": "expr", "expr": self.source}
        return {"kind": "sampled", "samples": self.source}


ZERO = Potential.expr("0")


def check_regular(p, c=1.0, grid=None):
    """Spot checks: ``p`` finite and real on a grid in ``(0, c]`` and
    ``int_0^c |p|`` finite by adaptive quadrature.  Returns the integral."""
    grid = np.linspace(c / 64, c, 64) if grid is None else np.asarray(grid)
    vals = p(grid)
    if not np.all(np.isfinite(vals)):
        raise PotentialError("potential is not finite on the test grid")
    with warnings.catch_warnings():
        # divergence shows up in err; the warning itself adds nothing
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, err = integrate.quad(lambda s: abs(float(p(s))), 0.0, c, limit=200)
    if not math.isfinite(val) or err > 1e-6 * (1 + val):
        raise PotentialError("potential does not look integrable near 0")
    return val
