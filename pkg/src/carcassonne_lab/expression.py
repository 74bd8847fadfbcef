"""Evolvable selection-policy expressions.

An expression is an immutable tree of :class:`Expr` nodes.  Internal nodes
are the protected operators ``+ - * / log sqrt``; leaves are the variables
``Q_sa``, ``N_s``, ``N_sa`` or a numeric constant ``K``.

Text form is prefix notation, one node per token, constants written as
numbers::

    expr   := leaf | "(" op expr+ ")"
    leaf   := "Q_sa" | "N_s" | "N_sa" | number
    op     := "+" | "-" | "*" | "/" | "log" | "sqrt"
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Callable, Iterator, List, Optional, Tuple

MAX_DEPTH = 8
K_VALUES = (0.25, 0.5, 1.0, 2.0, 3.0, 5.0, 7.0, 10.0)
PROTECT = 0.001

ARITY = {"+": 2, "-": 2, "*": 2, "/": 2, "log": 1, "sqrt": 1}
VARIABLES = ("Q_sa", "N_s", "N_sa")
CONST = "K"
# grow-method symbol pool: six functions, three variables, one constant
SYMBOLS = tuple(ARITY) + VARIABLES + (CONST,)


class ExpressionError(ValueError):
    pass


@dataclass(frozen=True)
class Expr:
    sym: str
    args: Tuple["Expr", ...] = ()
    value: float = 0.0

    @property
    def is_leaf(self) -> bool:
        return not self.args

    def __str__(self) -> str:
        return serialize(self)


def const(v: float) -> Expr:
    return Expr(CONST, (), float(v))


def var(name: str) -> Expr:
    if name not in VARIABLES:
        raise ExpressionError(f"unknown variable {name!r}")
    return Expr(name)


def op(sym: str, *args: Expr) -> Expr:
    if ARITY.get(sym) != len(args):
        raise ExpressionError(f"{sym} takes {ARITY.get(sym)} arguments, got {len(args)}")
    return Expr(sym, tuple(args))


# -- protected primitives ------------------------------------------------
def pdiv(a: float, b: float) -> float:
    return 1.0 if abs(b) < PROTECT else a / b


def plog(a: float) -> float:
    return math.log(max(abs(a), PROTECT))


def psqrt(a: float) -> float:
    return math.sqrt(abs(a))


def _finite(x: float) -> float:
    # products of huge intermediates can overflow; keep the contract total
    if x != x:
        return 0.0
    if x == math.inf:
        return 1.7976931348623157e308
    if x == -math.inf:
        return -1.7976931348623157e308
    return x


def evaluate(e: Expr, q_sa: float, n_s: float, n_sa: float) -> float:
    s = e.sym
    if s == CONST:
        return e.value
    if s == "Q_sa":
        return q_sa
    if s == "N_s":
        return n_s
    if s == "N_sa":
        return n_sa
    a = evaluate(e.args[0], q_sa, n_s, n_sa)
    if s == "log":
        return plog(a)
    if s == "sqrt":
        return psqrt(a)
    b = evaluate(e.args[1], q_sa, n_s, n_sa)
    if s == "+":
        return _finite(a + b)
    if s == "-":
        return _finite(a - b)
    if s == "*":
        return _finite(a * b)
    return _finite(pdiv(a, b))


def _source(e: Expr) -> str:
    s = e.sym
    if s == CONST:
        return repr(e.value)
    if s in VARIABLES:
        return s
    if s == "log":
        return f"plog({_source(e.args[0])})"
    if s == "sqrt":
        return f"psqrt({_source(e.args[0])})"
    a, b = _source(e.args[0]), _source(e.args[1])
    if s == "/":
        return f"fin(pdiv({a}, {b}))"
    return f"fin(({a}) {s} ({b}))"


def compile_expr(e: Expr) -> Callable[[float, float, float], float]:
    """Closure ``f(Q_sa, N_s, N_sa)`` computing exactly what :func:`evaluate` does."""
    src = f"lambda Q_sa, N_s, N_sa: {_source(e)}"
    env = {"pdiv": pdiv, "plog": plog, "psqrt": psqrt, "fin": _finite}
    return eval(src, env)  # noqa: S307 - source is generated from a validated tree


def seeded_uct(k: float) -> Expr:
    """Q_sa + 2K * sqrt(2 ln(N_s) / N_sa)."""
    if not math.isfinite(k):
        raise ExpressionError("k must be finite")
    explore = op("sqrt", op("/", op("*", const(2), op("log", var("N_s"))), var("N_sa")))
    return op("+", var("Q_sa"), op("*", op("*", const(2), const(k)), explore))


def uct_closed_form(k: float, q_sa: float, n_s: float, n_sa: float) -> float:
    return q_sa + 2 * k * math.sqrt(2 * math.log(n_s) / n_sa)


# -- structure -------------------------------------------------------------
def node_count(e: Expr) -> int:
    return 1 + sum(node_count(c) for c in e.args)


def depth(e: Expr) -> int:
    return 1 + max((depth(c) for c in e.args), default=0)


Path = Tuple[int, ...]


def walk(e: Expr, path: Path = ()) -> Iterator[Tuple[Path, Expr, int]]:
    """Pre-order (path, node, depth-of-node) triples; the root has depth 1."""
    stack = [(path, e, len(path) + 1)]
    while stack:
        p, n, d = stack.pop()
        yield p, n, d
        for i in range(len(n.args) - 1, -1, -1):
            stack.append((p + (i,), n.args[i], d + 1))


def subtree(e: Expr, path: Path) -> Expr:
    for i in path:
        e = e.args[i]
    return e


def replace(e: Expr, path: Path, new: Expr) -> Expr:
    if not path:
        return new
    i = path[0]
    args = list(e.args)
    args[i] = replace(args[i], path[1:], new)
    return Expr(e.sym, tuple(args), e.value)


def validate(e: Expr, max_depth: int = MAX_DEPTH) -> None:
    for _p, n, _d in walk(e):
        if n.sym in ARITY:
            if len(n.args) != ARITY[n.sym]:
                raise ExpressionError(f"{n.sym} has {len(n.args)} arguments")
        elif n.sym in VARIABLES or n.sym == CONST:
            if n.args:
                raise ExpressionError(f"leaf {n.sym} has children")
            if n.sym == CONST and not math.isfinite(n.value):
                raise ExpressionError("constant must be finite")
        else:
            raise ExpressionError(f"unknown symbol {n.sym!r}")
    if depth(e) > max_depth:
        raise ExpressionError(f"depth {depth(e)} exceeds {max_depth}")


# -- mutation --------------------------------------------------------------
def grow(rng: random.Random, max_depth: int) -> Expr:
    """Grow method: uniform over all symbols, terminal forced at the depth limit."""
    if max_depth <= 1:
        sym = rng.choice(VARIABLES + (CONST,))
    else:
        sym = rng.choice(SYMBOLS)
    if sym == CONST:
        return const(rng.choice(K_VALUES))
    if sym in VARIABLES:
        return Expr(sym)
    return Expr(sym, tuple(grow(rng, max_depth - 1) for _ in range(ARITY[sym])))


@dataclass(frozen=True)
class Mutation:
    path: Path
    internal: bool
    redraw_const: bool


def subtree_mutation(
    e: Expr,
    rng: random.Random,
    p_internal: float = 0.9,
    max_depth: int = MAX_DEPTH,
    info: Optional[List[Mutation]] = None,
) -> Expr:
    """One subtree mutation.  ``info`` (if given) receives a :class:`Mutation` record."""
    internal, leaves = [], []
    for p, n, d in walk(e):
        (leaves if n.is_leaf else internal).append((p, n, d))
    pick_internal = bool(internal) and rng.random() < p_internal
    path, node, d = rng.choice(internal if pick_internal else leaves)
    redraw = node.sym == CONST
    if redraw:
        new = const(rng.choice(K_VALUES))
    else:
        new = grow(rng, max_depth - d + 1)
    if info is not None:
        info.append(Mutation(path, pick_internal, redraw))
    return replace(e, path, new)


# -- text form -------------------------------------------------------------
def _fmt_num(v: float) -> str:
    return repr(float(v))


def serialize(e: Expr) -> str:
    if e.sym == CONST:
        return _fmt_num(e.value)
    if e.is_leaf:
        return e.sym
    return "(" + " ".join([e.sym] + [serialize(c) for c in e.args]) + ")"


def _tokens(text: str) -> List[str]:
    return text.replace("(", " ( ").replace(")", " ) ").split()


def parse(text: str, max_depth: int = MAX_DEPTH) -> Expr:
    toks = _tokens(text)
    if not toks:
        raise ExpressionError("empty expression")
    pos = 0

    def node() -> Expr:
        nonlocal pos
        if pos >= len(toks):
            raise ExpressionError("unexpected end of expression")
        t = toks[pos]
        pos += 1
        if t == "(":
            if pos >= len(toks):
                raise ExpressionError("unexpected end of expression")
            sym = toks[pos]
            pos += 1
            if sym not in ARITY:
                raise ExpressionError(f"unknown operator {sym!r}")
            args = []
            while pos < len(toks) and toks[pos] != ")":
                args.append(node())
            if pos >= len(toks):
                raise ExpressionError("missing ')'")
            pos += 1
            if len(args) != ARITY[sym]:
                raise ExpressionError(f"{sym} takes {ARITY[sym]} arguments, got {len(args)}")
            return Expr(sym, tuple(args))
        if t == ")":
            raise ExpressionError("unexpected ')'")
        if t in VARIABLES:
            return Expr(t)
        try:
            v = float(t)
        except ValueError:
            raise ExpressionError(f"unknown token {t!r}") from None
        if not math.isfinite(v):
            raise ExpressionError("constant must be finite")
        return const(v)

    e = node()
    if pos != len(toks):
        raise ExpressionError("trailing tokens after expression")
    validate(e, max_depth)
    return e
