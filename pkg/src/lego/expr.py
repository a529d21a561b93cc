"""Symbolic integer expressions.

Expression trees are immutable values: two structurally equal trees evaluate
equally under any environment and may be shared freely across threads. All
arithmetic is exact integer arithmetic with floor division; the index algebra
only ever produces nonnegative operands, so floor and Euclidean semantics
coincide on everything this package generates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Mapping, Optional, Union

from .errors import DivisionByZero, UnboundVariable

INTRINSICS = ("isqrt",)


@dataclass(frozen=True)
class VarRange:
    """Half-open integer range [lo, hi)."""

    lo: int
    hi: int

    def __post_init__(self):
        if not (isinstance(self.lo, int) and isinstance(self.hi, int)):
            raise TypeError("range bounds must be integers")
        if self.lo >= self.hi:
            raise ValueError(f"empty range [{self.lo}, {self.hi})")

    @property
    def max(self) -> int:
        """Largest value in the range (hi is exclusive)."""
        return self.hi - 1

    def contains(self, v: int) -> bool:
        return self.lo <= v < self.hi

    def intersect(self, other: "VarRange") -> "VarRange":
        lo = max(self.lo, other.lo)
        hi = min(self.hi, other.hi)
        if lo >= hi:
            raise ValueError(f"disjoint ranges {self} and {other}")
        return VarRange(lo, hi)

    def __str__(self):
        return f"[{self.lo}, {self.hi})"


class Expr:
    """Base class for expression nodes. Supports Python operators."""

    __slots__ = ()

    def __add__(self, other):
        return Add(self, as_expr(other))

    def __radd__(self, other):
        return Add(as_expr(other), self)

    def __sub__(self, other):
        return Sub(self, as_expr(other))

    def __rsub__(self, other):
        return Sub(as_expr(other), self)

    def __mul__(self, other):
        return Mul(self, as_expr(other))

    def __rmul__(self, other):
        return Mul(as_expr(other), self)

    def __floordiv__(self, other):
        return FloorDiv(self, as_expr(other))

    def __rfloordiv__(self, other):
        return FloorDiv(as_expr(other), self)

    def __mod__(self, other):
        return Mod(self, as_expr(other))

    def __rmod__(self, other):
        return Mod(as_expr(other), self)


def as_expr(x: Union[int, Expr]) -> Expr:
    if isinstance(x, Expr):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not integer expressions")
    if isinstance(x, int):
        return IntConst(x)
    raise TypeError(f"cannot treat {type(x).__name__} as an expression")


@dataclass(frozen=True)
class IntConst(Expr):
    value: int

    def __post_init__(self):
        if isinstance(self.value, bool) or not isinstance(self.value, int):
            raise TypeError("IntConst takes an int")


@dataclass(frozen=True)
class Var(Expr):
    name: str
    range: Optional[VarRange] = None


class _BinOp(Expr):
    __slots__ = ()


@dataclass(frozen=True)
class Add(_BinOp):
    lhs: Expr
    rhs: Expr

    def __post_init__(self):
        object.__setattr__(self, "lhs", as_expr(self.lhs))
        object.__setattr__(self, "rhs", as_expr(self.rhs))


@dataclass(frozen=True)
class Sub(_BinOp):
    lhs: Expr
    rhs: Expr

    def __post_init__(self):
        object.__setattr__(self, "lhs", as_expr(self.lhs))
        object.__setattr__(self, "rhs", as_expr(self.rhs))


@dataclass(frozen=True)
class Mul(_BinOp):
    lhs: Expr
    rhs: Expr

    def __post_init__(self):
        object.__setattr__(self, "lhs", as_expr(self.lhs))
        object.__setattr__(self, "rhs", as_expr(self.rhs))


@dataclass(frozen=True)
class FloorDiv(Expr):
    num: Expr
    den: Expr

    def __post_init__(self):
        object.__setattr__(self, "num", as_expr(self.num))
        object.__setattr__(self, "den", as_expr(self.den))
        if isinstance(self.den, IntConst) and self.den.value == 0:
            raise DivisionByZero("constant zero denominator")


@dataclass(frozen=True)
class Mod(Expr):
    num: Expr
    den: Expr

    def __post_init__(self):
        object.__setattr__(self, "num", as_expr(self.num))
        object.__setattr__(self, "den", as_expr(self.den))
        if isinstance(self.den, IntConst) and self.den.value == 0:
            raise DivisionByZero("constant zero modulus")


class Cond:
    """Base class for boolean conditions over expressions."""

    __slots__ = ()


_CMP_OPS = ("<", "<=", "==", ">=", ">")


@dataclass(frozen=True)
class Cmp(Cond):
    op: str
    lhs: Expr
    rhs: Expr

    def __post_init__(self):
        if self.op not in _CMP_OPS:
            raise ValueError(f"unknown comparison {self.op!r}")
        object.__setattr__(self, "lhs", as_expr(self.lhs))
        object.__setattr__(self, "rhs", as_expr(self.rhs))


@dataclass(frozen=True)
class And(Cond):
    lhs: Cond
    rhs: Cond


def lt(a, b) -> Cmp:
    return Cmp("<", a, b)


def le(a, b) -> Cmp:
    return Cmp("<=", a, b)


def eq(a, b) -> Cmp:
    return Cmp("==", a, b)


def ge(a, b) -> Cmp:
    return Cmp(">=", a, b)


def gt(a, b) -> Cmp:
    return Cmp(">", a, b)


def and_all(conds) -> Cond:
    """Conjunction of one or more conditions, left-associated."""
    conds = list(conds)
    if not conds:
        raise ValueError("and_all of no conditions")
    out = conds[0]
    for c in conds[1:]:
        out = And(out, c)
    return out


@dataclass(frozen=True)
class Select(Expr):
    cond: Cond
    then: Expr
    orelse: Expr

    def __post_init__(self):
        if not isinstance(self.cond, Cond):
            raise TypeError("Select condition must be a Cond")
        object.__setattr__(self, "then", as_expr(self.then))
        object.__setattr__(self, "orelse", as_expr(self.orelse))


@dataclass(frozen=True)
class Call(Expr):
    intrinsic: str
    args: tuple

    def __post_init__(self):
        if self.intrinsic not in INTRINSICS:
            raise ValueError(f"unknown intrinsic {self.intrinsic!r}")
        object.__setattr__(self, "args", tuple(as_expr(a) for a in self.args))
        if self.intrinsic == "isqrt" and len(self.args) != 1:
            raise ValueError("isqrt takes exactly one argument")


def isqrt(x) -> Call:
    return Call("isqrt", (x,))


def eval_expr(e: Expr, env: Mapping[str, int]) -> int:
    """Evaluate under a full variable environment.

    Floor division and Python's matching modulo are used throughout; a zero
    divisor raises DivisionByZero, a variable missing from env raises
    UnboundVariable.
    """
    if isinstance(e, IntConst):
        return e.value
    if isinstance(e, Var):
        try:
            return env[e.name]
        except KeyError:
            raise UnboundVariable(e.name) from None
    if isinstance(e, Add):
        return eval_expr(e.lhs, env) + eval_expr(e.rhs, env)
    if isinstance(e, Sub):
        return eval_expr(e.lhs, env) - eval_expr(e.rhs, env)
    if isinstance(e, Mul):
        return eval_expr(e.lhs, env) * eval_expr(e.rhs, env)
    if isinstance(e, FloorDiv):
        d = eval_expr(e.den, env)
        if d == 0:
            raise DivisionByZero("division by zero")
        return eval_expr(e.num, env) // d
    if isinstance(e, Mod):
        d = eval_expr(e.den, env)
        if d == 0:
            raise DivisionByZero("modulo by zero")
        return eval_expr(e.num, env) % d
    if isinstance(e, Select):
        if eval_cond(e.cond, env):
            return eval_expr(e.then, env)
        return eval_expr(e.orelse, env)
    if isinstance(e, Call):
        arg = eval_expr(e.args[0], env)
        return math.isqrt(arg)
    raise TypeError(f"not an expression: {e!r}")


def eval_cond(c: Cond, env: Mapping[str, int]) -> bool:
    if isinstance(c, Cmp):
        a = eval_expr(c.lhs, env)
        b = eval_expr(c.rhs, env)
        if c.op == "<":
            return a < b
        if c.op == "<=":
            return a <= b
        if c.op == "==":
            return a == b
        if c.op == ">=":
            return a >= b
        return a > b
    if isinstance(c, And):
        return eval_cond(c.lhs, env) and eval_cond(c.rhs, env)
    raise TypeError(f"not a condition: {c!r}")


def walk(e: Expr) -> Iterator[Expr]:
    """Yield every expression node in e, including those inside conditions."""
    stack = [e]
    while stack:
        node = stack.pop()
        yield node
        if isinstance(node, (Add, Sub, Mul)):
            stack.append(node.lhs)
            stack.append(node.rhs)
        elif isinstance(node, (FloorDiv, Mod)):
            stack.append(node.num)
            stack.append(node.den)
        elif isinstance(node, Select):
            stack.append(node.then)
            stack.append(node.orelse)
            stack.extend(_cond_exprs(node.cond))
        elif isinstance(node, Call):
            stack.extend(node.args)


def _cond_exprs(c: Cond):
    if isinstance(c, Cmp):
        return [c.lhs, c.rhs]
    return _cond_exprs(c.lhs) + _cond_exprs(c.rhs)


def variables(e: Expr) -> set:
    """Names of all variables occurring in e."""
    return {n.name for n in walk(e) if isinstance(n, Var)}


def var_ranges(e: Expr) -> dict:
    """Ranges attached to Var nodes in e, keyed by name."""
    out = {}
    for n in walk(e):
        if isinstance(n, Var) and n.range is not None:
            out[n.name] = n.range
    return out


_COUNTED = (Add, Sub, Mul, FloorDiv, Mod, Select, Call)


def op_count(e: Expr) -> int:
    """Number of arithmetic nodes (add/sub/mul/div/mod/select/call) in e."""
    return sum(1 for n in walk(e) if isinstance(n, _COUNTED))


def expand(e: Expr) -> Expr:
    """Distribute multiplication over addition and flatten nested sums.

    Constant coefficients are folded; the result is semantically equal to e.
    Operands of div/mod/select/call are expanded in place but the nodes
    themselves are kept intact.
    """
    terms = _expand_terms(e)
    combined = {}
    for coef, factors in terms:
        combined[factors] = combined.get(factors, 0) + coef
    return _rebuild_sum(list(combined.items()))


def _expand_terms(e: Expr):
    """Expression as a list of (factors, coef) ... returned as (coef, factors)."""
    if isinstance(e, IntConst):
        return [(e.value, ())]
    if isinstance(e, Add):
        return _expand_terms(e.lhs) + _expand_terms(e.rhs)
    if isinstance(e, Sub):
        return _expand_terms(e.lhs) + [(-c, f) for c, f in _expand_terms(e.rhs)]
    if isinstance(e, Mul):
        out = []
        for cl, fl in _expand_terms(e.lhs):
            for cr, fr in _expand_terms(e.rhs):
                out.append((cl * cr, fl + fr))
        return out
    return [(1, (_expand_opaque(e),))]


def _expand_opaque(e: Expr) -> Expr:
    if isinstance(e, FloorDiv):
        return FloorDiv(expand(e.num), expand(e.den))
    if isinstance(e, Mod):
        return Mod(expand(e.num), expand(e.den))
    if isinstance(e, Select):
        return Select(_expand_cond(e.cond), expand(e.then), expand(e.orelse))
    if isinstance(e, Call):
        return Call(e.intrinsic, tuple(expand(a) for a in e.args))
    return e


def _expand_cond(c: Cond) -> Cond:
    if isinstance(c, Cmp):
        return Cmp(c.op, expand(c.lhs), expand(c.rhs))
    return And(_expand_cond(c.lhs), _expand_cond(c.rhs))


def _product(coef: int, factors) -> Expr:
    if not factors:
        return IntConst(coef)
    out = None
    for f in factors:
        out = f if out is None else Mul(out, f)
    if coef != 1:
        out = Mul(IntConst(coef), out)
    return out


def _rebuild_sum(terms) -> Expr:
    """terms: list of (factors, coef); preserves first-encounter order."""
    out = None
    for factors, coef in terms:
        if coef == 0:
            continue
        if out is None:
            out = _product(coef, factors)
        elif coef > 0:
            out = Add(out, _product(coef, factors))
        else:
            out = Sub(out, _product(-coef, factors))
    return out if out is not None else IntConst(0)
