"""Deterministic pretty-printing of expressions under target profiles.

Printing is a pure structural walk, so the same expression always emits
byte-identical text. Parenthesization is minimal while preserving evaluation
order. Floor division prints as `/` in the C profile (the algebra only
produces nonnegative operands, where truncation and floor agree) and `//` in
the Python-flavored profiles.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional

from .errors import UnsupportedNode
from .expr import (
    Add,
    And,
    Call,
    Cmp,
    Cond,
    Expr,
    FloorDiv,
    IntConst,
    Mod,
    Mul,
    Select,
    Sub,
    Var,
)


@dataclass(frozen=True)
class TargetProfile:
    name: str
    floordiv: str
    mod: str = "%"
    and_op: str = "and"
    select_style: str = "python"   # "python" | "c" | "where"
    isqrt_name: str = "isqrt"
    arange: Optional[str] = None   # range-expression syntax, triton only
    paren_cmp_in_and: bool = False


C_PROFILE = TargetProfile(name="c", floordiv="/", and_op="&&", select_style="c")
PYTHON_PROFILE = TargetProfile(name="python", floordiv="//")
TRITON_PROFILE = TargetProfile(name="triton", floordiv="//", and_op="&",
                               select_style="where", arange="tl.arange",
                               paren_cmp_in_and=True)

PROFILES = {p.name: p for p in (C_PROFILE, PYTHON_PROFILE, TRITON_PROFILE)}


def get_profile(name: str) -> TargetProfile:
    try:
        return PROFILES[name]
    except KeyError:
        raise UnsupportedNode(f"unknown target profile {name!r}") from None


@dataclass(frozen=True)
class RangeExpr:
    """A compile-time-constant index range bound to a variable name."""

    name: str
    lo: int
    hi: int

    def __post_init__(self):
        if not (isinstance(self.lo, int) and isinstance(self.hi, int)):
            raise UnsupportedNode("range bounds must be integer constants")
        if self.lo >= self.hi:
            raise UnsupportedNode(f"empty range [{self.lo}, {self.hi})")


def emit_range(r: RangeExpr, profile: TargetProfile) -> str:
    """Render an arange-style expression; only the triton profile has one."""
    if profile.arange is None:
        raise UnsupportedNode(f"profile {profile.name!r} has no range-expression syntax")
    return f"{profile.arange}({r.lo}, {r.hi})"


# precedence levels: select < add/sub < mul/div/mod < atoms
_SELECT = 0
_ADD = 10
_MUL = 20
_ATOM = 100


def emit_expr(e: Expr, profile: TargetProfile, *,
              ranges: Optional[Mapping[str, RangeExpr]] = None,
              broadcasts: Optional[Mapping[str, tuple]] = None) -> str:
    """Render an expression as target-language text.

    ranges maps variable names to RangeExpr occurrences (triton only);
    broadcasts maps vector variable names to (axis, total_axes) so each
    occurrence is suffixed with its broadcast slice.
    """
    if ranges and profile.arange is None:
        raise UnsupportedNode(
            f"range-expression variables are not supported by profile {profile.name!r}")
    return _Emitter(profile, ranges or {}, broadcasts or {}).expr(e, _SELECT)


def broadcast_suffix(axis: int, total: int) -> str:
    """Slice suffix placing a 1-d vector on one axis of a total-d grid."""
    if total <= 1:
        return ""
    parts = ["None"] * total
    parts[axis] = ":"
    return "[" + ", ".join(parts) + "]"


class _Emitter:
    def __init__(self, profile, ranges, broadcasts):
        self.profile = profile
        self.ranges = ranges
        self.broadcasts = broadcasts

    def expr(self, e: Expr, parent_prec: int) -> str:
        if isinstance(e, IntConst):
            if e.value < 0 and parent_prec >= _MUL:
                return f"({e.value})"
            return str(e.value)
        if isinstance(e, Var):
            return self._var(e)
        if isinstance(e, Add):
            # a + (b - c) == a + b - c, so sum-shaped right children stay bare
            return self._binary(e.lhs, " + ", e.rhs, _ADD, parent_prec,
                                chain_ok=isinstance(e.rhs, (Add, Sub)))
        if isinstance(e, Sub):
            return self._binary(e.lhs, " - ", e.rhs, _ADD, parent_prec, chain_ok=False)
        if isinstance(e, Mul):
            return self._binary(e.lhs, "*", e.rhs, _MUL, parent_prec,
                                chain_ok=isinstance(e.rhs, Mul))
        if isinstance(e, FloorDiv):
            op = f" {self.profile.floordiv} "
            return self._binary(e.num, op, e.den, _MUL, parent_prec, chain_ok=False)
        if isinstance(e, Mod):
            op = f" {self.profile.mod} "
            return self._binary(e.num, op, e.den, _MUL, parent_prec, chain_ok=False)
        if isinstance(e, Select):
            return self._select(e, parent_prec)
        if isinstance(e, Call):
            name = self.profile.isqrt_name if e.intrinsic == "isqrt" else e.intrinsic
            args = ", ".join(self.expr(a, _SELECT) for a in e.args)
            return f"{name}({args})"
        raise UnsupportedNode(f"cannot emit {type(e).__name__}")

    def _var(self, v: Var) -> str:
        r = self.ranges.get(v.name)
        text = emit_range(r, self.profile) if r is not None else v.name
        b = self.broadcasts.get(v.name)
        if b is not None:
            suffix = broadcast_suffix(*b)
            if suffix:
                return f"({text}){suffix}"
        return text

    def _binary(self, lhs, op, rhs, prec, parent_prec, *, chain_ok):
        left = self.expr(lhs, prec - 1)
        # a right operand at equal precedence needs parens (these operators
        # are left-associative) unless the chain is semantically associative
        right = self.expr(rhs, prec - 1 if chain_ok else prec)
        text = f"{left}{op}{right}"
        if prec <= parent_prec:
            return f"({text})"
        return text

    def _select(self, e: Select, parent_prec: int) -> str:
        cond = self.cond(e.cond)
        style = self.profile.select_style
        if style == "where":
            then = self.expr(e.then, _SELECT)
            orelse = self.expr(e.orelse, _SELECT)
            return f"tl.where({cond}, {then}, {orelse})"
        then = self.expr(e.then, _SELECT)
        orelse = self.expr(e.orelse, _SELECT)
        if style == "c":
            text = f"{cond} ? {then} : {orelse}"
        else:
            text = f"{then} if {cond} else {orelse}"
        if parent_prec > _SELECT:
            return f"({text})"
        return text

    def cond(self, c: Cond) -> str:
        if isinstance(c, Cmp):
            lhs = self.expr(c.lhs, _ADD - 1)
            rhs = self.expr(c.rhs, _ADD - 1)
            return f"{lhs} {c.op} {rhs}"
        if isinstance(c, And):
            sides = []
            for side in (c.lhs, c.rhs):
                text = self.cond(side)
                if self.profile.paren_cmp_in_and and isinstance(side, Cmp):
                    text = f"({text})"
                sides.append(text)
            return f" {self.profile.and_op} ".join(sides)
        raise UnsupportedNode(f"cannot emit condition {type(c).__name__}")
