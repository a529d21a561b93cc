"""Range analysis and rewrite-based simplification of index expressions.

The side-conditions of the div/mod rewrite rules (non-negativity, upper
bounds, nonzero divisors) are discharged by interval arithmetic over the
variable ranges plus divisibility facts; no external solver is involved.
Rewriting is innermost-first, to fixpoint, with a budget on rule firings so
a simplify call always terminates.
"""

from __future__ import annotations

import math
from typing import Iterable, Mapping, Optional, Tuple

from .errors import DivisionByZero, UnboundVariable
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
    VarRange,
    expand,
    op_count,
)

DEFAULT_BUDGET = 10_000


class FactSet:
    """Variable ranges and divisibility facts ("var % k == 0", k >= 2).

    Instances are treated as immutable; the with_* helpers return new sets.
    """

    def __init__(self, ranges: Optional[Mapping[str, VarRange]] = None,
                 divisibility: Iterable[Tuple[str, int]] = ()):
        self.ranges = dict(ranges or {})
        self.divisibility = frozenset(divisibility)
        for _, k in self.divisibility:
            if k < 2:
                raise ValueError(f"divisibility modulus must be >= 2, got {k}")

    def with_range(self, name: str, rng: VarRange) -> "FactSet":
        ranges = dict(self.ranges)
        ranges[name] = rng
        return FactSet(ranges, self.divisibility)

    def with_divisibility(self, name: str, k: int) -> "FactSet":
        return FactSet(self.ranges, self.divisibility | {(name, k)})

    def merged(self, other: "FactSet") -> "FactSet":
        """Union of facts; overlapping ranges are intersected."""
        ranges = dict(self.ranges)
        for name, rng in other.ranges.items():
            ranges[name] = rng if name not in ranges else ranges[name].intersect(rng)
        return FactSet(ranges, self.divisibility | other.divisibility)

    def range_for(self, name: str) -> Optional[VarRange]:
        return self.ranges.get(name)

    def divisors_of(self, name: str):
        return {k for n, k in self.divisibility if n == name}

    def __repr__(self):
        parts = [f"{n} in {r}" for n, r in sorted(self.ranges.items())]
        parts += [f"{n} % {k} == 0" for n, k in sorted(self.divisibility)]
        return "FactSet(" + ", ".join(parts) + ")"


EMPTY_FACTS = FactSet()


# ---------------------------------------------------------------------------
# Interval analysis. Intervals are closed (lo, hi) pairs internally.
# ---------------------------------------------------------------------------

def range_of(e: Expr, facts: FactSet = EMPTY_FACTS) -> VarRange:
    """Sound over-approximation of e's value set as a half-open range."""
    lo, hi = _interval(e, facts, {})
    return VarRange(lo, hi + 1)


def _interval(e, facts, memo):
    got = memo.get(e)
    if got is not None:
        return got
    r = _interval_raw(e, facts, memo)
    memo[e] = r
    return r


def _interval_raw(e, facts, memo):
    if isinstance(e, IntConst):
        return (e.value, e.value)
    if isinstance(e, Var):
        rng = facts.range_for(e.name)
        if rng is not None and e.range is not None:
            rng = rng.intersect(e.range)
        elif rng is None:
            rng = e.range
        if rng is None:
            raise UnboundVariable(e.name)
        return (rng.lo, rng.max)
    if isinstance(e, Add):
        a = _interval(e.lhs, facts, memo)
        b = _interval(e.rhs, facts, memo)
        return (a[0] + b[0], a[1] + b[1])
    if isinstance(e, Sub):
        a = _interval(e.lhs, facts, memo)
        b = _interval(e.rhs, facts, memo)
        return (a[0] - b[1], a[1] - b[0])
    if isinstance(e, Mul):
        a = _interval(e.lhs, facts, memo)
        b = _interval(e.rhs, facts, memo)
        corners = [a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1]]
        return (min(corners), max(corners))
    if isinstance(e, FloorDiv):
        num = _interval(e.num, facts, memo)
        return _div_interval(num, _interval(e.den, facts, memo))
    if isinstance(e, Mod):
        num = _interval(e.num, facts, memo)
        return _mod_interval(num, _interval(e.den, facts, memo))
    if isinstance(e, Select):
        a = _interval(e.then, facts, memo)
        b = _interval(e.orelse, facts, memo)
        return (min(a[0], b[0]), max(a[1], b[1]))
    if isinstance(e, Call):
        a = _interval(e.args[0], facts, memo)
        return (math.isqrt(max(a[0], 0)), math.isqrt(max(a[1], 0)))
    raise TypeError(f"not an expression: {e!r}")


def _den_parts(den):
    """Split a divisor interval into sign-pure parts, excluding zero."""
    lo, hi = den
    if lo == 0 and hi == 0:
        raise DivisionByZero("divisor interval is exactly zero")
    parts = []
    if lo < 0:
        parts.append((lo, min(hi, -1)))
    if hi > 0:
        parts.append((max(lo, 1), hi))
    return parts


def _div_interval(num, den):
    candidates = []
    for dlo, dhi in _den_parts(den):
        for n in num:
            for d in (dlo, dhi):
                candidates.append(n // d)
    return (min(candidates), max(candidates))


def _mod_interval(num, den):
    nlo, nhi = num
    los, his = [], []
    for dlo, dhi in _den_parts(den):
        if dlo > 0:
            if nlo >= 0 and nhi < dlo:
                los.append(nlo)
                his.append(nhi)
            else:
                los.append(0)
                his.append(min(dhi - 1, nhi) if nlo >= 0 else dhi - 1)
        else:
            # Python's % with a negative divisor lands in (d, 0].
            los.append(dlo + 1)
            his.append(0)
    return (min(los), max(his))


# ---------------------------------------------------------------------------
# Side-condition provers.
# ---------------------------------------------------------------------------

def _try_interval(e, facts, memo):
    try:
        return _interval(e, facts, memo)
    except (UnboundVariable, DivisionByZero, ValueError):
        return None


class _Prover:
    def __init__(self, facts: FactSet):
        self.facts = facts
        self.memo = {}

    def interval(self, e):
        return _try_interval(e, self.facts, self.memo)

    def nonzero(self, e) -> bool:
        r = self.interval(e)
        return r is not None and (r[0] > 0 or r[1] < 0)

    def positive(self, e) -> bool:
        r = self.interval(e)
        return r is not None and r[0] > 0

    def nonneg(self, e) -> bool:
        r = self.interval(e)
        return r is not None and r[0] >= 0

    def less(self, a, b) -> bool:
        ra = self.interval(a)
        rb = self.interval(b)
        return ra is not None and rb is not None and ra[1] < rb[0]

    def decide(self, c: Cond) -> Optional[bool]:
        """True/False if the condition holds/fails on all consistent envs."""
        if isinstance(c, Cmp):
            ra = self.interval(c.lhs)
            rb = self.interval(c.rhs)
            if ra is None or rb is None:
                return None
            if c.op == "<":
                if ra[1] < rb[0]:
                    return True
                if ra[0] >= rb[1]:
                    return False
            elif c.op == "<=":
                if ra[1] <= rb[0]:
                    return True
                if ra[0] > rb[1]:
                    return False
            elif c.op == "==":
                if ra == rb and ra[0] == ra[1]:
                    return True
                if ra[1] < rb[0] or ra[0] > rb[1]:
                    return False
            elif c.op == ">=":
                if ra[0] >= rb[1]:
                    return True
                if ra[1] < rb[0]:
                    return False
            elif c.op == ">":
                if ra[0] > rb[1]:
                    return True
                if ra[1] <= rb[0]:
                    return False
            return None
        if isinstance(c, And):
            a = self.decide(c.lhs)
            b = self.decide(c.rhs)
            if a is False or b is False:
                return False
            if a is True and b is True:
                return True
            return None
        return None


# ---------------------------------------------------------------------------
# Sum flattening and divisor splitting, shared by the mod/div rules.
# ---------------------------------------------------------------------------

def _sum_terms(e):
    """Flatten nested Add/Sub into a list of (sign, term) with sign in {1,-1}."""
    out = []
    stack = [(1, e)]
    while stack:
        sign, node = stack.pop()
        if isinstance(node, Add):
            stack.append((sign, node.rhs))
            stack.append((sign, node.lhs))
        elif isinstance(node, Sub):
            stack.append((-sign, node.rhs))
            stack.append((sign, node.lhs))
        else:
            out.append((sign, node))
    return out


def _sum_of(terms) -> Expr:
    out = None
    for sign, term in terms:
        if out is None:
            out = term if sign > 0 else Sub(IntConst(0), term)
        elif sign > 0:
            out = Add(out, term)
        else:
            out = Sub(out, term)
    return out if out is not None else IntConst(0)


def _quotient_of_term(term: Expr, den: Expr, facts: FactSet) -> Optional[Expr]:
    """term divided by den if term is a provable exact multiple, else None."""
    dval = den.value if isinstance(den, IntConst) else None
    if isinstance(term, IntConst) and dval is not None and term.value % dval == 0:
        return IntConst(term.value // dval)
    if isinstance(term, Mul):
        for a, b in ((term.lhs, term.rhs), (term.rhs, term.lhs)):
            if a == den:
                return b
            if dval is not None and isinstance(a, IntConst) and a.value % dval == 0:
                q = a.value // dval
                return b if q == 1 else Mul(IntConst(q), b)
    if term == den:
        return IntConst(1)
    if isinstance(term, Var) and dval is not None:
        if any(k % dval == 0 for k in facts.divisors_of(term.name)):
            return FloorDiv(term, den)
    return None


def _split_by_divisor(e: Expr, den: Expr, facts: FactSet):
    """Partition the terms of e into (quotient terms, remainder terms).

    Returns None when no term is an exact multiple of den.
    """
    q_terms, r_terms = [], []
    for sign, term in _sum_terms(e):
        q = _quotient_of_term(term, den, facts)
        if q is None:
            r_terms.append((sign, term))
        else:
            q_terms.append((sign, q))
    if not q_terms:
        return None
    return q_terms, r_terms


# ---------------------------------------------------------------------------
# Rewrite rules. Each returns a replacement expression or None.
# The Table-of-rules ordering mirrors the seven div/mod rules; the rule_*
# functions are also exercised directly by the tests.
# ---------------------------------------------------------------------------

def rule_mod_of_multiple_sum(e: Expr, prover: _Prover) -> Optional[Expr]:
    """(d*q + r) % d  ->  r % d, requires d != 0."""
    if not isinstance(e, Mod):
        return None
    if not prover.nonzero(e.den):
        return None
    split = _split_by_divisor(e.num, e.den, prover.facts)
    if split is None:
        return None
    _, r_terms = split
    if not r_terms:
        return IntConst(0)
    return Mod(_sum_of(r_terms), e.den)


def rule_div_of_multiple_sum(e: Expr, prover: _Prover) -> Optional[Expr]:
    """(d*q + r) / d  ->  q when 0 <= r < d, else q + r / d; requires d != 0."""
    if not isinstance(e, FloorDiv):
        return None
    if not prover.nonzero(e.den):
        return None
    split = _split_by_divisor(e.num, e.den, prover.facts)
    if split is None:
        return None
    q_terms, r_terms = split
    q = _sum_of(q_terms)
    if not r_terms:
        return q
    r = _sum_of(r_terms)
    if prover.nonneg(r) and prover.less(r, e.den):
        return q
    return Add(q, FloorDiv(r, e.den))


def rule_div_of_mod(e: Expr, prover: _Prover) -> Optional[Expr]:
    """(x % d) / d  ->  0, requires d > 0."""
    if isinstance(e, FloorDiv) and isinstance(e.num, Mod) and e.num.den == e.den:
        if prover.positive(e.den):
            return IntConst(0)
    return None


def rule_div_below_bound(e: Expr, prover: _Prover) -> Optional[Expr]:
    """x / a  ->  0 when a > 0 and 0 <= x < a."""
    if not isinstance(e, FloorDiv):
        return None
    if prover.positive(e.den) and prover.nonneg(e.num) and prover.less(e.num, e.den):
        return IntConst(0)
    return None


def rule_mod_below_bound(e: Expr, prover: _Prover) -> Optional[Expr]:
    """x % a  ->  x when a > 0 and 0 <= x < a."""
    if not isinstance(e, Mod):
        return None
    if prover.positive(e.den) and prover.nonneg(e.num) and prover.less(e.num, e.den):
        return e.num
    return None


def rule_div_by_one_assoc(e: Expr, prover: _Prover) -> Optional[Expr]:
    """(n + y) / 1  ->  n + (y / 1); the x/1 fold then finishes the job."""
    if isinstance(e, FloorDiv) and isinstance(e.den, IntConst) and e.den.value == 1:
        if isinstance(e.num, Add):
            return Add(e.num.lhs, FloorDiv(e.num.rhs, e.den))
    return None


def rule_recompose(e: Expr, prover: _Prover) -> Optional[Expr]:
    """a*(x / a) + x % a  ->  x, requires a != 0; matched inside flat sums."""
    if not isinstance(e, (Add, Sub)):
        return None
    terms = _sum_terms(e)
    for i, (si, ti) in enumerate(terms):
        pair = _as_scaled_div(ti)
        if pair is None:
            continue
        a, x = pair
        if not prover.nonzero(a):
            continue
        for j, (sj, tj) in enumerate(terms):
            if j == i or sj != si:
                continue
            if isinstance(tj, Mod) and tj.num == x and tj.den == a:
                rest = [terms[k] for k in range(len(terms)) if k not in (i, j)]
                rest.append((si, x))
                return _sum_of(rest)
    return None


def _as_scaled_div(term):
    """Match a * (x / a) in either operand order."""
    if not isinstance(term, Mul):
        return None
    for a, b in ((term.lhs, term.rhs), (term.rhs, term.lhs)):
        if isinstance(b, FloorDiv) and b.den == a:
            return a, b.num
    return None


def rule_mod_by_divisibility(e: Expr, prover: _Prover) -> Optional[Expr]:
    """x % k  ->  0 when a divisibility fact guarantees k | x."""
    if not (isinstance(e, Mod) and isinstance(e.num, Var) and isinstance(e.den, IntConst)):
        return None
    dval = e.den.value
    if dval > 0 and any(k % dval == 0 for k in prover.facts.divisors_of(e.num.name)):
        return IntConst(0)
    return None


TABLE_RULES = (
    rule_mod_of_multiple_sum,
    rule_div_of_multiple_sum,
    rule_div_of_mod,
    rule_div_below_bound,
    rule_mod_below_bound,
    rule_div_by_one_assoc,
    rule_recompose,
)


def _fold_constants(e: Expr) -> Optional[Expr]:
    if isinstance(e, (Add, Sub, Mul)) and isinstance(e.lhs, IntConst) and isinstance(e.rhs, IntConst):
        a, b = e.lhs.value, e.rhs.value
        if isinstance(e, Add):
            return IntConst(a + b)
        if isinstance(e, Sub):
            return IntConst(a - b)
        return IntConst(a * b)
    if isinstance(e, (FloorDiv, Mod)) and isinstance(e.num, IntConst) and isinstance(e.den, IntConst):
        if e.den.value != 0:
            if isinstance(e, FloorDiv):
                return IntConst(e.num.value // e.den.value)
            return IntConst(e.num.value % e.den.value)
    if isinstance(e, Call) and isinstance(e.args[0], IntConst) and e.args[0].value >= 0:
        return IntConst(math.isqrt(e.args[0].value))
    return None


def _gather_sum_constants(e: Expr) -> Optional[Expr]:
    """Combine multiple constant terms of a flattened sum into one."""
    if not isinstance(e, (Add, Sub)):
        return None
    terms = _sum_terms(e)
    const_at = [k for k, (_, t) in enumerate(terms) if isinstance(t, IntConst)]
    if len(const_at) < 2:
        return None
    total = sum(sign * term.value for sign, term in
                (terms[k] for k in const_at))
    rest = []
    for k, (sign, term) in enumerate(terms):
        if isinstance(term, IntConst):
            if k == const_at[0] and total != 0:
                rest.append((1, IntConst(total)) if total > 0
                            else (-1, IntConst(-total)))
        else:
            rest.append((sign, term))
    if not rest:
        return IntConst(total)
    return _sum_of(rest)


def _fold_identities(e: Expr) -> Optional[Expr]:
    if isinstance(e, Add):
        if e.lhs == IntConst(0):
            return e.rhs
        if e.rhs == IntConst(0):
            return e.lhs
    elif isinstance(e, Sub):
        if e.rhs == IntConst(0):
            return e.lhs
        if e.lhs == e.rhs:
            return IntConst(0)
    elif isinstance(e, Mul):
        for a, b in ((e.lhs, e.rhs), (e.rhs, e.lhs)):
            if a == IntConst(0):
                return IntConst(0)
            if a == IntConst(1):
                return b
            # fold nested constant coefficients: c1*(c2*x) -> (c1*c2)*x
            if isinstance(a, IntConst) and isinstance(b, Mul):
                if isinstance(b.lhs, IntConst):
                    return Mul(IntConst(a.value * b.lhs.value), b.rhs)
                if isinstance(b.rhs, IntConst):
                    return Mul(IntConst(a.value * b.rhs.value), b.lhs)
    elif isinstance(e, FloorDiv):
        if isinstance(e.den, IntConst) and e.den.value == 1:
            return e.num
    elif isinstance(e, Mod):
        if isinstance(e.den, IntConst) and e.den.value == 1:
            return IntConst(0)
    return None


class _Simplifier:
    def __init__(self, facts: FactSet, budget: int):
        self.prover = _Prover(facts)
        self.left = budget

    def run(self, e: Expr) -> Expr:
        while True:
            nxt = self.rewrite(e)
            if nxt == e or self.left <= 0:
                return nxt
            e = nxt

    def rewrite(self, e: Expr) -> Expr:
        if isinstance(e, (IntConst, Var)):
            return e
        e = self._rebuild(e)
        while self.left > 0:
            out = self._apply_once(e)
            if out is None:
                return e
            self.left -= 1
            if isinstance(out, (IntConst, Var)):
                return out
            e = out
        return e

    def _rebuild(self, e: Expr) -> Expr:
        if isinstance(e, (Add, Sub, Mul)):
            lhs = self.rewrite(e.lhs)
            rhs = self.rewrite(e.rhs)
            if lhs is not e.lhs or rhs is not e.rhs:
                return type(e)(lhs, rhs)
            return e
        if isinstance(e, (FloorDiv, Mod)):
            num = self.rewrite(e.num)
            den = self.rewrite(e.den)
            if num is not e.num or den is not e.den:
                return type(e)(num, den)
            return e
        if isinstance(e, Select):
            cond = self._rewrite_cond(e.cond)
            then = self.rewrite(e.then)
            orelse = self.rewrite(e.orelse)
            if cond is not e.cond or then is not e.then or orelse is not e.orelse:
                return Select(cond, then, orelse)
            return e
        if isinstance(e, Call):
            args = tuple(self.rewrite(a) for a in e.args)
            if any(a is not b for a, b in zip(args, e.args)):
                return Call(e.intrinsic, args)
            return e
        return e

    def _rewrite_cond(self, c: Cond) -> Cond:
        if isinstance(c, Cmp):
            lhs = self.rewrite(c.lhs)
            rhs = self.rewrite(c.rhs)
            if lhs is not c.lhs or rhs is not c.rhs:
                return Cmp(c.op, lhs, rhs)
            return c
        lhs = self._rewrite_cond(c.lhs)
        rhs = self._rewrite_cond(c.rhs)
        # drop conjuncts the ranges already decide
        for side, other in ((lhs, rhs), (rhs, lhs)):
            if self.prover.decide(side) is True:
                return other
        if lhs is not c.lhs or rhs is not c.rhs:
            return And(lhs, rhs)
        return c

    def _apply_once(self, e: Expr) -> Optional[Expr]:
        out = _fold_constants(e)
        if out is not None:
            return out
        out = _fold_identities(e)
        if out is not None:
            return out
        out = _gather_sum_constants(e)
        if out is not None:
            return out
        if isinstance(e, Select):
            decided = self.prover.decide(e.cond)
            if decided is True:
                return e.then
            if decided is False:
                return e.orelse
            return None
        for rule in TABLE_RULES:
            out = rule(e, self.prover)
            if out is not None:
                return out
        return rule_mod_by_divisibility(e, self.prover)


def simplify(e: Expr, facts: FactSet = EMPTY_FACTS, *, budget: int = DEFAULT_BUDGET) -> Expr:
    """Rewrite e into a semantically equal, usually smaller expression.

    Sound for every environment consistent with facts; never raises, worst
    case returns the input unchanged.
    """
    return _Simplifier(facts, budget).run(e)


def best_variant(e: Expr, facts: FactSet = EMPTY_FACTS, *, budget: int = DEFAULT_BUDGET) -> Expr:
    """The cheaper of simplify(e) and simplify(expand(e)) by op count.

    Ties go to the unexpanded variant, so the result is deterministic.
    """
    plain = simplify(e, facts, budget=budget)
    expanded = simplify(expand(e), facts, budget=budget)
    if op_count(expanded) < op_count(plain):
        return expanded
    return plain
