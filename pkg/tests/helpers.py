"""Shared oracles and generators for the test suite.

Everything here is deliberately independent of the library's own composition
machinery: reference computations re-derive expected values from first
principles (brute force, direct pseudocode transcription) so the tests check
the implementation against something it does not share code with.
"""

from __future__ import annotations

import math
import random
from itertools import product

from lego.expr import (
    Add,
    FloorDiv,
    IntConst,
    Mod,
    Mul,
    Select,
    Sub,
    Var,
    VarRange,
    eval_expr,
    lt,
)
from lego.simplify import FactSet


def ref_flatten(shape, idx):
    """Row-major flatten, written independently (Horner form)."""
    acc = 0
    for c, n in zip(idx, shape):
        acc = acc * n + c
    return acc


def ref_unflatten(shape, flat):
    coords = []
    for n in reversed(shape):
        coords.append(flat % n)
        flat //= n
    return tuple(reversed(coords))


def env_space(ranges):
    """All environments over {name: VarRange}; deterministic order."""
    names = sorted(ranges)
    for values in product(*(range(ranges[n].lo, ranges[n].hi) for n in names)):
        yield dict(zip(names, values))


def assert_same_value(e1, e2, ranges, limit=100_000):
    """Exhaustively check two expressions agree on every environment."""
    count = math.prod(r.hi - r.lo for r in ranges.values()) if ranges else 1
    assert count <= limit, f"environment space of {count} too large for exhaustion"
    for env in env_space(ranges):
        assert eval_expr(e1, env) == eval_expr(e2, env), f"disagree at {env}"


def random_expr(rng: random.Random, variables, depth=3):
    """Random expression over ranged variables; denominators kept nonzero."""
    if depth == 0 or rng.random() < 0.3:
        if variables and rng.random() < 0.7:
            return rng.choice(variables)
        return IntConst(rng.randint(0, 9))
    kind = rng.choice(["add", "add", "sub", "mul", "div", "mod", "select"])
    a = random_expr(rng, variables, depth - 1)
    if kind == "add":
        return Add(a, random_expr(rng, variables, depth - 1))
    if kind == "sub":
        return Sub(a, random_expr(rng, variables, depth - 1))
    if kind == "mul":
        return Mul(a, random_expr(rng, variables, depth - 1))
    if kind in ("div", "mod"):
        den = IntConst(rng.randint(1, 8))
        return FloorDiv(a, den) if kind == "div" else Mod(a, den)
    b = random_expr(rng, variables, depth - 1)
    cond = lt(random_expr(rng, variables, depth - 1),
              random_expr(rng, variables, depth - 1))
    return Select(cond, a, b)


def ranged_vars(rng: random.Random, max_vars=3, max_extent=12):
    out = []
    for k in range(rng.randint(1, max_vars)):
        lo = 0
        hi = rng.randint(2, max_extent)
        out.append(Var(f"v{k}", VarRange(lo, hi)))
    return out


def facts_of(variables) -> FactSet:
    return FactSet({v.name: v.range for v in variables})


# ---------------------------------------------------------------------------
# Reference transcription of the antidiagonal walk and its inverse.
# ---------------------------------------------------------------------------

def ref_antidiag(n, i, j):
    antidg = i + j + 1
    if antidg <= n:
        return i + (antidg * (antidg - 1)) // 2
    antidg = 2 * n - antidg
    gauss = (antidg * (antidg - 1)) // 2
    return n * n - n + i - gauss


def ref_antidiag_inv(n, x0):
    s = n * (n + 1) // 2
    x = x0 if x0 < s else n * n - 1 - x0
    antidg = math.isqrt(2 * x)
    antidg += int(x >= (antidg * (antidg + 1)) // 2)
    i = x - antidg * (antidg - 1) // 2
    j = antidg - i - 1
    return (i, j) if x0 < s else (n - 1 - i, n - 1 - j)


# ---------------------------------------------------------------------------
# Random layout corpus used by the bijectivity and coherence suites.
# ---------------------------------------------------------------------------

def _partition(rng, items, max_parts):
    """Split a list into 1..max_parts nonempty contiguous chunks."""
    parts = rng.randint(1, min(max_parts, len(items)))
    if parts == 1:
        return [list(items)]
    cuts = sorted(rng.sample(range(1, len(items)), parts - 1))
    out = []
    prev = 0
    for cut in cuts + [len(items)]:
        out.append(list(items[prev:cut]))
        prev = cut
    return out


def _group_dims(rng, primes, max_dims):
    """Regroup a prime multiset into 1..max_dims extents (product preserved)."""
    primes = list(primes)
    rng.shuffle(primes)
    chunks = _partition(rng, primes, max_dims)
    return [math.prod(c) for c in chunks]


def random_layout(rng: random.Random, max_elems=40_000):
    from lego.layout import GroupBy, OrderBy, RegP, antidiag_perm, identity_perm, reverse_perm

    while True:
        primes = [rng.choice([2, 2, 2, 3, 3, 5, 7]) for _ in range(rng.randint(3, 8))]
        if math.prod(primes) <= max_elems:
            break
    logical = _group_dims(rng, primes, 4)
    tiles = _partition(rng, logical, 2)
    orders = []
    for _ in range(rng.randint(1, 3)):
        stage_dims = _group_dims(rng, primes, 5)
        perms = []
        for shape in _partition(rng, stage_dims, 2):
            shape = tuple(shape)
            choice = rng.random()
            if choice < 0.5:
                sigma = list(range(1, len(shape) + 1))
                rng.shuffle(sigma)
                perms.append(RegP(shape, tuple(sigma)))
            elif choice < 0.75:
                perms.append(reverse_perm(shape))
            elif len(shape) == 2 and shape[0] == shape[1]:
                perms.append(antidiag_perm(shape[0]))
            else:
                perms.append(identity_perm(shape))
        orders.append(OrderBy(*perms))
    return GroupBy(*tiles, orders=tuple(orders))


def layout_corpus(seed=20240901, count=30, max_elems=40_000):
    """count random layouts plus a few curated chains for guaranteed mix."""
    from lego.layout import GroupBy, RegP, antidiag_perm, reverse_perm

    rng = random.Random(seed)
    curated = [
        GroupBy([6, 4]).order_by(RegP((2, 2), (2, 1)), reverse_perm((3, 2))),
        GroupBy([6, 6]).order_by(RegP((2, 3, 2, 3), (1, 3, 2, 4)))
                       .order_by(RegP((2, 2), (2, 1)), antidiag_perm(3)),
        GroupBy([8, 8]).order_by(antidiag_perm(8))
                       .order_by(RegP((4, 4, 4), (3, 1, 2)))
                       .order_by(RegP((8, 8), (2, 1)), ),
    ]
    return [random_layout(rng, max_elems) for _ in range(count)] + curated
