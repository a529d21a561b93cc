"""Layout algebra: hierarchical tilings composed with reordering stages.

A GroupBy declares the logical multi-dimensional view of a flat buffer; a
chain of OrderBy stages reorders its elements, each stage built from regular
(dimension-permuting) or general (user-defined bijection) permutations. The
canonical row-major bijections glue the stages together. Every node derives
an `apply` (logical index -> flat physical position) and its inverse `inv`.

All nodes are immutable; `apply`/`inv` accept either concrete integers or
symbolic expressions and are pure, so layouts can be shared freely.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product as iter_product
from typing import Callable, Optional, Sequence, Tuple, Union

from .errors import (
    ArityMismatch,
    LegoError,
    OutOfBounds,
    ShapeMismatch,
    UnknownBuiltinPerm,
)
from .expr import (
    Expr,
    IntConst,
    Select,
    Var,
    VarRange,
    and_all,
    as_expr,
    eval_expr,
    isqrt,
    lt,
    le,
    ge,
)
from .simplify import EMPTY_FACTS, FactSet, best_variant

Shape = Tuple[int, ...]
Coord = Union[int, Expr]
Index = Sequence[Coord]

DEFAULT_VALIDATION_BOUND = 4096


def _as_shape(extents) -> Shape:
    shape = tuple(extents)
    if not shape:
        raise ShapeMismatch("shape must have at least one dimension")
    for n in shape:
        if not isinstance(n, int) or isinstance(n, bool) or n < 1:
            raise ShapeMismatch(f"extents must be positive integers, got {n!r}")
    return shape


def _as_sigma(perm, d: int) -> Tuple[int, ...]:
    sigma = tuple(perm)
    if sorted(sigma) != list(range(1, d + 1)):
        raise ShapeMismatch(f"{list(sigma)} is not a permutation of [1..{d}]")
    return sigma


def sigma_inverse(sigma: Sequence[int]) -> Tuple[int, ...]:
    """Inverse permutation: scatter [1..d] at the positions named by sigma."""
    sigma = _as_sigma(sigma, len(sigma))
    inv = [0] * len(sigma)
    for k, s in enumerate(sigma, start=1):
        inv[s - 1] = k
    return tuple(inv)


def _gather(sigma: Sequence[int], xs: Sequence):
    """sigma applied to a sequence: result[k] = xs[sigma[k] - 1]."""
    return tuple(xs[s - 1] for s in sigma)


def _is_symbolic(idx: Index) -> bool:
    return any(isinstance(c, Expr) for c in idx)


def _check_coords(shape: Shape, idx: Index):
    if len(idx) != len(shape):
        raise ArityMismatch(f"index has {len(idx)} coordinates, shape has {len(shape)}")
    for c, n in zip(idx, shape):
        if isinstance(c, int) and not 0 <= c < n:
            raise OutOfBounds(f"coordinate {c} outside [0, {n})")


def canon_flatten(shape, idx: Index, *, check: bool = True) -> Coord:
    """Row-major flatten: i1*(n2*...*nd) + ... + i_{d-1}*n_d + i_d."""
    shape = _as_shape(shape)
    if check:
        _check_coords(shape, idx)
    elif len(idx) != len(shape):
        raise ArityMismatch(f"index has {len(idx)} coordinates, shape has {len(shape)}")
    out = None
    stride = math.prod(shape)
    for c, n in zip(idx, shape):
        stride //= n
        term = c if stride == 1 else c * stride
        out = term if out is None else out + term
    return out


def canon_unflatten(shape, flat: Coord) -> Tuple[Coord, ...]:
    """Row-major unflatten; the first coordinate carries no modulo."""
    shape = _as_shape(shape)
    if isinstance(flat, int):
        if not 0 <= flat < math.prod(shape):
            raise OutOfBounds(f"flat index {flat} outside [0, {math.prod(shape)})")
    if len(shape) == 1:
        return (flat,)
    coords = []
    rem = flat
    for n in reversed(shape[1:]):
        coords.append(rem % n)
        rem = rem // n
    coords.append(rem)
    return tuple(reversed(coords))


@dataclass(frozen=True)
class RegP:
    """Regular permutation: reorder the dimensions of a tile by sigma."""

    shape: Shape
    sigma: Tuple[int, ...]

    def __post_init__(self):
        shape = _as_shape(self.shape)
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "sigma", _as_sigma(self.sigma, len(shape)))

    @property
    def dims(self) -> Shape:
        return self.shape

    def apply(self, idx: Index) -> Coord:
        _check_coords(self.shape, idx)
        return canon_flatten(_gather(self.sigma, self.shape),
                             _gather(self.sigma, idx), check=False)

    def inv(self, flat: Coord) -> Tuple[Coord, ...]:
        coords = canon_unflatten(_gather(self.sigma, self.shape), flat)
        return _gather(sigma_inverse(self.sigma), coords)


@dataclass(frozen=True)
class PermFn:
    """Concrete callable plus a symbolic builder producing the same function.

    Both must be pure; they are checked to agree pointwise by validate().
    """

    concrete: Callable
    symbolic: Callable


@dataclass(frozen=True)
class GenP:
    """General permutation of a tile's elements by a user-defined bijection.

    fwd maps a multi-index to a flat position, inv the reverse. inv may be
    None for injective-only layouts, which disables the inverse direction.
    """

    shape: Shape
    fwd: PermFn
    inv_fn: Optional[PermFn] = None
    name: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, "shape", _as_shape(self.shape))

    @property
    def dims(self) -> Shape:
        return self.shape

    @property
    def size(self) -> int:
        return math.prod(self.shape)

    def apply(self, idx: Index) -> Coord:
        _check_coords(self.shape, idx)
        if _is_symbolic(idx):
            return self.fwd.symbolic(tuple(as_expr(c) for c in idx))
        return self.fwd.concrete(tuple(idx))

    def inv(self, flat: Coord) -> Tuple[Coord, ...]:
        if self.inv_fn is None:
            raise LegoError(f"permutation {self.name or ''} has no inverse")
        if isinstance(flat, Expr):
            return tuple(self.inv_fn.symbolic(flat))
        if not 0 <= flat < self.size:
            raise OutOfBounds(f"flat index {flat} outside [0, {self.size})")
        return tuple(self.inv_fn.concrete(flat))


Perm = Union[RegP, GenP]


@dataclass(frozen=True)
class OrderBy:
    """One reordering stage: a sequence of per-tile permutations.

    apply flattens outermost-in, accumulating each permutation's flat
    sub-position; inv peels sub-positions off innermost-out.
    """

    perms: Tuple[Perm, ...]

    def __init__(self, *perms):
        if len(perms) == 1 and isinstance(perms[0], (tuple, list)):
            perms = tuple(perms[0])
        if not perms:
            raise ShapeMismatch("OrderBy needs at least one permutation")
        for p in perms:
            if not isinstance(p, (RegP, GenP)):
                raise TypeError(f"not a permutation: {p!r}")
        object.__setattr__(self, "perms", tuple(perms))

    @property
    def dims(self) -> Shape:
        out = ()
        for p in self.perms:
            out += p.dims
        return out

    @property
    def size(self) -> int:
        return math.prod(self.dims)

    def apply(self, idx: Index) -> Coord:
        if len(idx) != len(self.dims):
            raise ArityMismatch(f"index has {len(idx)} coordinates, stage has {len(self.dims)}")
        acc = None
        pos = 0
        for p in self.perms:
            d = len(p.dims)
            cur = p.apply(tuple(idx[pos:pos + d]))
            pos += d
            acc = cur if acc is None else acc * math.prod(p.dims) + cur
        return acc

    def inv(self, flat: Coord) -> Tuple[Coord, ...]:
        if isinstance(flat, int) and not 0 <= flat < self.size:
            raise OutOfBounds(f"flat index {flat} outside [0, {self.size})")
        coords: Tuple[Coord, ...] = ()
        for p in reversed(self.perms):
            size = math.prod(p.dims)
            cur = flat % size
            flat = flat // size
            coords = p.inv(cur) + coords
        return coords


@dataclass(frozen=True)
class GroupBy:
    """Logical view (a hierarchy of tiles) plus a chain of reorder stages.

    The chain is stored in application order: apply runs the stages front to
    back, inv back to front. With an empty chain the layout is the canonical
    row-major one.
    """

    tiles: Tuple[Shape, ...]
    orders: Tuple[OrderBy, ...] = ()
    injective: bool = False

    def __init__(self, *tiles, orders=(), injective=False):
        if len(tiles) == 1 and tiles[0] and isinstance(tiles[0][0], (tuple, list)):
            tiles = tuple(tiles[0])
        if not tiles:
            raise ShapeMismatch("GroupBy needs at least one tile shape")
        object.__setattr__(self, "tiles", tuple(_as_shape(t) for t in tiles))
        object.__setattr__(self, "orders", tuple(orders))
        object.__setattr__(self, "injective", bool(injective))

    @property
    def dims(self) -> Shape:
        out = ()
        for t in self.tiles:
            out += t
        return out

    @property
    def size(self) -> int:
        return math.prod(self.dims)

    def order_by(self, *perms) -> "GroupBy":
        """Append a reordering stage; returns a new layout."""
        return GroupBy(*self.tiles, orders=self.orders + (OrderBy(*perms),),
                       injective=self.injective)

    def _check(self):
        for k, o in enumerate(self.orders):
            if o.size != self.size:
                raise ShapeMismatch(
                    f"stage {k + 1} covers {o.size} elements, logical space has {self.size}")
        if self.injective:
            ok = (len(self.orders) == 1 and len(self.orders[0].perms) == 1
                  and isinstance(self.orders[0].perms[0], GenP)
                  and self.orders[0].dims == self.dims)
            if not ok:
                raise ShapeMismatch(
                    "injective mode requires exactly one OrderBy holding a single "
                    "GenP over the logical shape")

    def apply(self, idx: Index) -> Coord:
        self._check()
        flat = canon_flatten(self.dims, idx)
        for o in self.orders:
            flat = o.apply(canon_unflatten(o.dims, flat))
        return flat

    def inv(self, flat: Coord) -> Tuple[Coord, ...]:
        if self.injective:
            raise LegoError("injective layout exports apply only, not inv")
        self._check()
        if isinstance(flat, int) and not 0 <= flat < self.size:
            raise OutOfBounds(f"flat index {flat} outside [0, {self.size})")
        for o in reversed(self.orders):
            flat = canon_flatten(o.dims, o.inv(flat), check=False)
        return canon_unflatten(self.dims, flat)

    def apply_symbolic(self, idx: Index, facts: FactSet = EMPTY_FACTS) -> Expr:
        return apply_symbolic(self, idx, facts)

    def inv_symbolic(self, flat, facts: FactSet = EMPTY_FACTS) -> Tuple[Expr, ...]:
        return inv_symbolic(self, flat, facts)


@dataclass(frozen=True)
class ExpandBy:
    """Partial-tile wrapper: run a layout in a padded space, mask the rest.

    The inner layout G covers the expanded space. apply projects through G,
    rejects positions whose expanded coordinates fall outside the physical
    extents (None concretely, a -1 Select branch symbolically), and flattens
    accepted ones in the physical space. inv lifts a physical position into
    the expanded space and inverts through G.
    """

    physical: Shape
    expanded: Shape
    inner: GroupBy

    def __post_init__(self):
        phys = _as_shape(self.physical)
        expd = _as_shape(self.expanded)
        object.__setattr__(self, "physical", phys)
        object.__setattr__(self, "expanded", expd)
        if len(phys) != len(expd):
            raise ArityMismatch(
                f"physical is {len(phys)}-d but expanded is {len(expd)}-d")
        for n, m in zip(phys, expd):
            if m < n:
                raise ShapeMismatch(f"expanded extent {m} below physical extent {n}")
        if not isinstance(self.inner, GroupBy):
            raise TypeError("ExpandBy wraps a GroupBy layout")
        if self.inner.injective:
            raise LegoError("ExpandBy over an injective-mode layout is not supported")

    @property
    def dims(self) -> Shape:
        return self.inner.dims

    @property
    def size(self) -> int:
        """Number of addressable physical positions."""
        return math.prod(self.physical)

    def _check(self):
        if self.inner.size != math.prod(self.expanded):
            raise ShapeMismatch(
                f"inner layout has {self.inner.size} elements, expanded space "
                f"has {math.prod(self.expanded)}")

    def apply(self, idx: Index):
        self._check()
        flat = self.inner.apply(idx)
        coords = canon_unflatten(self.expanded, flat)
        pos = canon_flatten(self.physical, coords, check=False)
        if isinstance(flat, int):
            if all(c < n for c, n in zip(coords, self.physical)):
                return pos
            return None
        mask = and_all(lt(c, n) for c, n in zip(coords, self.physical))
        return Select(mask, pos, IntConst(-1))

    def inv(self, flat: Coord) -> Tuple[Coord, ...]:
        self._check()
        if isinstance(flat, int) and not 0 <= flat < self.size:
            raise OutOfBounds(f"flat index {flat} outside [0, {self.size})")
        coords = canon_unflatten(self.physical, flat)
        return self.inner.inv(canon_flatten(self.expanded, coords, check=False))

    def apply_symbolic(self, idx: Index, facts: FactSet = EMPTY_FACTS) -> Expr:
        return apply_symbolic(self, idx, facts)

    def inv_symbolic(self, flat, facts: FactSet = EMPTY_FACTS) -> Tuple[Expr, ...]:
        return inv_symbolic(self, flat, facts)


Layout = Union[GroupBy, ExpandBy]


# ---------------------------------------------------------------------------
# Symbolic entry points.
# ---------------------------------------------------------------------------

def index_vars(names: Sequence[str], shape) -> Tuple[Var, ...]:
    """Variables ranging over the given extents, one per dimension."""
    shape = _as_shape(shape)
    if len(names) != len(shape):
        raise ArityMismatch(f"{len(names)} names for {len(shape)} dimensions")
    return tuple(Var(n, VarRange(0, e)) for n, e in zip(names, shape))


def apply_symbolic(layout: Layout, idx: Index, facts: FactSet = EMPTY_FACTS) -> Expr:
    """apply as a simplified expression over the coordinate expressions.

    Each coordinate should carry a range within its dimension extent; those
    ranges (plus any extra facts) drive the simplification.
    """
    coords = tuple(as_expr(c) for c in idx)
    return best_variant(as_expr(layout.apply(coords)), facts)


def inv_symbolic(layout: Layout, flat, facts: FactSet = EMPTY_FACTS) -> Tuple[Expr, ...]:
    """inv as a tuple of simplified coordinate expressions."""
    coords = layout.inv(as_expr(flat))
    return tuple(best_variant(as_expr(c), facts) for c in coords)


# ---------------------------------------------------------------------------
# Syntactic sugar.
# ---------------------------------------------------------------------------

def row(*extents) -> RegP:
    """Row-major layout of a tile: the identity dimension permutation."""
    shape = _unpack_extents(extents)
    return RegP(shape, tuple(range(1, len(shape) + 1)))


def col(*extents) -> RegP:
    """Column-major layout: reversed dimensions permuted by [d, ..., 1].

    The argument lists extents in memory-nesting order (slowest first), same
    as row; the tile's own index space is the reversed shape.
    """
    shape = _unpack_extents(extents)
    d = len(shape)
    return RegP(tuple(reversed(shape)), tuple(range(d, 0, -1)))


def _unpack_extents(extents):
    if len(extents) == 1 and isinstance(extents[0], (tuple, list)):
        extents = extents[0]
    return _as_shape(extents)


def sigma_tile(d: int, q: int) -> Tuple[int, ...]:
    """Dimension-major interleaving permutation for a q-level, d-dim tiling.

    Flattens the d-by-q matrix A with A[k][h] = k + 1 + d*h.
    """
    return tuple(k + 1 + d * h for k in range(d) for h in range(q))


def tile_by(*tiles) -> GroupBy:
    """Hierarchical tiling of d dimensions on q levels.

    The logical view is the level-major tile hierarchy; physically the dims
    are regrouped per dimension, which leaves the underlying buffer in plain
    row-major order of the untiled space.
    """
    if len(tiles) == 1 and tiles[0] and isinstance(tiles[0][0], (tuple, list)):
        tiles = tuple(tiles[0])
    shapes = [_as_shape(t) for t in tiles]
    d = len(shapes[0])
    for s in shapes[1:]:
        if len(s) != d:
            raise ArityMismatch("tiles of a TileBy must share dimensionality")
    concat = ()
    for s in shapes:
        concat += s
    return GroupBy(*shapes, orders=(OrderBy(RegP(concat, sigma_tile(d, len(shapes)))),))


def tile_order_by(*perms) -> GroupBy:
    """Hierarchical tiling where each level's tile is reordered by a RegP.

    Per-level permutations run first, then the dimension-major regrouping of
    the permuted dims. With all-Row levels this equals tile_by; with a single
    level it degenerates to that level's permutation.
    """
    if len(perms) == 1 and isinstance(perms[0], (tuple, list)):
        perms = tuple(perms[0])
    if not perms:
        raise ShapeMismatch("TileOrderBy needs at least one permutation")
    for p in perms:
        if not isinstance(p, RegP):
            raise TypeError("TileOrderBy levels must be regular permutations")
    d = len(perms[0].dims)
    for p in perms[1:]:
        if len(p.dims) != d:
            raise ArityMismatch("tiles of a TileOrderBy must share dimensionality")
    permuted = ()
    for p in perms:
        permuted += _gather(p.sigma, p.shape)
    regroup = OrderBy(RegP(permuted, sigma_tile(d, len(perms))))
    return GroupBy(*(p.dims for p in perms), orders=(OrderBy(*perms), regroup))


# ---------------------------------------------------------------------------
# Built-in general permutations.
# ---------------------------------------------------------------------------

def identity_perm(shape) -> GenP:
    shape = _as_shape(shape)

    def fwd(idx):
        return canon_flatten(shape, idx, check=False)

    def inv(flat):
        return canon_unflatten(shape, flat)

    return GenP(shape, PermFn(fwd, fwd), PermFn(inv, inv), name="identity")


def reverse_perm(shape) -> GenP:
    """Reverse the elements along every dimension."""
    shape = _as_shape(shape)

    def fwd(idx):
        return canon_flatten(shape, tuple((n - 1) - c for c, n in zip(idx, shape)),
                             check=False)

    def inv(flat):
        coords = canon_unflatten(shape, flat)
        return tuple((n - 1) - c for c, n in zip(coords, shape))

    return GenP(shape, PermFn(fwd, fwd), PermFn(inv, inv), name="rev")


def antidiag_perm(n: int) -> GenP:
    """Lay out an n-by-n tile antidiagonal by antidiagonal.

    The element at (i, j) sits on antidiagonal i+j; elements of one
    antidiagonal receive consecutive flat positions. Walking up from the
    main antidiagonal mirrors the triangular numbering, which the inverse
    recovers with an integer square root.
    """
    if n < 1:
        raise ShapeMismatch("antidiag needs n >= 1")
    nn = n * n
    half = n * (n + 1) // 2

    def fwd(idx):
        i, j = idx
        t = i + j + 1
        if t <= n:
            return i + t * (t - 1) // 2
        t = 2 * n - t
        return nn - n + i - t * (t - 1) // 2

    def fwd_sym(idx):
        i, j = idx
        t = i + j + 1
        low = i + (t * (t - 1)) // 2
        t2 = 2 * n - t
        high = (nn - n) + i - (t2 * (t2 - 1)) // 2
        return Select(le(t, n), low, high)

    def inv(flat):
        x = flat if flat < half else nn - 1 - flat
        t = math.isqrt(2 * x)
        if x >= t * (t + 1) // 2:
            t += 1
        i = x - t * (t - 1) // 2
        j = t - i - 1
        if flat < half:
            return (i, j)
        return (n - 1 - i, n - 1 - j)

    def inv_sym(flat):
        in_low = lt(flat, half)
        x = Select(in_low, flat, (nn - 1) - flat)
        t0 = isqrt(2 * x)
        t = Select(ge(x, (t0 * (t0 + 1)) // 2), t0 + 1, t0)
        i = x - (t * (t - 1)) // 2
        j = t - i - 1
        return (Select(in_low, i, (n - 1) - i),
                Select(in_low, j, (n - 1) - j))

    return GenP((n, n), PermFn(fwd, fwd_sym), PermFn(inv, inv_sym), name="antidiag")


def _builtin_identity(shape):
    return identity_perm(shape)


def _builtin_rev1d(shape):
    if len(shape) != 1:
        raise ShapeMismatch("rev1d expects a 1-d shape")
    return reverse_perm(shape)


def _builtin_rev2d(shape):
    if len(shape) != 2:
        raise ShapeMismatch("rev2d expects a 2-d shape")
    return reverse_perm(shape)


def _builtin_antidiag(shape):
    if len(shape) != 2 or shape[0] != shape[1]:
        raise ShapeMismatch("antidiag expects a square 2-d shape")
    return antidiag_perm(shape[0])


_BUILTIN_PERMS = {
    "identity": _builtin_identity,
    "rev1d": _builtin_rev1d,
    "rev2d": _builtin_rev2d,
    "antidiag": _builtin_antidiag,
}


def resolve_builtin_perm(name: str, shape) -> GenP:
    factory = _BUILTIN_PERMS.get(name)
    if factory is None:
        known = ", ".join(sorted(_BUILTIN_PERMS))
        raise UnknownBuiltinPerm(f"unknown builtin permutation {name!r} (known: {known})")
    return factory(_as_shape(shape))


def register_builtin_perm(name: str, factory: Callable[[Shape], GenP]):
    """Make a permutation constructible by name from the layout DSL."""
    _BUILTIN_PERMS[name] = factory


# ---------------------------------------------------------------------------
# Validation.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str = ""

    def __str__(self):
        status = "pass" if self.passed else "FAIL"
        return f"{status}  {self.name}" + (f": {self.detail}" if self.detail else "")


@dataclass(frozen=True)
class LayoutReport:
    checks: Tuple[CheckResult, ...]

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failures(self):
        return [c for c in self.checks if not c.passed]

    def __str__(self):
        return "\n".join(str(c) for c in self.checks)


def validate(layout: Layout, bound: int = DEFAULT_VALIDATION_BOUND) -> LayoutReport:
    """Check element counts and (exhaustively, up to bound) GenP bijectivity.

    Never raises; every failure is reported as a failed check.
    """
    checks = []
    if isinstance(layout, ExpandBy):
        expanded = math.prod(layout.expanded)
        checks.append(CheckResult(
            "expanded-count", layout.inner.size == expanded,
            f"inner covers {layout.inner.size} elements, expanded space has {expanded}"
            if layout.inner.size != expanded else f"{expanded} elements"))
        group = layout.inner
    else:
        group = layout
    for k, o in enumerate(group.orders, start=1):
        ok = o.size == group.size
        checks.append(CheckResult(
            f"element-count[{k}]", ok,
            f"{o.size} elements" if ok else
            f"ShapeMismatch: stage covers {o.size} elements, logical space has {group.size}"))
    if group.injective:
        structural = (len(group.orders) == 1 and len(group.orders[0].perms) == 1
                      and isinstance(group.orders[0].perms[0], GenP)
                      and group.orders[0].dims == group.dims)
        checks.append(CheckResult(
            "injective-structure", structural,
            "" if structural else "requires one same-shape OrderBy with a single GenP"))
    for o in group.orders:
        for p in o.perms:
            if isinstance(p, GenP):
                checks.append(_check_genp(p, bound, injective=group.injective))
    return LayoutReport(tuple(checks))


def _check_genp(p: GenP, bound: int, *, injective: bool) -> CheckResult:
    label = f"genp-{p.name or 'custom'}{list(p.shape)}"
    if p.inv_fn is None and not injective:
        return CheckResult(label, False,
                           "no inverse supplied; only injective-mode layouts may omit it")
    if p.size > bound:
        return CheckResult(label, True, f"trusted, {p.size} elements exceeds bound {bound}")
    sym_vars = tuple(Var(f"i{k}", VarRange(0, n)) for k, n in enumerate(p.shape))
    try:
        fwd_expr = p.fwd.symbolic(sym_vars)
        inv_exprs = None
        if p.inv_fn is not None and not injective:
            inv_exprs = p.inv_fn.symbolic(Var("f", VarRange(0, p.size)))
    except Exception as exc:  # noqa: BLE001 - user-supplied builders
        return CheckResult(label, False, f"symbolic builder failed: {exc}")
    seen = {}
    for idx in iter_product(*(range(n) for n in p.shape)):
        flat = p.fwd.concrete(idx)
        if not isinstance(flat, int):
            return CheckResult(label, False, f"fwd{idx} returned non-integer {flat!r}")
        if not injective and not 0 <= flat < p.size:
            return CheckResult(
                label, False,
                f"BijectivityViolation: fwd{idx} = {flat} outside [0, {p.size})")
        if flat in seen:
            return CheckResult(
                label, False,
                f"BijectivityViolation: fwd{seen[flat]} = fwd{idx} = {flat}")
        seen[flat] = idx
        env = {v.name: c for v, c in zip(sym_vars, idx)}
        if eval_expr(fwd_expr, env) != flat:
            return CheckResult(
                label, False, f"symbolic fwd disagrees with concrete at {idx}")
        if p.inv_fn is not None and not injective:
            back = tuple(p.inv_fn.concrete(flat))
            if back != idx:
                return CheckResult(
                    label, False,
                    f"BijectivityViolation: inv(fwd{idx}) = {back}")
            if inv_exprs is not None:
                got = tuple(eval_expr(c, {"f": flat}) for c in inv_exprs)
                if got != idx:
                    return CheckResult(
                        label, False, f"symbolic inv disagrees with concrete at {flat}")
    return CheckResult(label, True, f"{p.size} points checked")
