import math
from itertools import permutations, product

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lego.errors import ArityMismatch, LegoError, OutOfBounds, ShapeMismatch
from lego.layout import (
    GenP,
    GroupBy,
    OrderBy,
    PermFn,
    RegP,
    antidiag_perm,
    canon_flatten,
    canon_unflatten,
    col,
    identity_perm,
    resolve_builtin_perm,
    reverse_perm,
    row,
    sigma_inverse,
    sigma_tile,
    tile_by,
    tile_order_by,
    validate,
)
from helpers import ref_antidiag, ref_flatten, ref_unflatten


# ---------------------------------------------------------------------------
# Canonical bijections.
# ---------------------------------------------------------------------------

def test_flatten_anchor_values():
    assert canon_flatten((6, 4), (4, 1)) == 17
    assert canon_flatten((7,), (3,)) == 3
    assert canon_flatten((2, 3, 2, 3), (1, 0, 1, 2)) == 23


def test_flatten_errors():
    with pytest.raises(ArityMismatch):
        canon_flatten((6, 4), (1,))
    with pytest.raises(OutOfBounds):
        canon_flatten((6, 4), (6, 0))
    with pytest.raises(OutOfBounds):
        canon_flatten((6, 4), (0, -1))


def test_unflatten_anchor_values():
    assert canon_unflatten((6, 4), 17) == (4, 1)
    assert canon_unflatten((2, 3, 2, 3), 23) == (1, 0, 1, 2)
    assert canon_unflatten((5,), 3) == (3,)
    with pytest.raises(OutOfBounds):
        canon_unflatten((5,), 5)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(1, 5), min_size=1, max_size=4), st.data())
def test_flatten_unflatten_roundtrip(shape, data):
    shape = tuple(shape)
    total = math.prod(shape)
    flat = data.draw(st.integers(0, total - 1))
    idx = canon_unflatten(shape, flat)
    assert canon_flatten(shape, idx) == flat
    assert idx == ref_unflatten(shape, flat)
    assert ref_flatten(shape, idx) == flat


# ---------------------------------------------------------------------------
# Sigma handling.
# ---------------------------------------------------------------------------

def test_sigma_inverse_examples():
    assert sigma_inverse((2, 1)) == (2, 1)
    assert sigma_inverse((1, 3, 2, 4)) == (1, 3, 2, 4)
    assert sigma_inverse((2, 3, 1)) == (3, 1, 2)


def test_sigma_inverse_matches_brute_force_search():
    def compose(a, b):  # (a o b)[k] = b[a[k]-1]
        return tuple(b[s - 1] for s in a)

    identity = (1, 2, 3)
    for sigma in permutations((1, 2, 3)):
        expected = next(c for c in permutations((1, 2, 3))
                        if compose(c, sigma) == identity)
        assert sigma_inverse(sigma) == expected


def test_sigma_validation():
    with pytest.raises(ShapeMismatch):
        RegP((2, 2), (1, 1))
    with pytest.raises(ShapeMismatch):
        RegP((2, 2), (1, 2, 3))


# ---------------------------------------------------------------------------
# Permutations.
# ---------------------------------------------------------------------------

def test_regp_transpose_value_and_table():
    p = RegP((2, 2), (2, 1))
    assert p.apply((1, 0)) == 1
    # oracle: transpose the index, flatten in the transposed shape
    for idx in product(range(2), range(2)):
        assert p.apply(idx) == ref_flatten((2, 2), (idx[1], idx[0]))


def test_regp_identity_is_canonical_flatten():
    p = RegP((3, 4), (1, 2))
    for idx in product(range(3), range(4)):
        assert p.apply(idx) == canon_flatten((3, 4), idx)


def test_genp_double_reversal_maps_last_to_first():
    p = reverse_perm((3, 2))
    assert p.apply((2, 1)) == 0
    assert p.inv(0) == (2, 1)
    # the double-reversal formula: (n1-1-i)*n2 + (n2-1-j)
    for i, j in product(range(3), range(2)):
        assert p.apply((i, j)) == (3 - 1 - i) * 2 + (2 - 1 - j)


def test_perm_inverse_examples():
    assert RegP((2, 2), (2, 1)).inv(1) == (1, 0)
    assert RegP((7,), (1,)).inv(4) == (4,)
    for p in (RegP((3, 4), (2, 1)), reverse_perm((3, 4)), identity_perm((3, 4))):
        for flat in range(12):
            assert p.apply(p.inv(flat)) == flat


def test_perm_bounds():
    p = RegP((2, 2), (2, 1))
    with pytest.raises(OutOfBounds):
        p.apply((2, 0))
    with pytest.raises(OutOfBounds):
        p.inv(4)
    with pytest.raises(ArityMismatch):
        p.apply((1,))


# ---------------------------------------------------------------------------
# OrderBy stages.
# ---------------------------------------------------------------------------

def tile_reverse_stage():
    return OrderBy(RegP((2, 2), (2, 1)), reverse_perm((3, 2)))


def tiling_stage():
    return OrderBy(RegP((2, 3, 2, 3), (1, 3, 2, 4)))


def test_orderby_tile_reverse_anchor():
    assert tile_reverse_stage().apply((1, 0, 2, 1)) == 6
    assert tile_reverse_stage().inv(6) == (1, 0, 2, 1)


def test_orderby_single_identity_equals_canonical():
    stage = OrderBy(row(4, 3))
    for idx in product(range(4), range(3)):
        assert stage.apply(idx) == canon_flatten((4, 3), idx)
    for flat in range(12):
        assert stage.inv(flat) == canon_unflatten((4, 3), flat)


def test_orderby_o2_anchor_and_roundtrip():
    stage = tiling_stage()
    assert stage.apply((1, 1, 0, 2)) == 23
    assert stage.inv(23) == (1, 1, 0, 2)
    for flat in range(36):
        assert stage.apply(stage.inv(flat)) == flat


def test_orderby_mixed_dimensionality():
    # a 1-d grid of 3-d blocks
    stage = OrderBy(row(4), RegP((2, 3, 2), (3, 1, 2)))
    assert stage.dims == (4, 2, 3, 2)
    seen = set()
    for idx in product(*(range(n) for n in stage.dims)):
        flat = stage.apply(idx)
        seen.add(flat)
        assert stage.inv(flat) == idx
    assert seen == set(range(48))


# ---------------------------------------------------------------------------
# GroupBy ensembles.
# ---------------------------------------------------------------------------

def tile_reverse_layout():
    return GroupBy([6, 4]).order_by(RegP((2, 2), (2, 1)), reverse_perm((3, 2)))


def antidiag_chain_layout():
    return GroupBy([6, 6]).order_by(RegP((2, 3, 2, 3), (1, 3, 2, 4))) \
                          .order_by(RegP((2, 2), (2, 1)), antidiag_perm(3))


def test_groupby_tile_reverse_anchors():
    g = tile_reverse_layout()
    assert g.apply((4, 1)) == 6
    assert g.inv(6) == (4, 1)


def test_groupby_empty_chain_is_canonical():
    g = GroupBy([3, 4])
    for idx in product(range(3), range(4)):
        assert g.apply(idx) == canon_flatten((3, 4), idx)
    assert g.inv(7) == canon_unflatten((3, 4), 7)


def test_groupby_antidiag_chain_anchors():
    g = antidiag_chain_layout()
    assert g.apply((4, 2)) == 15
    assert g.inv(15) == (4, 2)


def test_antidiag_chain_full_table_against_stagewise_oracle():
    """Recompute the 36-entry mapping by composing the two declared stages
    directly: reshape+interchange for the tiling stage, transpose+antidiagonal
    for the second, glued by plain reshapes."""
    def oracle(i, j):
        f = i * 6 + j
        idx = ref_unflatten((2, 3, 2, 3), f)
        perm = (idx[0], idx[2], idx[1], idx[3])        # sigma [1,3,2,4]
        f = ref_flatten((2, 2, 3, 3), perm)
        a, b, c, d = ref_unflatten((2, 2, 3, 3), f)
        tile = ref_flatten((2, 2), (b, a))             # transpose the grid
        inner = ref_antidiag(3, c, d)
        return tile * 9 + inner

    g = antidiag_chain_layout()
    for i, j in product(range(6), range(6)):
        assert g.apply((i, j)) == oracle(i, j)


def test_groupby_bijectivity_exhaustive():
    for g in (tile_reverse_layout(), antidiag_chain_layout()):
        n = g.size
        image = set()
        for idx in product(*(range(d) for d in g.dims)):
            flat = g.apply(idx)
            image.add(flat)
            assert g.inv(flat) == idx
        assert image == set(range(n))


def test_groupby_count_mismatch_detected_at_apply():
    g = GroupBy([4], orders=(OrderBy(row(5)),))
    with pytest.raises(ShapeMismatch):
        g.apply((0,))


def test_groupby_bounds():
    g = tile_reverse_layout()
    with pytest.raises(OutOfBounds):
        g.apply((6, 0))
    with pytest.raises(OutOfBounds):
        g.inv(24)
    with pytest.raises(ArityMismatch):
        g.apply((1, 2, 3))


# ---------------------------------------------------------------------------
# Sugar constructors.
# ---------------------------------------------------------------------------

def test_sigma_tile_known_values():
    assert sigma_tile(2, 3) == (1, 3, 5, 2, 4, 6)
    assert sigma_tile(3, 2) == (1, 4, 2, 5, 3, 6)


def test_row_one_dim_is_identity():
    p = row(9)
    for i in range(9):
        assert p.apply((i,)) == i


def test_col_equals_transpose_then_row():
    p = col(4, 3)  # tile space is the reversed shape (3, 4)
    for idx in product(range(3), range(4)):
        assert p.apply(idx) == ref_flatten((4, 3), (idx[1], idx[0]))


def test_col_makes_leftmost_dimension_contiguous():
    g = GroupBy([5, 2]).order_by(RegP((5, 2), (2, 1)))
    assert g.apply((1, 0)) - g.apply((0, 0)) == 1


def test_tile_by_single_level_equals_plain_row():
    t = tile_by([3, 4])
    plain = GroupBy([3, 4]).order_by(row(3, 4))
    for idx in product(range(3), range(4)):
        assert t.apply(idx) == plain.apply(idx)


def test_tile_by_is_tiled_view_of_row_major():
    t = tile_by([2, 2], [3, 3])
    for bm, bk, tm, tk in product(range(2), range(2), range(3), range(3)):
        r, c = bm * 3 + tm, bk * 3 + tk
        assert t.apply((bm, bk, tm, tk)) == r * 6 + c


def test_tile_by_arity_mismatch():
    with pytest.raises(ArityMismatch):
        tile_by([2, 2], [3])


def test_tile_order_by_all_row_equals_tile_by():
    t1 = tile_order_by(row(2, 2), row(3, 3))
    t2 = tile_by([2, 2], [3, 3])
    for idx in product(*(range(n) for n in t1.dims)):
        assert t1.apply(idx) == t2.apply(idx)


def test_tile_order_by_single_level_degenerates_to_its_perm():
    p = RegP((3, 4), (2, 1))
    t = tile_order_by(p)
    base = GroupBy([3, 4]).order_by(RegP((3, 4), (2, 1)))
    for idx in product(range(3), range(4)):
        assert t.apply(idx) == base.apply(idx)


def test_tile_order_by_is_a_bijection():
    t = tile_order_by(col(2, 2), row(3, 3))
    image = set()
    for idx in product(*(range(n) for n in t.dims)):
        flat = t.apply(idx)
        image.add(flat)
        assert t.inv(flat) == idx
    assert image == set(range(36))


def test_tile_order_by_rejects_genp_levels():
    with pytest.raises(TypeError):
        tile_order_by(reverse_perm((2, 2)))


# ---------------------------------------------------------------------------
# Injective mode.
# ---------------------------------------------------------------------------

def _even_map(shape):
    def fwd(idx):
        return idx[0] * 2

    return GenP(shape, PermFn(fwd, lambda idx: idx[0] * 2), None, name="even")


def test_injective_layout_exports_apply_only():
    g = GroupBy([4], orders=(OrderBy(_even_map((4,))),), injective=True)
    assert [g.apply((i,)) for i in range(4)] == [0, 2, 4, 6]
    with pytest.raises(LegoError):
        g.inv(2)


def test_injective_structure_enforced():
    bad = GroupBy([4], orders=(OrderBy(row(4)),), injective=True)
    with pytest.raises(ShapeMismatch):
        bad.apply((0,))
    two_stage = GroupBy([4], orders=(OrderBy(_even_map((4,))), OrderBy(row(4))),
                        injective=True)
    with pytest.raises(ShapeMismatch):
        two_stage.apply((0,))


def test_injective_validation_checks_distinctness_only():
    g = GroupBy([4], orders=(OrderBy(_even_map((4,))),), injective=True)
    assert validate(g).ok
    collide = GenP((4,), PermFn(lambda idx: 0, lambda idx: idx[0] * 0), None)
    bad = GroupBy([4], orders=(OrderBy(collide),), injective=True)
    assert not validate(bad).ok


# ---------------------------------------------------------------------------
# Validation reports.
# ---------------------------------------------------------------------------

def test_validate_passes_on_good_layout():
    report = validate(tile_reverse_layout())
    assert report.ok
    assert any("element-count" in c.name for c in report.checks)


def test_validate_reports_count_mismatch():
    g = GroupBy([6, 4], orders=(OrderBy(row(5, 5)),))
    report = validate(g)
    assert not report.ok
    assert "ShapeMismatch" in report.failures[0].detail


def test_validate_reports_non_bijective_genp():
    def fwd(idx):
        return (idx[0] * 2) % 4  # 0 and 2 collide with 1 and 3

    broken = GenP((2, 2), PermFn(fwd, lambda idx: (idx[0] * 2) % 4),
                  PermFn(lambda f: (0, 0), lambda f: (f * 0, f * 0)), name="broken")
    g = GroupBy([2, 2], orders=(OrderBy(broken),))
    report = validate(g)
    assert not report.ok
    assert "BijectivityViolation" in report.failures[0].detail


def test_validate_trusts_beyond_bound():
    g = GroupBy([64, 64]).order_by(reverse_perm((64, 64)))
    report = validate(g, bound=100)
    assert report.ok
    assert any("trusted" in c.detail for c in report.checks)


def test_builtin_registry():
    p = resolve_builtin_perm("rev2d", (3, 2))
    assert p.apply((2, 1)) == 0
    with pytest.raises(ShapeMismatch):
        resolve_builtin_perm("rev1d", (3, 2))
    with pytest.raises(ShapeMismatch):
        resolve_builtin_perm("antidiag", (3, 2))


def test_validate_flags_missing_inverse_outside_injective_mode():
    half = GenP((4,), PermFn(lambda idx: idx[0], lambda idx: idx[0]), None)
    g = GroupBy([4], orders=(OrderBy(half),))
    report = validate(g)
    assert not report.ok
    assert "no inverse" in report.failures[0].detail
