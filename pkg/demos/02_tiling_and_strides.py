"""Hierarchical tiling sugar, and how strides fall out of it.

Nobody writes strides here: tile_by declares the tile hierarchy and the
stride structure is derived. This script prints the derived index
expressions for a few classic layouts and checks them against the stride
vectors one would otherwise have to supply by hand.
"""

from itertools import product

from lego import (
    GroupBy,
    PYTHON_PROFILE,
    apply_symbolic,
    col,
    emit_expr,
    eval_expr,
    index_vars,
    parse_layout,
    row,
    tile_by,
)

# A 8x8 matrix viewed as a 2x2 grid of 4x4 tiles, data kept row-major.
# Logical coordinates are (tile_row, tile_col, row_in_tile, col_in_tile).
tiled = tile_by([2, 2], [4, 4]).order_by(row(8, 8))
coords = index_vars(["bm", "bk", "tm", "tk"], tiled.dims)
expr = apply_symbolic(tiled, coords)
print("tiled matmul operand:", emit_expr(expr, PYTHON_PROFILE))

# The same function as a stride dot product: (32, 4, 8, 1).
strides = (32, 4, 8, 1)
for idx in product(range(2), range(2), range(4), range(4)):
    env = dict(zip(["bm", "bk", "tm", "tk"], idx))
    assert eval_expr(expr, env) == sum(s * c for s, c in zip(strides, idx))
print("matches strides", strides, "at all 64 points")

# Column-major storage is just a different dimension permutation.
cm = GroupBy([4, 3]).order_by(col(3, 4))
print("\ncolumn-major 4x3 walk down the first column:",
      [cm.apply((i, 0)) for i in range(4)])

# Thread coarsening as a layout: a 2x2 grid of threads, each owning a 2x2
# patch of work items, flattened over the combined 4x4 space.
coarsened = parse_layout("GroupBy([2,2],[2,2]).OrderBy(Row(4,4))")
e = apply_symbolic(coarsened, index_vars(["r1", "r2", "t1", "t2"], coarsened.dims))
print("thread-coarsened expression:", emit_expr(e, PYTHON_PROFILE))

# A 3-d brick layout: an 4x4x4 grid of 2x2x2 bricks, each brick contiguous
# in memory. The level-major logical view makes this the identity layout of
# the 6-d space, which is exactly what makes bricks cheap.
brick = parse_layout("GroupBy([4,4,4],[2,2,2]).OrderBy(Row(4,4,4), Row(2,2,2))")
e = apply_symbolic(brick, index_vars(list("pqrstu"), brick.dims))
print("brick expression:", emit_expr(e, PYTHON_PROFILE))
first_brick = [brick.apply((0, 0, 0, a, b, c))
               for a, b, c in product(range(2), range(2), range(2))]
print("first brick occupies positions", first_brick)
