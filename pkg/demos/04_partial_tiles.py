"""Partial tiles: running a tile-divisible layout over a smaller buffer.

Tiled layouts want extents that divide evenly. ExpandBy pads the physical
space up to a tile-divisible expanded space, runs the inner layout there,
and masks every position that falls outside the real extents. Concretely
the mask is an absent result (None); symbolically it is a -1 branch a
kernel can use as a load/store mask.
"""

from itertools import product

from lego import (
    ExpandBy,
    GroupBy,
    PYTHON_PROFILE,
    TRITON_PROFILE,
    apply_symbolic,
    col,
    emit_expr,
    index_vars,
)

# A 3x3 buffer addressed through a 4x4 column-major layout.
padded = ExpandBy((3, 3), (4, 4), GroupBy([4, 4]).order_by(col(4, 4)))

print("logical 4x4 view; '.' marks padding that maps nowhere:")
for i in range(4):
    row_cells = []
    for j in range(4):
        pos = padded.apply((i, j))
        row_cells.append(" ." if pos is None else f"{pos:2d}")
    print("  ".join(row_cells))

hits = [padded.apply(idx) for idx in product(range(4), range(4))]
real = [h for h in hits if h is not None]
print(f"\n{len(real)} live positions cover 0..{max(real)},",
      f"{hits.count(None)} padding slots masked")

# Every live position inverts back to its logical index.
for pos in range(9):
    idx = padded.inv(pos)
    assert padded.apply(idx) == pos
print("inverse verified on all 9 live positions")

# Symbolically the mask becomes a select over the in-bounds condition,
# which targets with vectorized loads can consume directly.
expr = apply_symbolic(padded, index_vars(["i", "j"], padded.dims))
print("\npython :", emit_expr(expr, PYTHON_PROFILE))
print("triton :", emit_expr(expr, TRITON_PROFILE))
