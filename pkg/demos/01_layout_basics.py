"""Layouts from first principles: a logical view, a reshape, a reorder.

A layout is a bijection between the multi-dimensional indices a program
reasons in and flat positions in memory. We build one for a 6x4 buffer:
tile it into a 2x2 grid of 3x2 blocks, transpose the grid, and reverse the
elements inside each block.
"""

from lego import GroupBy, RegP, reverse_perm

# The logical view: a 6x4 matrix. With no reordering stages the layout is
# plain row-major.
plain = GroupBy([6, 4])
print("row-major apply((4, 1)) =", plain.apply((4, 1)))  # 4*4 + 1 = 17

# One reordering stage. Its tile hierarchy is a 2x2 grid (outer) of 3x2
# blocks (inner): the grid dimensions are transposed by the constant
# permutation [2, 1], and each block is reversed along both axes by a
# general (function-backed) permutation.
layout = GroupBy([6, 4]).order_by(
    RegP((2, 2), (2, 1)),        # transpose the grid of blocks
    reverse_perm((3, 2)),        # reverse elements within each block
)

print("reordered apply((4, 1)) =", layout.apply((4, 1)))
print("inv(6) =", layout.inv(6))

# The full mapping, drawn as the 6x4 logical view with each cell showing
# the physical position its element lands in.
print("\nlogical view -> physical position:")
for i in range(6):
    print("  ".join(f"{layout.apply((i, j)):2d}" for j in range(4)))

# Walking physical memory left to right recovers the logical elements in
# their new order; inv() answers "which logical element lives here?".
order = [layout.inv(p) for p in range(layout.size)]
print("\nfirst six physical slots hold logical indices:", order[:6])

# Layouts are bijections by construction; the round trip is the identity.
assert all(layout.inv(layout.apply((i, j))) == (i, j)
           for i in range(6) for j in range(4))
print("\nround trip verified on all 24 points")
