"""The anti-diagonal layout: an irregular permutation with a closed form.

Wavefront algorithms update all elements of one anti-diagonal in parallel.
With a row-major square buffer those elements sit a full row apart, which
on a GPU means every thread of the wavefront hits the same shared-memory
bank. Laying the buffer out anti-diagonal by anti-diagonal makes each
wavefront contiguous, and the permutation still has a closed-form index
expression (quadratic, with an integer square root in the inverse).
"""

from lego import (
    C_PROFILE,
    GroupBy,
    antidiag_perm,
    apply_symbolic,
    emit_expr,
    index_vars,
    parse_layout,
)

n = 5
p = antidiag_perm(n)

print(f"{n}x{n} tile, physical position of each logical element:")
for i in range(n):
    print("  ".join(f"{p.apply((i, j)):2d}" for j in range(n)))

# Elements of one anti-diagonal now occupy consecutive positions.
for t in (2, 4, 6):
    wave = sorted(p.apply((i, t - i)) for i in range(n) if 0 <= t - i < n)
    print(f"anti-diagonal {t}: positions {wave}")

# The closed forms, as emitted C. The forward direction is branchy but
# integer-only; the inverse needs isqrt.
g = GroupBy([n, n], orders=(), injective=False).order_by(antidiag_perm(n))
expr = apply_symbolic(g, index_vars(["i", "j"], g.dims))
print("\nforward index expression (C):")
print(" ", emit_expr(expr, C_PROFILE))

# Composed with a tiling: a 6x6 logical space cut into 3x3 blocks, the
# grid transposed, each block anti-diagonalized. Two reordering stages,
# chained with the first listed applied first.
chained = parse_layout(
    "GroupBy([6,6])"
    ".OrderBy(RegP([2,3,2,3],[1,3,2,4]))"
    ".OrderBy(RegP([2,2],[2,1]), GenP([3,3], antidiag))")
print("\nchained layout, logical (4,2) lands at", chained.apply((4, 2)))
print("physical slot 15 holds logical", chained.inv(15))
