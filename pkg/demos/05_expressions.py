"""The expression layer: ranges, rewriting, and the cost model.

Layout compositions generate index expressions full of floor divisions and
modulos. Most of them cancel once you know the ranges of the variables
involved: the simplifier proves each rewrite's side-condition with interval
arithmetic over those ranges (plus any divisibility facts supplied), so
everything it does is sound for every in-range input.
"""

from lego import (
    FactSet,
    PYTHON_PROFILE,
    Var,
    VarRange,
    best_variant,
    emit_expr,
    expand,
    op_count,
    range_of,
    simplify,
)

q = Var("q", VarRange(0, 6))
r = Var("r", VarRange(0, 4))
x = Var("x", VarRange(0, 64))

# Interval analysis bounds any expression from its variables' ranges.
e = q * 4 + r
print("range of q*4 + r:", range_of(e))

# (4*q + r) // 4 collapses to q because r is provably below the divisor...
print("(4*q + r) // 4  ->", emit_expr(simplify((4 * q + r) // 4), PYTHON_PROFILE))
# ...and (4*q + r) % 4 collapses to r for the same reason.
print("(4*q + r) % 4   ->", emit_expr(simplify((4 * q + r) % 4), PYTHON_PROFILE))
# Splitting a flat index and recombining it is the identity.
print("8*(x//8) + x%8  ->", emit_expr(simplify(8 * (x // 8) + x % 8), PYTHON_PROFILE))

# Without the range knowledge nothing fires: here r may reach the divisor.
wide = Var("w", VarRange(0, 100))
stuck = simplify((4 * q + wide) // 4)
print("unknown remainder ->", emit_expr(stuck, PYTHON_PROFILE))

# User-supplied facts unlock more: declare w divisible by 4.
facts = FactSet(divisibility=[("w", 4)])
print("with w % 4 == 0  ->", emit_expr(simplify(wide % 4, facts), PYTHON_PROFILE))

# Pre-expanding can expose rewrites that the nested form hides; the cost
# model picks whichever variant ends up with fewer arithmetic nodes.
t = Var("t", VarRange(0, 4))
nested = 2 * (4 * (x // 8) + t) + x % 8
plain = simplify(nested)
best = best_variant(nested)
print("\nnested form     :", emit_expr(plain, PYTHON_PROFILE), f"({op_count(plain)} ops)")
print("after expansion :", emit_expr(best, PYTHON_PROFILE), f"({op_count(best)} ops)")
print("expand() alone  :", emit_expr(expand(nested), PYTHON_PROFILE))
