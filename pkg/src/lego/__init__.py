"""Layout algebra for hierarchical index reorderings.

Declare the logical view of an index space with GroupBy (or the tile_by
sugar), chain reordering stages built from regular and general permutations,
and the library derives the bijection between logical indices and flat
physical positions, both as concrete integers and as simplified symbolic
expressions ready to splice into code templates.
"""

from .errors import (
    ArityMismatch,
    BijectivityViolation,
    DivisionByZero,
    ExhaustiveBoundExceeded,
    LayoutSyntaxError,
    LegoError,
    OutOfBounds,
    PlaceholderSyntax,
    ShapeMismatch,
    SliceOnNonConstantDim,
    TemplateError,
    UnboundVariable,
    UnknownBuiltinPerm,
    UnknownLayout,
    UnknownVariable,
    UnsupportedNode,
    UnterminatedPlaceholder,
)
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
    and_all,
    as_expr,
    eq,
    eval_cond,
    eval_expr,
    expand,
    ge,
    gt,
    isqrt,
    le,
    lt,
    op_count,
    var_ranges,
    variables,
    walk,
)
from .simplify import FactSet, best_variant, range_of, simplify
from .layout import (
    CheckResult,
    ExpandBy,
    GenP,
    GroupBy,
    LayoutReport,
    OrderBy,
    PermFn,
    RegP,
    antidiag_perm,
    apply_symbolic,
    canon_flatten,
    canon_unflatten,
    col,
    identity_perm,
    index_vars,
    inv_symbolic,
    register_builtin_perm,
    resolve_builtin_perm,
    reverse_perm,
    row,
    sigma_inverse,
    sigma_tile,
    tile_by,
    tile_order_by,
    validate,
)
from .dsl import parse_layout
from .emit import (
    C_PROFILE,
    PYTHON_PROFILE,
    TRITON_PROFILE,
    RangeExpr,
    TargetProfile,
    emit_expr,
    emit_range,
    get_profile,
)
from .template import (
    Manifest,
    Template,
    VarDecl,
    instantiate,
    parse_facts,
    parse_manifest,
    parse_template,
    resolve_layouts,
)

__version__ = "0.1.0"
