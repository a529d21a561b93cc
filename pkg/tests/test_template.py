from itertools import product

import pytest

from lego.errors import (
    ArityMismatch,
    OutOfBounds,
    PlaceholderSyntax,
    SliceOnNonConstantDim,
    UnknownLayout,
    UnknownVariable,
    UnterminatedPlaceholder,
)
from lego.template import (
    LayoutApply,
    LayoutInv,
    Literal,
    Manifest,
    RawExpr,
    ScalarArg,
    SliceArg,
    VarDecl,
    instantiate,
    parse_facts,
    parse_manifest,
    parse_template,
)
from lego.expr import VarRange
from lego.simplify import FactSet


# ---------------------------------------------------------------------------
# Template parsing.
# ---------------------------------------------------------------------------

def test_parse_apply_placeholder():
    t = parse_template("x = {{ A.apply(i, j) }};")
    kinds = [type(s).__name__ for s in t.segments]
    assert kinds == ["Literal", "Placeholder", "Literal"]
    ast = t.placeholders[0].ast
    assert isinstance(ast, LayoutApply)
    assert ast.layout == "A"
    assert len(ast.args) == 2


def test_parse_no_placeholders_is_single_literal():
    t = parse_template("plain text, no templating")
    assert t.segments == (Literal("plain text, no templating"),)


def test_parse_bracket_sugar_with_slice():
    t = parse_template("{{ A[pid_m, :] }}")
    ast = t.placeholders[0].ast
    assert isinstance(ast, LayoutApply)
    assert isinstance(ast.args[0], ScalarArg)
    assert ast.args[1] == SliceArg(None, None)


def test_parse_inv_and_raw():
    t = parse_template("{{ B.inv(p) }} and {{ i*4 + j }}")
    assert isinstance(t.placeholders[0].ast, LayoutInv)
    assert isinstance(t.placeholders[1].ast, RawExpr)


def test_source_roundtrip_is_byte_exact():
    src = "a\n {{ A[i,:] }} mid {{  j*2 }}\nend"
    assert parse_template(src).source() == src


def test_unterminated_placeholder_reports_location():
    with pytest.raises(UnterminatedPlaceholder) as err:
        parse_template("line one\nx = {{ A.apply(i)")
    assert err.value.line == 2


def test_placeholder_syntax_error():
    with pytest.raises(PlaceholderSyntax):
        parse_template("{{ A.apply(i,,j) }}")
    with pytest.raises(PlaceholderSyntax):
        parse_template("{{ A.frob(i) }}")
    with pytest.raises(PlaceholderSyntax):
        parse_template("{{ }}")


def test_literal_slice_bounds_must_be_constant():
    parse_template("{{ A[0:4] }}")  # fine
    with pytest.raises(SliceOnNonConstantDim):
        parse_template("{{ A[k:4] }}")


# ---------------------------------------------------------------------------
# Manifest and facts parsing.
# ---------------------------------------------------------------------------

def test_parse_facts_lines():
    facts = parse_facts("i in [0, 8)\nj % 4 == 0\n# comment\n\n")
    assert facts.range_for("i") == VarRange(0, 8)
    assert facts.divisors_of("j") == {4}
    with pytest.raises(ValueError):
        parse_facts("i is small")


def test_parse_manifest_sections():
    m = parse_manifest(
        """
        [layouts]
        A = GroupBy([4,4]).OrderBy(Row(4,4))
        [vars]
        i in [0, 4)
        v vec in [0, 4)
        [facts]
        i % 2 == 0
        [target]
        c
        [policy]
        default = unexpanded
        2 = expanded
        """
    )
    assert m.layouts["A"].startswith("GroupBy")
    assert m.vars["i"] == VarDecl(VarRange(0, 4), vec=False)
    assert m.vars["v"].vec
    assert m.facts.divisors_of("i") == {2}
    assert m.target == "c"
    assert m.policy_default == "unexpanded"
    assert m.policy_overrides == {2: "expanded"}


def test_manifest_errors():
    with pytest.raises(ValueError):
        parse_manifest("[nope]\n")
    with pytest.raises(ValueError):
        parse_manifest("orphan line")
    with pytest.raises(ValueError):
        parse_manifest("[vars]\ni in [0 8)")
    with pytest.raises(ValueError):
        parse_manifest("[layouts]\nA = X\nA = Y")
    with pytest.raises(ValueError):
        parse_manifest("[policy]\ndefault = sometimes")


# ---------------------------------------------------------------------------
# Instantiation.
# ---------------------------------------------------------------------------

def simple_manifest(**kw):
    args = dict(
        layouts={"L": "GroupBy([8])"},
        vars={"i": VarDecl(VarRange(0, 8))},
        facts=FactSet(),
        target="python",
        policy_default="auto",
        policy_overrides={},
    )
    args.update(kw)
    return Manifest(**args)


def test_identity_layout_renders_bare_variable():
    t = parse_template("{{ L.apply(i) }}")
    assert instantiate(t, simple_manifest()) == "i"


def test_literal_bytes_preserved():
    src = "prefix {{ L.apply(i) }} suffix\nwith newline kept"
    out = instantiate(parse_template(src), simple_manifest())
    assert out == "prefix i suffix\nwith newline kept"


def test_no_placeholder_template_is_copied_verbatim():
    src = "nothing { to } see {here}"
    assert instantiate(parse_template(src), simple_manifest()) == src


def test_unknown_layout_and_variable():
    m = simple_manifest()
    with pytest.raises(UnknownLayout):
        instantiate(parse_template("{{ Nope.apply(i) }}"), m)
    with pytest.raises(UnknownVariable):
        instantiate(parse_template("{{ L.apply(q) }}"), m)
    with pytest.raises(UnknownVariable):
        instantiate(parse_template("{{ q + 1 }}"), m)


def test_arity_mismatch():
    with pytest.raises(ArityMismatch):
        instantiate(parse_template("{{ L.apply(i, i) }}"), simple_manifest())


def test_slice_bounds_validated_against_extent():
    m = simple_manifest(layouts={"L": "GroupBy([8])"})
    with pytest.raises(OutOfBounds):
        instantiate(parse_template("{{ L[0:9] }}"), m)


def test_instantiation_is_deterministic():
    t = parse_template("{{ L.apply(i) }} / {{ i*2 + 1 }}")
    m = simple_manifest()
    assert instantiate(t, m) == instantiate(t, m)


def test_row_major_offset_semantics():
    m = simple_manifest(
        layouts={"A": "GroupBy([4,8]).OrderBy(Row(4,8))"},
        vars={"i": VarDecl(VarRange(0, 4)), "j": VarDecl(VarRange(0, 8))},
    )
    out = instantiate(parse_template("{{ A[i, j] }}"), m)
    assert out == "i*8 + j"


def test_scalar_placeholders_match_concrete_apply_exhaustively():
    from lego.dsl import parse_layout

    src = "{{ T.apply(a, b, c, d) }}"
    m = simple_manifest(
        layouts={"T": "TileBy([2,2],[4,4]).OrderBy(Row(8,8))"},
        vars={n: VarDecl(VarRange(0, e))
              for n, e in zip("abcd", (2, 2, 4, 4))},
    )
    out = instantiate(parse_template(src), m)
    layout = parse_layout(m.layouts["T"])
    for idx in product(range(2), range(2), range(4), range(4)):
        env = dict(zip("abcd", idx))
        assert eval(out, {}, env) == layout.apply(idx)


def test_antidiagonal_layout_instantiates_with_select():
    from lego.dsl import parse_layout

    antidiag_chain = ("GroupBy([6,6]).OrderBy(RegP([2,3,2,3],[1,3,2,4]))"
           ".OrderBy(RegP([2,2],[2,1]), GenP([3,3], antidiag))")
    m = simple_manifest(
        layouts={"Buf": antidiag_chain},
        vars={"i": VarDecl(VarRange(0, 6)), "j": VarDecl(VarRange(0, 6))},
    )
    out = instantiate(parse_template("{{ Buf[i, j] }}"), m)
    assert " if " in out and " else " in out
    layout = parse_layout(antidiag_chain)
    for i, j in product(range(6), range(6)):
        assert eval(out, {}, {"i": i, "j": j}) == layout.apply((i, j))


def test_inv_placeholder_renders_coordinate_tuple():
    m = simple_manifest(
        layouts={"Blk": "GroupBy([2,2]).OrderBy(Col(2,2))"},
        vars={"pid": VarDecl(VarRange(0, 4))},
    )
    out = instantiate(parse_template("{{ Blk.inv(pid) }}"), m)
    assert out == "pid % 2, pid // 2"
    layout_inv = [(p % 2, p // 2) for p in range(4)]
    from lego.dsl import parse_layout

    layout = parse_layout(m.layouts["Blk"])
    assert [tuple(layout.inv(p)) for p in range(4)] == layout_inv


def test_triton_slices_become_aranges_with_broadcasts():
    m = simple_manifest(
        layouts={"A": "GroupBy([4,8]).OrderBy(Row(4,8))"},
        vars={},
        target="triton",
    )
    out = instantiate(parse_template("{{ A[:, :] }}"), m)
    assert out == "(tl.arange(0, 4))[:, None]*8 + (tl.arange(0, 8))[None, :]"


def test_vec_vars_broadcast_by_argument_position():
    m = simple_manifest(
        layouts={"A": "GroupBy([8,8]).OrderBy(Row(8,8))"},
        vars={"im": VarDecl(VarRange(0, 8), vec=True),
              "ik": VarDecl(VarRange(0, 8), vec=True)},
        target="triton",
    )
    out = instantiate(parse_template("{{ A[im, ik] }}"), m)
    assert out == "(im)[:, None]*8 + (ik)[None, :]"


def test_slices_in_non_triton_profile_are_rejected():
    from lego.errors import UnsupportedNode

    m = simple_manifest(layouts={"A": "GroupBy([4,8]).OrderBy(Row(4,8))"})
    with pytest.raises(UnsupportedNode):
        instantiate(parse_template("{{ A[:, :] }}"), m)


def test_policy_override_changes_per_placeholder_form():
    # placeholder 1 uses the default (auto), 2 forces unexpanded output
    m = simple_manifest(
        layouts={"A": "GroupBy([4,8]).OrderBy(Row(4,8))"},
        vars={"i": VarDecl(VarRange(0, 4)), "j": VarDecl(VarRange(0, 8))},
        policy_overrides={2: "unexpanded"},
    )
    t = parse_template("{{ 2*(i + j) }} | {{ 2*(i + j) }}")
    first, second = instantiate(t, m).split(" | ")
    assert first == "2*(i + j)"  # auto keeps the cheaper unexpanded form here
    assert second == "2*(i + j)"
    forced = simple_manifest(
        layouts={},
        vars={"i": VarDecl(VarRange(0, 4)), "j": VarDecl(VarRange(0, 8))},
        policy_default="expanded",
    )
    out = instantiate(parse_template("{{ 2*(i + j) }}"), forced)
    assert out == "2*i + 2*j"


def test_resolved_layout_table_hook_for_custom_perms():
    from lego.layout import GroupBy as GB, OrderBy, GenP, PermFn

    def fwd(idx):
        return (idx[0] * 3) % 8 if isinstance(idx[0], int) else (idx[0] * 3) % 8

    custom = GB([8], orders=(OrderBy(GenP((8,), PermFn(fwd, fwd),
                                          None, name="mul3")),), injective=True)
    m = simple_manifest(layouts={}, vars={"i": VarDecl(VarRange(0, 8))})
    out = instantiate(parse_template("{{ X.apply(i) }}"), m, layouts={"X": custom})
    for v in range(8):
        assert eval(out, {}, {"i": v}) == (v * 3) % 8


def test_manifest_rejects_name_shared_by_layout_and_var():
    with pytest.raises(ValueError):
        parse_manifest("[layouts]\nA = GroupBy([4])\n[vars]\nA in [0, 4)\n")


def test_expand_by_layout_renders_masked_select():
    m = simple_manifest(
        layouts={"P": "ExpandBy([3,3],[4,4],GroupBy([4,4]).OrderBy(Col(4,4)))"},
        vars={"i": VarDecl(VarRange(0, 4)), "j": VarDecl(VarRange(0, 4))},
        target="triton",
    )
    out = instantiate(parse_template("{{ P[i, j] }}"), m)
    assert out.startswith("tl.where(")
    assert out.endswith("-1)")
    py = simple_manifest(
        layouts=m.layouts,
        vars=m.vars,
    )
    text = instantiate(parse_template("{{ P[i, j] }}"), py)
    from lego.dsl import parse_layout

    layout = parse_layout(py.layouts["P"])
    for i in range(4):
        for j in range(4):
            concrete = layout.apply((i, j))
            expected = -1 if concrete is None else concrete
            assert eval(text, {}, {"i": i, "j": j}) == expected
