"""Code templates with `{{ }}` placeholders spliced from layout expressions.

A template is literal text plus placeholders written in a deliberately tiny
mini-language: `L.apply(args)` (or the bracket sugar `L[args]`), `L.inv(e)`,
or a bare integer expression over declared variables. Arguments may be
slices: `:` spans a whole tiled dimension, `lo:hi` a constant sub-range;
slices become range variables (aranges under the triton profile) with
broadcast axes assigned by argument position.

The companion manifest declares the layouts (in the layout DSL), variables
with their ranges, extra simplification facts, the target profile and the
expansion policy. Instantiation is pure: the same template and manifest
always produce byte-identical output, and bytes outside placeholders are
preserved untouched.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Dict, Mapping, Optional, Tuple, Union

from .dsl import parse_layout
from .emit import RangeExpr, TargetProfile, emit_expr, get_profile
from .errors import (
    ArityMismatch,
    OutOfBounds,
    PlaceholderSyntax,
    SliceOnNonConstantDim,
    UnknownLayout,
    UnknownVariable,
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
    as_expr,
    expand,
)
from .layout import Layout
from .simplify import EMPTY_FACTS, FactSet, best_variant, simplify


# ---------------------------------------------------------------------------
# Placeholder mini-language.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ScalarArg:
    expr: Expr


@dataclass(frozen=True)
class SliceArg:
    lo: Optional[int] = None
    hi: Optional[int] = None


@dataclass(frozen=True)
class LayoutApply:
    layout: str
    args: Tuple[Union[ScalarArg, SliceArg], ...]


@dataclass(frozen=True)
class LayoutInv:
    layout: str
    arg: Expr


@dataclass(frozen=True)
class RawExpr:
    expr: Expr


PlaceholderAst = Union[LayoutApply, LayoutInv, RawExpr]

_PH_TOKEN = re.compile(
    r"(?P<name>[A-Za-z_][A-Za-z0-9_]*)|(?P<int>\d+)|(?P<op>//|[+\-*/%()\[\],:.])")


def _ph_tokens(src, line, col):
    toks = []
    pos = 0
    while pos < len(src):
        if src[pos].isspace():
            pos += 1
            continue
        m = _PH_TOKEN.match(src, pos)
        if not m:
            raise PlaceholderSyntax(f"unexpected character {src[pos]!r} in placeholder",
                                    line, col)
        if m.lastgroup == "name":
            toks.append(("name", m.group()))
        elif m.lastgroup == "int":
            toks.append(("int", int(m.group())))
        else:
            toks.append((m.group(), m.group()))
        pos = m.end()
    toks.append(("end", None))
    return toks


class _PhParser:
    def __init__(self, src, line, col):
        self.toks = _ph_tokens(src, line, col)
        self.i = 0
        self.line = line
        self.col = col

    def fail(self, msg):
        raise PlaceholderSyntax(msg, self.line, self.col)

    def peek(self):
        return self.toks[self.i]

    def advance(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, kind):
        tok = self.advance()
        if tok[0] != kind:
            self.fail(f"expected {kind!r}, found {tok[1]!r}")
        return tok

    def parse(self) -> PlaceholderAst:
        out = self.parse_top()
        if self.peek()[0] != "end":
            self.fail(f"trailing input {self.peek()[1]!r}")
        return out

    def parse_top(self):
        if self.peek()[0] == "name" and self.toks[self.i + 1][0] in (".", "["):
            name = self.advance()[1]
            if self.peek()[0] == "[":
                self.advance()
                args = self.parse_args("]")
                return LayoutApply(name, args)
            self.advance()  # '.'
            method = self.expect("name")[1]
            self.expect("(")
            if method == "apply":
                return LayoutApply(name, self.parse_args(")"))
            if method == "inv":
                arg = self.parse_expr()
                self.expect(")")
                return LayoutInv(name, arg)
            self.fail(f"unknown layout method {method!r} (expected apply or inv)")
        return RawExpr(self.parse_expr())

    def parse_args(self, closer):
        args = [self.parse_arg()]
        while self.peek()[0] == ",":
            self.advance()
            args.append(self.parse_arg())
        self.expect(closer)
        return tuple(args)

    def parse_arg(self):
        if self.peek()[0] == ":":
            self.advance()
            return SliceArg(None, None)
        lo = self.parse_expr()
        if self.peek()[0] == ":":
            self.advance()
            hi = self.parse_expr()
            if not (isinstance(lo, IntConst) and isinstance(hi, IntConst)):
                raise SliceOnNonConstantDim(
                    "slice bounds must be integer literals", self.line, self.col)
            return SliceArg(lo.value, hi.value)
        return ScalarArg(lo)

    # expression grammar: sums over products over atoms
    def parse_expr(self) -> Expr:
        out = self.parse_term()
        while self.peek()[0] in ("+", "-"):
            op = self.advance()[0]
            rhs = self.parse_term()
            out = Add(out, rhs) if op == "+" else Sub(out, rhs)
        return out

    def parse_term(self) -> Expr:
        out = self.parse_atom()
        while self.peek()[0] in ("*", "/", "//", "%"):
            op = self.advance()[0]
            rhs = self.parse_atom()
            if op == "*":
                out = Mul(out, rhs)
            elif op == "%":
                out = Mod(out, rhs)
            else:
                out = FloorDiv(out, rhs)
        return out

    def parse_atom(self) -> Expr:
        tok = self.advance()
        if tok[0] == "int":
            return IntConst(tok[1])
        if tok[0] == "name":
            return Var(tok[1])
        if tok[0] == "(":
            out = self.parse_expr()
            self.expect(")")
            return out
        if tok[0] == "-":
            return Sub(IntConst(0), self.parse_atom())
        self.fail(f"unexpected token {tok[1]!r}")


# ---------------------------------------------------------------------------
# Template parsing.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Literal:
    text: str


@dataclass(frozen=True)
class Placeholder:
    raw: str
    ast: PlaceholderAst
    line: int
    col: int


@dataclass(frozen=True)
class Template:
    segments: Tuple[Union[Literal, Placeholder], ...]

    @property
    def placeholders(self):
        return [s for s in self.segments if isinstance(s, Placeholder)]

    def source(self) -> str:
        """Re-serialize; reproduces the parsed text byte-for-byte."""
        parts = []
        for seg in self.segments:
            if isinstance(seg, Literal):
                parts.append(seg.text)
            else:
                parts.append("{{" + seg.raw + "}}")
        return "".join(parts)


def _line_col(text, pos):
    line = text.count("\n", 0, pos) + 1
    nl = text.rfind("\n", 0, pos)
    return line, pos - nl


def parse_template(text: str) -> Template:
    segments = []
    pos = 0
    while True:
        start = text.find("{{", pos)
        if start < 0:
            segments.append(Literal(text[pos:]))
            break
        if start > pos:
            segments.append(Literal(text[pos:start]))
        end = text.find("}}", start + 2)
        if end < 0:
            line, col = _line_col(text, start)
            raise UnterminatedPlaceholder("placeholder is never closed", line, col)
        raw = text[start + 2:end]
        line, col = _line_col(text, start)
        ast = _PhParser(raw, line, col).parse()
        segments.append(Placeholder(raw, ast, line, col))
        pos = end + 2
    return Template(tuple(segments))


# ---------------------------------------------------------------------------
# Manifest.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class VarDecl:
    range: VarRange
    vec: bool = False


@dataclass(frozen=True)
class Manifest:
    layouts: Mapping[str, str]
    vars: Mapping[str, VarDecl]
    facts: FactSet = EMPTY_FACTS
    target: str = "python"
    policy_default: str = "auto"
    policy_overrides: Mapping[int, str] = field(default_factory=dict)


_RANGE_LINE = re.compile(
    r"^([A-Za-z_][A-Za-z0-9_]*)(\s+vec)?\s+in\s+\[\s*(-?\d+)\s*,\s*(-?\d+)\s*\)$")
_DIVIS_LINE = re.compile(r"^([A-Za-z_][A-Za-z0-9_]*)\s*%\s*(\d+)\s*==\s*0$")
_POLICIES = ("auto", "expanded", "unexpanded")


def parse_facts(text: str) -> FactSet:
    """Facts file: one `var in [lo, hi)` or `var % k == 0` per line."""
    facts = EMPTY_FACTS
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _RANGE_LINE.match(line)
        if m:
            if m.group(2):
                raise ValueError(f"facts line {lineno}: vec marker is not a fact")
            facts = facts.with_range(m.group(1), VarRange(int(m.group(3)), int(m.group(4))))
            continue
        m = _DIVIS_LINE.match(line)
        if m:
            facts = facts.with_divisibility(m.group(1), int(m.group(2)))
            continue
        raise ValueError(f"facts line {lineno}: cannot parse {line!r}")
    return facts


def parse_manifest(text: str) -> Manifest:
    layouts: Dict[str, str] = {}
    vars_: Dict[str, VarDecl] = {}
    facts = EMPTY_FACTS
    target = "python"
    policy_default = "auto"
    overrides: Dict[int, str] = {}
    section = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            if section not in ("layouts", "vars", "facts", "target", "policy"):
                raise ValueError(f"manifest line {lineno}: unknown section {section!r}")
            continue
        if section == "layouts":
            name, sep, dsl_text = line.partition("=")
            if not sep:
                raise ValueError(f"manifest line {lineno}: expected `name = <layout>`")
            name = name.strip()
            if name in layouts:
                raise ValueError(f"manifest line {lineno}: duplicate layout {name!r}")
            layouts[name] = dsl_text.strip()
        elif section == "vars":
            m = _RANGE_LINE.match(line)
            if not m:
                raise ValueError(f"manifest line {lineno}: cannot parse var {line!r}")
            name = m.group(1)
            if name in vars_:
                raise ValueError(f"manifest line {lineno}: duplicate var {name!r}")
            vars_[name] = VarDecl(VarRange(int(m.group(3)), int(m.group(4))),
                                  vec=bool(m.group(2)))
        elif section == "facts":
            m = _RANGE_LINE.match(line)
            if m and not m.group(2):
                facts = facts.with_range(m.group(1),
                                         VarRange(int(m.group(3)), int(m.group(4))))
                continue
            m = _DIVIS_LINE.match(line)
            if not m:
                raise ValueError(f"manifest line {lineno}: cannot parse fact {line!r}")
            facts = facts.with_divisibility(m.group(1), int(m.group(2)))
        elif section == "target":
            target = line
        elif section == "policy":
            key, sep, value = line.partition("=")
            key = key.strip()
            value = value.strip()
            if not sep or value not in _POLICIES:
                raise ValueError(f"manifest line {lineno}: bad policy {line!r}")
            if key == "default":
                policy_default = value
            else:
                overrides[int(key)] = value
        else:
            raise ValueError(f"manifest line {lineno}: content before any section")
    shared = set(layouts) & set(vars_)
    if shared:
        raise ValueError(f"names used for both layouts and vars: {sorted(shared)}")
    return Manifest(layouts, vars_, facts, target, policy_default, overrides)


# ---------------------------------------------------------------------------
# Instantiation.
# ---------------------------------------------------------------------------

def _bind(expr: Expr, manifest: Manifest, loc) -> Expr:
    """Attach declared ranges to variables; unknown names are errors."""
    if isinstance(expr, Var):
        decl = manifest.vars.get(expr.name)
        if decl is None:
            raise UnknownVariable(f"variable {expr.name!r} is not declared", *loc)
        return Var(expr.name, decl.range)
    if isinstance(expr, (Add, Sub, Mul)):
        return type(expr)(_bind(expr.lhs, manifest, loc), _bind(expr.rhs, manifest, loc))
    if isinstance(expr, (FloorDiv, Mod)):
        return type(expr)(_bind(expr.num, manifest, loc), _bind(expr.den, manifest, loc))
    if isinstance(expr, Select):
        return Select(_bind_cond(expr.cond, manifest, loc),
                      _bind(expr.then, manifest, loc),
                      _bind(expr.orelse, manifest, loc))
    if isinstance(expr, Call):
        return Call(expr.intrinsic, tuple(_bind(a, manifest, loc) for a in expr.args))
    return expr


def _bind_cond(cond: Cond, manifest: Manifest, loc) -> Cond:
    if isinstance(cond, Cmp):
        return Cmp(cond.op, _bind(cond.lhs, manifest, loc), _bind(cond.rhs, manifest, loc))
    return And(_bind_cond(cond.lhs, manifest, loc), _bind_cond(cond.rhs, manifest, loc))


def _vec_vars(expr: Expr, manifest: Manifest):
    from .expr import variables

    return {n for n in variables(expr)
            if n in manifest.vars and manifest.vars[n].vec}


def _variant(raw: Expr, facts: FactSet, policy: str) -> Expr:
    if policy == "expanded":
        return simplify(expand(raw), facts)
    if policy == "unexpanded":
        return simplify(raw, facts)
    return best_variant(raw, facts)


class _Instantiator:
    def __init__(self, manifest: Manifest, table: Mapping[str, Layout],
                 profile: TargetProfile):
        self.manifest = manifest
        self.table = table
        self.profile = profile

    def render(self, ph: Placeholder, policy: str) -> str:
        loc = (ph.line, ph.col)
        ast = ph.ast
        if isinstance(ast, RawExpr):
            expr = _variant(_bind(ast.expr, self.manifest, loc),
                            self.manifest.facts, policy)
            return emit_expr(expr, self.profile)
        layout = self.table.get(ast.layout)
        if layout is None:
            raise UnknownLayout(f"layout {ast.layout!r} is not declared", *loc)
        if isinstance(ast, LayoutInv):
            flat = _bind(ast.arg, self.manifest, loc)
            coords = layout.inv(flat)
            rendered = [emit_expr(_variant(as_expr(c), self.manifest.facts, policy),
                                  self.profile) for c in coords]
            return ", ".join(rendered)
        return self._render_apply(ast, layout, policy, loc)

    def _render_apply(self, ast: LayoutApply, layout: Layout, policy: str, loc) -> str:
        dims = layout.dims
        if len(ast.args) != len(dims):
            raise ArityMismatch(
                f"layout {ast.layout!r} has {len(dims)} dimensions, "
                f"placeholder supplies {len(ast.args)} arguments")
        coords = []
        ranges: Dict[str, RangeExpr] = {}
        vector_args = []  # (arg position, vector var names)
        for pos, (arg, extent) in enumerate(zip(ast.args, dims)):
            if isinstance(arg, SliceArg):
                lo = 0 if arg.lo is None else arg.lo
                hi = extent if arg.hi is None else arg.hi
                if not (0 <= lo < hi <= extent):
                    raise OutOfBounds(
                        f"slice [{lo}, {hi}) outside dimension extent {extent}")
                name = f"idx{pos}"
                coords.append(Var(name, VarRange(lo, hi)))
                ranges[name] = RangeExpr(name, lo, hi)
                vector_args.append((pos, {name}))
            else:
                expr = _bind(arg.expr, self.manifest, loc)
                coords.append(expr)
                vec = _vec_vars(expr, self.manifest)
                if vec:
                    vector_args.append((pos, vec))
        # broadcast suffixes are part of the range-emission syntax and only
        # exist under profiles that have one (vector vars print bare elsewhere)
        broadcasts = {}
        if self.profile.arange is not None:
            total = len(vector_args)
            for axis, (_, names) in enumerate(vector_args):
                for name in names:
                    broadcasts[name] = (axis, total)
        raw = as_expr(layout.apply(tuple(coords)))
        expr = _variant(raw, self.manifest.facts, policy)
        return emit_expr(expr, self.profile, ranges=ranges, broadcasts=broadcasts)


def resolve_layouts(manifest: Manifest,
                    extra: Optional[Mapping[str, Layout]] = None) -> Dict[str, Layout]:
    """Parse the manifest's layout declarations into a resolved table.

    Entries in extra take precedence; that is the hook for layouts holding
    custom (non-builtin) permutations, which the DSL cannot express.
    """
    table: Dict[str, Layout] = dict(extra or {})
    for name, src in manifest.layouts.items():
        if name not in table:
            table[name] = parse_layout(src)
    return table


def instantiate(template: Template, manifest: Manifest,
                layouts: Optional[Mapping[str, Layout]] = None) -> str:
    """Splice every placeholder; literal bytes pass through untouched."""
    profile = get_profile(manifest.target)
    table = resolve_layouts(manifest, layouts)
    renderer = _Instantiator(manifest, table, profile)
    parts = []
    ordinal = 0
    for seg in template.segments:
        if isinstance(seg, Literal):
            parts.append(seg.text)
            continue
        ordinal += 1
        policy = manifest.policy_overrides.get(ordinal, manifest.policy_default)
        parts.append(renderer.render(seg, policy))
    return "".join(parts)
