"""Parser for the textual layout DSL.

Grammar (whitespace-insensitive, dot-chained like the library API):

    layout   := group ('.' 'OrderBy' '(' perms ')')*
    group    := 'GroupBy' '(' shapes ')'
              | 'TileBy' '(' shapes ')'
              | 'TileOrderBy' '(' perms ')'
              | 'ExpandBy' '(' shape ',' shape ',' layout ')'
    perm     := 'RegP' '(' shape ',' shape ')'
              | 'GenP' '(' shape ',' NAME ')'
              | 'Row' '(' ints-or-shape ')' | 'Col' '(' ints-or-shape ')'
    shape    := '[' INT (',' INT)* ']'

GenP refers to built-in permutations by name (antidiag, rev1d, rev2d,
identity, plus anything registered through register_builtin_perm); the DSL
itself carries no code. Validation runs right after parsing and failures are
fatal diagnostics.
"""

from __future__ import annotations

import re

from .errors import (
    BijectivityViolation,
    LayoutSyntaxError,
    ShapeMismatch,
)
from .layout import (
    DEFAULT_VALIDATION_BOUND,
    ExpandBy,
    GroupBy,
    Layout,
    RegP,
    col,
    resolve_builtin_perm,
    row,
    tile_by,
    tile_order_by,
    validate,
)

_TOKEN_RE = re.compile(r"(?P<name>[A-Za-z_][A-Za-z0-9_]*)|(?P<int>\d+)|(?P<punct>[()\[\],.])")


def _tokenize(text):
    toks = []
    pos = 0
    n = len(text)
    while pos < n:
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise LayoutSyntaxError(f"unexpected character {text[pos]!r}", pos, text)
        if m.lastgroup == "name":
            toks.append(("name", m.group(), pos))
        elif m.lastgroup == "int":
            toks.append(("int", int(m.group()), pos))
        else:
            toks.append((m.group(), m.group(), pos))
        pos = m.end()
    toks.append(("end", None, n))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def advance(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, kind, value=None):
        tok = self.advance()
        if tok[0] != kind or (value is not None and tok[1] != value):
            want = value if value is not None else kind
            raise LayoutSyntaxError(f"expected {want!r}, found {tok[1]!r}", tok[2], self.text)
        return tok

    def parse(self) -> Layout:
        node = self.parse_chain()
        tok = self.peek()
        if tok[0] != "end":
            raise LayoutSyntaxError(f"trailing input starting at {tok[1]!r}", tok[2], self.text)
        return node

    def parse_chain(self) -> Layout:
        node = self.parse_primary()
        while self.peek()[0] == ".":
            dot = self.advance()
            name = self.expect("name")
            if name[1] != "OrderBy":
                raise LayoutSyntaxError(
                    f"only OrderBy can be dot-chained, found {name[1]!r}", name[2], self.text)
            if isinstance(node, ExpandBy):
                raise LayoutSyntaxError(
                    "OrderBy cannot be chained onto ExpandBy", dot[2], self.text)
            self.expect("(")
            perms = self.parse_perms()
            self.expect(")")
            node = node.order_by(*perms)
        return node

    def parse_primary(self) -> Layout:
        tok = self.expect("name")
        kind = tok[1]
        if kind == "GroupBy":
            self.expect("(")
            shapes = self.parse_shapes()
            self.expect(")")
            return GroupBy(*shapes)
        if kind == "TileBy":
            self.expect("(")
            shapes = self.parse_shapes()
            self.expect(")")
            return tile_by(*shapes)
        if kind == "TileOrderBy":
            self.expect("(")
            perms = self.parse_perms()
            self.expect(")")
            return tile_order_by(*perms)
        if kind == "ExpandBy":
            self.expect("(")
            physical = self.parse_shape()
            self.expect(",")
            expanded = self.parse_shape()
            self.expect(",")
            inner = self.parse_chain()
            self.expect(")")
            if not isinstance(inner, GroupBy):
                raise LayoutSyntaxError(
                    "ExpandBy wraps a GroupBy chain, not another ExpandBy", tok[2], self.text)
            return ExpandBy(physical, expanded, inner)
        raise LayoutSyntaxError(f"unknown layout construct {kind!r}", tok[2], self.text)

    def parse_shapes(self):
        shapes = [self.parse_shape()]
        while self.peek()[0] == ",":
            self.advance()
            shapes.append(self.parse_shape())
        return shapes

    def parse_shape(self):
        self.expect("[")
        ints = [self.expect("int")[1]]
        while self.peek()[0] == ",":
            self.advance()
            ints.append(self.expect("int")[1])
        self.expect("]")
        return ints

    def parse_ints_or_shape(self):
        if self.peek()[0] == "[":
            return self.parse_shape()
        ints = [self.expect("int")[1]]
        while self.peek()[0] == ",":
            self.advance()
            ints.append(self.expect("int")[1])
        return ints

    def parse_perms(self):
        perms = [self.parse_perm()]
        while self.peek()[0] == ",":
            self.advance()
            perms.append(self.parse_perm())
        return perms

    def parse_perm(self):
        tok = self.expect("name")
        kind = tok[1]
        self.expect("(")
        if kind == "RegP":
            shape = self.parse_shape()
            self.expect(",")
            sigma = self.parse_shape()
            self.expect(")")
            return RegP(tuple(shape), tuple(sigma))
        if kind == "GenP":
            shape = self.parse_shape()
            self.expect(",")
            name = self.expect("name")[1]
            self.expect(")")
            return resolve_builtin_perm(name, tuple(shape))
        if kind == "Row":
            args = self.parse_ints_or_shape()
            self.expect(")")
            return row(args)
        if kind == "Col":
            args = self.parse_ints_or_shape()
            self.expect(")")
            return col(args)
        raise LayoutSyntaxError(f"unknown permutation {kind!r}", tok[2], self.text)


def ensure_valid(layout: Layout, bound: int = DEFAULT_VALIDATION_BOUND) -> Layout:
    """Run full validation and raise on the first failure."""
    report = validate(layout, bound)
    for check in report.failures:
        if "BijectivityViolation" in check.detail or check.name.startswith("genp-"):
            raise BijectivityViolation(f"{check.name}: {check.detail}")
        raise ShapeMismatch(f"{check.name}: {check.detail}")
    return layout


def parse_layout(text: str, *, bound: int = DEFAULT_VALIDATION_BOUND,
                 validate_layout: bool = True) -> Layout:
    """Parse a layout expression; validation failures are parse-time errors."""
    node = _Parser(text).parse()
    if validate_layout:
        ensure_valid(node, bound)
    return node
