"""Command-line front end.

Exit codes: 0 success, 1 usage error (including malformed layout text),
2 out-of-range input, 3 check failure, 4 template/manifest resolution error.
Diagnostics go to stderr; results go to stdout unless --out is given.
"""

from __future__ import annotations

import argparse
import sys
from itertools import product as iter_product
from pathlib import Path

from .dsl import parse_layout
from .emit import emit_expr, get_profile
from .errors import (
    ArityMismatch,
    ExhaustiveBoundExceeded,
    LegoError,
    OutOfBounds,
    TemplateError,
)
from .expr import as_expr
from .layout import ExpandBy, index_vars, validate
from .simplify import EMPTY_FACTS
from .template import _variant, instantiate, parse_facts, parse_manifest, parse_template

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_RANGE = 2
EXIT_CHECK = 3
EXIT_RESOLVE = 4

DEFAULT_CHECK_BOUND = 1_000_000


class _ArgumentParser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors; the CLI contract reserves 2 for
    # out-of-range inputs, so usage failures are remapped to 1
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _add_layout_args(p):
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--layout", help="inline layout expression")
    group.add_argument("--layout-file", help="file holding a layout expression")
    p.add_argument("--out", help="write the result here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(prog="lego", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("apply", help="map a logical index to its flat position")
    _add_layout_args(p)
    p.add_argument("index", help="comma-separated logical coordinates, e.g. 4,1")

    p = sub.add_parser("inv", help="map a flat position back to its logical index")
    _add_layout_args(p)
    p.add_argument("flat", type=int, help="flat physical position")

    p = sub.add_parser("check", help="exhaustively verify the layout is a bijection")
    _add_layout_args(p)
    p.add_argument("--bound", type=int, default=DEFAULT_CHECK_BOUND,
                   help="largest element count checked exhaustively")

    p = sub.add_parser("table", help="print the full logical -> physical table")
    _add_layout_args(p)
    p.add_argument("--bound", type=int, default=DEFAULT_CHECK_BOUND)

    p = sub.add_parser("emit", help="print the symbolic index expression")
    _add_layout_args(p)
    p.add_argument("vars", help="comma-separated index variable names, e.g. i,j")
    p.add_argument("--target", default="python", choices=["c", "python", "triton"])
    p.add_argument("--facts", help="facts file: `var in [lo, hi)` or `var %% k == 0` lines")
    p.add_argument("--policy", default="auto", choices=["auto", "expanded", "unexpanded"])

    p = sub.add_parser("instantiate", help="splice layouts into a code template")
    p.add_argument("template", help="template file with {{ }} placeholders")
    p.add_argument("manifest", help="manifest file declaring layouts and variables")
    p.add_argument("--out", help="write output here instead of stdout")
    return parser


def _load_layout(args):
    if args.layout is not None:
        text = args.layout
    else:
        text = Path(args.layout_file).read_text(encoding="utf-8")
    return parse_layout(text)


def _parse_index(text):
    try:
        return tuple(int(part) for part in text.split(","))
    except ValueError:
        raise OutOfBounds(f"cannot parse index {text!r}") from None


def _write_result(args, text):
    if getattr(args, "out", None):
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def cmd_apply(args) -> int:
    layout = _load_layout(args)
    pos = layout.apply(_parse_index(args.index))
    _write_result(args, f"{-1 if pos is None else pos}\n")
    return EXIT_OK


def cmd_inv(args) -> int:
    layout = _load_layout(args)
    coords = layout.inv(args.flat)
    _write_result(args, ",".join(str(c) for c in coords) + "\n")
    return EXIT_OK


def _iter_space(dims):
    return iter_product(*(range(n) for n in dims))


def cmd_check(args) -> int:
    layout = _load_layout(args)
    report = validate(layout, bound=args.bound)
    if not report.ok:
        first = report.failures[0]
        print(f"check failed: {first.name}: {first.detail}", file=sys.stderr)
        return EXIT_CHECK
    total = layout.size
    logical = 1
    for n in layout.dims:
        logical *= n
    if logical > args.bound:
        raise ExhaustiveBoundExceeded(
            f"{logical} elements exceeds the exhaustive bound {args.bound}")
    if isinstance(layout, ExpandBy):
        seen = {}
        for idx in _iter_space(layout.dims):
            pos = layout.apply(idx)
            if pos is None:
                continue
            if not 0 <= pos < layout.size or pos in seen:
                clash = seen.get(pos)
                print(f"check failed: apply{idx} = {pos}"
                      + (f" collides with apply{clash}" if clash else " out of range"),
                      file=sys.stderr)
                return EXIT_CHECK
            seen[pos] = idx
            back = layout.inv(pos)
            if tuple(back) != idx:
                print(f"check failed: inv(apply{idx}) = {tuple(back)}", file=sys.stderr)
                return EXIT_CHECK
        if len(seen) != layout.size:
            print(f"check failed: {len(seen)} unmasked positions, expected {layout.size}",
                  file=sys.stderr)
            return EXIT_CHECK
        _write_result(args, f"check passed: {logical} points ({layout.size} unmasked)\n")
        return EXIT_OK
    seen = {}
    for idx in _iter_space(layout.dims):
        pos = layout.apply(idx)
        if not 0 <= pos < total or pos in seen:
            clash = seen.get(pos)
            print(f"check failed: apply{idx} = {pos}"
                  + (f" collides with apply{clash}" if clash else " out of range"),
                  file=sys.stderr)
            return EXIT_CHECK
        seen[pos] = idx
        back = layout.inv(pos)
        if tuple(back) != idx:
            print(f"check failed: inv({pos}) = {tuple(back)}, expected {idx}",
                  file=sys.stderr)
            return EXIT_CHECK
    _write_result(args, f"check passed: {total} points\n")
    return EXIT_OK


def cmd_table(args) -> int:
    layout = _load_layout(args)
    logical = 1
    for n in layout.dims:
        logical *= n
    if logical > args.bound:
        raise ExhaustiveBoundExceeded(
            f"{logical} elements exceeds the exhaustive bound {args.bound}")
    lines = []
    for idx in _iter_space(layout.dims):
        pos = layout.apply(idx)
        if pos is None:
            pos = -1
        lines.append(f"{','.join(str(c) for c in idx)} -> {pos}")
    _write_result(args, "\n".join(lines) + "\n")
    return EXIT_OK


def cmd_emit(args) -> int:
    layout = _load_layout(args)
    names = [n.strip() for n in args.vars.split(",")]
    if len(names) != len(layout.dims):
        raise ArityMismatch(
            f"{len(names)} variables for a {len(layout.dims)}-dimensional layout")
    facts = EMPTY_FACTS
    if args.facts:
        facts = parse_facts(Path(args.facts).read_text(encoding="utf-8"))
    coords = index_vars(names, layout.dims)
    raw = as_expr(layout.apply(coords))
    expr = _variant(raw, facts, args.policy)
    _write_result(args, emit_expr(expr, get_profile(args.target)) + "\n")
    return EXIT_OK


def cmd_instantiate(args) -> int:
    try:
        template_text = Path(args.template).read_text(encoding="utf-8")
        manifest_text = Path(args.manifest).read_text(encoding="utf-8")
    except OSError as exc:
        print(f"lego: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        template = parse_template(template_text)
        manifest = parse_manifest(manifest_text)
        rendered = instantiate(template, manifest)
    except (TemplateError, LegoError, ValueError) as exc:
        print(f"lego: {args.template}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RESOLVE
    if args.out:
        Path(args.out).write_text(rendered, encoding="utf-8")
    else:
        sys.stdout.write(rendered)
    return EXIT_OK


_COMMANDS = {
    "apply": cmd_apply,
    "inv": cmd_inv,
    "check": cmd_check,
    "table": cmd_table,
    "emit": cmd_emit,
    "instantiate": cmd_instantiate,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return _COMMANDS[args.command](args)
    except (OutOfBounds, ArityMismatch) as exc:
        print(f"lego: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RANGE
    except (LegoError, ValueError, OSError) as exc:
        print(f"lego: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
