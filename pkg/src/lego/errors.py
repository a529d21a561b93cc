"""Exception types shared across the package."""


class LegoError(Exception):
    """Base class for all errors raised by this package."""


class UnboundVariable(LegoError):
    def __init__(self, name):
        super().__init__(f"unbound variable: {name}")
        self.name = name


class DivisionByZero(LegoError):
    pass


class ArityMismatch(LegoError):
    pass


class OutOfBounds(LegoError):
    pass


class ShapeMismatch(LegoError):
    pass


class BijectivityViolation(LegoError):
    pass


class UnknownBuiltinPerm(LegoError):
    pass


class ExhaustiveBoundExceeded(LegoError):
    pass


class LayoutSyntaxError(LegoError):
    """Layout DSL parse failure, annotated with the offending position."""

    def __init__(self, message, pos=None, text=None):
        loc = f" at position {pos}" if pos is not None else ""
        super().__init__(f"{message}{loc}")
        self.pos = pos
        self.text = text


class TemplateError(LegoError):
    """Base class for template parsing and instantiation failures."""

    def __init__(self, message, line=None, col=None):
        loc = f" (line {line}, col {col})" if line is not None else ""
        super().__init__(f"{message}{loc}")
        self.line = line
        self.col = col


class UnterminatedPlaceholder(TemplateError):
    pass


class PlaceholderSyntax(TemplateError):
    pass


class UnknownLayout(TemplateError):
    pass


class UnknownVariable(TemplateError):
    pass


class SliceOnNonConstantDim(TemplateError):
    pass


class UnsupportedNode(LegoError):
    pass
