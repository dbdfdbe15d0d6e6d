"""The three per-cell languages: reference expressions, templates, filters.

A reference expression selects a cell (current, relative ``(c,r)``, or
absolute ``[c,r]``) and reads one metadata variable from it. Templates
interleave literal text with ``{reference}`` placeholders. Filters are a
small deterministic boolean language (not a JavaScript engine) with
null-safe comparison semantics: missing data never crashes a mapping run,
it just fails the filter.
"""

from __future__ import annotations

import math
import re
import string
from dataclasses import dataclass
from decimal import Decimal
from functools import lru_cache
from typing import Optional, Union
from urllib.parse import quote

from .errors import (
    FilterSyntaxError,
    FilterTypeError,
    RefSyntaxError,
    TemplateSyntaxError,
    UnknownVariableError,
)
from .xlsx import Cell, CellAddress, CellType, Workbook, cell_to_json, render_rich_text

VARIABLE_NAMES = (
    "address", "column", "row", "value", "valueString", "valueNumeric",
    "valueInt", "valueBoolean", "valueFormula", "valueError", "valueRichText",
    "backgroundColor", "foregroundColor", "fontColor", "fontName", "fontSize",
    "json",
)


# ---------------------------------------------------------------------------
# Scalar values
# ---------------------------------------------------------------------------

TEXT = "text"
NUMBER = "number"
INTEGER = "integer"
BOOLEAN = "boolean"


def format_double(v: float) -> str:
    """Deterministic double rendering: shortest round-trip digits, plain
    decimal notation inside [1e-3, 1e15), exponent notation outside."""
    if math.isnan(v):
        return "NaN"
    if math.isinf(v):
        return "INF" if v > 0 else "-INF"
    if v == 0.0:
        return "0"
    magnitude = abs(v)
    if 1e-3 <= magnitude < 1e15:
        s = repr(v)
        return s[:-2] if s.endswith(".0") else s
    d = Decimal(repr(v))
    sign, digits, _ = d.as_tuple()
    digit_str = "".join(map(str, digits)).rstrip("0") or "0"
    mantissa = digit_str[0]
    if len(digit_str) > 1:
        mantissa += "." + digit_str[1:]
    return f"{'-' if sign else ''}{mantissa}e{d.adjusted()}"


@dataclass(frozen=True)
class Scalar:
    """Typed value flowing from cell metadata into term generation."""

    kind: str
    value: Union[str, float, int, bool]

    @staticmethod
    def text(v: str) -> "Scalar":
        return Scalar(TEXT, v)

    @staticmethod
    def number(v: float) -> "Scalar":
        return Scalar(NUMBER, float(v))

    @staticmethod
    def integer(v: int) -> "Scalar":
        return Scalar(INTEGER, int(v))

    @staticmethod
    def boolean(v: bool) -> "Scalar":
        return Scalar(BOOLEAN, bool(v))

    def render(self) -> str:
        if self.kind == TEXT:
            return self.value
        if self.kind == BOOLEAN:
            return "true" if self.value else "false"
        if self.kind == INTEGER:
            return str(self.value)
        return format_double(self.value)


# ---------------------------------------------------------------------------
# Reference expressions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Current:
    pass


@dataclass(frozen=True)
class Relative:
    d_col: int
    d_row: int


@dataclass(frozen=True)
class Absolute:
    col: int
    row: int


CURRENT = Current()
Selector = Union[Current, Relative, Absolute]


@dataclass(frozen=True)
class RefExpr:
    selector: Selector
    variable: str

    def render(self) -> str:
        if isinstance(self.selector, Relative):
            return f"({self.selector.d_col},{self.selector.d_row}).{self.variable}"
        if isinstance(self.selector, Absolute):
            return f"[{self.selector.col},{self.selector.row}].{self.variable}"
        return self.variable


_REF_PATTERN = re.compile(
    r"\s*(?:(?P<open>[(\[])\s*(?P<col>[+-]?\d+)\s*,\s*(?P<row>[+-]?\d+)\s*(?P<close>[)\]])\s*\.)?"
    r"\s*(?P<var>[A-Za-z_][A-Za-z0-9_]*)\s*\Z"
)


def parse_ref(text: str, known_only: bool = True) -> RefExpr:
    """Parse ``(c,r).var`` / ``[c,r].var`` / bare ``var``.

    ``known_only=False`` keeps syntactically valid but unknown variable
    names, so mapping validation can warn instead of failing the parse.
    """
    m = _REF_PATTERN.fullmatch(text)
    if not m:
        raise RefSyntaxError(f"not a reference expression: {text!r}")
    variable = m.group("var")
    if known_only and variable not in VARIABLE_NAMES:
        raise UnknownVariableError(f"unknown variable {variable!r}")
    if m.group("open") is None:
        return RefExpr(CURRENT, variable)
    col, row = int(m.group("col")), int(m.group("row"))
    if m.group("open") == "(":
        if m.group("close") != ")":
            raise RefSyntaxError(f"mismatched selector brackets in {text!r}")
        return RefExpr(Relative(col, row), variable)
    if m.group("close") != "]":
        raise RefSyntaxError(f"mismatched selector brackets in {text!r}")
    if col < 0 or row < 0:
        raise RefSyntaxError(f"absolute selector must be non-negative: {text!r}")
    return RefExpr(Absolute(col, row), variable)


# ---------------------------------------------------------------------------
# Evaluation context and variable readers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EvalContext:
    workbook: Workbook
    sheet_name: str
    cell: CellAddress


def _value_rendering(cell: Cell) -> Optional[str]:
    if cell.cell_type == CellType.TEXT:
        return cell.text
    if cell.cell_type == CellType.NUMERIC:
        return format_double(cell.number)
    if cell.cell_type == CellType.BOOLEAN:
        return "true" if cell.boolean else "false"
    if cell.cell_type == CellType.ERROR:
        return cell.error_code
    if cell.cell_type == CellType.FORMULA:
        if cell.number is not None:
            return format_double(cell.number)
        if cell.text is not None:
            return cell.text
        if cell.boolean is not None:
            return "true" if cell.boolean else "false"
        if cell.error_code is not None:
            return cell.error_code
    return None


def _read_variable(cell: Cell, variable: str) -> Optional[Scalar]:
    if variable == "address":
        return Scalar.text(cell.address.to_a1())
    if variable == "column":
        return Scalar.integer(cell.address.column)
    if variable == "row":
        return Scalar.integer(cell.address.row)
    if variable == "value":
        rendered = _value_rendering(cell)
        return Scalar.text(rendered) if rendered is not None else None
    if variable == "valueString":
        if cell.cell_type in (CellType.TEXT, CellType.FORMULA) and cell.text is not None:
            return Scalar.text(cell.text)
        return None
    if variable == "valueNumeric":
        return Scalar.number(cell.number) if cell.number is not None else None
    if variable == "valueInt":
        return Scalar.integer(int(cell.number)) if cell.number is not None else None
    if variable == "valueBoolean":
        return Scalar.boolean(cell.boolean) if cell.boolean is not None else None
    if variable == "valueFormula":
        if cell.cell_type == CellType.FORMULA:
            return Scalar.text(cell.formula or "")
        return None
    if variable == "valueError":
        return Scalar.text(cell.error_code) if cell.error_code is not None else None
    if variable == "valueRichText":
        if cell.cell_type == CellType.TEXT:
            return Scalar.text(render_rich_text(cell))
        return None
    if variable == "backgroundColor":
        c = cell.style.background_color
        return Scalar.text(c) if c is not None else None
    if variable == "foregroundColor":
        c = cell.style.foreground_color
        return Scalar.text(c) if c is not None else None
    if variable == "fontColor":
        c = cell.style.font_color
        return Scalar.text(c) if c is not None else None
    if variable == "fontName":
        n = cell.style.font_name
        return Scalar.text(n) if n is not None else None
    if variable == "fontSize":
        s = cell.style.font_size
        return Scalar.number(s) if s is not None else None
    if variable == "json":
        return Scalar.text(cell_to_json(cell))
    return None


def eval_ref(ref: RefExpr, ctx: EvalContext) -> Optional[Scalar]:
    """Resolve a reference against the current cell; data gaps are absent,
    never errors (only a missing sheet raises)."""
    if isinstance(ref.selector, Relative):
        target = ctx.cell.shifted(ref.selector.d_col, ref.selector.d_row)
    elif isinstance(ref.selector, Absolute):
        target = CellAddress(ref.selector.col, ref.selector.row)
    else:
        target = ctx.cell
    if target is None:
        return None
    cell = ctx.workbook.cell_at(ctx.sheet_name, target)
    if cell is None:
        return None
    return _read_variable(cell, ref.variable)


# ---------------------------------------------------------------------------
# Templates
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LiteralPart:
    text: str


@dataclass(frozen=True)
class Placeholder:
    ref: RefExpr


TemplatePart = Union[LiteralPart, Placeholder]


@dataclass(frozen=True)
class Template:
    parts: tuple[TemplatePart, ...]

    def render(self) -> str:
        out = []
        for part in self.parts:
            if isinstance(part, LiteralPart):
                out.append(part.text.replace("\\", "\\\\")
                           .replace("{", "\\{").replace("}", "\\}"))
            else:
                out.append("{" + part.ref.render() + "}")
        return "".join(out)


def parse_template(text: str, known_only: bool = True) -> Template:
    parts: list[TemplatePart] = []
    literal: list[str] = []
    i = 0
    n = len(text)
    while i < n:
        c = text[i]
        if c == "\\":
            nxt = text[i + 1] if i + 1 < n else ""
            if nxt in "{}\\":
                literal.append(nxt)
                i += 2
            else:
                literal.append(c)
                i += 1
        elif c == "{":
            close = text.find("}", i + 1)
            if close < 0:
                raise TemplateSyntaxError(f"unbalanced '{{' at offset {i}")
            inner = text[i + 1:close]
            try:
                ref = parse_ref(inner, known_only=known_only)
            except RefSyntaxError as exc:
                raise TemplateSyntaxError(
                    f"bad placeholder {inner!r}: {exc.message}") from exc
            if literal:
                parts.append(LiteralPart("".join(literal)))
                literal = []
            parts.append(Placeholder(ref))
            i = close + 1
        elif c == "}":
            raise TemplateSyntaxError(f"unbalanced '}}' at offset {i}")
        else:
            literal.append(c)
            i += 1
    if literal or not parts:
        parts.append(LiteralPart("".join(literal)))
    return Template(tuple(parts))


def iri_safe_encode(value: str) -> str:
    """Percent-encode every byte outside unreserved ALPHA/DIGIT/-._~."""
    return quote(value, safe="")


def expand_template(template: Template, ctx: EvalContext, iri_safe: bool) -> Optional[str]:
    """Expand placeholders; any absent placeholder makes the result absent."""
    out = []
    for part in template.parts:
        if isinstance(part, LiteralPart):
            out.append(part.text)
            continue
        scalar = eval_ref(part.ref, ctx)
        if scalar is None:
            return None
        rendered = scalar.render()
        out.append(iri_safe_encode(rendered) if iri_safe else rendered)
    return "".join(out)


# ---------------------------------------------------------------------------
# Filters
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FNumber:
    value: float


@dataclass(frozen=True)
class FString:
    value: str


@dataclass(frozen=True)
class FBoolean:
    value: bool


@dataclass(frozen=True)
class FVariable:
    name: str


@dataclass(frozen=True)
class FNot:
    operand: "FilterExpr"


@dataclass(frozen=True)
class FNegate:
    operand: "FilterExpr"


@dataclass(frozen=True)
class FBinary:
    op: str
    left: "FilterExpr"
    right: "FilterExpr"


@dataclass(frozen=True)
class FRegexTest:
    pattern: str
    flags: str
    operand: "FilterExpr"


FilterExpr = Union[FNumber, FString, FBoolean, FVariable, FNot, FNegate,
                   FBinary, FRegexTest]

_COMPARISONS = ("==", "!=", "<=", ">=", "<", ">")


def _is_digit(c: str) -> bool:
    return len(c) == 1 and c in "0123456789"


_MAX_FILTER_DEPTH = 128


class _FilterParser:
    """Recursive descent with precedence ! > */ > +- > comparisons > && > ||."""

    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self.depth = 0

    def parse(self) -> FilterExpr:
        node = self._or()
        self._ws()
        if self.pos != len(self.text):
            self._fail("trailing input")
        return node

    def _fail(self, message: str):
        raise FilterSyntaxError(message, self.pos)

    def _ws(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos] in " \t\r\n":
            self.pos += 1

    def _peek(self, offset: int = 0) -> str:
        i = self.pos + offset
        return self.text[i] if i < len(self.text) else ""

    def _accept(self, token: str) -> bool:
        self._ws()
        if self.text.startswith(token, self.pos):
            self.pos += len(token)
            return True
        return False

    def _or(self) -> FilterExpr:
        node = self._and()
        while self._accept("||"):
            node = FBinary("||", node, self._and())
        return node

    def _and(self) -> FilterExpr:
        node = self._cmp()
        while self._accept("&&"):
            node = FBinary("&&", node, self._cmp())
        return node

    def _cmp(self) -> FilterExpr:
        node = self._add()
        self._ws()
        for op in _COMPARISONS:
            if self.text.startswith(op, self.pos):
                self.pos += len(op)
                return FBinary(op, node, self._add())
        return node

    def _add(self) -> FilterExpr:
        node = self._mul()
        while True:
            self._ws()
            c = self._peek()
            if c and c in "+-":
                self.pos += 1
                node = FBinary(c, node, self._mul())
            else:
                return node

    def _mul(self) -> FilterExpr:
        # A '/' here is division; regex literals only occur in operand
        # position and are recognized in _primary.
        node = self._unary()
        while True:
            self._ws()
            c = self._peek()
            if c and c in "*/":
                self.pos += 1
                node = FBinary(c, node, self._unary())
            else:
                return node

    def _unary(self) -> FilterExpr:
        self.depth += 1
        if self.depth > _MAX_FILTER_DEPTH:
            self._fail(f"expression nests deeper than {_MAX_FILTER_DEPTH} levels")
        try:
            self._ws()
            if self._peek() == "!" and self._peek(1) != "=":
                self.pos += 1
                return FNot(self._unary())
            if self._peek() == "-":
                self.pos += 1
                return FNegate(self._unary())
            return self._primary()
        finally:
            self.depth -= 1

    def _primary(self) -> FilterExpr:
        self._ws()
        c = self._peek()
        if c == "":
            self._fail("unexpected end of filter")
        if c == "(":
            self.pos += 1
            node = self._or()
            if not self._accept(")"):
                self._fail("expected ')'")
            return node
        if c == "/":
            return self._regex_test()
        if c in "'\"":
            return FString(self._string(c))
        if _is_digit(c) or (c == "." and _is_digit(self._peek(1))):
            return FNumber(self._number())
        if (c in string.ascii_letters and len(c) == 1) or c == "_":
            name = self._identifier()
            if name == "true":
                return FBoolean(True)
            if name == "false":
                return FBoolean(False)
            if name not in VARIABLE_NAMES:
                self._fail(f"unknown variable {name!r}")
            return FVariable(name)
        self._fail(f"unexpected character {c!r}")

    def _regex_test(self) -> FilterExpr:
        start = self.pos
        self.pos += 1
        pattern_chars = []
        while True:
            c = self._peek()
            if c == "":
                self.pos = start
                self._fail("unterminated regex literal")
            if c == "\\":
                pattern_chars.append(c)
                pattern_chars.append(self._peek(1))
                self.pos += 2
                continue
            if c == "/":
                self.pos += 1
                break
            pattern_chars.append(c)
            self.pos += 1
        flags = ""
        while self._peek() and self._peek() in string.ascii_letters:
            flags += self._peek()
            self.pos += 1
        if any(f != "i" for f in flags):
            self.pos = start
            self._fail(f"unsupported regex flags {flags!r} (only 'i')")
        pattern = "".join(pattern_chars)
        try:
            _compile_regex(pattern, flags)
        except re.error as exc:
            self.pos = start
            self._fail(f"bad regex /{pattern}/: {exc}")
        if not self._accept(".test("):
            self._fail("expected '.test(' after regex literal")
        operand = self._or()
        if not self._accept(")"):
            self._fail("expected ')' to close .test(")
        return FRegexTest(pattern, flags, operand)

    def _string(self, quote_char: str) -> str:
        self.pos += 1
        out = []
        while True:
            c = self._peek()
            if c == "":
                self._fail("unterminated string literal")
            if c == "\\":
                nxt = self._peek(1)
                if nxt == "":
                    self._fail("trailing backslash in string")
                out.append(nxt)
                self.pos += 2
                continue
            if c == quote_char:
                self.pos += 1
                return "".join(out)
            out.append(c)
            self.pos += 1

    def _number(self) -> float:
        m = re.match(r"\d+(\.\d+)?|\.\d+", self.text[self.pos:])
        self.pos += m.end()
        return float(m.group(0))

    def _identifier(self) -> str:
        m = re.match(r"[A-Za-z_][A-Za-z0-9_]*", self.text[self.pos:])
        self.pos += m.end()
        return m.group(0)


def parse_filter(text: str) -> FilterExpr:
    return _FilterParser(text).parse()


@lru_cache(maxsize=256)
def _compile_regex(pattern: str, flags: str):
    return re.compile(pattern, re.IGNORECASE if "i" in flags else 0)


def _numeric(scalar: Optional[Scalar]) -> Optional[float]:
    if scalar is not None and scalar.kind in (NUMBER, INTEGER):
        return float(scalar.value)
    return None


def _eval_node(node: FilterExpr, ctx: EvalContext) -> Optional[Scalar]:
    if isinstance(node, FNumber):
        return Scalar.number(node.value)
    if isinstance(node, FString):
        return Scalar.text(node.value)
    if isinstance(node, FBoolean):
        return Scalar.boolean(node.value)
    if isinstance(node, FVariable):
        return eval_ref(RefExpr(CURRENT, node.name), ctx)
    if isinstance(node, FNot):
        v = _eval_node(node.operand, ctx)
        if v is None or v.kind != BOOLEAN:
            return None
        return Scalar.boolean(not v.value)
    if isinstance(node, FNegate):
        v = _numeric(_eval_node(node.operand, ctx))
        return Scalar.number(-v) if v is not None else None
    if isinstance(node, FRegexTest):
        v = _eval_node(node.operand, ctx)
        if v is None:
            return Scalar.boolean(False)
        regex = _compile_regex(node.pattern, node.flags)
        return Scalar.boolean(regex.search(v.render()) is not None)
    if isinstance(node, FBinary):
        return _eval_binary(node, ctx)
    raise TypeError(f"unknown filter node {node!r}")


def _eval_binary(node: FBinary, ctx: EvalContext) -> Optional[Scalar]:
    op = node.op
    if op in ("&&", "||"):
        # Three-valued logic; unknown operands stay unknown unless the
        # other side decides the result.
        left = _eval_node(node.left, ctx)
        right = _eval_node(node.right, ctx)
        lv = left.value if left is not None and left.kind == BOOLEAN else None
        rv = right.value if right is not None and right.kind == BOOLEAN else None
        if op == "&&":
            if lv is False or rv is False:
                return Scalar.boolean(False)
            if lv is True and rv is True:
                return Scalar.boolean(True)
            return None
        if lv is True or rv is True:
            return Scalar.boolean(True)
        if lv is False and rv is False:
            return Scalar.boolean(False)
        return None

    left = _eval_node(node.left, ctx)
    right = _eval_node(node.right, ctx)

    if op in ("+", "-", "*", "/"):
        if left is None or right is None:
            return None
        if op == "+" and left.kind == TEXT and right.kind == TEXT:
            return Scalar.text(left.value + right.value)
        ln, rn = _numeric(left), _numeric(right)
        if ln is None or rn is None:
            return None
        if op == "+":
            return Scalar.number(ln + rn)
        if op == "-":
            return Scalar.number(ln - rn)
        if op == "*":
            return Scalar.number(ln * rn)
        if rn == 0.0:
            return None
        return Scalar.number(ln / rn)

    # Comparisons: anything touching null is false.
    if left is None or right is None:
        return Scalar.boolean(False)
    if op in ("==", "!="):
        equal = _scalars_equal(left, right)
        if equal is None:
            return Scalar.boolean(op == "!=")
        return Scalar.boolean(equal if op == "==" else not equal)
    ln, rn = _numeric(left), _numeric(right)
    if ln is not None and rn is not None:
        lv, rv = ln, rn
    elif left.kind == TEXT and right.kind == TEXT:
        lv, rv = left.value, right.value
    else:
        return Scalar.boolean(False)
    if op == "<":
        return Scalar.boolean(lv < rv)
    if op == "<=":
        return Scalar.boolean(lv <= rv)
    if op == ">":
        return Scalar.boolean(lv > rv)
    return Scalar.boolean(lv >= rv)


def _scalars_equal(left: Scalar, right: Scalar) -> Optional[bool]:
    """Equality within one kind family; None marks a kind mismatch."""
    ln, rn = _numeric(left), _numeric(right)
    if ln is not None and rn is not None:
        return ln == rn
    if left.kind == TEXT and right.kind == TEXT:
        return left.value == right.value
    if left.kind == BOOLEAN and right.kind == BOOLEAN:
        return left.value == right.value
    return None


def eval_filter(expr: FilterExpr, ctx: EvalContext) -> bool:
    """Evaluate to the root boolean; a null root is false, any other
    non-boolean root is a type error."""
    v = _eval_node(expr, ctx)
    if v is None:
        return False
    if v.kind == BOOLEAN:
        return bool(v.value)
    raise FilterTypeError(f"filter evaluated to non-boolean {v.kind} value")
