"""XLSX reader exposing the per-cell metadata the mapping languages consume.

Reads OOXML SpreadsheetML directly (worksheets, shared strings with rich
runs, styles, theme) so cell appearance resolves to concrete ``#rrggbb``
values. Only reading is supported; formulas are never evaluated — a formula
cell exposes its text plus whatever cached result the file stores.
"""

from __future__ import annotations

import io
import json
import re
import zipfile
from dataclasses import dataclass, field
from enum import Enum
from posixpath import normpath
from typing import Optional
from xml.etree import ElementTree

from .errors import (
    AddressSyntaxError,
    CellTypeError,
    RangeSyntaxError,
    SheetNotFoundError,
    WorkbookFormatError,
    WorkbookIOError,
)

_MAIN_NS = "http://schemas.openxmlformats.org/spreadsheetml/2006/main"
_REL_ATTR = "{http://schemas.openxmlformats.org/officeDocument/2006/relationships}id"
_DRAW_NS = "http://schemas.openxmlformats.org/drawingml/2006/main"

_OLE_MAGIC = b"\xd0\xcf\x11\xe0\xa1\xb1\x1a\xe1"


def _q(tag: str) -> str:
    return f"{{{_MAIN_NS}}}{tag}"


def _qd(tag: str) -> str:
    return f"{{{_DRAW_NS}}}{tag}"


# ---------------------------------------------------------------------------
# Addresses and ranges
# ---------------------------------------------------------------------------

_A1_PATTERN = re.compile(r"([A-Za-z]+)([1-9][0-9]*)")


def column_letters(index: int) -> str:
    """0-based column index to bijective base-26 letters (0 -> 'A')."""
    if index < 0:
        raise ValueError("column index must be >= 0")
    letters = ""
    n = index + 1
    while n > 0:
        n, rem = divmod(n - 1, 26)
        letters = chr(ord("A") + rem) + letters
    return letters


def column_index(letters: str) -> int:
    n = 0
    for c in letters.upper():
        n = n * 26 + (ord(c) - ord("A") + 1)
    return n - 1


@dataclass(frozen=True, order=True)
class CellAddress:
    """0-based (column, row) position; A1 text form is bijective with it."""

    column: int
    row: int

    def to_a1(self) -> str:
        return f"{column_letters(self.column)}{self.row + 1}"

    def shifted(self, d_col: int, d_row: int) -> Optional["CellAddress"]:
        col, row = self.column + d_col, self.row + d_row
        if col < 0 or row < 0:
            return None
        return CellAddress(col, row)


def parse_a1(text: str) -> CellAddress:
    m = _A1_PATTERN.fullmatch(text)
    if not m:
        raise AddressSyntaxError(f"not an A1 cell address: {text!r}")
    return CellAddress(column_index(m.group(1)), int(m.group(2)) - 1)


@dataclass(frozen=True)
class CellRange:
    """Inclusive rectangular range with normalized corners."""

    start: CellAddress
    end: CellAddress

    def __post_init__(self):
        s, e = self.start, self.end
        object.__setattr__(self, "start",
                           CellAddress(min(s.column, e.column), min(s.row, e.row)))
        object.__setattr__(self, "end",
                           CellAddress(max(s.column, e.column), max(s.row, e.row)))

    def __contains__(self, addr: CellAddress) -> bool:
        return (self.start.column <= addr.column <= self.end.column
                and self.start.row <= addr.row <= self.end.row)

    def iter_row_major(self):
        """Left-to-right, then top-to-bottom."""
        for row in range(self.start.row, self.end.row + 1):
            for col in range(self.start.column, self.end.column + 1):
                yield CellAddress(col, row)

    def to_a1(self) -> str:
        if self.start == self.end:
            return self.start.to_a1()
        return f"{self.start.to_a1()}:{self.end.to_a1()}"


def parse_range(text: str) -> CellRange:
    parts = text.split(":")
    if len(parts) not in (1, 2):
        raise RangeSyntaxError(f"not a cell range: {text!r}")
    try:
        start = parse_a1(parts[0])
        end = parse_a1(parts[-1])
    except AddressSyntaxError as exc:
        raise RangeSyntaxError(f"not a cell range: {text!r} ({exc.message})") from exc
    return CellRange(start, end)


# ---------------------------------------------------------------------------
# Cell model
# ---------------------------------------------------------------------------

class CellType(str, Enum):
    BLANK = "Blank"
    TEXT = "Text"
    NUMERIC = "Numeric"
    BOOLEAN = "Boolean"
    FORMULA = "Formula"
    ERROR = "Error"


@dataclass(frozen=True)
class CellStyle:
    background_color: Optional[str] = None
    foreground_color: Optional[str] = None
    font_color: Optional[str] = None
    font_name: Optional[str] = None
    font_size: Optional[float] = None


EMPTY_STYLE = CellStyle()


@dataclass(frozen=True)
class RichRun:
    text: str
    bold: bool = False
    italic: bool = False
    underline: bool = False
    strike: bool = False
    font_name: Optional[str] = None
    font_color: Optional[str] = None
    font_size: Optional[float] = None


@dataclass(frozen=True)
class Cell:
    """One cell plus all its retrievable metadata.

    For formula cells the value slots (``text``/``number``/``boolean``/
    ``error_code``) hold the cached result stored in the file, if any.
    """

    address: CellAddress
    sheet: str
    cell_type: CellType
    text: Optional[str] = None
    number: Optional[float] = None
    boolean: Optional[bool] = None
    formula: Optional[str] = None
    error_code: Optional[str] = None
    style: CellStyle = EMPTY_STYLE
    rich_runs: Optional[tuple[RichRun, ...]] = None


@dataclass
class Sheet:
    name: str
    cells: dict[CellAddress, Cell] = field(default_factory=dict)


class Workbook:
    def __init__(self, sheets: list[Sheet]):
        self._sheets = sheets
        self._by_name = {}
        for sheet in sheets:
            if sheet.name in self._by_name:
                raise WorkbookFormatError(f"duplicate sheet name {sheet.name!r}")
            self._by_name[sheet.name] = sheet

    @property
    def sheets(self) -> list[Sheet]:
        return self._sheets

    def sheet_names(self) -> list[str]:
        return [s.name for s in self._sheets]

    def sheet(self, name: str) -> Sheet:
        try:
            return self._by_name[name]
        except KeyError:
            raise SheetNotFoundError(f"no sheet named {name!r}") from None

    def cell_at(self, sheet_name: str, addr: CellAddress) -> Optional[Cell]:
        return self.sheet(sheet_name).cells.get(addr)


# ---------------------------------------------------------------------------
# Color resolution
# ---------------------------------------------------------------------------

# Legacy indexed palette (ECMA-376 18.8.27); 64/65 are system colors with no
# fixed RGB and resolve to "absent".
_INDEXED_COLORS = [
    "000000", "FFFFFF", "FF0000", "00FF00", "0000FF", "FFFF00", "FF00FF", "00FFFF",
    "000000", "FFFFFF", "FF0000", "00FF00", "0000FF", "FFFF00", "FF00FF", "00FFFF",
    "800000", "008000", "000080", "808000", "800080", "008080", "C0C0C0", "808080",
    "9999FF", "993366", "FFFFCC", "CCFFFF", "660066", "FF8080", "0066CC", "CCCCFF",
    "000080", "FF00FF", "FFFF00", "00FFFF", "800080", "800000", "008080", "0000FF",
    "00CCFF", "CCFFFF", "CCFFCC", "FFFF99", "99CCFF", "FF99CC", "CC99FF", "FFCC99",
    "3366FF", "33CCCC", "99CC00", "FFCC00", "FF9900", "FF6600", "666699", "969696",
    "003366", "339966", "003300", "333300", "993300", "993366", "333399", "333333",
]

# Theme slot order as Excel indexes it (lt1/dk1 and lt2/dk2 are swapped
# relative to the clrScheme element order).
_THEME_ORDER = ["lt1", "dk1", "lt2", "dk2", "accent1", "accent2", "accent3",
                "accent4", "accent5", "accent6", "hlink", "folHlink"]


def _apply_tint(rgb: str, tint: float) -> str:
    out = []
    for i in (0, 2, 4):
        c = int(rgb[i:i + 2], 16)
        if tint < 0:
            c = c * (1.0 + tint)
        elif tint > 0:
            c = c * (1.0 - tint) + 255.0 * tint
        out.append(max(0, min(255, int(c + 0.5))))
    return "".join(f"{c:02X}" for c in out)


_HEX6 = re.compile(r"[0-9A-Fa-f]{6}\Z")


def _resolve_color(elem, theme: list[Optional[str]]) -> Optional[str]:
    """Color element to '#rrggbb'; anything unresolvable is absent."""
    if elem is None:
        return None
    if elem.get("auto") in ("1", "true"):
        return None
    rgb = elem.get("rgb")
    if rgb is not None:
        rgb = rgb[-6:]
        return "#" + rgb.lower() if _HEX6.fullmatch(rgb) else None
    indexed = elem.get("indexed")
    if indexed is not None and indexed.isdigit():
        idx = int(indexed)
        if 0 <= idx < len(_INDEXED_COLORS):
            return "#" + _INDEXED_COLORS[idx].lower()
        return None
    theme_idx = elem.get("theme")
    if theme_idx is not None and theme_idx.isdigit():
        idx = int(theme_idx)
        if 0 <= idx < len(theme) and theme[idx] is not None:
            rgb = theme[idx]
            try:
                tint = float(elem.get("tint", "0"))
            except ValueError:
                return None
            if tint:
                rgb = _apply_tint(rgb, tint)
            return "#" + rgb.lower()
        return None
    return None


# ---------------------------------------------------------------------------
# Workbook loading
# ---------------------------------------------------------------------------

@dataclass
class _FontSpec:
    name: Optional[str] = None
    size: Optional[float] = None
    color: Optional[str] = None
    bold: bool = False
    italic: bool = False
    underline: bool = False
    strike: bool = False


def open_workbook(path) -> Workbook:
    """Load an .xlsx file. E_IO for unreadable paths, E_FORMAT for bad data."""
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise WorkbookIOError(f"cannot read workbook {path!s}: {exc}") from exc
    return open_workbook_bytes(data)


def open_workbook_bytes(data: bytes) -> Workbook:
    if data[:8] == _OLE_MAGIC:
        raise WorkbookFormatError("legacy .xls (OLE) files are not supported")
    try:
        archive = zipfile.ZipFile(io.BytesIO(data))
    except Exception as exc:
        raise WorkbookFormatError(f"not a ZIP-packaged workbook: {exc}") from exc
    with archive:
        try:
            return _Loader(archive).load()
        except WorkbookFormatError:
            raise
        except Exception as exc:
            # Workbook bytes are untrusted input (service uploads); whatever
            # breaks mid-load — bad zip streams, unsupported compression,
            # garbage attribute values — is one structured format error.
            raise WorkbookFormatError(f"malformed workbook content: {exc}") from exc


class _Loader:
    def __init__(self, archive: zipfile.ZipFile):
        self.archive = archive
        self.names = set(archive.namelist())

    def _xml(self, name: str) -> Optional[ElementTree.Element]:
        if name not in self.names:
            return None
        try:
            return ElementTree.fromstring(self.archive.read(name))
        except ElementTree.ParseError as exc:
            raise WorkbookFormatError(f"malformed XML in {name}: {exc}") from exc

    def load(self) -> Workbook:
        workbook_xml = self._xml("xl/workbook.xml")
        if workbook_xml is None:
            raise WorkbookFormatError("missing xl/workbook.xml part")
        rels = self._relationships()
        self.theme = self._theme(rels)
        self.shared = self._shared_strings()
        self.styles = self._styles()

        sheets: list[Sheet] = []
        sheets_el = workbook_xml.find(_q("sheets"))
        if sheets_el is None:
            raise WorkbookFormatError("workbook has no sheet list")
        for sheet_el in sheets_el.findall(_q("sheet")):
            name = sheet_el.get("name", "")
            rid = sheet_el.get(_REL_ATTR)
            target = rels.get(rid)
            if target is None:
                raise WorkbookFormatError(f"sheet {name!r} has no worksheet part")
            sheet_xml = self._xml(target)
            if sheet_xml is None:
                raise WorkbookFormatError(f"missing worksheet part {target}")
            sheets.append(self._load_sheet(name, sheet_xml))
        return Workbook(sheets)

    def _relationships(self) -> dict[str, str]:
        rels_xml = self._xml("xl/_rels/workbook.xml.rels")
        out: dict[str, str] = {}
        if rels_xml is None:
            return out
        for rel in rels_xml:
            rid = rel.get("Id")
            target = rel.get("Target", "")
            if target.startswith("/"):
                resolved = target.lstrip("/")
            else:
                resolved = normpath(f"xl/{target}")
            out[rid] = resolved
            rel_type = rel.get("Type", "")
            if rel_type.endswith("/theme"):
                out["__theme__"] = resolved
        return out

    def _theme(self, rels: dict[str, str]) -> list[Optional[str]]:
        target = rels.get("__theme__", "xl/theme/theme1.xml")
        theme_xml = self._xml(target)
        slots: dict[str, Optional[str]] = {}
        if theme_xml is not None:
            scheme = theme_xml.find(f"{_qd('themeElements')}/{_qd('clrScheme')}")
            if scheme is not None:
                for child in scheme:
                    slot = child.tag.rsplit("}", 1)[-1]
                    srgb = child.find(_qd("srgbClr"))
                    sys = child.find(_qd("sysClr"))
                    value = None
                    if srgb is not None:
                        value = srgb.get("val", "").upper()[:6]
                    elif sys is not None:
                        value = sys.get("lastClr", "").upper()[:6]
                    slots[slot] = value if value and _HEX6.fullmatch(value) else None
        return [slots.get(name) for name in _THEME_ORDER]

    def _shared_strings(self) -> list[tuple[str, Optional[tuple[RichRun, ...]]]]:
        sst = self._xml("xl/sharedStrings.xml")
        if sst is None:
            return []
        return [self._rich_text(si) for si in sst.findall(_q("si"))]

    def _rich_text(self, el) -> tuple[str, Optional[tuple[RichRun, ...]]]:
        runs_el = el.findall(_q("r"))
        if not runs_el:
            t = el.find(_q("t"))
            return (t.text or "") if t is not None else "", None
        runs = []
        for r in runs_el:
            t = r.find(_q("t"))
            text = (t.text or "") if t is not None else ""
            props = r.find(_q("rPr"))
            spec = self._font_spec(props, rich=True)
            runs.append(RichRun(
                text=text,
                bold=spec.bold,
                italic=spec.italic,
                underline=spec.underline,
                strike=spec.strike,
                font_name=spec.name,
                font_color=spec.color,
                font_size=spec.size,
            ))
        return "".join(r.text for r in runs), tuple(runs)

    def _font_spec(self, el, rich: bool = False) -> _FontSpec:
        spec = _FontSpec()
        if el is None:
            return spec
        name_tag = _q("rFont") if rich else _q("name")
        name = el.find(name_tag)
        if name is not None:
            spec.name = name.get("val")
        sz = el.find(_q("sz"))
        if sz is not None and sz.get("val"):
            try:
                spec.size = float(sz.get("val"))
            except ValueError:
                spec.size = None
        spec.color = _resolve_color(el.find(_q("color")), self.theme)
        spec.bold = self._flag(el, "b")
        spec.italic = self._flag(el, "i")
        spec.underline = self._flag(el, "u")
        spec.strike = self._flag(el, "strike")
        return spec

    @staticmethod
    def _flag(el, tag: str) -> bool:
        child = el.find(_q(tag))
        if child is None:
            return False
        return child.get("val", "1") not in ("0", "false", "none")

    def _styles(self) -> list[CellStyle]:
        styles_xml = self._xml("xl/styles.xml")
        if styles_xml is None:
            return []
        fills: list[tuple[Optional[str], Optional[str]]] = []
        fills_el = styles_xml.find(_q("fills"))
        if fills_el is not None:
            for fill in fills_el.findall(_q("fill")):
                pattern = fill.find(_q("patternFill"))
                if pattern is None or pattern.get("patternType") in (None, "none"):
                    fills.append((None, None))
                    continue
                fg = _resolve_color(pattern.find(_q("fgColor")), self.theme)
                bg = _resolve_color(pattern.find(_q("bgColor")), self.theme)
                fills.append((fg, bg))
        fonts: list[_FontSpec] = []
        fonts_el = styles_xml.find(_q("fonts"))
        if fonts_el is not None:
            fonts = [self._font_spec(f) for f in fonts_el.findall(_q("font"))]

        styles: list[CellStyle] = []
        xfs_el = styles_xml.find(_q("cellXfs"))
        if xfs_el is not None:
            for xf in xfs_el.findall(_q("xf")):
                fill_id = int(xf.get("fillId", "0"))
                font_id = int(xf.get("fontId", "0"))
                fg, bg = fills[fill_id] if fill_id < len(fills) else (None, None)
                font = fonts[font_id] if font_id < len(fonts) else _FontSpec()
                styles.append(CellStyle(
                    background_color=bg,
                    foreground_color=fg,
                    font_color=font.color,
                    font_name=font.name,
                    font_size=font.size,
                ))
        return styles

    def _load_sheet(self, name: str, sheet_xml) -> Sheet:
        sheet = Sheet(name)
        data = sheet_xml.find(_q("sheetData"))
        if data is None:
            return sheet
        row_index = 0
        for row_el in data.findall(_q("row")):
            row_index = int(row_el.get("r", row_index + 1))
            col_index = 0
            for c_el in row_el.findall(_q("c")):
                ref = c_el.get("r")
                if ref is not None:
                    addr = parse_a1(ref)
                    col_index = addr.column + 1
                else:
                    addr = CellAddress(col_index, row_index - 1)
                    col_index += 1
                cell = self._load_cell(name, addr, c_el)
                sheet.cells[cell.address] = cell
        return sheet

    def _load_cell(self, sheet_name: str, addr: CellAddress, c_el) -> Cell:
        style_idx = c_el.get("s")
        style = EMPTY_STYLE
        if style_idx is not None:
            idx = int(style_idx)
            if 0 <= idx < len(self.styles):
                style = self.styles[idx]

        t = c_el.get("t", "n")
        v_el = c_el.find(_q("v"))
        f_el = c_el.find(_q("f"))
        is_el = c_el.find(_q("is"))
        raw = v_el.text if v_el is not None and v_el.text is not None else None

        def base(**kw) -> Cell:
            return Cell(address=addr, sheet=sheet_name, style=style, **kw)

        if f_el is not None:
            formula = f_el.text or ""
            kw: dict = {"cell_type": CellType.FORMULA, "formula": formula}
            if raw is not None:
                if t == "str":
                    kw["text"] = raw
                elif t == "b":
                    kw["boolean"] = raw in ("1", "true")
                elif t == "e":
                    kw["error_code"] = raw
                else:
                    kw["number"] = self._number(raw)
            return base(**kw)
        if t == "s":
            if raw is None:
                return base(cell_type=CellType.BLANK)
            try:
                text, runs = self.shared[int(raw)]
            except (ValueError, IndexError) as exc:
                raise WorkbookFormatError(f"bad shared string index {raw!r}") from exc
            return base(cell_type=CellType.TEXT, text=text, rich_runs=runs)
        if t == "inlineStr":
            if is_el is None:
                return base(cell_type=CellType.BLANK)
            text, runs = self._rich_text(is_el)
            return base(cell_type=CellType.TEXT, text=text, rich_runs=runs)
        if t == "str":
            if raw is None:
                return base(cell_type=CellType.BLANK)
            return base(cell_type=CellType.TEXT, text=raw)
        if t == "b":
            if raw is None:
                return base(cell_type=CellType.BLANK)
            return base(cell_type=CellType.BOOLEAN, boolean=raw in ("1", "true"))
        if t == "e":
            if raw is None:
                return base(cell_type=CellType.BLANK)
            return base(cell_type=CellType.ERROR, error_code=raw)
        if t == "d":
            if raw is None:
                return base(cell_type=CellType.BLANK)
            return base(cell_type=CellType.TEXT, text=raw)
        if raw is None:
            return base(cell_type=CellType.BLANK)
        return base(cell_type=CellType.NUMERIC, number=self._number(raw))

    @staticmethod
    def _number(raw: str) -> float:
        try:
            return float(raw)
        except ValueError as exc:
            raise WorkbookFormatError(f"bad numeric cell value {raw!r}") from exc


# ---------------------------------------------------------------------------
# Rendering
# ---------------------------------------------------------------------------

def _escape_markup(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def _format_points(v: float) -> str:
    if v == int(v):
        return str(int(v))
    return repr(v)


def render_rich_text(cell: Cell) -> str:
    """HTML-like rendering of a text cell's formatting runs.

    Nesting order is b > i > u > s > font; only attributes actually set on
    a run produce tags. A run-less cell renders as its escaped plain text.
    """
    if cell.cell_type != CellType.TEXT:
        raise CellTypeError(f"valueRichText needs a Text cell, got {cell.cell_type.value}")
    if not cell.rich_runs:
        return _escape_markup(cell.text or "")
    parts = []
    for run in cell.rich_runs:
        piece = _escape_markup(run.text)
        font_attrs = []
        if run.font_name is not None:
            font_attrs.append(f"face='{run.font_name}'")
        if run.font_color is not None:
            font_attrs.append(f"color='{run.font_color}'")
        if run.font_size is not None:
            font_attrs.append(f"size='{_format_points(run.font_size)}'")
        if font_attrs:
            piece = f"<font {' '.join(font_attrs)}>{piece}</font>"
        if run.strike:
            piece = f"<s>{piece}</s>"
        if run.underline:
            piece = f"<u>{piece}</u>"
        if run.italic:
            piece = f"<i>{piece}</i>"
        if run.bold:
            piece = f"<b>{piece}</b>"
        parts.append(piece)
    return "".join(parts)


def _json_number(v: float):
    return int(v) if v == int(v) else v


def cell_to_json(cell: Cell) -> str:
    """Deterministic JSON object for a cell; absent metadata keys are omitted."""
    obj: dict = {
        "address": cell.address.to_a1(),
        "sheet": cell.sheet,
        "column": cell.address.column,
        "row": cell.address.row,
        "cellType": cell.cell_type.value,
    }
    if cell.text is not None and cell.cell_type in (CellType.TEXT, CellType.FORMULA):
        obj["valueString"] = cell.text
    if cell.number is not None:
        obj["valueNumeric"] = _json_number(cell.number)
    if cell.boolean is not None:
        obj["valueBoolean"] = cell.boolean
    if cell.formula is not None:
        obj["valueFormula"] = cell.formula
    if cell.error_code is not None:
        obj["valueError"] = cell.error_code
    style = cell.style
    if style.background_color is not None:
        obj["backgroundColor"] = style.background_color
    if style.foreground_color is not None:
        obj["foregroundColor"] = style.foreground_color
    if style.font_color is not None:
        obj["fontColor"] = style.font_color
    if style.font_name is not None:
        obj["fontName"] = style.font_name
    if style.font_size is not None:
        obj["fontSize"] = _json_number(style.font_size)
    if cell.rich_runs:
        obj["valueRichText"] = render_rich_text(cell)
    return json.dumps(obj, ensure_ascii=False, separators=(",", ":"))
