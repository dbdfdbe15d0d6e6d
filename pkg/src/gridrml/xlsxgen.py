"""Deterministic XLSX generation for fixtures and the demo gallery.

Not a general workbook writer: it emits exactly the SpreadsheetML parts the
reader consumes (worksheets, shared strings, styles, theme) with stable zip
metadata so generated bytes are reproducible run-to-run.
"""

from __future__ import annotations

import io
import zipfile
from dataclasses import dataclass
from typing import Optional, Sequence, Union
from xml.sax.saxutils import escape, quoteattr

from .xlsx import parse_a1

# Office default theme palette, in clrScheme element order.
THEME_PALETTE = {
    "dk1": "000000",
    "lt1": "FFFFFF",
    "dk2": "1F497D",
    "lt2": "EEECE1",
    "accent1": "4F81BD",
    "accent2": "C0504D",
    "accent3": "9BBB59",
    "accent4": "8064A2",
    "accent5": "4BACC6",
    "accent6": "F79646",
    "hlink": "0000FF",
    "folHlink": "800080",
}


@dataclass(frozen=True)
class Color:
    """Fill/font color: exactly one of rgb / indexed / theme."""

    rgb: Optional[str] = None
    indexed: Optional[int] = None
    theme: Optional[int] = None
    tint: float = 0.0

    def to_xml(self, tag: str) -> str:
        if self.rgb is not None:
            value = self.rgb.lstrip("#").upper()
            if len(value) == 6:
                value = "FF" + value
            return f'<{tag} rgb="{value}"/>'
        if self.indexed is not None:
            return f'<{tag} indexed="{self.indexed}"/>'
        if self.theme is not None:
            if self.tint:
                return f'<{tag} theme="{self.theme}" tint="{self.tint!r}"/>'
            return f'<{tag} theme="{self.theme}"/>'
        return ""


def _color(spec: Union[Color, str, None]) -> Optional[Color]:
    if spec is None or isinstance(spec, Color):
        return spec
    return Color(rgb=spec)


@dataclass(frozen=True)
class Font:
    name: Optional[str] = None
    size: Optional[float] = None
    color: Union[Color, str, None] = None
    bold: bool = False
    italic: bool = False
    underline: bool = False
    strike: bool = False

    def to_xml(self, rich: bool = False) -> str:
        name_tag = "rFont" if rich else "name"
        bits = []
        if self.bold:
            bits.append("<b/>")
        if self.italic:
            bits.append("<i/>")
        if self.underline:
            bits.append("<u/>")
        if self.strike:
            bits.append("<strike/>")
        if self.size is not None:
            sz = int(self.size) if self.size == int(self.size) else self.size
            bits.append(f'<sz val="{sz}"/>')
        color = _color(self.color)
        if color is not None:
            bits.append(color.to_xml("color"))
        if self.name is not None:
            bits.append(f"<{name_tag} val={quoteattr(self.name)}/>")
        return "".join(bits)


@dataclass(frozen=True)
class Style:
    fill_fg: Union[Color, str, None] = None
    fill_bg: Union[Color, str, None] = None
    font: Optional[Font] = None


@dataclass(frozen=True)
class Run:
    text: str
    bold: bool = False
    italic: bool = False
    underline: bool = False
    strike: bool = False
    font_name: Optional[str] = None
    font_color: Union[Color, str, None] = None
    font_size: Optional[float] = None

    def to_xml(self) -> str:
        props = Font(name=self.font_name, size=self.font_size,
                     color=self.font_color, bold=self.bold, italic=self.italic,
                     underline=self.underline, strike=self.strike).to_xml(rich=True)
        body = f'<t xml:space="preserve">{escape(self.text)}</t>'
        if props:
            return f"<r><rPr>{props}</rPr>{body}</r>"
        return f"<r>{body}</r>"


@dataclass
class _CellSpec:
    kind: str  # text | rich | number | boolean | formula | error | blank
    payload: object = None
    style: Optional[Style] = None
    shared: bool = False
    cached: object = None
    cached_kind: str = ""


class SheetBuilder:
    def __init__(self, name: str):
        self.name = name
        self.cells: dict[tuple[int, int], _CellSpec] = {}

    def _put(self, a1: str, spec: _CellSpec) -> "SheetBuilder":
        addr = parse_a1(a1)
        self.cells[(addr.row, addr.column)] = spec
        return self

    def text(self, a1: str, value: str, style: Optional[Style] = None,
             shared: bool = False) -> "SheetBuilder":
        return self._put(a1, _CellSpec("text", value, style, shared))

    def rich(self, a1: str, runs: Sequence[Run], style: Optional[Style] = None,
             shared: bool = True) -> "SheetBuilder":
        return self._put(a1, _CellSpec("rich", tuple(runs), style, shared))

    def number(self, a1: str, value: float, style: Optional[Style] = None) -> "SheetBuilder":
        return self._put(a1, _CellSpec("number", value, style))

    def boolean(self, a1: str, value: bool, style: Optional[Style] = None) -> "SheetBuilder":
        return self._put(a1, _CellSpec("boolean", value, style))

    def error(self, a1: str, code: str, style: Optional[Style] = None) -> "SheetBuilder":
        return self._put(a1, _CellSpec("error", code, style))

    def blank(self, a1: str, style: Optional[Style] = None) -> "SheetBuilder":
        return self._put(a1, _CellSpec("blank", None, style))

    def formula(self, a1: str, formula: str, cached_number: Optional[float] = None,
                cached_text: Optional[str] = None, cached_boolean: Optional[bool] = None,
                cached_error: Optional[str] = None,
                style: Optional[Style] = None) -> "SheetBuilder":
        spec = _CellSpec("formula", formula, style)
        if cached_number is not None:
            spec.cached, spec.cached_kind = cached_number, "n"
        elif cached_text is not None:
            spec.cached, spec.cached_kind = cached_text, "str"
        elif cached_boolean is not None:
            spec.cached, spec.cached_kind = cached_boolean, "b"
        elif cached_error is not None:
            spec.cached, spec.cached_kind = cached_error, "e"
        return self._put(a1, spec)


class XlsxBuilder:
    def __init__(self):
        self._sheets: list[SheetBuilder] = []

    def sheet(self, name: str) -> SheetBuilder:
        sb = SheetBuilder(name)
        self._sheets.append(sb)
        return sb

    # -- style/shared-string tables ----------------------------------------

    def _tables(self):
        self._shared: list[str] = []
        self._shared_index: dict[str, int] = {}
        self._fonts: list[str] = ["<sz val=\"11\"/><name val=\"Calibri\"/>"]
        self._fills: list[str] = ['<patternFill patternType="none"/>',
                                  '<patternFill patternType="gray125"/>']
        self._xfs: list[tuple[int, int]] = [(0, 0)]
        self._style_index: dict[Style, int] = {}

    def _sst(self, xml: str) -> int:
        if xml not in self._shared_index:
            self._shared_index[xml] = len(self._shared)
            self._shared.append(xml)
        return self._shared_index[xml]

    def _style_id(self, style: Optional[Style]) -> int:
        if style is None:
            return 0
        if style in self._style_index:
            return self._style_index[style]
        font_id = 0
        if style.font is not None:
            self._fonts.append(style.font.to_xml())
            font_id = len(self._fonts) - 1
        fill_id = 0
        fg, bg = _color(style.fill_fg), _color(style.fill_bg)
        if fg is not None or bg is not None:
            parts = ['<patternFill patternType="solid">']
            if fg is not None:
                parts.append(fg.to_xml("fgColor"))
            if bg is not None:
                parts.append(bg.to_xml("bgColor"))
            parts.append("</patternFill>")
            self._fills.append("".join(parts))
            fill_id = len(self._fills) - 1
        self._xfs.append((font_id, fill_id))
        idx = len(self._xfs) - 1
        self._style_index[style] = idx
        return idx

    # -- XML parts -----------------------------------------------------------

    def _cell_xml(self, row: int, col: int, spec: _CellSpec) -> str:
        from .xlsx import column_letters

        ref = f"{column_letters(col)}{row + 1}"
        sid = self._style_id(spec.style)
        s_attr = f' s="{sid}"' if sid else ""

        def c(t_attr: str, body: str) -> str:
            return f'<c r="{ref}"{s_attr}{t_attr}>{body}</c>'

        if spec.kind == "blank":
            return f'<c r="{ref}"{s_attr}/>'
        if spec.kind == "number":
            return c("", f"<v>{spec.payload!r}</v>")
        if spec.kind == "boolean":
            return c(' t="b"', f"<v>{1 if spec.payload else 0}</v>")
        if spec.kind == "error":
            return c(' t="e"', f"<v>{escape(str(spec.payload))}</v>")
        if spec.kind == "formula":
            body = f"<f>{escape(str(spec.payload))}</f>"
            t_attr = ""
            if spec.cached_kind == "n":
                body += f"<v>{spec.cached!r}</v>"
            elif spec.cached_kind == "str":
                t_attr = ' t="str"'
                body += f"<v>{escape(str(spec.cached))}</v>"
            elif spec.cached_kind == "b":
                t_attr = ' t="b"'
                body += f"<v>{1 if spec.cached else 0}</v>"
            elif spec.cached_kind == "e":
                t_attr = ' t="e"'
                body += f"<v>{escape(str(spec.cached))}</v>"
            return c(t_attr, body)
        if spec.kind == "text":
            inner = f'<t xml:space="preserve">{escape(str(spec.payload))}</t>'
            if spec.shared:
                idx = self._sst(f"<si>{inner}</si>")
                return c(' t="s"', f"<v>{idx}</v>")
            return c(' t="inlineStr"', f"<is>{inner}</is>")
        if spec.kind == "rich":
            runs = "".join(run.to_xml() for run in spec.payload)
            if spec.shared:
                idx = self._sst(f"<si>{runs}</si>")
                return c(' t="s"', f"<v>{idx}</v>")
            return c(' t="inlineStr"', f"<is>{runs}</is>")
        raise ValueError(f"unknown cell kind {spec.kind}")

    def _sheet_xml(self, sb: SheetBuilder) -> str:
        rows: dict[int, list[str]] = {}
        for (row, col) in sorted(sb.cells):
            rows.setdefault(row, []).append(self._cell_xml(row, col, sb.cells[(row, col)]))
        body = "".join(
            f'<row r="{row + 1}">{"".join(cells)}</row>'
            for row, cells in sorted(rows.items())
        )
        return (
            '<?xml version="1.0" encoding="UTF-8" standalone="yes"?>'
            '<worksheet xmlns="http://schemas.openxmlformats.org/spreadsheetml/2006/main">'
            f"<sheetData>{body}</sheetData></worksheet>"
        )

    def _theme_xml(self) -> str:
        slots = []
        for name, rgb in THEME_PALETTE.items():
            if name in ("dk1", "lt1"):
                sys_val = "windowText" if name == "dk1" else "window"
                slots.append(f'<a:{name}><a:sysClr val="{sys_val}" lastClr="{rgb}"/></a:{name}>')
            else:
                slots.append(f'<a:{name}><a:srgbClr val="{rgb}"/></a:{name}>')
        return (
            '<?xml version="1.0" encoding="UTF-8" standalone="yes"?>'
            '<a:theme xmlns:a="http://schemas.openxmlformats.org/drawingml/2006/main" name="Office">'
            f'<a:themeElements><a:clrScheme name="Office">{"".join(slots)}</a:clrScheme>'
            "</a:themeElements></a:theme>"
        )

    def _styles_xml(self) -> str:
        fonts = "".join(f"<font>{f}</font>" for f in self._fonts)
        fills = "".join(f"<fill>{f}</fill>" for f in self._fills)
        xfs = "".join(
            f'<xf numFmtId="0" fontId="{font_id}" fillId="{fill_id}" borderId="0" '
            'applyFill="1" applyFont="1"/>'
            for font_id, fill_id in self._xfs
        )
        return (
            '<?xml version="1.0" encoding="UTF-8" standalone="yes"?>'
            '<styleSheet xmlns="http://schemas.openxmlformats.org/spreadsheetml/2006/main">'
            f'<fonts count="{len(self._fonts)}">{fonts}</fonts>'
            f'<fills count="{len(self._fills)}">{fills}</fills>'
            '<borders count="1"><border/></borders>'
            '<cellStyleXfs count="1"><xf/></cellStyleXfs>'
            f'<cellXfs count="{len(self._xfs)}">{xfs}</cellXfs>'
            "</styleSheet>"
        )

    def to_bytes(self) -> bytes:
        self._tables()
        sheet_parts = [(f"xl/worksheets/sheet{i + 1}.xml", self._sheet_xml(sb))
                       for i, sb in enumerate(self._sheets)]

        sheets_decl = "".join(
            f'<sheet name={quoteattr(sb.name)} sheetId="{i + 1}" r:id="rId{i + 1}"/>'
            for i, sb in enumerate(self._sheets)
        )
        workbook_xml = (
            '<?xml version="1.0" encoding="UTF-8" standalone="yes"?>'
            '<workbook xmlns="http://schemas.openxmlformats.org/spreadsheetml/2006/main" '
            'xmlns:r="http://schemas.openxmlformats.org/officeDocument/2006/relationships">'
            f"<sheets>{sheets_decl}</sheets></workbook>"
        )

        n = len(self._sheets)
        rels = [
            f'<Relationship Id="rId{i + 1}" '
            'Type="http://schemas.openxmlformats.org/officeDocument/2006/relationships/worksheet" '
            f'Target="worksheets/sheet{i + 1}.xml"/>'
            for i in range(n)
        ]
        rels.append(
            f'<Relationship Id="rId{n + 1}" '
            'Type="http://schemas.openxmlformats.org/officeDocument/2006/relationships/styles" '
            'Target="styles.xml"/>'
        )
        rels.append(
            f'<Relationship Id="rId{n + 2}" '
            'Type="http://schemas.openxmlformats.org/officeDocument/2006/relationships/theme" '
            'Target="theme/theme1.xml"/>'
        )
        overrides = [
            '<Override PartName="/xl/workbook.xml" ContentType="application/vnd.'
            'openxmlformats-officedocument.spreadsheetml.sheet.main+xml"/>',
            '<Override PartName="/xl/styles.xml" ContentType="application/vnd.'
            'openxmlformats-officedocument.spreadsheetml.styles+xml"/>',
            '<Override PartName="/xl/theme/theme1.xml" ContentType="application/vnd.'
            'openxmlformats-officedocument.theme+xml"/>',
        ]
        for i in range(n):
            overrides.append(
                f'<Override PartName="/xl/worksheets/sheet{i + 1}.xml" ContentType='
                '"application/vnd.openxmlformats-officedocument.spreadsheetml.worksheet+xml"/>'
            )
        if self._shared:
            rels.append(
                f'<Relationship Id="rId{n + 3}" '
                'Type="http://schemas.openxmlformats.org/officeDocument/2006/relationships/sharedStrings" '
                'Target="sharedStrings.xml"/>'
            )
            overrides.append(
                '<Override PartName="/xl/sharedStrings.xml" ContentType="application/vnd.'
                'openxmlformats-officedocument.spreadsheetml.sharedStrings+xml"/>'
            )

        content_types = (
            '<?xml version="1.0" encoding="UTF-8" standalone="yes"?>'
            '<Types xmlns="http://schemas.openxmlformats.org/package/2006/content-types">'
            '<Default Extension="rels" ContentType='
            '"application/vnd.openxmlformats-package.relationships+xml"/>'
            '<Default Extension="xml" ContentType="application/xml"/>'
            f'{"".join(overrides)}</Types>'
        )
        root_rels = (
            '<?xml version="1.0" encoding="UTF-8" standalone="yes"?>'
            '<Relationships xmlns="http://schemas.openxmlformats.org/package/2006/relationships">'
            '<Relationship Id="rId1" Type="http://schemas.openxmlformats.org/'
            'officeDocument/2006/relationships/officeDocument" Target="xl/workbook.xml"/>'
            "</Relationships>"
        )
        workbook_rels = (
            '<?xml version="1.0" encoding="UTF-8" standalone="yes"?>'
            '<Relationships xmlns="http://schemas.openxmlformats.org/package/2006/relationships">'
            f'{"".join(rels)}</Relationships>'
        )

        parts: list[tuple[str, str]] = [
            ("[Content_Types].xml", content_types),
            ("_rels/.rels", root_rels),
            ("xl/workbook.xml", workbook_xml),
            ("xl/_rels/workbook.xml.rels", workbook_rels),
            ("xl/styles.xml", self._styles_xml()),
            ("xl/theme/theme1.xml", self._theme_xml()),
        ]
        parts.extend(sheet_parts)
        if self._shared:
            sst = (
                '<?xml version="1.0" encoding="UTF-8" standalone="yes"?>'
                '<sst xmlns="http://schemas.openxmlformats.org/spreadsheetml/2006/main" '
                f'count="{len(self._shared)}" uniqueCount="{len(self._shared)}">'
                f'{"".join(self._shared)}</sst>'
            )
            parts.append(("xl/sharedStrings.xml", sst))

        buffer = io.BytesIO()
        with zipfile.ZipFile(buffer, "w", zipfile.ZIP_DEFLATED) as zf:
            for name, payload in parts:
                info = zipfile.ZipInfo(name, date_time=(1980, 1, 1, 0, 0, 0))
                info.compress_type = zipfile.ZIP_DEFLATED
                zf.writestr(info, payload.encode("utf-8"))
        return buffer.getvalue()

    def write(self, path) -> None:
        with open(path, "wb") as fh:
            fh.write(self.to_bytes())
