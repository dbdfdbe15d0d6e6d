"""Error types and diagnostic records shared across the engine.

Every raised error carries a stable ``code`` string so callers (CLI, HTTP
service, tests) can match on it without parsing messages. Recoverable
conditions found while parsing or executing mappings are reported as
:class:`Diagnostic` records instead of exceptions.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional


class GridRmlError(Exception):
    """Base class for all structured errors."""

    code = "E_ERROR"

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message


class TurtleSyntaxError(GridRmlError):
    code = "E_SYNTAX"

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


class UndefinedPrefixError(GridRmlError):
    code = "E_UNDEFINED_PREFIX"

    def __init__(self, prefix: str, line: int, column: int):
        super().__init__(f"undefined prefix '{prefix}:' (line {line}, column {column})")
        self.prefix = prefix
        self.line = line
        self.column = column


class MalformedListError(GridRmlError):
    code = "E_MALFORMED_LIST"


class WorkbookIOError(GridRmlError):
    code = "E_IO"


class WorkbookFormatError(GridRmlError):
    code = "E_FORMAT"


class AddressSyntaxError(GridRmlError):
    code = "E_ADDRESS"


class RangeSyntaxError(GridRmlError):
    code = "E_RANGE"


class SheetNotFoundError(GridRmlError):
    code = "E_SHEET_NOT_FOUND"


class CellTypeError(GridRmlError):
    code = "E_TYPE"


class RefSyntaxError(GridRmlError):
    code = "E_REF_SYNTAX"


class UnknownVariableError(GridRmlError):
    code = "E_UNKNOWN_VARIABLE"


class TemplateSyntaxError(GridRmlError):
    code = "E_TEMPLATE_SYNTAX"


class FilterSyntaxError(GridRmlError):
    code = "E_FILTER_SYNTAX"

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at offset {position})")
        self.position = position


class FilterTypeError(GridRmlError):
    code = "E_FILTER_TYPE"


class FunctionUnregisteredError(GridRmlError):
    code = "E_FN_UNREGISTERED"


class FunctionParamError(GridRmlError):
    code = "E_FN_PARAM"


class FunctionRuntimeError(GridRmlError):
    code = "E_FN_RUNTIME"


class BadIriError(GridRmlError):
    code = "E_BAD_IRI"


class ZipLengthError(GridRmlError):
    code = "E_ZIP_LENGTH"


class GraphParseError(GridRmlError):
    code = "E_GRAPH_PARSE"


ERROR = "error"
WARNING = "warning"


@dataclass(frozen=True)
class Diagnostic:
    """One recoverable finding bound to a mapping (and optionally a cell)."""

    severity: str
    code: str
    message: str
    triples_map: Optional[str] = None
    cell: Optional[str] = None

    def to_json_dict(self) -> dict:
        out: dict = {
            "severity": self.severity,
            "code": self.code,
            "message": self.message,
        }
        if self.triples_map is not None:
            out["triplesMap"] = self.triples_map
        if self.cell is not None:
            out["cell"] = self.cell
        return out


def error(code: str, message: str, triples_map: Optional[str] = None,
          cell: Optional[str] = None) -> Diagnostic:
    return Diagnostic(ERROR, code, message, triples_map, cell)


def warning(code: str, message: str, triples_map: Optional[str] = None,
            cell: Optional[str] = None) -> Diagnostic:
    return Diagnostic(WARNING, code, message, triples_map, cell)
