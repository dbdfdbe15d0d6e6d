"""gridrml: execute spreadsheet mapping documents against XLSX workbooks."""

from .engine import (
    ExecutionOptions,
    ExecutionResult,
    execute_mapping,
    filesystem_resolver,
    memory_resolver,
    run_mapping_text,
)
from .errors import Diagnostic, GridRmlError
from .functions import FunctionRegistry
from .model import parse_mapping_document, validate_model
from .rdf import BlankNode, Graph, Iri, Literal, Triple, parse_turtle, serialize_graph
from .xlsx import (
    Cell,
    CellAddress,
    CellRange,
    CellType,
    Workbook,
    open_workbook,
    open_workbook_bytes,
    parse_a1,
    parse_range,
)

__version__ = "0.1.0"

__all__ = [
    "BlankNode",
    "Cell",
    "CellAddress",
    "CellRange",
    "CellType",
    "Diagnostic",
    "ExecutionOptions",
    "ExecutionResult",
    "FunctionRegistry",
    "Graph",
    "GridRmlError",
    "Iri",
    "Literal",
    "Triple",
    "Workbook",
    "execute_mapping",
    "filesystem_resolver",
    "memory_resolver",
    "open_workbook",
    "open_workbook_bytes",
    "parse_a1",
    "parse_mapping_document",
    "parse_range",
    "parse_turtle",
    "run_mapping_text",
    "serialize_graph",
    "validate_model",
    "__version__",
]
