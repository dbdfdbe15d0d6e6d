"""Command-line front end for batch mapping runs.

stdout carries only RDF; diagnostics go to stderr as one JSON record per
line. Exit codes: 0 success, 1 error diagnostics present, 2 usage or I/O
failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import Optional

from .engine import ExecutionOptions, run_mapping_text
from .errors import Diagnostic, ERROR
from .rdf import serialize_graph

WORKBOOK_ROOT_ENV = "GRIDRML_WORKBOOK_ROOT"
DEFAULT_BASE_IRI = "http://example.org/"


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gridrml",
        description="Run a spreadsheet mapping document against XLSX workbooks.",
    )
    parser.add_argument("-m", "--mapping", required=True,
                        help="mapping document (Turtle)")
    parser.add_argument("-o", "--output",
                        help="output file (default: stdout)")
    parser.add_argument("--format", choices=("ntriples", "turtle"),
                        default="ntriples", help="output serialization")
    parser.add_argument("--workbook-root",
                        help="directory ss:url values resolve against "
                             f"(default: mapping file's directory; the "
                             f"{WORKBOOK_ROOT_ENV} environment variable "
                             "overrides that default)")
    parser.add_argument("--base", default=DEFAULT_BASE_IRI,
                        help="base IRI for relative IRIs")
    parser.add_argument("--strict", action="store_true",
                        help="treat recoverable pairing problems as errors")
    parser.add_argument("--include-blank", action="store_true",
                        help="iterate styled-but-valueless cells too")
    return parser


def _emit_diagnostics(diagnostics: list[Diagnostic], stream) -> None:
    for diag in diagnostics:
        print(json.dumps(diag.to_json_dict(), ensure_ascii=False), file=stream)


def run_cli(argv: list[str], stdout=None, stderr=None) -> int:
    stdout = stdout if stdout is not None else sys.stdout
    stderr = stderr if stderr is not None else sys.stderr
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse already printed the synopsis to stderr
        return 2 if exc.code else 0

    mapping_path = Path(args.mapping)
    try:
        mapping_text = mapping_path.read_text(encoding="utf-8")
    except OSError as exc:
        print(f"gridrml: cannot read mapping: {exc}", file=stderr)
        return 2

    if args.workbook_root is not None:
        workbook_root = Path(args.workbook_root)
    elif os.environ.get(WORKBOOK_ROOT_ENV):
        workbook_root = Path(os.environ[WORKBOOK_ROOT_ENV])
    else:
        workbook_root = mapping_path.parent

    options = ExecutionOptions(
        base_iri=args.base,
        strict=args.strict,
        include_blank_cells=args.include_blank,
        workbook_root=workbook_root,
    )
    result = run_mapping_text(mapping_text, options)
    diagnostics: list[Diagnostic] = result.diagnostics
    rdf_text = serialize_graph(result.graph, args.format)

    _emit_diagnostics(diagnostics, stderr)
    if args.output:
        try:
            Path(args.output).write_text(rdf_text, encoding="utf-8")
        except OSError as exc:
            print(f"gridrml: cannot write output: {exc}", file=stderr)
            return 2
    else:
        stdout.write(rdf_text)
        stdout.flush()
    return 1 if any(d.severity == ERROR for d in diagnostics) else 0


def main(argv: Optional[list[str]] = None) -> int:
    return run_cli(sys.argv[1:] if argv is None else argv)


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
