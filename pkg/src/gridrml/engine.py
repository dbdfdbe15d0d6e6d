"""Execute parsed triples maps against workbooks.

Iteration is row-major over each source range; blank and absent cells are
skipped (blanks optionally included), filters gate cells, and each
surviving cell produces one subject plus the predicate/object pairings of
its maps. Everything is deterministic: two runs over identical inputs give
byte-identical serialized output and the same diagnostics in the same
order.
"""

from __future__ import annotations

import re
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional, Union

from .errors import (
    Diagnostic,
    ERROR,
    FilterTypeError,
    GraphParseError,
    GridRmlError,
    WARNING,
    BadIriError,
    ZipLengthError,
    error,
    warning,
)
from .expr import (
    BOOLEAN,
    EvalContext,
    INTEGER,
    NUMBER,
    Scalar,
    eval_filter,
    eval_ref,
    expand_template,
    format_double,
)
from .functions import FunctionRegistry, FunctionResult, GraphResult, Values, invoke
from .model import TT_BLANK_NODE, TT_GRAPH, TT_IRI, TT_LITERAL, TermMap, TriplesMap
from .rdf import (
    BlankNode,
    Graph,
    Iri,
    Literal,
    RDF_TYPE,
    RdfTerm,
    Triple,
    XSD_BOOLEAN,
    XSD_DOUBLE,
    XSD_INTEGER,
    ntriples_term,
    parse_turtle,
    resolve_iri,
)
from .vocab import RR_OBJECT, SS_SELECTED_OBJECTS
from .xlsx import CellType, Workbook, open_workbook, open_workbook_bytes

WorkbookResolver = Callable[[str], Workbook]


@dataclass
class ExecutionOptions:
    base_iri: str = "http://example.org/"
    strict: bool = False
    include_blank_cells: bool = False
    workbook_root: Optional[Path] = None


@dataclass
class ExecutionStats:
    cells_visited: int = 0
    cells_matched: int = 0
    triples_emitted: int = 0
    elapsed_millis: int = 0


@dataclass
class ExecutionResult:
    graph: Graph
    diagnostics: list[Diagnostic]
    stats: ExecutionStats

    @property
    def has_errors(self) -> bool:
        return any(d.severity == ERROR for d in self.diagnostics)


def filesystem_resolver(root: Path) -> WorkbookResolver:
    """Resolve ss:url values against a workbook root directory."""
    cache: dict[str, Workbook] = {}

    def resolve(url: str) -> Workbook:
        key = str((root / url).resolve())
        if key not in cache:
            cache[key] = open_workbook(root / url)
        return cache[key]

    return resolve


def memory_resolver(files: dict[str, bytes]) -> WorkbookResolver:
    """Resolve ss:url values against uploaded file names only (no
    filesystem access, so path traversal cannot reach anything)."""
    from .errors import WorkbookIOError

    def resolve(url: str) -> Workbook:
        data = files.get(url)
        if data is None:
            raise WorkbookIOError(
                f"workbook {url!r} does not match any uploaded file name")
        return open_workbook_bytes(data)

    return resolve


# ---------------------------------------------------------------------------
# Term generation
# ---------------------------------------------------------------------------

_IRI_SCHEME = re.compile(r"^[A-Za-z][A-Za-z0-9+.-]*:")
_IRI_FORBIDDEN = re.compile(r'[\x00-\x20<>"{}|^`\\]')
_BLANK_SAFE = re.compile(r"[^0-9A-Za-z_]")


def _make_iri(value: str, base_iri: str) -> Iri:
    resolved = resolve_iri(base_iri, value)
    if not _IRI_SCHEME.match(resolved) or _IRI_FORBIDDEN.search(resolved):
        raise BadIriError(f"not a legal absolute IRI: {resolved!r}")
    return Iri(resolved)


def _make_blank(value: str) -> BlankNode:
    label = _BLANK_SAFE.sub("_", value)
    return BlankNode(label or "_")


def _term_from_string(value: str, term_type: str, tm: TermMap, base_iri: str) -> RdfTerm:
    if term_type == TT_IRI:
        return _make_iri(value, base_iri)
    if term_type == TT_BLANK_NODE:
        return _make_blank(value)
    if tm.language is not None:
        return Literal(value, language=tm.language)
    if tm.datatype is not None:
        return Literal(value, datatype=tm.datatype)
    return Literal(value)


def _term_from_scalar(scalar: Scalar, term_type: str, tm: TermMap, base_iri: str) -> RdfTerm:
    if term_type in (TT_IRI, TT_BLANK_NODE):
        return _term_from_string(scalar.render(), term_type, tm, base_iri)
    if tm.language is not None:
        return Literal(scalar.render(), language=tm.language)
    if tm.datatype is not None:
        return Literal(scalar.render(), datatype=tm.datatype)
    if scalar.kind == NUMBER:
        return Literal(format_double(scalar.value), datatype=XSD_DOUBLE)
    if scalar.kind == INTEGER:
        return Literal(str(scalar.value), datatype=XSD_INTEGER)
    if scalar.kind == BOOLEAN:
        return Literal("true" if scalar.value else "false", datatype=XSD_BOOLEAN)
    return Literal(scalar.value)


def _default_term_type(position: str) -> str:
    return TT_LITERAL if position == "object" else TT_IRI


def generate_term(tm: TermMap, ctx: EvalContext, position: str, base_iri: str,
                  registry: FunctionRegistry) -> Union[None, RdfTerm, FunctionResult]:
    """One term (or a FunctionResult for the combiner) from a term map.

    Absent data propagates to an absent term; an IRI-positioned expansion
    that is not a legal absolute IRI raises E_BAD_IRI.
    """
    if tm.constant is not None:
        return tm.constant
    if tm.function is not None:
        return invoke(registry, tm.function, ctx)
    term_type = tm.term_type or _default_term_type(position)
    if tm.template is not None:
        value = expand_template(tm.template, ctx, iri_safe=(term_type == TT_IRI))
        if value is None:
            return None
        return _term_from_string(value, term_type, tm, base_iri)
    if tm.reference is not None:
        scalar = eval_ref(tm.reference, ctx)
        if scalar is None:
            return None
        return _term_from_scalar(scalar, term_type, tm, base_iri)
    return None


# ---------------------------------------------------------------------------
# Pairing
# ---------------------------------------------------------------------------

def combine(predicates: list[Iri], objects: list[RdfTerm],
            zip_pairs: bool) -> list[tuple[Iri, RdfTerm]]:
    """Cartesian pairs in predicate-major order, or the zip diagonal."""
    if zip_pairs:
        if len(predicates) != len(objects):
            raise ZipLengthError(
                f"ss:zip needs equally long sides, got {len(predicates)} "
                f"predicates and {len(objects)} objects")
        return list(zip(predicates, objects))
    return [(p, o) for p in predicates for o in objects]


def apply_graph_term_type(result: GraphResult, subject: RdfTerm,
                          predicates: list[Iri], out: Graph,
                          rename_prefix: str, base_iri: str,
                          triples_map: Optional[str] = None,
                          cell: Optional[str] = None) -> list[Diagnostic]:
    """Merge a returned subgraph and link its selected objects.

    Every blank node is renamed with the per-invocation prefix, selection
    triples (ss:SelectedObjects rr:object ?o) are extracted rather than
    merged, and each predicate links the subject to each selected object.
    """
    try:
        subgraph = parse_turtle(result.turtle, base_iri)
    except GridRmlError as exc:
        raise GraphParseError(f"function returned invalid Turtle: {exc.message}") from exc

    renames: dict[str, BlankNode] = {}

    def rename(term: RdfTerm) -> RdfTerm:
        if isinstance(term, BlankNode):
            if term.label not in renames:
                renames[term.label] = BlankNode(f"{rename_prefix}{term.label}")
            return renames[term.label]
        return term

    selected: list[RdfTerm] = []
    for t in subgraph:
        if t.subject == SS_SELECTED_OBJECTS and t.predicate == RR_OBJECT:
            selected.append(rename(t.object))
            continue
        out.add(Triple(rename(t.subject), t.predicate, rename(t.object)))
    diags: list[Diagnostic] = []
    if not selected:
        diags.append(warning("W_NO_SELECTION",
                             "returned graph names no selected objects",
                             triples_map=triples_map, cell=cell))
    for p in predicates:
        for o in selected:
            out.add(Triple(subject, p, o))
    return diags


# ---------------------------------------------------------------------------
# Execution
# ---------------------------------------------------------------------------

class _Run:
    def __init__(self, options: ExecutionOptions, resolver: WorkbookResolver,
                 registry: FunctionRegistry):
        self.options = options
        self.resolver = resolver
        self.registry = registry
        self.out = Graph()
        self.diags: list[Diagnostic] = []
        self.stats = ExecutionStats()
        self.workbooks: dict[str, Workbook] = {}
        self.graph_invocations = 0

    def execute(self, maps: list[TriplesMap]) -> None:
        for tmap in maps:
            self._run_map(tmap)

    def _run_map(self, tmap: TriplesMap) -> None:
        map_id = ntriples_term(tmap.id)
        source = tmap.source
        try:
            workbook = self.workbooks.get(source.url)
            if workbook is None:
                workbook = self.resolver(source.url)
                self.workbooks[source.url] = workbook
            sheet = workbook.sheet(source.sheet_name)
        except GridRmlError as exc:
            self.diags.append(error(exc.code, exc.message, triples_map=map_id))
            return

        for addr in source.cell_range.iter_row_major():
            self.stats.cells_visited += 1
            cell = sheet.cells.get(addr)
            if cell is None:
                continue
            if cell.cell_type == CellType.BLANK and not self.options.include_blank_cells:
                continue
            ctx = EvalContext(workbook, source.sheet_name, addr)
            a1 = addr.to_a1()
            if source.filter is not None:
                try:
                    if not eval_filter(source.filter, ctx):
                        continue
                except FilterTypeError as exc:
                    self.diags.append(error(exc.code, exc.message,
                                            triples_map=map_id, cell=a1))
                    continue

            try:
                subject = generate_term(tmap.subject_map, ctx, "subject",
                                        self.options.base_iri, self.registry)
            except GridRmlError as exc:
                self.diags.append(error(exc.code, exc.message,
                                        triples_map=map_id, cell=a1))
                continue
            if subject is None:
                self.diags.append(warning("W_NO_SUBJECT",
                                          "subject map produced no term",
                                          triples_map=map_id, cell=a1))
                continue
            if not isinstance(subject, (Iri, BlankNode)):
                self.diags.append(error("E_BAD_TERMMAP",
                                        "subject map must produce an IRI or "
                                        "blank node",
                                        triples_map=map_id, cell=a1))
                continue
            self.stats.cells_matched += 1
            for cls in tmap.classes:
                self.out.add(Triple(subject, Iri(RDF_TYPE), cls))
            for pom in tmap.predicate_object_maps:
                self._run_pom(pom, subject, ctx, map_id, a1)

    def _run_pom(self, pom, subject: RdfTerm, ctx: EvalContext,
                 map_id: str, a1: str) -> None:
        predicates: list[Iri] = []
        for tm in pom.predicate_maps:
            try:
                term = generate_term(tm, ctx, "predicate",
                                     self.options.base_iri, self.registry)
            except GridRmlError as exc:
                self.diags.append(error(exc.code, exc.message,
                                        triples_map=map_id, cell=a1))
                continue
            if term is None:
                continue
            if not isinstance(term, Iri):
                self.diags.append(error("E_BAD_TERMMAP",
                                        "predicate map must produce an IRI",
                                        triples_map=map_id, cell=a1))
                continue
            predicates.append(term)
        for items in pom.predicate_lists:
            predicates.extend(items)

        objects: list[RdfTerm] = []
        graph_results: list[GraphResult] = []
        for om in pom.object_maps:
            try:
                value = generate_term(om, ctx, "object",
                                      self.options.base_iri, self.registry)
            except GridRmlError as exc:
                self.diags.append(error(exc.code, exc.message,
                                        triples_map=map_id, cell=a1))
                continue
            if value is None:
                continue
            if isinstance(value, GraphResult):
                if om.term_type == TT_GRAPH:
                    graph_results.append(value)
                else:
                    self.diags.append(error(
                        "E_FN_RUNTIME",
                        "function returned a graph for a non-graph object map",
                        triples_map=map_id, cell=a1))
                continue
            if isinstance(value, Values):
                if om.term_type == TT_GRAPH:
                    self.diags.append(error(
                        "E_FN_RUNTIME",
                        "graph term type needs a graph-returning function",
                        triples_map=map_id, cell=a1))
                    continue
                term_type = om.term_type or TT_LITERAL
                try:
                    objects.extend(_term_from_scalar(s, term_type, om,
                                                     self.options.base_iri)
                                   for s in value.items)
                except BadIriError as exc:
                    self.diags.append(error(exc.code, exc.message,
                                            triples_map=map_id, cell=a1))
                continue
            objects.append(value)

        try:
            pairs = combine(predicates, objects, pom.zip_pairs)
        except ZipLengthError as exc:
            severity = ERROR if self.options.strict else WARNING
            self.diags.append(Diagnostic(severity, exc.code, exc.message,
                                         triples_map=map_id, cell=a1))
            pairs = []
        for p, o in pairs:
            self.out.add(Triple(subject, p, o))

        for result in graph_results:
            prefix = f"g{self.graph_invocations}_"
            self.graph_invocations += 1
            try:
                self.diags.extend(apply_graph_term_type(
                    result, subject, predicates, self.out, prefix,
                    self.options.base_iri, triples_map=map_id, cell=a1))
            except GraphParseError as exc:
                self.diags.append(error(exc.code, exc.message,
                                        triples_map=map_id, cell=a1))


def execute_mapping(maps: list[TriplesMap], options: ExecutionOptions,
                    resolver: Optional[WorkbookResolver] = None,
                    registry: Optional[FunctionRegistry] = None) -> ExecutionResult:
    """Run every triples map; the output graph is the duplicate-free union."""
    started = time.monotonic()
    if resolver is None:
        root = options.workbook_root if options.workbook_root is not None else Path(".")
        resolver = filesystem_resolver(Path(root))
    if registry is None:
        registry = FunctionRegistry.with_builtins()
    run = _Run(options, resolver, registry)
    run.execute(maps)
    run.stats.triples_emitted = len(run.out)
    run.stats.elapsed_millis = int((time.monotonic() - started) * 1000)
    return ExecutionResult(graph=run.out, diagnostics=run.diags, stats=run.stats)


def run_mapping_text(mapping_text: str, options: ExecutionOptions,
                     resolver: Optional[WorkbookResolver] = None,
                     registry: Optional[FunctionRegistry] = None) -> ExecutionResult:
    """Full pipeline over mapping Turtle: parse, validate, execute.

    Mapping syntax problems become error diagnostics on an empty result
    rather than exceptions, so callers get one uniform report shape.
    """
    started = time.monotonic()
    if registry is None:
        registry = FunctionRegistry.with_builtins()
    try:
        graph = parse_turtle(mapping_text, options.base_iri)
    except GridRmlError as exc:
        stats = ExecutionStats(elapsed_millis=int((time.monotonic() - started) * 1000))
        return ExecutionResult(graph=Graph(), stats=stats,
                               diagnostics=[error(exc.code, exc.message)])
    from .model import parse_mapping_document, validate_model

    maps, diagnostics = parse_mapping_document(graph)
    diagnostics.extend(validate_model(maps, set(registry.iris())))
    result = execute_mapping(maps, options, resolver=resolver, registry=registry)
    result.diagnostics[:0] = diagnostics
    result.stats.elapsed_millis = int((time.monotonic() - started) * 1000)
    return result
