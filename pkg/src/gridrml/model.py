"""Parse mapping-document graphs into a validated rule model.

Parsing is total: malformed pieces surface as diagnostics bound to their
triples map, never as exceptions, and broken maps/POMs are dropped from
the result. ``validate_model`` adds the lint-level findings (literal
subjects, unknown variables, unregistered functions, maps that cannot emit
anything).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from . import vocab
from .errors import (
    Diagnostic,
    FilterSyntaxError,
    GridRmlError,
    MalformedListError,
    RangeSyntaxError,
    error,
    warning,
)
from .expr import (
    FilterExpr,
    Placeholder,
    RefExpr,
    Template,
    VARIABLE_NAMES,
    parse_filter,
    parse_ref,
    parse_template,
)
from .rdf import (
    BlankNode,
    Graph,
    Iri,
    Literal,
    RDF_FIRST,
    RDF_NIL,
    RDF_REST,
    RDF_TYPE,
    RdfTerm,
    Triple,
    XSD_BOOLEAN,
    XSD_STRING,
    is_list_head,
    ntriples_term,
    rdf_list,
)
from .xlsx import CellRange, parse_range

TT_IRI = "IRI"
TT_LITERAL = "Literal"
TT_BLANK_NODE = "BlankNode"
TT_GRAPH = "Graph"

_TERM_TYPE_IRIS = {
    vocab.RR_IRI: TT_IRI,
    vocab.RR_LITERAL: TT_LITERAL,
    vocab.RR_BLANK_NODE: TT_BLANK_NODE,
    vocab.SS_GRAPH: TT_GRAPH,
}


@dataclass(frozen=True)
class SpreadsheetSource:
    url: str
    sheet_name: str
    cell_range: CellRange
    filter_text: Optional[str] = None
    filter: Optional[FilterExpr] = None


@dataclass(frozen=True)
class FunctionInvocation:
    function_iri: str
    parameters: tuple[tuple[str, "TermMap"], ...]


@dataclass(frozen=True)
class TermMap:
    constant: Optional[RdfTerm] = None
    template: Optional[Template] = None
    reference: Optional[RefExpr] = None
    function: Optional[FunctionInvocation] = None
    term_type: Optional[str] = None
    datatype: Optional[str] = None
    language: Optional[str] = None

    @property
    def kind(self) -> str:
        if self.constant is not None:
            return "constant"
        if self.template is not None:
            return "template"
        if self.reference is not None:
            return "reference"
        return "function"

    def kind_count(self) -> int:
        return sum(x is not None for x in
                   (self.constant, self.template, self.reference, self.function))


@dataclass(frozen=True)
class PredicateObjectMap:
    predicate_maps: tuple[TermMap, ...]
    predicate_lists: tuple[tuple[Iri, ...], ...]
    object_maps: tuple[TermMap, ...]
    zip_pairs: bool = False


@dataclass(frozen=True)
class TriplesMap:
    id: RdfTerm
    source: SpreadsheetSource
    subject_map: TermMap
    classes: tuple[Iri, ...]
    predicate_object_maps: tuple[PredicateObjectMap, ...]


def _literal_text(term: Optional[RdfTerm]) -> Optional[str]:
    return term.lexical if isinstance(term, Literal) else None


class _ModelReader:
    def __init__(self, graph: Graph):
        self.g = graph
        self.diags: list[Diagnostic] = []
        self.map_id = "?"

    def _error(self, code: str, message: str) -> None:
        self.diags.append(error(code, message, triples_map=self.map_id))

    def _warn(self, code: str, message: str) -> None:
        self.diags.append(warning(code, message, triples_map=self.map_id))

    # -- entry -------------------------------------------------------------

    def read(self) -> list[TriplesMap]:
        maps: list[TriplesMap] = []
        seen: set[RdfTerm] = set()
        for t in self.g.matches(None, vocab.RML_LOGICAL_SOURCE, None):
            node = t.subject
            if node in seen:
                continue
            seen.add(node)
            self.map_id = ntriples_term(node)
            parsed = self._read_triples_map(node, t.object)
            if parsed is not None:
                maps.append(parsed)
        return maps

    def _read_triples_map(self, node: RdfTerm, ls_node: RdfTerm) -> Optional[TriplesMap]:
        formulation = self.g.value(ls_node, vocab.RML_REFERENCE_FORMULATION)
        if formulation != vocab.QL_SPREADSHEET:
            rendered = ntriples_term(formulation) if formulation is not None else "(none)"
            self._warn("W_UNSUPPORTED_FORMULATION",
                       f"skipped: unsupported reference formulation {rendered}")
            return None
        source = self._read_source(ls_node)
        if source is None:
            return None
        subject_map = self._read_subject(node)
        if subject_map is None:
            return None
        classes = self._read_classes(node)
        poms = []
        for pom_node in self.g.objects(node, vocab.RR_PREDICATE_OBJECT_MAP):
            pom = self._read_pom(pom_node)
            if pom is not None:
                poms.append(pom)
        return TriplesMap(
            id=node,
            source=source,
            subject_map=subject_map,
            classes=classes,
            predicate_object_maps=tuple(poms),
        )

    # -- logical source ------------------------------------------------------

    def _read_source(self, ls_node: RdfTerm) -> Optional[SpreadsheetSource]:
        src = self.g.value(ls_node, vocab.RML_SOURCE)
        if src is None:
            self._error("E_MISSING_SOURCE_FIELD", "logical source has no rml:source")
            return None
        fields = {}
        for key, prop in (("url", vocab.SS_URL),
                          ("sheetName", vocab.SS_SHEET_NAME),
                          ("range", vocab.SS_RANGE)):
            value = _literal_text(self.g.value(src, prop))
            if value is None:
                self._error("E_MISSING_SOURCE_FIELD",
                            f"spreadsheet source needs a literal ss:{key}")
                return None
            fields[key] = value
        try:
            cell_range = parse_range(fields["range"])
        except RangeSyntaxError as exc:
            self._error(exc.code, exc.message)
            return None
        filter_text = _literal_text(self.g.value(src, vocab.SS_JAVASCRIPT_FILTER))
        filter_expr = None
        if filter_text is not None:
            try:
                filter_expr = parse_filter(filter_text)
            except FilterSyntaxError as exc:
                self._error(exc.code, f"bad filter {filter_text!r}: {exc.message}")
                return None
        return SpreadsheetSource(
            url=fields["url"],
            sheet_name=fields["sheetName"],
            cell_range=cell_range,
            filter_text=filter_text,
            filter=filter_expr,
        )

    # -- subject -------------------------------------------------------------

    def _read_subject(self, node: RdfTerm) -> Optional[TermMap]:
        shortcut = self.g.value(node, vocab.RR_SUBJECT)
        map_node = self.g.value(node, vocab.RR_SUBJECT_MAP)
        if shortcut is not None and map_node is not None:
            self._error("E_BAD_TERMMAP", "both rr:subject and rr:subjectMap given")
            return None
        if shortcut is not None:
            # Literal shortcuts stay in the model; validate_model reports them.
            return TermMap(constant=shortcut)
        if map_node is None:
            self._error("E_BAD_TERMMAP", "triples map has no subject map")
            return None
        return self._read_term_map(map_node, position="subject")

    def _read_classes(self, node: RdfTerm) -> tuple[Iri, ...]:
        classes: list[Iri] = []
        map_node = self.g.value(node, vocab.RR_SUBJECT_MAP)
        if map_node is not None:
            for value in self.g.objects(map_node, vocab.RR_CLASS):
                if isinstance(value, Iri):
                    classes.append(value)
                else:
                    self._error("E_BAD_TERMMAP",
                                f"rr:class must be an IRI, got {ntriples_term(value)}")
        return tuple(classes)

    # -- predicate-object maps -------------------------------------------------

    def _read_pom(self, node: RdfTerm) -> Optional[PredicateObjectMap]:
        ok = True
        predicate_maps: list[TermMap] = []
        predicate_lists: list[tuple[Iri, ...]] = []

        for value in self.g.objects(node, vocab.RR_PREDICATE):
            if is_list_head(self.g, value) and not isinstance(value, Literal):
                items = self._read_predicate_list(value)
                if items is None:
                    ok = False
                else:
                    predicate_lists.append(items)
            elif isinstance(value, Iri):
                predicate_maps.append(TermMap(constant=value))
            else:
                self._error("E_BAD_TERMMAP",
                            f"rr:predicate must be an IRI, got {ntriples_term(value)}")
                ok = False
        for map_node in self.g.objects(node, vocab.RR_PREDICATE_MAP):
            if is_list_head(self.g, map_node) and not isinstance(map_node, Literal):
                items = self._read_predicate_list(map_node)
                if items is None:
                    ok = False
                else:
                    predicate_lists.append(items)
                continue
            tm = self._read_term_map(map_node, position="predicate")
            if tm is None:
                ok = False
            else:
                predicate_maps.append(tm)

        object_maps: list[TermMap] = []
        for value in self.g.objects(node, vocab.RR_OBJECT):
            if isinstance(value, BlankNode):
                self._error("E_BAD_TERMMAP",
                            "rr:object shortcut must be an IRI or literal")
                ok = False
            else:
                object_maps.append(TermMap(constant=value))
        for map_node in self.g.objects(node, vocab.RR_OBJECT_MAP):
            if is_list_head(self.g, map_node) and not isinstance(map_node, Literal):
                self._error("E_BAD_TERMMAP",
                            "RDF collections are only allowed in predicate maps")
                ok = False
                continue
            tm = self._read_term_map(map_node, position="object")
            if tm is None:
                ok = False
            else:
                object_maps.append(tm)

        zip_pairs = False
        zip_value = self.g.value(node, vocab.SS_ZIP)
        if zip_value is not None:
            flag = self._read_boolean(zip_value)
            if flag is None:
                ok = False
            else:
                zip_pairs = flag

        if not ok:
            return None
        if not (predicate_maps or predicate_lists) or not object_maps:
            self._error("E_BAD_TERMMAP",
                        "predicate-object map needs at least one predicate and one object")
            return None
        if zip_pairs:
            has_list_side = bool(predicate_lists) or any(
                om.function is not None for om in object_maps)
            if not has_list_side:
                self._error("E_ZIP_SHAPE",
                            "ss:zip true needs a predicate list or a "
                            "function-valued object map")
                return None
            if any(om.term_type == TT_GRAPH for om in object_maps):
                self._error("E_ZIP_SHAPE",
                            "ss:zip true cannot combine with the graph term type")
                return None
        return PredicateObjectMap(
            predicate_maps=tuple(predicate_maps),
            predicate_lists=tuple(predicate_lists),
            object_maps=tuple(object_maps),
            zip_pairs=zip_pairs,
        )

    def _read_predicate_list(self, head: RdfTerm) -> Optional[tuple[Iri, ...]]:
        try:
            items = rdf_list(self.g, head)
        except MalformedListError as exc:
            self._error(exc.code, exc.message)
            return None
        out = []
        for item in items:
            if not isinstance(item, Iri):
                self._error("E_BAD_TERMMAP",
                            f"predicate list items must be IRIs, got {ntriples_term(item)}")
                return None
            out.append(item)
        return tuple(out)

    def _read_boolean(self, term: RdfTerm) -> Optional[bool]:
        if isinstance(term, Literal) and term.datatype in (XSD_BOOLEAN, XSD_STRING):
            if term.lexical in ("true", "1"):
                return True
            if term.lexical in ("false", "0"):
                return False
        self._error("E_BAD_TERMMAP",
                    f"ss:zip must be a boolean, got {ntriples_term(term)}")
        return None

    # -- term maps ---------------------------------------------------------

    def _read_term_map(self, node: RdfTerm, position: str) -> Optional[TermMap]:
        if isinstance(node, Literal):
            self._error("E_BAD_TERMMAP", "term map node must be a resource")
            return None

        constant = self.g.value(node, vocab.RR_CONSTANT)
        template_text = _literal_text(self.g.value(node, vocab.RR_TEMPLATE))
        reference_text = _literal_text(self.g.value(node, vocab.RML_REFERENCE))
        function_node = self.g.value(node, vocab.FNML_FUNCTION_VALUE)

        kinds = sum(x is not None for x in
                    (constant, template_text, reference_text, function_node))
        if kinds != 1:
            self._error("E_BAD_TERMMAP",
                        f"term map needs exactly one of rr:constant / rr:template / "
                        f"rml:reference / fnml:functionValue, found {kinds}")
            return None

        template = None
        if template_text is not None:
            try:
                template = parse_template(template_text, known_only=False)
            except GridRmlError as exc:
                self._error(exc.code, f"bad template {template_text!r}: {exc.message}")
                return None
        reference = None
        if reference_text is not None:
            try:
                reference = parse_ref(reference_text, known_only=False)
            except GridRmlError as exc:
                self._error(exc.code, f"bad reference {reference_text!r}: {exc.message}")
                return None
        function = None
        if function_node is not None:
            if position != "object":
                self._error("E_BAD_TERMMAP",
                            "function maps are only allowed on object maps")
                return None
            function = self._read_function(function_node)
            if function is None:
                return None
        if constant is not None and isinstance(constant, BlankNode):
            self._error("E_BAD_TERMMAP", "rr:constant must be an IRI or literal")
            return None

        term_type = None
        tt_value = self.g.value(node, vocab.RR_TERM_TYPE)
        if tt_value is not None:
            term_type = _TERM_TYPE_IRIS.get(tt_value)
            if term_type is None:
                self._error("E_BAD_TERMMAP",
                            f"unknown term type {ntriples_term(tt_value)}")
                return None
        datatype_value = self.g.value(node, vocab.RR_DATATYPE)
        datatype = datatype_value.value if isinstance(datatype_value, Iri) else None
        if datatype_value is not None and datatype is None:
            self._error("E_BAD_TERMMAP", "rr:datatype must be an IRI")
            return None
        language = _literal_text(self.g.value(node, vocab.RR_LANGUAGE))
        if datatype is not None and language is not None:
            self._error("E_BAD_TERMMAP", "rr:datatype and rr:language are mutually exclusive")
            return None

        if term_type == TT_GRAPH and function is None:
            self._error("E_BAD_TERMMAP",
                        "the graph term type requires a function-valued object map")
            return None
        if position == "predicate" and term_type not in (None, TT_IRI):
            self._error("E_BAD_TERMMAP", "predicate maps must produce IRIs")
            return None
        if position == "subject" and term_type == TT_GRAPH:
            self._error("E_BAD_TERMMAP", "subject maps cannot use the graph term type")
            return None

        return TermMap(
            constant=constant,
            template=template,
            reference=reference,
            function=function,
            term_type=term_type,
            datatype=datatype,
            language=language,
        )

    def _read_function(self, node: RdfTerm) -> Optional[FunctionInvocation]:
        executes = self.g.value(node, vocab.FNO_EXECUTES)
        if not isinstance(executes, Iri):
            self._error("E_BAD_TERMMAP", "function map needs an fno:executes IRI")
            return None
        params: list[tuple[str, TermMap]] = []
        seen: set[str] = set()
        for t in self.g.matches(node, None, None):
            if t.predicate == vocab.FNO_EXECUTES or t.predicate.value == RDF_TYPE:
                continue
            param_iri = t.predicate.value
            if param_iri in seen:
                self._error("E_BAD_TERMMAP", f"duplicate function parameter <{param_iri}>")
                return None
            seen.add(param_iri)
            if isinstance(t.object, (Iri, Literal)):
                params.append((param_iri, TermMap(constant=t.object)))
            else:
                tm = self._read_term_map(t.object, position="parameter")
                if tm is None:
                    return None
                if tm.function is not None:
                    self._error("E_BAD_TERMMAP", "function parameters cannot nest functions")
                    return None
                params.append((param_iri, tm))
        return FunctionInvocation(function_iri=executes.value, parameters=tuple(params))


def parse_mapping_document(graph: Graph) -> tuple[list[TriplesMap], list[Diagnostic]]:
    """Extract every spreadsheet-backed triples map from a mapping graph."""
    reader = _ModelReader(graph)
    maps = reader.read()
    return maps, reader.diags


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------

def _iter_ref_exprs(tm: TermMap):
    if tm.template is not None:
        for part in tm.template.parts:
            if isinstance(part, Placeholder):
                yield part.ref
    if tm.reference is not None:
        yield tm.reference
    if tm.function is not None:
        for _, param in tm.function.parameters:
            yield from _iter_ref_exprs(param)


def _iter_term_maps(tmap: TriplesMap):
    yield tmap.subject_map
    for pom in tmap.predicate_object_maps:
        yield from pom.predicate_maps
        yield from pom.object_maps


def validate_model(maps: list[TriplesMap],
                   function_iris: Optional[set[str]] = None) -> list[Diagnostic]:
    """Lint a parsed model; returns diagnostics, never raises."""
    if function_iris is None:
        from .functions import FunctionRegistry
        function_iris = set(FunctionRegistry.with_builtins().iris())
    diags: list[Diagnostic] = []
    for tmap in maps:
        map_id = ntriples_term(tmap.id)
        subject = tmap.subject_map
        if subject.term_type == TT_LITERAL or isinstance(subject.constant, Literal):
            diags.append(error("E_BAD_TERMMAP",
                               "subject map must not produce literals",
                               triples_map=map_id))
        if not tmap.predicate_object_maps and not tmap.classes:
            diags.append(warning("W_UNREACHABLE_MAP",
                                 "map emits no triples (no classes, no "
                                 "predicate-object maps)",
                                 triples_map=map_id))
        for tm in _iter_term_maps(tmap):
            for ref in _iter_ref_exprs(tm):
                if ref.variable not in VARIABLE_NAMES:
                    diags.append(warning("W_UNKNOWN_VARIABLE",
                                         f"unknown variable {ref.variable!r}",
                                         triples_map=map_id))
            if tm.function is not None and tm.function.function_iri not in function_iris:
                diags.append(warning("W_UNREGISTERED_FUNCTION",
                                     f"function <{tm.function.function_iri}> is "
                                     "not registered",
                                     triples_map=map_id))
    return diags


# ---------------------------------------------------------------------------
# Normalized re-serialization (round-trip support and tooling)
# ---------------------------------------------------------------------------

class _ModelWriter:
    def __init__(self):
        self.g = Graph()
        self.counter = 0

    def blank(self) -> BlankNode:
        node = BlankNode(f"m{self.counter}")
        self.counter += 1
        return node

    def add(self, s, p, o) -> None:
        self.g.add(Triple(s, p, o))

    def collection(self, items) -> RdfTerm:
        if not items:
            return Iri(RDF_NIL)
        head = self.blank()
        node = head
        for i, item in enumerate(items):
            self.add(node, Iri(RDF_FIRST), item)
            rest: RdfTerm = self.blank() if i + 1 < len(items) else Iri(RDF_NIL)
            self.add(node, Iri(RDF_REST), rest)
            node = rest
        return head

    def term_map(self, tm: TermMap) -> BlankNode:
        node = self.blank()
        if tm.constant is not None:
            self.add(node, vocab.RR_CONSTANT, tm.constant)
        elif tm.template is not None:
            self.add(node, vocab.RR_TEMPLATE, Literal(tm.template.render()))
        elif tm.reference is not None:
            self.add(node, vocab.RML_REFERENCE, Literal(tm.reference.render()))
        elif tm.function is not None:
            fn_node = self.blank()
            self.add(node, vocab.FNML_FUNCTION_VALUE, fn_node)
            self.add(fn_node, vocab.FNO_EXECUTES, Iri(tm.function.function_iri))
            for param_iri, param_tm in tm.function.parameters:
                self.add(fn_node, Iri(param_iri), self.term_map(param_tm))
        if tm.term_type is not None:
            tt_iri = {v: k for k, v in _TERM_TYPE_IRIS.items()}[tm.term_type]
            self.add(node, vocab.RR_TERM_TYPE, tt_iri)
        if tm.datatype is not None:
            self.add(node, vocab.RR_DATATYPE, Iri(tm.datatype))
        if tm.language is not None:
            self.add(node, vocab.RR_LANGUAGE, Literal(tm.language))
        return node

    def triples_map(self, tmap: TriplesMap) -> None:
        node = tmap.id if isinstance(tmap.id, Iri) else self.blank()
        ls = self.blank()
        src = self.blank()
        self.add(node, Iri(RDF_TYPE), vocab.RR_TRIPLES_MAP)
        self.add(node, vocab.RML_LOGICAL_SOURCE, ls)
        self.add(ls, vocab.RML_REFERENCE_FORMULATION, vocab.QL_SPREADSHEET)
        self.add(ls, vocab.RML_SOURCE, src)
        self.add(src, Iri(RDF_TYPE), vocab.SS_WORKBOOK)
        self.add(src, vocab.SS_URL, Literal(tmap.source.url))
        self.add(src, vocab.SS_SHEET_NAME, Literal(tmap.source.sheet_name))
        self.add(src, vocab.SS_RANGE, Literal(tmap.source.cell_range.to_a1()))
        if tmap.source.filter_text is not None:
            self.add(src, vocab.SS_JAVASCRIPT_FILTER, Literal(tmap.source.filter_text))
        subject_node = self.term_map(tmap.subject_map)
        self.add(node, vocab.RR_SUBJECT_MAP, subject_node)
        for cls in tmap.classes:
            self.add(subject_node, vocab.RR_CLASS, cls)
        for pom in tmap.predicate_object_maps:
            pom_node = self.blank()
            self.add(node, vocab.RR_PREDICATE_OBJECT_MAP, pom_node)
            for tm in pom.predicate_maps:
                self.add(pom_node, vocab.RR_PREDICATE_MAP, self.term_map(tm))
            for items in pom.predicate_lists:
                self.add(pom_node, vocab.RR_PREDICATE_MAP, self.collection(items))
            for tm in pom.object_maps:
                self.add(pom_node, vocab.RR_OBJECT_MAP, self.term_map(tm))
            if pom.zip_pairs:
                self.add(pom_node, vocab.SS_ZIP, Literal("true", datatype=XSD_BOOLEAN))


def model_to_graph(maps: list[TriplesMap]) -> Graph:
    """Serialize a model back to normalized mapping vocabulary."""
    writer = _ModelWriter()
    for tmap in maps:
        writer.triples_map(tmap)
    return writer.g
