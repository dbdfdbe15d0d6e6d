"""Engine execution: iteration, pairing, graph merging, determinism."""

import random

import pytest

from gridrml import vocab
from gridrml.engine import (
    ExecutionOptions,
    apply_graph_term_type,
    combine,
    execute_mapping,
    generate_term,
    memory_resolver,
    run_mapping_text,
)
from gridrml.errors import ZipLengthError
from gridrml.expr import CURRENT, EvalContext, RefExpr, Relative, eval_filter, parse_filter
from gridrml.functions import FunctionRegistry, GraphResult, builtin_persons_to_graph
from gridrml.model import TermMap, parse_mapping_document
from gridrml.rdf import (
    BlankNode,
    Graph,
    Iri,
    Literal,
    XSD_DOUBLE,
    Triple,
    parse_turtle,
    to_ntriples,
)
from gridrml.xlsx import CellType, open_workbook_bytes, parse_a1
from gridrml.xlsxgen import XlsxBuilder

from helpers import PAPERS_MAPPING, blank_labels, papers_workbook_bytes

BASE = "http://example.org/"
EX = "http://example.org/"

GOLDEN_SCORES = (
    '<http://example.org/A2> <http://example.org/score> '
    '"3.5"^^<http://www.w3.org/2001/XMLSchema#double> .\n'
    '<http://example.org/A4> <http://example.org/score> '
    '"7"^^<http://www.w3.org/2001/XMLSchema#double> .\n'
)


def run_papers(**opt_kwargs):
    maps, diags = parse_mapping_document(parse_turtle(PAPERS_MAPPING, BASE))
    assert not diags
    return execute_mapping(
        maps,
        ExecutionOptions(**opt_kwargs),
        resolver=memory_resolver({"workbook.xlsx": papers_workbook_bytes()}),
    )


class TestScoresScenario:
    def test_filter_and_references_hand_trace(self):
        # Hand trace: /Know\w*/ passes A2 and A4 only; predicate from C1;
        # objects from C2/C4 typed xsd:double.
        result = run_papers()
        assert result.diagnostics == []
        assert to_ntriples(result.graph) == GOLDEN_SCORES
        assert result.stats.cells_visited == 4
        assert result.stats.cells_matched == 2
        assert result.stats.triples_emitted == 2

    def test_empty_range(self):
        wb = XlsxBuilder()
        wb.sheet("Papers")
        maps, _ = parse_mapping_document(parse_turtle(PAPERS_MAPPING, BASE))
        result = execute_mapping(maps, ExecutionOptions(),
                                 resolver=memory_resolver({"workbook.xlsx": wb.to_bytes()}))
        assert len(result.graph) == 0
        assert result.diagnostics == []

    def test_missing_workbook_is_error_without_partial_output(self):
        maps, _ = parse_mapping_document(parse_turtle(PAPERS_MAPPING, BASE))
        result = execute_mapping(maps, ExecutionOptions(),
                                 resolver=memory_resolver({}))
        assert [d.code for d in result.diagnostics] == ["E_IO"]
        assert [d.severity for d in result.diagnostics] == ["error"]
        assert len(result.graph) == 0

    def test_missing_sheet(self):
        wb = XlsxBuilder()
        wb.sheet("Other").text("A1", "x")
        maps, _ = parse_mapping_document(parse_turtle(PAPERS_MAPPING, BASE))
        result = execute_mapping(maps, ExecutionOptions(),
                                 resolver=memory_resolver({"workbook.xlsx": wb.to_bytes()}))
        assert [d.code for d in result.diagnostics] == ["E_SHEET_NOT_FOUND"]


@pytest.fixture()
def ctx():
    return EvalContext(open_workbook_bytes(papers_workbook_bytes()), "Papers",
                       parse_a1("A2"))


class TestGenerateTerm:
    def _registry(self):
        return FunctionRegistry.with_builtins()

    def test_reference_numeric_default_double(self, ctx):
        tm = TermMap(reference=RefExpr(Relative(2, 0), "valueNumeric"))
        term = generate_term(tm, ctx, "object", BASE, self._registry())
        assert term == Literal("3.5", datatype=XSD_DOUBLE)

    def test_template_absent_propagates(self, ctx):
        from gridrml.expr import parse_template
        tm = TermMap(template=parse_template("http://x/{valueNumeric}"))
        assert generate_term(tm, ctx, "subject", BASE, self._registry()) is None

    def test_constant_identity(self, ctx):
        tm = TermMap(constant=Iri("http://example.org/fixed"))
        assert generate_term(tm, ctx, "subject", BASE, self._registry()) == \
            Iri("http://example.org/fixed")

    def test_iri_position_joins_base(self, ctx):
        from gridrml.expr import parse_template
        tm = TermMap(template=parse_template("items/{address}"))
        term = generate_term(tm, ctx, "subject", BASE, self._registry())
        assert term == Iri("http://example.org/items/A2")

    def test_bad_iri_raises(self, ctx):
        from gridrml.errors import BadIriError
        from gridrml.expr import parse_template
        tm = TermMap(template=parse_template("http://x/<{address}>"))
        with pytest.raises(BadIriError):
            generate_term(tm, ctx, "subject", BASE, self._registry())

    def test_explicit_datatype_override(self, ctx):
        tm = TermMap(reference=RefExpr(Relative(2, 0), "valueNumeric"),
                     datatype="http://www.w3.org/2001/XMLSchema#decimal")
        term = generate_term(tm, ctx, "object", BASE, self._registry())
        assert term == Literal("3.5", datatype="http://www.w3.org/2001/XMLSchema#decimal")

    def test_language_tag(self, ctx):
        tm = TermMap(reference=RefExpr(CURRENT, "valueString"), language="en")
        term = generate_term(tm, ctx, "object", BASE, self._registry())
        assert term == Literal("Knowledge Graphs", language="en")

    def test_blank_node_term_type(self, ctx):
        from gridrml.model import TT_BLANK_NODE
        tm = TermMap(reference=RefExpr(CURRENT, "address"), term_type=TT_BLANK_NODE)
        term = generate_term(tm, ctx, "subject", BASE, self._registry())
        assert term == BlankNode("A2")

    def test_integer_and_boolean_datatypes(self, ctx):
        from gridrml.rdf import XSD_BOOLEAN, XSD_INTEGER
        tm = TermMap(reference=RefExpr(CURRENT, "column"))
        assert generate_term(tm, ctx, "object", BASE, self._registry()) == \
            Literal("0", datatype=XSD_INTEGER)
        wb = XlsxBuilder()
        wb.sheet("S").boolean("A1", True)
        bool_ctx = EvalContext(open_workbook_bytes(wb.to_bytes()), "S", parse_a1("A1"))
        tm = TermMap(reference=RefExpr(CURRENT, "valueBoolean"))
        assert generate_term(tm, bool_ctx, "object", BASE, self._registry()) == \
            Literal("true", datatype=XSD_BOOLEAN)


class TestCombine:
    P = [Iri(EX + "p1"), Iri(EX + "p2")]
    O = [Literal("o1"), Literal("o2")]

    def test_cartesian_four_pairs(self):
        pairs = combine(self.P, self.O, zip_pairs=False)
        assert pairs == [(self.P[0], self.O[0]), (self.P[0], self.O[1]),
                         (self.P[1], self.O[0]), (self.P[1], self.O[1])]

    def test_zip_diagonal(self):
        pairs = combine(self.P, self.O, zip_pairs=True)
        assert pairs == [(self.P[0], self.O[0]), (self.P[1], self.O[1])]

    def test_empty_side(self):
        assert combine([self.P[0]], [], zip_pairs=False) == []
        with pytest.raises(ZipLengthError):
            combine([self.P[0]], [], zip_pairs=True)

    def test_zip_equals_cartesian_diagonal_property(self):
        rng = random.Random(13)
        for _ in range(200):
            n = rng.randint(1, 5)
            predicates = [Iri(f"{EX}p{i}") for i in range(n)]
            objects = [Literal(f"o{i}") for i in range(n)]
            cartesian = combine(predicates, objects, zip_pairs=False)
            diagonal = [pair for pair in cartesian
                        if pair[0].value[-1] == pair[1].lexical[-1]]
            assert combine(predicates, objects, zip_pairs=True) == diagonal


ZIP_MAPPING = """\
@prefix rr: <http://www.w3.org/ns/r2rml#> .
@prefix rml: <http://semweb.mmlab.be/ns/rml#> .
@prefix ql: <http://semweb.mmlab.be/ns/ql#> .
@prefix ss: <http://www.dfki.uni-kl.de/~mschroeder/ld/ss#> .
@prefix fnml: <http://semweb.mmlab.be/ns/fnml#> .
@prefix fno: <https://w3id.org/function/ontology#> .
@prefix fn: <https://gridrml.dev/fn#> .
@prefix ex: <http://example.org/> .

<#Zip> rml:logicalSource [ rml:referenceFormulation ql:Spreadsheet ;
    rml:source [ ss:url "w.xlsx" ; ss:sheetName "S" ; ss:range "A1:A2" ] ] ;
  rr:subjectMap [ rr:template "http://example.org/r/{address}" ] ;
  rr:predicateObjectMap [
    rr:predicateMap ( ex:first ex:second ) ;
    rr:objectMap [ fnml:functionValue [
      fno:executes fn:split ;
      fn:value [ rml:reference "valueString" ] ;
      fn:separator ";" ] ] ;
    ss:zip true
  ] .
"""


class TestZipExecution:
    def _run(self, strict=False):
        wb = XlsxBuilder()
        sheet = wb.sheet("S")
        sheet.text("A1", "a;b")      # matches |P| = 2
        sheet.text("A2", "a;b;c")    # mismatch
        maps, diags = parse_mapping_document(parse_turtle(ZIP_MAPPING, BASE))
        assert not diags
        return execute_mapping(maps, ExecutionOptions(strict=strict),
                               resolver=memory_resolver({"w.xlsx": wb.to_bytes()}))

    def test_matching_lengths_pair_diagonally(self):
        result = self._run()
        g = result.graph
        assert Triple(Iri(EX + "r/A1"), Iri(EX + "first"), Literal("a")) in g
        assert Triple(Iri(EX + "r/A1"), Iri(EX + "second"), Literal("b")) in g
        assert Triple(Iri(EX + "r/A1"), Iri(EX + "first"), Literal("b")) not in g

    def test_mismatch_warns_and_skips_pom(self):
        result = self._run()
        zip_diags = [d for d in result.diagnostics if d.code == "E_ZIP_LENGTH"]
        assert len(zip_diags) == 1
        assert zip_diags[0].severity == "warning"
        assert zip_diags[0].cell == "A2"
        assert not [t for t in result.graph if t.subject == Iri(EX + "r/A2")]

    def test_mismatch_is_error_in_strict_mode(self):
        result = self._run(strict=True)
        zip_diags = [d for d in result.diagnostics if d.code == "E_ZIP_LENGTH"]
        assert zip_diags[0].severity == "error"
        assert result.has_errors


GRAPH_MAPPING = """\
@prefix rr: <http://www.w3.org/ns/r2rml#> .
@prefix rml: <http://semweb.mmlab.be/ns/rml#> .
@prefix ql: <http://semweb.mmlab.be/ns/ql#> .
@prefix ss: <http://www.dfki.uni-kl.de/~mschroeder/ld/ss#> .
@prefix fnml: <http://semweb.mmlab.be/ns/fnml#> .
@prefix fno: <https://w3id.org/function/ontology#> .
@prefix fn: <https://gridrml.dev/fn#> .
@prefix ex: <http://example.org/> .

<#People> rml:logicalSource [ rml:referenceFormulation ql:Spreadsheet ;
    rml:source [ ss:url "w.xlsx" ; ss:sheetName "S" ; ss:range "A1:A2" ] ] ;
  rr:subjectMap [ rr:template "http://example.org/row/{row}" ] ;
  rr:predicateObjectMap [
    rr:predicate ex:author ;
    rr:objectMap [
      rr:termType ss:Graph ;
      fnml:functionValue [
        fno:executes fn:personsToGraph ;
        fn:value [ rml:reference "valueString" ]
      ]
    ]
  ] .
"""


class TestGraphTermType:
    def test_persons_merge_and_link(self):
        # Hand expansion of the person rule for one cell.
        out = Graph()
        result = builtin_persons_to_graph("Doe, John", "http://example.org/person/")
        diags = apply_graph_term_type(result, Iri(EX + "book"), [Iri(EX + "author")],
                                      out, "g0_", BASE)
        assert diags == []
        john = Iri("http://example.org/person/john-doe")
        assert Triple(Iri(EX + "book"), Iri(EX + "author"), john) in out
        assert out.value(john, vocab.FOAF_GIVEN_NAME) == Literal("John")
        assert out.value(john, vocab.FOAF_FAMILY_NAME) == Literal("Doe")
        assert len(out) == 3

    def test_empty_graph_warns_no_selection(self):
        out = Graph()
        diags = apply_graph_term_type(GraphResult(""), Iri(EX + "s"),
                                      [Iri(EX + "p")], out, "g0_", BASE)
        assert len(out) == 0
        assert [d.code for d in diags] == ["W_NO_SELECTION"]

    def test_invalid_turtle_raises_graph_parse(self):
        from gridrml.errors import GraphParseError
        with pytest.raises(GraphParseError):
            apply_graph_term_type(GraphResult("@@@"), Iri(EX + "s"), [], Graph(),
                                  "g0_", BASE)

    def test_blank_nodes_disjoint_across_invocations(self):
        # Renaming oracle: parse each result separately, then check the
        # merged graph holds disjoint label sets per invocation.
        out = Graph()
        first = builtin_persons_to_graph("Doe, John; Roe, Jane", None)
        second = builtin_persons_to_graph("Doe, John; Roe, Jane", None)
        apply_graph_term_type(first, Iri(EX + "a"), [Iri(EX + "p")], out, "g0_", BASE)
        apply_graph_term_type(second, Iri(EX + "b"), [Iri(EX + "p")], out, "g1_", BASE)
        labels = blank_labels(out)
        first_labels = {l for l in labels if l.startswith("g0_")}
        second_labels = {l for l in labels if l.startswith("g1_")}
        assert len(first_labels) == 2
        assert len(second_labels) == 2
        assert first_labels.isdisjoint(second_labels)
        assert labels == first_labels | second_labels

    def test_engine_end_to_end_blank_person_nodes(self):
        wb = XlsxBuilder()
        sheet = wb.sheet("S")
        sheet.text("A1", "Doe, John")
        sheet.text("A2", "Roe, Jane")
        maps, diags = parse_mapping_document(parse_turtle(GRAPH_MAPPING, BASE))
        assert not diags
        result = execute_mapping(maps, ExecutionOptions(),
                                 resolver=memory_resolver({"w.xlsx": wb.to_bytes()}))
        assert result.diagnostics == []
        labels = blank_labels(result.graph)
        assert len(labels) == 2  # one blank person per cell, disjoint
        authors = [t for t in result.graph if t.predicate == Iri(EX + "author")]
        assert len(authors) == 2
        assert all(isinstance(t.object, BlankNode) for t in authors)


class TestEngineProperties:
    def test_determinism_two_runs_byte_identical(self):
        first = run_papers()
        second = run_papers()
        assert to_ntriples(first.graph) == to_ntriples(second.graph)
        assert first.diagnostics == second.diagnostics

    def test_blank_cells_skipped_by_default(self):
        wb = XlsxBuilder()
        sheet = wb.sheet("Papers")
        sheet.text("C1", "score")
        sheet.blank("A2")
        maps, _ = parse_mapping_document(parse_turtle(PAPERS_MAPPING, BASE))
        default = execute_mapping(maps, ExecutionOptions(),
                                  resolver=memory_resolver({"workbook.xlsx": wb.to_bytes()}))
        assert len(default.graph) == 0
        assert default.stats.cells_matched == 0

    def test_include_blank_cells_option(self):
        wb = XlsxBuilder()
        sheet = wb.sheet("S")
        sheet.blank("A1")
        mapping = ZIP_MAPPING.replace("ss:range \"A1:A2\"", "ss:range \"A1\"")
        mapping = mapping.replace("ss:zip true", "ss:zip false")
        maps, _ = parse_mapping_document(parse_turtle(mapping, BASE))
        result = execute_mapping(
            maps, ExecutionOptions(include_blank_cells=True),
            resolver=memory_resolver({"w.xlsx": wb.to_bytes()}))
        # The blank cell is visited and matched; split over a null value
        # yields an empty list, so no pairs are emitted.
        assert result.stats.cells_matched == 1
        assert len(result.graph) == 0

    def test_subject_skip_totality(self):
        # Subjects based on valueNumeric are absent for text cells; no triple
        # may leak from those cells.
        mapping = PAPERS_MAPPING.replace(
            'rr:template "http://example.org/{address}"',
            'rr:template "http://example.org/{(2,0).valueInt}"')
        maps, _ = parse_mapping_document(parse_turtle(mapping, BASE))
        wb_bytes = papers_workbook_bytes()
        result = execute_mapping(maps, ExecutionOptions(),
                                 resolver=memory_resolver({"workbook.xlsx": wb_bytes}))
        subjects = {t.subject for t in result.graph}
        assert subjects == {Iri(EX + "3"), Iri(EX + "7")}
        warnings = [d for d in result.diagnostics if d.code == "W_NO_SUBJECT"]
        assert warnings == []  # filter already excluded the blank/non-matching cells

    def test_no_subject_warning(self):
        mapping = PAPERS_MAPPING.replace(
            'rr:template "http://example.org/{address}"',
            'rr:template "http://example.org/{valueNumeric}"')
        maps, _ = parse_mapping_document(parse_turtle(mapping, BASE))
        result = execute_mapping(
            maps, ExecutionOptions(),
            resolver=memory_resolver({"workbook.xlsx": papers_workbook_bytes()}))
        codes = [d.code for d in result.diagnostics]
        assert codes == ["W_NO_SUBJECT", "W_NO_SUBJECT"]
        assert len(result.graph) == 0

    def test_filter_soundness_brute_force(self):
        # Oracle: direct enumeration of {c : non-blank and evalFilter(c)}.
        rng = random.Random(21)
        wb = XlsxBuilder()
        sheet = wb.sheet("Papers")
        for row in range(1, 6):
            a1 = f"A{row}"
            roll = rng.random()
            if roll < 0.3:
                sheet.text(a1, rng.choice(["Knowledge", "Nope", "Know-how"]))
            elif roll < 0.6:
                sheet.number(a1, rng.choice([0.5, 2.0]))
            elif roll < 0.8:
                sheet.blank(a1)
        data = wb.to_bytes()
        book = open_workbook_bytes(data)
        parsed = parse_filter("/Know\\w*/.test(valueString) || valueNumeric > 1")
        expected = set()
        for addr in (parse_a1(f"A{r}") for r in range(1, 6)):
            cell = book.sheet("Papers").cells.get(addr)
            if cell is None or cell.cell_type == CellType.BLANK:
                continue
            if eval_filter(parsed, EvalContext(book, "Papers", addr)):
                expected.add(addr.to_a1())
        mapping = PAPERS_MAPPING.replace('ss:range "A2:A5"', 'ss:range "A1:A5"')
        mapping = mapping.replace(
            '"/Know\\\\w*/.test(valueString)"',
            '"/Know\\\\w*/.test(valueString) || valueNumeric > 1"')
        maps, diags = parse_mapping_document(parse_turtle(mapping, BASE))
        assert not diags
        result = execute_mapping(maps, ExecutionOptions(),
                                 resolver=memory_resolver({"workbook.xlsx": data}))
        # Subject template {address} never fails, so subject-producing cells
        # are exactly the matched ones.
        produced = {t.subject.value[len(EX):] for t in result.graph}
        produced |= {d.cell for d in result.diagnostics if d.code == "W_NO_SUBJECT"}
        assert result.stats.cells_matched == len(expected)
        assert produced <= expected

    def test_workbook_cache_shared_across_maps(self):
        mapping = PAPERS_MAPPING + PAPERS_MAPPING.replace("<#PapersMap>", "<#Second>")
        maps, diags = parse_mapping_document(parse_turtle(mapping, BASE))
        assert len(maps) == 2
        calls = []
        data = papers_workbook_bytes()

        def counting_resolver(url):
            calls.append(url)
            return open_workbook_bytes(data)

        result = execute_mapping(maps, ExecutionOptions(), resolver=counting_resolver)
        assert calls == ["workbook.xlsx"]
        assert len(result.graph) == 2  # same triples, set semantics

    def test_run_mapping_text_surfaces_turtle_errors(self):
        result = run_mapping_text("not turtle at all", ExecutionOptions(),
                                  resolver=memory_resolver({}))
        assert result.has_errors
        assert result.diagnostics[0].code == "E_SYNTAX"
        assert len(result.graph) == 0

    def test_run_mapping_text_totality_fuzz(self):
        # The whole pipeline must return a result, never raise, for junk
        # input (this is what keeps the service from ever 500ing on text).
        import string
        rng = random.Random(4)
        pool = string.printable + "é世☃"
        for _ in range(1000):
            text = "".join(rng.choice(pool) for _ in range(rng.randint(0, 60)))
            result = run_mapping_text(text, ExecutionOptions(),
                                      resolver=memory_resolver({}))
            assert result.stats is not None
