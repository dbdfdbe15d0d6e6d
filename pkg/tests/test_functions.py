"""Function registry and the built-in extractors."""

import pytest

from gridrml import vocab
from gridrml.errors import FunctionParamError, FunctionRuntimeError, FunctionUnregisteredError
from gridrml.expr import CURRENT, EvalContext, RefExpr, Scalar
from gridrml.functions import (
    FunctionRegistry,
    GraphResult,
    Values,
    builtin_persons_to_graph,
    builtin_split,
    invoke,
)
from gridrml.model import FunctionInvocation, TermMap
from gridrml.rdf import Iri, Literal, parse_turtle
from gridrml.xlsx import open_workbook_bytes, parse_a1
from gridrml.xlsxgen import XlsxBuilder

from helpers import blank_labels

BASE = "http://example.org/"
PERSON_BASE = "http://example.org/person/"


@pytest.fixture()
def ctx():
    wb = XlsxBuilder()
    wb.sheet("S").text("A1", "a;b;c")
    return EvalContext(open_workbook_bytes(wb.to_bytes()), "S", parse_a1("A1"))


class TestSplit:
    def test_split_oracle(self):
        # Oracle: plain str.split + strip + drop-empties comprehension.
        value, sep = "red; green ;blue", ";"
        expected = tuple(p.strip() for p in value.split(sep) if p.strip())
        assert builtin_split(value, sep) == Values(tuple(Scalar.text(p) for p in expected))
        assert expected == ("red", "green", "blue")

    def test_empty_input(self):
        assert builtin_split("", ";") == Values(())

    def test_no_separator_present(self):
        assert builtin_split("solo", ";") == Values((Scalar.text("solo"),))

    def test_empty_pieces_dropped(self):
        assert builtin_split("a;;b", ";") == Values(
            (Scalar.text("a"), Scalar.text("b")))

    def test_empty_separator_rejected(self):
        with pytest.raises(FunctionParamError):
            builtin_split("a;b", "")

    def test_concat_resplit_idempotent(self):
        for value in ("a;b;c", " x ;y", "one", ""):
            first = builtin_split(value, ";")
            joined = ";".join(s.value for s in first.items)
            assert builtin_split(joined, ";") == first


def persons_graph(value, base=PERSON_BASE):
    result = builtin_persons_to_graph(value, base)
    return parse_turtle(result.turtle, BASE), result


class TestPersonsToGraph:
    def test_two_persons_hand_expanded(self):
        g, result = persons_graph("Doe, John; Roe, Jane")
        john = Iri(PERSON_BASE + "john-doe")
        jane = Iri(PERSON_BASE + "jane-roe")
        assert g.value(john, vocab.FOAF_GIVEN_NAME) == Literal("John")
        assert g.value(john, vocab.FOAF_FAMILY_NAME) == Literal("Doe")
        assert g.value(jane, vocab.FOAF_GIVEN_NAME) == Literal("Jane")
        assert g.value(jane, vocab.FOAF_FAMILY_NAME) == Literal("Roe")
        selections = g.objects(vocab.SS_SELECTED_OBJECTS, vocab.RR_OBJECT)
        assert selections == [john, jane]  # input order
        assert len(g) == 6

    def test_empty_input(self):
        g, result = persons_graph("")
        assert len(g) == 0
        assert result.turtle == ""

    def test_single_token_fallback_label(self):
        g, _ = persons_graph("Cher")
        cher = Iri(PERSON_BASE + "cher")
        assert g.value(cher, vocab.RDFS_LABEL) == Literal("Cher")
        assert len(g.matches(cher, None, None) and list(g.matches(cher, None, None))) == 1

    def test_and_separator(self):
        g, _ = persons_graph("Pratchett, Terry and Gaiman, Neil")
        assert g.value(Iri(PERSON_BASE + "terry-pratchett"),
                       vocab.FOAF_FAMILY_NAME) == Literal("Pratchett")
        assert g.value(Iri(PERSON_BASE + "neil-gaiman"),
                       vocab.FOAF_GIVEN_NAME) == Literal("Neil")

    def test_whitespace_name_split(self):
        g, _ = persons_graph("John Ronald Doe")
        node = Iri(PERSON_BASE + "john-ronald-doe")
        assert g.value(node, vocab.FOAF_GIVEN_NAME) == Literal("John Ronald")
        assert g.value(node, vocab.FOAF_FAMILY_NAME) == Literal("Doe")

    def test_slug_is_percent_encoded(self):
        g, _ = persons_graph("Brontë, Emily")
        assert g.value(Iri(PERSON_BASE + "emily-bront%C3%AB"),
                       vocab.FOAF_GIVEN_NAME) == Literal("Emily")

    def test_blank_nodes_without_base_iri(self):
        g, _ = persons_graph("Doe, John; Roe, Jane", base=None)
        assert len(blank_labels(g)) == 2
        selections = g.objects(vocab.SS_SELECTED_OBJECTS, vocab.RR_OBJECT)
        assert len(selections) == 2

    def test_selection_count_matches_person_count(self):
        samples = ["", "Cher", "Doe, John", "a; b; c", "X Y and Z W; Q",
                   "only and and only"]
        for value in samples:
            g, _ = persons_graph(value)
            persons = {t.subject for t in g
                       if t.subject != vocab.SS_SELECTED_OBJECTS}
            selections = g.objects(vocab.SS_SELECTED_OBJECTS, vocab.RR_OBJECT)
            assert len(selections) == len(persons)

    def test_result_parses_cleanly(self):
        for value in ("Doe, John", "a and b", "Brontë, Emily; Cher"):
            for base in (PERSON_BASE, None):
                result = builtin_persons_to_graph(value, base)
                parse_turtle(result.turtle, BASE)  # must not raise


class TestInvoke:
    def _invocation(self, iri, params):
        return FunctionInvocation(iri, tuple(params))

    def test_split_through_registry(self, ctx):
        registry = FunctionRegistry.with_builtins()
        inv = self._invocation(vocab.FN_SPLIT, [
            (vocab.FN_PARAM_VALUE, TermMap(reference=RefExpr(CURRENT, "valueString"))),
            (vocab.FN_PARAM_SEPARATOR, TermMap(constant=Literal(";"))),
        ])
        assert invoke(registry, inv, ctx) == Values(
            (Scalar.text("a"), Scalar.text("b"), Scalar.text("c")))

    def test_unregistered(self, ctx):
        registry = FunctionRegistry.with_builtins()
        inv = self._invocation("http://example.org/nope", [])
        with pytest.raises(FunctionUnregisteredError):
            invoke(registry, inv, ctx)

    def test_missing_required_parameter(self, ctx):
        registry = FunctionRegistry.with_builtins()
        inv = self._invocation(vocab.FN_SPLIT, [
            (vocab.FN_PARAM_VALUE, TermMap(constant=Literal("a;b"))),
        ])
        with pytest.raises(FunctionParamError):
            invoke(registry, inv, ctx)

    def test_absent_parameter_passed_as_null(self, ctx):
        registry = FunctionRegistry.with_builtins()
        inv = self._invocation(vocab.FN_SPLIT, [
            (vocab.FN_PARAM_VALUE, TermMap(reference=RefExpr(CURRENT, "valueNumeric"))),
            (vocab.FN_PARAM_SEPARATOR, TermMap(constant=Literal(";"))),
        ])
        assert invoke(registry, inv, ctx) == Values(())

    def test_body_errors_become_runtime_errors(self, ctx):
        registry = FunctionRegistry.with_builtins()

        def broken(params):
            raise RuntimeError("boom")

        registry.register("http://example.org/broken", broken)
        inv = self._invocation("http://example.org/broken", [])
        with pytest.raises(FunctionRuntimeError) as exc:
            invoke(registry, inv, ctx)
        assert "http://example.org/broken" in exc.value.message

    def test_referential_transparency(self, ctx):
        registry = FunctionRegistry.with_builtins()
        inv = self._invocation(vocab.FN_PERSONS_TO_GRAPH, [
            (vocab.FN_PARAM_VALUE, TermMap(constant=Literal("Doe, John; Roe, Jane"))),
            (vocab.FN_PARAM_BASE_IRI, TermMap(constant=Literal(PERSON_BASE))),
        ])
        first = invoke(registry, inv, ctx)
        second = invoke(registry, inv, ctx)
        assert isinstance(first, GraphResult)
        assert first.turtle == second.turtle

    def test_duplicate_registration_rejected(self):
        registry = FunctionRegistry.with_builtins()
        with pytest.raises(ValueError):
            registry.register(vocab.FN_SPLIT, lambda p: Values(()))
