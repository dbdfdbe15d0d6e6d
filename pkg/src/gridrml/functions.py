"""Invocation-style transformation functions for object maps.

Two result shapes exist: a ``Values`` list feeding the zip/Cartesian
combiners, and a ``GraphResult`` carrying a serialized subgraph for the
graph term type. Built-ins cover the common "many things in one cell"
cases; hosts may register more functions at engine construction time, and
mapping documents can never define function bodies.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable, Optional, Union

from . import vocab
from .errors import (
    FunctionParamError,
    FunctionRuntimeError,
    FunctionUnregisteredError,
    GridRmlError,
)
from .expr import EvalContext, Scalar, eval_ref, expand_template
from .model import FunctionInvocation, TermMap
from .rdf import Iri, Literal, XSD_BOOLEAN, XSD_DECIMAL, XSD_DOUBLE, XSD_INTEGER, ntriples_term


@dataclass(frozen=True)
class Values:
    items: tuple[Scalar, ...]


@dataclass(frozen=True)
class GraphResult:
    turtle: str


FunctionResult = Union[Values, GraphResult]
FunctionBody = Callable[[dict[str, Optional[Scalar]]], FunctionResult]


class FunctionRegistry:
    """IRI-to-callable bindings, immutable once handed to the engine."""

    def __init__(self):
        self._bindings: dict[str, FunctionBody] = {}

    def register(self, iri: str, body: FunctionBody) -> None:
        if iri in self._bindings:
            raise ValueError(f"function <{iri}> already registered")
        self._bindings[iri] = body

    def iris(self) -> list[str]:
        return list(self._bindings)

    def __contains__(self, iri: str) -> bool:
        return iri in self._bindings

    @classmethod
    def with_builtins(cls) -> "FunctionRegistry":
        reg = cls()
        reg.register(vocab.FN_SPLIT, _split_body)
        reg.register(vocab.FN_PERSONS_TO_GRAPH, _persons_body)
        return reg


def _constant_scalar(term) -> Scalar:
    if isinstance(term, Iri):
        return Scalar.text(term.value)
    assert isinstance(term, Literal)
    if term.datatype == XSD_BOOLEAN:
        return Scalar.boolean(term.lexical == "true" or term.lexical == "1")
    if term.datatype == XSD_INTEGER:
        try:
            return Scalar.integer(int(term.lexical))
        except ValueError:
            return Scalar.text(term.lexical)
    if term.datatype in (XSD_DOUBLE, XSD_DECIMAL):
        try:
            return Scalar.number(float(term.lexical))
        except ValueError:
            return Scalar.text(term.lexical)
    return Scalar.text(term.lexical)


def eval_parameter(tm: TermMap, ctx: EvalContext) -> Optional[Scalar]:
    """Evaluate a parameter term map to the scalar handed to the function."""
    if tm.constant is not None:
        return _constant_scalar(tm.constant)
    if tm.template is not None:
        expanded = expand_template(tm.template, ctx, iri_safe=False)
        return Scalar.text(expanded) if expanded is not None else None
    if tm.reference is not None:
        return eval_ref(tm.reference, ctx)
    return None


def invoke(registry: FunctionRegistry, invocation: FunctionInvocation,
           ctx: EvalContext) -> FunctionResult:
    """Evaluate parameters against the current cell, then call the body.

    Absent parameter values are passed as None; the function decides what
    that means. Errors raised by the body surface as E_FN_RUNTIME tagged
    with the function IRI (E_FN_PARAM passes through unchanged).
    """
    iri = invocation.function_iri
    body = registry._bindings.get(iri)
    if body is None:
        raise FunctionUnregisteredError(f"function <{iri}> is not registered")
    params = {param_iri: eval_parameter(tm, ctx)
              for param_iri, tm in invocation.parameters}
    try:
        return body(params)
    except (FunctionParamError, FunctionUnregisteredError):
        raise
    except GridRmlError as exc:
        raise FunctionRuntimeError(f"<{iri}> failed: {exc.message}") from exc
    except Exception as exc:
        raise FunctionRuntimeError(f"<{iri}> failed: {exc}") from exc


# ---------------------------------------------------------------------------
# Built-in: split
# ---------------------------------------------------------------------------

def builtin_split(value: Optional[str], separator: Optional[str]) -> Values:
    """Split on the exact separator, trim pieces, drop empties."""
    if not separator:
        raise FunctionParamError("split needs a non-empty separator")
    if not value:
        return Values(())
    pieces = [piece.strip() for piece in value.split(separator)]
    return Values(tuple(Scalar.text(p) for p in pieces if p))


def _split_body(params: dict[str, Optional[Scalar]]) -> Values:
    value = params.get(vocab.FN_PARAM_VALUE)
    separator = params.get(vocab.FN_PARAM_SEPARATOR)
    if vocab.FN_PARAM_SEPARATOR not in params:
        raise FunctionParamError("split is missing its separator parameter")
    return builtin_split(
        value.render() if value is not None else None,
        separator.render() if separator is not None else None,
    )


# ---------------------------------------------------------------------------
# Built-in: personsToGraph
# ---------------------------------------------------------------------------

_PERSON_SPLIT = re.compile(r";|\band\b")


def _parse_person(piece: str) -> Optional[tuple[str, str]]:
    """(first, last) from one name piece, or None when undecidable."""
    if "," in piece:
        last, _, first = piece.rpartition(",")
        last, first = last.strip(), first.strip()
        if last and first:
            return first, last
        return None
    parts = piece.rsplit(None, 1)
    if len(parts) == 2:
        return parts[0].strip(), parts[1].strip()
    return None


def _slug(words: list[str]) -> str:
    from .expr import iri_safe_encode
    return iri_safe_encode("-".join(w.lower() for w in words))


def builtin_persons_to_graph(value: Optional[str],
                             base_iri: Optional[str]) -> GraphResult:
    """Extract person entities from one cell into a serialized subgraph.

    Pieces are split on ';' and the standalone word 'and'. Each piece
    yields a person resource (an IRI under ``base_iri`` when given, a blank
    node otherwise) with given/family name statements, or just an
    rdfs:label when the piece has no recognizable name shape. One
    ss:SelectedObjects/rr:object selection triple per person marks the
    terms object maps should link, in input order.
    """
    if not value:
        return GraphResult("")
    lines: list[str] = []
    selections: list[str] = []
    blank_count = 0
    for raw_piece in _PERSON_SPLIT.split(value):
        piece = raw_piece.strip()
        if not piece:
            continue
        parsed = _parse_person(piece)
        words = (parsed[0].split() + parsed[1].split()) if parsed else piece.split()
        if base_iri:
            node = f"<{base_iri}{_slug(words)}>"
        else:
            node = f"_:p{blank_count}"
            blank_count += 1
        if parsed:
            first, last = parsed
            lines.append(f"{node} {ntriples_term(vocab.FOAF_GIVEN_NAME)} "
                         f"{ntriples_term(Literal(first))} .")
            lines.append(f"{node} {ntriples_term(vocab.FOAF_FAMILY_NAME)} "
                         f"{ntriples_term(Literal(last))} .")
        else:
            lines.append(f"{node} {ntriples_term(vocab.RDFS_LABEL)} "
                         f"{ntriples_term(Literal(piece))} .")
        selections.append(f"{ntriples_term(vocab.SS_SELECTED_OBJECTS)} "
                          f"{ntriples_term(vocab.RR_OBJECT)} {node} .")
    return GraphResult("\n".join(lines + selections) + ("\n" if lines else ""))


def _persons_body(params: dict[str, Optional[Scalar]]) -> GraphResult:
    value = params.get(vocab.FN_PARAM_VALUE)
    base = params.get(vocab.FN_PARAM_BASE_IRI)
    return builtin_persons_to_graph(
        value.render() if value is not None else None,
        base.render() if base is not None else None,
    )
