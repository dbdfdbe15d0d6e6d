"""Shared test utilities: independent oracles and fixture builders."""

from __future__ import annotations

import itertools

from gridrml.rdf import BlankNode, Graph, Triple
from gridrml.xlsxgen import XlsxBuilder


def blank_labels(graph: Graph) -> set[str]:
    labels = set()
    for t in graph:
        for term in (t.subject, t.object):
            if isinstance(term, BlankNode):
                labels.add(term.label)
    return labels


def isomorphic(g1: Graph, g2: Graph) -> bool:
    """Graph equality up to blank-node renaming, by brute-force label
    permutation (only suitable for small graphs)."""
    if len(g1) != len(g2):
        return False
    labels1 = sorted(blank_labels(g1))
    labels2 = sorted(blank_labels(g2))
    if len(labels1) != len(labels2):
        return False
    if not labels1:
        return set(g1) == set(g2)
    target = set(g2)

    def rename(term, mapping):
        if isinstance(term, BlankNode):
            return BlankNode(mapping[term.label])
        return term

    for perm in itertools.permutations(labels2):
        mapping = dict(zip(labels1, perm))
        renamed = {
            Triple(rename(t.subject, mapping), t.predicate, rename(t.object, mapping))
            for t in g1
        }
        if renamed == target:
            return True
    return False


def papers_workbook_bytes() -> bytes:
    """The sheet behind the paper-scores scenario: A2:A5 text values with a
    header in C1 and numeric scores two columns right of A2/A4."""
    wb = XlsxBuilder()
    sheet = wb.sheet("Papers")
    sheet.text("C1", "score")
    sheet.text("A2", "Knowledge Graphs")
    sheet.number("C2", 3.5)
    sheet.text("A3", "Ontology")
    sheet.text("A4", "Know-how")
    sheet.number("C4", 7.0)
    return wb.to_bytes()


PAPERS_MAPPING = """\
@prefix rr: <http://www.w3.org/ns/r2rml#> .
@prefix rml: <http://semweb.mmlab.be/ns/rml#> .
@prefix ql: <http://semweb.mmlab.be/ns/ql#> .
@prefix ss: <http://www.dfki.uni-kl.de/~mschroeder/ld/ss#> .

<#PapersMap> a rr:TriplesMap ;
  rml:logicalSource [ a rml:LogicalSource ;
    rml:referenceFormulation ql:Spreadsheet ;
    rml:source [ a ss:Workbook ;
      ss:url "workbook.xlsx" ;
      ss:sheetName "Papers" ;
      ss:range "A2:A5" ;
      ss:javaScriptFilter "/Know\\\\w*/.test(valueString)"
    ]
  ] ;
  rr:subjectMap [ rr:template "http://example.org/{address}" ] ;
  rr:predicateObjectMap [
    rr:predicateMap [ rr:template "http://example.org/{[2,0].valueString}" ] ;
    rr:objectMap [ rml:reference "(2,0).valueNumeric" ]
  ] .
"""
