"""Curated mapping examples bundled with the HTTP service.

Workbooks are generated on demand (deterministically) instead of shipping
binary files; each example pairs a mapping document with the workbook it
expects under the name its ss:url declares.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

from .xlsxgen import Run, Style, XlsxBuilder

_PREFIXES = """\
@prefix rr: <http://www.w3.org/ns/r2rml#> .
@prefix rml: <http://semweb.mmlab.be/ns/rml#> .
@prefix ql: <http://semweb.mmlab.be/ns/ql#> .
@prefix ss: <http://www.dfki.uni-kl.de/~mschroeder/ld/ss#> .
@prefix fnml: <http://semweb.mmlab.be/ns/fnml#> .
@prefix fno: <https://w3id.org/function/ontology#> .
@prefix fn: <https://gridrml.dev/fn#> .
@prefix ex: <http://example.org/> .
"""


@dataclass(frozen=True)
class Example:
    id: str
    title: str
    description: str
    mapping_text: str
    workbook_name: str
    workbook_factory: Callable[[], bytes]


def _papers_workbook() -> bytes:
    wb = XlsxBuilder()
    sheet = wb.sheet("Papers")
    sheet.text("C1", "score")
    sheet.text("A2", "Knowledge Graphs")
    sheet.number("C2", 3.5)
    sheet.text("A3", "Ontology")
    sheet.text("A4", "Know-how")
    sheet.number("C4", 7.0)
    return wb.to_bytes()


_PAPERS_MAPPING = _PREFIXES + """
<#PapersMap> a rr:TriplesMap ;
  rml:logicalSource [ a rml:LogicalSource ;
    rml:referenceFormulation ql:Spreadsheet ;
    rml:source [ a ss:Workbook ;
      ss:url "papers.xlsx" ;
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


def _contacts_workbook() -> bytes:
    wb = XlsxBuilder()
    sheet = wb.sheet("Contacts")
    sheet.text("A1", "contact details")
    sheet.text("A2", "john@example.com; 555-0100; Berlin")
    sheet.text("A3", "jane@example.com; 555-0199; Paris")
    return wb.to_bytes()


_CONTACTS_MAPPING = _PREFIXES + """
<#ContactsMap> a rr:TriplesMap ;
  rml:logicalSource [ a rml:LogicalSource ;
    rml:referenceFormulation ql:Spreadsheet ;
    rml:source [ a ss:Workbook ;
      ss:url "contacts.xlsx" ;
      ss:sheetName "Contacts" ;
      ss:range "A2:A3"
    ]
  ] ;
  rr:subjectMap [ rr:template "http://example.org/contact/{address}" ] ;
  rr:predicateObjectMap [
    rr:predicateMap ( ex:email ex:phone ex:city ) ;
    rr:objectMap [ fnml:functionValue [
      fno:executes fn:split ;
      fn:value [ rml:reference "valueString" ] ;
      fn:separator ";"
    ] ] ;
    ss:zip true
  ] .
"""


def _books_workbook() -> bytes:
    wb = XlsxBuilder()
    sheet = wb.sheet("Books")
    sheet.text("A1", "title")
    sheet.text("B1", "authors")
    sheet.text("A2", "Dune")
    sheet.text("B2", "Herbert, Frank")
    sheet.text("A3", "Good Omens")
    sheet.text("B3", "Pratchett, Terry and Gaiman, Neil")
    return wb.to_bytes()


_BOOKS_MAPPING = _PREFIXES + """
<#BooksMap> a rr:TriplesMap ;
  rml:logicalSource [ a rml:LogicalSource ;
    rml:referenceFormulation ql:Spreadsheet ;
    rml:source [ a ss:Workbook ;
      ss:url "books.xlsx" ;
      ss:sheetName "Books" ;
      ss:range "A2:A3"
    ]
  ] ;
  rr:subjectMap [ rr:template "http://example.org/book/{row}" ] ;
  rr:predicateObjectMap [
    rr:predicate ex:title ;
    rr:objectMap [ rml:reference "valueString" ]
  ] ;
  rr:predicateObjectMap [
    rr:predicate ex:author ;
    rr:objectMap [
      rr:termType ss:Graph ;
      fnml:functionValue [
        fno:executes fn:personsToGraph ;
        fn:value [ rml:reference "(1,0).valueString" ] ;
        fn:baseIri "http://example.org/person/"
      ]
    ]
  ] .
"""


def _styles_workbook() -> bytes:
    wb = XlsxBuilder()
    sheet = wb.sheet("Inventory")
    sheet.text("A1", "status")
    sheet.text("A2", "in stock", style=Style(fill_fg="#00cc44"))
    sheet.text("A3", "low", style=Style(fill_fg="#ffcc00"))
    sheet.rich("A4", [Run("sold ", bold=True), Run("out", italic=True,
                                                   font_color="#ff0000")],
               style=Style(fill_fg="#ff0000"))
    return wb.to_bytes()


_STYLES_MAPPING = _PREFIXES + """
<#InventoryMap> a rr:TriplesMap ;
  rml:logicalSource [ a rml:LogicalSource ;
    rml:referenceFormulation ql:Spreadsheet ;
    rml:source [ a ss:Workbook ;
      ss:url "inventory.xlsx" ;
      ss:sheetName "Inventory" ;
      ss:range "A2:A4"
    ]
  ] ;
  rr:subjectMap [ rr:template "http://example.org/status/{address}" ] ;
  rr:predicateObjectMap [
    rr:predicate ex:statusColor ;
    rr:objectMap [ rml:reference "foregroundColor" ]
  ] ;
  rr:predicateObjectMap [
    rr:predicate ex:statusHtml ;
    rr:objectMap [ rml:reference "valueRichText" ]
  ] ;
  rr:predicateObjectMap [
    rr:predicate ex:cellJson ;
    rr:objectMap [ rml:reference "json" ]
  ] .
"""


EXAMPLES: list[Example] = [
    Example(
        id="paper-scores",
        title="Paper scores (filter + cell references)",
        description="Iterates A2:A5 of sheet 'Papers', keeps cells matching "
                    "/Know\\w*/, builds subjects from cell addresses, the "
                    "predicate from the absolute header cell [2,0], and numeric "
                    "objects from two columns to the right.",
        mapping_text=_PAPERS_MAPPING,
        workbook_name="papers.xlsx",
        workbook_factory=_papers_workbook,
    ),
    Example(
        id="zip-pairing",
        title="Zipped predicate/object lists",
        description="One cell holds email, phone, and city separated by ';'. "
                    "A predicate list plus the split function produce equally "
                    "long lists, and ss:zip true pairs them diagonally instead "
                    "of the Cartesian product.",
        mapping_text=_CONTACTS_MAPPING,
        workbook_name="contacts.xlsx",
        workbook_factory=_contacts_workbook,
    ),
    Example(
        id="graph-term-type",
        title="Graph-valued objects (entity extraction)",
        description="Author cells contain several persons. The "
                    "personsToGraph function returns a small RDF graph per "
                    "cell; the ss:Graph term type merges it and links the "
                    "selected person resources as objects.",
        mapping_text=_BOOKS_MAPPING,
        workbook_name="books.xlsx",
        workbook_factory=_books_workbook,
    ),
    Example(
        id="cell-metadata",
        title="Cell appearance and JSON metadata",
        description="Reads fill colors, rich-text markup, and the full JSON "
                    "representation of each status cell.",
        mapping_text=_STYLES_MAPPING,
        workbook_name="inventory.xlsx",
        workbook_factory=_styles_workbook,
    ),
]

_BY_ID = {example.id: example for example in EXAMPLES}


def get_example(example_id: str) -> Example:
    return _BY_ID[example_id]


def has_example(example_id: str) -> bool:
    return example_id in _BY_ID


@lru_cache(maxsize=None)
def example_workbook_bytes(example_id: str) -> bytes:
    return _BY_ID[example_id].workbook_factory()
