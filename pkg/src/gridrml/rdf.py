"""RDF data model plus the Turtle/N-Triples subset used by the engine.

The reader covers the Turtle features mapping documents actually use:
prefix/base directives, ``a``, datatyped and language-tagged literals,
numeric/boolean shorthand, labeled and anonymous blank nodes, and RDF
collections (expanded into rdf:first/rdf:rest chains). Writers are
deterministic: equal graphs serialize to byte-identical output.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Iterator, Optional, Union
from urllib.parse import urljoin

from .errors import (
    MalformedListError,
    TurtleSyntaxError,
    UndefinedPrefixError,
)

RDF_NS = "http://www.w3.org/1999/02/22-rdf-syntax-ns#"
XSD_NS = "http://www.w3.org/2001/XMLSchema#"

RDF_TYPE = RDF_NS + "type"
RDF_FIRST = RDF_NS + "first"
RDF_REST = RDF_NS + "rest"
RDF_NIL = RDF_NS + "nil"
RDF_LANGSTRING = RDF_NS + "langString"

XSD_STRING = XSD_NS + "string"
XSD_INTEGER = XSD_NS + "integer"
XSD_DECIMAL = XSD_NS + "decimal"
XSD_DOUBLE = XSD_NS + "double"
XSD_BOOLEAN = XSD_NS + "boolean"


@dataclass(frozen=True)
class Iri:
    value: str

    def __repr__(self) -> str:
        return f"Iri({self.value!r})"


@dataclass(frozen=True)
class BlankNode:
    label: str

    def __repr__(self) -> str:
        return f"BlankNode({self.label!r})"


@dataclass(frozen=True)
class Literal:
    lexical: str
    datatype: str = XSD_STRING
    language: Optional[str] = None

    def __post_init__(self):
        # A language tag forces the rdf:langString datatype.
        if self.language is not None and self.datatype != RDF_LANGSTRING:
            object.__setattr__(self, "datatype", RDF_LANGSTRING)

    def __repr__(self) -> str:
        if self.language:
            return f"Literal({self.lexical!r}@{self.language})"
        if self.datatype != XSD_STRING:
            return f"Literal({self.lexical!r}^^{self.datatype})"
        return f"Literal({self.lexical!r})"


RdfTerm = Union[Iri, BlankNode, Literal]


@dataclass(frozen=True)
class Triple:
    subject: RdfTerm
    predicate: RdfTerm
    object: RdfTerm

    def __post_init__(self):
        if isinstance(self.subject, Literal):
            raise ValueError("triple subject must not be a literal")
        if not isinstance(self.predicate, Iri):
            raise ValueError("triple predicate must be an IRI")


class Graph:
    """Duplicate-free triple container preserving insertion order.

    Insertion order is what makes document order observable downstream
    (predicate lists, selection triples); set semantics are what the
    equality contract requires.
    """

    def __init__(self, triples: Iterable[Triple] = ()):
        self._triples: dict[Triple, None] = {}
        for t in triples:
            self._triples[t] = None

    def add(self, triple: Triple) -> None:
        self._triples[triple] = None

    def update(self, triples: Iterable[Triple]) -> None:
        for t in triples:
            self._triples[t] = None

    def __len__(self) -> int:
        return len(self._triples)

    def __iter__(self) -> Iterator[Triple]:
        return iter(self._triples)

    def __contains__(self, triple: Triple) -> bool:
        return triple in self._triples

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return set(self._triples) == set(other._triples)

    def __repr__(self) -> str:
        return f"Graph(<{len(self)} triples>)"

    # Pattern helpers used by the mapping-document reader. All preserve
    # insertion (document) order.

    def matches(self, subject=None, predicate=None, object=None) -> Iterator[Triple]:
        for t in self._triples:
            if subject is not None and t.subject != subject:
                continue
            if predicate is not None and t.predicate != predicate:
                continue
            if object is not None and t.object != object:
                continue
            yield t

    def subjects(self, predicate=None, object=None) -> list[RdfTerm]:
        seen: dict[RdfTerm, None] = {}
        for t in self.matches(None, predicate, object):
            seen[t.subject] = None
        return list(seen)

    def objects(self, subject, predicate) -> list[RdfTerm]:
        return [t.object for t in self.matches(subject, predicate, None)]

    def value(self, subject, predicate) -> Optional[RdfTerm]:
        for t in self.matches(subject, predicate, None):
            return t.object
        return None


def rdf_list(graph: Graph, head: RdfTerm) -> list[RdfTerm]:
    """Read a well-formed RDF collection starting at ``head``.

    rdf:nil yields []. Every other node must carry exactly one rdf:first
    and one rdf:rest; anything else (including cycles) is malformed.
    """
    items: list[RdfTerm] = []
    node = head
    seen: set[RdfTerm] = set()
    while True:
        if node == Iri(RDF_NIL):
            return items
        if node in seen:
            raise MalformedListError("collection contains a cycle")
        seen.add(node)
        firsts = graph.objects(node, Iri(RDF_FIRST))
        rests = graph.objects(node, Iri(RDF_REST))
        if len(firsts) != 1 or len(rests) != 1:
            raise MalformedListError(
                f"collection node needs exactly one rdf:first and rdf:rest, "
                f"got {len(firsts)}/{len(rests)}"
            )
        items.append(firsts[0])
        node = rests[0]


def is_list_head(graph: Graph, node: RdfTerm) -> bool:
    if node == Iri(RDF_NIL):
        return True
    return graph.value(node, Iri(RDF_FIRST)) is not None


# ---------------------------------------------------------------------------
# Turtle reader
# ---------------------------------------------------------------------------

_IRI_SCHEME = re.compile(r"^[A-Za-z][A-Za-z0-9+.-]*:")
_PNAME_LOCAL_OK = re.compile(r"[0-9A-Za-z_:%.À-￿-]")
_DIGITS = "0123456789"

_ESCAPES = {
    "t": "\t",
    "b": "\b",
    "n": "\n",
    "r": "\r",
    "f": "\f",
    '"': '"',
    "'": "'",
    "\\": "\\",
}


def resolve_iri(base: str, ref: str) -> str:
    """RFC 3986 resolution of ``ref`` against ``base``."""
    if _IRI_SCHEME.match(ref):
        return ref
    return urljoin(base, ref)


_MAX_NESTING = 128


class _TurtleReader:
    def __init__(self, text: str, base_iri: str, blank_prefix: str = "b"):
        self.text = text
        self.pos = 0
        self.base = base_iri
        self.prefixes: dict[str, str] = {}
        self.graph = Graph()
        self.blank_prefix = blank_prefix
        self.blank_counter = 0
        self.depth = 0
        # Labeled blank nodes keep one node per label within the parse.
        self.labeled: dict[str, BlankNode] = {}

    # -- position bookkeeping ------------------------------------------------

    def _line_col(self, pos: Optional[int] = None) -> tuple[int, int]:
        p = self.pos if pos is None else pos
        line = self.text.count("\n", 0, p) + 1
        last_nl = self.text.rfind("\n", 0, p)
        return line, p - last_nl

    def _fail(self, message: str, pos: Optional[int] = None):
        line, col = self._line_col(pos)
        raise TurtleSyntaxError(message, line, col)

    # -- low-level scanning ----------------------------------------------

    def _peek(self, offset: int = 0) -> str:
        i = self.pos + offset
        return self.text[i] if i < len(self.text) else ""

    def _skip_ws(self) -> None:
        while self.pos < len(self.text):
            c = self.text[self.pos]
            if c in " \t\r\n":
                self.pos += 1
            elif c == "#":
                nl = self.text.find("\n", self.pos)
                self.pos = len(self.text) if nl < 0 else nl
            else:
                return

    def _expect(self, token: str) -> None:
        self._skip_ws()
        if not self.text.startswith(token, self.pos):
            self._fail(f"expected '{token}'")
        self.pos += len(token)

    def _at_end(self) -> bool:
        self._skip_ws()
        return self.pos >= len(self.text)

    def fresh_blank(self) -> BlankNode:
        node = BlankNode(f"{self.blank_prefix}{self.blank_counter}")
        self.blank_counter += 1
        return node

    # -- grammar ----------------------------------------------------------

    def parse(self) -> Graph:
        while not self._at_end():
            if self._try_directive():
                continue
            subject = self._parse_subject()
            self._skip_ws()
            # A bare blank-node property list may stand alone as a statement.
            if self._peek() == "." and isinstance(subject, BlankNode):
                self.pos += 1
                continue
            self._parse_predicate_object_list(subject)
            self._expect(".")
        return self.graph

    def _try_directive(self) -> bool:
        self._skip_ws()
        start = self.pos
        if self.text.startswith("@prefix", self.pos):
            self.pos += len("@prefix")
            self._read_prefix_binding()
            self._expect(".")
            return True
        if self.text.startswith("@base", self.pos):
            self.pos += len("@base")
            self._skip_ws()
            self.base = resolve_iri(self.base, self._read_iriref())
            self._expect(".")
            return True
        lowered = self.text[self.pos:self.pos + 7].lower()
        if lowered.startswith("prefix") and self._is_directive_keyword("prefix"):
            self.pos += len("prefix")
            self._read_prefix_binding()
            return True
        if lowered.startswith("base") and self._is_directive_keyword("base"):
            self.pos += len("base")
            self._skip_ws()
            self.base = resolve_iri(self.base, self._read_iriref())
            return True
        self.pos = start
        return False

    def _is_directive_keyword(self, word: str) -> bool:
        after = self.pos + len(word)
        return after < len(self.text) and self.text[after] in " \t\r\n"

    def _read_prefix_binding(self) -> None:
        self._skip_ws()
        start = self.pos
        colon = self.text.find(":", self.pos)
        if colon < 0:
            self._fail("expected prefix name ending in ':'")
        name = self.text[start:colon].strip()
        if not re.fullmatch(r"[A-Za-z0-9_.À-￿-]*", name):
            self._fail(f"invalid prefix name {name!r}", start)
        self.pos = colon + 1
        self._skip_ws()
        self.prefixes[name] = resolve_iri(self.base, self._read_iriref())

    def _parse_subject(self) -> RdfTerm:
        term = self._parse_term(allow_literal=False)
        return term

    def _parse_predicate_object_list(self, subject: RdfTerm) -> None:
        while True:
            predicate = self._parse_verb()
            self._parse_object_list(subject, predicate)
            self._skip_ws()
            if self._peek() == ";":
                self.pos += 1
                self._skip_ws()
                # Trailing semicolons before '.', ']' are fine.
                if self._peek() in ".]" or self._peek() == "":
                    return
                continue
            return

    def _parse_verb(self) -> Iri:
        self._skip_ws()
        if self._peek() == "a" and not _PNAME_LOCAL_OK.match(self._peek(1) or " "):
            self.pos += 1
            return Iri(RDF_TYPE)
        term = self._parse_term(allow_literal=False)
        if not isinstance(term, Iri):
            self._fail("predicate must be an IRI")
        return term

    def _parse_object_list(self, subject: RdfTerm, predicate: Iri) -> None:
        while True:
            obj = self._parse_term(allow_literal=True)
            self.graph.add(Triple(subject, predicate, obj))
            self._skip_ws()
            if self._peek() == ",":
                self.pos += 1
                continue
            return

    def _parse_term(self, allow_literal: bool) -> RdfTerm:
        self._skip_ws()
        c = self._peek()
        if c == "":
            self._fail("unexpected end of input")
        if c == "<":
            return Iri(resolve_iri(self.base, self._read_iriref()))
        if c == "_" and self._peek(1) == ":":
            return self._read_blank_label()
        if c == "[":
            return self._parse_blank_property_list()
        if c == "(":
            return self._parse_collection()
        if c in "\"'":
            if not allow_literal:
                self._fail("literal not allowed here")
            return self._read_string_literal()
        if c in "+-." or c in _DIGITS:
            if not allow_literal:
                self._fail("literal not allowed here")
            return self._read_numeric_literal()
        return self._read_pname_or_keyword(allow_literal)

    def _enter(self) -> None:
        self.depth += 1
        if self.depth > _MAX_NESTING:
            self._fail(f"nesting deeper than {_MAX_NESTING} levels")

    def _parse_blank_property_list(self) -> BlankNode:
        self._expect("[")
        self._enter()
        node = self.fresh_blank()
        self._skip_ws()
        if self._peek() == "]":
            self.pos += 1
            self.depth -= 1
            return node
        self._parse_predicate_object_list(node)
        self._expect("]")
        self.depth -= 1
        return node

    def _parse_collection(self) -> RdfTerm:
        self._expect("(")
        self._enter()
        items: list[RdfTerm] = []
        while True:
            self._skip_ws()
            if self._peek() == ")":
                self.pos += 1
                self.depth -= 1
                break
            if self._peek() == "":
                self._fail("unterminated collection")
            items.append(self._parse_term(allow_literal=True))
        if not items:
            return Iri(RDF_NIL)
        head = self.fresh_blank()
        node = head
        for i, item in enumerate(items):
            self.graph.add(Triple(node, Iri(RDF_FIRST), item))
            if i + 1 < len(items):
                nxt = self.fresh_blank()
                self.graph.add(Triple(node, Iri(RDF_REST), nxt))
                node = nxt
            else:
                self.graph.add(Triple(node, Iri(RDF_REST), Iri(RDF_NIL)))
        return head

    # -- token readers -----------------------------------------------------

    def _read_iriref(self) -> str:
        self._skip_ws()
        if self._peek() != "<":
            self._fail("expected IRI")
        start = self.pos
        self.pos += 1
        out = []
        while True:
            c = self._peek()
            if c == "":
                self._fail("unterminated IRI", start)
            if c == ">":
                self.pos += 1
                return "".join(out)
            if c in " \n\r\t\"{}|^`":
                self._fail(f"character {c!r} not allowed in IRI")
            if c == "\\":
                out.append(self._read_uchar())
                continue
            out.append(c)
            self.pos += 1

    def _read_uchar(self) -> str:
        # self.pos is at the backslash
        kind = self._peek(1)
        if kind == "u":
            width = 4
        elif kind == "U":
            width = 8
        else:
            self._fail("invalid escape in IRI")
        digits = self.text[self.pos + 2:self.pos + 2 + width]
        if len(digits) != width or not re.fullmatch(r"[0-9A-Fa-f]+", digits):
            self._fail("invalid unicode escape")
        self.pos += 2 + width
        return chr(int(digits, 16))

    def _read_blank_label(self) -> BlankNode:
        self.pos += 2  # '_:'
        start = self.pos
        while self._peek() and re.match(r"[0-9A-Za-z_.À-￿-]", self._peek()):
            self.pos += 1
        label = self.text[start:self.pos]
        # A trailing dot belongs to the statement, not the label.
        while label.endswith("."):
            label = label[:-1]
            self.pos -= 1
        if not label:
            self._fail("empty blank node label")
        if label not in self.labeled:
            # Namespace user labels so they can't collide with generated ones.
            self.labeled[label] = BlankNode(f"u_{label}")
        return self.labeled[label]

    def _read_string_literal(self) -> Literal:
        quote = self._peek()
        long_form = self.text.startswith(quote * 3, self.pos)
        terminator = quote * 3 if long_form else quote
        self.pos += len(terminator)
        start = self.pos
        out = []
        while True:
            if self.pos >= len(self.text):
                self._fail("unterminated string", start)
            if self.text.startswith(terminator, self.pos):
                self.pos += len(terminator)
                break
            c = self.text[self.pos]
            if not long_form and c in "\n\r":
                self._fail("newline in single-line string", start)
            if c == "\\":
                nxt = self._peek(1)
                if nxt in _ESCAPES:
                    out.append(_ESCAPES[nxt])
                    self.pos += 2
                elif nxt in "uU":
                    out.append(self._read_uchar())
                else:
                    self._fail(f"invalid string escape '\\{nxt}'")
            else:
                out.append(c)
                self.pos += 1
        lexical = "".join(out)
        # Optional datatype or language tag.
        if self.text.startswith("^^", self.pos):
            self.pos += 2
            self._skip_ws()
            dtype = self._parse_term(allow_literal=False)
            if not isinstance(dtype, Iri):
                self._fail("datatype must be an IRI")
            return Literal(lexical, datatype=dtype.value)
        if self._peek() == "@":
            self.pos += 1
            m = re.match(r"[A-Za-z]+(-[A-Za-z0-9]+)*", self.text[self.pos:])
            if not m:
                self._fail("invalid language tag")
            self.pos += m.end()
            return Literal(lexical, language=m.group(0))
        return Literal(lexical)

    def _read_numeric_literal(self) -> Literal:
        # A trailing dot without digits is only legal with an exponent
        # ("5.e3"); a bare "5." is the integer 5 plus the statement dot.
        m = re.match(
            r"[+-]?(?:\d+\.\d*[eE][+-]?\d+|\.\d+(?:[eE][+-]?\d+)?"
            r"|\d+\.\d+(?:[eE][+-]?\d+)?|\d+(?:[eE][+-]?\d+)?)",
            self.text[self.pos:],
        )
        if not m:
            self._fail("malformed numeric literal")
        lexical = m.group(0)
        self.pos += m.end()
        if "e" in lexical or "E" in lexical:
            return Literal(lexical, datatype=XSD_DOUBLE)
        if "." in lexical:
            return Literal(lexical, datatype=XSD_DECIMAL)
        return Literal(lexical, datatype=XSD_INTEGER)

    def _read_pname_or_keyword(self, allow_literal: bool) -> RdfTerm:
        start = self.pos
        while self._peek() and _PNAME_LOCAL_OK.match(self._peek()):
            self.pos += 1
        token = self.text[start:self.pos]
        while token.endswith("."):
            token = token[:-1]
            self.pos -= 1
        if not token:
            self._fail("unexpected character " + repr(self._peek()))
        if token in ("true", "false"):
            if not allow_literal:
                self._fail("literal not allowed here", start)
            return Literal(token, datatype=XSD_BOOLEAN)
        if ":" not in token:
            self._fail(f"unrecognized token {token!r}", start)
        prefix, _, local = token.partition(":")
        if prefix not in self.prefixes:
            line, col = self._line_col(start)
            raise UndefinedPrefixError(prefix, line, col)
        return Iri(self.prefixes[prefix] + local)


def parse_turtle(text: str, base_iri: str, blank_prefix: str = "b") -> Graph:
    """Parse a Turtle document into a Graph.

    Raises :class:`TurtleSyntaxError` (with line/column) on malformed input
    and :class:`UndefinedPrefixError` for unbound prefixed names.
    """
    return _TurtleReader(text, base_iri, blank_prefix).parse()


# ---------------------------------------------------------------------------
# Writers
# ---------------------------------------------------------------------------

def _escape_literal(lexical: str) -> str:
    out = []
    for c in lexical:
        if c == "\\":
            out.append("\\\\")
        elif c == '"':
            out.append('\\"')
        elif c == "\n":
            out.append("\\n")
        elif c == "\r":
            out.append("\\r")
        elif c == "\t":
            out.append("\\t")
        elif ord(c) < 0x20:
            out.append(f"\\u{ord(c):04X}")
        else:
            out.append(c)
    return "".join(out)


def ntriples_term(term: RdfTerm) -> str:
    if isinstance(term, Iri):
        return f"<{term.value}>"
    if isinstance(term, BlankNode):
        return f"_:{term.label}"
    if isinstance(term, Literal):
        body = f'"{_escape_literal(term.lexical)}"'
        if term.language:
            return f"{body}@{term.language}"
        if term.datatype != XSD_STRING:
            return f"{body}^^<{term.datatype}>"
        return body
    raise TypeError(f"not an RDF term: {term!r}")


def to_ntriples(graph: Graph) -> str:
    """Serialize as N-Triples, one sorted line per triple (deterministic)."""
    lines = sorted(
        f"{ntriples_term(t.subject)} {ntriples_term(t.predicate)} "
        f"{ntriples_term(t.object)} ."
        for t in graph
    )
    return "".join(line + "\n" for line in lines)


_TURTLE_PREFIXES = [
    ("rdf", RDF_NS),
    ("rdfs", "http://www.w3.org/2000/01/rdf-schema#"),
    ("xsd", XSD_NS),
    ("rr", "http://www.w3.org/ns/r2rml#"),
    ("rml", "http://semweb.mmlab.be/ns/rml#"),
    ("ql", "http://semweb.mmlab.be/ns/ql#"),
    ("foaf", "http://xmlns.com/foaf/0.1/"),
]

_PN_LOCAL_SAFE = re.compile(r"[A-Za-z_][0-9A-Za-z_-]*")


def _turtle_term(term: RdfTerm, prefixes: dict[str, str]) -> str:
    if isinstance(term, Iri):
        for ns, prefix in prefixes.items():
            if term.value.startswith(ns):
                local = term.value[len(ns):]
                if _PN_LOCAL_SAFE.fullmatch(local):
                    return f"{prefix}:{local}"
        return f"<{term.value}>"
    if isinstance(term, Literal) and term.datatype not in (XSD_STRING, RDF_LANGSTRING):
        for ns, prefix in prefixes.items():
            if term.datatype.startswith(ns):
                local = term.datatype[len(ns):]
                if _PN_LOCAL_SAFE.fullmatch(local):
                    return f'"{_escape_literal(term.lexical)}"^^{prefix}:{local}'
        return ntriples_term(term)
    return ntriples_term(term)


def to_turtle(graph: Graph) -> str:
    """Serialize as Turtle: sorted, grouped by subject, fixed prefix table."""
    used: dict[str, str] = {}
    def note(iri: str) -> None:
        for prefix, ns in _TURTLE_PREFIXES:
            if iri.startswith(ns):
                used[ns] = prefix
                return

    for t in graph:
        for term in (t.subject, t.predicate, t.object):
            if isinstance(term, Iri):
                note(term.value)
            elif isinstance(term, Literal):
                note(term.datatype)

    rendered = sorted(
        (
            _turtle_term(t.subject, used),
            _turtle_term(t.predicate, used),
            _turtle_term(t.object, used),
        )
        for t in graph
    )
    out = []
    for prefix, ns in _TURTLE_PREFIXES:
        if used.get(ns):
            out.append(f"@prefix {prefix}: <{ns}> .")
    if out and rendered:
        out.append("")
    i = 0
    while i < len(rendered):
        subject = rendered[i][0]
        group = []
        while i < len(rendered) and rendered[i][0] == subject:
            group.append(f"{rendered[i][1]} {rendered[i][2]}")
            i += 1
        body = " ;\n    ".join(group)
        out.append(f"{subject} {body} .")
    return "".join(line + "\n" for line in out)


def serialize_graph(graph: Graph, format: str = "ntriples") -> str:
    if format == "ntriples":
        return to_ntriples(graph)
    if format == "turtle":
        return to_turtle(graph)
    raise ValueError(f"unknown serialization format {format!r}")
