"""Vocabulary IRIs for mapping documents and generated graphs."""

from .rdf import Iri

RR = "http://www.w3.org/ns/r2rml#"
RML = "http://semweb.mmlab.be/ns/rml#"
QL = "http://semweb.mmlab.be/ns/ql#"
SS = "http://www.dfki.uni-kl.de/~mschroeder/ld/ss#"
FNML = "http://semweb.mmlab.be/ns/fnml#"
FNO = "https://w3id.org/function/ontology#"
FOAF = "http://xmlns.com/foaf/0.1/"
RDFS = "http://www.w3.org/2000/01/rdf-schema#"

# Project namespace for executable transformation functions.
FN = "https://gridrml.dev/fn#"

RML_LOGICAL_SOURCE = Iri(RML + "logicalSource")
RML_REFERENCE_FORMULATION = Iri(RML + "referenceFormulation")
RML_SOURCE = Iri(RML + "source")
RML_REFERENCE = Iri(RML + "reference")

QL_SPREADSHEET = Iri(QL + "Spreadsheet")

SS_WORKBOOK = Iri(SS + "Workbook")
SS_URL = Iri(SS + "url")
SS_SHEET_NAME = Iri(SS + "sheetName")
SS_RANGE = Iri(SS + "range")
SS_JAVASCRIPT_FILTER = Iri(SS + "javaScriptFilter")
SS_ZIP = Iri(SS + "zip")
SS_GRAPH = Iri(SS + "Graph")
SS_SELECTED_OBJECTS = Iri(SS + "SelectedObjects")

RR_TRIPLES_MAP = Iri(RR + "TriplesMap")
RR_SUBJECT_MAP = Iri(RR + "subjectMap")
RR_SUBJECT = Iri(RR + "subject")
RR_PREDICATE_OBJECT_MAP = Iri(RR + "predicateObjectMap")
RR_PREDICATE_MAP = Iri(RR + "predicateMap")
RR_PREDICATE = Iri(RR + "predicate")
RR_OBJECT_MAP = Iri(RR + "objectMap")
RR_OBJECT = Iri(RR + "object")
RR_CONSTANT = Iri(RR + "constant")
RR_TEMPLATE = Iri(RR + "template")
RR_TERM_TYPE = Iri(RR + "termType")
RR_DATATYPE = Iri(RR + "datatype")
RR_LANGUAGE = Iri(RR + "language")
RR_CLASS = Iri(RR + "class")
RR_IRI = Iri(RR + "IRI")
RR_LITERAL = Iri(RR + "Literal")
RR_BLANK_NODE = Iri(RR + "BlankNode")

FNML_FUNCTION_VALUE = Iri(FNML + "functionValue")
FNO_EXECUTES = Iri(FNO + "executes")

FN_SPLIT = FN + "split"
FN_PERSONS_TO_GRAPH = FN + "personsToGraph"
FN_PARAM_VALUE = FN + "value"
FN_PARAM_SEPARATOR = FN + "separator"
FN_PARAM_BASE_IRI = FN + "baseIri"

FOAF_GIVEN_NAME = Iri(FOAF + "givenName")
FOAF_FAMILY_NAME = Iri(FOAF + "familyName")
RDFS_LABEL = Iri(RDFS + "label")
