"""Data model: layouts, strokes, vocabularies, relations, synthetic corpora."""

from .errors import DataError, VocabError
from .layout import (
    FLAG_BOX,
    FLAG_END,
    FLAG_START,
    Box,
    LayoutRecord,
    LayoutTokens,
    ParsedLayouts,
    PlacedObject,
    encode_layout,
    parse_layout_dataset,
    tokens_to_layout,
    write_layout_dataset,
)
from .relations import (
    ABOVE,
    BELOW,
    LEFT_OF,
    PREDICATE_GROUPS,
    RIGHT_OF,
    Relation,
    extract_relation,
    relation_satisfied,
)
from .strokes import (
    SketchRecord,
    aspect_ratio,
    make_sketch_record,
    parse_stroke_dataset,
    polylines_to_stroke5,
    stroke5_to_polylines,
    validate_stroke5,
    write_stroke_dataset,
)
from .synthetic import (
    DEFAULT_TRIPLES,
    STROKE_FAMILIES,
    TripleSpec,
    generate_stroke_family,
    generate_synthetic_layout_corpus,
    generate_synthetic_stroke_corpus,
    render_description,
)
from .vocab import LabelVocab, TextVocab, tokenize

__all__ = [
    "DataError", "VocabError",
    "FLAG_BOX", "FLAG_START", "FLAG_END",
    "Box", "PlacedObject", "LayoutRecord", "LayoutTokens", "ParsedLayouts",
    "encode_layout", "tokens_to_layout", "parse_layout_dataset", "write_layout_dataset",
    "ABOVE", "BELOW", "LEFT_OF", "RIGHT_OF", "PREDICATE_GROUPS", "Relation",
    "extract_relation", "relation_satisfied",
    "SketchRecord", "aspect_ratio", "make_sketch_record",
    "polylines_to_stroke5", "stroke5_to_polylines", "validate_stroke5",
    "parse_stroke_dataset", "write_stroke_dataset",
    "TripleSpec", "DEFAULT_TRIPLES", "render_description",
    "generate_synthetic_layout_corpus",
    "STROKE_FAMILIES", "generate_stroke_family", "generate_synthetic_stroke_corpus",
    "LabelVocab", "TextVocab", "tokenize",
]
