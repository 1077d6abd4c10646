"""Spatial relation lexicon and center-ordering checks.

The lexicon is a curated table of common English spatial predicates mapped
to four ordering groups.  Since y grows downward, "A above B" means A's
center has the smaller y.  Relation extraction assumes the simple prompt
shape the corpus generator emits: ``[article] subject predicate [article]
object`` (articles optional, predicates possibly multi-word).
"""

from __future__ import annotations

from dataclasses import dataclass

from .layout import LayoutRecord
from .vocab import tokenize

__all__ = [
    "ABOVE", "BELOW", "LEFT_OF", "RIGHT_OF",
    "PREDICATE_GROUPS", "Relation",
    "extract_relation", "relation_satisfied",
]

ABOVE = "above"
BELOW = "below"
LEFT_OF = "left-of"
RIGHT_OF = "right-of"

# Predicate phrase (as a token tuple) -> ordering group.  Longest phrases
# are matched first, so "on top of" wins over "on".
PREDICATE_GROUPS: dict[tuple[str, ...], str] = {
    ("on", "top", "of"): ABOVE,
    ("to", "the", "left", "of"): LEFT_OF,
    ("to", "the", "right", "of"): RIGHT_OF,
    ("left", "of"): LEFT_OF,
    ("right", "of"): RIGHT_OF,
    ("above",): ABOVE,
    ("over",): ABOVE,
    ("on",): ABOVE,
    ("atop",): ABOVE,
    ("below",): BELOW,
    ("under",): BELOW,
    ("underneath",): BELOW,
    ("beneath",): BELOW,
    ("beside",): LEFT_OF,  # conventionalized: "A beside B" places A left of B
}

_ARTICLES = {"a", "an", "the"}


@dataclass(frozen=True)
class Relation:
    subject: str
    group: str
    object: str


def extract_relation(description: str) -> Relation | None:
    """Find (subject, group, object) in a prompt, or None if no predicate."""
    tokens = [t for t in tokenize(description) if t not in _ARTICLES]
    if len(tokens) < 3:
        return None
    phrases = sorted(PREDICATE_GROUPS, key=len, reverse=True)
    for start in range(1, len(tokens)):
        for phrase in phrases:
            end = start + len(phrase)
            if end >= len(tokens) + 1:
                continue
            if tuple(tokens[start:end]) == phrase and end < len(tokens):
                subject = tokens[start - 1]
                obj = tokens[end]
                return Relation(subject=subject, group=PREDICATE_GROUPS[phrase], object=obj)
    return None


def relation_satisfied(relation: Relation, layout: LayoutRecord) -> bool:
    """Check the center ordering the relation demands.

    Subject/object boxes are looked up by label (first occurrence).  A
    layout missing either participant fails the check.
    """
    subject_box = object_box = None
    for obj in layout.objects:
        if subject_box is None and obj.label == relation.subject:
            subject_box = obj.box
        elif object_box is None and obj.label == relation.object:
            object_box = obj.box
    if subject_box is None or object_box is None:
        return False
    if relation.group == ABOVE:
        return subject_box.y < object_box.y
    if relation.group == BELOW:
        return subject_box.y > object_box.y
    if relation.group == LEFT_OF:
        return subject_box.x < object_box.x
    if relation.group == RIGHT_OF:
        return subject_box.x > object_box.x
    raise ValueError(f"unknown relation group {relation.group!r}")
