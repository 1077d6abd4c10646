"""Token tables for text prompts and object class labels.

Word ids are frequency-ordered (ties broken by first appearance); label ids
follow first appearance.  Both are pure functions of corpus order, and
therefore of the corpus seed.
"""

from __future__ import annotations

import re
from typing import Iterable, Sequence

from .errors import VocabError

__all__ = ["TextVocab", "LabelVocab", "tokenize"]

_TOKEN_RE = re.compile(r"[a-z]+")


def tokenize(text: str) -> list[str]:
    """Lowercase word tokens; punctuation and digits are separators."""
    return _TOKEN_RE.findall(text.lower())


class TextVocab:
    """Word table for prompts: id 0 is padding, id 1 is unknown."""

    PAD = 0
    UNK = 1

    def __init__(self, words: Sequence[str] = ()):
        self._words: list[str] = ["<pad>", "<unk>"]
        self._ids: dict[str, int] = {"<pad>": 0, "<unk>": 1}
        for w in words:
            self.add(w)

    @classmethod
    def from_texts(cls, texts: Iterable[str]) -> "TextVocab":
        """Build a frequency-ordered vocabulary (ties broken by first appearance)."""
        counts: dict[str, int] = {}
        first_seen: dict[str, int] = {}
        position = 0
        for text in texts:
            for token in tokenize(text):
                counts[token] = counts.get(token, 0) + 1
                if token not in first_seen:
                    first_seen[token] = position
                    position += 1
        ordered = sorted(counts, key=lambda w: (-counts[w], first_seen[w]))
        return cls(ordered)

    def add(self, word: str) -> int:
        if word in self._ids:
            return self._ids[word]
        idx = len(self._words)
        self._words.append(word)
        self._ids[word] = idx
        return idx

    def encode(self, text: str) -> list[int]:
        return [self._ids.get(tok, self.UNK) for tok in tokenize(text)]

    def word(self, idx: int) -> str:
        if not (0 <= idx < len(self._words)):
            raise VocabError(f"word id {idx} out of range [0, {len(self._words)})")
        return self._words[idx]

    def __len__(self) -> int:
        return len(self._words)

    def __contains__(self, word: str) -> bool:
        return word in self._ids

    def to_list(self) -> list[str]:
        """Non-special words in id order (for serialization)."""
        return self._words[2:]

    @classmethod
    def from_list(cls, words: Sequence[str]) -> "TextVocab":
        return cls(words)


class LabelVocab:
    """Object class labels 0..n-1 plus a trailing blank id for non-box steps."""

    def __init__(self, labels: Sequence[str] = ()):
        self._labels: list[str] = []
        self._ids: dict[str, int] = {}
        for label in labels:
            self.add(label)

    def add(self, label: str) -> int:
        if label in self._ids:
            return self._ids[label]
        idx = len(self._labels)
        self._labels.append(label)
        self._ids[label] = idx
        return idx

    def id(self, label: str) -> int:
        if label not in self._ids:
            raise VocabError(f"unknown class label {label!r}")
        return self._ids[label]

    def label(self, idx: int) -> str:
        if not (0 <= idx < len(self._labels)):
            raise VocabError(f"class id {idx} out of range [0, {len(self._labels)})")
        return self._labels[idx]

    @property
    def blank_id(self) -> int:
        """Embedding row used on steps that carry no class (start/end)."""
        return len(self._labels)

    @property
    def num_classes(self) -> int:
        return len(self._labels)

    @property
    def table_size(self) -> int:
        """Rows an embedding table needs: all classes plus the blank row."""
        return len(self._labels) + 1

    def __len__(self) -> int:
        return len(self._labels)

    def __contains__(self, label: str) -> bool:
        return label in self._ids

    def to_list(self) -> list[str]:
        return list(self._labels)

    @classmethod
    def from_list(cls, labels: Sequence[str]) -> "LabelVocab":
        return cls(labels)
