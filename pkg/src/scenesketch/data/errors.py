"""Exceptions raised by dataset parsing and encoding."""


class DataError(Exception):
    """A record or value violates the data model's contracts."""


class VocabError(DataError):
    """A token or id is outside the vocabulary."""
