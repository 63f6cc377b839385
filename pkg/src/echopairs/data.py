"""Loaders for the shipped word-list data files.

Each list is a UTF-8 text file, one entry per line, ``#`` comments and
blank lines ignored.  Every file can be overridden with an environment
variable (``ECHOPAIRS_STOPWORDS``, ``ECHOPAIRS_HEDGES``, ...) pointing at
a replacement file.
"""
from __future__ import annotations

import os
from functools import lru_cache
from importlib import resources
from pathlib import Path

_FILES = {
    "stopwords": "stopwords.txt",
    "hedges": "hedges.txt",
    "contrastive": "contrastive.txt",
    "second_person": "second_person.txt",
    "superlative_blocklist": "superlative_blocklist.txt",
}


def _read_lines(name: str) -> list[str]:
    env = os.environ.get(f"ECHOPAIRS_{name.upper()}")
    if env:
        text = Path(env).read_text(encoding="utf-8")
    else:
        text = resources.files("echopairs").joinpath("data", _FILES[name]).read_text("utf-8")
    entries = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip().lower()
        if line:
            entries.append(line)
    return entries


@lru_cache(maxsize=None)
def load_words(name: str) -> frozenset[str]:
    """Load a single-word list (stopwords, superlative blocklist)."""
    return frozenset(_read_lines(name))


@lru_cache(maxsize=None)
def load_phrases(name: str) -> frozenset[tuple[str, ...]]:
    """Load a lexicon whose entries may be multi-word phrases."""
    return frozenset(tuple(entry.split()) for entry in _read_lines(name))


def clear_cache() -> None:
    load_words.cache_clear()
    load_phrases.cache_clear()
