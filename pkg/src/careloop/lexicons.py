"""Bundled word lists and phrase frames, loaded from the package data
directory. Files hold one term per line, UTF-8; blank lines and '#' comment
lines are ignored. All loaders cache on first use.
"""

from __future__ import annotations

from functools import lru_cache
from importlib import resources
from pathlib import Path

from .textcore import tokenize

_DATA_PACKAGE = "careloop.data"


def data_path(name: str) -> Path:
    return Path(str(resources.files(_DATA_PACKAGE).joinpath(name)))


def load_wordlist(path: Path) -> tuple[str, ...]:
    terms = []
    for line in path.read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            terms.append(line.lower())
    return tuple(terms)


@lru_cache(maxsize=None)
def stopwords() -> frozenset[str]:
    return frozenset(load_wordlist(data_path("stopwords.txt")))


@lru_cache(maxsize=None)
def emotion_terms() -> frozenset[str]:
    return frozenset(load_wordlist(data_path("emotion_lexicon.txt")))


@lru_cache(maxsize=None)
def intensifiers() -> frozenset[str]:
    return frozenset(load_wordlist(data_path("intensifiers.txt")))


@lru_cache(maxsize=None)
def emotion_frames() -> tuple[str, ...]:
    return load_wordlist(data_path("emotion_frames.txt"))


@lru_cache(maxsize=None)
def understanding_frames() -> tuple[str, ...]:
    return load_wordlist(data_path("understanding_frames.txt"))


@lru_cache(maxsize=None)
def dismissive_openers() -> tuple[str, ...]:
    return load_wordlist(data_path("dismissive_openers.txt"))


def content_words(text: str) -> list[str]:
    """Ordered, de-duplicated word tokens with stopwords removed."""
    seen: set[str] = set()
    out: list[str] = []
    for tok in tokenize(text):
        if tok not in stopwords() and tok not in seen:
            seen.add(tok)
            out.append(tok)
    return out
