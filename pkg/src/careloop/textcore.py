"""Sentence-level text substrate: segmentation, edit actions, script
application, alignment, normalization, and a deterministic similarity
function.

All operations here are pure and deterministic; every other module builds on
them. The similarity backend is pluggable so a neural embedding service can
replace the built-in character-trigram one without touching callers.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Iterable, Mapping, Protocol, Sequence

from .errors import InvalidScriptError, NotRepresentableError

# Alignment constants. Gap cost is deliberately below 2x the worst pair cost
# so that a Replace is always preferred over a delete+insert pair; the keep
# threshold treats near-identical sentences as unchanged.
GAP_COST = 0.7
KEEP_THRESHOLD = 0.98

# Tokens that end with a period but never terminate a sentence.
ABBREVIATIONS = {
    "e.g.", "i.e.", "etc.", "cf.", "vs.", "approx.", "no.",
    "dr.", "mr.", "mrs.", "ms.", "prof.", "rev.", "gen.", "sen.",
    "jr.", "sr.", "st.", "mt.", "a.m.", "p.m.", "u.s.", "u.k.",
}

_BOUNDARY = re.compile(r"[.!?]+(?=\s|$)")
_WS = re.compile(r"\s+")
_WORD = re.compile(r"[a-z0-9']+")


def collapse_whitespace(text: str) -> str:
    return _WS.sub(" ", text).strip()


def tokenize(text: str) -> list[str]:
    """Lowercased word tokens (apostrophes kept inside words)."""
    return _WORD.findall(text.lower())


@dataclass(frozen=True)
class SentenceSeq:
    """An ordered sequence of non-empty sentences plus the original text."""

    sentences: tuple[str, ...]
    raw: str

    def __post_init__(self) -> None:
        for s in self.sentences:
            if not s.strip():
                raise ValueError("sentences must be non-empty")

    def __len__(self) -> int:
        return len(self.sentences)

    def __iter__(self):
        return iter(self.sentences)

    def joined(self) -> str:
        return " ".join(self.sentences)

    @staticmethod
    def from_sentences(sentences: Sequence[str]) -> "SentenceSeq":
        cleaned = tuple(s.strip() for s in sentences if s.strip())
        return SentenceSeq(sentences=cleaned, raw=" ".join(cleaned))


class ActionKind(str, Enum):
    INSERT = "Insert"
    REPLACE = "Replace"


@dataclass(frozen=True)
class EditAction:
    """One sentence-level suggestion.

    For Insert, ``anchor`` is the position before which the sentence goes
    (anchor == draft length appends at the end). For Replace it is the index
    of the sentence being replaced.
    """

    kind: ActionKind
    anchor: int
    text: str

    def __post_init__(self) -> None:
        if not self.text.strip():
            raise ValueError("action text must be non-empty")
        if self.anchor < 0:
            raise ValueError("anchor must be non-negative")


@dataclass(frozen=True)
class EditScript:
    """An ordered list of actions targeting a draft of ``base_length`` sentences."""

    actions: tuple[EditAction, ...]
    base_length: int

    def __post_init__(self) -> None:
        seen_replace: set[int] = set()
        for a in self.actions:
            if a.kind is ActionKind.REPLACE:
                if not 0 <= a.anchor < self.base_length:
                    raise InvalidScriptError(
                        f"Replace anchor {a.anchor} out of range for base length {self.base_length}"
                    )
                if a.anchor in seen_replace:
                    raise InvalidScriptError(f"duplicate Replace anchor {a.anchor}")
                seen_replace.add(a.anchor)
            else:
                if not 0 <= a.anchor <= self.base_length:
                    raise InvalidScriptError(
                        f"Insert anchor {a.anchor} out of range for base length {self.base_length}"
                    )

    def __len__(self) -> int:
        return len(self.actions)


def segment_sentences(text: str) -> SentenceSeq:
    """Split text into sentences at terminal punctuation.

    Splits occur after runs of ``.!?`` followed by whitespace or end of text,
    except when the preceding token is a known abbreviation or a single
    initial ("Dr.", "J."). Trailing unterminated text becomes a final
    sentence. Empty input yields an empty sequence.
    """
    sentences: list[str] = []
    start = 0
    for m in _BOUNDARY.finditer(text):
        prefix = text[: m.end()]
        word_m = re.search(r"(\S+)$", prefix)
        word = word_m.group(1).lower() if word_m else ""
        if word in ABBREVIATIONS:
            continue
        # single initial like "J." (but "I." etc. still ends a sentence only
        # if followed by more text we cannot attribute; keep initials glued)
        if re.fullmatch(r"[a-z]\.", word) and m.end() < len(text):
            continue
        piece = text[start : m.end()].strip()
        if piece:
            sentences.append(piece)
        start = m.end()
    tail = text[start:].strip()
    if tail:
        sentences.append(tail)
    return SentenceSeq(sentences=tuple(sentences), raw=text)


def apply_script(draft: SentenceSeq, script: EditScript) -> SentenceSeq:
    """Apply Replaces at their anchors, then Inserts in descending anchor
    order so earlier indices stay stable. Ties between Inserts at the same
    anchor preserve the script's listing order in the output.
    """
    if script.base_length != len(draft):
        raise InvalidScriptError(
            f"script targets {script.base_length} sentences, draft has {len(draft)}"
        )
    out = list(draft.sentences)
    for a in script.actions:
        if a.kind is ActionKind.REPLACE:
            out[a.anchor] = a.text
    inserts = [
        (a.anchor, i, a.text)
        for i, a in enumerate(script.actions)
        if a.kind is ActionKind.INSERT
    ]
    for anchor, _, text in sorted(inserts, key=lambda t: (t[0], t[1]), reverse=True):
        out.insert(anchor, text)
    return SentenceSeq.from_sentences(out)


class EmbeddingBackend(Protocol):
    """Produces a sparse vector for a piece of text; similarity is the cosine
    between two such vectors."""

    def vector(self, text: str) -> Mapping[str, float]: ...


class TrigramBackend:
    """Deterministic character-trigram term-frequency embedding.

    Trigrams are taken over the lowercased, whitespace-collapsed text.
    Strings shorter than three characters embed as a single gram.
    """

    def vector(self, text: str) -> Mapping[str, float]:
        t = collapse_whitespace(text).lower()
        if not t:
            return {}
        if len(t) < 3:
            return {t: 1.0}
        return Counter(t[i : i + 3] for i in range(len(t) - 2))


DEFAULT_BACKEND = TrigramBackend()


@lru_cache(maxsize=8192)
def _default_vector(text: str) -> Mapping[str, float]:
    return DEFAULT_BACKEND.vector(text)


def similarity(a: str, b: str, backend: EmbeddingBackend | None = None) -> float:
    """Cosine similarity in [0, 1] between two texts.

    Normalized-identical inputs score exactly 1.0; two empty inputs score
    1.0; exactly one empty input scores 0.0.
    """
    na, nb = collapse_whitespace(a).lower(), collapse_whitespace(b).lower()
    if na == nb:
        return 1.0
    if not na or not nb:
        return 0.0
    if backend is None:
        va, vb = _default_vector(na), _default_vector(nb)
    else:
        va, vb = backend.vector(na), backend.vector(nb)
    if not va or not vb:
        return 0.0
    dot = sum(cnt * vb.get(g, 0.0) for g, cnt in va.items())
    norm = math.sqrt(sum(v * v for v in va.values())) * math.sqrt(
        sum(v * v for v in vb.values())
    )
    if norm == 0.0:
        return 0.0
    return min(1.0, dot / norm)


@dataclass(frozen=True)
class NormalForms:
    """Normalization variants of one text.

    ``collapsed`` lowercases and collapses whitespace runs; ``fused``
    additionally joins runs of two or more single-character tokens, which
    defeats spaced-out obfuscation of filtered terms.
    """

    collapsed: str
    fused: str

    def variants(self) -> dict[str, str]:
        return {"collapsed": self.collapsed, "fused": self.fused}


def _fuse_single_chars(collapsed: str) -> str:
    tokens = collapsed.split(" ") if collapsed else []
    out: list[str] = []
    run: list[str] = []

    def flush() -> None:
        if len(run) >= 2:
            out.append("".join(run))
        else:
            out.extend(run)
        run.clear()

    for tok in tokens:
        core = tok.strip("\"'.,;:!?()[]")
        if len(core) == 1:
            run.append(tok)
        else:
            flush()
            out.append(tok)
    flush()
    return " ".join(out)


def normalize(text: str) -> NormalForms:
    collapsed = collapse_whitespace(text).lower()
    return NormalForms(collapsed=collapsed, fused=_fuse_single_chars(collapsed))


def align_to_script(
    original: SentenceSeq,
    rewritten: SentenceSeq,
    gap_cost: float = GAP_COST,
    keep_threshold: float = KEEP_THRESHOLD,
    backend: EmbeddingBackend | None = None,
) -> EditScript:
    """Recover an Insert/Replace script mapping ``original`` to ``rewritten``.

    Global dynamic-programming alignment over sentences with pair cost
    ``1 - similarity`` and gap cost ``gap_cost``. Aligned pairs at or above
    ``keep_threshold`` emit nothing; pairs below it emit a Replace; rewritten
    sentences without a partner emit an Insert. An optimal alignment that
    leaves an original sentence unmatched would require a Delete action,
    which the action vocabulary does not have, so it raises
    NotRepresentableError instead.
    """
    orig, rew = list(original.sentences), list(rewritten.sentences)
    n, m = len(orig), len(rew)

    sim_cache: dict[tuple[int, int], float] = {}

    def pair_sim(i: int, j: int) -> float:
        key = (i, j)
        if key not in sim_cache:
            sim_cache[key] = similarity(orig[i], rew[j], backend=backend)
        return sim_cache[key]

    # D[i][j]: min cost aligning orig[:i] with rew[:j]
    D = [[0.0] * (m + 1) for _ in range(n + 1)]
    for i in range(1, n + 1):
        D[i][0] = i * gap_cost
    for j in range(1, m + 1):
        D[0][j] = j * gap_cost
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            D[i][j] = min(
                D[i - 1][j - 1] + (1.0 - pair_sim(i - 1, j - 1)),
                D[i][j - 1] + gap_cost,
                D[i - 1][j] + gap_cost,
            )

    EPS = 1e-12
    ops: list[tuple[str, int, int]] = []
    i, j = n, m
    while i > 0 or j > 0:
        # tie preference: match, then insert, then delete
        if i > 0 and j > 0 and abs(
            D[i][j] - (D[i - 1][j - 1] + (1.0 - pair_sim(i - 1, j - 1)))
        ) < EPS:
            ops.append(("pair", i - 1, j - 1))
            i, j = i - 1, j - 1
        elif j > 0 and abs(D[i][j] - (D[i][j - 1] + gap_cost)) < EPS:
            ops.append(("insert", i, j - 1))
            j -= 1
        else:
            raise NotRepresentableError(
                f"rewriting drops original sentence {i - 1}: {orig[i - 1]!r}"
            )
    ops.reverse()

    actions: list[EditAction] = []
    for op, oi, rj in ops:
        if op == "pair":
            if pair_sim(oi, rj) < keep_threshold:
                actions.append(
                    EditAction(kind=ActionKind.REPLACE, anchor=oi, text=rew[rj])
                )
        else:
            actions.append(EditAction(kind=ActionKind.INSERT, anchor=oi, text=rew[rj]))
    return EditScript(actions=tuple(actions), base_length=n)
