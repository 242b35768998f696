"""Expressed-empathy scoring on a 0-6 scale.

The total decomposes into three communication mechanisms (emotional
reactions, interpretations, explorations), each scored 0/1/2 for
none/weak/strong. The built-in backend is a deterministic rule scorer over
bundled lexicons; a remote neural classifier can be plugged in through
RemoteScorer, with rule-backend fallback when it is unreachable.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import httpx

from . import lexicons
from .errors import BackendUnavailableError, ContractViolationError
from .stats import StatResult, mean_with_ci
from .textcore import collapse_whitespace, segment_sentences, tokenize


@dataclass(frozen=True)
class EmpathyScore:
    emotional_reactions: int
    interpretations: int
    explorations: int

    def __post_init__(self) -> None:
        for name in ("emotional_reactions", "interpretations", "explorations"):
            v = getattr(self, name)
            if v not in (0, 1, 2):
                raise ContractViolationError(f"{name} subscore {v!r} outside 0..2")

    @property
    def total(self) -> int:
        return self.emotional_reactions + self.interpretations + self.explorations

    def as_dict(self) -> dict[str, int]:
        return {
            "emotional_reactions": self.emotional_reactions,
            "interpretations": self.interpretations,
            "explorations": self.explorations,
            "total": self.total,
        }


@dataclass(frozen=True)
class ScoringContext:
    seeker_post: str
    response: str

    def __post_init__(self) -> None:
        if not self.seeker_post.strip():
            raise ValueError("seeker_post must be non-empty")


class RuleScorer:
    """Deterministic lexicon/frame scorer.

    Emotional reactions: 1 for any emotion-lexicon term, 2 when a term
    co-occurs with an intensifier in the same sentence or a first-person
    emotional frame is present. Interpretations: 1 for an understanding
    frame, 2 when the response additionally shares a content word with the
    seeker post. Explorations: 1 for any question, 2 for a question carrying
    a seeker content word. All rules are presence-based, so appending text
    never lowers a subscore.
    """

    def score(self, ctx: ScoringContext) -> EmpathyScore:
        response = ctx.response
        if not response.strip():
            return EmpathyScore(0, 0, 0)
        collapsed = collapse_whitespace(response).lower()
        sentences = segment_sentences(response).sentences
        resp_tokens = set(tokenize(response))
        seeker_content = set(lexicons.content_words(ctx.seeker_post))

        er = self._emotional_reactions(collapsed, sentences, resp_tokens)
        interp = self._interpretations(collapsed, resp_tokens, seeker_content)
        expl = self._explorations(sentences, seeker_content)
        return EmpathyScore(er, interp, expl)

    def _emotional_reactions(
        self, collapsed: str, sentences: Sequence[str], resp_tokens: set[str]
    ) -> int:
        if not (resp_tokens & lexicons.emotion_terms()):
            return 0
        if any(frame in collapsed for frame in lexicons.emotion_frames()):
            return 2
        for sent in sentences:
            toks = set(tokenize(sent))
            if toks & lexicons.emotion_terms() and toks & lexicons.intensifiers():
                return 2
        return 1

    def _interpretations(
        self, collapsed: str, resp_tokens: set[str], seeker_content: set[str]
    ) -> int:
        if not any(frame in collapsed for frame in lexicons.understanding_frames()):
            return 0
        if resp_tokens & seeker_content:
            return 2
        return 1

    def _explorations(
        self, sentences: Sequence[str], seeker_content: set[str]
    ) -> int:
        questions = [s for s in sentences if s.rstrip().endswith("?")]
        if not questions:
            return 0
        for q in questions:
            if set(tokenize(q)) & seeker_content:
                return 2
        return 1


_DEFAULT_SCORER = RuleScorer()


def score(ctx: ScoringContext) -> EmpathyScore:
    return _DEFAULT_SCORER.score(ctx)


@dataclass(frozen=True)
class CorpusScoreResult:
    scores: tuple[EmpathyScore, ...]
    summary: StatResult | None  # None when the corpus is empty

    @property
    def mean_total(self) -> float | None:
        return self.summary.estimate if self.summary else None


def score_corpus(
    pairs: Sequence[ScoringContext],
    scorer: RuleScorer | None = None,
    n_boot: int = 10_000,
    seed: int = 0,
) -> CorpusScoreResult:
    """Score every pair and summarize the mean total with a bootstrap CI."""
    backend = scorer or _DEFAULT_SCORER
    per_item = tuple(backend.score(ctx) for ctx in pairs)
    if not per_item:
        return CorpusScoreResult(scores=(), summary=None)
    totals = [s.total for s in per_item]
    return CorpusScoreResult(
        scores=per_item, summary=mean_with_ci(totals, n_boot=n_boot, seed=seed)
    )


class RemoteScorer:
    """Client for an external classifier exposing the scoring wire contract.

    Request: ``{"seeker_post": ..., "response": ...}``. Response:
    ``{"emotional_reactions": n, "interpretations": n, "explorations": n}``
    with each subscore in 0..2; anything else is a contract violation.
    """

    def __init__(self, url: str, timeout: float = 5.0, client: httpx.Client | None = None):
        self.url = url
        self.timeout = timeout
        self._client = client

    def score(self, ctx: ScoringContext) -> EmpathyScore:
        payload = {"seeker_post": ctx.seeker_post, "response": ctx.response}
        try:
            if self._client is not None:
                resp = self._client.post(self.url, json=payload, timeout=self.timeout)
            else:
                resp = httpx.post(self.url, json=payload, timeout=self.timeout)
            resp.raise_for_status()
            body = resp.json()
        except ContractViolationError:
            raise
        except httpx.HTTPError as exc:
            raise BackendUnavailableError(f"remote scorer unreachable: {exc}") from exc
        except ValueError as exc:
            raise ContractViolationError(f"remote scorer returned non-JSON: {exc}") from exc
        return parse_remote_score(body)


def parse_remote_score(body: object) -> EmpathyScore:
    if not isinstance(body, dict):
        raise ContractViolationError(f"remote score must be an object, got {type(body).__name__}")
    fields = ("emotional_reactions", "interpretations", "explorations")
    values = []
    for name in fields:
        if name not in body:
            raise ContractViolationError(f"remote score missing {name}")
        v = body[name]
        if not isinstance(v, int) or isinstance(v, bool):
            raise ContractViolationError(f"remote {name} must be an integer, got {v!r}")
        values.append(v)
    return EmpathyScore(*values)


@dataclass
class FallbackScorer:
    """Remote scorer with rule-backend fallback on transport failure.

    ``on_fallback`` is invoked (once per fallback) so callers can record a
    scorer_fallback event; contract violations are not silently absorbed.
    """

    remote: RemoteScorer
    rule: RuleScorer = field(default_factory=RuleScorer)
    on_fallback: Callable[[str], None] | None = None

    def score(self, ctx: ScoringContext) -> EmpathyScore:
        try:
            return self.remote.score(ctx)
        except BackendUnavailableError as exc:
            if self.on_fallback is not None:
                self.on_fallback(str(exc))
            return self.rule.score(ctx)
