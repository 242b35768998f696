"""Feedback generation: turns a (seeker post, draft) pair into Insert/Replace
suggestion bundles with reload support.

The built-in backend composes candidates from three template banks
(emotional reaction, interpretation, exploration question), enumerated as a
seeded shuffle of their cartesian product so reloads are varied but
replayable. Every candidate is converted to an edit script by sentence
alignment, screened by the safety filter, and kept only if it strictly
improves the draft's empathy score. A remote rewriting model can be plugged
in; its output goes through exactly the same checks.
"""

from __future__ import annotations

import hashlib
import itertools
import random
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import httpx

from . import lexicons
from .empathy import RuleScorer, ScoringContext
from .errors import BackendUnavailableError, ContractViolationError, NotRepresentableError
from .safety import SafetyRuleSet, check as safety_check
from .textcore import EditScript, SentenceSeq, align_to_script, apply_script, segment_sentences

POSITIVE_THRESHOLD = 5
RETRY_BUDGET = 8
GENERIC_TOPIC = "all of this"


@dataclass(frozen=True)
class FeedbackRequest:
    seeker_post: str
    draft: str = ""
    candidate_cursor: int = 0
    participant_id: str = ""
    session_id: str = ""

    def __post_init__(self) -> None:
        if not self.seeker_post.strip():
            raise ValueError("seeker_post must be non-empty")
        if self.candidate_cursor < 0:
            raise ValueError("candidate_cursor must be non-negative")


class BundleKind(str, Enum):
    SUGGESTIONS = "Suggestions"
    POSITIVE = "Positive"


@dataclass(frozen=True)
class FeedbackBundle:
    script: EditScript
    preview: str
    candidate_id: int
    kind: BundleKind
    message: str

    def __post_init__(self) -> None:
        if self.kind is BundleKind.POSITIVE and len(self.script) != 0:
            raise ValueError("Positive bundles must carry an empty script")
        if self.kind is BundleKind.SUGGESTIONS and len(self.script) == 0:
            raise ValueError("Suggestions bundles must carry a non-empty script")


@dataclass(frozen=True)
class FeedbackOutcome:
    """A bundle plus markers the service turns into log events."""

    bundle: FeedbackBundle
    bank_exhausted: bool = False
    degraded: bool = False
    remote_fallback: bool = False
    attempts: int = 1


MESSAGE_SUGGESTIONS = "Here are some changes that could make your response feel more empathic."
MESSAGE_POSITIVE = "Your response already expresses strong empathy. Nice work!"
MESSAGE_NO_IMPROVEMENT = "No suggestions right now; you can keep editing or submit when ready."


def _template_bank(path: Path) -> tuple[str, ...]:
    lines = [l.strip() for l in path.read_text(encoding="utf-8").splitlines()]
    bank = tuple(l for l in lines if l and not l.startswith("#"))
    if not bank:
        raise ValueError(f"empty template bank: {path}")
    return bank


def _stable_seed(*parts: object) -> int:
    digest = hashlib.sha256("|".join(str(p) for p in parts).encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


class RemoteRewriter:
    """Client for an external rewriting model.

    Request: ``{"seeker_post": ..., "response": ..., "seed": n}``; response:
    ``{"rewriting": text}``. Transport failures surface as
    BackendUnavailableError so the caller can fall back to the built-in bank.
    """

    def __init__(self, url: str, timeout: float = 10.0, client: httpx.Client | None = None):
        self.url = url
        self.timeout = timeout
        self._client = client

    def rewrite(self, seeker_post: str, response: str, seed: int) -> str:
        payload = {"seeker_post": seeker_post, "response": response, "seed": seed}
        try:
            if self._client is not None:
                resp = self._client.post(self.url, json=payload, timeout=self.timeout)
            else:
                resp = httpx.post(self.url, json=payload, timeout=self.timeout)
            resp.raise_for_status()
            body = resp.json()
        except httpx.HTTPError as exc:
            raise BackendUnavailableError(f"remote rewriter unreachable: {exc}") from exc
        except ValueError as exc:
            raise ContractViolationError(f"remote rewriter returned non-JSON: {exc}") from exc
        if not isinstance(body, dict) or not isinstance(body.get("rewriting"), str):
            raise ContractViolationError("remote rewriting payload must be {'rewriting': str}")
        return body["rewriting"]


@dataclass
class _Candidate:
    candidate_id: int
    script: EditScript
    preview: str


class Rewriter:
    """Deterministic feedback generator.

    ``(seeker_post, draft, seed, cursor)`` fully determines the produced
    bundle for the built-in backend.
    """

    def __init__(
        self,
        safety_rules: SafetyRuleSet,
        scorer: RuleScorer | None = None,
        seed: int = 0,
        positive_threshold: int = POSITIVE_THRESHOLD,
        retry_budget: int = RETRY_BUDGET,
        remote: RemoteRewriter | None = None,
        template_dir: Path | None = None,
    ):
        tdir = template_dir or lexicons.data_path("templates")
        self.bank_er = _template_bank(tdir / "emotional_reactions.txt")
        self.bank_interp = _template_bank(tdir / "interpretations.txt")
        self.bank_expl = _template_bank(tdir / "explorations.txt")
        self.safety_rules = safety_rules
        self.scorer = scorer or RuleScorer()
        self.seed = seed
        self.positive_threshold = positive_threshold
        self.retry_budget = retry_budget
        self.remote = remote

    # -- public API --------------------------------------------------------

    def generate(self, req: FeedbackRequest) -> FeedbackOutcome:
        draft_seq = segment_sentences(req.draft)
        draft_score = self.scorer.score(
            ScoringContext(seeker_post=req.seeker_post, response=req.draft)
        ).total
        if draft_score >= self.positive_threshold:
            return FeedbackOutcome(
                bundle=FeedbackBundle(
                    script=EditScript(actions=(), base_length=len(draft_seq)),
                    preview=req.draft,
                    candidate_id=-1,
                    kind=BundleKind.POSITIVE,
                    message=MESSAGE_POSITIVE,
                )
            )

        remote_fallback = False
        if self.remote is not None:
            try:
                return self._generate_remote(req, draft_seq, draft_score)
            except BackendUnavailableError:
                remote_fallback = True

        outcome = self._generate_builtin(req, draft_seq, draft_score)
        if remote_fallback:
            outcome = FeedbackOutcome(
                bundle=outcome.bundle,
                bank_exhausted=outcome.bank_exhausted,
                degraded=outcome.degraded,
                remote_fallback=True,
                attempts=outcome.attempts,
            )
        return outcome

    def reload(self, req: FeedbackRequest) -> FeedbackOutcome:
        """Reload is a generate at the next candidate cursor; the caller owns
        cursor state."""
        return self.generate(req)

    def bank_size(self) -> int:
        return len(self.bank_er) * len(self.bank_interp) * len(self.bank_expl)

    # -- built-in backend --------------------------------------------------

    def _generate_builtin(
        self, req: FeedbackRequest, draft_seq: SentenceSeq, draft_score: int
    ) -> FeedbackOutcome:
        combos = list(
            itertools.product(
                range(len(self.bank_er)),
                range(len(self.bank_interp)),
                range(len(self.bank_expl)),
            )
        )
        rng = random.Random(_stable_seed(self.seed, req.seeker_post, req.draft))
        rng.shuffle(combos)

        topic = self._pick_topic(req.seeker_post)
        cursor = req.candidate_cursor
        valid: list[_Candidate] = []
        rejects = 0
        attempts = 0
        for bank_pos, (ei, ii, xi) in enumerate(combos):
            attempts += 1
            candidate_id = (
                ei * len(self.bank_interp) * len(self.bank_expl)
                + ii * len(self.bank_expl)
                + xi
            )
            rewritten = self._compose(draft_seq, ei, ii, xi, topic)
            cand = self._validate(draft_seq, rewritten, draft_score, candidate_id)
            if cand is None:
                rejects += 1
                if rejects > self.retry_budget:
                    return self._degraded(draft_seq, req, attempts)
                continue
            valid.append(cand)
            if len(valid) > cursor:
                return FeedbackOutcome(
                    bundle=self._bundle(cand), attempts=attempts
                )
        if not valid:
            return self._degraded(draft_seq, req, attempts)
        # cursor walked past the whole candidate bank: cycle, flag exhaustion
        cand = valid[cursor % len(valid)]
        return FeedbackOutcome(bundle=self._bundle(cand), bank_exhausted=True, attempts=attempts)

    def _compose(
        self, draft_seq: SentenceSeq, ei: int, ii: int, xi: int, topic: str
    ) -> SentenceSeq:
        er_text = self.bank_er[ei]
        interp_text = self.bank_interp[ii].format(topic=topic)
        expl_text = self.bank_expl[xi].format(topic=topic)

        sentences = list(draft_seq.sentences)
        dismiss_idx = self._first_dismissive(sentences)
        if dismiss_idx is not None:
            sentences[dismiss_idx] = er_text
            er_pos = dismiss_idx
        else:
            sentences.insert(0, er_text)
            er_pos = 0
        sentences.insert(er_pos + 1, interp_text)
        sentences.append(expl_text)
        return SentenceSeq.from_sentences(sentences)

    @staticmethod
    def _first_dismissive(sentences: list[str]) -> int | None:
        for i, s in enumerate(sentences):
            low = " ".join(s.lower().split())
            if any(op in low for op in lexicons.dismissive_openers()):
                return i
        return None

    def _pick_topic(self, seeker_post: str) -> str:
        for word in lexicons.content_words(seeker_post):
            if safety_check(word, self.safety_rules).is_safe:
                return word
        return GENERIC_TOPIC

    def _validate(
        self,
        draft_seq: SentenceSeq,
        rewritten: SentenceSeq,
        draft_score: int,
        candidate_id: int,
    ) -> _Candidate | None:
        try:
            script = align_to_script(draft_seq, rewritten)
        except NotRepresentableError:
            return None
        if len(script) == 0:
            return None
        applied = apply_script(draft_seq, script)
        preview = applied.joined()
        for action in script.actions:
            if not safety_check(action.text, self.safety_rules).is_safe:
                return None
        for sentence in applied.sentences:
            if not safety_check(sentence, self.safety_rules).is_safe:
                return None
        # generate-then-check: only strictly improving candidates surface
        seeker = self._current_seeker
        preview_score = self.scorer.score(
            ScoringContext(seeker_post=seeker, response=preview)
        ).total
        if preview_score <= draft_score:
            return None
        return _Candidate(candidate_id=candidate_id, script=script, preview=preview)

    def _bundle(self, cand: _Candidate) -> FeedbackBundle:
        return FeedbackBundle(
            script=cand.script,
            preview=cand.preview,
            candidate_id=cand.candidate_id,
            kind=BundleKind.SUGGESTIONS,
            message=MESSAGE_SUGGESTIONS,
        )

    def _degraded(
        self, draft_seq: SentenceSeq, req: FeedbackRequest, attempts: int
    ) -> FeedbackOutcome:
        return FeedbackOutcome(
            bundle=FeedbackBundle(
                script=EditScript(actions=(), base_length=len(draft_seq)),
                preview=req.draft,
                candidate_id=-1,
                kind=BundleKind.POSITIVE,
                message=MESSAGE_NO_IMPROVEMENT,
            ),
            degraded=True,
            attempts=attempts,
        )

    # -- remote backend ----------------------------------------------------

    def _generate_remote(
        self, req: FeedbackRequest, draft_seq: SentenceSeq, draft_score: int
    ) -> FeedbackOutcome:
        assert self.remote is not None
        attempts = 0
        for attempt in range(self.retry_budget + 1):
            attempts += 1
            seed = _stable_seed(self.seed, req.seeker_post, req.draft, req.candidate_cursor, attempt)
            text = self.remote.rewrite(req.seeker_post, req.draft, seed)
            rewritten = segment_sentences(text)
            self._current_seeker = req.seeker_post
            cand = self._validate(draft_seq, rewritten, draft_score, candidate_id=attempt)
            if cand is not None:
                return FeedbackOutcome(bundle=self._bundle(cand), attempts=attempts)
        return self._degraded(draft_seq, req, attempts)

    # set per-generate so _validate can score previews against the seeker
    _current_seeker: str = ""
