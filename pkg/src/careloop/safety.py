"""Crisis-content filtering: rule-set loading, obfuscation-resistant
matching, post gating, and flag intake.

Patterns are evaluated against three normalization variants of the text
(raw lowercased, whitespace-collapsed, character-fused), so spaced-out
evasions like "c u t" still match. Single-word rules are word-boundary
anchored at load time to avoid matching inside longer words ("haircut").
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field
from datetime import datetime
from enum import Enum
from pathlib import Path
from typing import Iterable, Protocol, Sequence

from .errors import NotFoundError, ValidationError
from .textcore import normalize

_SINGLE_WORD = re.compile(r"[a-z0-9']+\Z", re.IGNORECASE)


@dataclass(frozen=True)
class SafetyRule:
    rule_id: str
    pattern: re.Pattern
    source: str


@dataclass(frozen=True)
class SafetyRuleSet:
    rules: tuple[SafetyRule, ...]
    version: str

    def __post_init__(self) -> None:
        if not self.rules:
            raise ValidationError("safety rule set must not be empty")


class SafetyStatus(str, Enum):
    SAFE = "Safe"
    UNSAFE = "Unsafe"


@dataclass(frozen=True)
class SafetyMatch:
    rule_id: str
    span: str
    variant: str


@dataclass(frozen=True)
class SafetyVerdict:
    status: SafetyStatus
    matched: tuple[SafetyMatch, ...]

    def __post_init__(self) -> None:
        if (self.status is SafetyStatus.UNSAFE) != bool(self.matched):
            raise ValidationError("Unsafe verdicts must carry matches and Safe ones none")

    @property
    def is_safe(self) -> bool:
        return self.status is SafetyStatus.SAFE


def _compile_rule(rule_id: str, raw: str) -> SafetyRule:
    # Strip the conventional ".*(...).*" wrapping to find the core term; a
    # bare single word gets boundary anchoring, everything else compiles
    # as written.
    core = raw
    if core.startswith(".*"):
        core = core[2:]
    if core.endswith(".*"):
        core = core[:-2]
    if core.startswith("(") and core.endswith(")"):
        core = core[1:-1]
    if _SINGLE_WORD.fullmatch(core):
        pattern = re.compile(rf"\b{re.escape(core)}\b", re.IGNORECASE)
    else:
        pattern = re.compile(raw, re.IGNORECASE)
    return SafetyRule(rule_id=rule_id, pattern=pattern, source=raw)


def load_rules(path: Path) -> SafetyRuleSet:
    """Parse a rule file with one ``id<TAB>pattern`` per line.

    A ``# version:`` header sets the rule-set version; otherwise a content
    hash is used. Raises ValidationError for malformed lines or patterns
    that do not compile.
    """
    text = path.read_text(encoding="utf-8")
    version = "sha1:" + hashlib.sha1(text.encode("utf-8")).hexdigest()[:12]
    rules: list[SafetyRule] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped:
            continue
        if stripped.startswith("#"):
            m = re.match(r"#\s*version:\s*(\S+)", stripped)
            if m:
                version = m.group(1)
            continue
        if "\t" not in stripped:
            raise ValidationError(f"{path}:{lineno}: expected 'id<TAB>pattern'")
        rule_id, raw = stripped.split("\t", 1)
        try:
            rules.append(_compile_rule(rule_id.strip(), raw.strip()))
        except re.error as exc:
            raise ValidationError(f"{path}:{lineno}: bad pattern {raw!r}: {exc}") from exc
    return SafetyRuleSet(rules=tuple(rules), version=version)


def check(text: str, rules: SafetyRuleSet) -> SafetyVerdict:
    """Evaluate every rule against every normalization variant.

    All rule hits are reported; matching never short-circuits.
    """
    forms = normalize(text)
    variants = [("raw", text.lower()), ("collapsed", forms.collapsed), ("fused", forms.fused)]
    matches: list[SafetyMatch] = []
    for rule in rules.rules:
        for variant_name, variant_text in variants:
            m = rule.pattern.search(variant_text)
            if m:
                span = m.group(1) if m.groups() else m.group(0)
                matches.append(SafetyMatch(rule.rule_id, span, variant_name))
    status = SafetyStatus.UNSAFE if matches else SafetyStatus.SAFE
    return SafetyVerdict(status=status, matched=tuple(matches))


@dataclass(frozen=True)
class GateDecision:
    post_id: str
    admitted: bool
    verdict: SafetyVerdict


def gate_post(post_id: str, text: str, rules: SafetyRuleSet) -> GateDecision:
    """Admit a seeker post into the feedback pipeline or escalate it."""
    verdict = check(text, rules)
    return GateDecision(post_id=post_id, admitted=verdict.is_safe, verdict=verdict)


@dataclass(frozen=True)
class IngestReport:
    admitted: tuple[tuple[str, str], ...]  # (post_id, text)
    escalated: tuple[GateDecision, ...]


def ingest_posts(lines: Iterable[str], rules: SafetyRuleSet) -> IngestReport:
    """Gate a ``post_id<TAB>text`` stream; duplicated ids keep the first
    decision (gating is idempotent per post id)."""
    admitted: list[tuple[str, str]] = []
    escalated: list[GateDecision] = []
    seen: set[str] = set()
    for line in lines:
        line = line.rstrip("\n")
        if not line.strip() or line.startswith("#"):
            continue
        if "\t" not in line:
            raise ValidationError(f"post line missing tab separator: {line!r}")
        post_id, text = line.split("\t", 1)
        post_id = post_id.strip()
        if post_id in seen:
            continue
        seen.add(post_id)
        decision = gate_post(post_id, text, rules)
        if decision.admitted:
            admitted.append((post_id, text))
        else:
            escalated.append(decision)
    return IngestReport(admitted=tuple(admitted), escalated=tuple(escalated))


class FlagTarget(str, Enum):
    SEEKER_POST = "SeekerPost"
    FEEDBACK = "Feedback"


@dataclass(frozen=True)
class FlagRecord:
    target: FlagTarget
    target_id: str
    participant_id: str
    timestamp: datetime
    reason: str | None = None


class FlagSink(Protocol):
    """Where flags land: the event log, which analytics reads flag rates from."""

    def target_exists(self, target: FlagTarget, target_id: str) -> bool: ...

    def append_flag(self, flag: FlagRecord) -> int: ...


def record_flag(flag: FlagRecord, sink: FlagSink) -> int:
    """Validate the flag's target and append it; returns the stored offset."""
    if not sink.target_exists(flag.target, flag.target_id):
        raise NotFoundError(f"unknown flag target {flag.target.value}:{flag.target_id}")
    return sink.append_flag(flag)
