"""Participant sessions: a seven-page wizard with consent gating, one-word
sentiment capture, and approval voting over six technology options.

Sessions are anonymous; the session id is the only key. Pages advance one
step at a time (backward allowed) and nothing at P4 or beyond is reachable
without recorded consent. Mutations flow through ``EngagementService.apply``
as event dicts so a persisted event log replays to identical state.
"""
from __future__ import annotations

import threading
import uuid
from dataclasses import dataclass, replace
from datetime import datetime
from enum import Enum

from .canonical import parse_rfc3339, rfc3339, utc_now
from .errors import (
    AlreadySubmittedError,
    ConsentRequiredError,
    InvalidStateError,
    InvalidTransitionError,
    NotFoundError,
    ValidationError,
)

MAX_WORD_CODEPOINTS = 32
MAX_SELECTIONS = 3
CONSENT_PAGE = 3
GATED_FROM_PAGE = 4


class Page(int, Enum):
    P1 = 1
    P2 = 2
    P3 = 3
    P4 = 4
    P5 = 5
    P6 = 6
    P7 = 7

    @classmethod
    def parse(cls, value: "Page | str | int") -> "Page":
        if isinstance(value, Page):
            return value
        if isinstance(value, str) and value.upper().startswith("P"):
            value = value[1:]
        try:
            return cls(int(value))
        except (ValueError, TypeError):
            raise ValidationError(f"unknown page {value!r}") from None

    @property
    def label(self) -> str:
        return f"P{self.value}"


class TechOption(str, Enum):
    POST_QUANTUM_SIGNATURES = "PostQuantumSignatures"
    QUANTUM_KEY_DISTRIBUTION = "QuantumKeyDistribution"
    HASH_BASED_CRYPTOGRAPHY = "HashBasedCryptography"
    QUANTUM_RANDOM_NUMBER_GENERATION = "QuantumRandomNumberGeneration"
    QUANTUM_SAFE_SMART_CONTRACTS = "QuantumSafeSmartContracts"
    ZERO_KNOWLEDGE_PROOFS = "ZeroKnowledgeProofs"


@dataclass(frozen=True)
class Ballot:
    selections: frozenset[TechOption]
    cast_at: datetime

    def __post_init__(self):
        if not 1 <= len(self.selections) <= MAX_SELECTIONS:
            raise ValidationError(f"select between 1 and {MAX_SELECTIONS} options")


@dataclass(frozen=True)
class Session:
    id: str
    current_page: Page
    consent: bool
    created_at: datetime
    sentiment_word: str | None = None
    ballot: Ballot | None = None

    def to_doc(self) -> dict:
        return {
            "session_id": self.id,
            "page": self.current_page.label,
            "consent": self.consent,
            "created_at": rfc3339(self.created_at),
            "sentiment_word": self.sentiment_word,
            "ballot": sorted(o.value for o in self.ballot.selections) if self.ballot else None,
        }


@dataclass(frozen=True)
class SentimentAggregate:
    counts: dict[str, int]
    total_submissions: int
    top_k: list[tuple[str, int]]

    def to_doc(self) -> dict:
        return {
            "counts": dict(self.counts),
            "total_submissions": self.total_submissions,
            "top_k": [{"word": w, "count": c} for w, c in self.top_k],
        }


@dataclass(frozen=True)
class Tally:
    counts: dict[TechOption, int]
    total_ballots: int

    def to_doc(self) -> dict:
        return {
            "counts": {option.value: self.counts.get(option, 0) for option in TechOption},
            "total_ballots": self.total_ballots,
        }


def normalize_word(raw: str) -> str:
    """Trim and lowercase; reject anything but one short word of
    letters/digits/hyphens."""
    word = raw.strip().lower()
    if not word:
        raise ValidationError("sentiment word is empty")
    if any(ch.isspace() for ch in word):
        raise ValidationError("sentiment must be a single word without spaces")
    if len(word) > MAX_WORD_CODEPOINTS:
        raise ValidationError(f"sentiment word exceeds {MAX_WORD_CODEPOINTS} characters")
    for ch in word:
        if not (ch.isalpha() or ch.isdigit() or ch == "-"):
            raise ValidationError(f"character {ch!r} not allowed; use letters, digits, or hyphens")
    return word


def parse_selections(values) -> frozenset[TechOption]:
    try:
        selections = frozenset(TechOption(v) for v in values)
    except ValueError as exc:
        raise ValidationError(str(exc)) from None
    if not 1 <= len(selections) <= MAX_SELECTIONS:
        raise ValidationError(f"select between 1 and {MAX_SELECTIONS} options")
    return selections


class EngagementService:
    """In-memory materialized view over an ordered stream of engagement events.

    Live mutations build the event, validate and apply it, then hand it to
    ``on_event`` for durable storage; replaying the same events through
    ``apply`` reconstructs identical state. Per-instance lock serializes
    mutations; reads snapshot under the same lock.
    """

    def __init__(self, on_event=None):
        self._sessions: dict[str, Session] = {}
        self._lock = threading.RLock()
        self.on_event = on_event

    # -- queries ------------------------------------------------------------

    def get(self, session_id: str) -> Session:
        with self._lock:
            session = self._sessions.get(session_id)
        if session is None:
            raise NotFoundError(f"unknown session {session_id!r}")
        return session

    def session_count(self) -> int:
        with self._lock:
            return len(self._sessions)

    def aggregate_sentiment(self, k: int) -> SentimentAggregate:
        if k < 1:
            raise ValidationError("k must be >= 1")
        with self._lock:
            words = [s.sentiment_word for s in self._sessions.values() if s.sentiment_word]
        counts: dict[str, int] = {}
        for word in words:
            counts[word] = counts.get(word, 0) + 1
        ranked = sorted(counts.items(), key=lambda item: (-item[1], item[0]))
        return SentimentAggregate(counts=counts, total_submissions=len(words),
                                  top_k=ranked[:k])

    def tally(self) -> Tally:
        with self._lock:
            ballots = [s.ballot for s in self._sessions.values() if s.ballot]
        counts: dict[TechOption, int] = {option: 0 for option in TechOption}
        for ballot in ballots:
            for option in ballot.selections:
                counts[option] += 1
        return Tally(counts=counts, total_ballots=len(ballots))

    # -- mutations ----------------------------------------------------------

    def create_session(self) -> Session:
        event = {"op": "create", "session_id": str(uuid.uuid4()),
                 "created_at": rfc3339(utc_now())}
        return self._commit(event)

    def advance_page(self, session_id: str, target: Page | str | int) -> Session:
        event = {"op": "page", "session_id": session_id,
                 "target": Page.parse(target).label}
        return self._commit(event)

    def record_consent(self, session_id: str, granted: bool) -> Session:
        event = {"op": "consent", "session_id": session_id, "granted": bool(granted)}
        return self._commit(event)

    def submit_sentiment(self, session_id: str, word: str) -> Session:
        event = {"op": "sentiment", "session_id": session_id,
                 "word": normalize_word(word)}
        return self._commit(event)

    def cast_ballot(self, session_id: str, selections) -> Session:
        event = {"op": "ballot", "session_id": session_id,
                 "selections": sorted(o.value for o in parse_selections(selections)),
                 "cast_at": rfc3339(utc_now())}
        return self._commit(event)

    def _commit(self, event: dict) -> Session:
        with self._lock:
            session = self.apply(event)
            if self.on_event is not None:
                self.on_event(event)
        return session

    # -- event application (shared by live path and replay) ------------------

    def apply(self, event: dict) -> Session:
        with self._lock:
            op = event["op"]
            if op == "create":
                session = Session(id=event["session_id"], current_page=Page.P1,
                                  consent=False,
                                  created_at=parse_rfc3339(event["created_at"]))
                self._sessions[session.id] = session
                return session
            session = self.get(event["session_id"])
            if op == "page":
                session = self._advance(session, Page.parse(event["target"]))
            elif op == "consent":
                session = self._consent(session, event["granted"])
            elif op == "sentiment":
                session = self._sentiment(session, event["word"])
            elif op == "ballot":
                session = self._ballot(session, parse_selections(event["selections"]),
                                       parse_rfc3339(event["cast_at"]))
            else:
                raise ValidationError(f"unknown engagement event {op!r}")
            self._sessions[session.id] = session
            return session

    def _advance(self, session: Session, target: Page) -> Session:
        current = session.current_page.value
        if target.value not in (current + 1, current - 1):
            raise InvalidTransitionError(
                f"cannot jump from {session.current_page.label} to {target.label}")
        if target.value >= GATED_FROM_PAGE and not session.consent:
            raise ConsentRequiredError("consent is required beyond P3")
        return replace(session, current_page=target)

    def _consent(self, session: Session, granted: bool) -> Session:
        if session.current_page is not Page.P3:
            raise InvalidStateError(
                f"consent is recorded at P3, session is at {session.current_page.label}")
        return replace(session, consent=granted)

    def _sentiment(self, session: Session, word: str) -> Session:
        if session.current_page is not Page.P4:
            raise InvalidStateError(
                f"sentiment is submitted at P4, session is at {session.current_page.label}")
        if not session.consent:
            raise ConsentRequiredError("consent is required before sentiment submission")
        if session.sentiment_word is not None:
            raise AlreadySubmittedError("this session already submitted a sentiment word")
        return replace(session, sentiment_word=normalize_word(word))

    def _ballot(self, session: Session, selections: frozenset[TechOption],
                cast_at: datetime) -> Session:
        if session.current_page is not Page.P5:
            raise InvalidStateError(
                f"votes are cast at P5, session is at {session.current_page.label}")
        if not session.consent:
            raise ConsentRequiredError("consent is required before voting")
        # resubmission replaces the prior ballot, latest wins
        return replace(session, ballot=Ballot(selections=selections, cast_at=cast_at))
