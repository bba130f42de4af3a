from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qfi.engage import EngagementService, Page, TechOption, normalize_word
from qfi.errors import (
    AlreadySubmittedError,
    ConsentRequiredError,
    InvalidStateError,
    InvalidTransitionError,
    NotFoundError,
    ValidationError,
)


def consented_session(service: EngagementService, page: Page = Page.P4):
    session = service.create_session()
    service.advance_page(session.id, Page.P2)
    service.advance_page(session.id, Page.P3)
    service.record_consent(session.id, True)
    for target in range(4, page.value + 1):
        service.advance_page(session.id, Page(target))
    return service.get(session.id)


class TestSessionLifecycle:
    def test_fresh_session(self):
        service = EngagementService()
        session = service.create_session()
        assert session.current_page is Page.P1
        assert session.consent is False
        assert session.sentiment_word is None

    def test_distinct_ids(self):
        service = EngagementService()
        assert service.create_session().id != service.create_session().id

    def test_unknown_session(self):
        with pytest.raises(NotFoundError):
            EngagementService().get("missing")


class TestNavigation:
    def test_single_step_forward(self):
        service = EngagementService()
        session = service.create_session()
        assert service.advance_page(session.id, Page.P2).current_page is Page.P2

    def test_backward_allowed(self):
        service = EngagementService()
        session = service.create_session()
        service.advance_page(session.id, Page.P2)
        assert service.advance_page(session.id, Page.P1).current_page is Page.P1

    def test_skip_rejected(self):
        service = EngagementService()
        session = service.create_session()
        with pytest.raises(InvalidTransitionError):
            service.advance_page(session.id, Page.P5)

    def test_consent_gate_blocks_p4(self):
        service = EngagementService()
        session = service.create_session()
        service.advance_page(session.id, Page.P2)
        service.advance_page(session.id, Page.P3)
        with pytest.raises(ConsentRequiredError):
            service.advance_page(session.id, Page.P4)

    def test_decline_then_advance_blocked(self):
        service = EngagementService()
        session = service.create_session()
        service.advance_page(session.id, Page.P2)
        service.advance_page(session.id, Page.P3)
        service.record_consent(session.id, False)
        with pytest.raises(ConsentRequiredError):
            service.advance_page(session.id, Page.P4)

    def test_regrant_after_decline(self):
        service = EngagementService()
        session = service.create_session()
        service.advance_page(session.id, Page.P2)
        service.advance_page(session.id, Page.P3)
        service.record_consent(session.id, False)
        service.record_consent(session.id, True)
        assert service.advance_page(session.id, Page.P4).current_page is Page.P4

    def test_consent_wrong_page(self):
        service = EngagementService()
        session = service.create_session()
        with pytest.raises(InvalidStateError):
            service.record_consent(session.id, True)

    def test_page_parse(self):
        assert Page.parse("P3") is Page.P3
        assert Page.parse("p7") is Page.P7
        assert Page.parse(2) is Page.P2
        with pytest.raises(ValidationError):
            Page.parse("P8")


class TestSentiment:
    def test_normalization_strips_and_lowercases(self):
        assert normalize_word("  Entangled ") == "entangled"

    def test_rejects_two_words(self):
        with pytest.raises(ValidationError):
            normalize_word("two words")

    def test_rejects_empty(self):
        with pytest.raises(ValidationError):
            normalize_word("   ")

    def test_rejects_long(self):
        with pytest.raises(ValidationError):
            normalize_word("x" * 33)
        assert normalize_word("x" * 32) == "x" * 32

    def test_rejects_punctuation(self):
        with pytest.raises(ValidationError):
            normalize_word("spooky!")

    def test_allows_hyphen_and_digits(self):
        assert normalize_word("Shor-2048") == "shor-2048"

    def test_allows_unicode_letters(self):
        assert normalize_word("Überlagerung") == "überlagerung"

    def test_submit_requires_p4(self):
        service = EngagementService()
        session = service.create_session()
        with pytest.raises(InvalidStateError):
            service.submit_sentiment(session.id, "qubit")

    def test_one_submission_per_session(self):
        service = EngagementService()
        session = consented_session(service)
        service.submit_sentiment(session.id, "qubit")
        with pytest.raises(AlreadySubmittedError):
            service.submit_sentiment(session.id, "other")

    def test_aggregate_counts_and_ties(self):
        service = EngagementService()
        for word in ("alpha", "alpha", "beta"):
            session = consented_session(service)
            service.submit_sentiment(session.id, word)
        aggregate = service.aggregate_sentiment(k=1)
        assert aggregate.top_k == [("alpha", 2)]
        assert aggregate.total_submissions == 3

        tied = EngagementService()
        for word in ("b", "a"):
            session = consented_session(tied)
            tied.submit_sentiment(session.id, word)
        assert tied.aggregate_sentiment(k=2).top_k == [("a", 1), ("b", 1)]

    def test_empty_aggregate(self):
        aggregate = EngagementService().aggregate_sentiment(k=5)
        assert aggregate.total_submissions == 0
        assert aggregate.top_k == []


class TestVoting:
    def test_single_selection_accepted(self):
        service = EngagementService()
        session = consented_session(service, Page.P5)
        updated = service.cast_ballot(session.id, [TechOption.POST_QUANTUM_SIGNATURES])
        assert updated.ballot is not None

    def test_four_selections_rejected(self):
        service = EngagementService()
        session = consented_session(service, Page.P5)
        with pytest.raises(ValidationError):
            service.cast_ballot(session.id, list(TechOption)[:4])

    def test_empty_rejected(self):
        service = EngagementService()
        session = consented_session(service, Page.P5)
        with pytest.raises(ValidationError):
            service.cast_ballot(session.id, [])

    def test_wrong_page_rejected(self):
        service = EngagementService()
        session = consented_session(service, Page.P4)
        with pytest.raises(InvalidStateError):
            service.cast_ballot(session.id, [TechOption.ZERO_KNOWLEDGE_PROOFS])

    def test_resubmission_latest_wins(self):
        service = EngagementService()
        session = consented_session(service, Page.P5)
        service.cast_ballot(session.id, [TechOption.ZERO_KNOWLEDGE_PROOFS])
        service.cast_ballot(session.id, [TechOption.QUANTUM_KEY_DISTRIBUTION])
        tally = service.tally()
        assert tally.counts[TechOption.QUANTUM_KEY_DISTRIBUTION] == 1
        assert tally.counts[TechOption.ZERO_KNOWLEDGE_PROOFS] == 0
        assert tally.total_ballots == 1

    def test_approval_semantics(self):
        service = EngagementService()
        session = consented_session(service, Page.P5)
        service.cast_ballot(session.id, [TechOption.POST_QUANTUM_SIGNATURES,
                                         TechOption.HASH_BASED_CRYPTOGRAPHY])
        tally = service.tally()
        assert tally.total_ballots == 1
        assert tally.counts[TechOption.POST_QUANTUM_SIGNATURES] == 1
        assert tally.counts[TechOption.HASH_BASED_CRYPTOGRAPHY] == 1

    def test_tally_over_multiple_sessions(self):
        service = EngagementService()
        for _ in range(3):
            session = consented_session(service, Page.P5)
            service.cast_ballot(session.id, [TechOption.HASH_BASED_CRYPTOGRAPHY])
        assert service.tally().counts[TechOption.HASH_BASED_CRYPTOGRAPHY] == 3

    def test_empty_tally(self):
        tally = EngagementService().tally()
        assert tally.total_ballots == 0
        assert all(count == 0 for count in tally.counts.values())


class TestEventReplay:
    def test_replay_reconstructs_state(self):
        events = []
        service = EngagementService(on_event=events.append)
        session = consented_session(service, Page.P5)
        service.cast_ballot(session.id, [TechOption.QUANTUM_RANDOM_NUMBER_GENERATION])
        other = consented_session(service, Page.P4)
        service.submit_sentiment(other.id, "spooky")

        replayed = EngagementService()
        for event in events:
            replayed.apply(event)
        assert replayed.get(session.id) == service.get(session.id)
        assert replayed.get(other.id) == service.get(other.id)
        assert replayed.tally() == service.tally()
        assert replayed.aggregate_sentiment(10) == service.aggregate_sentiment(10)


@given(st.lists(st.sampled_from(["fwd", "back", "consent", "decline"]), max_size=30))
@settings(max_examples=60, deadline=None)
def test_property_no_gated_page_without_consent(moves):
    service = EngagementService()
    session = service.create_session()
    for move in moves:
        current = service.get(session.id)
        try:
            if move == "fwd":
                service.advance_page(session.id, Page(min(current.current_page.value + 1, 7)))
            elif move == "back":
                service.advance_page(session.id, Page(max(current.current_page.value - 1, 1)))
            elif move == "consent":
                service.record_consent(session.id, True)
            else:
                service.record_consent(session.id, False)
        except (InvalidTransitionError, ConsentRequiredError, InvalidStateError):
            pass
        state = service.get(session.id)
        assert not (state.current_page.value >= 4 and not state.consent)
