"""Exception hierarchy shared across the engine.

Every error the public API raises deliberately derives from StepflowError so
service code can distinguish engine failures from programming errors.
"""

from __future__ import annotations


class StepflowError(Exception):
    """Base class for all engine errors."""


class EmptyPhraseError(StepflowError):
    """Similarity was asked to score an empty phrase."""


class RegistryError(StepflowError):
    """Command registry construction or mutation rejected."""


class NonMonotonicStreamError(StepflowError):
    """Audio frames arrived with a non-increasing timestamp."""


class MissingSlotError(StepflowError):
    """A prompt template was rendered without a required slot."""

    def __init__(self, template_id: str, slot: str) -> None:
        super().__init__(f"{slot} unbound for template {template_id}")
        self.template_id = template_id
        self.slot = slot


class ProviderUnavailableError(StepflowError):
    """Transport to a provider failed after retries."""


class MalformedModelOutputError(StepflowError):
    """Model output failed schema parsing twice; carries the raw text."""

    def __init__(self, message: str, raw_text: str = "") -> None:
        super().__init__(message)
        self.raw_text = raw_text


class EmptySegmentError(StepflowError):
    """Transcription was requested for an empty audio segment."""


class NoActiveQuestionError(StepflowError):
    """An answer/skip arrived but no turn is pending."""


class BoundaryError(StepflowError):
    """Navigation past the ends of the conversation graph."""


class UnknownTurnError(StepflowError):
    """A turn id does not exist in the graph."""


class NothingToComposeError(StepflowError):
    """finish() called with zero answered turns."""


class IllegalPhaseTransitionError(StepflowError):
    """Phase ledger asked to make a transition the timing rules do not define."""


class UnknownSessionError(StepflowError):
    """resume_session() for a UUID with no persisted document."""


class NothingToReplayError(StepflowError):
    """Playback replay requested before any TTS playback happened."""
