"""Shared enums, small value types and exceptions."""

from __future__ import annotations

import enum
from dataclasses import dataclass


class DialoguePhase(str, enum.Enum):
    OPENING = "opening"
    NEGOTIATION = "negotiation"
    CLOSING = "closing"

    @property
    def rank(self) -> int:
        return _PHASE_ORDER.index(self)


_PHASE_ORDER = [DialoguePhase.OPENING, DialoguePhase.NEGOTIATION, DialoguePhase.CLOSING]


class DirectionTag(str, enum.Enum):
    """Speaker direction of the transition into an utterance."""

    SAME_SPEAKER = "same_speaker"
    SPEAKER_CHANGE = "speaker_change"
    DIALOGUE_START = "dialogue_start"


@dataclass(frozen=True)
class Prediction:
    act: str
    probability: float

    @property
    def permille(self) -> int:
        """Probability times 1000, rounded, as shown in human-readable dumps."""
        return int(round(self.probability * 1000))


class DialogueContextError(Exception):
    """Base class for errors raised by this package."""


class CorpusError(DialogueContextError, ValueError):
    def __init__(self, message, dialogue_id=None, turn_index=None):
        where = []
        if dialogue_id is not None:
            where.append(f"dialogue {dialogue_id!r}")
        if turn_index is not None:
            where.append(f"turn {turn_index}")
        if where:
            message = f"{', '.join(where)}: {message}"
        super().__init__(message)
        self.dialogue_id = dialogue_id
        self.turn_index = turn_index


class InventoryError(CorpusError):
    """An act label outside the configured inventory."""


class SequenceMemoryError(DialogueContextError, RuntimeError):
    """Sequence memory contract violation (open/closed turn, unknown track, ...)."""


class ClarificationError(DialogueContextError, RuntimeError):
    pass


class StageError(DialogueContextError):
    """An engine stage failure, tagged with the stage that raised it."""

    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"[{stage}] {cause}")
        self.stage = stage
        self.cause = cause
