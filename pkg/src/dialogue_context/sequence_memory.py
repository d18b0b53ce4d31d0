"""Dialogue sequence memory.

Mirrors the chronological order of turns and utterances.  Each analysis
track (deep, shallow, ...) keeps its own segmentation of a turn, so the same
turn may hold four deep utterances and two shallow ones.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence

from .base import DialoguePhase, Prediction, SequenceMemoryError

DEFAULT_TRACKS = ("deep", "shallow")


@dataclass
class UtteranceRecord:
    act: str
    track: str
    turn_index: int
    utterance_index: int
    phase: Optional[DialoguePhase] = None
    # ranked guesses for the following utterance, one list per hypothesized next speaker
    predictions: Optional[list[Prediction]] = None
    change_predictions: Optional[list[Prediction]] = None


@dataclass
class TurnRecord:
    index: int
    speaker: str
    language: str
    utterances: dict[str, list[UtteranceRecord]]
    selected_track: Optional[str] = None
    translated_count: int = 0
    closed: bool = False


class Reading(NamedTuple):
    reading: str
    low_confidence: bool


class SequenceMemory:
    def __init__(self, tracks: Sequence[str] = DEFAULT_TRACKS):
        if len(set(tracks)) != len(tracks):
            raise ValueError("track names must be unique")
        self.tracks: list[str] = list(tracks)
        self.turns: list[TurnRecord] = []

    # -- mutation -------------------------------------------------------------

    def register_track(self, name: str):
        if name in self.tracks:
            raise SequenceMemoryError(f"track {name!r} already registered")
        self.tracks.append(name)
        for turn in self.turns:
            turn.utterances[name] = []

    @property
    def open_turn(self) -> Optional[TurnRecord]:
        if self.turns and not self.turns[-1].closed:
            return self.turns[-1]
        return None

    def begin_turn(self, speaker: str, language: str = "") -> int:
        if self.open_turn is not None:
            raise SequenceMemoryError(f"turn {self.open_turn.index} is still open")
        index = len(self.turns)
        self.turns.append(TurnRecord(index, speaker, language, {t: [] for t in self.tracks}))
        return index

    def _check_track(self, track: str):
        if track not in self.tracks:
            raise SequenceMemoryError(f"unknown analysis track {track!r}")

    def add_utterance(self, track: str, act: str) -> UtteranceRecord:
        turn = self.open_turn
        if turn is None:
            raise SequenceMemoryError("no open turn")
        self._check_track(track)
        records = turn.utterances[track]
        record = UtteranceRecord(act, track, turn.index, len(records))
        records.append(record)
        return record

    def close_turn(self, selected_track: str, translated_count: int) -> TurnRecord:
        turn = self.open_turn
        if turn is None:
            raise SequenceMemoryError("no open turn")
        self._check_track(selected_track)
        available = len(turn.utterances[selected_track])
        if not 0 <= translated_count <= available:
            raise SequenceMemoryError(
                f"translated_count {translated_count} exceeds the {available} utterances on track {selected_track!r}"
            )
        turn.selected_track = selected_track
        turn.translated_count = translated_count
        turn.closed = True
        return turn

    def annotate(self, turn_index: int, utterance_index: int, track: str, phase=None, predictions=None,
                 change_predictions=None) -> UtteranceRecord:
        record = self.record(turn_index, utterance_index, track)
        if phase is not None:
            record.phase = DialoguePhase(phase)
        if predictions is not None:
            record.predictions = sorted(predictions, key=lambda p: -p.probability)
        if change_predictions is not None:
            record.change_predictions = sorted(change_predictions, key=lambda p: -p.probability)
        return record

    # -- queries --------------------------------------------------------------

    def record(self, turn_index: int, utterance_index: int, track: str) -> UtteranceRecord:
        self._check_track(track)
        if not 0 <= turn_index < len(self.turns):
            raise SequenceMemoryError(f"no turn {turn_index}")
        records = self.turns[turn_index].utterances[track]
        if not 0 <= utterance_index < len(records):
            raise SequenceMemoryError(
                f"turn {turn_index} has {len(records)} utterances on track {track!r}, no index {utterance_index}"
            )
        return records[utterance_index]

    def records(self, track: str):
        """All records of a track with their turn speaker, oldest first."""
        self._check_track(track)
        for turn in self.turns:
            for record in turn.utterances[track]:
                yield record, turn.speaker

    def last_acts(self, track: str, n: int) -> list[tuple[str, str]]:
        """The ``n`` most recent ``(act, speaker)`` pairs on ``track``, oldest first."""
        if n < 1:
            raise ValueError("n must be positive")
        self._check_track(track)
        out = []
        for turn in reversed(self.turns):
            for record in reversed(turn.utterances[track]):
                out.append((record.act, turn.speaker))
                if len(out) == n:
                    return out[::-1]
        return out[::-1]

    def disambiguate_reading(self, track: str, candidates, window: int = 1) -> Reading:
        """Choose between readings by the preceding dialogue act(s).

        ``candidates`` is a list of ``(reading, required_acts)``; the first
        candidate whose required set contains one of the last ``window`` acts
        wins.  A candidate with an empty set is the default.
        """
        candidates = [(reading, frozenset(required)) for reading, required in candidates]
        if not candidates:
            raise ValueError("no candidate readings")
        defaults = [reading for reading, required in candidates if not required]
        if len(defaults) > 1:
            raise ValueError("at most one candidate may be the default (empty required set)")
        recent = {act for act, _ in self.last_acts(track, window)}
        for reading, required in candidates:
            if required & recent:
                return Reading(reading, False)
        if defaults:
            return Reading(defaults[0], not recent)
        return Reading(candidates[0][0], True)

    # -- export ---------------------------------------------------------------

    def snapshot(self, top_k: int = 3) -> str:
        """One line per utterance record, probabilities printed times 1000."""

        def preds(ps):
            if ps is None:
                return "-"
            return ",".join(f"{p.act}:{p.permille}" for p in ps[:top_k]) or "-"

        lines = []
        for turn in self.turns:
            for track in self.tracks:
                for r in turn.utterances[track]:
                    phase = r.phase.value if r.phase else "-"
                    lines.append(
                        f"{turn.index}\t{turn.speaker}\t{track}\t{r.utterance_index}\t{r.act}\t{phase}"
                        f"\tsame={preds(r.predictions)}\tchange={preds(r.change_predictions)}"
                    )
        return "\n".join(lines)
