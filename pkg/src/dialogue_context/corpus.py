"""Annotated dialogue corpus: data model, JSON reader/writer, splitting."""

from __future__ import annotations

import datetime as dt
import json
import os
import random
import re
from dataclasses import dataclass, field
from typing import Optional, Union

from .base import CorpusError, InventoryError
from .thematic import TimeExpression, time_expression_from_json, time_expression_to_json

#: acts observable in the example scheduling dialogue, plus ``bye`` for closings
DEFAULT_INVENTORY = frozenset(
    {
        "greet",
        "introduce_name",
        "init_date",
        "suggest_support_date",
        "request_comment_date",
        "uptake",
        "reject_date",
        "accept_date",
        "feedback_acknowledgement",
        "bye",
    }
)

_SPEAKING_TIME_RE = re.compile(r"^\d{4}-\d{2}-\d{2}(T\d{2}:\d{2})?$")

SpeakingTime = Union[dt.date, dt.datetime]


@dataclass(frozen=True)
class Utterance:
    act: str
    index: int
    times: tuple[TimeExpression, ...] = ()
    text: Optional[str] = None


@dataclass(frozen=True)
class Turn:
    speaker: str
    language: str
    utterances: tuple[Utterance, ...]

    @property
    def acts(self) -> list[str]:
        return [u.act for u in self.utterances]


@dataclass(frozen=True)
class Dialogue:
    id: str
    speaking_time: SpeakingTime
    participants: tuple[str, str]
    turns: tuple[Turn, ...]

    def events(self) -> list[tuple[str, str]]:
        """Flattened ``(act, speaker)`` sequence over all utterances."""
        return [(u.act, t.speaker) for t in self.turns for u in t.utterances]

    @property
    def n_utterances(self) -> int:
        return sum(len(t.utterances) for t in self.turns)


@dataclass(frozen=True)
class Corpus:
    dialogues: tuple[Dialogue, ...] = ()
    act_inventory: frozenset = field(default=DEFAULT_INVENTORY)

    def __len__(self):
        return len(self.dialogues)

    @property
    def n_utterances(self) -> int:
        return sum(d.n_utterances for d in self.dialogues)


def parse_speaking_time(value: str) -> SpeakingTime:
    if not isinstance(value, str) or not _SPEAKING_TIME_RE.match(value):
        raise ValueError(f"speaking_time must look like YYYY-MM-DD[THH:MM], got {value!r}")
    try:
        if "T" in value:
            return dt.datetime.fromisoformat(value)
        return dt.date.fromisoformat(value)
    except ValueError as exc:
        raise ValueError(f"speaking_time {value!r} is not a valid date: {exc}") from None


def format_speaking_time(value: SpeakingTime) -> str:
    if isinstance(value, dt.datetime):
        return value.strftime("%Y-%m-%dT%H:%M")
    return value.isoformat()


def _turn_from_dict(obj, participants, inventory, dialogue_id, turn_index) -> Turn:
    if not isinstance(obj, dict):
        raise CorpusError("turn must be an object", dialogue_id, turn_index)
    speaker = obj.get("speaker")
    if speaker not in participants:
        raise CorpusError(f"speaker {speaker!r} is not a participant {list(participants)}", dialogue_id, turn_index)
    raw = obj.get("utterances")
    if not isinstance(raw, list) or not raw:
        raise CorpusError("turn needs a non-empty 'utterances' list", dialogue_id, turn_index)
    utterances = []
    for i, u in enumerate(raw):
        if not isinstance(u, dict) or not isinstance(u.get("act"), str) or not u["act"]:
            raise CorpusError(f"utterance {i} needs an 'act' string", dialogue_id, turn_index)
        if u["act"] not in inventory:
            raise InventoryError(f"act {u['act']!r} is not in the act inventory", dialogue_id, turn_index)
        try:
            times = tuple(time_expression_from_json(t) for t in u.get("times") or [])
        except (ValueError, TypeError, KeyError) as exc:
            raise CorpusError(f"utterance {i}: bad time expression: {exc}", dialogue_id, turn_index) from None
        utterances.append(Utterance(u["act"], i, times, u.get("text")))
    return Turn(speaker, str(obj.get("language", "")), tuple(utterances))


def corpus_from_dict(data: dict) -> Corpus:
    """Build and validate a :class:`Corpus` from its decoded JSON form."""
    if not isinstance(data, dict):
        raise CorpusError("corpus file must hold a JSON object")
    inventory = data.get("act_inventory")
    inventory = frozenset(inventory) if inventory is not None else DEFAULT_INVENTORY
    if not inventory or not all(isinstance(a, str) and a for a in inventory):
        raise CorpusError("act_inventory must be a non-empty list of non-empty strings")

    dialogues = []
    for n, d in enumerate(data.get("dialogues", [])):
        if not isinstance(d, dict):
            raise CorpusError(f"dialogue #{n} must be an object")
        dialogue_id = str(d.get("id", n))
        try:
            speaking_time = parse_speaking_time(d.get("speaking_time"))
        except ValueError as exc:
            raise CorpusError(str(exc), dialogue_id) from None
        participants = d.get("participants", ["A", "B"])
        if not isinstance(participants, list) or len(participants) != 2 or participants[0] == participants[1]:
            raise CorpusError("participants must name exactly two distinct ids", dialogue_id)
        raw_turns = d.get("turns")
        if not isinstance(raw_turns, list) or not raw_turns:
            raise CorpusError("dialogue needs a non-empty 'turns' list", dialogue_id)
        turns = tuple(
            _turn_from_dict(t, participants, inventory, dialogue_id, i) for i, t in enumerate(raw_turns)
        )
        dialogues.append(Dialogue(dialogue_id, speaking_time, tuple(participants), turns))
    return Corpus(tuple(dialogues), inventory)


def parse_corpus(path: Union[str, os.PathLike]) -> Corpus:
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise CorpusError(f"{os.fspath(path)}: not valid JSON ({exc})") from None
    return corpus_from_dict(data)


def corpus_to_dict(corpus: Corpus) -> dict:
    def utt(u: Utterance):
        out = {"act": u.act, "times": [time_expression_to_json(t) for t in u.times]}
        if u.text is not None:
            out["text"] = u.text
        return out

    return {
        "act_inventory": sorted(corpus.act_inventory),
        "dialogues": [
            {
                "id": d.id,
                "speaking_time": format_speaking_time(d.speaking_time),
                "participants": list(d.participants),
                "turns": [
                    {"speaker": t.speaker, "language": t.language, "utterances": [utt(u) for u in t.utterances]}
                    for t in d.turns
                ],
            }
            for d in corpus.dialogues
        ],
    }


def write_corpus(corpus: Corpus, path: Union[str, os.PathLike]):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(corpus_to_dict(corpus), fh, ensure_ascii=False, indent=1)
        fh.write("\n")


def split_corpus(corpus: Corpus, held_out_fraction: float, seed: int) -> tuple[Corpus, Corpus]:
    """Partition whole dialogues into (remaining, held-out) parts.

    The held-out size is ``round(n * fraction)`` clamped so both parts are
    non-empty; original dialogue order is kept within each part.
    """
    if not 0.0 < held_out_fraction < 1.0:
        raise ValueError(f"held_out_fraction must be in (0, 1), got {held_out_fraction}")
    n = len(corpus.dialogues)
    if n < 2:
        raise ValueError(f"need at least 2 dialogues to split, got {n}")
    n_held = min(max(round(n * held_out_fraction), 1), n - 1)
    held = set(random.Random(seed).sample(range(n), n_held))
    keep = tuple(d for i, d in enumerate(corpus.dialogues) if i not in held)
    out = tuple(d for i, d in enumerate(corpus.dialogues) if i in held)
    return Corpus(keep, corpus.act_inventory), Corpus(out, corpus.act_inventory)
