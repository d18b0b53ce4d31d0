"""Clarification sub-dialogues with the user.

A small automaton: the system proposes one correction and waits for the
user to accept (the proposal is used) or reject it (the user repeats the
turn).  Triggers are implausible dates and tokens the recognizer is likely
to confuse.
"""

from __future__ import annotations

import calendar
import json
import os
from collections import deque
from dataclasses import dataclass, replace
from typing import Optional, Sequence, Union

from .base import ClarificationError
from .thematic import TimeDescription, check_plausibility, weeks_in_year
from .validation import check_threshold

# -- triggers -----------------------------------------------------------------


@dataclass(frozen=True)
class ConfusablePair:
    a: str
    b: str
    similarity: float

    def __post_init__(self):
        if self.a == self.b:
            raise ValueError(f"confusable pair needs two different tokens, got {self.a!r} twice")
        if not 0.0 < self.similarity <= 1.0:
            raise ValueError(f"similarity must be in (0, 1], got {self.similarity}")

    @property
    def key(self) -> frozenset:
        return frozenset((self.a, self.b))


@dataclass(frozen=True)
class ImplausibleDate:
    desc: TimeDescription
    reason: str


@dataclass(frozen=True)
class ConfusableTokens:
    position: int
    token: str
    pair: ConfusablePair


Trigger = Union[ImplausibleDate, ConfusableTokens]

# -- states -------------------------------------------------------------------


@dataclass(frozen=True)
class Idle:
    name = "idle"


@dataclass(frozen=True)
class AwaitingConfirmation:
    trigger: Trigger
    proposal: object  # TimeDescription for dates, the token for confusables
    name = "awaiting_confirmation"


@dataclass(frozen=True)
class Resolved:
    value: object
    trigger: Optional[Trigger] = None
    name = "resolved"


@dataclass(frozen=True)
class RepeatRequested:
    trigger: Optional[Trigger] = None
    name = "repeat_requested"


State = Union[Idle, AwaitingConfirmation, Resolved, RepeatRequested]

ACCEPT, REJECT = "accept", "reject"


def correct_date(desc: TimeDescription, reference_year: int) -> Optional[TimeDescription]:
    """Single-edit correction of an implausible description, or None if one edit is not enough."""
    verdict = check_plausibility(desc, reference_year)
    if verdict.plausible:
        raise ValueError(f"{desc} is already plausible")
    year = desc.year if desc.year is not None else reference_year
    proposal = None
    if verdict.level == "day":
        last = calendar.monthrange(year, desc.month)[1] if desc.month is not None and 1 <= desc.month <= 12 else 31
        if desc.day is not None and desc.day > last:
            proposal = replace(desc, day=last)
        elif desc.from_to is not None and desc.from_to.lo <= last < desc.from_to.hi:
            proposal = replace(desc, from_to=replace(desc.from_to, hi=last))
    elif verdict.level == "day_of_week":
        proposal = replace(desc, dow=None)
    elif verdict.level == "week":
        last = weeks_in_year(year)
        if desc.week is not None and desc.week > last:
            proposal = replace(desc, week=last)
        elif desc.from_to is not None and desc.from_to.lo <= last < desc.from_to.hi:
            proposal = replace(desc, from_to=replace(desc.from_to, hi=last))
    elif verdict.level == "period_of_day":
        proposal = replace(desc, period=None)
    if proposal is None or proposal.is_empty or not check_plausibility(proposal, reference_year):
        return None
    return proposal


class ClarificationFSA:
    """One clarification at a time; further triggers wait in FIFO order."""

    def __init__(self):
        self.state: State = Idle()
        self.pending: deque = deque()

    @property
    def busy(self) -> bool:
        return not isinstance(self.state, Idle)

    def raise_trigger(self, trigger: Trigger, proposal=None, *, reference_year: Optional[int] = None) -> State:
        """Start (or queue) a clarification for ``trigger``.

        Date triggers derive their proposal by single-edit correction; an
        unfixable date moves straight to :class:`RepeatRequested`.
        """
        if proposal is None:
            if isinstance(trigger, ImplausibleDate):
                if reference_year is None:
                    raise ValueError("date triggers need a reference year")
                proposal = correct_date(trigger.desc, reference_year)
            else:
                proposal = trigger.token
        if self.busy:
            self.pending.append((trigger, proposal))
            return self.state
        return self._start(trigger, proposal)

    def _start(self, trigger, proposal) -> State:
        if proposal is None:
            self.state = RepeatRequested(trigger)
        else:
            self.state = AwaitingConfirmation(trigger, proposal)
        return self.state

    def step(self, response: str) -> State:
        if not isinstance(self.state, AwaitingConfirmation):
            raise ClarificationError(f"no proposal awaits confirmation (state: {self.state.name})")
        if response == ACCEPT:
            self.state = Resolved(self.state.proposal, self.state.trigger)
        elif response == REJECT:
            self.state = RepeatRequested(self.state.trigger)
        else:
            raise ClarificationError(f"response must be {ACCEPT!r} or {REJECT!r}, got {response!r}")
        return self.state

    def reset(self) -> State:
        """Leave a terminal state; the next queued trigger, if any, becomes active."""
        if isinstance(self.state, AwaitingConfirmation):
            raise ClarificationError("cannot reset while a proposal awaits confirmation")
        self.state = Idle()
        if self.pending:
            return self._start(*self.pending.popleft())
        return self.state


def propose_correction(desc: TimeDescription, reference_year: int,
                       fsa: Optional[ClarificationFSA] = None) -> tuple[Optional[TimeDescription], ClarificationFSA]:
    """Propose a plausible date for ``desc`` and leave the automaton waiting for an answer."""
    verdict = check_plausibility(desc, reference_year)
    if verdict.plausible:
        raise ValueError(f"{desc} is plausible, nothing to clarify")
    fsa = fsa or ClarificationFSA()
    proposal = correct_date(desc, reference_year)
    fsa.raise_trigger(ImplausibleDate(desc, verdict.reason), proposal)
    return proposal, fsa


def prompt(proposal) -> str:
    return f"CLARIFY: did you mean {proposal}? [y/n]"


# -- confusable tokens --------------------------------------------------------


def edit_similarity(a: str, b: str) -> float:
    """1 minus the Levenshtein distance normalized by the longer length."""
    if not a and not b:
        return 1.0
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        cur = [i]
        for j, cb in enumerate(b, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return 1.0 - prev[-1] / max(len(a), len(b))


def load_lexicon(path: Union[str, os.PathLike]) -> list[ConfusablePair]:
    """Read ``[{a, b, similarity}]``; a missing similarity is filled from edit distance."""
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, list):
        raise ValueError("lexicon file must hold a JSON list")
    pairs, seen = [], set()
    for entry in data:
        a, b = entry["a"], entry["b"]
        similarity = entry.get("similarity")
        if similarity is None:
            similarity = edit_similarity(a, b)
        pair = ConfusablePair(a, b, float(similarity))
        if pair.key in seen:
            raise ValueError(f"pair {a!r}/{b!r} listed twice")
        seen.add(pair.key)
        pairs.append(pair)
    return pairs


def detect_confusables(tokens: Sequence[str], lexicon: Sequence[ConfusablePair],
                       threshold: float) -> list[tuple[int, ConfusablePair]]:
    """Flag tokens belonging to a sufficiently similar confusable pair.

    At most one flag per position: the most similar pair, first listed on ties.
    """
    threshold = check_threshold(threshold)
    flags = []
    for position, token in enumerate(tokens):
        folded = token.casefold()
        hits = [p for p in lexicon if p.similarity >= threshold and folded in (p.a.casefold(), p.b.casefold())]
        if hits:
            flags.append((position, max(hits, key=lambda p: p.similarity)))
    return flags
