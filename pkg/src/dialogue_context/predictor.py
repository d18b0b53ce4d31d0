"""Dialogue-act prediction from interpolated conditional frequencies.

Histories are sequences of ``(act, direction)`` pairs where the direction tag
on an item describes the transition *out of* it, i.e. whether the speaker of
the following utterance is the same or a different participant.  Predictions
for both possible next speakers are obtained by querying twice with different
tags on the last history item.

Orders ``i = 1..max_order`` contribute the relative frequency of the next act
given the last ``i - 1`` history items, weighted by ``lambdas[i - 1]``:

    P(a | h) = sum_i lambda_i * f_i(a | h[-(i-1):]) / sum_i lambda_i

where both sums run over the orders whose context has been observed.  The
unigram frequency adds one to every act's count so no act is ever impossible.
"""

from __future__ import annotations

import itertools
import json
import logging
import os
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, Union

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .base import DirectionTag, InventoryError, Prediction
from .corpus import Corpus, Dialogue, split_corpus
from .validation import check_acts, check_fraction, check_history, check_positive_int

log = logging.getLogger(__name__)

History = tuple[tuple[str, DirectionTag], ...]

MODEL_FORMAT = "dialogue-act-ngram"
MODEL_VERSION = 1
MIN_HELD_OUT_EVENTS = 50


def direction_tags(speakers: Sequence[str]) -> list[DirectionTag]:
    """Direction of the transition into each position of a speaker sequence."""
    tags = []
    for i, speaker in enumerate(speakers):
        if i == 0:
            tags.append(DirectionTag.DIALOGUE_START)
        elif speaker == speakers[i - 1]:
            tags.append(DirectionTag.SAME_SPEAKER)
        else:
            tags.append(DirectionTag.SPEAKER_CHANGE)
    return tags


def tagged_history(events: Sequence[tuple[str, str]], next_speaker: Optional[str] = None) -> History:
    """Tag a run of ``(act, speaker)`` events for use as a prediction history.

    The last item is tagged against ``next_speaker``; without one it is tagged
    as a speaker change.
    """
    out = []
    for i, (act, speaker) in enumerate(events):
        if i + 1 < len(events):
            following = events[i + 1][1]
        else:
            following = next_speaker
        same = following is not None and following == speaker
        out.append((act, DirectionTag.SAME_SPEAKER if same else DirectionTag.SPEAKER_CHANGE))
    return tuple(out)


def dialogue_events(dialogue: Dialogue, max_order: int):
    """Yield ``(history, act)`` for every utterance, history truncated to ``max_order - 1``."""
    events = dialogue.events()
    acts = [a for a, _ in events]
    tags = direction_tags([s for _, s in events])
    for j, act in enumerate(acts):
        start = max(0, j - (max_order - 1))
        yield tuple((acts[i], tags[i + 1]) for i in range(start, j)), act


def fallback_lambdas(max_order: int) -> tuple[float, ...]:
    """Weights proportional to triangular numbers: (0.1, 0.3, 0.6) for order 3."""
    raw = [i * (i + 1) / 2 for i in range(1, max_order + 1)]
    total = sum(raw)
    return tuple(r / total for r in raw)


@dataclass
class NGramModel:
    max_order: int
    lambdas: tuple[float, ...]
    inventory: tuple[str, ...]
    counts: dict = field(default_factory=dict)  # context history -> Counter of next acts

    def __post_init__(self):
        self.inventory = tuple(sorted(set(self.inventory)))
        self.lambdas = tuple(float(x) for x in self.lambdas)
        if len(self.lambdas) != self.max_order:
            raise ValueError(f"need {self.max_order} lambdas, got {len(self.lambdas)}")
        if any(x < 0 for x in self.lambdas) or abs(sum(self.lambdas) - 1.0) > 1e-9:
            raise ValueError(f"lambdas must be non-negative and sum to 1, got {self.lambdas}")
        self._inventory_set = frozenset(self.inventory)

    def add_event(self, history: History, act: str, count: int = 1):
        """Count ``act`` after every suffix of ``history`` up to ``max_order - 1`` items."""
        if act not in self._inventory_set:
            raise InventoryError(f"act {act!r} is not in the act inventory")
        history = tuple(history)
        for n in range(0, min(len(history), self.max_order - 1) + 1):
            context = history[len(history) - n:]
            self.counts.setdefault(context, Counter())[act] += count

    def unigram(self) -> dict[str, float]:
        c = self.counts.get((), Counter())
        total = sum(c.values()) + len(self.inventory)
        return {a: (c[a] + 1) / total for a in self.inventory}

    def distribution(self, history: History) -> dict[str, float]:
        history = tuple(history)[-(self.max_order - 1):] if self.max_order > 1 else ()
        parts = [(self.lambdas[0], self.unigram())]
        for order in range(2, self.max_order + 1):
            if len(history) < order - 1:
                break
            c = self.counts.get(history[len(history) - (order - 1):])
            if not c:
                continue
            total = sum(c.values())
            parts.append((self.lambdas[order - 1], {a: n / total for a, n in c.items()}))
        weight = sum(w for w, _ in parts)
        if weight == 0.0:
            parts = [(1.0, f) for _, f in parts]
            weight = float(len(parts))
        return {a: sum(w * f.get(a, 0.0) for w, f in parts) / weight for a in self.inventory}

    def probability(self, history, act: str) -> float:
        history = check_history(history, self._inventory_set)
        if act not in self._inventory_set:
            raise InventoryError(f"act {act!r} is not in the act inventory")
        return self.distribution(history)[act]

    def rank(self, history, k: Optional[int] = None) -> list[Prediction]:
        history = check_history(history, self._inventory_set)
        dist = self.distribution(history)
        ranked = sorted(dist.items(), key=lambda kv: (-kv[1], kv[0]))
        if k is not None:
            ranked = ranked[:k]
        return [Prediction(a, p) for a, p in ranked]

    # -- serialization ----------------------------------------------------------

    def to_json(self) -> dict:
        rows = []
        for context, counter in self.counts.items():
            for act, n in counter.items():
                rows.append([[[a, t.value] for a, t in context], act, n])
        rows.sort(key=lambda r: (len(r[0]), json.dumps(r[0]), r[1]))
        return {
            "format": MODEL_FORMAT,
            "version": MODEL_VERSION,
            "max_order": self.max_order,
            "lambdas": list(self.lambdas),
            "inventory": list(self.inventory),
            "counts": rows,
        }

    @classmethod
    def from_json(cls, data: dict) -> "NGramModel":
        if data.get("format") != MODEL_FORMAT or data.get("version") != MODEL_VERSION:
            raise ValueError(f"not a version {MODEL_VERSION} {MODEL_FORMAT} model file")
        model = cls(int(data["max_order"]), tuple(data["lambdas"]), tuple(data["inventory"]))
        for context, act, n in data["counts"]:
            key = tuple((a, DirectionTag(t)) for a, t in context)
            if act not in model._inventory_set or any(a not in model._inventory_set for a, _ in key):
                raise InventoryError(f"model counts mention an act outside the inventory: {act!r}")
            model.counts.setdefault(key, Counter())[act] = int(n)
        return model


def save_model(model: NGramModel, path: Union[str, os.PathLike]):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model.to_json(), fh, indent=1)
        fh.write("\n")


def load_model(path: Union[str, os.PathLike]) -> NGramModel:
    with open(path, encoding="utf-8") as fh:
        return NGramModel.from_json(json.load(fh))


# ---------------------------------------------------------------------------
# training


def count_events(corpus: Corpus, max_order: int, lambdas=None) -> NGramModel:
    model = NGramModel(max_order, lambdas or fallback_lambdas(max_order), tuple(corpus.act_inventory))
    for dialogue in corpus.dialogues:
        for history, act in dialogue_events(dialogue, max_order):
            model.add_event(history, act)
    return model


def _relative_frequencies(model: NGramModel, history: History, act: str) -> list[Optional[float]]:
    """Per-order relative frequency of ``act``; ``None`` where the context is unseen."""
    out: list[Optional[float]] = [model.unigram()[act]]
    for order in range(2, model.max_order + 1):
        if len(history) < order - 1:
            out.append(None)
            continue
        c = model.counts.get(history[len(history) - (order - 1):])
        out.append(c[act] / sum(c.values()) if c else None)
    return out


def estimate_lambdas(corpus: Corpus, max_order: int, held_out_fraction: float = 0.1,
                     seed: int = 0) -> tuple[tuple[float, ...], int]:
    """Deleted-interpolation weights from a held-out split of ``corpus``.

    Every held-out event gives its unit weight to the order whose relative
    frequency (estimated on the remaining dialogues) predicts it best; ties
    share the weight.  Returns ``(lambdas, n_held_out_events)``; with fewer
    than ``MIN_HELD_OUT_EVENTS`` events the fixed fallback weights are used.
    """
    if max_order == 1:
        return (1.0,), 0
    if len(corpus.dialogues) < 2:
        return fallback_lambdas(max_order), 0
    rest, held = split_corpus(corpus, held_out_fraction, seed)
    events = [e for d in held.dialogues for e in dialogue_events(d, max_order)]
    if len(events) < MIN_HELD_OUT_EVENTS:
        return fallback_lambdas(max_order), len(events)
    model = count_events(rest, max_order)
    tally = [0.0] * max_order
    for history, act in events:
        freqs = _relative_frequencies(model, history, act)
        best = max(f for f in freqs if f is not None)
        winners = [i for i, f in enumerate(freqs) if f is not None and f == best]
        for i in winners:
            tally[i] += 1.0 / len(winners)
    total = sum(tally)
    return tuple(t / total for t in tally), len(events)


def train(corpus: Corpus, max_order: int = 3, held_out_fraction: float = 0.1, seed: int = 0,
          lambdas: Optional[Sequence[float]] = None) -> NGramModel:
    """Count direction-tagged act n-grams over ``corpus`` and fit interpolation weights.

    Passing ``lambdas`` skips estimation and fixes the weights.
    """
    check_positive_int(max_order, "max_order")
    if not corpus.dialogues:
        raise ValueError("cannot train on an empty corpus")
    if lambdas is None:
        lambdas, n_events = estimate_lambdas(corpus, max_order, held_out_fraction, seed)
        log.debug("estimated lambdas %s from %d held-out events", lambdas, n_events)
    return count_events(corpus, max_order, tuple(lambdas))


# ---------------------------------------------------------------------------
# queries


def predict(model: NGramModel, history, k: int) -> list[Prediction]:
    check_positive_int(k, "k")
    return model.rank(history, k)


def probability(model: NGramModel, history, act: str) -> float:
    return model.probability(history, act)


def evaluate_topn(model: NGramModel, corpus: Corpus, n: int) -> float:
    """Fraction of utterances whose annotated act is among the top ``n`` predictions."""
    check_positive_int(n, "n")
    if not corpus.dialogues:
        raise ValueError("cannot evaluate on an empty corpus")
    hits = total = 0
    for dialogue in corpus.dialogues:
        for history, act in dialogue_events(dialogue, model.max_order):
            check_acts([act], model.inventory)
            top = model.rank(history, n)
            hits += any(p.act == act for p in top)
            total += 1
    return hits / total


def estimate_gap(model: NGramModel, left_context, right_context, gap_length: int,
                 direction: DirectionTag = DirectionTag.SAME_SPEAKER) -> list[tuple[tuple[str, ...], float]]:
    """Rank every act sequence of ``gap_length`` as a filler between two contexts.

    A filler scores the product of its acts' probabilities given the left
    context (and the filler so far) times the probability of the first
    right-context act after it.  Filler items are tagged with ``direction``;
    the caller tags the last left item.
    """
    if not 1 <= gap_length <= 3:
        raise ValueError(f"gap_length must be in 1..3, got {gap_length}")
    left = check_history(left_context, model.inventory)
    right = check_history(right_context, model.inventory)
    direction = DirectionTag(direction)
    scored = []
    for filler in itertools.product(model.inventory, repeat=gap_length):
        history = left
        score = 1.0
        for act in filler:
            score *= model.distribution(history)[act]
            history = history + ((act, direction),)
        if right:
            score *= model.distribution(history)[right[0][0]]
        scored.append((filler, score))
    scored.sort(key=lambda fs: (-fs[1], fs[0]))
    return scored


# ---------------------------------------------------------------------------
# estimator facade


class NGramPredictor(BaseEstimator):
    """Estimator wrapper: ``fit`` on a :class:`Corpus`, predict from histories.

    Parameters
    ----------
    max_order : int
        Longest n-gram (history length ``max_order - 1``).
    held_out_fraction : float
        Share of dialogues held out to estimate interpolation weights.
    seed : int
        Seed of the held-out split.
    lambdas : sequence of float, optional
        Fixed interpolation weights; skips estimation.
    """

    def __init__(self, max_order=3, held_out_fraction=0.1, seed=0, lambdas=None):
        self.max_order = max_order
        self.held_out_fraction = held_out_fraction
        self.seed = seed
        self.lambdas = lambdas

    def fit(self, X: Corpus, y=None):
        check_positive_int(self.max_order, "max_order")
        check_fraction(self.held_out_fraction, "held_out_fraction")
        self.model_ = train(X, self.max_order, self.held_out_fraction, self.seed, self.lambdas)
        self.classes_ = np.array(self.model_.inventory)
        return self

    @classmethod
    def from_model(cls, model: NGramModel) -> "NGramPredictor":
        est = cls(max_order=model.max_order, lambdas=model.lambdas)
        est.model_ = model
        est.classes_ = np.array(model.inventory)
        return est

    def predict_proba(self, histories: Iterable) -> np.ndarray:
        check_is_fitted(self, "model_")
        rows = []
        for h in histories:
            dist = self.model_.distribution(check_history(h, self.model_.inventory))
            rows.append([dist[a] for a in self.model_.inventory])
        return np.array(rows, dtype=float).reshape(-1, len(self.classes_))

    def predict(self, histories: Iterable) -> np.ndarray:
        check_is_fitted(self, "model_")
        return np.array([self.model_.rank(h, 1)[0].act for h in histories])

    def top_k(self, history, k: int = 3) -> list[Prediction]:
        check_is_fitted(self, "model_")
        return predict(self.model_, history, k)

    def score(self, X: Corpus, y=None, n: int = 3) -> float:
        check_is_fitted(self, "model_")
        return evaluate_topn(self.model_, X, n)
