"""Plan-based recognition of the intentional structure and dialogue phase.

Turn-level operators rewrite runs of dialogue acts; turns are covered greedily
left to right by the longest matching operator body.  Whatever no operator
covers is wrapped in a repair node so that a structure is always produced.
Turn subtrees are then linked under phase nodes (opening, negotiation,
closing) below a single dialogue root.
"""

from __future__ import annotations

import json
import os
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, Union

from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .base import DialoguePhase
from .corpus import Corpus
from .predictor import NGramModel, estimate_gap, tagged_history
from .validation import check_positive_int

OPERATOR_LEVELS = ("turn", "phase", "dialogue")
OPERATOR_KINDS = ("hand_coded", "learned", "repair")
MAX_GAP = 3

# acts that vote for a phase when no tagged operator covers them
OPENING_ACTS = frozenset({"greet", "introduce_name"})
CLOSING_ACTS = frozenset({"bye"})


def fallback_phase(act: str) -> DialoguePhase:
    if act in OPENING_ACTS:
        return DialoguePhase.OPENING
    if act in CLOSING_ACTS:
        return DialoguePhase.CLOSING
    return DialoguePhase.NEGOTIATION


@dataclass(frozen=True)
class PlanOperator:
    name: str
    level: str
    body: tuple[str, ...]
    phase: Optional[DialoguePhase] = None
    kind: str = "hand_coded"
    support: int = 0

    def __post_init__(self):
        object.__setattr__(self, "body", tuple(self.body))
        if not self.body:
            raise ValueError(f"operator {self.name!r} has an empty body")
        if self.level not in OPERATOR_LEVELS:
            raise ValueError(f"operator {self.name!r}: level must be one of {OPERATOR_LEVELS}")
        if self.kind not in OPERATOR_KINDS:
            raise ValueError(f"operator {self.name!r}: kind must be one of {OPERATOR_KINDS}")
        if self.phase is not None:
            object.__setattr__(self, "phase", DialoguePhase(self.phase))

    def to_json(self) -> dict:
        out = {
            "name": self.name,
            "level": self.level,
            "body": list(self.body),
            "phase": self.phase.value if self.phase else None,
            "kind": self.kind,
        }
        if self.kind == "learned":
            out["support"] = self.support
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "PlanOperator":
        return cls(obj["name"], obj.get("level", "turn"), tuple(obj["body"]), obj.get("phase"),
                   obj.get("kind", "hand_coded"), int(obj.get("support", 0)))


REPAIR_TURN = PlanOperator("REPAIR-TURN", "turn", ("*",), kind="repair")
REPAIR_PHASE = PlanOperator("REPAIR-PHASE", "phase", ("*",), kind="repair")


def check_operators(operators: Sequence[PlanOperator], inventory: Optional[Iterable[str]] = None):
    """Check level stratification and, for turn-level bodies, act membership."""
    by_name = {}
    for op in operators:
        if op.name in by_name:
            raise ValueError(f"duplicate operator name {op.name!r}")
        by_name[op.name] = op
    inventory = set(inventory) if inventory is not None else None
    for op in operators:
        if op.level == "turn":
            if inventory is not None:
                bad = [s for s in op.body if s not in inventory]
                if bad:
                    raise ValueError(f"turn operator {op.name!r} uses unknown acts {bad}")
            continue
        rank = OPERATOR_LEVELS.index(op.level)
        for symbol in op.body:
            sub = by_name.get(symbol)
            if sub is None or OPERATOR_LEVELS.index(sub.level) >= rank:
                raise ValueError(f"{op.level} operator {op.name!r} may only use lower-level operators, not {symbol!r}")


def load_operators(path: Union[str, os.PathLike], inventory=None) -> list[PlanOperator]:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, list):
        raise ValueError("operator file must hold a JSON list")
    operators = [PlanOperator.from_json(obj) for obj in data]
    check_operators(operators, inventory)
    return operators


def save_operators(operators: Sequence[PlanOperator], path: Union[str, os.PathLike]):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump([op.to_json() for op in operators], fh, indent=1)
        fh.write("\n")


# ---------------------------------------------------------------------------
# tree


@dataclass(eq=False)
class PlanNode:
    kind: str  # act | operator | repair | turn | phase | dialogue
    label: str
    children: list["PlanNode"] = field(default_factory=list)
    operator: Optional[PlanOperator] = None
    phase: Optional[DialoguePhase] = None
    speaker: Optional[str] = None
    annotation: Optional[dict] = None

    def leaves(self) -> list["PlanNode"]:
        if self.kind == "act":
            return [self]
        return [leaf for child in self.children for leaf in child.leaves()]

    def iter(self):
        yield self
        for child in self.children:
            yield from child.iter()


def _leaf(act: str, speaker: Optional[str]) -> PlanNode:
    return PlanNode("act", act, speaker=speaker)


def _operator_key(op: PlanOperator):
    return (-len(op.body), -op.support, 0 if op.kind == "hand_coded" else 1, op.name)


def recognize_turn(acts: Sequence[str], operators: Sequence[PlanOperator], speaker: Optional[str] = None) -> PlanNode:
    """Cover a turn's acts with turn-level operators, greedily and left to right.

    Longest body wins; ties go to higher support, then hand-coded operators,
    then name order.  Maximal uncovered spans become repair nodes.
    """
    acts = list(acts)
    if not acts:
        raise ValueError("a turn needs at least one act")
    candidates = sorted((op for op in operators if op.level == "turn" and op.kind != "repair"), key=_operator_key)
    turn = PlanNode("turn", "turn", speaker=speaker)
    uncovered: list[str] = []

    def flush():
        if uncovered:
            turn.children.append(PlanNode("repair", REPAIR_TURN.name, [_leaf(a, speaker) for a in uncovered],
                                          operator=REPAIR_TURN))
            uncovered.clear()

    i = 0
    while i < len(acts):
        match = next((op for op in candidates if tuple(acts[i:i + len(op.body)]) == op.body), None)
        if match is None:
            uncovered.append(acts[i])
            i += 1
            continue
        flush()
        turn.children.append(PlanNode("operator", match.name, [_leaf(a, speaker) for a in match.body],
                                      operator=match, phase=match.phase))
        i += len(match.body)
    flush()
    return turn


def leaf_phases(subtree: PlanNode) -> list[DialoguePhase]:
    """Phase of each leaf: its covering operator's tag, else the act's fallback vote."""
    out = []
    for child in subtree.children:
        for leaf in child.leaves():
            if child.kind == "operator" and child.phase is not None:
                out.append(child.phase)
            else:
                out.append(fallback_phase(leaf.label))
    return out


def determine_phase(subtree: PlanNode, current: DialoguePhase = DialoguePhase.OPENING) -> DialoguePhase:
    """Leaf-weighted majority phase of a turn subtree; ties resolve toward ``current``."""
    votes = Counter(leaf_phases(subtree))
    if not votes:
        raise ValueError("empty turn subtree")
    best = max(votes.values())
    tied = [p for p in DialoguePhase if votes[p] == best]
    if current in tied:
        return current
    return tied[0]


@dataclass
class IntentionalStructure:
    root: Optional[PlanNode] = None
    current_phase: DialoguePhase = DialoguePhase.OPENING

    def turns(self) -> list[PlanNode]:
        return [n for n in self.root.iter() if n.kind == "turn"] if self.root else []

    def leaves(self) -> list[PlanNode]:
        return self.root.leaves() if self.root else []

    def repair_nodes(self, level: str = "turn") -> list[PlanNode]:
        if self.root is None:
            return []
        wanted = REPAIR_TURN if level == "turn" else REPAIR_PHASE
        return [n for n in self.root.iter() if n.kind == "repair" and n.operator is wanted]

    def dump(self) -> str:
        lines = []

        def rec(node: PlanNode, depth: int):
            pad = "  " * depth
            if node.kind == "act":
                lines.append(f"{pad}act:{node.label}")
                return
            if node.kind == "repair":
                text = f"{pad}repair:{node.label}"
                if node.phase is not None:
                    text += f" [{node.phase.value}]"
                if node.annotation:
                    text += " " + json.dumps(node.annotation, sort_keys=True)
            elif node.kind == "turn":
                text = f"{pad}turn ({node.speaker})" if node.speaker else f"{pad}turn"
            elif node.kind == "phase":
                text = f"{pad}phase:{node.label}"
            elif node.kind == "operator":
                tag = f" [{node.phase.value}]" if node.phase else ""
                text = f"{pad}{node.label}{tag}"
            else:
                text = f"{pad}{node.label}"
            lines.append(text)
            for child in node.children:
                rec(child, depth + 1)

        if self.root is not None:
            rec(self.root, 0)
        return "\n".join(lines)


def attach_turn(structure: IntentionalStructure, subtree: PlanNode,
                model: Optional[NGramModel] = None) -> IntentionalStructure:
    """Link a turn subtree into the dialogue-wide structure.

    Turns join the phase node of their dominant phase; a phase that falls
    back behind the current one is wrapped in a phase-level repair node inside
    the current phase node, so leaf order is preserved.  With a model, gaps
    under the turn's repair nodes are estimated.
    """
    phase = determine_phase(subtree, structure.current_phase)
    subtree.phase = phase
    if structure.root is None:
        structure.root = PlanNode("dialogue", "dialogue")
    root = structure.root
    last = root.children[-1] if root.children else None

    if phase.rank < structure.current_phase.rank and last is not None:
        last.children.append(PlanNode("repair", REPAIR_PHASE.name, [subtree], operator=REPAIR_PHASE, phase=phase))
    elif last is not None and last.phase is phase:
        last.children.append(subtree)
    else:
        root.children.append(PlanNode("phase", phase.value, [subtree], phase=phase))
        structure.current_phase = phase

    if model is not None:
        repairs = structure.repair_nodes()
        for node in subtree.iter():
            if node.kind == "repair" and node.operator is REPAIR_TURN:
                repair_and_estimate(structure, repairs.index(node), model)
    return structure


def repair_and_estimate(structure: IntentionalStructure, position: int, model: NGramModel) -> PlanNode:
    """Annotate the ``position``-th turn-level repair node with the likeliest gap filler."""
    repairs = structure.repair_nodes()
    if not 0 <= position < len(repairs):
        raise IndexError(f"no repair node at position {position} ({len(repairs)} present)")
    node = repairs[position]
    span = node.leaves()
    if len(span) > MAX_GAP:
        node.annotation = {"estimate": "unestimated", "gap_length": len(span)}
        return node
    leaves = structure.leaves()
    start = next(i for i, leaf in enumerate(leaves) if leaf is span[0])
    left = [(leaf.label, leaf.speaker) for leaf in leaves[:start]]
    right = leaves[start + len(span):start + len(span) + 1]
    history = tagged_history(left[-(model.max_order - 1):] if model.max_order > 1 else [], span[0].speaker)
    right_ctx = [(right[0].label, "same_speaker")] if right else []
    ranked = estimate_gap(model, history, right_ctx, len(span))
    filler, score = ranked[0]
    node.annotation = {"estimate": list(filler), "gap_length": len(span), "score": round(score, 6)}
    return node


# ---------------------------------------------------------------------------
# learning


def operator_name(body: Sequence[str]) -> str:
    return "-".join(act.upper() for act in body)


def _phase_segments(acts: Sequence[str]) -> list[tuple[str, ...]]:
    segments, current = [], [acts[0]]
    for prev, act in zip(acts, acts[1:]):
        if fallback_phase(act) is fallback_phase(prev):
            current.append(act)
        else:
            segments.append(tuple(current))
            current = [act]
    segments.append(tuple(current))
    return segments


def _majority_phase(body: Sequence[str]) -> DialoguePhase:
    votes = Counter(fallback_phase(a) for a in body)
    best = max(votes.values())
    return next(p for p in DialoguePhase if votes[p] == best)


def learn_operators(corpus: Corpus, min_support: int = 2) -> list[PlanOperator]:
    """Mine turn-level operators from complete turns seen at least ``min_support`` times.

    Turns whose full pattern is rarer than ``min_support`` also contribute
    their phase-homogeneous segments (split where the fallback phase vote
    changes), so frequent openings or closings inside mixed turns are found.
    """
    check_positive_int(min_support, "min_support")
    if not corpus.dialogues:
        raise ValueError("cannot learn operators from an empty corpus")
    turns = [tuple(t.acts) for d in corpus.dialogues for t in d.turns]
    support = Counter(turns)
    frequent = {body for body, n in support.items() if n >= min_support}
    for body in turns:
        if body in frequent:
            continue
        segments = _phase_segments(body)
        if len(segments) > 1:
            support.update(set(segments))
    operators = [
        PlanOperator(operator_name(body), "turn", body, _majority_phase(body), "learned", n)
        for body, n in support.items()
        if n >= min_support
    ]
    operators.sort(key=lambda op: (-op.support, op.body))
    return operators


class PlanRecognizer(BaseEstimator, TransformerMixin):
    """Operator learner and turn recognizer in one estimator.

    ``fit`` learns turn-level operators from a corpus and merges them with the
    hand-coded ``operators``; ``transform`` maps act sequences to turn subtrees.
    """

    def __init__(self, operators=None, min_support=2, learn=True):
        self.operators = operators
        self.min_support = min_support
        self.learn = learn

    def fit(self, X: Corpus, y=None):
        hand = list(self.operators or [])
        learned = learn_operators(X, self.min_support) if self.learn else []
        known = {op.body for op in hand if op.level == "turn"}
        self.operators_ = hand + [op for op in learned if op.body not in known]
        check_operators(self.operators_, X.act_inventory)
        return self

    def transform(self, X: Iterable[Sequence[str]]) -> list[PlanNode]:
        check_is_fitted(self, "operators_")
        return [recognize_turn(acts, self.operators_) for acts in X]
