"""Per-dialogue processing session.

A :class:`Session` owns the sequence memory, thematic memory, intentional
structure and clarification automaton of one dialogue and updates them
utterance by utterance.  Stage failures are recorded in the reports instead
of aborting the remaining stages.
"""

from __future__ import annotations

import datetime as dt
import json
import logging
from collections import defaultdict, deque
from dataclasses import dataclass, field
from typing import Iterator, Optional, Sequence

from .base import DialoguePhase, Prediction, StageError
from .clarification import (
    ACCEPT,
    REJECT,
    AwaitingConfirmation,
    ClarificationFSA,
    ConfusablePair,
    ConfusableTokens,
    ImplausibleDate,
    RepeatRequested,
    Resolved,
    detect_confusables,
    prompt,
)
from .corpus import Corpus, Dialogue
from .plan_recognizer import (
    IntentionalStructure,
    PlanOperator,
    attach_turn,
    leaf_phases,
    recognize_turn,
)
from .predictor import NGramModel, tagged_history
from .sequence_memory import DEFAULT_TRACKS, SequenceMemory
from .thematic import (
    RelativeTime,
    Stance,
    ThematicMemory,
    TimeDescription,
    check_plausibility,
    classify_successor,
    resolve_relative,
    time_expression_from_json,
)

log = logging.getLogger(__name__)

PROPOSAL_ACTS = frozenset({"suggest_support_date", "init_date"})

# stance recorded for a date mentioned together with an act
STANCE_BY_ACT = {
    "suggest_support_date": Stance.PROPOSED,
    "init_date": Stance.PROPOSED,
    "request_comment_date": Stance.PROPOSED,
    "accept_date": Stance.ACCEPTED,
    "feedback_acknowledgement": Stance.ACCEPTED,
    "reject_date": Stance.REJECTED,
}


@dataclass
class SessionConfig:
    inference_track: str = "deep"
    prediction_k: int = 3
    clarification: bool = True
    confusable_threshold: float = 0.7
    tracks: tuple = DEFAULT_TRACKS


def _path(path) -> str:
    return ".".join(str(i) for i in path)


def _desc_json(desc: TimeDescription) -> dict:
    return {k: v for k, v in desc.to_json().items() if k != "kind"}


def _preds_json(preds: Sequence[Prediction]) -> list:
    return [[p.act, p.permille] for p in preds]


@dataclass
class UtteranceReport:
    dialogue: Optional[str]
    turn_index: int
    utterance_index: int
    speaker: str
    track: str
    act: str
    phase: Optional[DialoguePhase] = None
    predictions: dict = field(default_factory=dict)  # next speaker -> ranked predictions
    thematic: list = field(default_factory=list)
    clarification: list = field(default_factory=list)
    warnings: list = field(default_factory=list)
    errors: list = field(default_factory=list)
    agreement: TimeDescription = field(default_factory=TimeDescription)

    def to_json(self) -> dict:
        return {
            "dialogue": self.dialogue,
            "turn": self.turn_index,
            "utterance": self.utterance_index,
            "speaker": self.speaker,
            "track": self.track,
            "act": self.act,
            "phase": self.phase.value if self.phase else None,
            "predictions": {s: _preds_json(p) for s, p in self.predictions.items()},
            "thematic": self.thematic,
            "clarification": self.clarification,
            "warnings": self.warnings,
            "errors": [[stage, msg] for stage, msg in self.errors],
            "agreement": _desc_json(self.agreement),
        }


@dataclass
class TurnReport:
    turn_index: int
    speaker: str
    phase: Optional[DialoguePhase]
    utterances: list
    phase_repair: bool = False
    repairs: list = field(default_factory=list)
    errors: list = field(default_factory=list)


class Session:
    """Processing state for one dialogue."""

    def __init__(self, model: Optional[NGramModel] = None, operators: Sequence[PlanOperator] = (),
                 speaking_time=None, participants=("A", "B"), lexicon: Sequence[ConfusablePair] = (),
                 config: Optional[SessionConfig] = None, dialogue_id: Optional[str] = None):
        self.config = config or SessionConfig()
        self.model = model
        self.operators = list(operators)
        self.speaking_time = speaking_time if speaking_time is not None else dt.date.today()
        self.participants = tuple(participants)
        self.lexicon = list(lexicon)
        self.dialogue_id = dialogue_id
        self.memory = SequenceMemory(self.config.tracks)
        self.thematic = ThematicMemory()
        self.structure = IntentionalStructure()
        self.fsa = ClarificationFSA()
        self._suspended = defaultdict(deque)  # trigger -> [(stance, speaker, turn_index)]
        self._turn_reports: list[UtteranceReport] = []

    @property
    def reference_year(self) -> int:
        return self.speaking_time.year

    # -- turns ------------------------------------------------------------------

    def begin_turn(self, speaker: str, language: str = "") -> int:
        if speaker not in self.participants:
            raise StageError("memory", ValueError(f"speaker {speaker!r} is not a participant"))
        try:
            index = self.memory.begin_turn(speaker, language)
        except Exception as exc:
            raise StageError("memory", exc) from exc
        self._turn_reports = []
        return index

    def process_utterance(self, track: str, act: str, times=(), tokens: Optional[Sequence[str]] = None) -> UtteranceReport:
        turn = self.memory.open_turn
        report = UtteranceReport(
            self.dialogue_id,
            turn.index if turn else -1,
            -1,
            turn.speaker if turn else "",
            track,
            act,
        )
        try:
            record = self.memory.add_utterance(track, act)
            report.utterance_index = record.utterance_index
        except Exception as exc:
            report.errors.append(("memory", str(exc)))
            record = None
        self._turn_reports.append(report)

        if track != self.config.inference_track:
            report.agreement = self.thematic.current_agreement()
            return report

        for expr in times:
            try:
                self._thematic_stage(report, act, expr)
            except Exception as exc:
                report.errors.append(("thematic", str(exc)))
        if not times:
            try:
                self._thematic_without_times(report, act)
            except Exception as exc:
                report.errors.append(("thematic", str(exc)))

        if tokens and self.lexicon and self.config.clarification:
            try:
                for position, pair in detect_confusables(tokens, self.lexicon, self.config.confusable_threshold):
                    trigger = ConfusableTokens(position, tokens[position], pair)
                    state = self.fsa.raise_trigger(trigger)
                    report.clarification.append(self._trigger_event(trigger, state))
            except Exception as exc:
                report.errors.append(("clarification", str(exc)))

        if self.model is not None and record is not None:
            try:
                report.predictions = self._predict()
                same = report.predictions.get(report.speaker)
                other = [p for s, p in report.predictions.items() if s != report.speaker]
                self.memory.annotate(record.turn_index, record.utterance_index, track,
                                     predictions=same, change_predictions=other[0] if other else None)
            except Exception as exc:
                report.errors.append(("prediction", str(exc)))
        report.agreement = self.thematic.current_agreement()
        return report

    def process_turn_end(self, selected_track: Optional[str] = None,
                         translated_count: Optional[int] = None) -> TurnReport:
        track = self.config.inference_track
        selected_track = selected_track or track
        turn = self.memory.open_turn
        if turn is None:
            raise StageError("memory", RuntimeError("no open turn"))
        if translated_count is None:
            translated_count = len(turn.utterances.get(selected_track, []))
        try:
            self.memory.close_turn(selected_track, translated_count)
        except Exception as exc:
            raise StageError("memory", exc) from exc

        result = TurnReport(turn.index, turn.speaker, None, list(self._turn_reports))
        acts = [r.act for r in turn.utterances[track]]
        if not acts:
            return result
        try:
            subtree = recognize_turn(acts, self.operators, turn.speaker)
            n_phase_repairs = len(self.structure.repair_nodes("phase"))
            attach_turn(self.structure, subtree, self.model)
            result.phase = subtree.phase
            result.phase_repair = len(self.structure.repair_nodes("phase")) > n_phase_repairs
            result.repairs = [n.annotation for n in subtree.iter() if n.kind == "repair"]
            for i, phase in enumerate(leaf_phases(subtree)):
                self.memory.annotate(turn.index, i, track, phase=phase)
            by_index = {r.utterance_index: r for r in self._turn_reports if r.track == track}
            for i, phase in enumerate(leaf_phases(subtree)):
                if i in by_index:
                    by_index[i].phase = phase
        except Exception as exc:
            result.errors.append(("plan", str(exc)))
        return result

    # -- stages -----------------------------------------------------------------

    def _thematic_stage(self, report: UtteranceReport, act: str, expr):
        if isinstance(expr, dict):
            expr = time_expression_from_json(expr)
        desc = resolve_relative(expr, self.speaking_time) if isinstance(expr, RelativeTime) else expr
        stance = STANCE_BY_ACT.get(act)
        if stance is None:
            report.warnings.append(f"date {desc} mentioned with act {act!r} carries no attitude")
            return
        if stance is Stance.REJECTED and self.thematic.focus is not None and self.thematic.find(desc) is None:
            # rejecting the date under consideration while naming a new one
            self._mark(report, Stance.REJECTED)
            stance = Stance.PROPOSED
        verdict = check_plausibility(desc, self.reference_year)
        if not verdict.plausible:
            if not self.config.clarification:
                report.warnings.append(f"implausible date {desc} ignored: {verdict.reason}")
                return
            trigger = ImplausibleDate(desc, verdict.reason)
            self._suspended[trigger].append((stance, report.speaker, report.turn_index))
            state = self.fsa.raise_trigger(trigger, reference_year=self.reference_year)
            report.clarification.append(self._trigger_event(trigger, state))
            self._settle_immediate()
            return
        report.thematic.extend(self._insert(desc, stance, report.speaker, report.turn_index))

    def _insert(self, desc: TimeDescription, stance: Stance, speaker: str, turn_index: int) -> list:
        deltas = []
        if stance is Stance.PROPOSED:
            for path in self.thematic.infer_implicit_rejection(desc, speaker, turn_index):
                deltas.append({"op": "implicit_rejection", "path": _path(path),
                               "node": str(self.thematic.describe(path)), "speaker": speaker})
        paths = self.thematic.insert(desc, stance, speaker, turn_index)
        deltas.append({"op": "insert", "stance": stance.value, "speaker": speaker, "date": _desc_json(desc),
                       "paths": [_path(p) for p in paths], "focus": _path(self.thematic.focus)})
        return deltas

    def _thematic_without_times(self, report: UtteranceReport, act: str):
        if act == "accept_date" or (act == "feedback_acknowledgement" and self._follows_proposal()):
            stance = Stance.ACCEPTED
        elif act == "reject_date":
            stance = Stance.REJECTED
        else:
            return
        if not self._mark(report, stance):
            report.warnings.append(f"{act} without a date under consideration")

    def _mark(self, report: UtteranceReport, stance: Stance) -> bool:
        paths = self.thematic.mark_focus(stance, report.speaker, report.turn_index)
        if paths:
            report.thematic.append({"op": "mark", "stance": stance.value, "speaker": report.speaker,
                                    "paths": [_path(p) for p in paths]})
        return bool(paths)

    def _follows_proposal(self) -> bool:
        previous = self.memory.last_acts(self.config.inference_track, 2)
        return len(previous) == 2 and previous[0][0] in PROPOSAL_ACTS

    def _predict(self, k: Optional[int] = None) -> dict:
        k = k or self.config.prediction_k
        events = []
        if self.model.max_order > 1:
            events = self.memory.last_acts(self.config.inference_track, self.model.max_order - 1)
        out = {}
        for speaker in self.participants:
            history = tagged_history(events, speaker)
            out[speaker] = self.model.rank(history, k)
        return out

    # -- clarification ------------------------------------------------------------

    def _trigger_event(self, trigger, state) -> dict:
        if getattr(state, "trigger", None) != trigger:
            return {"trigger": _trigger_json(trigger), "state": "queued"}
        event = {"trigger": _trigger_json(trigger), "state": state.name}
        if isinstance(state, AwaitingConfirmation):
            event["prompt"] = prompt(state.proposal)
        return event

    def _settle_immediate(self):
        # an unfixable date goes straight to RepeatRequested; drop its suspended insert
        while isinstance(self.fsa.state, RepeatRequested):
            trigger = self.fsa.state.trigger
            if trigger in self._suspended and self._suspended[trigger]:
                self._suspended[trigger].popleft()
            self.fsa.reset()

    @property
    def awaiting(self) -> Optional[AwaitingConfirmation]:
        return self.fsa.state if isinstance(self.fsa.state, AwaitingConfirmation) else None

    def respond(self, accept: bool) -> dict:
        """Answer the pending clarification; an accepted date enters the thematic memory."""
        state = self.fsa.step(ACCEPT if accept else REJECT)
        trigger = state.trigger
        event = {"trigger": _trigger_json(trigger), "state": state.name, "thematic": []}
        suspended = self._suspended.get(trigger)
        info = suspended.popleft() if suspended else None
        if isinstance(state, Resolved):
            event["value"] = str(state.value)
            if isinstance(trigger, ImplausibleDate) and info is not None:
                stance, speaker, turn_index = info
                event["thematic"] = self._insert(state.value, stance, speaker, turn_index)
        self.fsa.reset()
        self._settle_immediate()
        if isinstance(self.fsa.state, AwaitingConfirmation):
            event["next_prompt"] = prompt(self.fsa.state.proposal)
        return event

    # -- queries --------------------------------------------------------------------

    def query(self, kind: str, **args):
        """Read-only access to the session's context information."""
        if kind == "predictions":
            if self.model is None:
                raise ValueError("no prediction model loaded")
            return self._predict(args.get("k"))
        if kind == "agreement":
            return self.thematic.current_agreement()
        if kind == "phase":
            return self.structure.current_phase
        if kind == "successor":
            referent = args.get("referent")
            if isinstance(referent, dict):
                referent = time_expression_from_json({"kind": "absolute", **referent})
            if not isinstance(referent, TimeDescription):
                raise ValueError("successor query needs a 'referent' time description")
            return classify_successor(referent, self.speaking_time)
        if kind == "reading":
            candidates = args.get("candidates")
            if not candidates:
                raise ValueError("reading query needs 'candidates'")
            return self.memory.disambiguate_reading(args.get("track", self.config.inference_track), candidates,
                                                    args.get("window", 1))
        if kind == "thematic_dump":
            return self.thematic.dump()
        if kind == "structure_dump":
            return self.structure.dump()
        if kind == "memory_snapshot":
            return self.memory.snapshot(self.config.prediction_k)
        raise ValueError(f"unknown query kind {kind!r}")


def _trigger_json(trigger) -> dict:
    if isinstance(trigger, ImplausibleDate):
        return {"kind": "implausible_date", "date": _desc_json(trigger.desc), "reason": trigger.reason}
    return {"kind": "confusable_tokens", "position": trigger.position, "token": trigger.token,
            "pair": [trigger.pair.a, trigger.pair.b]}


# ---------------------------------------------------------------------------
# replay


def replay_dialogue(dialogue: Dialogue, model=None, operators=(), lexicon=(), config=None,
                    clarify_response: Optional[str] = None) -> tuple[Session, list[dict]]:
    """Run a corpus dialogue through a fresh session.

    Reports are emitted per utterance in order, after their turn has closed
    so that the phase is filled in.
    """
    session = Session(model, operators, dialogue.speaking_time, dialogue.participants, lexicon, config,
                      dialogue.id)
    track = session.config.inference_track
    out = []
    for turn in dialogue.turns:
        session.begin_turn(turn.speaker, turn.language)
        reports = []
        for utt in turn.utterances:
            tokens = utt.text.split() if utt.text else None
            report = session.process_utterance(track, utt.act, utt.times, tokens)
            while clarify_response and session.awaiting is not None:
                report.clarification.append(session.respond(clarify_response == ACCEPT))
                report.agreement = session.thematic.current_agreement()
            reports.append(report)
        session.process_turn_end()
        out.extend(r.to_json() for r in reports)
    return session, out


def replay(corpus: Corpus, model=None, operators=(), lexicon=(), config=None,
           clarify_response: Optional[str] = None) -> Iterator[str]:
    """Newline-delimited JSON snapshots for every utterance of every dialogue."""
    for dialogue in corpus.dialogues:
        _, snapshots = replay_dialogue(dialogue, model, operators, lexicon, config, clarify_response)
        for snap in snapshots:
            yield json.dumps(snap, sort_keys=True, ensure_ascii=False)
