"""Dialogue context for appointment-scheduling dialogues.

Sequence memory, dialogue-act prediction, a thematic structure of negotiated
dates, plan-based intentional structure and clarification sub-dialogues.
"""

__version__ = "0.1.0"

from .base import DialogueContextError, DialoguePhase, DirectionTag, Prediction
from .clarification import ClarificationFSA, correct_date, detect_confusables, propose_correction
from .corpus import Corpus, Dialogue, Turn, Utterance, parse_corpus, split_corpus
from .engine import Session, SessionConfig, replay, replay_dialogue
from .plan_recognizer import (
    IntentionalStructure,
    PlanOperator,
    PlanRecognizer,
    attach_turn,
    determine_phase,
    learn_operators,
    recognize_turn,
)
from .predictor import NGramModel, NGramPredictor, estimate_gap, evaluate_topn, predict, probability, train
from .sequence_memory import SequenceMemory
from .thematic import (
    FromTo,
    RelativeTime,
    Stance,
    Successor,
    ThematicMemory,
    TimeDescription,
    check_plausibility,
    classify_successor,
    resolve_relative,
)

__all__ = [name for name in dir() if not name.startswith("_")]
