import pytest
from hypothesis import given
from hypothesis import strategies as st

from dialogue_context.base import DialoguePhase, Prediction, SequenceMemoryError
from dialogue_context.sequence_memory import SequenceMemory

B02_DEEP = ["greet", "introduce_name", "init_date", "suggest_support_date"]
TEMPORAL = [("temporal", {"suggest_support_date", "request_comment_date"}), ("locative", set())]


def memory_after_b02():
    m = SequenceMemory()
    m.begin_turn("A", "de")
    for act in ["greet", "introduce_name"]:
        m.add_utterance("deep", act)
    m.close_turn("deep", 2)
    m.begin_turn("B", "de")
    for act in B02_DEEP:
        m.add_utterance("deep", act)
    for act in ["greet", "init_date"]:
        m.add_utterance("shallow", act)
    return m


def test_begin_turn_indices():
    m = SequenceMemory()
    assert m.begin_turn("A") == 0
    with pytest.raises(SequenceMemoryError):
        m.begin_turn("B")
    m.close_turn("deep", 0)
    m.begin_turn("B")
    m.close_turn("deep", 0)
    m.begin_turn("A")
    m.close_turn("deep", 0)
    assert m.begin_turn("B") == 3


def test_tracks_are_independent():
    m = memory_after_b02()
    turn = m.turns[1]
    assert [r.act for r in turn.utterances["deep"]] == B02_DEEP
    assert [r.act for r in turn.utterances["shallow"]] == ["greet", "init_date"]
    with pytest.raises(SequenceMemoryError, match="x"):
        m.add_utterance("x", "greet")


def test_add_without_open_turn():
    with pytest.raises(SequenceMemoryError):
        SequenceMemory().add_utterance("deep", "greet")


def test_close_turn_metadata():
    m = memory_after_b02()
    with pytest.raises(SequenceMemoryError):
        m.close_turn("deep", 5)
    record = m.close_turn("deep", 4)
    assert record.translated_count == 4 and record.selected_track == "deep" and record.closed


def test_close_with_zero_is_legal():
    m = SequenceMemory()
    m.begin_turn("A")
    m.add_utterance("deep", "greet")
    assert m.close_turn("shallow", 0).translated_count == 0


def test_register_track():
    m = memory_after_b02()
    m.register_track("keyword")
    m.add_utterance("keyword", "init_date")
    assert [r.act for r in m.turns[1].utterances["keyword"]] == ["init_date"]
    assert m.turns[0].utterances["keyword"] == []
    with pytest.raises(SequenceMemoryError):
        m.register_track("deep")


def test_last_acts_crosses_turns():
    m = memory_after_b02()
    assert m.last_acts("deep", 2) == [("init_date", "B"), ("suggest_support_date", "B")]
    assert m.last_acts("deep", 100) == [("greet", "A"), ("introduce_name", "A")] + [(a, "B") for a in B02_DEEP]
    assert SequenceMemory().last_acts("deep", 3) == []
    with pytest.raises(SequenceMemoryError):
        m.last_acts("nope", 1)


def test_disambiguation():
    m = SequenceMemory()
    assert m.disambiguate_reading("deep", TEMPORAL) == ("locative", True)
    m.begin_turn("A")
    m.add_utterance("deep", "suggest_support_date")
    assert m.disambiguate_reading("deep", TEMPORAL) == ("temporal", False)
    m.add_utterance("deep", "greet")
    assert m.disambiguate_reading("deep", TEMPORAL) == ("locative", False)
    assert m.disambiguate_reading("deep", TEMPORAL, window=2).reading == "temporal"


def test_disambiguation_without_default_is_low_confidence():
    m = memory_after_b02()
    reading = m.disambiguate_reading("deep", [("x", {"bye"}), ("y", {"uptake"})])
    assert reading == ("x", True)
    with pytest.raises(ValueError):
        m.disambiguate_reading("deep", [])
    with pytest.raises(ValueError):
        m.disambiguate_reading("deep", [("x", set()), ("y", set())])


def test_annotate():
    m = memory_after_b02()
    record = m.annotate(1, 0, "deep", phase="opening")
    assert record.phase is DialoguePhase.OPENING
    m.annotate(1, 0, "deep", phase=DialoguePhase.NEGOTIATION)
    assert record.phase is DialoguePhase.NEGOTIATION
    assert m.annotate(1, 1, "deep", predictions=[]).predictions == []
    preds = [Prediction("a", 0.1), Prediction("b", 0.7), Prediction("c", 0.2)]
    assert [p.act for p in m.annotate(1, 2, "deep", predictions=preds).predictions] == ["b", "c", "a"]
    with pytest.raises(SequenceMemoryError):
        m.annotate(1, 9, "deep", phase="opening")
    with pytest.raises(SequenceMemoryError):
        m.annotate(7, 0, "deep", phase="opening")


def test_snapshot_lines():
    m = memory_after_b02()
    m.annotate(1, 3, "deep", phase="negotiation", predictions=[Prediction("uptake", 0.4567)])
    lines = m.snapshot().splitlines()
    assert len(lines) == 2 + 4 + 2
    assert "1\tB\tdeep\t3\tsuggest_support_date\tnegotiation\tsame=uptake:457\tchange=-" in lines


ops = st.lists(
    st.one_of(
        st.tuples(st.just("turn"), st.sampled_from(["A", "B"])),
        st.tuples(st.just("add"), st.sampled_from(["deep", "shallow"]), st.sampled_from(["greet", "uptake", "bye"])),
        st.tuples(st.just("close")),
    ),
    max_size=40,
)


@given(ops)
def test_track_lists_mirror_add_calls(script):
    m = SequenceMemory()
    expected = []  # per turn: {track: [acts]}
    for op in script:
        try:
            if op[0] == "turn":
                m.begin_turn(op[1])
                expected.append({"deep": [], "shallow": []})
            elif op[0] == "add":
                m.add_utterance(op[1], op[2])
                expected[-1][op[1]].append(op[2])
            else:
                m.close_turn("deep", 0)
        except SequenceMemoryError:
            pass
    assert [{t: [r.act for r in turn.utterances[t]] for t in ("deep", "shallow")} for turn in m.turns] == expected
    assert [t.index for t in m.turns] == list(range(len(m.turns)))
    for n in range(1, 6):
        shorter, longer = m.last_acts("deep", n), m.last_acts("deep", n + 1)
        assert longer[len(longer) - len(shorter):] == shorter
    first = m.disambiguate_reading("deep", TEMPORAL)
    assert m.disambiguate_reading("deep", TEMPORAL) == first
