import datetime as dt

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dialogue_context.thematic import (
    WEEKDAYS,
    FromTo,
    RelativeTime,
    Stance,
    Successor,
    ThematicMemory,
    TimeDescription,
    check_plausibility,
    classify_successor,
    resolve_relative,
    time_expression_from_json,
    time_expression_to_json,
)

P, A, R = Stance.PROPOSED, Stance.ACCEPTED, Stance.REJECTED
ONE_DAY = dt.timedelta(days=1)


def walk(start, stop):
    """Every calendar day from start to stop inclusive, one step at a time."""
    day = start
    while day <= stop:
        yield day
        day += ONE_DAY


# month lengths observed by walking the calendar, not from a table
MONTH_LENGTH = {}
for _d in walk(dt.date(1990, 1, 1), dt.date(2010, 12, 31)):
    MONTH_LENGTH[_d.year, _d.month] = max(MONTH_LENGTH.get((_d.year, _d.month), 0), _d.day)


def kth_weekday(anchor, weekday, k):
    """k-th occurrence of ``weekday`` strictly after (k > 0) or before (k < 0) the anchor."""
    step = ONE_DAY if k > 0 else -ONE_DAY
    day, seen = anchor, 0
    while seen < abs(k):
        day += step
        seen += day.weekday() == weekday
    return day


# -- time expressions --------------------------------------------------------------


def test_json_round_trip():
    for obj in [
        {"kind": "absolute", "year": 1996, "month": 2, "day": 8, "dow": "Thu", "period": "afternoon", "time": "14:00"},
        {"kind": "absolute", "month": 2, "from_to": {"level": "day", "lo": 6, "hi": 9}},
        {"kind": "relative", "unit": "week", "offset": -2},
        {"kind": "relative", "unit": "day_of_week", "offset": 1, "dow": "Thu"},
    ]:
        assert time_expression_to_json(time_expression_from_json(obj)) == obj


@pytest.mark.parametrize(
    "obj",
    [
        {"kind": "absolute"},
        {"kind": "sometime", "day": 3},
        {"kind": "absolute", "dow": "Funday"},
        {"kind": "absolute", "period": "midnight"},
        {"kind": "absolute", "time": "noon"},
        {"kind": "absolute", "weekday": "Thu"},
        {"kind": "absolute", "day": 3, "from_to": {"level": "day", "lo": 1, "hi": 4}},
        {"kind": "absolute", "from_to": {"level": "time", "lo": 1, "hi": 4}},
        {"kind": "relative", "unit": "fortnight", "offset": 1},
    ],
)
def test_bad_time_expressions(obj):
    with pytest.raises(ValueError):
        time_expression_from_json(obj)


def test_weekday_and_clock_normalization():
    assert TimeDescription(dow="thursday", time="8:30") == TimeDescription(dow="Thu", time="08:30")


# -- relative resolution ------------------------------------------------------------


def test_two_weeks_ago():
    anchor = dt.date(1996, 6, 19)
    assert anchor.isocalendar()[1] == 25
    assert resolve_relative(RelativeTime("week", -2), anchor) == TimeDescription(year=1996, week=23)


def test_this_month():
    assert resolve_relative(RelativeTime("month", 0), dt.date(1996, 1, 10)) == TimeDescription(year=1996, month=1)


def test_next_thursday():
    anchor = dt.date(1996, 2, 5)
    assert anchor.weekday() == 0
    expected = kth_weekday(anchor, 3, 1)
    assert expected == dt.date(1996, 2, 8)
    assert resolve_relative(RelativeTime("day_of_week", 1, dow="Thu"), anchor) == TimeDescription(
        year=1996, month=2, day=8, dow="Thu"
    )


@pytest.mark.parametrize(
    "expr, anchor, expected",
    [
        (RelativeTime("year", 1), dt.date(1996, 5, 1), TimeDescription(year=1997)),
        (RelativeTime("month", 1), dt.date(1996, 12, 31), TimeDescription(year=1997, month=1)),
        (RelativeTime("month", -13), dt.date(1996, 1, 31), TimeDescription(year=1994, month=12)),
        (RelativeTime("week", 1), dt.date(1996, 12, 28), TimeDescription(year=1997, week=1)),
        (RelativeTime("day", 1), dt.date(1996, 2, 28), TimeDescription(year=1996, month=2, day=29)),
        (RelativeTime("period_of_day", 1, period="morning"), dt.date(1996, 2, 8),
         TimeDescription(year=1996, month=2, day=9, period="morning")),
        (RelativeTime("period_of_day", 0), dt.datetime(1996, 2, 8, 14, 0),
         TimeDescription(year=1996, month=2, day=8, period="afternoon")),
        (RelativeTime("time", 2), dt.datetime(1996, 2, 8, 23, 30),
         TimeDescription(year=1996, month=2, day=9, time="01:30")),
        (RelativeTime("day_of_week", 0, dow="Mon"), dt.date(1996, 2, 8),
         TimeDescription(year=1996, month=2, day=5, dow="Mon")),
    ],
)
def test_resolution_table(expr, anchor, expected):
    assert resolve_relative(expr, anchor) == expected


def test_clock_units_need_a_clock_anchor():
    with pytest.raises(ValueError):
        resolve_relative(RelativeTime("time", 1), dt.date(1996, 1, 1))
    with pytest.raises(ValueError):
        resolve_relative(RelativeTime("period_of_day", 1), dt.date(1996, 1, 1))


dates = st.dates(dt.date(1990, 1, 1), dt.date(2010, 12, 31))


@given(dates, st.integers(-8, 8).filter(bool), st.integers(0, 6))
def test_weekday_offsets_match_walk(anchor, k, weekday):
    got = resolve_relative(RelativeTime("day_of_week", k, dow=WEEKDAYS[weekday]), anchor)
    day = kth_weekday(anchor, weekday, k)
    assert (got.year, got.month, got.day, got.dow) == (day.year, day.month, day.day, WEEKDAYS[weekday])


def _as_anchor(desc: TimeDescription) -> dt.date:
    if desc.week is not None:
        return dt.date.fromisocalendar(desc.year, desc.week, 3)
    return dt.date(desc.year, desc.month or 1, desc.day or 1)


@given(dates, st.sampled_from(["year", "month", "week", "day"]), st.integers(-30, 30))
def test_offsets_are_inverse_consistent(anchor, unit, k):
    original = resolve_relative(RelativeTime(unit, 0), anchor)
    moved = resolve_relative(RelativeTime(unit, k), anchor)
    back = resolve_relative(RelativeTime(unit, -k), _as_anchor(moved))
    assert back == original


# -- plausibility ---------------------------------------------------------------------


def test_april_31():
    verdict = check_plausibility(TimeDescription(month=4, day=31), 1996)
    assert not verdict.plausible and verdict.reason == "April has 30 days" and verdict.level == "day"


def test_weekday_against_full_date():
    assert check_plausibility(TimeDescription(year=1996, month=2, day=8, dow="Thu"), 1996)
    verdict = check_plausibility(TimeDescription(year=1996, month=2, day=8, dow="Fri"), 1996)
    assert not verdict and verdict.level == "day_of_week" and "Thu" in verdict.reason
    # the reference year stands in for a missing year
    assert check_plausibility(TimeDescription(month=2, day=8, dow="Thu"), 1996)
    assert not check_plausibility(TimeDescription(month=2, day=8, dow="Thu"), 1997)


def test_calendar_walk_is_accepted_and_overflow_rejected():
    for day in walk(dt.date(1990, 1, 1), dt.date(2010, 12, 31)):
        desc = TimeDescription(year=day.year, month=day.month, day=day.day, dow=WEEKDAYS[day.weekday()])
        assert check_plausibility(desc, 1996), day
    for (year, month), last in MONTH_LENGTH.items():
        for d in range(last + 1, 32):
            assert not check_plausibility(TimeDescription(year=year, month=month, day=d), 1996)
    assert not check_plausibility(TimeDescription(day=32), 1996)
    assert not check_plausibility(TimeDescription(month=13), 1996)


@pytest.mark.parametrize(
    "desc, plausible",
    [
        (TimeDescription(year=1996, week=52), True),
        (TimeDescription(year=1996, week=53), False),
        (TimeDescription(year=1998, week=53), True),
        (TimeDescription(time="23:59"), True),
        (TimeDescription(time="24:00"), False),
        (TimeDescription(time="07:60"), False),
        (TimeDescription(period="afternoon", time="14:00"), True),
        (TimeDescription(period="morning", time="14:00"), False),
        (TimeDescription(month=2, from_to=FromTo("day", 6, 9)), True),
        (TimeDescription(month=2, from_to=FromTo("day", 27, 30)), False),
        (TimeDescription(month=2, from_to=FromTo("day", 9, 6)), False),
        (TimeDescription(from_to=FromTo("month", 11, 13)), False),
        (TimeDescription(year=1996, from_to=FromTo("week", 50, 53)), False),
    ],
)
def test_plausibility_table(desc, plausible):
    assert bool(check_plausibility(desc, 1996)) is plausible


# -- successor words ------------------------------------------------------------------


def test_successor_examples():
    anchor = dt.date(1996, 6, 19)  # ISO week 25
    assert classify_successor(TimeDescription(year=1996, week=26), anchor) is Successor.NEXT
    assert classify_successor(TimeDescription(year=1996, week=27), anchor) is Successor.FOLLOWING
    assert classify_successor(TimeDescription(week=26), anchor) is Successor.NEXT
    december = dt.date(1996, 12, 10)
    assert classify_successor(TimeDescription(month=1), december) is Successor.NEXT
    assert classify_successor(TimeDescription(year=1997, month=1), december) is Successor.NEXT
    assert classify_successor(TimeDescription(year=1997, month=2), december) is Successor.FOLLOWING
    assert classify_successor(TimeDescription(day=11), december) is Successor.NEXT
    assert classify_successor(TimeDescription(dow="Wed"), december) is Successor.NEXT
    assert classify_successor(TimeDescription(year=1997), december) is Successor.NEXT
    with pytest.raises(ValueError):
        classify_successor(TimeDescription(time="14:00"), december)


@given(dates, st.integers(-40, 40))
def test_successor_days(anchor, offset):
    day = anchor + dt.timedelta(days=offset)
    got = classify_successor(TimeDescription(year=day.year, month=day.month, day=day.day), anchor)
    assert (got is Successor.NEXT) == (offset == 1)


# -- the hierarchy ---------------------------------------------------------------------


def test_empty_memory():
    m = ThematicMemory()
    assert m.current_agreement().is_empty
    assert m.infer_implicit_rejection(TimeDescription(day=8), "A", 0) == []
    assert m.mark_focus(A, "A", 0) == []
    assert m.dump() == ""


def test_insert_into_empty_memory_creates_one_root():
    m = ThematicMemory()
    paths = m.insert(TimeDescription(month=2, day=8), P, "A", 0)
    assert len(m.roots) == 1 and paths == [(0,), (0, 0), (0, 0, 0)]
    assert m.focus[0] == 0 and m.node(m.focus).value == 8


def test_interval_stays_as_sibling_context():
    m = ThematicMemory()
    m.insert(TimeDescription(month=2, from_to=FromTo("day", 6, 9)), P, "A", 4)
    m.insert(TimeDescription(day=8, dow="Thu"), P, "B", 5)
    month = m.roots[0].children[0]
    assert [(c.level, str(c.value)) for c in month.children] == [("day", "FROM_TO(6,9)"), ("day", "8")]
    assert month.children[1].children[0].value == "Thu"
    assert m.focus == (0, 0, 1, 0)
    assert "FROM_TO(6,9)" in m.dump()


def test_acceptance_ends_attitudes():
    m = ThematicMemory()
    m.insert(TimeDescription(day=8), P, "B", 5)
    m.insert(TimeDescription(day=8), A, "A", 9)
    day = m.node((0, 0))
    assert day.latest.stance is A and [a.stance for a in day.attitudes] == [P, A]
    assert m.current_agreement() == TimeDescription(day=8)


def test_month_conflict_opens_a_new_root():
    m = ThematicMemory()
    m.insert(TimeDescription(month=1, from_to=FromTo("day", 15, 19)), P, "A", 2)
    m.insert(TimeDescription(month=1, from_to=FromTo("day", 11, 18)), P, "B", 3)
    assert len(m.roots) == 1
    m.insert(TimeDescription(month=2, from_to=FromTo("day", 6, 9)), P, "A", 4)
    assert len(m.roots) == 2 and m.focus[0] == 1
    # a compatible refinement stays in the current root
    m.insert(TimeDescription(month=2, day=8), P, "B", 5)
    assert len(m.roots) == 2


def test_attitudes_must_be_in_turn_order():
    m = ThematicMemory()
    m.insert(TimeDescription(day=8), P, "A", 5)
    with pytest.raises(ValueError):
        m.insert(TimeDescription(day=8), A, "B", 4)


def _negotiation():
    m = ThematicMemory()
    m.insert(TimeDescription(month=2, day=8), P, "A", 1)
    m.insert(TimeDescription(time="08:30"), P, "B", 2)
    return m


def test_implicit_rejection_of_other_speakers_time():
    m = _negotiation()
    marked = m.infer_implicit_rejection(TimeDescription(time="14:00"), "A", 3)
    assert marked == [(0, 0, 0, 0)]
    att = m.node(marked[0]).latest
    assert (att.stance, att.speaker, att.implicit) == (R, "A", True)


def test_no_implicit_rejection_for_support_own_proposals_or_accepted():
    assert _negotiation().infer_implicit_rejection(TimeDescription(time="08:30"), "A", 3) == []
    assert _negotiation().infer_implicit_rejection(TimeDescription(time="14:00"), "B", 3) == []
    m = _negotiation()
    m.mark_focus(A, "A", 3)
    assert m.infer_implicit_rejection(TimeDescription(time="14:00"), "A", 4) == []


def test_interval_rejected_only_from_outside():
    m = ThematicMemory()
    m.insert(TimeDescription(month=2, from_to=FromTo("day", 6, 9)), P, "A", 1)
    assert m.infer_implicit_rejection(TimeDescription(day=8), "B", 2) == []
    assert m.infer_implicit_rejection(TimeDescription(day=12), "B", 2) == [(0, 0, 0)]


def test_newer_accepted_day_wins():
    m = ThematicMemory()
    m.insert(TimeDescription(month=3, day=8), P, "A", 1)
    m.mark_focus(A, "B", 2)
    # the month was never itself accepted
    assert m.current_agreement() == TimeDescription(day=8)
    m.insert(TimeDescription(day=9), P, "A", 3)
    m.mark_focus(A, "B", 4)
    agreement = m.current_agreement()
    assert agreement.day == 9


def test_acceptance_settles_open_ancestors_below_month():
    m = ThematicMemory()
    m.insert(TimeDescription(month=2, day=8, dow="Thu"), P, "B", 1)
    m.insert(TimeDescription(time="14:00"), P, "A", 2)
    m.mark_focus(A, "B", 3)
    assert m.current_agreement() == TimeDescription(day=8, dow="Thu", time="14:00")
    # coarse levels carry no attitude of their own
    assert m.node((0, 0)).attitudes == []


def test_dump_format():
    m = _negotiation()
    assert m.dump().splitlines() == [
        " date#0",
        "   month 2",
        "     day 8 [proposed(A@1)]",
        "*      time 08:30 [proposed(B@2)]",
    ]


# -- invariants under random negotiation ------------------------------------------------

desc_st = st.builds(
    TimeDescription,
    month=st.none() | st.integers(1, 3),
    day=st.none() | st.integers(6, 10),
    dow=st.none() | st.sampled_from(["Mon", "Thu"]),
    time=st.none() | st.sampled_from(["08:30", "10:00", "14:00"]),
).filter(lambda d: not d.is_empty)
op_st = st.tuples(st.sampled_from(["insert", "mark", "infer"]), desc_st, st.sampled_from(list(Stance)),
                  st.sampled_from(["A", "B"]))


@settings(max_examples=200, deadline=None)
@given(st.lists(op_st, max_size=25))
def test_hierarchy_invariants(ops):
    from dialogue_context.thematic import LEVEL_RANK

    m = ThematicMemory()
    for turn, (kind, desc, stance, speaker) in enumerate(ops):
        if kind == "insert":
            m.insert(desc, stance, speaker, turn)
        elif kind == "mark":
            m.mark_focus(stance, speaker, turn)
        else:
            before = {p: (list(n.attitudes)) for p, n in m.walk()}
            for path in m.infer_implicit_rejection(desc, speaker, turn):
                old = before[path]
                assert not any(a.stance is Stance.ACCEPTED for a in old)
                assert any(a.stance is Stance.PROPOSED and a.speaker != speaker for a in old)
        if m.focus is not None:
            m.node(m.focus)
    for path, node in m.walk():
        for child in node.children:
            assert LEVEL_RANK[child.level] > LEVEL_RANK[node.level]
        turns = [a.turn_index for a in node.attitudes]
        assert turns == sorted(turns)
