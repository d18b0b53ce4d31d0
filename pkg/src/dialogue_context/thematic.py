"""Thematic memory: negotiated dates as a specialization hierarchy.

Dates mentioned in a dialogue are split into their components (year, month,
week, day, day of week, period of day, clock time) and threaded into a tree
whose roots are the individual dates under negotiation.  Each node records the
attitudes (proposed / rejected / accepted) the two participants expressed
towards it.
"""

from __future__ import annotations

import calendar
import datetime as dt
import enum
import re
from dataclasses import dataclass, field, fields
from typing import Optional, Union

LEVELS = ("year", "month", "week", "day", "day_of_week", "period_of_day", "time")
LEVEL_RANK = {name: i for i, name in enumerate(LEVELS)}

# level name -> TimeDescription attribute / JSON key
_ATTR = {
    "year": "year",
    "month": "month",
    "week": "week",
    "day": "day",
    "day_of_week": "dow",
    "period_of_day": "period",
    "time": "time",
}
_LEVEL_ALIASES = {**{v: k for k, v in _ATTR.items()}, **{k: k for k in _ATTR}}

WEEKDAYS = ("Mon", "Tue", "Wed", "Thu", "Fri", "Sat", "Sun")
_WEEKDAY_LOOKUP = {}
for _i, _abbr in enumerate(WEEKDAYS):
    _WEEKDAY_LOOKUP[_abbr.lower()] = _abbr
    _WEEKDAY_LOOKUP[calendar.day_name[_i].lower()] = _abbr

# inclusive minute-of-day bounds
PERIODS = {
    "morning": (6 * 60, 11 * 60 + 59),
    "afternoon": (12 * 60, 17 * 60 + 59),
    "evening": (18 * 60, 23 * 60 + 59),
}

# finer than this level an acceptance settles open ancestor proposals
_MONTH_RANK = LEVEL_RANK["month"]

_TIME_RE = re.compile(r"^(\d{1,2}):(\d{2})$")


def level_name(name: str) -> str:
    try:
        return _LEVEL_ALIASES[name]
    except KeyError:
        raise ValueError(f"unknown time level {name!r}") from None


def normalize_weekday(value) -> str:
    if isinstance(value, int):
        return WEEKDAYS[value]
    try:
        return _WEEKDAY_LOOKUP[str(value).lower()]
    except KeyError:
        raise ValueError(f"unknown day of week {value!r}") from None


def normalize_clock(value) -> str:
    if isinstance(value, dt.time):
        return f"{value.hour:02d}:{value.minute:02d}"
    m = _TIME_RE.match(str(value))
    if not m:
        raise ValueError(f"clock time must be HH:MM, got {value!r}")
    return f"{int(m.group(1)):02d}:{m.group(2)}"


def clock_minutes(value: str) -> tuple[int, int]:
    h, m = value.split(":")
    return int(h), int(m)


def weeks_in_year(year: int) -> int:
    return dt.date(year, 12, 28).isocalendar()[1]


def period_of(clock: dt.time) -> Optional[str]:
    minutes = clock.hour * 60 + clock.minute
    for name, (lo, hi) in PERIODS.items():
        if lo <= minutes <= hi:
            return name
    return None


@dataclass(frozen=True)
class FromTo:
    """Interval marker ``FROM_TO(lo, hi)`` attached to one numeric level."""

    level: str
    lo: int
    hi: int

    def __post_init__(self):
        object.__setattr__(self, "level", level_name(self.level))
        if self.level not in ("year", "month", "week", "day"):
            raise ValueError(f"intervals are supported on numeric levels only, not {self.level!r}")

    def contains(self, value) -> bool:
        if isinstance(value, FromTo):
            return self.lo <= value.lo and value.hi <= self.hi
        return self.lo <= value <= self.hi

    def __str__(self):
        return f"FROM_TO({self.lo},{self.hi})"


ComponentValue = Union[int, str, FromTo]


@dataclass(frozen=True)
class TimeDescription:
    """A partial date: any subset of the seven hierarchy levels."""

    year: Optional[int] = None
    month: Optional[int] = None
    week: Optional[int] = None
    day: Optional[int] = None
    dow: Optional[str] = None
    period: Optional[str] = None
    time: Optional[str] = None
    from_to: Optional[FromTo] = None

    def __post_init__(self):
        if self.dow is not None:
            object.__setattr__(self, "dow", normalize_weekday(self.dow))
        if self.time is not None:
            object.__setattr__(self, "time", normalize_clock(self.time))
        if self.period is not None and self.period not in PERIODS:
            raise ValueError(f"unknown period of day {self.period!r}")
        if self.from_to is not None and getattr(self, _ATTR[self.from_to.level]) is not None:
            raise ValueError(f"{self.from_to.level} carries both a value and an interval")

    @property
    def is_empty(self) -> bool:
        return all(getattr(self, f.name) is None for f in fields(self))

    def components(self) -> list[tuple[str, ComponentValue]]:
        """Present components, coarsest first; an interval stands in for its level."""
        out = []
        for level in LEVELS:
            value = getattr(self, _ATTR[level])
            if self.from_to is not None and self.from_to.level == level:
                value = self.from_to
            if value is not None:
                out.append((level, value))
        return out

    @classmethod
    def from_components(cls, components) -> "TimeDescription":
        kwargs = {}
        for level, value in components:
            if isinstance(value, FromTo):
                kwargs["from_to"] = value
            else:
                kwargs[_ATTR[level]] = value
        return cls(**kwargs)

    def to_json(self) -> dict:
        out = {"kind": "absolute"}
        for level, value in self.components():
            if isinstance(value, FromTo):
                out["from_to"] = {"level": value.level, "lo": value.lo, "hi": value.hi}
            else:
                out[_ATTR[level]] = value
        return out

    def __str__(self):
        if self.is_empty:
            return "(nothing)"
        values = dict(self.components())
        parts = []
        if "day_of_week" in values:
            parts.append(values["day_of_week"])
        month, day = values.get("month"), values.get("day")
        if isinstance(month, int) and 1 <= month <= 12:
            parts.append(calendar.month_name[month])
        elif month is not None:
            parts.append(f"month {month}")
        if day is not None:
            parts.append(str(day) if month is not None else f"day {day}")
        if "week" in values:
            parts.append(f"week {values['week']}")
        if "year" in values:
            parts.append(str(values["year"]))
        for level in ("period_of_day", "time"):
            if level in values:
                parts.append(values[level])
        return " ".join(parts)


@dataclass(frozen=True)
class RelativeTime:
    """A time expression relative to the speaking time, e.g. two weeks ago.

    ``dow`` names the target weekday for the ``day_of_week`` unit and
    ``period`` the target period for the ``period_of_day`` unit.
    """

    unit: str
    offset: int
    dow: Optional[str] = None
    period: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, "unit", level_name(self.unit))
        if self.dow is not None:
            object.__setattr__(self, "dow", normalize_weekday(self.dow))
        if self.period is not None and self.period not in PERIODS:
            raise ValueError(f"unknown period of day {self.period!r}")

    def to_json(self) -> dict:
        out = {"kind": "relative", "unit": self.unit, "offset": self.offset}
        if self.dow is not None:
            out["dow"] = self.dow
        if self.period is not None:
            out["period"] = self.period
        return out


TimeExpression = Union[TimeDescription, RelativeTime]


def time_expression_from_json(obj: dict) -> TimeExpression:
    kind = obj.get("kind")
    if kind == "relative":
        if "unit" not in obj or "offset" not in obj:
            raise ValueError("relative time expression needs 'unit' and 'offset'")
        return RelativeTime(obj["unit"], int(obj["offset"]), obj.get("dow"), obj.get("period"))
    if kind != "absolute":
        raise ValueError(f"time expression kind must be 'absolute' or 'relative', got {kind!r}")
    unknown = set(obj) - {"kind", "year", "month", "week", "day", "dow", "period", "time", "from_to"}
    if unknown:
        raise ValueError(f"unknown time expression fields: {sorted(unknown)}")
    kwargs = {k: obj[k] for k in ("year", "month", "week", "day", "dow", "period", "time") if obj.get(k) is not None}
    if obj.get("from_to") is not None:
        ft = obj["from_to"]
        kwargs["from_to"] = FromTo(ft["level"], int(ft["lo"]), int(ft["hi"]))
    desc = TimeDescription(**kwargs)
    if desc.is_empty:
        raise ValueError("absolute time expression has no components")
    return desc


def time_expression_to_json(expr: TimeExpression) -> dict:
    return expr.to_json()


# ---------------------------------------------------------------------------
# relative resolution


def _anchor_date(speaking_time) -> dt.date:
    if isinstance(speaking_time, dt.datetime):
        return speaking_time.date()
    if isinstance(speaking_time, dt.date):
        return speaking_time
    raise TypeError(f"speaking time must be a date or datetime, got {type(speaking_time).__name__}")


def _day_desc(d: dt.date, **extra) -> TimeDescription:
    return TimeDescription(year=d.year, month=d.month, day=d.day, **extra)


def resolve_relative(expr: RelativeTime, speaking_time) -> TimeDescription:
    """Resolve a relative expression into an absolute description at its unit level.

    >>> resolve_relative(RelativeTime("week", -2), dt.date(1996, 6, 19))
    TimeDescription(year=1996, month=None, week=23, day=None, dow=None, period=None, time=None, from_to=None)
    """
    if not isinstance(expr, RelativeTime):
        raise TypeError("resolve_relative expects a RelativeTime")
    anchor = _anchor_date(speaking_time)
    k = expr.offset
    unit = expr.unit

    if unit == "year":
        return TimeDescription(year=anchor.year + k)
    if unit == "month":
        total = anchor.year * 12 + (anchor.month - 1) + k
        return TimeDescription(year=total // 12, month=total % 12 + 1)
    if unit == "week":
        iso = (anchor + dt.timedelta(weeks=k)).isocalendar()
        return TimeDescription(year=iso[0], week=iso[1])
    if unit == "day":
        return _day_desc(anchor + dt.timedelta(days=k))
    if unit == "day_of_week":
        wd = anchor.weekday()
        target = WEEKDAYS.index(expr.dow) if expr.dow else wd
        if k > 0:
            delta = (target - wd) % 7 or 7
            day = anchor + dt.timedelta(days=delta + 7 * (k - 1))
        elif k < 0:
            delta = (wd - target) % 7 or 7
            day = anchor - dt.timedelta(days=delta + 7 * (-k - 1))
        else:
            day = anchor + dt.timedelta(days=target - wd)
        return _day_desc(day, dow=WEEKDAYS[day.weekday()])
    if unit == "period_of_day":
        period = expr.period
        if period is None:
            if not isinstance(speaking_time, dt.datetime):
                raise ValueError("period_of_day offset needs a clock time in the speaking time or a target period")
            period = period_of(speaking_time.time())
            if period is None:
                raise ValueError("speaking time lies outside morning/afternoon/evening")
        return _day_desc(anchor + dt.timedelta(days=k), period=period)
    if unit == "time":
        if not isinstance(speaking_time, dt.datetime):
            raise ValueError("hour offsets need a speaking time with a clock time")
        moved = speaking_time + dt.timedelta(hours=k)
        return _day_desc(moved.date(), time=f"{moved.hour:02d}:{moved.minute:02d}")
    raise ValueError(f"unsupported unit {unit!r}")


# ---------------------------------------------------------------------------
# plausibility


@dataclass(frozen=True)
class Verdict:
    plausible: bool
    reason: Optional[str] = None
    level: Optional[str] = None

    def __bool__(self):
        return self.plausible


PLAUSIBLE = Verdict(True)


def _month_length(year: int, month: int) -> int:
    return calendar.monthrange(year, month)[1]


def check_plausibility(desc: TimeDescription, reference_year: int) -> Verdict:
    """Return the first calendar violation in ``desc``, or a plausible verdict.

    ``reference_year`` stands in for a missing year (leap years, weekdays).
    """
    year = desc.year if desc.year is not None else reference_year
    ft = desc.from_to

    if desc.month is not None and not 1 <= desc.month <= 12:
        return Verdict(False, f"month {desc.month} does not exist", "month")
    if ft is not None and ft.level == "month":
        if not (1 <= ft.lo <= 12 and 1 <= ft.hi <= 12):
            return Verdict(False, f"month interval {ft} leaves 1..12", "month")

    n_weeks = weeks_in_year(year)
    if desc.week is not None and not 1 <= desc.week <= n_weeks:
        return Verdict(False, f"week {desc.week} out of range ({year} has {n_weeks} ISO weeks)", "week")
    if ft is not None and ft.level == "week":
        if not (1 <= ft.lo <= n_weeks and 1 <= ft.hi <= n_weeks):
            return Verdict(False, f"week interval {ft} out of range ({year} has {n_weeks} ISO weeks)", "week")

    if desc.month is not None:
        last = _month_length(year, desc.month)
        what = calendar.month_name[desc.month]
    else:
        last, what = 31, "no month"
    if desc.day is not None and not 1 <= desc.day <= last:
        reason = f"{what} has {last} days" if desc.month is not None else f"day {desc.day} does not exist"
        return Verdict(False, reason, "day")
    if ft is not None and ft.level == "day":
        if not 1 <= ft.lo <= last:
            return Verdict(False, f"interval start {ft.lo} invalid: {what} has {last} days", "day")
        if not 1 <= ft.hi <= last:
            return Verdict(False, f"interval end {ft.hi} invalid: {what} has {last} days", "day")
    if ft is not None and ft.lo > ft.hi:
        return Verdict(False, f"interval {ft} is reversed", ft.level)

    if desc.dow is not None and desc.month is not None and desc.day is not None:
        actual = WEEKDAYS[dt.date(year, desc.month, desc.day).weekday()]
        if actual != desc.dow:
            return Verdict(False, f"{year}-{desc.month:02d}-{desc.day:02d} is a {actual}, not {desc.dow}", "day_of_week")

    if desc.time is not None:
        h, m = clock_minutes(desc.time)
        if not (0 <= h <= 23 and 0 <= m <= 59):
            return Verdict(False, f"clock time {desc.time} does not exist", "time")
        if desc.period is not None:
            lo, hi = PERIODS[desc.period]
            if not lo <= h * 60 + m <= hi:
                return Verdict(False, f"{desc.time} is not in the {desc.period}", "period_of_day")
    return PLAUSIBLE


# ---------------------------------------------------------------------------
# successor words


class Successor(str, enum.Enum):
    NEXT = "next"
    FOLLOWING = "following"


def _position(desc: TimeDescription, anchor: dt.date) -> tuple[int, int]:
    """(referent position, anchor position) at the referent's finest comparable unit."""
    if desc.day is not None:
        if desc.year is not None and desc.month is not None:
            ref = dt.date(desc.year, desc.month, desc.day)
        elif desc.month is not None:
            year = anchor.year if (desc.month, desc.day) >= (anchor.month, anchor.day) else anchor.year + 1
            ref = dt.date(year, desc.month, desc.day)
        else:
            # bare day of month: this month if still ahead, else the next one
            year, month = anchor.year, anchor.month
            if desc.day < anchor.day:
                year, month = (year + 1, 1) if month == 12 else (year, month + 1)
            ref = dt.date(year, month, desc.day)
        return ref.toordinal(), anchor.toordinal()
    if desc.dow is not None:
        delta = (WEEKDAYS.index(desc.dow) - anchor.weekday()) % 7 or 7
        return (anchor + dt.timedelta(days=delta)).toordinal(), anchor.toordinal()
    if desc.week is not None:
        iso_year, iso_week, _ = anchor.isocalendar()
        year = desc.year
        if year is None:
            year = iso_year if desc.week >= iso_week else iso_year + 1
        ref = dt.date.fromisocalendar(year, desc.week, 1).toordinal() // 7
        return ref, dt.date.fromisocalendar(iso_year, iso_week, 1).toordinal() // 7
    if desc.month is not None:
        year = desc.year
        if year is None:
            year = anchor.year if desc.month >= anchor.month else anchor.year + 1
        return year * 12 + desc.month - 1, anchor.year * 12 + anchor.month - 1
    if desc.year is not None:
        return desc.year, anchor.year
    raise ValueError(f"referent {desc} is not comparable to the speaking time")


def classify_successor(referent: TimeDescription, speaking_time) -> Successor:
    """``next`` if the referent is the unit immediately after the speaking time, else ``following``."""
    ref, anchor = _position(referent, _anchor_date(speaking_time))
    return Successor.NEXT if ref == anchor + 1 else Successor.FOLLOWING


# ---------------------------------------------------------------------------
# the hierarchy


class Stance(str, enum.Enum):
    PROPOSED = "proposed"
    REJECTED = "rejected"
    ACCEPTED = "accepted"


@dataclass(frozen=True)
class Attitude:
    stance: Stance
    speaker: str
    turn_index: int
    implicit: bool = False

    def __str__(self):
        flag = ",implicit" if self.implicit else ""
        return f"{self.stance.value}({self.speaker}@{self.turn_index}{flag})"


@dataclass(eq=False)
class ThematicNode:
    level: str
    value: ComponentValue
    attitudes: list[Attitude] = field(default_factory=list)
    children: list["ThematicNode"] = field(default_factory=list)

    @property
    def latest(self) -> Optional[Attitude]:
        return self.attitudes[-1] if self.attitudes else None

    def add_attitude(self, attitude: Attitude):
        if self.attitudes and attitude.turn_index < self.attitudes[-1].turn_index:
            raise ValueError("attitudes must be recorded in turn order")
        self.attitudes.append(attitude)

    def matches(self, level: str, value) -> bool:
        return self.level == level and self.value == value


Path = tuple[int, ...]


def _compatible(a, b) -> bool:
    """Equal values, or interval containment in either direction."""
    if a == b:
        return True
    if isinstance(a, FromTo) and not isinstance(b, str):
        return a.contains(b)
    if isinstance(b, FromTo) and not isinstance(a, str):
        return b.contains(a)
    return False


@dataclass
class _Plan:
    root: Optional[int]  # None: a fresh root is needed
    prefix: Path  # existing nodes that are reused
    create: list  # components still to create below prefix
    deepest_level: str
    deepest_value: ComponentValue


class ThematicMemory:
    """Negotiated dates, one root per date, each with a component hierarchy."""

    def __init__(self):
        self.roots: list[ThematicNode] = []
        self.focus: Optional[Path] = None

    # -- navigation ---------------------------------------------------------

    def node(self, path: Path) -> ThematicNode:
        if not path:
            raise IndexError("empty path")
        node = self.roots[path[0]]
        for i in path[1:]:
            node = node.children[i]
        return node

    def _chain(self, path: Path) -> list[ThematicNode]:
        node = self.roots[path[0]]
        out = [node]
        for i in path[1:]:
            node = node.children[i]
            out.append(node)
        return out

    def walk(self):
        """Yield ``(path, node)`` in preorder, roots excluded."""

        def rec(node, path):
            for i, child in enumerate(node.children):
                p = path + (i,)
                yield p, child
                yield from rec(child, p)

        for r, root in enumerate(self.roots):
            yield from rec(root, (r,))

    # -- threading ------------------------------------------------------------

    def _plan(self, desc: TimeDescription) -> _Plan:
        comps = desc.components()
        if not comps:
            raise ValueError("cannot insert an empty time description")
        deepest_level, deepest_value = comps[-1]
        if not self.roots:
            return _Plan(None, (), comps, deepest_level, deepest_value)

        root_idx = self.focus[0] if self.focus else len(self.roots) - 1
        path: Path = (root_idx,)
        node = self.roots[root_idx]
        first_rank = LEVEL_RANK[comps[0][0]]

        # follow the focus while it is coarser than what the description names
        followed_all = True
        if self.focus:
            for i in self.focus[1:]:
                child = node.children[i]
                if LEVEL_RANK[child.level] >= first_rank:
                    followed_all = False
                    break
                node, path = child, path + (i,)
        if followed_all:
            while len(node.children) == 1 and LEVEL_RANK[node.children[0].level] < first_rank:
                node, path = node.children[0], path + (0,)

        for n, (level, value) in enumerate(comps):
            hit = next((i for i, c in enumerate(node.children) if c.matches(level, value)), None)
            if hit is not None:
                node, path = node.children[hit], path + (hit,)
                continue
            same_level = [c for c in node.children if c.level == level]
            if LEVEL_RANK[level] <= _MONTH_RANK and same_level and not any(_compatible(c.value, value) for c in same_level):
                return _Plan(None, (), comps, deepest_level, deepest_value)
            return _Plan(root_idx, path, comps[n:], deepest_level, deepest_value)
        return _Plan(root_idx, path, [], deepest_level, deepest_value)

    def find(self, desc: TimeDescription) -> Optional[Path]:
        """Path of the node ``desc`` would land on if it already exists, else None."""
        if not self.roots:
            return None
        plan = self._plan(desc)
        if plan.root is None or plan.create:
            return None
        return plan.prefix

    def _execute(self, plan: _Plan) -> tuple[Path, list[Path]]:
        created: list[Path] = []
        if plan.root is None:
            self.roots.append(ThematicNode("root", len(self.roots)))
            path: Path = (len(self.roots) - 1,)
            created.append(path)
        else:
            path = plan.prefix
        node = self.node(path)
        for level, value in plan.create:
            node.children.append(ThematicNode(level, value))
            path = path + (len(node.children) - 1,)
            node = node.children[-1]
            created.append(path)
        return path, created

    def insert(self, desc: TimeDescription, stance, speaker: str, turn_index: int) -> list[Path]:
        """Thread ``desc`` into the hierarchy and record the attitude at its deepest node.

        Returns the paths of nodes created or annotated; the focus moves to the
        deepest node.  A conflict at month level or coarser opens a new root.
        """
        stance = Stance(stance)
        target, created = self._execute(self._plan(desc))
        affected = list(created)
        if target not in affected:
            affected.append(target)
        self._record(target, stance, speaker, turn_index, affected)
        self.focus = target
        return affected

    def _record(self, path: Path, stance: Stance, speaker, turn_index, affected: list[Path]):
        self.node(path).add_attitude(Attitude(stance, speaker, turn_index))
        if stance is not Stance.ACCEPTED:
            return
        # an acceptance settles the open proposals it specializes, below month level
        for depth in range(len(path) - 1, 1, -1):
            ancestor_path = path[:depth]
            ancestor = self.node(ancestor_path)
            if LEVEL_RANK[ancestor.level] <= _MONTH_RANK:
                break
            latest = ancestor.latest
            if latest is not None and latest.stance is Stance.REJECTED:
                break
            if latest is not None and latest.stance is Stance.ACCEPTED:
                continue
            ancestor.add_attitude(Attitude(Stance.ACCEPTED, speaker, turn_index))
            affected.append(ancestor_path)

    def mark_focus(self, stance, speaker: str, turn_index: int) -> list[Path]:
        """Record an attitude on the node under consideration; ``[]`` if there is none."""
        if self.focus is None or len(self.focus) < 2:
            return []
        affected = [self.focus]
        self._record(self.focus, Stance(stance), speaker, turn_index, affected)
        return affected

    # -- inferences -----------------------------------------------------------

    def infer_implicit_rejection(self, new_desc: TimeDescription, speaker: str, turn_index: int) -> list[Path]:
        """Mark competing proposals of the other speaker as implicitly rejected.

        Candidates are siblings of the place ``new_desc`` would occupy, at the
        same level, whose latest attitude is an unaccepted proposal made by the
        other participant and whose value is incompatible with the new one.
        """
        if not self.roots:
            return []
        plan = self._plan(new_desc)
        if plan.root is None:
            return []
        if plan.create:
            parent_path = plan.prefix
        else:
            parent_path = plan.prefix[:-1]
        if len(parent_path) < 1:
            return []
        parent = self.node(parent_path)
        marked = []
        for i, sib in enumerate(parent.children):
            if sib.level != plan.deepest_level or _compatible(sib.value, plan.deepest_value):
                continue
            latest = sib.latest
            if latest is None or latest.stance is not Stance.PROPOSED:
                continue
            if any(a.stance is Stance.ACCEPTED for a in sib.attitudes):
                continue
            last_proposal = next(a for a in reversed(sib.attitudes) if a.stance is Stance.PROPOSED)
            if last_proposal.speaker == speaker:
                continue
            sib.add_attitude(Attitude(Stance.REJECTED, speaker, turn_index, implicit=True))
            marked.append(parent_path + (i,))
        return marked

    def current_agreement(self) -> TimeDescription:
        """The most recently accepted node together with its accepted ancestors."""
        best = None
        for order, (path, node) in enumerate(self.walk()):
            latest = node.latest
            if latest is None or latest.stance is not Stance.ACCEPTED:
                continue
            key = (latest.turn_index, len(path), order)
            if best is None or key > best[0]:
                best = (key, path)
        if best is None:
            return TimeDescription()
        chain = []
        for node in reversed(self._chain(best[1])[1:]):
            latest = node.latest
            if latest is None or latest.stance is not Stance.ACCEPTED:
                break
            chain.append((node.level, node.value))
        return TimeDescription.from_components(reversed(chain))

    def describe(self, path: Path) -> TimeDescription:
        """Compose the components along a path into one description."""
        return TimeDescription.from_components((n.level, n.value) for n in self._chain(path)[1:])

    # -- export ---------------------------------------------------------------

    def dump(self) -> str:
        """Indented tree, one node per line: level, value, attitudes; ``*`` marks the focus."""
        lines = []

        def rec(node, path, depth):
            mark = "*" if path == self.focus else " "
            value = str(node.value)
            atts = " ".join(str(a) for a in node.attitudes)
            lines.append(f"{mark}{'  ' * depth}{node.level} {value}" + (f" [{atts}]" if atts else ""))
            for i, child in enumerate(node.children):
                rec(child, path + (i,), depth + 1)

        for r, root in enumerate(self.roots):
            mark = "*" if self.focus == (r,) else " "
            lines.append(f"{mark}date#{r}")
            for i, child in enumerate(root.children):
                rec(child, (r, i), 1)
        return "\n".join(lines)

