"""Input validation helpers shared by the estimators and the engine."""

from __future__ import annotations

from collections.abc import Iterable, Sequence

from .base import DirectionTag, InventoryError


def check_positive_int(value, name: str, minimum: int = 1) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise TypeError(f"{name} must be an integer, got {type(value).__name__}")
    if value < minimum:
        raise ValueError(f"{name} must be >= {minimum}, got {value}")
    return value


def check_fraction(value, name: str) -> float:
    value = float(value)
    if not 0.0 < value < 1.0:
        raise ValueError(f"{name} must lie strictly between 0 and 1, got {value}")
    return value


def check_threshold(value, name: str = "threshold") -> float:
    value = float(value)
    if not 0.0 < value <= 1.0:
        raise ValueError(f"{name} must lie in (0, 1], got {value}")
    return value


def check_acts(acts: Iterable[str], inventory: Iterable[str]) -> list[str]:
    inventory = set(inventory)
    acts = list(acts)
    for act in acts:
        if act not in inventory:
            raise InventoryError(f"act {act!r} is not in the act inventory")
    return acts


def check_history(history: Sequence, inventory: Iterable[str]) -> tuple[tuple[str, DirectionTag], ...]:
    """Normalize a prediction history to a tuple of ``(act, DirectionTag)`` pairs.

    Bare act strings are accepted and tagged ``speaker_change``.
    """
    inventory = set(inventory)
    out = []
    for item in history:
        if isinstance(item, str):
            act, tag = item, DirectionTag.SPEAKER_CHANGE
        else:
            act, tag = item
            tag = DirectionTag(tag)
        if act not in inventory:
            raise InventoryError(f"history act {act!r} is not in the act inventory")
        out.append((act, tag))
    return tuple(out)
