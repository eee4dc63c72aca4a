"""Shared helpers for the test suite."""

from __future__ import annotations

from typing import Callable, Iterable, Sequence


def interior_points(lo: float, hi: float, count: int) -> list:
    """count points strictly inside (lo, hi), evenly spaced."""
    step = (hi - lo) / (count + 1)
    return [lo + step * i for i in range(1, count + 1)]


def max_abs_diff(f: Callable[[float], float],
                 g: Callable[[float], float],
                 points: Iterable[float]) -> float:
    return max(abs(f(p) - g(p)) for p in points)


def max_abs(values: Sequence[float]) -> float:
    return max(abs(v) for v in values)


# dyadic probe grid including both endpoints
GRID65 = tuple(i / 64 for i in range(65))
# the same grid without the endpoints, for ratio-style probes
GRID63 = tuple(i / 64 for i in range(1, 64))
