"""Small named configurations used in tests, examples and the CLI."""

from __future__ import annotations

from fractions import Fraction

from .pointconfig import PointConfiguration, new_configuration

F = Fraction


def pentagon() -> PointConfiguration:
    """The five points (0,0), (1,0), (1,1), (1/2,3/2), (0,1), in that order."""
    return new_configuration(2, [(0, 0), (1, 0), (1, 1), (F(1, 2), F(3, 2)), (0, 1)])


def unit_square() -> PointConfiguration:
    """(0,0), (1,0), (0,1), (1,1)."""
    return new_configuration(2, [(0, 0), (1, 0), (0, 1), (1, 1)])


def grid(size: int = 3) -> PointConfiguration:
    """The points {0..size-1}^2, listed row by row."""
    return new_configuration(2, [(x, y) for y in range(size) for x in range(size)])


def segment(*points) -> PointConfiguration:
    """Points on the line; defaults to {0, 1}."""
    pts = points or (0, 1)
    return new_configuration(1, [(F(p),) if not isinstance(p, float) else (p,) for p in pts])


NAMED = {
    "pentagon": pentagon,
    "square": unit_square,
    "grid3": grid,
    "segment": segment,
}
