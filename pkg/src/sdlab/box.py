from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Sequence

from .solenoid import Rational, as_rational, rational_str


@dataclass(frozen=True)
class TestBox:
    """Finite symmetric test set {sum c_i g_i : |c_i| <= bound} in Q.

    Duplicate sums are merged; ``points`` is sorted, so every enumeration
    over a box is deterministic.
    """

    __test__ = False  # not a pytest class

    generators: tuple[Fraction, ...]
    bound: int

    def __init__(self, generators: Sequence[Rational], bound: int):
        if bound < 1:
            raise ValueError("bound must be positive")
        if not generators:
            raise ValueError("need at least one generator")
        object.__setattr__(self, "generators", tuple(as_rational(g) for g in generators))
        object.__setattr__(self, "bound", int(bound))

    @cached_property
    def points(self) -> tuple[Fraction, ...]:
        rng = range(-self.bound, self.bound + 1)
        sums = {Fraction(0)}
        for g in self.generators:
            sums = {s + c * g for s in sums for c in rng}
        return tuple(sorted(sums))

    @cached_property
    def _point_set(self) -> frozenset:
        return frozenset(self.points)

    def __contains__(self, y) -> bool:
        return as_rational(y) in self._point_set

    def __iter__(self):
        return iter(self.points)

    def __len__(self) -> int:
        return len(self.points)

    def nonzero(self) -> list[Fraction]:
        """Nonzero points ordered by absolute value, then sign."""
        return sorted((y for y in self.points if y != 0), key=lambda y: (abs(y), y))

    def tuples(self, n: int):
        return itertools.product(self.points, repeat=n)

    def to_json(self) -> dict:
        return {"generators": [rational_str(g) for g in self.generators], "bound": self.bound}

    @classmethod
    def from_json(cls, data) -> "TestBox":
        return cls([as_rational(g) for g in data["generators"]], int(data["bound"]))
