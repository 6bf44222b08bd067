"""Values of characteristic functions.

Two representations coexist.  :class:`Exact` stores a nonnegative rational
modulus together with a rational angle in [0, 1), so that products of the
constructed functions (levels 0, c, 1 and rational rotations) stay exact and
equalities are decided without tolerances.  :class:`Approx` wraps a Python
complex and is produced only by Gaussian factors or user-supplied floats.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from .solenoid import Rational, as_rational, rational_str

DEFAULT_TOLERANCE = 1e-9


@dataclass(frozen=True)
class Exact:
    modulus: Fraction
    angle: Fraction = Fraction(0)

    def __post_init__(self):
        m = as_rational(self.modulus)
        if m < 0:
            raise ValueError("modulus must be nonnegative; encode signs in the angle")
        a = Fraction(0) if m == 0 else as_rational(self.angle) % 1
        object.__setattr__(self, "modulus", m)
        object.__setattr__(self, "angle", a)

    @classmethod
    def rational(cls, q: Rational) -> "Exact":
        q = as_rational(q)
        return cls(abs(q), Fraction(1, 2) if q < 0 else Fraction(0))

    @classmethod
    def phase(cls, angle: Rational) -> "Exact":
        return cls(Fraction(1), as_rational(angle))

    @property
    def exact(self) -> bool:
        return True

    @property
    def is_zero(self) -> bool:
        return self.modulus == 0

    def __mul__(self, other: "Value") -> "Value":
        if isinstance(other, Exact):
            return Exact(self.modulus * other.modulus, self.angle + other.angle)
        if isinstance(other, Approx):
            return Approx(self.to_complex() * other.z)
        return NotImplemented

    def __pow__(self, k: int) -> "Exact":
        return Exact(self.modulus**k, self.angle * k)

    def conjugate(self) -> "Exact":
        return Exact(self.modulus, -self.angle)

    def abs2(self) -> "Exact":
        return Exact(self.modulus * self.modulus)

    def abs(self) -> "Exact":
        return Exact(self.modulus)

    def to_complex(self) -> complex:
        if self.modulus == 0:
            return 0j
        # exact quarter turns avoid 1e-17 noise in the real/imaginary parts
        quarter = {Fraction(0): 1, Fraction(1, 4): 1j, Fraction(1, 2): -1, Fraction(3, 4): -1j}
        unit = quarter.get(self.angle)
        if unit is None:
            unit = cmath.exp(2j * math.pi * float(self.angle))
        return float(self.modulus) * unit

    def to_json(self):
        if self.angle == 0:
            return rational_str(self.modulus)
        return {"modulus": rational_str(self.modulus), "angle": rational_str(self.angle)}

    def __str__(self) -> str:
        if self.angle == 0:
            return str(self.modulus)
        return f"{self.modulus}*e(2pi i {self.angle})"


@dataclass(frozen=True)
class Approx:
    z: complex

    @property
    def exact(self) -> bool:
        return False

    @property
    def is_zero(self) -> bool:
        return self.z == 0

    def __mul__(self, other: "Value") -> "Approx":
        if isinstance(other, (Exact, Approx)):
            return Approx(self.z * other.to_complex())
        return NotImplemented

    def __pow__(self, k: int) -> "Approx":
        return Approx(self.z**k)

    def conjugate(self) -> "Approx":
        return Approx(self.z.conjugate())

    def abs2(self) -> "Approx":
        return Approx(complex(abs(self.z) ** 2))

    def abs(self) -> "Approx":
        return Approx(complex(abs(self.z)))

    def to_complex(self) -> complex:
        return complex(self.z)

    def to_json(self):
        return {"re": self.z.real, "im": self.z.imag}

    def __str__(self) -> str:
        return f"{self.z:.12g}"


Value = Union[Exact, Approx]

ONE = Exact(Fraction(1))
ZERO = Exact(Fraction(0))


def value_from_json(data) -> Value:
    if isinstance(data, (int, str, Fraction)):
        return Exact.rational(data)
    if isinstance(data, float):
        return Approx(complex(data))
    if "angle" in data:
        return Exact(as_rational(data.get("modulus", "1")), as_rational(data["angle"]))
    return Approx(complex(float(data["re"]), float(data.get("im", 0.0))))


def coerce_value(v) -> Value:
    """Accept Values, rationals, floats and complex numbers."""
    if isinstance(v, (Exact, Approx)):
        return v
    if isinstance(v, (int, Fraction, str)):
        return Exact.rational(v)
    if isinstance(v, (float, complex)):
        return Approx(complex(v))
    return value_from_json(v)


def product(values) -> Value:
    acc: Value = ONE
    for v in values:
        acc = acc * v
    return acc


def values_equal(a: Value, b: Value, tolerance: float = DEFAULT_TOLERANCE) -> bool:
    if isinstance(a, Exact) and isinstance(b, Exact):
        return a == b
    return abs(a.to_complex() - b.to_complex()) <= tolerance


def distance(a: Value, b: Value) -> float:
    if isinstance(a, Exact) and isinstance(b, Exact) and a == b:
        return 0.0
    return abs(a.to_complex() - b.to_complex())
