"""Finitely described characteristic functions on H_a.

Every variant is an immutable dataclass with a ``value(y)`` method giving
its closed form at a rational y.  :func:`evaluate` adds the domain check
against the ambient :class:`SupernaturalSpec`.

Variants
--------
Idempotent          phase(y) on a subgroup S (= A(Y, K)), 0 off S: m_K * E_x
TwoLevelOnSubgroup  1 on pH, c on H \\ pH, 0 off H
FiniteSupport       finitely many values, implicit 1 at 0
Gaussian            phase(y) * exp(-sigma * y^2)
ModulusSquare       |base(y)|^2, the transform of mu * mu-bar
Product             pointwise product, i.e. convolution of the distributions
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .box import TestBox
from .errors import ClosureViolation, DomainError, NotPeriodic, PreconditionViolated
from .solenoid import (
    INF,
    Rational,
    Subgroup,
    SupernaturalSpec,
    as_rational,
    contains,
    fg_generator,
    rational_str,
)
from .values import (
    DEFAULT_TOLERANCE,
    ONE,
    ZERO,
    Approx,
    Exact,
    Value,
    coerce_value,
    distance,
    value_from_json,
    values_equal,
)


@dataclass(frozen=True)
class PhaseChar:
    """The character y -> exp(2 pi i * angle * y / unit).

    On the cyclic group generated by ``unit`` this is the single rotation
    ``angle`` per generator step.  Angles are exact, so phases compose
    exactly.
    """

    angle: Fraction = Fraction(0)
    unit: Fraction = Fraction(1)

    def __post_init__(self):
        unit = as_rational(self.unit)
        if unit == 0:
            raise ValueError("unit must be nonzero")
        object.__setattr__(self, "unit", unit)
        object.__setattr__(self, "angle", as_rational(self.angle) % 1)

    @property
    def trivial(self) -> bool:
        return self.angle == 0

    def angle_at(self, y: Fraction) -> Fraction:
        return (self.angle * y / self.unit) % 1

    def __call__(self, y: Fraction) -> Exact:
        return Exact.phase(self.angle_at(y))

    def scaled(self, k: int) -> "PhaseChar":
        return PhaseChar(self.angle * k, self.unit)

    def to_json(self) -> dict:
        return {"angle": rational_str(self.angle), "unit": rational_str(self.unit)}

    @classmethod
    def from_json(cls, data) -> "PhaseChar":
        if data is None:
            return cls()
        return cls(as_rational(data["angle"]), as_rational(data.get("unit", "1")))


class CharFn:
    """Base class; subclasses implement ``value`` and ``to_json``."""

    def value(self, y: Fraction) -> Value:
        raise NotImplementedError

    def __call__(self, y: Rational) -> Value:
        return self.value(as_rational(y))

    def to_json(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class Idempotent(CharFn):
    support: Subgroup
    phase: PhaseChar = field(default_factory=PhaseChar)

    def value(self, y: Fraction) -> Value:
        if y in self.support:
            return self.phase(y)
        return ZERO

    def to_json(self) -> dict:
        return {"kind": "idempotent", "support": self.support.to_json(), "phase": self.phase.to_json()}


@dataclass(frozen=True)
class TwoLevelOnSubgroup(CharFn):
    """1 on p*H, ``level`` on H \\ p*H, 0 off H.

    ``strict=False`` skips the 0 < level < 1 check; only used to feed
    deliberately invalid functions to the positivity checker.
    """

    outer: Subgroup
    inner_prime: int
    level: Fraction
    strict: bool = field(default=True, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "level", as_rational(self.level))
        if self.strict and not (0 < self.level < 1):
            raise ValueError(f"level must lie in (0, 1), got {self.level}")

    @property
    def inner(self) -> Subgroup:
        return self.outer.times(self.inner_prime)

    def value(self, y: Fraction) -> Value:
        if y not in self.outer:
            return ZERO
        if y in self.inner:
            return ONE
        return Exact.rational(self.level)

    def to_json(self) -> dict:
        return {
            "kind": "two_level",
            "outer": self.outer.to_json(),
            "inner_prime": self.inner_prime,
            "level": rational_str(self.level),
        }


@dataclass(frozen=True)
class FiniteSupport(CharFn):
    """Finitely supported function; the value at 0 is 1 unless overridden.

    Overriding 0 or breaking Hermitian symmetry requires ``strict=False``
    (mutation tests do this on purpose).
    """

    entries: tuple[tuple[Fraction, Value], ...]
    strict: bool = field(default=True, compare=False, repr=False)

    def __init__(self, entries: Mapping | Iterable, strict: bool = True):
        items = entries.items() if isinstance(entries, Mapping) else entries
        table = {}
        for y, v in items:
            table[as_rational(y)] = coerce_value(v)
        if strict:
            if 0 in table and table[Fraction(0)] != ONE:
                raise ValueError("value at 0 must be 1")
            for y, v in table.items():
                if abs(v.to_complex()) > 1 + DEFAULT_TOLERANCE:
                    raise ValueError(f"|value| > 1 at {y}")
                w = table.get(-y, ZERO)
                if not values_equal(w, v.conjugate()):
                    raise ValueError(f"Hermitian symmetry fails at {y}")
        table.setdefault(Fraction(0), ONE)
        object.__setattr__(self, "entries", tuple(sorted(table.items())))
        object.__setattr__(self, "strict", strict)

    @property
    def table(self) -> dict[Fraction, Value]:
        return dict(self.entries)

    @property
    def support(self) -> list[Fraction]:
        return [y for y, v in self.entries if not v.is_zero]

    def value(self, y: Fraction) -> Value:
        for z, v in self.entries:
            if z == y:
                return v
        return ZERO

    def with_value(self, y: Rational, v) -> "FiniteSupport":
        """Copy with one entry replaced; symmetry is not re-imposed."""
        table = self.table
        table[as_rational(y)] = coerce_value(v)
        return FiniteSupport(table, strict=False)

    def to_json(self) -> dict:
        return {
            "kind": "finite_support",
            "entries": [{"point": rational_str(y), "value": v.to_json()} for y, v in self.entries],
        }


@dataclass(frozen=True)
class Gaussian(CharFn):
    sigma: float
    phase: PhaseChar = field(default_factory=PhaseChar)

    def __post_init__(self):
        if self.sigma < 0:
            raise ValueError("sigma must be nonnegative")

    def value(self, y: Fraction) -> Value:
        if self.sigma == 0:
            return self.phase(y)
        return Approx(self.phase(y).to_complex() * math.exp(-self.sigma * float(y) ** 2))

    def to_json(self) -> dict:
        return {"kind": "gaussian", "sigma": self.sigma, "phase": self.phase.to_json()}


@dataclass(frozen=True)
class ModulusSquare(CharFn):
    base: CharFn

    def value(self, y: Fraction) -> Value:
        return self.base.value(y).abs2()

    def to_json(self) -> dict:
        return {"kind": "modulus_square", "base": self.base.to_json()}


@dataclass(frozen=True)
class Product(CharFn):
    factors: tuple[CharFn, ...]

    def value(self, y: Fraction) -> Value:
        acc: Value = ONE
        for f in self.factors:
            acc = acc * f.value(y)
            if acc.is_zero:
                return ZERO
        return acc

    def to_json(self) -> dict:
        return {"kind": "product", "factors": [f.to_json() for f in self.factors]}


def constant_one() -> Idempotent:
    """Transform of E_0: the trivial character."""
    return Idempotent(Subgroup(SupernaturalSpec(INF)))


def haar() -> Idempotent:
    """Transform of Haar measure on the whole group: indicator of {0}."""
    return Idempotent(Subgroup(SupernaturalSpec(0), Fraction(0)))


def character(angle: Rational, unit: Rational = 1) -> Idempotent:
    """Transform of a degenerate distribution E_x."""
    return Idempotent(Subgroup(SupernaturalSpec(INF)), PhaseChar(as_rational(angle), as_rational(unit)))


def charfn_from_json(data: Mapping) -> CharFn:
    kind = data["kind"]
    if kind == "idempotent":
        return Idempotent(Subgroup.from_json(data["support"]), PhaseChar.from_json(data.get("phase")))
    if kind == "two_level":
        return TwoLevelOnSubgroup(Subgroup.from_json(data["outer"]), int(data["inner_prime"]), as_rational(data["level"]))
    if kind == "finite_support":
        entries = {as_rational(e["point"]): value_from_json(e["value"]) for e in data["entries"]}
        try:
            return FiniteSupport(entries)
        except ValueError:
            return FiniteSupport(entries, strict=False)
    if kind == "gaussian":
        return Gaussian(float(data["sigma"]), PhaseChar.from_json(data.get("phase")))
    if kind == "modulus_square":
        return ModulusSquare(charfn_from_json(data["base"]))
    if kind == "product":
        return Product(tuple(charfn_from_json(f) for f in data["factors"]))
    raise ValueError(f"unknown CharFn kind {kind!r}")


# -- operations --------------------------------------------------------------


def evaluate(f: CharFn, y: Rational, spec: SupernaturalSpec) -> Value:
    y = as_rational(y)
    if not contains(spec, y):
        raise DomainError(f"{y} is not in H_a for spec {spec}")
    return f.value(y)


def product(fs: Sequence[CharFn]) -> CharFn:
    """Transform of the convolution of the underlying distributions."""
    fs = list(fs)
    if not fs:
        return constant_one()
    if len(fs) == 1:
        return fs[0]
    flat: list[CharFn] = []
    for f in fs:
        flat.extend(f.factors if isinstance(f, Product) else (f,))
    return Product(tuple(flat))


def modulus_square(f: CharFn) -> CharFn:
    """|f|^2, kept in closed form where the variant allows it."""
    if isinstance(f, Idempotent):
        return Idempotent(f.support)
    if isinstance(f, TwoLevelOnSubgroup):
        return TwoLevelOnSubgroup(f.outer, f.inner_prime, f.level**2, strict=f.strict)
    if isinstance(f, Gaussian):
        return Gaussian(2 * f.sigma)
    if isinstance(f, FiniteSupport):
        return FiniteSupport({y: v.abs2() for y, v in f.entries}, strict=f.strict)
    if isinstance(f, Product):
        return Product(tuple(modulus_square(g) for g in f.factors))
    return ModulusSquare(f)


def _is_one(v: Value, tolerance: float) -> bool:
    return values_equal(v, ONE, tolerance)


def _box_values(f: CharFn, box: TestBox, spec: SupernaturalSpec | None) -> dict[Fraction, Value]:
    if spec is None:
        return {y: f.value(y) for y in box}
    return {y: evaluate(f, y, spec) for y in box}


def _closure_failures(members: set, box: TestBox) -> list[tuple[str, Fraction, Fraction]]:
    bad = []
    for a in sorted(members):
        if -a in box and -a not in members:
            bad.append(("neg", a, a))
        for b in sorted(members):
            s = a + b
            if s in box and s not in members:
                bad.append(("add", a, b))
    return bad


def closed_in_box(members: set, box: TestBox) -> bool:
    return not _closure_failures(members, box)


def invariance_subgroup(
    f: CharFn, box: TestBox, spec: SupernaturalSpec | None = None, tolerance: float = DEFAULT_TOLERANCE
) -> set[Fraction]:
    """F_mu restricted to the box: the points where f equals 1.

    Raises ClosureViolation if that set is not closed inside the box or f is
    not invariant under its shifts, both of which hold for any genuine
    characteristic function.
    """
    vals = _box_values(f, box, spec)
    ones = {y for y, v in vals.items() if _is_one(v, tolerance)}
    bad = _closure_failures(ones, box)
    if bad:
        raise ClosureViolation(f"F_mu not closed in box: {bad[0]}")
    for h in ones:
        for y in box:
            if y + h in box and not values_equal(vals[y + h], vals[y], tolerance):
                raise ClosureViolation(f"f({y}+{h}) != f({y})")
    return ones


def periodic_restriction(
    f: CharFn, generator: Rational, period: int, spec: SupernaturalSpec | None = None, tolerance: float = DEFAULT_TOLERANCE
) -> list[Value]:
    """Values f(k*g) for k in range(period), after checking periodicity."""
    g = as_rational(generator)
    ev = (lambda y: f.value(y)) if spec is None else (lambda y: evaluate(f, y, spec))
    one_period = [ev(k * g) for k in range(period)]
    for k in range(-period, 2 * period):
        if not values_equal(ev(k * g), one_period[k % period], tolerance):
            raise NotPeriodic(f"f({k}*{g}) differs from f({k % period}*{g})")
    return one_period


def restriction_spectrum(values: Sequence[Value]) -> np.ndarray:
    """Normalised DFT of one period: the masses of the spectral measure."""
    arr = np.array([v.to_complex() for v in values], dtype=complex)
    return np.fft.fft(arr) / len(arr)


def pd_check_cyclic(
    f: CharFn,
    generator: Rational,
    period: int,
    tolerance: float = 1e-12,
    spec: SupernaturalSpec | None = None,
) -> bool:
    """Bochner/Herglotz test on the cyclic subgroup generated by ``generator``.

    A periodic function on Z is positive definite iff every DFT component of
    one period is nonnegative.
    """
    spectrum = restriction_spectrum(periodic_restriction(f, generator, period, spec))
    return bool(np.all(spectrum.real >= -tolerance) and np.all(np.abs(spectrum.imag) <= max(tolerance, 1e-12)))


def pd_check_finite_support(f: FiniteSupport, tolerance: float = 1e-12, samples: int = 4096) -> bool:
    """Positivity of a finitely supported function on H_a.

    The support spans a cyclic group g*Z (every finitely generated subgroup
    of Q is cyclic) and zero extension from g*Z preserves positive
    definiteness, so f is positive definite iff the trigonometric polynomial
    sum_k f(k g) e^{i k t} is nonnegative.  The polynomial is sampled on an
    even grid of ``samples`` points; a negative sample is a proof of
    failure, a pass is certified only up to the grid.
    """
    support = list(f.table)
    g = fg_generator(support).generator
    if g == 0:
        return bool(_is_one(f.value(Fraction(0)), tolerance))
    coeffs = {int(y / g): v.to_complex() for y, v in f.entries}
    radius = max(abs(k) for k in coeffs)
    size = max(samples, 4 * radius + 2)
    size += size % 2
    arr = np.zeros(size, dtype=complex)
    for k, c in coeffs.items():
        arr[k % size] += c
    # inverse DFT evaluates sum_k c_k e^{i k t} at t = 2 pi j / size
    poly = np.fft.ifft(arr) * size
    return bool(np.all(poly.real >= -tolerance) and np.all(np.abs(poly.imag) <= 1e-9))


def hermitian_defects(
    f: CharFn, points: Iterable[Rational], tolerance: float = DEFAULT_TOLERANCE
) -> list[Fraction]:
    """Points where f(-y) != conj f(y), f(0) != 1 or |f(y)| > 1."""
    bad = []
    for y in map(as_rational, points):
        v = f.value(y)
        if y == 0 and not _is_one(v, tolerance):
            bad.append(y)
        elif not values_equal(f.value(-y), v.conjugate(), tolerance) or abs(v.to_complex()) > 1 + tolerance:
            bad.append(y)
    return bad


def is_idempotent_on_box(
    f: CharFn, box: TestBox, spec: SupernaturalSpec | None = None, tolerance: float = DEFAULT_TOLERANCE
) -> bool:
    """|f| in {0, 1} on the box, with the modulus-one set a subgroup on
    which f is a character."""
    vals = _box_values(f, box, spec)
    unit = set()
    for y, v in vals.items():
        m = abs(v.to_complex()) if not isinstance(v, Exact) else v.modulus
        if isinstance(v, Exact):
            if m not in (0, 1):
                return False
        elif not (m <= tolerance or abs(m - 1) <= tolerance):
            return False
        if (isinstance(v, Exact) and m == 1) or (not isinstance(v, Exact) and abs(m - 1) <= tolerance):
            unit.add(y)
    if not closed_in_box(unit, box):
        return False
    for a in unit:
        for b in unit:
            if a + b in box and not values_equal(vals[a + b], vals[a] * vals[b], tolerance):
                return False
    return True


def is_gauss_idem_modulus_on_box(
    f: CharFn, box: TestBox, tolerance: float = DEFAULT_TOLERANCE, spec: SupernaturalSpec | None = None
) -> bool:
    """Box certificate for membership of |f| in the Gaussian * idempotent
    pattern.

    For such a distribution |f(y)| = exp(-sigma y^2) on a subgroup and 0 off
    it.  sigma is fitted at the first nonzero support point (smallest |y|).
    False certifies f is not in Gamma(X) * I(X); True is only consistency.
    """
    vals = _box_values(f, box, spec)
    mods = {y: abs(v.to_complex()) for y, v in vals.items()}
    support = {y for y, m in mods.items() if m > tolerance}
    nonzero = sorted((y for y in support if y != 0), key=lambda y: (abs(y), y))
    if len(nonzero) < 2:
        raise PreconditionViolated("box meets fewer than two nonzero support points")
    if not closed_in_box(support, box):
        return False
    y1 = nonzero[0]
    sigma = -math.log(mods[y1]) / float(y1) ** 2
    if sigma < -tolerance:
        return False
    return all(abs(mods[y] - math.exp(-sigma * float(y) ** 2)) <= tolerance for y in support)


def box_scan(f: CharFn, box: TestBox, spec: SupernaturalSpec) -> dict[Fraction, Value]:
    """All values of f on the box (domain-checked)."""
    return _box_values(f, box, spec)


def as_callable(f: CharFn, spec: SupernaturalSpec | None = None) -> Callable[[Fraction], Value]:
    if spec is None:
        return f.value
    return lambda y: evaluate(f, y, spec)


__all__ = [
    "PhaseChar",
    "CharFn",
    "Idempotent",
    "TwoLevelOnSubgroup",
    "FiniteSupport",
    "Gaussian",
    "ModulusSquare",
    "Product",
    "constant_one",
    "haar",
    "character",
    "charfn_from_json",
    "evaluate",
    "product",
    "modulus_square",
    "invariance_subgroup",
    "periodic_restriction",
    "restriction_spectrum",
    "pd_check_cyclic",
    "pd_check_finite_support",
    "hermitian_defects",
    "is_idempotent_on_box",
    "is_gauss_idem_modulus_on_box",
    "closed_in_box",
    "distance",
]
