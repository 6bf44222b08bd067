"""Exact arithmetic in the character group H_a of an a-adic solenoid.

H_a is the subgroup of Q consisting of fractions m / (a_0 a_1 ... a_n).  Up to
equality it only depends on the supernatural number prod(a_i), i.e. on the
height function p -> h_p, where h_p is the largest power of p dividing some
partial product (possibly infinite).  A rational y lies in H_a iff
v_p(denominator(y)) <= h_p for every prime p.

Elements of H_a are plain :class:`fractions.Fraction` values; multipliers
(the adjoints of f_k and their inverses) are nonzero fractions as well.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from typing import Iterable, Mapping, Sequence, Union

from sympy import factorint, isprime, nextprime
from sympy.core.intfunc import igcdex

from .errors import NotDivisible, NotMember

INF = math.inf

Rational = Union[int, str, Fraction]
Height = Union[int, float]  # nonnegative int or INF


def as_rational(x: Rational) -> Fraction:
    """Coerce ints, fractions and ``"num/den"`` strings to a Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"cannot interpret {x!r} as an exact rational")


def rational_str(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def valuation(n: int, p: int) -> int:
    """p-adic valuation of a nonzero integer."""
    if n == 0:
        raise ValueError("valuation of 0 is infinite")
    n = abs(n)
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def _check_height(h: Height) -> Height:
    if h == INF:
        return INF
    if isinstance(h, bool) or not isinstance(h, int) or h < 0:
        raise ValueError(f"height must be a nonnegative int or inf, got {h!r}")
    return h


@dataclass(frozen=True)
class SupernaturalSpec:
    """Finite description of the heights h_p of H_a.

    ``h_p = exceptions[p]`` when p is listed, else ``default``.  The
    constructor canonicalises: exceptions equal to the default are dropped
    and the remaining ones are stored sorted by prime.
    """

    default: Height = 0
    exceptions: tuple[tuple[int, Height], ...] = ()

    def __init__(self, default: Height = 0, exceptions: Mapping[int, Height] | Iterable[tuple[int, Height]] = ()):
        default = _check_height(default)
        items = dict(exceptions.items() if isinstance(exceptions, Mapping) else exceptions)
        canon = []
        for p, h in sorted(items.items()):
            p = int(p)
            if not isprime(p):
                raise ValueError(f"exception key {p} is not prime")
            h = _check_height(h)
            if h != default:
                canon.append((p, h))
        object.__setattr__(self, "default", default)
        object.__setattr__(self, "exceptions", tuple(canon))

    def height(self, p: int) -> Height:
        for q, h in self.exceptions:
            if q == p:
                return h
        return self.default

    def to_json(self) -> dict:
        enc = lambda h: "inf" if h == INF else h  # noqa: E731
        return {"default": enc(self.default), "exceptions": {str(p): enc(h) for p, h in self.exceptions}}

    @classmethod
    def from_json(cls, data: Mapping) -> "SupernaturalSpec":
        dec = lambda h: INF if h in ("inf", "∞", INF) else int(h)  # noqa: E731
        return cls(dec(data.get("default", 0)), {int(p): dec(h) for p, h in data.get("exceptions", {}).items()})

    @classmethod
    def parse(cls, text: str) -> "SupernaturalSpec":
        """Parse the compact CLI form, e.g. ``"1"``, ``"inf"``, ``"0;2:inf,3:1"``.

        A JSON object in the documented schema is accepted as well.
        """
        text = text.strip()
        if text.startswith("{"):
            import json

            return cls.from_json(json.loads(text))
        default_part, _, exc_part = text.partition(";")
        dec = lambda h: INF if h.strip().lower() in ("inf", "∞") else int(h)  # noqa: E731
        exceptions = {}
        for item in filter(None, (s.strip() for s in exc_part.split(","))):
            p, _, h = item.partition(":")
            exceptions[int(p)] = dec(h)
        return cls(dec(default_part) if default_part.strip() else 0, exceptions)

    def __str__(self) -> str:
        enc = lambda h: "inf" if h == INF else str(h)  # noqa: E731
        exc = ",".join(f"{p}:{enc(h)}" for p, h in self.exceptions)
        return enc(self.default) + (f";{exc}" if exc else "")


def contains(spec: SupernaturalSpec, y: Rational) -> bool:
    """Membership of a rational in H_a.  Integers are always members."""
    y = as_rational(y)
    den = y.denominator
    if den == 1:
        return True
    return all(v <= spec.height(p) for p, v in factorint(den).items())


def require_member(spec: SupernaturalSpec, y: Rational) -> Fraction:
    y = as_rational(y)
    if not contains(spec, y):
        raise NotMember(f"{y} is not in H_a for spec {spec}")
    return y


def divide(spec: SupernaturalSpec, y: Rational, k: int) -> Fraction:
    """Return the unique t in H_a with k*t == y, or raise NotDivisible."""
    y = require_member(spec, y)
    if k == 0:
        raise ValueError("division by zero")
    t = y / k
    if not contains(spec, t):
        raise NotDivisible(f"{y} is not in Y^({abs(k)})")
    return t


def halve(spec: SupernaturalSpec, y: Rational) -> Fraction:
    """y/2 when it lies in H_a; NotDivisible signals y is outside Y^(2)."""
    return divide(spec, y, 2)


def in_multiple_image(spec: SupernaturalSpec, y: Rational, k: int) -> bool:
    """Whether y belongs to Y^(k) = kY.  Y^(0) is the trivial subgroup."""
    y = require_member(spec, y)
    if k == 0:
        return y == 0
    return contains(spec, y / k)


def coset_mod_2k(spec: SupernaturalSpec, y: Rational, k: int = 1) -> int:
    """Class of y in Y / Y^(2^k) as a residue r in range(2**k).

    When h_2 is finite, Y / Y^(2^k) is cyclic of order 2^k generated by the
    class of 2^(-h_2) and ``y - r * 2^(-h_2)`` lies in Y^(2^k).  When h_2 is
    infinite every element is 2-divisible and the label is always 0.
    Label 0 for k=1 means "in Y^(2)"; label 0 for k=2 means "in Y^(4)".
    """
    y = require_member(spec, y)
    if k < 1:
        raise ValueError("k must be positive")
    h2 = spec.height(2)
    if h2 == INF or y == 0:
        return 0
    mod = 2**k
    # y * 2^h2 is a 2-adic integer: odd denominator after scaling
    z = y * Fraction(2) ** h2
    return z.numerator * pow(z.denominator, -1, mod) % mod


def is_automorphism(spec: SupernaturalSpec, r: Rational) -> bool:
    """Whether y -> r*y is an automorphism of H_a.

    Multiplication is injective on a torsion-free group; it is onto iff every
    prime dividing the numerator or denominator of r has infinite height.
    """
    r = as_rational(r)
    if r == 0:
        raise ValueError("multiplier must be nonzero")
    primes = set(factorint(abs(r.numerator))) | set(factorint(r.denominator))
    return all(spec.height(p) == INF for p in primes)


@dataclass(frozen=True)
class Classification:
    case: int
    witness_prime: int | None
    smallest_non_aut_prime: int | None

    def to_json(self) -> dict:
        return {
            "case": self.case,
            "witness_prime": self.witness_prime,
            "smallest_non_aut_prime": self.smallest_non_aut_prime,
        }


def _first_prime(pred) -> int:
    p = 2
    while not pred(p):
        p = nextprime(p)
    return p


def classify_solenoid(spec: SupernaturalSpec) -> Classification:
    """Case 1: no f_p is an automorphism.  Case 2: some f_p is.

    Only finitely many primes are exceptions, so each search below stops
    after at most len(exceptions) + 1 primes.
    """
    finite_exc = [p for p, h in spec.exceptions if h != INF]
    infinite_exc = [p for p, h in spec.exceptions if h == INF]
    if spec.default == INF:
        witness = _first_prime(lambda p: p not in finite_exc)
        non_aut = min(finite_exc) if finite_exc else None
    else:
        witness = min(infinite_exc) if infinite_exc else None
        non_aut = _first_prime(lambda p: p not in infinite_exc)
    return Classification(2 if witness is not None else 1, witness, non_aut)


@dataclass(frozen=True)
class FgSubgroup:
    """Finitely generated (hence cyclic) subgroup g*Z of Q; g = 0 is {0}."""

    generator: Fraction = Fraction(0)

    def __contains__(self, y: Rational) -> bool:
        y = as_rational(y)
        if self.generator == 0:
            return y == 0
        return (y / self.generator).denominator == 1


def fg_generator(gens: Sequence[Rational]) -> FgSubgroup:
    """Nonnegative generator of the subgroup spanned by ``gens``.

    gcd(a/b, c/d) = gcd of the numerators over the lcm of the denominators
    (all inputs in lowest terms).
    """
    gens = [as_rational(g) for g in gens]
    if not gens:
        raise ValueError("need at least one generator")
    num = reduce(math.gcd, (g.numerator for g in gens), 0)
    den = reduce(math.lcm, (g.denominator for g in gens), 1)
    return FgSubgroup(Fraction(num, den))


def fg_certificate(gens: Sequence[Rational]) -> list[int]:
    """Integers c_i with sum(c_i * gens[i]) == fg_generator(gens).generator."""
    gens = [as_rational(g) for g in gens]
    den = reduce(math.lcm, (g.denominator for g in gens), 1)
    ints = [int(g * den) for g in gens]
    coeffs = [0] * len(ints)
    acc = 0
    for i, n in enumerate(ints):
        # acc = gcd so far; extend the Bezout relation by one generator
        x, y, g = igcdex(acc, n)
        coeffs = [c * x for c in coeffs]
        coeffs[i] = y
        acc = g
    if acc < 0:
        coeffs = [-c for c in coeffs]
    return [int(c) for c in coeffs]


@dataclass(frozen=True)
class Subgroup:
    """The subgroup scale * H_b of Q, with H_b described by a spec.

    ``Subgroup(SupernaturalSpec(0), g)`` is the cyclic group g*Z; the
    subgroup {m/q^k} is ``Subgroup(SupernaturalSpec(0, {q: INF}))``.
    ``scale == 0`` encodes {0}.
    """

    spec: SupernaturalSpec = field(default_factory=SupernaturalSpec)
    scale: Fraction = Fraction(1)

    def __post_init__(self):
        object.__setattr__(self, "scale", abs(as_rational(self.scale)))

    @classmethod
    def cyclic(cls, generator: Rational) -> "Subgroup":
        return cls(SupernaturalSpec(0), as_rational(generator))

    @classmethod
    def from_fg(cls, fg: FgSubgroup) -> "Subgroup":
        return cls.cyclic(fg.generator)

    def __contains__(self, y: Rational) -> bool:
        y = as_rational(y)
        if self.scale == 0:
            return y == 0
        return contains(self.spec, y / self.scale)

    def times(self, k: Rational) -> "Subgroup":
        """The image k * (this subgroup)."""
        return Subgroup(self.spec, self.scale * as_rational(k))

    def to_json(self) -> dict:
        return {"spec": self.spec.to_json(), "scale": rational_str(self.scale)}

    @classmethod
    def from_json(cls, data: Mapping) -> "Subgroup":
        return cls(SupernaturalSpec.from_json(data["spec"]), as_rational(data.get("scale", "1")))
