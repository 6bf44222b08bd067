"""Brute-force ground truth on finite abelian groups G = Z(m_1) x ... x Z(m_r).

The character group of G is identified with G itself through the pairing
(x, y) = exp(2 pi i sum x_k y_k / m_k).  Distributions carry exact rational
probabilities; independence of linear forms is decided by enumerating the
joint law, and the functional equation is checked either in floating point
or exactly in Z[zeta_L] with L = lcm(m_k).
"""

from __future__ import annotations

import cmath
import itertools
import math
import random
import re
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, reduce
from typing import Iterable, Mapping, Sequence, Union

from .cyclotomic import CyclotomicRing
from .errors import BudgetExceeded, InvalidParams, NotHomomorphism

DEFAULT_ORDER_CAP = 2000
DEFAULT_TUPLE_CAP = 2_000_000

Element = tuple[int, ...]


@dataclass(frozen=True)
class FiniteGroupSpec:
    moduli: tuple[int, ...]
    cap: int = DEFAULT_ORDER_CAP

    def __init__(self, moduli: Iterable[int], cap: int = DEFAULT_ORDER_CAP):
        moduli = tuple(int(m) for m in moduli)
        if not moduli or any(m < 2 for m in moduli):
            raise InvalidParams("moduli must be integers >= 2")
        object.__setattr__(self, "moduli", moduli)
        object.__setattr__(self, "cap", cap)
        if self.order > cap:
            raise BudgetExceeded(f"|G| = {self.order} exceeds cap {cap}")

    @classmethod
    def parse(cls, text: str, cap: int = DEFAULT_ORDER_CAP) -> "FiniteGroupSpec":
        return cls([int(s) for s in text.replace("x", ",").split(",") if s.strip()], cap)

    @property
    def rank(self) -> int:
        return len(self.moduli)

    @property
    def order(self) -> int:
        return math.prod(self.moduli)

    @property
    def exponent(self) -> int:
        return reduce(math.lcm, self.moduli, 1)

    @cached_property
    def elements(self) -> tuple[Element, ...]:
        return tuple(itertools.product(*(range(m) for m in self.moduli)))

    @property
    def zero(self) -> Element:
        return (0,) * self.rank

    def reduce(self, x: Iterable[int]) -> Element:
        x = tuple(x)
        if len(x) != self.rank:
            raise InvalidParams(f"element {x} has wrong length for {self}")
        return tuple(int(v) % m for v, m in zip(x, self.moduli))

    def add(self, x: Element, y: Element) -> Element:
        return tuple((a + b) % m for a, b, m in zip(x, y, self.moduli))

    def neg(self, x: Element) -> Element:
        return tuple(-a % m for a, m in zip(x, self.moduli))

    def scale(self, k: int, x: Element) -> Element:
        return tuple(k * a % m for a, m in zip(x, self.moduli))

    def pairing_exponent(self, x: Element, y: Element) -> int:
        """k with (x, y) = zeta_L^k, L the exponent of G."""
        L = self.exponent
        return sum(a * b * (L // m) for a, b, m in zip(x, y, self.moduli)) % L

    def pairing(self, x: Element, y: Element) -> complex:
        return cmath.exp(2j * math.pi * self.pairing_exponent(x, y) / self.exponent)

    def __str__(self) -> str:
        return ",".join(map(str, self.moduli))


def subgroup_generated(G: FiniteGroupSpec, gens: Iterable[Iterable[int]]) -> frozenset[Element]:
    members = {G.zero}
    frontier = [G.zero]
    gens = [G.reduce(g) for g in gens]
    while frontier:
        nxt = []
        for x in frontier:
            for g in gens:
                z = G.add(x, g)
                if z not in members:
                    members.add(z)
                    nxt.append(z)
        frontier = nxt
    return frozenset(members)


def annihilator(G: FiniteGroupSpec, gens: Iterable[Iterable[int]]) -> frozenset[Element]:
    """Characters trivial on the subgroup generated by ``gens``.

    Checking the generators suffices since characters are homomorphisms.
    The pairing is symmetric, so the same call computes A(X, H) for H in Y.
    """
    gens = [G.reduce(g) for g in gens]
    return frozenset(y for y in G.elements if all(G.pairing_exponent(g, y) == 0 for g in gens))


# -- distributions


def _key(x: Element) -> str:
    return "(" + ",".join(map(str, x)) + ")"


def _parse_key(text: str) -> tuple[int, ...]:
    return tuple(int(s) for s in re.findall(r"-?\d+", text))


@dataclass(frozen=True)
class Dist:
    G: FiniteGroupSpec
    probs: tuple[tuple[Element, Fraction], ...]

    def __init__(self, G: FiniteGroupSpec, probs: Mapping):
        acc: dict[Element, Fraction] = defaultdict(Fraction)
        for x, p in probs.items():
            if isinstance(x, int):
                x = (x,)
            p = Fraction(p)
            if p < 0:
                raise InvalidParams("probabilities must be nonnegative")
            if p:
                acc[G.reduce(x)] += p
        if sum(acc.values()) != 1:
            raise InvalidParams(f"probabilities sum to {sum(acc.values())}, not 1")
        object.__setattr__(self, "G", G)
        object.__setattr__(self, "probs", tuple(sorted(acc.items())))

    @cached_property
    def table(self) -> dict[Element, Fraction]:
        return dict(self.probs)

    @property
    def support(self) -> list[Element]:
        return [x for x, _ in self.probs]

    def prob(self, x: Iterable[int]) -> Fraction:
        return self.table.get(self.G.reduce(x), Fraction(0))

    def to_json(self) -> dict:
        return {"group": str(self.G), "probs": {_key(x): f"{p.numerator}/{p.denominator}" for x, p in self.probs}}

    @classmethod
    def from_json(cls, data: Mapping, G: FiniteGroupSpec | None = None) -> "Dist":
        G = G or FiniteGroupSpec.parse(data["group"])
        return cls(G, {_parse_key(k): Fraction(v) for k, v in data["probs"].items()})


def degenerate(G: FiniteGroupSpec, x: Iterable[int]) -> Dist:
    return Dist(G, {G.reduce(x): 1})


def haar(G: FiniteGroupSpec, K: Iterable[Element] | None = None, shift: Iterable[int] | None = None) -> Dist:
    """Uniform law on the coset shift + K (K defaults to G)."""
    K = list(G.elements if K is None else K)
    s = G.zero if shift is None else G.reduce(shift)
    return Dist(G, {G.add(s, k): Fraction(1, len(K)) for k in K})


def mixture(weights: Sequence[Fraction], dists: Sequence[Dist]) -> Dist:
    G = dists[0].G
    acc: dict[Element, Fraction] = defaultdict(Fraction)
    for w, d in zip(weights, dists):
        for x, p in d.probs:
            acc[x] += Fraction(w) * p
    return Dist(G, acc)


def convolve(a: Dist, b: Dist) -> Dist:
    G = a.G
    acc: dict[Element, Fraction] = defaultdict(Fraction)
    for x, p in a.probs:
        for y, q in b.probs:
            acc[G.add(x, y)] += p * q
    return Dist(G, acc)


# -- characteristic functions


def char_fn(G: FiniteGroupSpec, d: Dist) -> dict[Element, complex]:
    return {y: sum(float(p) * G.pairing(x, y) for x, p in d.probs) for y in G.elements}


@dataclass
class ExactTransform:
    """Characteristic function with values ``coeffs[y] / denominator`` in Z[zeta_L]."""

    G: FiniteGroupSpec
    ring: CyclotomicRing
    denominator: int
    coeffs: dict[Element, tuple[int, ...]]

    def rational(self, y: Element) -> Fraction | None:
        """The value at y when it is rational, else None."""
        c = self.coeffs[y]
        if any(c[1:]):
            return None
        return Fraction(c[0], self.denominator)

    def to_complex(self, y: Element) -> complex:
        return self.ring.to_complex(self.coeffs[y], self.denominator)


def char_fn_exact(G: FiniteGroupSpec, d: Dist) -> ExactTransform:
    ring = CyclotomicRing(G.exponent)
    D = reduce(math.lcm, (p.denominator for _, p in d.probs), 1)
    weights = [(x, int(p * D)) for x, p in d.probs]
    coeffs = {}
    for y in G.elements:
        acc = [0] * ring.degree
        for x, w in weights:
            mono = ring.zeta_power(G.pairing_exponent(x, y))
            for k, c in enumerate(mono):
                acc[k] += w * c
        coeffs[y] = tuple(acc)
    return ExactTransform(G, ring, D, coeffs)


def inverse_transform(G: FiniteGroupSpec, values: Mapping[Element, complex]) -> dict[Element, complex]:
    n = G.order
    return {x: sum(values[y] * G.pairing(x, y).conjugate() for y in G.elements) / n for x in G.elements}


# -- endomorphisms


Entry = Union[int, "AutMatrix"]


@dataclass(frozen=True)
class AutMatrix:
    """Integer matrix acting by (A x)_j = sum_i a_ji x_i mod m_j."""

    entries: tuple[tuple[int, ...], ...]

    def __init__(self, entries: Sequence[Sequence[int]]):
        object.__setattr__(self, "entries", tuple(tuple(int(a) for a in row) for row in entries))

    @classmethod
    def scalar(cls, G: FiniteGroupSpec, k: int) -> "AutMatrix":
        return cls([[k if i == j else 0 for i in range(G.rank)] for j in range(G.rank)])

    def check(self, G: FiniteGroupSpec) -> None:
        if len(self.entries) != G.rank or any(len(r) != G.rank for r in self.entries):
            raise NotHomomorphism(f"matrix shape does not match rank {G.rank}")
        for j, row in enumerate(self.entries):
            for i, a in enumerate(row):
                if a * G.moduli[i] % G.moduli[j]:
                    raise NotHomomorphism(f"entry ({j},{i}) = {a} does not map Z({G.moduli[i]}) to Z({G.moduli[j]})")

    def apply(self, G: FiniteGroupSpec, x: Element) -> Element:
        return tuple(sum(a * v for a, v in zip(row, x)) % m for row, m in zip(self.entries, G.moduli))

    def to_json(self) -> list[list[int]]:
        return [list(r) for r in self.entries]


def as_aut(G: FiniteGroupSpec, a: Entry) -> AutMatrix:
    return a if isinstance(a, AutMatrix) else AutMatrix.scalar(G, int(a))


def is_automorphism(G: FiniteGroupSpec, A: Entry) -> bool:
    A = as_aut(G, A)
    A.check(G)
    return len({A.apply(G, x) for x in G.elements}) == G.order


def adjoint(G: FiniteGroupSpec, A: Entry) -> AutMatrix:
    """The map on characters with (A x, y) = (x, adjoint(A) y).

    Entry (i, j) is a_ji * m_i / m_j, an integer by the homomorphism condition.
    """
    A = as_aut(G, A)
    A.check(G)
    r, m = G.rank, G.moduli
    return AutMatrix([[A.entries[j][i] * m[i] // m[j] % m[i] for j in range(r)] for i in range(r)])


def pairing_identity_holds(G: FiniteGroupSpec, A: Entry) -> bool:
    A = as_aut(G, A)
    At = adjoint(G, A)
    return all(
        G.pairing_exponent(A.apply(G, x), y) == G.pairing_exponent(x, At.apply(G, y))
        for x in G.elements
        for y in G.elements
    )


Forms = Sequence[Sequence[Entry]]


def _forms(G: FiniteGroupSpec, M: Forms, n: int) -> list[list[AutMatrix]]:
    if len(M) != n or any(len(row) != n for row in M):
        raise InvalidParams(f"forms matrix must be {n} x {n}")
    out = [[as_aut(G, a) for a in row] for row in M]
    for row in out:
        for a in row:
            a.check(G)
    return out


def formiT(G: FiniteGroupSpec) -> list[list[AutMatrix]]:
    return [[as_aut(G, a) for a in row] for row in ((1, 1, 1), (1, -1, 1), (1, -1, -1))]


# -- independence and the functional equation


def _budget(count: int, cap: int) -> None:
    if count > cap:
        raise BudgetExceeded(f"{count} tuples exceed cap {cap}")


def joint_independence_check(
    G: FiniteGroupSpec, dists: Sequence[Dist], M: Forms, cap: int = DEFAULT_TUPLE_CAP
) -> bool:
    """Exact test that L_j = sum_i M[j][i] xi_i (j = 1..n) are independent."""
    n = len(dists)
    forms = _forms(G, M, n)
    _budget(math.prod(len(d.probs) for d in dists), cap)
    joint: dict[tuple[Element, ...], Fraction] = defaultdict(Fraction)
    for combo in itertools.product(*(d.probs for d in dists)):
        w = math.prod((p for _, p in combo), start=Fraction(1))
        xs = [x for x, _ in combo]
        L = tuple(
            reduce(G.add, (forms[j][i].apply(G, xs[i]) for i in range(n)), G.zero) for j in range(n)
        )
        joint[L] += w
    marginals: list[dict[Element, Fraction]] = [defaultdict(Fraction) for _ in range(n)]
    for L, w in joint.items():
        for j in range(n):
            marginals[j][L[j]] += w
    _budget(math.prod(len(m) for m in marginals), cap)
    for cell in itertools.product(*(m.items() for m in marginals)):
        expected = math.prod((w for _, w in cell), start=Fraction(1))
        if joint.get(tuple(x for x, _ in cell), Fraction(0)) != expected:
            return False
    return True


def sd_equation_check(
    G: FiniteGroupSpec,
    dists: Sequence[Dist],
    M: Forms,
    exact: bool = False,
    tolerance: float = 1e-9,
    cap: int = DEFAULT_TUPLE_CAP,
) -> bool:
    """Check prod_i f_i(sum_j A~_ji u_j) = prod_i prod_j f_i(A~_ji u_j) for all u.

    A~_ji is the adjoint of M[j][i].  The right side factors over j, so it is
    tabulated once per coordinate.
    """
    n = len(dists)
    forms = _forms(G, M, n)
    _budget(G.order**n, cap)
    adj = [[adjoint(G, forms[j][i]) for i in range(n)] for j in range(n)]
    Y = G.elements
    # image tables: img[j][i][y] = A~_ji y
    img = [[{y: adj[j][i].apply(G, y) for y in Y} for i in range(n)] for j in range(n)]

    if exact:
        ts = [char_fn_exact(G, d) for d in dists]
        ring = ts[0].ring
        mul = ring.mul
        scale_lhs = math.prod(t.denominator for t in ts) ** (n - 1)
        R = [{u: reduce(mul, (ts[i].coeffs[img[j][i][u]] for i in range(n))) for u in Y} for j in range(n)]
        for us in itertools.product(Y, repeat=n):
            rhs = reduce(mul, (R[j][u] for j, u in enumerate(us)))
            lhs = ring.one
            for i in range(n):
                arg = reduce(G.add, (img[j][i][us[j]] for j in range(n)))
                lhs = mul(lhs, ts[i].coeffs[arg])
            if ring.scale(lhs, scale_lhs) != rhs:
                return False
        return True

    fs = [char_fn(G, d) for d in dists]
    R = [{u: math.prod(fs[i][img[j][i][u]] for i in range(n)) for u in Y} for j in range(n)]
    for us in itertools.product(Y, repeat=n):
        rhs = math.prod(R[j][u] for j, u in enumerate(us))
        lhs = 1 + 0j
        for i in range(n):
            lhs *= fs[i][reduce(G.add, (img[j][i][us[j]] for j in range(n)))]
        if abs(lhs - rhs) > tolerance:
            return False
    return True


@dataclass(frozen=True)
class Equivalence:
    independent: bool
    equation: bool
    equation_float: bool

    @property
    def agree(self) -> bool:
        return self.independent == self.equation == self.equation_float


def equivalence_test(G: FiniteGroupSpec, dists: Sequence[Dist], M: Forms, tolerance: float = 1e-9) -> Equivalence:
    return Equivalence(
        joint_independence_check(G, dists, M),
        sd_equation_check(G, dists, M, exact=True),
        sd_equation_check(G, dists, M, exact=False, tolerance=tolerance),
    )


# -- idempotents


@dataclass(frozen=True)
class IdempotentClass:
    is_shifted_idempotent: bool
    K: frozenset[Element] | None = None
    x: Element | None = None


def idempotent_classify(G: FiniteGroupSpec, d: Dist) -> IdempotentClass:
    """Decide whether d = E_x * m_K.  x is the smallest support element."""
    support = d.support
    x = support[0]
    K = frozenset(G.add(s, G.neg(x)) for s in support)
    is_group = all(G.add(a, b) in K for a in K for b in K)
    uniform = len({p for _, p in d.probs}) == 1
    if is_group and uniform:
        return IdempotentClass(True, K, x)
    return IdempotentClass(False)


# -- random instances


PROFILES = ("dirichlet", "sparse", "idempotent")


def random_dist(G: FiniteGroupSpec, seed: int | str | random.Random, profile: str = "dirichlet") -> Dist:
    """Reproducible random law with exact rational probabilities.

    dirichlet:  integer weight uniform in 0..9 on every element (retried
                until nonzero), normalised.
    sparse:     1 to 3 distinct elements, integer weights uniform in 1..5.
    idempotent: Haar law of the subgroup generated by one or two random
                elements, shifted by a random element.
    """
    rng = seed if isinstance(seed, random.Random) else random.Random(seed)
    els = G.elements
    if profile == "dirichlet":
        while True:
            w = [rng.randint(0, 9) for _ in els]
            if sum(w):
                break
        total = sum(w)
        return Dist(G, {x: Fraction(k, total) for x, k in zip(els, w) if k})
    if profile == "sparse":
        chosen = rng.sample(els, rng.randint(1, min(3, len(els))))
        w = [rng.randint(1, 5) for _ in chosen]
        return Dist(G, {x: Fraction(k, sum(w)) for x, k in zip(chosen, w)})
    if profile == "idempotent":
        gens = [rng.choice(els) for _ in range(rng.randint(1, 2))]
        return haar(G, subgroup_generated(G, gens), rng.choice(els))
    raise InvalidParams(f"unknown profile {profile!r}; expected one of {PROFILES}")


def random_automorphism(G: FiniteGroupSpec, rng: random.Random, tries: int = 1000) -> AutMatrix:
    """Rejection-sample a matrix satisfying the homomorphism condition until
    it is bijective."""
    r, m = G.rank, G.moduli
    for _ in range(tries):
        rows = []
        for j in range(r):
            # a_ji must be a multiple of m_j / gcd(m_i, m_j)
            rows.append([rng.randrange(0, m[j], m[j] // math.gcd(m[i], m[j])) for i in range(r)])
        A = AutMatrix(rows)
        if is_automorphism(G, A):
            return A
    raise InvalidParams(f"no automorphism found for {G} in {tries} tries")
