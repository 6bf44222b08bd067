"""Explicit counterexample instances and the condition checkers they rely on."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from sympy import isprime

from .box import TestBox
from .charfn import (
    CharFn,
    FiniteSupport,
    Idempotent,
    PhaseChar,
    TwoLevelOnSubgroup,
    charfn_from_json,
    haar,
)
from .charfn import (
    hermitian_defects,
    is_gauss_idem_modulus_on_box,
    is_idempotent_on_box,
    pd_check_finite_support,
)
from .errors import InvalidParams, NotMember, PreconditionViolated
from .solenoid import (
    INF,
    Rational,
    Subgroup,
    SupernaturalSpec,
    as_rational,
    contains,
    in_multiple_image,
    rational_str,
)
from .values import DEFAULT_TOLERANCE
from .verifier import FormsMatrix, VerifyReport, derived_identities_report, verify_on_box

NOT_IDEMPOTENT = "not_idempotent"
NOT_GAUSS_IDEMPOTENT = "not_gauss_idempotent"


@dataclass
class ConstructionManifest:
    name: str
    spec: SupernaturalSpec
    fs: list[CharFn]
    M: FormsMatrix
    recommended_box: TestBox
    equation_holds: bool = True
    class_exclusions: list[str] = field(default_factory=list)
    params: dict = field(default_factory=dict)
    budget: int | None = None
    certificates: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.fs) != self.M.n:
            raise InvalidParams("number of functions must match the forms matrix")
        bad = self.M.non_automorphisms(self.spec)
        if bad:
            raise InvalidParams(f"forms matrix entries {bad} are not automorphisms")

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "params": self.params,
            "spec": self.spec.to_json(),
            "fs": [f.to_json() for f in self.fs],
            "M": self.M.to_json(),
            "recommended_box": self.recommended_box.to_json(),
            "budget": self.budget,
            "expected": {"equation_holds": self.equation_holds, "class_exclusions": list(self.class_exclusions)},
            "certificates": self.certificates,
        }

    @classmethod
    def from_json(cls, data: dict) -> "ConstructionManifest":
        expected = data.get("expected", {})
        return cls(
            name=data["name"],
            spec=SupernaturalSpec.from_json(data["spec"]),
            fs=[charfn_from_json(f) for f in data["fs"]],
            M=FormsMatrix.from_json(data["M"]),
            recommended_box=TestBox.from_json(data["recommended_box"]),
            equation_holds=bool(expected.get("equation_holds", True)),
            class_exclusions=list(expected.get("class_exclusions", [])),
            params=dict(data.get("params", {})),
            budget=data.get("budget"),
            certificates=dict(data.get("certificates", {})),
        )


def lemma37_matrix(p: int, q: int, n: int) -> FormsMatrix:
    """Row 1 = (1, p, ..., p); row j >= 2 has p first, s = p^2 + q on the
    diagonal and p^2 elsewhere."""
    s = p * p + q
    rows = [[1] + [p] * (n - 1)]
    for j in range(1, n):
        rows.append([p] + [s if i == j else p * p for i in range(1, n)])
    return FormsMatrix(rows)


def build_lemma37_case1(p: int, q: int, c: Rational = Fraction(1, 2), n: int = 3) -> ConstructionManifest:
    """n i.i.d. variables with transform 1 on pH, c on H \\ pH, 0 off H, where
    H = {m/q^k}, on the solenoid with Y = Q (every f_p an automorphism)."""
    c = as_rational(c)
    if not (isprime(p) and isprime(q)) or p == q:
        raise InvalidParams("p and q must be distinct primes")
    if not (0 < c < 1):
        raise InvalidParams("c must lie in (0, 1)")
    if n < 3:
        raise InvalidParams("n must be at least 3")
    spec = SupernaturalSpec(INF)
    H = Subgroup(SupernaturalSpec(0, {q: INF}))
    f = TwoLevelOnSubgroup(H, p, c)
    s = p * p + q
    box = TestBox([Fraction(1, q), Fraction(1, q * q), Fraction(1, p), Fraction(1, s)], 2)
    return ConstructionManifest(
        name="lemma37",
        spec=spec,
        fs=[f] * n,
        M=lemma37_matrix(p, q, n),
        recommended_box=box,
        class_exclusions=[NOT_IDEMPOTENT, NOT_GAUSS_IDEMPOTENT],
        params={"p": p, "q": q, "c": rational_str(c), "n": n, "s": s},
        budget=len(box) ** n,
    )


@dataclass(frozen=True)
class CompGrConditions:
    p: int
    cond_i: bool
    cond_ii: bool
    cond_iii: bool

    @property
    def all(self) -> bool:
        return self.cond_i and self.cond_ii and self.cond_iii


def lemma_compgr_conditions(spec: SupernaturalSpec, a_mult: Rational, y_tilde: Rational) -> CompGrConditions:
    """Conditions (i)-(iii) for delta = f_a and y~, with I - delta = f_p, p = 1 - a.

    (i)   ker f_p = {0}: p != 0 (Y is torsion free);
    (ii)  y~ and 2y~ both outside Y^(p) = pY;
    (iii) a y~ != -y~.
    """
    a = as_rational(a_mult)
    if a.denominator != 1:
        raise InvalidParams("a must be an integer")
    a = int(a)
    y = as_rational(y_tilde)
    if not contains(spec, y):
        raise NotMember(f"{y} is not in H_a")
    p = 1 - a
    cond_i = p != 0
    cond_ii = not in_multiple_image(spec, y, p) and not in_multiple_image(spec, 2 * y, p)
    cond_iii = (a + 1) * y != 0
    return CompGrConditions(p, cond_i, cond_ii, cond_iii)


def def_mu(y0: Rational, level: Rational = Fraction(1, 2)) -> FiniteSupport:
    """Transform of the density 1 + Re(x, y0): 1 at 0, 1/2 at +-y0, else 0."""
    y0 = as_rational(y0)
    return FiniteSupport({y0: level, -y0: level})


def thm41_divisor(p: int) -> int:
    """p - 1 when p = 1 mod 4, else p + 1; either way a multiple of 4."""
    return p - 1 if p % 4 == 1 else p + 1


def thm41_matrix(p: int) -> FormsMatrix:
    k = p if p % 4 == 1 else -p
    return FormsMatrix([[1, 1, 1], [1, k, 1], [1, 1, k]])


@dataclass(frozen=True)
class Obstruction:
    holds: bool
    divisor: int
    witness: Fraction | None = None

    def __bool__(self) -> bool:
        return self.holds

    def to_json(self) -> dict:
        return {
            "holds": self.holds,
            "divisor": self.divisor,
            "witness": None if self.witness is None else rational_str(self.witness),
        }


def obstruction_check(spec: SupernaturalSpec, p: int, y0: Rational) -> Obstruction:
    """Is v = 0 the only v in H_a with d*v in {0, +-y0, +-2y0}?

    d = p - 1 (p = 1 mod 4) or p + 1 (p = 3 mod 4).  The candidates are
    v = e*y0/d and v = 2e*y0/d for e = +-1; each is tested for membership.
    """
    y0 = as_rational(y0)
    d = thm41_divisor(p)
    for mult in (1, -1, 2, -2):
        v = mult * y0 / d
        if v != 0 and contains(spec, v):
            return Obstruction(False, d, v)
    return Obstruction(True, d)


def build_thm41_part2(spec: SupernaturalSpec, p: int, y0: Rational = 1) -> ConstructionManifest:
    """Three i.i.d. variables with transform def_mu when f_p is an
    automorphism for an odd prime p and f_2 is not."""
    y0 = as_rational(y0)
    if p % 2 == 0 or not isprime(p):
        raise InvalidParams("p must be an odd prime")
    if spec.height(p) != INF:
        raise InvalidParams(f"f_{p} is not an automorphism (h_{p} is finite)")
    if spec.height(2) == INF:
        raise InvalidParams("requires f_2 not an automorphism (h_2 finite)")
    if y0 == 0 or not contains(spec, y0):
        raise InvalidParams("y0 must be a nonzero element of H_a")
    if in_multiple_image(spec, y0, 2):
        raise InvalidParams("y0 must lie outside Y^(2)")
    obstruction = obstruction_check(spec, p, y0)
    f = def_mu(y0)
    return ConstructionManifest(
        name="thm41p2",
        spec=spec,
        fs=[f] * 3,
        M=thm41_matrix(p),
        recommended_box=TestBox([y0, y0 / p], 3),
        class_exclusions=[NOT_IDEMPOTENT, NOT_GAUSS_IDEMPOTENT],
        params={"p": p, "y0": rational_str(y0), "branch": "p-1=4k" if p % 4 == 1 else "p+1=4k"},
        certificates={"obstruction": obstruction.to_json()},
    )


# -- solutions of the three-form equation under L = (x1+x2+x3, x1-x2+x3, x1-x2-x3)


def idempotent_triple(support: Subgroup, phases: Sequence[PhaseChar] = ()) -> list[CharFn]:
    """Shifted Haar transforms with a common annihilator ``support``.

    They solve the three-form equation iff 2y in support forces y in support.
    """
    phases = list(phases) or [PhaseChar()] * 3
    return [Idempotent(support, ph) for ph in phases]


def haar_defmu_triple(y0: Rational, haar_position: int = 0, level: Rational = Fraction(1, 2)) -> list[CharFn]:
    """One Haar factor and two def_mu factors; a solution whenever y0 lies
    outside Y^(2)."""
    fs: list[CharFn] = [def_mu(y0, level)] * 3
    fs[haar_position] = haar()
    return fs


def build_formiT_triple(
    spec: SupernaturalSpec, fs: Sequence[CharFn], box: TestBox, name: str = "formiT"
) -> ConstructionManifest:
    return ConstructionManifest(name=name, spec=spec, fs=list(fs), M=FormsMatrix.formiT(), recommended_box=box)


# -- checking a manifest against its expectations


def validity_problems(f: CharFn, box: TestBox, tolerance: float = DEFAULT_TOLERANCE) -> list[str]:
    """Reasons f cannot be a characteristic function, as seen on the box.

    Checks f(0) = 1, f(-y) = conj f(y) and |f| <= 1 on box points; for
    finitely supported functions also Bochner positivity of the whole
    function.
    """
    pts = sorted(set(box.points) | {-y for y in box.points})
    problems = [f"not hermitian/normalized at {y}" for y in hermitian_defects(f, pts, tolerance)]
    if isinstance(f, FiniteSupport) and not pd_check_finite_support(f):
        problems.append("not positive definite")
    return problems


@dataclass
class ManifestReport:
    name: str
    equation: VerifyReport
    equation_expected: bool
    exclusions: dict[str, bool]
    validity: list[list[str]]
    identities: list[str] | None = None

    @property
    def equation_ok(self) -> bool:
        return self.equation.ok == self.equation_expected

    @property
    def ok(self) -> bool:
        return (
            self.equation_ok
            and all(self.exclusions.values())
            and not any(self.validity)
            and not self.identities
        )

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "ok": self.ok,
            "equation": self.equation.to_json(),
            "equation_expected": self.equation_expected,
            "exclusions": self.exclusions,
            "validity": self.validity,
            "identity_failures": self.identities,
        }


def _excluded(kind: str, f: CharFn, box: TestBox, spec: SupernaturalSpec, tolerance: float) -> bool:
    try:
        if kind == NOT_IDEMPOTENT:
            return not is_idempotent_on_box(f, box, spec, tolerance)
        if kind == NOT_GAUSS_IDEMPOTENT:
            return not is_gauss_idem_modulus_on_box(f, box, tolerance, spec)
    except PreconditionViolated:
        return False
    raise InvalidParams(f"unknown class exclusion {kind!r}")


def check_manifest(
    m: ConstructionManifest,
    box: TestBox | None = None,
    tolerance: float = DEFAULT_TOLERANCE,
    budget: int | None = None,
) -> ManifestReport:
    """Run every expectation a manifest carries.

    A violation is any of: the equation residual disagreeing with
    ``equation_holds``, a class exclusion not certified, a function failing
    the characteristic-function checks, or (for the three-form equation) a
    derived identity failing.
    """
    box = box or m.recommended_box
    budget = budget if budget is not None else m.budget
    eq = verify_on_box(m.fs, m.M, box, m.spec, tolerance=tolerance, budget=budget)
    exclusions = {}
    for kind in m.class_exclusions:
        exclusions[kind] = all(_excluded(kind, f, box, m.spec, tolerance) for f in m.fs)
    validity = [validity_problems(f, box, tolerance) for f in m.fs]
    identities = None
    if m.M == FormsMatrix.formiT() and eq.ok and not any(validity):
        identities = [fail.identity for fail in derived_identities_report(m.fs, box, m.spec, tolerance, budget)]
    return ManifestReport(m.name, eq, m.equation_holds, exclusions, validity, identities)


def tamper(m: ConstructionManifest, y: Rational, value, which: Sequence[int] | None = None) -> ConstructionManifest:
    """Copy of m with f_i(y) replaced by ``value`` for i in ``which`` (all by
    default).  Only finitely supported functions can be tampered."""
    which = range(len(m.fs)) if which is None else which
    fs = list(m.fs)
    for i in which:
        if not isinstance(fs[i], FiniteSupport):
            raise InvalidParams(f"f_{i + 1} is not finitely supported")
        fs[i] = fs[i].with_value(y, value)
    params = dict(m.params, tampered={"point": rational_str(as_rational(y)), "value": str(value)})
    return ConstructionManifest(
        m.name, m.spec, fs, m.M, m.recommended_box, m.equation_holds, m.class_exclusions, params, m.budget, m.certificates
    )
