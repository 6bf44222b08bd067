"""Skitovich-Darmois functional equation on finite test boxes.

Convention: ``FormsMatrix`` rows are forms and columns are variables, so
L_j = sum_i M[j][i] xi_i.  The equation checked at (u_1, ..., u_n) is

    prod_i f_i(sum_j M[j][i] u_j) == prod_i prod_j f_i(M[j][i] u_j).

On H_a the adjoint of multiplication by r is multiplication by r.
"""

from __future__ import annotations

import itertools
import math
import os
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from typing import Sequence

import numpy as np
from sympy import factorint

from .box import TestBox
from .charfn import CharFn, closed_in_box, evaluate
from .errors import BudgetExceeded, DomainError, NotDivisible, PreconditionViolated
from .solenoid import (
    Rational,
    SupernaturalSpec,
    as_rational,
    contains,
    halve,
    in_multiple_image,
    is_automorphism,
    rational_str,
)
from .values import DEFAULT_TOLERANCE, ONE, Exact, Value, distance, product, values_equal

DEFAULT_BUDGET = 10**6
TABLE_CAP = 4_000_000


def default_budget() -> int:
    env = os.environ.get("SD_LAB_BUDGET")
    return int(float(env)) if env else DEFAULT_BUDGET


@dataclass(frozen=True)
class FormsMatrix:
    """n x n matrix of multipliers; row j holds the coefficients of L_j."""

    entries: tuple[tuple[Fraction, ...], ...]

    def __init__(self, rows: Sequence[Sequence[Rational]]):
        rows = tuple(tuple(as_rational(a) for a in row) for row in rows)
        n = len(rows)
        if n == 0 or any(len(r) != n for r in rows):
            raise ValueError("forms matrix must be square and nonempty")
        if any(a == 0 for r in rows for a in r):
            raise ValueError("multipliers must be nonzero")
        object.__setattr__(self, "entries", rows)

    @property
    def n(self) -> int:
        return len(self.entries)

    def column(self, i: int) -> tuple[Fraction, ...]:
        """Coefficients of variable i across the forms."""
        return tuple(row[i] for row in self.entries)

    @property
    def normalized(self) -> bool:
        """First row and first column are all identity."""
        return all(a == 1 for a in self.entries[0]) and all(row[0] == 1 for row in self.entries)

    def non_automorphisms(self, spec: SupernaturalSpec) -> list[tuple[int, int]]:
        return [(j, i) for j, row in enumerate(self.entries) for i, a in enumerate(row) if not is_automorphism(spec, a)]

    def validate(self, spec: SupernaturalSpec) -> None:
        bad = self.non_automorphisms(spec)
        if bad:
            j, i = bad[0]
            raise PreconditionViolated(f"entry ({j},{i}) = {self.entries[j][i]} is not an automorphism of H_a")

    def to_json(self) -> list[list[str]]:
        return [[rational_str(a) for a in row] for row in self.entries]

    @classmethod
    def from_json(cls, data) -> "FormsMatrix":
        return cls([[as_rational(a) for a in row] for row in data])

    @classmethod
    def formiT(cls) -> "FormsMatrix":
        """L1 = x1+x2+x3, L2 = x1-x2+x3, L3 = x1-x2-x3."""
        return cls([[1, 1, 1], [1, -1, 1], [1, -1, -1]])


@dataclass(frozen=True)
class Residual:
    point: tuple[Fraction, ...]
    lhs: Value
    rhs: Value
    zero: bool

    @property
    def magnitude(self) -> float:
        return distance(self.lhs, self.rhs)

    def to_json(self) -> dict:
        return {"point": [rational_str(u) for u in self.point], "lhs": self.lhs.to_json(), "rhs": self.rhs.to_json()}


@dataclass
class VerifyReport:
    points: int
    violation_count: int
    violations: list[Residual] = field(default_factory=list)
    worst_residual: float = 0.0
    exact: bool = True

    @property
    def ok(self) -> bool:
        return self.violation_count == 0

    def to_json(self) -> dict:
        worst = "0(exact)" if self.exact and self.violation_count == 0 else self.worst_residual
        return {
            "points": self.points,
            "violation_count": self.violation_count,
            "violations": [r.to_json() for r in self.violations],
            "worst_residual": worst,
            "exact": self.exact,
        }


def _sides(fs: Sequence[CharFn], M: FormsMatrix, point: Sequence[Fraction], spec: SupernaturalSpec) -> tuple[Value, Value]:
    lhs: Value = ONE
    rhs: Value = ONE
    for i, f in enumerate(fs):
        col = M.column(i)
        lhs = lhs * evaluate(f, sum(a * u for a, u in zip(col, point)), spec)
        for a, u in zip(col, point):
            rhs = rhs * evaluate(f, a * u, spec)
    return lhs, rhs


def residual_at(
    fs: Sequence[CharFn],
    M: FormsMatrix,
    point: Sequence[Rational],
    spec: SupernaturalSpec,
    tolerance: float = DEFAULT_TOLERANCE,
) -> Residual:
    point = tuple(as_rational(u) for u in point)
    if len(fs) != M.n or len(point) != M.n:
        raise ValueError("dimension mismatch between functions, matrix and point")
    for u in point:
        if not contains(spec, u):
            raise DomainError(f"{u} is not in H_a")
    lhs, rhs = _sides(fs, M, point, spec)
    return Residual(point, lhs, rhs, values_equal(lhs, rhs, tolerance))


def _check_inputs(fs, M: FormsMatrix, box: TestBox, spec: SupernaturalSpec, budget: int | None) -> int:
    if len(fs) != M.n:
        raise ValueError("number of functions must equal matrix size")
    budget = default_budget() if budget is None else budget
    total = len(box) ** M.n
    if total > budget:
        raise BudgetExceeded(f"{total} points exceed the budget {budget}")
    for y in box:
        if not contains(spec, y):
            raise DomainError(f"box point {y} is not in H_a")
    return total


def _verify_reference(fs, M, box, spec, tolerance, max_listed, total) -> VerifyReport:
    report = VerifyReport(points=total, violation_count=0)
    for point in box.tuples(M.n):
        r = residual_at(fs, M, point, spec, tolerance)
        if not r.lhs.exact or not r.rhs.exact:
            report.exact = False
            report.worst_residual = max(report.worst_residual, r.magnitude)
        if not r.zero:
            report.violation_count += 1
            report.worst_residual = max(report.worst_residual, r.magnitude)
            if len(report.violations) < max_listed:
                report.violations.append(r)
    return report


class _Registry:
    """Distinct values seen in the lookup tables, with array encodings.

    Exact nonzero values are encoded as (exponent vector over a prime basis,
    angle numerator mod L); products become integer sums, so equality of
    products is decided exactly inside numpy.
    """

    def __init__(self):
        self.values: list[Value] = []
        self.index: dict[Value, int] = {}

    def add(self, v: Value) -> int:
        i = self.index.get(v)
        if i is None:
            i = self.index[v] = len(self.values)
            self.values.append(v)
        return i

    def finalize(self):
        self.exact = all(isinstance(v, Exact) for v in self.values)
        self.cplx = np.array([v.to_complex() for v in self.values], dtype=complex)
        self.zero = np.array([v.is_zero for v in self.values], dtype=bool)
        if not self.exact:
            return
        primes = set()
        for v in self.values:
            if v.modulus:
                primes |= set(factorint(v.modulus.numerator)) | set(factorint(v.modulus.denominator))
        self.primes = sorted(primes)
        self.L = reduce(math.lcm, (v.angle.denominator for v in self.values), 1)
        exps = np.zeros((len(self.values), max(len(self.primes), 1)), dtype=np.int64)
        ang = np.zeros(len(self.values), dtype=np.int64)
        for k, v in enumerate(self.values):
            if v.modulus:
                num, den = factorint(v.modulus.numerator), factorint(v.modulus.denominator)
                for c, p in enumerate(self.primes):
                    exps[k, c] = num.get(p, 0) - den.get(p, 0)
                ang[k] = int(v.angle * self.L)
        self.exps, self.ang = exps, ang


def _verify_vector(fs, M, box, spec, tolerance, max_listed, total) -> VerifyReport | None:
    n = M.n
    pts = box.points
    B = len(pts)
    D = reduce(math.lcm, (p.denominator for p in pts), 1)
    E = reduce(math.lcm, (a.denominator for row in M.entries for a in row), 1)
    K = np.array([int(p * D) for p in pts], dtype=np.int64)
    kmax = int(np.abs(K).max())
    # coef[j][i]: integer coefficient of K_j in the argument of f_i, over D*E
    coef = [[int(a * E) for a in row] for row in M.entries]
    scale = Fraction(1, D * E)
    radius = [sum(abs(coef[j][i]) for j in range(n)) * kmax for i in range(n)]
    if sum(2 * r + 1 for r in radius) > TABLE_CAP or max(radius) * n >= 2**62:
        return None

    reg = _Registry()
    lhs_tab = []
    for i, f in enumerate(fs):
        r = radius[i]
        lhs_tab.append(np.array([reg.add(f.value(t * scale)) for t in range(-r, r + 1)], dtype=np.int64))
    rhs_tab = []
    for j in range(n):
        ids = [reg.add(product(f.value(M.entries[j][i] * u) for i, f in enumerate(fs))) for u in pts]
        rhs_tab.append(np.array(ids, dtype=np.int64))
    reg.finalize()

    report = VerifyReport(points=total, violation_count=0, exact=reg.exact)
    n_last = min(n, 2)
    n_outer = n - n_last
    # broadcast shapes for the trailing coordinates
    shapes = [(B, 1), (1, B)] if n_last == 2 else [(B,)]
    last_K = [K.reshape(s) for s in shapes]
    last_idx = [np.arange(B).reshape(s) for s in shapes]
    listed: list[tuple[int, ...]] = []

    for outer in itertools.product(range(B), repeat=n_outer):
        idx_lhs = []
        for i in range(n):
            base = sum(coef[j][i] * int(K[outer[j]]) for j in range(n_outer)) + radius[i]
            arg = base
            for t in range(n_last):
                arg = arg + coef[n_outer + t][i] * last_K[t]
            idx_lhs.append(lhs_tab[i][arg])
        idx_rhs_outer = [int(rhs_tab[j][outer[j]]) for j in range(n_outer)]
        idx_rhs_last = [rhs_tab[n_outer + t][last_idx[t]] for t in range(n_last)]

        if reg.exact:
            zl = reg.zero[idx_lhs[0]]
            el = reg.exps[idx_lhs[0]]
            al = reg.ang[idx_lhs[0]]
            for ids in idx_lhs[1:]:
                zl = zl | reg.zero[ids]
                el = el + reg.exps[ids]
                al = al + reg.ang[ids]
            zr = np.zeros((), dtype=bool)
            er = np.zeros(reg.exps.shape[1], dtype=np.int64)
            ar = np.zeros((), dtype=np.int64)
            for ids in idx_rhs_outer:
                zr = zr | reg.zero[ids]
                er = er + reg.exps[ids]
                ar = ar + reg.ang[ids]
            for ids in idx_rhs_last:
                zr = zr | reg.zero[ids]
                er = er + reg.exps[ids]
                ar = ar + reg.ang[ids]
            zl, zr = np.broadcast_arrays(zl, zr)
            same = (el == er).all(axis=-1) & ((al - ar) % reg.L == 0)
            bad = (zl != zr) | (~zl & ~zr & ~same)
        else:
            vl = reg.cplx[idx_lhs[0]]
            for ids in idx_lhs[1:]:
                vl = vl * reg.cplx[ids]
            vr = np.ones((), dtype=complex)
            for ids in idx_rhs_outer + idx_rhs_last:
                vr = vr * reg.cplx[ids]
            diff = np.abs(vl - vr)
            report.worst_residual = max(report.worst_residual, float(diff.max()))
            bad = diff > tolerance

        if bad.any():
            hits = np.argwhere(bad)
            report.violation_count += len(hits)
            if reg.exact:
                vl = reg.cplx[idx_lhs[0]]
                for ids in idx_lhs[1:]:
                    vl = vl * reg.cplx[ids]
                vr = np.ones((), dtype=complex)
                for ids in idx_rhs_outer + idx_rhs_last:
                    vr = vr * reg.cplx[ids]
                vl, vr = np.broadcast_arrays(vl, vr)
                report.worst_residual = max(report.worst_residual, float(np.abs(vl - vr)[bad].max()))
            for h in hits[: max(0, max_listed - len(listed))]:
                listed.append(tuple(outer) + tuple(int(x) for x in h))

    for idx in listed:
        point = tuple(pts[k] for k in idx)
        lhs, rhs = _sides(fs, M, point, spec)
        report.violations.append(Residual(point, lhs, rhs, False))
    return report


def verify_on_box(
    fs: Sequence[CharFn],
    M: FormsMatrix,
    box: TestBox,
    spec: SupernaturalSpec,
    tolerance: float = DEFAULT_TOLERANCE,
    budget: int | None = None,
    engine: str = "auto",
    max_listed: int = 100,
) -> VerifyReport:
    """Evaluate the equation at every point of box^n.

    ``engine="reference"`` evaluates point by point with :func:`residual_at`;
    the default vectorised engine builds value tables once and compares
    exactly encoded products in numpy, falling back to the reference loop
    when a table would be too large.  Violations are listed in
    lexicographic point order (at most ``max_listed``), all are counted.
    """
    total = _check_inputs(fs, M, box, spec, budget)
    M.validate(spec)
    if engine not in ("auto", "vector", "reference"):
        raise ValueError(f"unknown engine {engine!r}")
    if engine != "reference":
        report = _verify_vector(fs, M, box, spec, tolerance, max_listed, total)
        if report is not None:
            return report
        if engine == "vector":
            raise BudgetExceeded("lookup tables exceed the table cap")
    return _verify_reference(fs, M, box, spec, tolerance, max_listed, total)


@dataclass(frozen=True)
class SupportGroup:
    N_points: frozenset
    is_subgroup_on_box: bool
    proph_holds: bool


def support_group_N(
    fs: Sequence[CharFn], box: TestBox, spec: SupernaturalSpec | None = None, tolerance: float = 0.0
) -> SupportGroup:
    """Common non-vanishing set N on the box, its closure, and the
    property "2y in N implies y in N"."""
    ev = (lambda f, y: f.value(y)) if spec is None else (lambda f, y: evaluate(f, y, spec))

    def nonzero(y):
        return all(abs(ev(f, y).to_complex()) > tolerance if tolerance else not ev(f, y).is_zero for f in fs)

    N = frozenset(y for y in box if nonzero(y))
    proph = all(y in N for y in box if 2 * y in box and 2 * y in N)
    return SupportGroup(N, closed_in_box(set(N), box), proph)


def sd_t_report(fs: Sequence[CharFn], box: TestBox, spec: SupernaturalSpec, budget: int | None = None, tolerance: float = DEFAULT_TOLERANCE) -> VerifyReport:
    """The three-form equation under L1 = x1+x2+x3, L2 = x1-x2+x3, L3 = x1-x2-x3."""
    if len(fs) != 3:
        raise ValueError("the three-form equation needs exactly three functions")
    return verify_on_box(fs, FormsMatrix.formiT(), box, spec, tolerance=tolerance, budget=budget)


@dataclass
class IdentityFailure:
    identity: str
    points: tuple
    lhs: Value
    rhs: Value


def derived_identities_report(
    fs: Sequence[CharFn], box: TestBox, spec: SupernaturalSpec, tolerance: float = DEFAULT_TOLERANCE, budget: int | None = None
) -> list[IdentityFailure]:
    """Failures of the doubling identities and the same-coset modulus identity.

    Doubling: f_k(2y) = f_k(y)^2 * prod_{i != k} |f_i(y)|^2 for k = 1, 2, 3.
    Same coset: for t1 - t2 in Y^(2) and (i1, i2, i3) a permutation,
    |f_i1(t1)||f_i2(t2)||f_i3(t2)| = |f_i1(t2)||f_i2(t1)||f_i3(t1)|.
    Raises PreconditionViolated if the three-form equation fails on the box.
    """
    if not sd_t_report(fs, box, spec, budget=budget, tolerance=tolerance).ok:
        raise PreconditionViolated("the three-form equation fails on the box")
    vals = [{} for _ in fs]

    def f(i, y):
        cache = vals[i]
        if y not in cache:
            cache[y] = evaluate(fs[i], y, spec)
        return cache[y]

    failures: list[IdentityFailure] = []
    for y in box:
        for k in range(3):
            lhs = f(k, 2 * y)
            rhs = f(k, y) ** 2
            for i in range(3):
                if i != k:
                    rhs = rhs * f(i, y).abs2()
            if not values_equal(lhs, rhs, tolerance):
                failures.append(IdentityFailure(f"doubling_{k + 1}", (y,), lhs, rhs))
    for t1 in box:
        for t2 in box:
            if not in_multiple_image(spec, t1 - t2, 2):
                continue
            for i1, i2, i3 in itertools.permutations(range(3)):
                lhs = f(i1, t1).abs() * f(i2, t2).abs() * f(i3, t2).abs()
                rhs = f(i1, t2).abs() * f(i2, t1).abs() * f(i3, t1).abs()
                if not values_equal(lhs, rhs, tolerance):
                    failures.append(IdentityFailure(f"same_coset_{i1 + 1}{i2 + 1}{i3 + 1}", (t1, t2), lhs, rhs))
    return failures


def derived_identities_check(
    fs: Sequence[CharFn], box: TestBox, spec: SupernaturalSpec, tolerance: float = DEFAULT_TOLERANCE, budget: int | None = None
) -> bool:
    return not derived_identities_report(fs, box, spec, tolerance, budget)


def halving_solve(y1: Rational, y2: Rational, y3: Rational, spec: SupernaturalSpec) -> tuple[Fraction, Fraction, Fraction]:
    """Solve u1+u2+u3 = y1, u1-u2-u3 = y2, u1+u2-u3 = y3 inside H_a.

    The solution is u1 = (y1+y2)/2, u2 = (y3-y2)/2, u3 = (y1-y3)/2; it exists
    in H_a iff the y_i share a coset of Y^(2), otherwise NotDivisible.
    """
    y1, y2, y3 = (as_rational(y) for y in (y1, y2, y3))
    u1 = halve(spec, y1 + y2)
    u2 = halve(spec, y3 - y2)
    u3 = halve(spec, y1 - y3)
    if (u1 + u2 + u3, u1 - u2 - u3, u1 + u2 - u3) != (y1, y2, y3):
        raise AssertionError("halving solution does not satisfy the system")
    return u1, u2, u3


def nonvanishing_solution_is_character(
    fs: Sequence[CharFn], box: TestBox, spec: SupernaturalSpec, tolerance: float = DEFAULT_TOLERANCE, budget: int | None = None
) -> bool:
    """For non-vanishing solutions of the three-form equation: is each f_i
    multiplicative on the box (f(u+v) = f(u) f(v))?"""
    for f in fs:
        for y in box:
            if evaluate(f, y, spec).is_zero:
                raise PreconditionViolated(f"function vanishes at {y}")
    report = sd_t_report(fs, box, spec, budget=budget, tolerance=tolerance)
    if not report.ok:
        raise PreconditionViolated(
            f"the three-form equation fails on the box, e.g. at {report.violations[0].point}"
        )
    for f in fs:
        for u in box:
            for v in box:
                if u + v in box and not values_equal(f(u + v), f(u) * f(v), tolerance):
                    return False
    return True


__all__ = [
    "DEFAULT_BUDGET",
    "FormsMatrix",
    "Residual",
    "VerifyReport",
    "TestBox",
    "residual_at",
    "verify_on_box",
    "support_group_N",
    "sd_t_report",
    "derived_identities_report",
    "derived_identities_check",
    "halving_solve",
    "nonvanishing_solution_is_character",
    "NotDivisible",
]
