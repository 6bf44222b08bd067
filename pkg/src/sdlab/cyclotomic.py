"""Exact arithmetic in Z[zeta_L] modulo the cyclotomic polynomial.

Elements are integer coefficient tuples of length phi(L) in the power
basis 1, zeta, ..., zeta^(phi(L)-1).  Reduction modulo the monic integer
polynomial Phi_L keeps coefficients integral, so equality of two reduced
tuples is equality in the field.
"""

from __future__ import annotations

import cmath
import math
from functools import cached_property

from sympy import Poly, cyclotomic_poly, symbols

_x = symbols("x")


class CyclotomicRing:
    def __init__(self, L: int):
        if L < 1:
            raise ValueError("L must be positive")
        self.L = L
        # low-to-high coefficients, monic
        self.phi = [int(c) for c in reversed(Poly(cyclotomic_poly(L, _x), _x).all_coeffs())]
        self.degree = len(self.phi) - 1

    def reduce(self, coeffs: list[int]) -> tuple[int, ...]:
        a = list(coeffs)
        d = self.degree
        for k in range(len(a) - 1, d - 1, -1):
            c = a[k]
            if c:
                for i in range(d + 1):
                    a[k - d + i] -= c * self.phi[i]
        a = a[:d] + [0] * max(0, d - len(a))
        return tuple(a)

    @cached_property
    def _powers(self) -> list[tuple[int, ...]]:
        out = []
        for k in range(self.L):
            mono = [0] * (k + 1)
            mono[k] = 1
            out.append(self.reduce(mono))
        return out

    def zeta_power(self, k: int) -> tuple[int, ...]:
        return self._powers[k % self.L]

    @property
    def zero(self) -> tuple[int, ...]:
        return (0,) * self.degree

    @property
    def one(self) -> tuple[int, ...]:
        return self.zeta_power(0)

    def add(self, a, b) -> tuple[int, ...]:
        return tuple(x + y for x, y in zip(a, b))

    def scale(self, a, k: int) -> tuple[int, ...]:
        return tuple(k * x for x in a)

    def mul(self, a, b) -> tuple[int, ...]:
        if not any(a) or not any(b):
            return self.zero
        out = [0] * (len(a) + len(b) - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    out[i + j] += x * y
        return self.reduce(out)

    def to_complex(self, a, denominator: int = 1) -> complex:
        z = cmath.exp(2j * math.pi / self.L)
        return sum(c * z**k for k, c in enumerate(a)) / denominator
