"""Multi-component dual numbers for exact mixed first derivatives.

An n-dual number is an element of C[e_1, ..., e_n] with e_i^2 = 0. Since each
generator is nilpotent at first order, evaluating an expression on duals
yields all mixed partial derivatives d^n/(da_1 .. da_n) exactly (no
truncation error beyond floating point). Coefficients are stored densely,
indexed by the bitmask of generators present in the monomial.
"""

from __future__ import annotations

import math
from numbers import Number

import numpy as np

__all__ = ["MultiDual"]


class MultiDual:
    """Truncated polynomial over n nilpotent generators (e_i^2 = 0)."""

    __slots__ = ("coeffs", "n")

    def __init__(self, coeffs: np.ndarray, n: int):
        self.coeffs = np.asarray(coeffs, dtype=complex)
        self.n = n
        if self.coeffs.shape != (1 << n,):
            raise ValueError(f"need {1 << n} coefficients for {n} generators")

    @classmethod
    def const(cls, value: complex, n: int) -> "MultiDual":
        c = np.zeros(1 << n, dtype=complex)
        c[0] = value
        return cls(c, n)

    @classmethod
    def variable(cls, value: complex, index: int, n: int) -> "MultiDual":
        """value + e_index."""
        c = np.zeros(1 << n, dtype=complex)
        c[0] = value
        c[1 << index] = 1.0
        return cls(c, n)

    @classmethod
    def lifted(cls, f0: complex, df: complex, index: int, sign: float, n: int) -> "MultiDual":
        """f(s + sign * e_index) = f(s) + sign * f'(s) e_index for a C^1 function f."""
        c = np.zeros(1 << n, dtype=complex)
        c[0] = f0
        c[1 << index] = sign * df
        return cls(c, n)

    @property
    def value(self) -> complex:
        return complex(self.coeffs[0])

    def top(self) -> complex:
        """Coefficient of e_1 e_2 ... e_n, i.e. the full mixed derivative."""
        return complex(self.coeffs[-1])

    def _coerce(self, other) -> "MultiDual":
        if isinstance(other, MultiDual):
            if other.n != self.n:
                raise ValueError("mixing duals with different generator counts")
            return other
        if isinstance(other, Number):
            return MultiDual.const(other, self.n)
        return NotImplemented  # type: ignore[return-value]

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return MultiDual(self.coeffs + other.coeffs, self.n)

    __radd__ = __add__

    def __neg__(self):
        return MultiDual(-self.coeffs, self.n)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return MultiDual(self.coeffs - other.coeffs, self.n)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return MultiDual(other.coeffs - self.coeffs, self.n)

    def __mul__(self, other):
        if isinstance(other, Number):
            return MultiDual(self.coeffs * complex(other), self.n)
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        a, b = self.coeffs, other.coeffs
        out = np.zeros_like(a)
        for s in range(a.size):
            # enumerate submasks of s; e_i^2 = 0 kills everything else
            sub = s
            while True:
                out[s] += a[sub] * b[s ^ sub]
                if sub == 0:
                    break
                sub = (sub - 1) & s
        return MultiDual(out, self.n)

    __rmul__ = __mul__

    def exp(self) -> "MultiDual":
        """exp of a dual: exp(a) * sum_m nil^m / m! (finite, nil^(n+1) = 0)."""
        a = self.coeffs[0]
        nil = MultiDual(self.coeffs.copy(), self.n)
        nil.coeffs[0] = 0.0
        result = MultiDual.const(1.0, self.n)
        term = MultiDual.const(1.0, self.n)
        for m in range(1, self.n + 1):
            term = term * nil
            result = result + term * (1.0 / math.factorial(m))
        return result * complex(np.exp(a))

    def __repr__(self) -> str:
        return f"MultiDual(n={self.n}, coeffs={self.coeffs!r})"
