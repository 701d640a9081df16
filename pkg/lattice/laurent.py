from __future__ import annotations

from dataclasses import dataclass
from numbers import Number

import numpy as np
from numpy.polynomial import Polynomial


@dataclass(frozen=True, eq=False)
class Laurent:
    """p(beta) = beta**low * poly(beta), with poly[0] != 0 unless p is zero."""
    poly: Polynomial
    low: int = 0

    @classmethod
    def from_coefficients(cls, coefficients, low: int = 0) -> "Laurent":
        coef = np.asarray(coefficients, dtype=complex)
        nonzero = np.flatnonzero(coef)
        if len(nonzero) == 0:
            return cls(Polynomial([0j]), 0)
        coef = coef[nonzero[0]:nonzero[-1] + 1]
        return cls(Polynomial(coef), low + int(nonzero[0]))

    @property
    def coef(self) -> np.ndarray:
        return self.poly.coef

    @property
    def high(self) -> int:
        return self.low + len(self.coef) - 1

    def is_zero(self, tol: float = 0.0) -> bool:
        return bool(np.all(np.abs(self.coef) <= tol))

    def _aligned(self, other: "Laurent"):
        low = min(self.low, other.low)
        size = max(self.high, other.high) - low + 1
        a = np.zeros(size, dtype=complex)
        b = np.zeros(size, dtype=complex)
        a[self.low - low:self.low - low + len(self.coef)] = self.coef
        b[other.low - low:other.low - low + len(other.coef)] = other.coef
        return a, b, low

    def __add__(self, other):
        if isinstance(other, Number):
            other = Laurent.from_coefficients([other])
        a, b, low = self._aligned(other)
        return Laurent.from_coefficients(a + b, low)

    __radd__ = __add__

    def __neg__(self):
        return Laurent(-self.poly, self.low)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Number):
            return Laurent.from_coefficients(self.coef * other, self.low)
        return Laurent.from_coefficients((self.poly * other.poly).coef, self.low + other.low)

    __rmul__ = __mul__

    def deriv(self) -> "Laurent":
        x = Polynomial([0, 1])
        numerator = self.low * self.poly + x * self.poly.deriv()
        return Laurent.from_coefficients(numerator.coef, self.low - 1)

    def __call__(self, beta):
        beta = np.asarray(beta, dtype=complex)
        return beta ** self.low * self.poly(beta)

    def numerator(self) -> Polynomial:
        """The ordinary polynomial sharing the nonzero roots of p."""
        coef = np.trim_zeros(self.coef, "b")
        return Polynomial(coef if len(coef) else [0j])

    def roots(self) -> np.ndarray:
        numerator = self.numerator()
        if numerator.degree() < 1:
            return np.array([], dtype=complex)
        return np.polynomial.polynomial.polyroots(numerator.coef)
