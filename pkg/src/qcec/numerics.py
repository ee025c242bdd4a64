"""Tolerance-aware complex arithmetic with value interning.

Every edge weight in the decision-diagram layer is routed through a
ComplexTable, which maps numerically equal values (up to a small tolerance)
to one canonical object. Canonical weights are compared and hashed by
identity, which is what makes whole diagrams comparable by root pointer.
"""

from __future__ import annotations

import math

DEFAULT_EPS = 1e-13


class InvalidNumberError(ValueError):
    """Raised when a non-finite value reaches the table."""


class SingularValueError(ZeroDivisionError):
    """Raised on division by a value that is zero within tolerance."""


class CVal:
    """One canonical complex value. Only ComplexTable creates these."""

    __slots__ = ("re", "im")

    def __init__(self, re: float, im: float):
        self.re = re
        self.im = im

    @property
    def value(self) -> complex:
        return complex(self.re, self.im)

    def mag2(self) -> float:
        return self.re * self.re + self.im * self.im

    def __repr__(self) -> str:
        return f"CVal({self.re!r}, {self.im!r})"


class ComplexTable:
    """Interning table over a tolerance grid.

    Lookup hashes the value to a grid bucket of size eps and probes the
    neighbouring buckets, so any entry within eps componentwise is found.
    Entries are never merged or moved; the first value interned in a
    neighbourhood becomes its canonical representative.
    """

    def __init__(self, eps: float = DEFAULT_EPS):
        if not (0.0 < eps < 1e-6):
            raise ValueError(f"unreasonable interning tolerance: {eps}")
        self.eps = eps
        self._buckets: dict[tuple[int, int], list[CVal]] = {}
        self.zero = self._insert(0.0, 0.0)
        self.one = self._insert(1.0, 0.0)

    def __len__(self) -> int:
        return sum(len(b) for b in self._buckets.values())

    def _insert(self, re: float, im: float) -> CVal:
        v = CVal(re, im)
        key = (math.floor(re / self.eps), math.floor(im / self.eps))
        self._buckets.setdefault(key, []).append(v)
        return v

    def intern(self, re: float, im: float = 0.0) -> CVal:
        """Return the canonical entry within eps of (re, im), creating one
        if no neighbourhood entry exists."""
        if not (math.isfinite(re) and math.isfinite(im)):
            raise InvalidNumberError(f"non-finite value ({re}, {im})")
        eps = self.eps
        kr = math.floor(re / eps)
        ki = math.floor(im / eps)
        buckets = self._buckets
        for dr in (0, -1, 1):
            for di in (0, -1, 1):
                hits = buckets.get((kr + dr, ki + di))
                if hits is None:
                    continue
                for v in hits:
                    if abs(v.re - re) <= eps and abs(v.im - im) <= eps:
                        return v
        return self._insert(re, im)

    def intern_value(self, z: complex) -> CVal:
        return self.intern(z.real, z.imag)

    # arithmetic: exact float math on the operands, result re-interned

    def add(self, a: CVal, b: CVal) -> CVal:
        if a is self.zero:
            return b
        if b is self.zero:
            return a
        return self.intern(a.re + b.re, a.im + b.im)

    def mul(self, a: CVal, b: CVal) -> CVal:
        if a is self.zero or b is self.zero:
            return self.zero
        if a is self.one:
            return b
        if b is self.one:
            return a
        return self.intern(a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re)

    def div(self, a: CVal, b: CVal) -> CVal:
        if b is self.zero or b.mag2() <= self.eps * self.eps:
            raise SingularValueError(f"division by (near-)zero {b!r}")
        if a is self.zero:
            return self.zero
        if a is b:
            return self.one
        if b is self.one:
            return a
        d = b.re * b.re + b.im * b.im
        return self.intern((a.re * b.re + a.im * b.im) / d,
                           (a.im * b.re - a.re * b.im) / d)

    def conj(self, a: CVal) -> CVal:
        if a.im == 0.0:
            return a
        return self.intern(a.re, -a.im)
