"""Truncated power-series arithmetic around an arbitrary expansion center.

Everything downstream (moment formulas, cumulant tables, transform
reconstruction) consumes functions only through their jet at a single
point, so this module is the workhorse.  A series is stored as the
coefficient list of ``f(x) = sum_j c_j (x - center)^j`` up to a fixed
truncation order.  Coefficients may be floats, complex numbers or
``fractions.Fraction`` -- all operations are written as plain Python
loops so that exact rational jets survive untouched (the cross-checking
code relies on this to assert equalities exactly).

Binary operations truncate to the smaller of the two operand orders;
there is no silent padding.
"""

from __future__ import annotations

import cmath
import math
from fractions import Fraction

__all__ = ["TruncatedSeries"]


def _exact(*values):
    return all(isinstance(v, (int, Fraction)) for v in values)


def _div(a, b):
    # keep int/Fraction arithmetic exact; 3/2 must not become 1.5
    if _exact(a, b):
        return Fraction(a) / Fraction(b)
    return a / b


class TruncatedSeries:
    """Jet of a smooth function at ``center``, truncated after ``order``.

    Parameters
    ----------
    coeffs : sequence
        Taylor coefficients ``c_0 .. c_T`` (not raw derivatives:
        ``c_j = f^{(j)}(center) / j!``).
    center : number, optional
        Expansion point.  Default 0.
    """

    __slots__ = ("coeffs", "center")

    def __init__(self, coeffs, center=0):
        coeffs = list(coeffs)
        if not coeffs:
            raise ValueError("need at least the constant coefficient")
        self.coeffs = coeffs
        self.center = center

    # ------------------------------------------------------------------
    # constructors

    @classmethod
    def zero(cls, order, center=0):
        return cls([0] * (order + 1), center)

    @classmethod
    def constant(cls, value, order, center=0):
        c = [0] * (order + 1)
        c[0] = value
        return cls(c, center)

    @classmethod
    def variable(cls, order, center=0):
        """The identity function x, expanded around ``center``."""
        if order < 1:
            raise ValueError("identity needs order >= 1")
        c = [0] * (order + 1)
        c[0] = center
        c[1] = 1
        return cls(c, center)

    @classmethod
    def from_polynomial(cls, poly_coeffs, order, center=0):
        """Series of ``sum_j p_j x^j`` (coefficients in x, not x-center)."""
        out = cls.constant(0, order, center)
        x = cls.variable(order, center)
        for p in reversed(list(poly_coeffs)):
            out = out * x + p
        return out

    # ------------------------------------------------------------------
    # serialization

    def to_dict(self):
        return {"center": self.center, "coeffs": list(self.coeffs)}

    @classmethod
    def from_dict(cls, d):
        return cls(d["coeffs"], d.get("center", 0))

    # ------------------------------------------------------------------
    # basics

    @property
    def order(self):
        return len(self.coeffs) - 1

    def is_exact(self):
        return _exact(self.center, *self.coeffs)

    def truncate(self, order):
        if order >= self.order:
            return self
        return TruncatedSeries(self.coeffs[: order + 1], self.center)

    def __repr__(self):
        head = ", ".join(repr(c) for c in self.coeffs[:4])
        tail = ", ..." if self.order >= 4 else ""
        return f"TruncatedSeries([{head}{tail}], center={self.center!r}, order={self.order})"

    def __eq__(self, other):
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        return self.center == other.center and self.coeffs == other.coeffs

    def _check_center(self, other):
        if self.center != other.center:
            raise ValueError(f"center mismatch: {self.center!r} vs {other.center!r}")

    # ------------------------------------------------------------------
    # ring operations

    def __add__(self, other):
        if isinstance(other, TruncatedSeries):
            self._check_center(other)
            n = min(self.order, other.order)
            return TruncatedSeries(
                [self.coeffs[j] + other.coeffs[j] for j in range(n + 1)],
                self.center,
            )
        c = list(self.coeffs)
        c[0] = c[0] + other
        return TruncatedSeries(c, self.center)

    __radd__ = __add__

    def __neg__(self):
        return TruncatedSeries([-c for c in self.coeffs], self.center)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, TruncatedSeries):
            self._check_center(other)
            n = min(self.order, other.order)
            a, b = self.coeffs, other.coeffs
            out = [0] * (n + 1)
            for i in range(n + 1):
                ai = a[i]
                if ai == 0:
                    continue
                for j in range(n + 1 - i):
                    out[i + j] += ai * b[j]
            return TruncatedSeries(out, self.center)
        return TruncatedSeries([c * other for c in self.coeffs], self.center)

    __rmul__ = __mul__

    def pow_int(self, n):
        if n < 0:
            raise ValueError("negative powers go through div, not pow_int")
        out = TruncatedSeries.constant(1, self.order, self.center)
        for _ in range(n):
            out = out * self
        return out

    __pow__ = pow_int

    def div(self, other):
        """self / other; requires other(center) != 0."""
        self._check_center(other)
        b0 = other.coeffs[0]
        if b0 == 0:
            raise ZeroDivisionError("division by series vanishing at center")
        n = min(self.order, other.order)
        a, b = self.coeffs, other.coeffs
        out = [0] * (n + 1)
        for j in range(n + 1):
            acc = a[j]
            for i in range(j):
                acc = acc - out[i] * b[j - i]
            out[j] = _div(acc, b0)
        return TruncatedSeries(out, self.center)

    def __truediv__(self, other):
        if isinstance(other, TruncatedSeries):
            return self.div(other)
        return TruncatedSeries([_div(c, other) for c in self.coeffs], self.center)

    def reciprocal(self):
        return TruncatedSeries.constant(1, self.order, self.center).div(self)

    # ------------------------------------------------------------------
    # calculus

    def derivative(self):
        """d/dx as a series; the order drops by one."""
        if self.order == 0:
            return TruncatedSeries([0 * self.coeffs[0]], self.center)
        return TruncatedSeries(
            [j * self.coeffs[j] for j in range(1, self.order + 1)], self.center
        )

    def integrate(self, constant=0):
        out = [constant]
        for j, c in enumerate(self.coeffs):
            out.append(_div(c, j + 1))
        return TruncatedSeries(out, self.center)

    def deriv_at_center(self, m):
        """m-th derivative at the center: ``m! * coeffs[m]``."""
        if m > self.order:
            raise ValueError(f"derivative order {m} exceeds truncation {self.order}")
        return math.factorial(m) * self.coeffs[m]

    def divided_difference_limit(self, n):
        """Limit of the n-point divided-difference sum as all points merge.

        Equals ``f^{(n-1)}(center)/(n-1)!``, i.e. the Taylor coefficient
        of index ``n - 1``.
        """
        if n < 1 or n - 1 > self.order:
            raise ValueError(f"need 1 <= n <= order+1, got n={n}")
        return self.coeffs[n - 1]

    # ------------------------------------------------------------------
    # transcendental

    def exp_series(self):
        """exp(f).  Exact when f(center) == 0; float/complex otherwise."""
        a = self.coeffs
        # (exp f)' = f' exp f  =>  (j+1) e_{j+1} = sum_i (i+1) a_{i+1} e_{j-i}
        out = [1] + [0] * self.order
        for j in range(self.order):
            acc = 0
            for i in range(j + 1):
                acc += (i + 1) * a[i + 1] * out[j - i]
            out[j + 1] = _div(acc, j + 1)
        s = TruncatedSeries(out, self.center)
        if a[0] != 0:
            scale = cmath.exp(a[0]) if isinstance(a[0], complex) else math.exp(a[0])
            s = s * scale
        return s

    def log_series(self):
        """log(f); requires f(center) != 0.

        Exact when f(center) == 1; for other leading values the constant
        term is the float (or complex) logarithm.
        """
        a0 = self.coeffs[0]
        if a0 == 0:
            raise ZeroDivisionError("log of series vanishing at center")
        if a0 == 1:
            const = 0
        elif isinstance(a0, complex):
            const = cmath.log(a0)
        else:
            const = math.log(a0)
        # (log f)' = f'/f, integrated termwise
        body = self.derivative().div(self)
        return TruncatedSeries(body.integrate(const).coeffs[: self.order + 1], self.center)

    # ------------------------------------------------------------------
    # composition / evaluation

    def compose(self, inner):
        """self(inner(x)) where ``inner`` maps its center to our center.

        The outer jet is treated as an exact polynomial in
        ``(y - self.center)``; the result carries the inner center and
        truncation order.
        """
        if inner.coeffs[0] != self.center:
            raise ValueError(
                f"inner value at center is {inner.coeffs[0]!r}; "
                f"outer expects {self.center!r}"
            )
        shifted = TruncatedSeries(
            [0 if j == 0 else inner.coeffs[j] for j in range(inner.order + 1)],
            inner.center,
        )
        out = TruncatedSeries.constant(0, inner.order, inner.center)
        for c in reversed(self.coeffs):
            out = out * shifted + c
        return out

    def __call__(self, x):
        """Evaluate the truncating polynomial at a point (complex ok)."""
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * (x - self.center) + c
        return acc
