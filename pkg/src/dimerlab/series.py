"""Truncated formal power series with exact rational coefficients."""

from __future__ import annotations

from collections.abc import Iterable
from fractions import Fraction
from numbers import Rational


class RationalSeries:
    """c_0 + c_1 x + ... + c_K x^K + O(x^(K+1)), coefficients as Fractions.

    Binary operations truncate to the smaller order, so every coefficient
    that is returned is exact.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable[int | Fraction], order: int | None = None):
        cs = [Fraction(c) for c in coeffs]
        if order is not None:
            cs = (cs + [Fraction(0)] * (order + 1))[: order + 1]
        if not cs:
            raise ValueError("a series needs at least one coefficient")
        self.coeffs: tuple[Fraction, ...] = tuple(cs)

    @classmethod
    def variable(cls, order: int) -> RationalSeries:
        return cls([0, 1], order)

    @classmethod
    def constant(cls, c: int | Fraction, order: int) -> RationalSeries:
        return cls([c], order)

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def __len__(self) -> int:
        return len(self.coeffs)

    def __getitem__(self, k: int) -> Fraction:
        return self.coeffs[k]

    def __iter__(self):
        return iter(self.coeffs)

    def __repr__(self) -> str:
        terms = " + ".join(f"({c})x^{k}" for k, c in enumerate(self.coeffs) if c)
        return f"RationalSeries({terms or '0'} + O(x^{self.order + 1}))"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RationalSeries):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self) -> int:
        return hash(self.coeffs)

    def truncate(self, order: int) -> RationalSeries:
        if order > self.order:
            raise ValueError(f"cannot extend a series of order {self.order} to {order}")
        return RationalSeries(self.coeffs[: order + 1])

    def valuation(self) -> int | None:
        for k, c in enumerate(self.coeffs):
            if c:
                return k
        return None

    # -- ring operations ----------------------------------------------------

    def _coerce(self, other) -> RationalSeries:
        if isinstance(other, RationalSeries):
            return other
        if isinstance(other, (int, Rational)):
            return RationalSeries([other], self.order)
        return NotImplemented

    def __add__(self, other) -> RationalSeries:
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        k = min(self.order, other.order)
        return RationalSeries([a + b for a, b in zip(self.coeffs[: k + 1], other.coeffs[: k + 1])])

    __radd__ = __add__

    def __neg__(self) -> RationalSeries:
        return RationalSeries([-c for c in self.coeffs])

    def __sub__(self, other) -> RationalSeries:
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other) -> RationalSeries:
        return (-self) + other

    def __mul__(self, other) -> RationalSeries:
        if isinstance(other, (int, Rational)):
            return RationalSeries([c * other for c in self.coeffs])
        if not isinstance(other, RationalSeries):
            return NotImplemented
        K = min(self.order, other.order)
        a, b = self.coeffs, other.coeffs
        out = []
        for n in range(K + 1):
            s = Fraction(0)
            for i in range(n + 1):
                if a[i] and b[n - i]:
                    s += a[i] * b[n - i]
            out.append(s)
        return RationalSeries(out)

    __rmul__ = __mul__

    def reciprocal(self) -> RationalSeries:
        a = self.coeffs
        if not a[0]:
            raise ZeroDivisionError("reciprocal needs a nonzero constant term")
        inv0 = 1 / a[0]
        out = [inv0]
        for n in range(1, self.order + 1):
            s = sum((a[i] * out[n - i] for i in range(1, n + 1)), Fraction(0))
            out.append(-s * inv0)
        return RationalSeries(out)

    def __truediv__(self, other) -> RationalSeries:
        if isinstance(other, (int, Rational)):
            return RationalSeries([c / other for c in self.coeffs])
        return self * other.reciprocal()

    def __pow__(self, e: int) -> RationalSeries:
        if e < 0:
            return self.reciprocal() ** (-e)
        result = RationalSeries.constant(1, self.order)
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    # -- calculus -----------------------------------------------------------

    def derivative(self) -> RationalSeries:
        if self.order == 0:
            raise ValueError("derivative of an order-0 series carries no information")
        return RationalSeries([k * c for k, c in enumerate(self.coeffs)][1:])

    def integral(self) -> RationalSeries:
        """Antiderivative with zero constant term (order grows by one)."""
        return RationalSeries([0] + [c / (k + 1) for k, c in enumerate(self.coeffs)])

    def mul_x(self) -> RationalSeries:
        return RationalSeries((0,) + self.coeffs)

    def div_x(self) -> RationalSeries:
        if self.coeffs[0]:
            raise ValueError("div_x needs a zero constant term")
        return RationalSeries(self.coeffs[1:])

    def x_derivative(self) -> RationalSeries:
        """x d/dx, which keeps the order."""
        return RationalSeries([k * c for k, c in enumerate(self.coeffs)])

    def log(self) -> RationalSeries:
        if self.coeffs[0] != 1:
            raise ValueError("log needs constant term 1")
        if self.order == 0:
            return RationalSeries([0])
        return (self.derivative() * self.truncate(self.order - 1).reciprocal()).integral()

    def exp(self) -> RationalSeries:
        if self.coeffs[0]:
            raise ValueError("exp needs constant term 0")
        s = self.coeffs
        out = [Fraction(1)]
        for n in range(1, self.order + 1):
            acc = sum((k * s[k] * out[n - k] for k in range(1, n + 1)), Fraction(0))
            out.append(acc / n)
        return RationalSeries(out)

    def compose(self, inner: RationalSeries) -> RationalSeries:
        """self(inner(x)); ``inner`` must have zero constant term."""
        if inner.coeffs[0]:
            raise ValueError("composition needs an inner series with zero constant term")
        K = min(self.order, inner.order)
        inner = inner.truncate(K)
        result = RationalSeries.constant(self.coeffs[K], K)
        for k in range(K - 1, -1, -1):
            result = result * inner + self.coeffs[k]
        return result

    def __call__(self, inner: RationalSeries) -> RationalSeries:
        return self.compose(inner)

    def revert(self) -> RationalSeries:
        """Compositional inverse T with self(T(x)) = x, by Lagrange inversion.

        [x^n] T = (1/n) [w^(n-1)] (w / S(w))^n.
        """
        if self.coeffs[0]:
            raise ValueError("reversion needs a zero constant term")
        if self.order < 1 or not self.coeffs[1]:
            raise ValueError("reversion needs a nonzero linear coefficient")
        K = self.order
        phi = self.div_x().reciprocal()  # w / S(w), order K - 1
        out = [Fraction(0)]
        power = RationalSeries.constant(1, K - 1)
        for n in range(1, K + 1):
            power = power * phi
            out.append(power[n - 1] / n)
        return RationalSeries(out)


def log1p_series(order: int, scale: int | Fraction = 1) -> RationalSeries:
    """ln(1 + scale x) through the given order."""
    return RationalSeries([0] + [Fraction((-1) ** (k + 1)) * Fraction(scale) ** k / k for k in range(1, order + 1)])
