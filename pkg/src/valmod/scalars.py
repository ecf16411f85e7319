"""Complex scalars for the two arithmetic modes.

Float mode uses the builtin ``complex`` (binary64 pairs).  Exact mode uses
:class:`QI`, a Gaussian rational ``re + i*im`` with ``Fraction`` parts.  The
two are never mixed inside one computation; :func:`coerce` raises when asked
to combine them.
"""

from __future__ import annotations

from fractions import Fraction
from numbers import Rational

__all__ = ["QI", "ModeError", "parse_rational", "is_exact", "coerce", "to_complex"]


class ModeError(TypeError):
    """Raised when exact and float scalars meet in one operation."""


def parse_rational(value) -> Fraction:
    """Parse ``"p/q"``, ``"1.25"``, ints or Fractions into a Fraction.

    Floats are accepted through their shortest repr so that ``0.5`` becomes
    ``1/2`` rather than a 53-bit binary expansion.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("boolean is not a rational")
    if isinstance(value, (int, Rational)):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(repr(value))
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"cannot interpret {value!r} as a rational")


class QI:
    """Exact Gaussian rational."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = re if type(re) is Fraction else parse_rational(re)
        self.im = im if type(im) is Fraction else parse_rational(im)

    @classmethod
    def of(cls, value) -> "QI":
        if isinstance(value, QI):
            return value
        if isinstance(value, complex):
            raise ModeError("complex float given where an exact scalar is required")
        return cls(value, 0)

    def _other(self, other):
        if isinstance(other, QI):
            return other
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return QI(other, 0)
        if isinstance(other, (float, complex)):
            raise ModeError("cannot mix exact and float scalars")
        return NotImplemented

    def __add__(self, other):
        o = self._other(other)
        if o is NotImplemented:
            return o
        return QI(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._other(other)
        if o is NotImplemented:
            return o
        return QI(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        o = self._other(other)
        if o is NotImplemented:
            return o
        return QI(o.re - self.re, o.im - self.im)

    def __mul__(self, other):
        o = self._other(other)
        if o is NotImplemented:
            return o
        if not o.im and not self.im:
            return QI(self.re * o.re, Fraction(0))
        return QI(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._other(other)
        if o is NotImplemented:
            return o
        if not o.im:
            if not o.re:
                raise ZeroDivisionError("division by exact zero")
            return QI(self.re / o.re, self.im / o.re)
        d = o.re * o.re + o.im * o.im
        return QI((self.re * o.re + self.im * o.im) / d, (self.im * o.re - self.re * o.im) / d)

    def __rtruediv__(self, other):
        o = self._other(other)
        if o is NotImplemented:
            return o
        return o / self

    def __pow__(self, e):
        if not isinstance(e, int) or isinstance(e, bool):
            return NotImplemented
        base, out = (self, QI(1)) if e >= 0 else (QI(1) / self, QI(1))
        for _ in range(abs(e)):
            out = out * base
        return out

    def __neg__(self):
        return QI(-self.re, -self.im)

    def __pos__(self):
        return self

    def conjugate(self) -> "QI":
        return QI(self.re, -self.im)

    def abs2(self) -> Fraction:
        return self.re * self.re + self.im * self.im

    def __abs__(self) -> float:
        return abs(complex(self))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __eq__(self, other):
        if isinstance(other, QI):
            return self.re == other.re and self.im == other.im
        if isinstance(other, (int, Fraction)):
            return not self.im and self.re == other
        return NotImplemented

    def __hash__(self):
        return hash((self.re, self.im))

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        if not self.im:
            return f"QI({self.re})"
        return f"QI({self.re}, {self.im})"

    def __str__(self):
        if not self.im:
            return str(self.re)
        sign = "+" if self.im >= 0 else "-"
        return f"({self.re}{sign}{abs(self.im)}i)"


ZERO = QI(0, 0)
ONE = QI(1, 0)


def is_exact(value) -> bool:
    return isinstance(value, QI)


def coerce(value, exact: bool):
    """Convert ``value`` into the scalar type of the requested mode."""
    if exact:
        if isinstance(value, QI):
            return value
        if isinstance(value, (float, complex)):
            raise ModeError(f"float value {value!r} in exact mode")
        return QI(value, 0)
    if isinstance(value, QI):
        raise ModeError(f"exact value {value} in float mode")
    return complex(value)


def to_complex(value) -> complex:
    return complex(value)
