"""Reading polynomials from JSON records or short text expressions."""

from __future__ import annotations

from fractions import Fraction

from .poly import Polynomial
from .scalars import QI

__all__ = ["parse_polynomial", "ParseError"]


class ParseError(ValueError):
    pass


def _symbols(n):
    import sympy

    syms = sympy.symbols(" ".join(f"z{i + 1}" for i in range(n)))
    return (syms,) if n == 1 else tuple(syms)


def _from_text(text: str, n: int, exact: bool) -> Polynomial:
    import sympy

    syms = _symbols(n)
    local = {f"z{i + 1}": s for i, s in enumerate(syms)}
    if n == 1:
        local["z"] = syms[0]
    local["I"] = sympy.I
    local["i"] = sympy.I
    src = text.replace("^", "**")
    try:
        # decimals are read as exact rationals
        expr = sympy.sympify(src, locals=local, rational=True)
        extra = expr.free_symbols - set(syms)
        if extra:
            raise ParseError(f"unknown symbols {sorted(map(str, extra))} in {text!r}")
        poly = sympy.Poly(sympy.expand(expr), *syms)
    except (sympy.SympifyError, sympy.PolynomialError, TypeError, SyntaxError) as exc:
        raise ParseError(f"cannot parse polynomial {text!r}: {exc}") from exc
    terms = {}
    for mono, coeff in poly.terms():
        re_part, im_part = sympy.re(coeff), sympy.im(coeff)
        if not (re_part.is_Rational and im_part.is_Rational):
            if exact:
                raise ParseError(f"coefficient {coeff} is not Gaussian-rational")
            terms[tuple(mono)] = complex(sympy.N(coeff, 17))
            continue
        fr = Fraction(int(re_part.p), int(re_part.q))
        fi = Fraction(int(im_part.p), int(im_part.q))
        terms[tuple(mono)] = QI(fr, fi) if exact else complex(float(fr), float(fi))
    return Polynomial(n, terms, exact=exact)


def parse_polynomial(value, n: int, exact: bool = False) -> Polynomial:
    """Accept a record list ``[{"exponents": [...], "re": .., "im": ..}]`` or a string.

    Strings use ``z1, z2, ...`` (``z`` is allowed when ``n == 1``), ``I`` or
    ``i`` for the imaginary unit, and ``^`` or ``**`` for powers.
    """
    if isinstance(value, Polynomial):
        return value.to_exact() if exact else value.to_float()
    if isinstance(value, str):
        return _from_text(value, n, exact)
    if isinstance(value, list):
        try:
            p = Polynomial.from_records(value, n=n, exact=exact) if value else Polynomial.zero(n, exact)
        except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
            raise ParseError(f"bad polynomial records: {exc}") from exc
        return p
    raise ParseError(f"cannot interpret {value!r} as a polynomial")
