"""Named subspaces and seeded random instances.

Generators are built in exact arithmetic whenever the inputs are rational;
``Instance.float_generators`` converts them for the float pipeline.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

from .poly import Polynomial, monomials_up_to
from .scalars import QI, parse_rational

__all__ = [
    "Instance",
    "blaschke_series",
    "gap_monomial_instance",
    "blaschke_instance",
    "bidisk_inner_example",
    "submodule_generators",
    "monomial_span",
    "random_instance",
    "random_polynomial",
]


@dataclass
class Instance:
    n: int
    D: int
    generators: list
    horizon: int | None = None
    label: str = ""
    meta: dict = field(default_factory=dict)

    def float_generators(self) -> list[Polynomial]:
        return [g.to_float() for g in self.generators]


def _scalar(value, exact):
    if exact:
        if isinstance(value, complex):
            return QI(parse_rational(value.real), parse_rational(value.imag))
        return value if isinstance(value, QI) else QI(value)
    return complex(value)


def blaschke_series(a, D: int, exact: bool = True) -> Polynomial:
    """Degree-``D`` Taylor polynomial of ``(a - z) / (1 - conj(a) z)``.

    Coefficients: ``a`` at degree 0 and ``-(1 - |a|^2) conj(a)^(j-1)`` at
    degree ``j >= 1``.
    """
    a = _scalar(a, exact)
    if not 0 < abs(a) < 1:
        raise ValueError("need 0 < |a| < 1")
    ac = a.conjugate()
    one = _scalar(1, exact)
    lead = -(one - a * ac)
    terms = {(0,): a}
    power = one
    for j in range(1, D + 1):
        terms[(j,)] = lead * power
        power = power * ac
    return Polynomial(1, terms, exact=exact)


def gap_monomial_instance(D: int = 4, exact: bool = True) -> Instance:
    """All monomials of degree 1..D in two variables except ``z1*z2``."""
    gens = [Polynomial.monomial(k, 1, exact) for k in monomials_up_to(2, D)
            if sum(k) >= 1 and k != (1, 1)]
    return Instance(2, D, gens, None, "EX_11_1")


def blaschke_instance(a=Fraction(1, 2), D: int = 12, exact: bool = True) -> Instance:
    """``span{1, z, z^2 B, ..., z^(D-2) B}`` truncated, with the simple Blaschke factor ``B``.

    The horizon is ``D - 2``: the generator list stops at ``z^(D-2) B``, so
    levels above that are not represented faithfully.
    """
    if D < 3:
        raise ValueError("need D >= 3")
    B = blaschke_series(a, D, exact)
    gens = [Polynomial.constant(1, 1, exact), Polynomial.variable(0, 1, exact)]
    gens += [B.shift((j,)).truncate(D) for j in range(2, D - 1)]
    return Instance(1, D, gens, D - 2, "EX_11_7", {"a": str(a)})


def bidisk_inner_example(exact: bool = True) -> Polynomial:
    """``z1*z2 + z2^2``."""
    return Polynomial(2, {(1, 1): _scalar(1, exact), (0, 2): _scalar(1, exact)}, exact=exact)


def submodule_generators(gens, D: int) -> list[Polynomial]:
    """``trunc(z^alpha g)`` for every generator and every ``|alpha| <= D - ord(g)``."""
    out = []
    for g in gens:
        if g.is_zero():
            continue
        for alpha in monomials_up_to(g.n, D - int(g.ord())):
            p = g.shift(alpha).truncate(D)
            if not p.is_zero():
                out.append(p)
    return out


def monomial_span(indices, n: int, exact: bool = True) -> list[Polynomial]:
    return [Polynomial.monomial(k, 1, exact) for k in indices]


_COEFFS = [Fraction(1), Fraction(-1), Fraction(2), Fraction(1, 2), Fraction(-3, 2), Fraction(3)]


def random_polynomial(rng: random.Random, n: int, D: int, max_terms: int = 4,
                      min_degree: int = 0, complex_coeffs: bool = True) -> Polynomial:
    """Sparse polynomial with small rational (optionally Gaussian) coefficients."""
    mons = [k for k in monomials_up_to(n, D) if sum(k) >= min_degree]
    chosen = rng.sample(mons, min(len(mons), rng.randint(1, max_terms)))
    terms = {}
    for k in chosen:
        re = rng.choice(_COEFFS)
        im = rng.choice(_COEFFS + [Fraction(0)] * 4) if complex_coeffs else Fraction(0)
        terms[k] = QI(re, im)
    return Polynomial(n, terms, exact=True)


def random_instance(rng: random.Random, n: int | None = None, D: int | None = None,
                    kind: str | None = None) -> Instance:
    """Seeded random instance with ``n <= 2`` and ``D <= 4``.

    Kinds: ``span`` (a few random generators), ``submodule`` (truncated
    module generated by one or two polynomials), ``submodule_plus`` (a
    submodule with one extra generator) and ``monomials`` (a random set of
    monomials).
    """
    n = n or rng.choice([1, 2, 2])
    D = D or rng.randint(2, 4)
    kind = kind or rng.choice(["span", "submodule", "submodule", "submodule_plus", "monomials"])
    if kind == "span":
        gens = [random_polynomial(rng, n, D) for _ in range(rng.randint(1, 4))]
    elif kind in ("submodule", "submodule_plus"):
        seeds = [random_polynomial(rng, n, D - 1, max_terms=3) for _ in range(rng.randint(1, 2))]
        gens = submodule_generators(seeds, D)
        if kind == "submodule_plus":
            gens.append(random_polynomial(rng, n, D))
    elif kind == "monomials":
        mons = monomials_up_to(n, D)
        gens = monomial_span(rng.sample(mons, rng.randint(1, len(mons))), n)
    else:
        raise ValueError(f"unknown instance kind {kind!r}")
    return Instance(n, D, gens, None, kind)
