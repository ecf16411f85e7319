"""Sparse multivariate polynomials and the standard order function.

A polynomial is an immutable map from exponent tuples (multi-indices) to
complex coefficients.  Coefficients are either all :class:`~valmod.scalars.QI`
(exact mode) or all ``complex`` (float mode).  Float-mode results drop
coefficients whose modulus is at most ``prune`` times the largest operand
coefficient.

``ord`` is the order of vanishing at the origin: the smallest total degree
carrying a nonzero coefficient, or :data:`INFINITY` for the zero polynomial.
"""

from __future__ import annotations

import math
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from itertools import combinations_with_replacement
from types import MappingProxyType

from .scalars import QI, ModeError, coerce, parse_rational

__all__ = [
    "INFINITY",
    "DEFAULT_PRUNE",
    "MultiIndex",
    "Polynomial",
    "degree",
    "grlex_key",
    "monomials_up_to",
    "monomials_of_degree",
    "ord",
    "homogeneous_part",
    "AxiomResult",
    "AxiomReport",
    "check_valuation_axioms",
    "semicontinuity_index",
]

INFINITY = math.inf
DEFAULT_PRUNE = 1e-12

MultiIndex = tuple  # tuple[int, ...]; exponents of z_1 .. z_n


def degree(k: Sequence[int]) -> int:
    return sum(k)


def grlex_key(k: Sequence[int]):
    """Sort key for graded lexicographic order, lowest degree first.

    Within a degree ``z1^2`` precedes ``z1*z2`` precedes ``z2^2``.
    """
    return (sum(k), tuple(-e for e in k))


def monomials_of_degree(n: int, d: int) -> list[tuple[int, ...]]:
    out = []
    for combo in combinations_with_replacement(range(n), d):
        k = [0] * n
        for i in combo:
            k[i] += 1
        out.append(tuple(k))
    out.sort(key=grlex_key)
    return out


def monomials_up_to(n: int, D: int) -> list[tuple[int, ...]]:
    """All multi-indices with ``|k| <= D`` in graded-lex order."""
    out = []
    for d in range(D + 1):
        out.extend(monomials_of_degree(n, d))
    return out


def _check_index(k, n):
    if len(k) != n:
        raise ValueError(f"multi-index {k} does not have length {n}")
    if any((not isinstance(e, int)) or e < 0 for e in k):
        raise ValueError(f"multi-index {k} must have non-negative integer entries")


class Polynomial:
    """Immutable sparse polynomial in ``n`` complex variables."""

    __slots__ = ("_n", "_terms", "_exact")

    def __init__(self, n: int, terms: Mapping | Iterable = (), exact: bool | None = None,
                 prune: float = DEFAULT_PRUNE):
        if n < 1:
            raise ValueError("dimension must be at least 1")
        items = terms.items() if isinstance(terms, Mapping) else terms
        raw = {}
        for k, c in items:
            k = tuple(int(e) for e in k)
            _check_index(k, n)
            raw[k] = raw[k] + c if k in raw else c
        if exact is None:
            kinds = {isinstance(c, QI) for c in raw.values()}
            if len(kinds) > 1:
                if any(isinstance(c, (float, complex)) for c in raw.values()):
                    raise ModeError("mixed exact and float coefficients")
                exact = True
            else:
                exact = kinds == {True}
        clean = {}
        for k, c in raw.items():
            clean[k] = coerce(c, exact)
        self._n = n
        self._exact = exact
        self._terms = _pruned(clean, exact, _scale_of(clean.values(), exact), prune)

    @classmethod
    def _raw(cls, n, terms, exact):
        obj = object.__new__(cls)
        obj._n = n
        obj._terms = terms
        obj._exact = exact
        return obj

    # construction helpers -------------------------------------------------
    @classmethod
    def zero(cls, n: int, exact: bool = False) -> "Polynomial":
        return cls._raw(n, {}, exact)

    @classmethod
    def monomial(cls, k: Sequence[int], coeff=1, exact: bool = False) -> "Polynomial":
        k = tuple(k)
        return cls(len(k), {k: coerce(coeff, exact)}, exact=exact)

    @classmethod
    def constant(cls, n: int, c=1, exact: bool = False) -> "Polynomial":
        return cls(n, {(0,) * n: coerce(c, exact)}, exact=exact)

    @classmethod
    def variable(cls, i: int, n: int, exact: bool = False) -> "Polynomial":
        """The coordinate function ``z_{i+1}`` (zero-based ``i``)."""
        k = [0] * n
        k[i] = 1
        return cls.monomial(k, 1, exact)

    @classmethod
    def from_records(cls, records: Sequence[Mapping], n: int | None = None,
                     exact: bool = False) -> "Polynomial":
        """Build from ``[{"exponents": [...], "re": .., "im": ..}, ...]``."""
        if n is None:
            if not records:
                raise ValueError("cannot infer the dimension of an empty record list")
            n = len(records[0]["exponents"])
        terms = {}
        for rec in records:
            k = tuple(rec["exponents"])
            re, im = rec.get("re", 0), rec.get("im", 0)
            if exact:
                c = QI(parse_rational(re), parse_rational(im))
            else:
                c = complex(float(parse_rational(re)) if isinstance(re, str) else float(re),
                            float(parse_rational(im)) if isinstance(im, str) else float(im))
            terms[k] = terms[k] + c if k in terms else c
        return cls(n, terms, exact=exact)

    # basic properties -----------------------------------------------------
    @property
    def n(self) -> int:
        return self._n

    @property
    def exact(self) -> bool:
        return self._exact

    @property
    def terms(self) -> Mapping:
        return MappingProxyType(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    @property
    def degree(self) -> int:
        """Largest total degree present; -1 for the zero polynomial."""
        return max((sum(k) for k in self._terms), default=-1)

    def ord(self):
        return min((sum(k) for k in self._terms), default=INFINITY)

    def coeff(self, k: Sequence[int]):
        k = tuple(k)
        if k in self._terms:
            return self._terms[k]
        return QI(0) if self._exact else 0j

    def sorted_terms(self) -> list:
        return sorted(self._terms.items(), key=lambda kv: grlex_key(kv[0]))

    def max_modulus(self) -> float:
        return max((abs(c) for c in self._terms.values()), default=0.0)

    # arithmetic -------------------------------------------------------------
    def _check(self, other: "Polynomial"):
        if not isinstance(other, Polynomial):
            raise TypeError(f"expected Polynomial, got {type(other).__name__}")
        if other._n != self._n:
            raise ValueError(f"dimension mismatch: {self._n} vs {other._n}")
        if other._exact != self._exact and (self._terms and other._terms):
            raise ModeError("cannot combine exact and float polynomials")

    def add(self, other: "Polynomial", prune: float = DEFAULT_PRUNE) -> "Polynomial":
        self._check(other)
        exact = self._exact if self._terms else other._exact
        out = dict(self._terms)
        for k, c in other._terms.items():
            out[k] = out[k] + c if k in out else c
        scale = max(_scale_of(self._terms.values(), exact), _scale_of(other._terms.values(), exact))
        return Polynomial._raw(self._n, _pruned(out, exact, scale, prune), exact)

    def scale(self, lam, prune: float = DEFAULT_PRUNE) -> "Polynomial":
        lam = coerce(lam, self._exact)
        out = {k: lam * c for k, c in self._terms.items()}
        scale = abs(lam) * _scale_of(self._terms.values(), self._exact)
        return Polynomial._raw(self._n, _pruned(out, self._exact, scale, prune), self._exact)

    def mul(self, other: "Polynomial", prune: float = DEFAULT_PRUNE) -> "Polynomial":
        self._check(other)
        exact = self._exact if self._terms else other._exact
        out = {}
        for k1, c1 in self._terms.items():
            for k2, c2 in other._terms.items():
                k = tuple(a + b for a, b in zip(k1, k2))
                out[k] = out[k] + c1 * c2 if k in out else c1 * c2
        scale = _scale_of(self._terms.values(), exact) * _scale_of(other._terms.values(), exact)
        return Polynomial._raw(self._n, _pruned(out, exact, scale, prune), exact)

    def shift(self, r: Sequence[int]) -> "Polynomial":
        """Multiply by the monomial ``z^r``."""
        r = tuple(r)
        _check_index(r, self._n)
        return Polynomial._raw(
            self._n, {tuple(a + b for a, b in zip(k, r)): c for k, c in self._terms.items()},
            self._exact)

    def truncate(self, D: int) -> "Polynomial":
        """Drop every term of total degree above ``D``."""
        return Polynomial._raw(self._n, {k: c for k, c in self._terms.items() if sum(k) <= D},
                               self._exact)

    def homogeneous_part(self, k: int) -> "Polynomial":
        if k < 0:
            raise ValueError("degree must be non-negative")
        return Polynomial._raw(self._n, {m: c for m, c in self._terms.items() if sum(m) == k},
                               self._exact)

    def conjugate_coefficients(self) -> "Polynomial":
        return Polynomial._raw(self._n, {k: c.conjugate() for k, c in self._terms.items()},
                               self._exact)

    def to_float(self) -> "Polynomial":
        if not self._exact:
            return self
        return Polynomial._raw(self._n, {k: complex(c) for k, c in self._terms.items()}, False)

    def to_exact(self) -> "Polynomial":
        """Exact copy of a float polynomial, reading each float by its repr."""
        if self._exact:
            return self
        return Polynomial._raw(
            self._n, {k: QI(c.real, c.imag) for k, c in self._terms.items()}, True)

    def evaluate(self, z: Sequence):
        z = tuple(z)
        if len(z) != self._n:
            raise ValueError("point has the wrong number of coordinates")
        total = QI(0) if self._exact else 0j
        for k, c in self._terms.items():
            t = c
            for zi, e in zip(z, k):
                if e:
                    t = t * zi ** e
            total = total + t
        return total

    def __add__(self, other):
        if isinstance(other, Polynomial):
            return self.add(other)
        return self.add(Polynomial.constant(self._n, other, self._exact))

    __radd__ = __add__

    def __neg__(self):
        return Polynomial._raw(self._n, {k: -c for k, c in self._terms.items()}, self._exact)

    def __sub__(self, other):
        if isinstance(other, Polynomial):
            return self.add(-other)
        return self.add(-Polynomial.constant(self._n, other, self._exact))

    def __rsub__(self, other):
        return (-self).__add__(other)

    def __mul__(self, other):
        if isinstance(other, Polynomial):
            return self.mul(other)
        return self.scale(other)

    def __rmul__(self, other):
        return self.scale(other)

    def __eq__(self, other):
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self._n == other._n and self._terms == other._terms

    def __hash__(self):
        return hash((self._n, frozenset(self._terms.items())))

    def almost_equal(self, other: "Polynomial", atol: float = 1e-12) -> bool:
        keys = set(self._terms) | set(other._terms)
        return all(abs(complex(self.coeff(k)) - complex(other.coeff(k))) <= atol for k in keys)

    # serialisation ----------------------------------------------------------
    def to_records(self) -> list[dict]:
        recs = []
        for k, c in self.sorted_terms():
            if self._exact:
                recs.append({"exponents": list(k), "re": str(c.re), "im": str(c.im)})
            else:
                recs.append({"exponents": list(k), "re": float(c.real), "im": float(c.imag)})
        return recs

    def __repr__(self):
        return f"Polynomial({self._n}, {self})"

    def __str__(self):
        if not self._terms:
            return "0"
        parts = []
        for k, c in self.sorted_terms():
            mono = "*".join(
                f"z{i + 1}" if e == 1 else f"z{i + 1}^{e}" for i, e in enumerate(k) if e)
            coef = _fmt_coeff(c, self._exact)
            if not mono:
                parts.append(coef)
            elif coef == "1":
                parts.append(mono)
            elif coef == "-1":
                parts.append("-" + mono)
            else:
                parts.append(f"{coef}*{mono}")
        return " + ".join(parts).replace("+ -", "- ")


def _fmt_coeff(c, exact):
    if exact:
        return str(c)
    if c.imag == 0:
        x = c.real
        return str(int(x)) if x == int(x) and abs(x) < 1e15 else f"{x:.12g}"
    return f"({c.real:.12g}{c.imag:+.12g}j)"


def _scale_of(values, exact) -> float:
    if exact:
        return 0.0
    return max((abs(c) for c in values), default=0.0)


def _pruned(terms: dict, exact: bool, scale: float, prune: float) -> dict:
    if exact:
        return {k: c for k, c in terms.items() if c}
    cut = prune * scale
    return {k: c for k, c in terms.items() if c != 0 and abs(c) > cut}


def ord(p: Polynomial):
    """Order of vanishing at the origin (``INFINITY`` for zero)."""
    return p.ord()


def homogeneous_part(p: Polynomial, k: int) -> Polynomial:
    return p.homogeneous_part(k)


# ---------------------------------------------------------------------------
# valuation axioms


@dataclass
class AxiomResult:
    name: str
    checked: int = 0
    witnesses: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.witnesses


@dataclass
class AxiomReport:
    results: dict

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results.values())

    def failures(self) -> list[str]:
        return [name for name, r in self.results.items() if not r.passed]



AXIOMS = (
    "algebra.unit",          # ord(r) = 0 for units
    "algebra.zero",          # ord(r) = inf iff r = 0
    "algebra.product",       # ord(rs) >= ord r + ord s
    "algebra.scalar",        # ord(lam r) = ord r
    "algebra.sum",           # ord(r+s) >= min(ord r, ord s)
    "module.zero",
    "module.product",
    "module.scalar",
    "module.sum",
)


def _scalar_list(exact):
    # nonzero multipliers for the scaling axiom
    if exact:
        return [QI(2, 1), QI(-1), QI(0, 1), QI("1/3")]
    return [2 + 1j, -1 + 0j, 1j, 1 / 3 + 0j]


def check_valuation_axioms(sample: Sequence[tuple[Polynomial, Polynomial]]) -> AxiomReport:
    """Check the algebra and module valuation axioms on polynomial pairs.

    Each pair ``(r, s)`` is used both as two algebra elements and as an
    algebra element acting on a module element (the module here is the
    polynomial ring acting on itself).  Upper semicontinuity is handled by
    :func:`semicontinuity_index`.
    """
    if not sample:
        raise ValueError("empty sample")
    res = {name: AxiomResult(name) for name in AXIOMS}

    def record(name, ok, witness):
        res[name].checked += 1
        if not ok:
            res[name].witnesses.append(witness)

    for r, s in sample:
        exact = r.exact if not r.is_zero() else s.exact
        for side, p in (("algebra", r), ("module", s)):
            if side == "algebra":
                is_unit = p.degree == 0
                if is_unit:
                    record("algebra.unit", p.ord() == 0, (str(p),))
            record(f"{side}.zero", (p.ord() == INFINITY) == p.is_zero(), (str(p),))
            for lam in _scalar_list(exact):
                record(f"{side}.scalar", p.scale(lam).ord() == p.ord(), (str(lam), str(p)))
        prod = r * s
        record("algebra.product", prod.ord() >= r.ord() + s.ord(), (str(r), str(s)))
        record("module.product", prod.ord() >= r.ord() + s.ord(), (str(r), str(s)))
        total = r + s
        record("algebra.sum", total.ord() >= min(r.ord(), s.ord()), (str(r), str(s)))
        record("module.sum", total.ord() >= min(r.ord(), s.ord()), (str(r), str(s)))
    return AxiomReport(res)


def semicontinuity_index(p: Polynomial, u: Polynomial, eps: Sequence):
    """Upper-semicontinuity surrogate along ``p_j = p + eps_j * u``.

    Returns the smallest ``J`` such that ``ord(p_j) <= ord(p)`` for every
    ``j >= J`` in the finite sequence, or ``None`` if the last element still
    violates it.
    """
    if p.is_zero():
        raise ValueError("p must be nonzero")
    base = p.ord()
    J = 0
    for j, e in enumerate(eps):
        if (p + u.scale(e)).ord() > base:
            J = j + 1
    return J if J < len(eps) else None
