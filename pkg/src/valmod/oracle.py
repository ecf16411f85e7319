"""Exact Gaussian-rational pipeline used as ground truth for small instances.

Vectors are coefficient lists (not whitened) indexed by the graded-lex
monomials of degree ``<= D``; the inner product carries the rational
weights explicitly.  Nothing is normalized, so no square roots appear:
orthogonal bases are stored together with their squared norms.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

from .beurling import CheckReport, CheckResult, Verdict, Witness, collect_witnesses, r1_monomials
from .poly import Polynomial, grlex_key, monomials_up_to
from .scalars import QI
from .spaces import alpha_moment_exact

__all__ = [
    "OracleSizeError",
    "OracleInstance",
    "ExactSubspace",
    "exact_weights",
    "oracle_verdicts",
    "is_upset",
    "enumerate_monomial_subspaces",
    "exact_r1_inner_function",
    "orthogonal_residual",
]

MAX_N = 2
MAX_D = 4
ZERO = QI(0)


class OracleSizeError(ValueError):
    """Instance exceeds the exact pipeline's size bound."""


def exact_weights(kind: str, n: int, D: int, alpha=None) -> dict:
    kind = kind.upper()
    mons = monomials_up_to(n, D)
    if kind == "H2_POLYDISK":
        return {k: Fraction(1) for k in mons}
    if kind == "A2_DISK_ALPHA":
        if n != 1:
            raise ValueError("A2_DISK_ALPHA needs n = 1")
        if alpha is None or int(alpha) != alpha or alpha < 0:
            raise ValueError("exact A2_DISK_ALPHA needs a non-negative integer alpha")
        return {(m,): alpha_moment_exact(m, int(alpha)) for m in range(D + 1)}
    raise ValueError(f"{kind} has no exact rational weights")


# ---------------------------------------------------------------------------
# exact linear algebra on lists of QI


def _is_zero(v) -> bool:
    return not any(v)


def _sub_scaled(x, c, y):
    # x - c*y
    if not c:
        return list(x)
    return [a - c * b if b else a for a, b in zip(x, y)]


def _rref(rows):
    """Reduced row echelon form; returns (rows, pivot columns) with pivots ascending."""
    rows = [list(r) for r in rows if not _is_zero(r)]
    if not rows:
        return [], []
    ncols = len(rows[0])
    out, pivots = [], []
    for col in range(ncols):
        sel = next((i for i, r in enumerate(rows) if r[col]), None)
        if sel is None:
            continue
        piv = rows.pop(sel)
        inv = QI(1) / piv[col]
        piv = [a * inv if a else a for a in piv]
        rows = [_sub_scaled(r, r[col], piv) for r in rows]
        out = [_sub_scaled(r, r[col], piv) for r in out]
        out.append(piv)
        pivots.append(col)
        rows = [r for r in rows if not _is_zero(r)]
        if not rows:
            break
    return out, pivots


def _reduce(v, rows, pivots):
    for r, p in zip(rows, pivots):
        if v[p]:
            v = _sub_scaled(v, v[p], r)
    return v


def _nullspace(cols):
    """Basis of ``{c : sum_t c_t cols[t] = 0}`` as coefficient lists."""
    T = len(cols)
    if T == 0:
        return []
    R = len(cols[0])
    eqs = [[cols[t][i] for t in range(T)] for i in range(R)]
    E, piv = _rref(eqs)
    free = [t for t in range(T) if t not in piv]
    basis = []
    for f in free:
        c = [ZERO] * T
        c[f] = QI(1)
        for row, p in zip(E, piv):
            c[p] = -row[f]
        basis.append(c)
    return basis


def _combine(coeffs, vecs, N):
    out = [ZERO] * N
    for c, v in zip(coeffs, vecs):
        if c:
            out = [a + c * b if b else a for a, b in zip(out, v)]
    return out


def orthogonal_residual(v, basis, sqnorms, weights):
    """``v`` minus its projection on an orthogonal basis (exact)."""
    out = list(v)
    for b, s in zip(basis, sqnorms):
        c = _dot(out, b, weights) / s
        out = _sub_scaled(out, c, b)
    return out


def _dot(x, y, w):
    total = ZERO
    for a, b, c in zip(x, y, w):
        if a and b:
            total = total + a * b.conjugate() * c
    return total


# ---------------------------------------------------------------------------


class ExactSubspace:
    """Span of exact generators with its series and homogeneous components."""

    def __init__(self, weights: dict, n: int, D: int, generators, horizon: int | None = None):
        self.n, self.D = n, D
        self.monomials = monomials_up_to(n, D)
        self.N = len(self.monomials)
        self.index = {k: i for i, k in enumerate(self.monomials)}
        self.deg = [sum(k) for k in self.monomials]
        self.w = [Fraction(weights[k]) for k in self.monomials]
        self.horizon = D if horizon is None else horizon
        rows = [self.vector(g) for g in generators]
        self.E, self.pivots = _rref(rows)
        self.dim = len(self.E)
        self._components()

    # conversion -------------------------------------------------------------
    def vector(self, p: Polynomial):
        if not p.exact:
            raise TypeError("exact pipeline needs exact polynomials")
        if p.degree > self.D:
            raise ValueError("degree exceeds the truncation degree")
        v = [ZERO] * self.N
        for k, c in p.terms.items():
            v[self.index[k]] = c
        return v

    def polynomial(self, v) -> Polynomial:
        return Polynomial(self.n, {k: c for k, c in zip(self.monomials, v) if c}, exact=True)

    def dot(self, x, y):
        return _dot(x, y, self.w)

    def shift(self, r, v):
        out = [ZERO] * self.N
        dropped = False
        for i, c in enumerate(v):
            if c:
                j = self.index.get(tuple(a + b for a, b in zip(self.monomials[i], r)))
                if j is None:
                    dropped = True
                else:
                    out[j] = c
        return out, dropped

    # structure ----------------------------------------------------------------
    def _components(self):
        ortho, ortho_sq = [], []
        comps = [[] for _ in range(self.D + 1)]
        sq = [[] for _ in range(self.D + 1)]
        for k in range(self.D, -1, -1):
            cand = [orthogonal_residual(e, ortho, ortho_sq, self.w)
                    for e, p in zip(self.E, self.pivots) if self.deg[p] == k]
            basis, norms = [], []
            for v in reversed(cand):
                v = orthogonal_residual(v, basis, norms, self.w)
                basis.append(v)
                norms.append(self.dot(v, v).re)
            basis.reverse()
            norms.reverse()
            comps[k], sq[k] = basis, norms
            ortho, ortho_sq = basis + ortho, norms + ortho_sq
        self.components, self.component_sq = comps, sq
        self.ortho, self.ortho_sq = ortho, ortho_sq

    def series_dims(self) -> list[int]:
        return [sum(1 for p in self.pivots if self.deg[p] >= k) for k in range(self.D + 2)]

    def dims(self) -> list[int]:
        return [len(c) for c in self.components]

    def residual(self, v):
        return orthogonal_residual(v, self.ortho, self.ortho_sq, self.w)

    def contains(self, v) -> bool:
        return _is_zero(_reduce(list(v), self.E, self.pivots))

    def norm(self, v) -> float:
        return math.sqrt(float(self.dot(v, v).re))

    # checks -------------------------------------------------------------------
    def is_invariant(self) -> CheckResult:
        res = CheckResult("invariant", Verdict.PASS, mode="exact")
        found = []
        for k in range(self.D + 1):
            for u in self.components[k]:
                for i in range(self.n):
                    r = tuple(int(j == i) for j in range(self.n))
                    y, dropped = self.shift(r, u)
                    res.truncation_limited |= dropped
                    res.checked += 1
                    R = self.residual(y)
                    if not _is_zero(R):
                        found.append(Witness(r, self.polynomial(u), None, self.polynomial(R),
                                             self.norm(R)))
        collect_witnesses(res, found)
        res.verdict = Verdict.FAIL if found else Verdict.PASS
        return res

    def _trigger(self, X, L):
        """Trigger coefficient basis and the matching ``X c - g0`` vectors."""
        low = [(e, p) for e, p in zip(self.E, self.pivots) if self.deg[p] <= L]
        cut = sum(1 for d in self.deg if d <= L)
        rems, g0s = [], []
        for x in X:
            xp = x[:cut] + [ZERO] * (self.N - cut)
            coeffs = [xp[p] for _, p in low]
            rem = list(xp)
            for (e, p), c in zip(low, coeffs):
                if c:
                    rem = _sub_scaled(rem, c, e[:cut] + [ZERO] * (self.N - cut))
            rems.append(rem[:cut])
            g0s.append(_combine(coeffs, [e for e, _ in low], self.N))
        C = _nullspace(rems)
        out = []
        for c in C:
            h_part = _combine(c, X, self.N)
            g0 = _combine(c, g0s, self.N)
            out.append((c, [a - b for a, b in zip(h_part, g0)], h_part))
        return out

    def _level_sweep(self, full_projection: bool) -> CheckResult:
        name = "full_projection" if full_projection else "r1_inner_decomposition"
        res = CheckResult(name, Verdict.PASS, mode="exact")
        found = []
        heads = []
        for m in range(self.D + 1):
            rows = [[v if self.deg[i] == m else ZERO for i, v in enumerate(u)]
                    for u in self.components[m]]
            heads.append(_rref(rows))
        for k in range(self.D + 1):
            Wk = self.components[k]
            if not Wk:
                continue
            for r in r1_monomials(self.n, self.D - k):
                X = [self.shift(r, u)[0] for u in Wk]
                for m in range(self.D + 1):
                    if not full_projection and not self.components[m]:
                        continue
                    if m > self.horizon:
                        res.skipped += 1
                        continue
                    trig = self._trigger(X, m - 1 if full_projection else m)
                    if not trig:
                        continue
                    res.checked += 1
                    for c, e, xc in trig:
                        if full_projection:
                            em = [v if self.deg[i] == m else ZERO for i, v in enumerate(e)]
                            R = _reduce(em, *heads[m])
                        else:
                            R = [ZERO] * self.N
                            for u, s in zip(self.components[m], self.component_sq[m]):
                                R = [a + (self.dot(e, u) / s) * b if b else a
                                     for a, b in zip(R, u)]
                        if not _is_zero(R):
                            h = _combine(c, Wk, self.N)
                            found.append(Witness(r, self.polynomial(h), m, self.polynomial(R),
                                                 self.norm(R) / self.norm(h)))
        collect_witnesses(res, found)
        res.verdict = (Verdict.FAIL if found else
                       Verdict.TRUNCATION_LIMITED if res.skipped and not res.checked else
                       Verdict.PASS)
        res.truncation_limited = res.skipped > 0
        return res

    def is_r1_inner_decomposition(self) -> CheckResult:
        return self._level_sweep(False)

    def has_full_projection(self) -> CheckResult:
        return self._level_sweep(True)

    def verdict(self) -> CheckReport:
        inv = self.is_invariant()
        r1 = self.is_r1_inner_decomposition()
        fp = self.has_full_projection()
        rep = CheckReport(inv, r1, fp, mode="exact")
        if inv.passed != (r1.passed and fp.passed):
            rep.consistent = False
            rep.integrity_errors.append(f"exact verdicts violate the equivalence: {rep.verdicts()}")
        return rep


@dataclass
class OracleInstance:
    n: int
    D: int
    generators: list
    kind: str = "H2_POLYDISK"
    alpha: int | None = None
    horizon: int | None = None

    def check_size(self):
        if self.n > MAX_N or self.D > MAX_D:
            raise OracleSizeError(f"exact oracle handles n <= {MAX_N}, D <= {MAX_D}; "
                                  f"got n = {self.n}, D = {self.D}")

    def subspace(self, bounded: bool = True) -> ExactSubspace:
        if bounded:
            self.check_size()
        w = exact_weights(self.kind, self.n, self.D, self.alpha)
        return ExactSubspace(w, self.n, self.D, self.generators, self.horizon)


def oracle_verdicts(inst: OracleInstance) -> CheckReport:
    """Exact invariance, look-ahead and full-projection verdicts."""
    return inst.subspace().verdict()


def exact_r1_inner_function(f: Polynomial, weights: dict) -> tuple[bool, list]:
    """Exact ``<z^m f, f>`` for ``1 <= |m| <= deg f``; returns (verdict, nonzero pairings)."""
    if not f.exact:
        raise TypeError("need an exact polynomial")
    bad = []
    for m in r1_monomials(f.n, max(f.degree, 0)):
        total = ZERO
        for k, c in f.terms.items():
            km = tuple(a + b for a, b in zip(k, m))
            if km in f.terms:
                total = total + c * f.terms[km].conjugate() * weights[km]
        if total:
            bad.append((m, total))
    return not bad, bad


# ---------------------------------------------------------------------------
# monomial subspaces


def is_upset(S, n: int, D: int) -> bool:
    """``z^k in S`` with ``|k| <= D-1`` implies ``z^(k + e_i) in S`` for every ``i``."""
    S = set(S)
    for k in S:
        if sum(k) <= D - 1:
            for i in range(n):
                if tuple(e + (j == i) for j, e in enumerate(k)) not in S:
                    return False
    return True


@dataclass
class EnumerationReport:
    n: int
    D: int
    total: int = 0
    invariant_count: int = 0
    mismatches: list = field(default_factory=list)
    inconsistent: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.mismatches and not self.inconsistent


def enumerate_monomial_subspaces(n: int, D: int, verdict_fn) -> EnumerationReport:
    """Compare the up-set test with ``verdict_fn`` on every monomial subset.

    ``verdict_fn(indices)`` must return a :class:`CheckReport`.  The empty
    subset is included (the zero subspace is trivially invariant).
    """
    if n > MAX_N or D > 3:
        raise OracleSizeError("enumeration is limited to n <= 2, D <= 3")
    mons = sorted(monomials_up_to(n, D), key=grlex_key)
    rep = EnumerationReport(n, D)
    for size in range(len(mons) + 1):
        for S in itertools.combinations(mons, size):
            rep.total += 1
            comb = is_upset(S, n, D)
            rep.invariant_count += comb
            out = verdict_fn(S)
            if out.invariant.passed != comb:
                rep.mismatches.append((S, comb, out.verdicts()))
            if not out.consistent:
                rep.inconsistent.append((S, out.verdicts()))
    return rep
