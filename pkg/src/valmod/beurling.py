"""Invariance, R1-inner decompositions, full projection and reconstruction.

The level conditions quantify over every ``u = r*h`` with ``h`` in a
component ``W_k`` and ``r`` a monomial of positive degree.  For fixed ``r``
the map ``h -> r*h`` is linear, so the set of ``h`` for which some ``g`` in
``V`` matches ``r*h`` through degree ``L`` is a subspace (the trigger
subspace).  The checks are run on a basis of that subspace, with ``g``
replaced by the least-squares particular solution ``g0``; the solution set is
``g0 + V_{L+1}``, and both conditions are insensitive to that ambiguity.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .poly import INFINITY, Polynomial, grlex_key, monomials_up_to
from .subspace import IntegrityError, Subspace, _null_split, order_of_vector

__all__ = [
    "Verdict",
    "Witness",
    "CheckResult",
    "CheckReport",
    "ReconstructionReport",
    "r1_monomials",
    "is_invariant",
    "is_r1_inner_subspace",
    "is_r1_inner_decomposition",
    "has_full_projection",
    "minimum_value_index",
    "beurling_verdict",
    "beurling_reconstruct",
]

MAX_WITNESSES = 20


class Verdict(str, Enum):
    PASS = "PASS"
    FAIL = "FAIL"
    TRUNCATION_LIMITED = "TRUNCATION_LIMITED"

    def __str__(self):
        return self.value


@dataclass
class Witness:
    r: tuple
    h: Polynomial
    m: int | None
    residual: Polynomial
    residual_norm: float

    def to_dict(self) -> dict:
        return {"r": list(self.r), "h": self.h.to_records(), "m": self.m,
                "residual": self.residual.to_records(), "residual_norm": self.residual_norm}


@dataclass
class CheckResult:
    name: str
    verdict: Verdict
    witnesses: list = field(default_factory=list)
    max_residual: float = 0.0      # largest residual among the checks that passed
    checked: int = 0
    skipped: int = 0               # level checks beyond the subspace horizon
    truncation_limited: bool = False
    mode: str = "float"

    @property
    def passed(self) -> bool:
        return self.verdict is not Verdict.FAIL

    def to_dict(self) -> dict:
        return {"name": self.name, "verdict": self.verdict.value, "mode": self.mode,
                "checked": self.checked, "skipped": self.skipped,
                "truncation_limited": self.truncation_limited,
                "max_pass_residual": self.max_residual,
                "witnesses": [w.to_dict() for w in self.witnesses]}


def witness_key(w: Witness):
    """Deterministic witness order: by ``h``'s leading monomial, then ``r``, then level."""
    lead = w.h.sorted_terms()[0][0] if not w.h.is_zero() else ()
    return (grlex_key(lead), grlex_key(w.r), -1 if w.m is None else w.m)


def collect_witnesses(res: CheckResult, found: list):
    res.witnesses = sorted(found, key=witness_key)[:MAX_WITNESSES]


def _verdict(failed: bool, checked: int, skipped: int) -> Verdict:
    if failed:
        return Verdict.FAIL
    if skipped and not checked:
        return Verdict.TRUNCATION_LIMITED
    return Verdict.PASS


@dataclass
class CheckReport:
    invariant: CheckResult
    r1_inner_decomposition: CheckResult
    full_projection: CheckResult
    consistent: bool = True
    integrity_errors: list = field(default_factory=list)
    mode: str = "float"

    def verdicts(self) -> dict:
        return {"invariant": self.invariant.verdict.value,
                "r1_inner": self.r1_inner_decomposition.verdict.value,
                "full_projection": self.full_projection.verdict.value}

    def booleans(self) -> dict:
        return {"invariant": self.invariant.passed,
                "r1_inner": self.r1_inner_decomposition.passed,
                "full_projection": self.full_projection.passed}

    def to_dict(self) -> dict:
        return {"mode": self.mode, "verdicts": self.verdicts(), "consistent": self.consistent,
                "integrity_errors": list(self.integrity_errors),
                "checks": {c.name: c.to_dict() for c in
                           (self.invariant, self.r1_inner_decomposition, self.full_projection)}}


def r1_monomials(n: int, max_degree: int) -> list[tuple]:
    """Monomials ``z^r`` with ``1 <= |r| <= max_degree`` in graded-lex order."""
    return [k for k in monomials_up_to(n, max_degree) if sum(k) >= 1]


def _scale(tol, x) -> float:
    return tol * max(1.0, float(np.linalg.norm(x)))


# ---------------------------------------------------------------------------
# invariance


def is_invariant(V: Subspace) -> CheckResult:
    """``trunc(z_i h)`` stays in ``V`` for every basis element and coordinate."""
    A, tol = V.ambient, V.tol
    Q = V.decomposition().stacked()
    res = CheckResult("invariant", Verdict.PASS)
    dropped_any = False
    residuals, images = [], []
    for i in range(A.n):
        e = tuple(int(j == i) for j in range(A.n))
        Y, _ = A.apply_shift(e, Q)
        sm = A.shift(e)
        if sm.overflow.size and np.linalg.norm(Q[sm.overflow]) > tol.check:
            dropped_any = True
        residuals.append(Y - Q @ (Q.conj().T @ Y))
        images.append(Y)
    failed = False
    found = []
    for j in range(Q.shape[1]):
        for i in range(A.n):
            R, Y = residuals[i][:, j], images[i][:, j]
            nrm = float(np.linalg.norm(R))
            res.checked += 1
            if nrm > _scale(tol.check, Y):
                failed = True
                r = tuple(int(t == i) for t in range(A.n))
                found.append(Witness(r, A.polynomial(Q[:, j], tol.prune), None,
                                     A.polynomial(R, tol.prune), nrm))
            else:
                res.max_residual = max(res.max_residual, nrm)
    collect_witnesses(res, found)
    res.verdict = _verdict(failed, res.checked, 0)
    res.truncation_limited = dropped_any
    return res


def is_r1_inner_subspace(W: Subspace) -> CheckResult:
    """``<z^m h, g> = 0`` for basis elements ``h, g`` of ``W`` and ``1 <= |m| <= D``.

    Terms of ``z^m h`` above degree ``D`` are orthogonal to ``W`` anyway, so
    the truncated product gives every pairing exactly.
    """
    A, tol, Q = W.ambient, W.tol, W.basis
    res = CheckResult("r1_inner_subspace", Verdict.PASS)
    failed = False
    for m in r1_monomials(A.n, A.D):
        Y, _ = A.apply_shift(m, Q)
        G = Q.conj().T @ Y
        res.checked += 1
        worst = float(np.abs(G).max()) if G.size else 0.0
        if worst > tol.check:
            failed = True
            if len(res.witnesses) < MAX_WITNESSES:
                a, b = np.unravel_index(np.argmax(np.abs(G)), G.shape)
                res.witnesses.append(Witness(m, A.polynomial(Q[:, b], tol.prune), None,
                                             A.polynomial(Q[:, a] * G[a, b], tol.prune), worst))
        else:
            res.max_residual = max(res.max_residual, worst)
    res.verdict = _verdict(failed, res.checked, 0)
    return res


# ---------------------------------------------------------------------------
# trigger subspaces


class _LevelSolver:
    """Least-squares matching of candidate vectors against ``V`` through degree ``L``."""

    def __init__(self, V: Subspace):
        self.V = V
        self.A = V.ambient
        self.Q = V.basis
        self._cache = {}

    def _factor(self, L):
        if L not in self._cache:
            P = self.A.rows_upto(L)
            AP = self.Q[P]
            if AP.shape[0] == 0 or AP.shape[1] == 0:
                self._cache[L] = (P, np.zeros((AP.shape[0], 0)), np.zeros(0),
                                  np.zeros((AP.shape[1], 0)))
            else:
                U, s, vh = np.linalg.svd(AP, full_matrices=False)
                r = int(np.sum(s > self.V.tol.rank))
                self._cache[L] = (P, U[:, :r], s[:r], vh[:r].conj().T)
        return self._cache[L]

    def trigger(self, X: np.ndarray, L: int):
        """Return ``(T, E)``: the trigger coefficients and ``X T - g0``.

        ``T`` has one column per basis vector of ``{c : P_{<=L}(X c) in P_{<=L}(V)}``
        in reduced column echelon form; ``E`` holds ``X T - g0`` column-wise.
        """
        P, U, s, Vr = self._factor(L)
        XP = X[P]
        M = XP - U @ (U.conj().T @ XP)
        _, T = _null_split(M, self.V.tol.trigger)
        if T.shape[1] == 0:
            return T, np.zeros((X.shape[0], 0), dtype=complex)
        T = _echelon(T)
        y = Vr @ ((U.conj().T @ (XP @ T)) / s[:, None]) if s.size else np.zeros((self.Q.shape[1], T.shape[1]))
        return T, X @ T - self.Q @ y


def _echelon(T: np.ndarray) -> np.ndarray:
    """Reduced column echelon form of ``T`` (pivot entries scaled to one)."""
    E = T.copy()
    d = E.shape[1]
    free = list(range(d))
    order = []
    for i in range(E.shape[0]):
        if not free:
            break
        c = max(free, key=lambda j: abs(E[i, j]))
        if abs(E[i, c]) <= 1e-8:
            continue
        E[:, c] /= E[i, c]
        for j in range(d):
            if j != c:
                E[:, j] -= E[i, j] * E[:, c]
        free.remove(c)
        order.append(c)
    order += free
    return E[:, order]


def _level_sweep(V: Subspace, name: str, full_projection: bool) -> CheckResult:
    A, tol = V.ambient, V.tol
    dec = V.decomposition()
    comps = dec.components
    solver = _LevelSolver(V)
    res = CheckResult(name, Verdict.PASS)
    failed = False
    found = []
    # orthonormal bases of P_m(W_m)
    heads = []
    for m in range(A.D + 1):
        H = comps[m][A.rows(m)]
        if H.shape[1]:
            U, s, _ = np.linalg.svd(H, full_matrices=False)
            H = U[:, s > tol.rank]
        heads.append(H)
    for k, Wk in enumerate(comps):
        if Wk.shape[1] == 0:
            continue
        for r in r1_monomials(A.n, A.D - k):
            X, _ = A.apply_shift(r, Wk)
            for m in range(A.D + 1):
                if not full_projection and comps[m].shape[1] == 0:
                    continue
                if m > V.horizon:
                    res.skipped += 1
                    continue
                T, E = solver.trigger(X, m if not full_projection else m - 1)
                if T.shape[1] == 0:
                    continue
                res.checked += 1
                for j in range(T.shape[1]):
                    h = Wk @ T[:, j]
                    scale = float(np.linalg.norm(h))
                    e = E[:, j] / scale
                    if full_projection:
                        em = e[A.rows(m)]
                        R = em - heads[m] @ (heads[m].conj().T @ em)
                        resid = np.zeros(A.N, dtype=complex)
                        resid[A.rows(m)] = R
                    else:
                        Wm = comps[m]
                        resid = Wm @ (Wm.conj().T @ e)
                    nrm = float(np.linalg.norm(resid))
                    if nrm > _scale(tol.check, X @ T[:, j] / scale):
                        failed = True
                        found.append(Witness(r, A.polynomial(h / scale, tol.prune), m,
                                             A.polynomial(resid, tol.prune), nrm))
                    else:
                        res.max_residual = max(res.max_residual, nrm)
    collect_witnesses(res, found)
    res.verdict = _verdict(failed, res.checked, res.skipped)
    res.truncation_limited = res.skipped > 0
    return res


def is_r1_inner_decomposition(V: Subspace) -> CheckResult:
    """Look-ahead condition: ``ord(r h - g) > m`` forces ``r h - g ⊥ W_m``."""
    return _level_sweep(V, "r1_inner_decomposition", full_projection=False)


def has_full_projection(V: Subspace) -> CheckResult:
    """``ord(r h - g) >= m`` forces ``P_m(r h - g)`` into ``P_m(W_m)``."""
    return _level_sweep(V, "full_projection", full_projection=True)


def beurling_verdict(V: Subspace) -> CheckReport:
    """All three checks plus the consistency of invariant vs (r1 and full projection)."""
    inv = is_invariant(V)
    r1 = is_r1_inner_decomposition(V)
    fp = has_full_projection(V)
    rep = CheckReport(inv, r1, fp)
    if inv.passed != (r1.passed and fp.passed):
        rep.consistent = False
        rep.integrity_errors.append(
            f"invariant={inv.verdict.value} but r1_inner={r1.verdict.value}, "
            f"full_projection={fp.verdict.value}")
    return rep


# ---------------------------------------------------------------------------
# minimum value and reconstruction


def minimum_value_index(h: Polynomial, V: Subspace):
    """First index with a nonzero homogeneous component (``INFINITY`` if none).

    Raises :class:`IntegrityError` if that index differs from ``ord(h)``.
    """
    A, tol = V.ambient, V.tol
    x = A.vector(h)
    if np.linalg.norm(x - V.project_vector(x)) > _scale(tol.check, x):
        raise ValueError("element is not in the subspace")
    tau = _scale(tol.check, x)
    idx = INFINITY
    for k, W in enumerate(V.decomposition().components):
        if W.shape[1] and np.linalg.norm(W.conj().T @ x) > tau:
            idx = k
            break
    expected = order_of_vector(x, A, tau)
    if idx != expected:
        raise IntegrityError(f"first component index {idx} differs from ord {expected}")
    return idx


@dataclass
class ReconstructionReport:
    r: tuple
    k: int
    components: list           # g_0 .. g_D as polynomials
    component_norms2: list
    partial_norms2: list       # ||f_m||^2
    target_norm2: float        # ||trunc(r h)||^2
    step_residuals: list       # ||P_{<=m}(r h - f_m)||
    residual: float            # ||r h - f_D||
    sigma_min: list            # per level, None where W_m = {0}
    ok: bool = True

    def to_dict(self) -> dict:
        return {"r": list(self.r), "k": self.k, "ok": self.ok, "residual": self.residual,
                "target_norm2": self.target_norm2,
                "component_norms2": self.component_norms2, "partial_norms2": self.partial_norms2,
                "step_residuals": self.step_residuals, "sigma_min": self.sigma_min,
                "components": [g.to_records() for g in self.components]}


def beurling_reconstruct(V: Subspace, r, h: Polynomial, verify: bool = True) -> ReconstructionReport:
    """Build ``r h`` level by level from the homogeneous components of ``V``.

    ``g_m`` is the preimage in ``W_m`` of ``P_m(r h - f_{m-1})`` under the
    restricted projection; each step must raise the order of the remainder.
    """
    A, tol = V.ambient, V.tol
    r = tuple(r)
    if len(r) != A.n or sum(r) < 1:
        raise ValueError("r must be a monomial of positive degree")
    if verify:
        rep = beurling_verdict(V)
        if not all(c.verdict is Verdict.PASS for c in
                   (rep.invariant, rep.r1_inner_decomposition, rep.full_projection)):
            raise ValueError(f"subspace does not pass all checks: {rep.verdicts()}")
    comps = V.decomposition().components
    xh = A.vector(h)
    k = order_of_vector(xh, A, _scale(tol.check, xh))
    if k == INFINITY:
        raise ValueError("h must be nonzero")
    Wk = comps[k]
    if np.linalg.norm(xh - Wk @ (Wk.conj().T @ xh)) > _scale(tol.check, xh):
        raise ValueError(f"h is not in the homogeneous component W_{k}")
    if sum(r) + k > A.D:
        raise ValueError("|r| + k exceeds the truncation degree")
    x, _ = A.apply_shift(r, xh)
    tnorm2 = float(np.vdot(x, x).real)
    f = np.zeros(A.N, dtype=complex)
    gs, g2, f2, steps, smins = [], [], [], [], []
    bessel = 0.0
    for m in range(A.D + 1):
        t = (x - f)[A.rows(m)]
        Wm = comps[m]
        if Wm.shape[1]:
            L = Wm[A.rows(m)]
            U, s, vh = np.linalg.svd(L, full_matrices=False)
            smin = float(s[-1])
            smins.append(smin)
            if smin <= tol.rank:
                raise IntegrityError(f"restricted projection at level {m} is singular "
                                     f"(sigma_min {smin:.3e})")
            a = vh.conj().T @ ((U.conj().T @ t) / s)
            g = Wm @ a
        else:
            smins.append(None)
            g = np.zeros(A.N, dtype=complex)
        f = f + g
        gs.append(A.polynomial(g, tol.prune))
        g2.append(float(np.vdot(g, g).real))
        f2.append(float(np.vdot(f, f).real))
        bessel += g2[-1]
        step = float(np.linalg.norm((x - f)[A.rows_upto(m)]))
        steps.append(step)
        if step > tol.reconstruct * max(1.0, np.sqrt(tnorm2)):
            raise IntegrityError(f"level {m}: order of the remainder did not rise "
                                 f"(residual {step:.3e})")
        if bessel > tnorm2 * (1 + 1e-12) + 1e-15:
            raise IntegrityError(f"level {m}: Bessel bound violated ({bessel!r} > {tnorm2!r})")
    resid = float(np.linalg.norm(x - f))
    ok = resid <= tol.reconstruct * max(np.sqrt(tnorm2), 1e-300)
    if not ok:
        raise IntegrityError(f"final reconstruction residual {resid:.3e} too large")
    return ReconstructionReport(r, k, gs, g2, f2, tnorm2, steps, resid, smins, ok)
