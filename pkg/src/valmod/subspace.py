"""Finite-dimensional subspace algebra inside a truncated space model.

Vectors are stored in *whitened* coordinates ``x_k = sqrt(w(k)) * c_k`` so
that the weighted inner product becomes the Euclidean one and orthonormal
bases are plain unitary-column matrices.  Rows are indexed by the monomials
of degree ``<= D`` in graded-lex order, so each homogeneous layer is a
contiguous block of rows.
"""

from __future__ import annotations

import os
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field, replace

import numpy as np

from .poly import DEFAULT_PRUNE, INFINITY, Polynomial, monomials_up_to
from .spaces import SpaceModel

__all__ = [
    "IntegrityError",
    "Tolerances",
    "Ambient",
    "ShiftMap",
    "Subspace",
    "SubspaceSeries",
    "Decomposition",
    "LWReport",
    "orthonormalize",
    "full_subspace",
    "project",
    "subspace_series",
    "homogeneous_decomposition",
    "decompose_element",
    "wandering_subspace",
    "restricted_projection_LW",
]

PIVOT_FLOOR = 1e-6


class IntegrityError(RuntimeError):
    """A proved identity failed numerically; tolerances or truncation are to blame."""


@dataclass(frozen=True)
class Tolerances:
    rank: float = 1e-9        # singular values below rank * sigma_max count as zero
    orth: float = 1e-10       # allowed deviation of Q^H Q from the identity
    trigger: float = 1e-9     # mismatch below which "some g exists"
    check: float = 1e-9       # residual threshold for PASS (scaled by max(1, |u|))
    reconstruct: float = 1e-8
    prune: float = DEFAULT_PRUNE

    @classmethod
    def uniform(cls, tol: float, **kw) -> "Tolerances":
        """Set the rank, orthogonality, trigger and check tolerances together."""
        tol = float(tol)
        if not tol > 0:
            raise ValueError("tolerance must be positive")
        return cls(rank=tol, orth=tol, trigger=tol, check=tol, **kw)

    @classmethod
    def from_env(cls, env: Mapping | None = None) -> "Tolerances":
        env = os.environ if env is None else env
        val = env.get("VALMOD_TOL")
        return cls.uniform(float(val)) if val else cls()

    def override(self, **kw) -> "Tolerances":
        return replace(self, **kw)


@dataclass(frozen=True)
class ShiftMap:
    """Truncated multiplication by ``z^r`` in whitened coordinates."""

    r: tuple
    src: np.ndarray
    dst: np.ndarray
    factor: np.ndarray
    overflow: np.ndarray   # source rows whose product leaves the ambient space


class Ambient:
    """All monomials of degree ``<= D`` of a space model, in graded-lex order."""

    def __init__(self, space: SpaceModel):
        self.space = space
        self.n = space.n
        self.D = space.D
        self.monomials = monomials_up_to(self.n, self.D)
        self.index = {k: i for i, k in enumerate(self.monomials)}
        self.degrees = np.array([sum(k) for k in self.monomials])
        self.sqrtw = np.sqrt(np.array([space.weights[k] for k in self.monomials]))
        self._offsets = np.searchsorted(self.degrees, np.arange(self.D + 2))
        self._shifts: dict = {}

    @property
    def N(self) -> int:
        return len(self.monomials)

    def rows(self, d: int) -> slice:
        """Row block of the homogeneous degree-``d`` layer."""
        if d < 0 or d > self.D:
            return slice(0, 0)
        return slice(int(self._offsets[d]), int(self._offsets[d + 1]))

    def rows_upto(self, d: int) -> slice:
        """Rows of degree ``<= d`` (empty for ``d < 0``)."""
        d = min(d, self.D)
        return slice(0, int(self._offsets[d + 1]) if d >= 0 else 0)

    def vector(self, p: Polynomial) -> np.ndarray:
        if p.n != self.n:
            raise ValueError(f"polynomial has {p.n} variables, space has {self.n}")
        if p.degree > self.D:
            raise ValueError(f"degree {p.degree} exceeds truncation degree {self.D}")
        x = np.zeros(self.N, dtype=complex)
        for k, c in p.terms.items():
            i = self.index[k]
            x[i] = complex(c) * self.sqrtw[i]
        return x

    def polynomial(self, x: np.ndarray, prune: float = DEFAULT_PRUNE) -> Polynomial:
        c = np.asarray(x) / self.sqrtw
        return Polynomial(self.n, {k: complex(c[i]) for i, k in enumerate(self.monomials)
                                   if c[i] != 0}, exact=False, prune=prune)

    def shift(self, r: Sequence[int]) -> ShiftMap:
        r = tuple(r)
        if r not in self._shifts:
            src, dst, fac, over = [], [], [], []
            for i, k in enumerate(self.monomials):
                j = self.index.get(tuple(a + b for a, b in zip(k, r)))
                if j is None:
                    over.append(i)
                else:
                    src.append(i)
                    dst.append(j)
                    fac.append(self.sqrtw[j] / self.sqrtw[i])
            self._shifts[r] = ShiftMap(r, np.array(src, dtype=int), np.array(dst, dtype=int),
                                       np.array(fac), np.array(over, dtype=int))
        return self._shifts[r]

    def apply_shift(self, r: Sequence[int], X: np.ndarray):
        """Return ``(trunc(z^r X), norm of the dropped part)``."""
        sm = self.shift(r)
        X = np.asarray(X)
        Y = np.zeros_like(X, dtype=complex)
        if X.ndim == 1:
            Y[sm.dst] = sm.factor * X[sm.src]
        else:
            Y[sm.dst] = sm.factor[:, None] * X[sm.src]
        dropped = float(np.linalg.norm(X[sm.overflow])) if sm.overflow.size else 0.0
        return Y, dropped


def _check_orthonormal(Q: np.ndarray, tol: float):
    if Q.shape[1] == 0:
        return
    dev = np.abs(Q.conj().T @ Q - np.eye(Q.shape[1])).max()
    if dev > tol:
        raise IntegrityError(f"basis is not orthonormal (deviation {dev:.3e})")


class Subspace:
    """A subspace of the truncated ambient space with an orthonormal basis.

    ``horizon`` is the largest level up to which level-by-level checks are
    considered representative of the untruncated subspace; it defaults to
    the truncation degree.
    """

    def __init__(self, ambient: Ambient, basis: np.ndarray, horizon: int | None = None,
                 tol: Tolerances | None = None, generators: Sequence[Polynomial] = (),
                 label: str | None = None, flags: dict | None = None):
        basis = np.asarray(basis, dtype=complex)
        if basis.ndim != 2 or basis.shape[0] != ambient.N:
            raise ValueError("basis must be an N x d matrix")
        self.ambient = ambient
        self.tol = tol or Tolerances()
        _check_orthonormal(basis, max(self.tol.orth, 1e-10))
        basis.setflags(write=False)
        self.basis = basis
        self.horizon = ambient.D if horizon is None else int(horizon)
        if not 0 <= self.horizon <= ambient.D:
            raise ValueError("horizon must lie in [0, D]")
        self.generators = tuple(generators)
        self.label = label
        self.flags = dict(flags or {})
        self._decomp = None

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    @property
    def space(self) -> SpaceModel:
        return self.ambient.space

    def polynomials(self) -> list[Polynomial]:
        return [self.ambient.polynomial(self.basis[:, j], self.tol.prune) for j in range(self.dim)]

    def project_vector(self, x: np.ndarray) -> np.ndarray:
        return self.basis @ (self.basis.conj().T @ x)

    def residual(self, h: Polynomial) -> float:
        x = self.ambient.vector(h)
        return float(np.linalg.norm(x - self.project_vector(x)))

    def contains(self, h: Polynomial) -> bool:
        x = self.ambient.vector(h)
        return self.residual(h) <= self.tol.check * max(1.0, float(np.linalg.norm(x)))

    def with_horizon(self, horizon: int) -> "Subspace":
        return Subspace(self.ambient, self.basis, horizon, self.tol, self.generators,
                        self.label, self.flags)

    def decomposition(self) -> "Decomposition":
        if self._decomp is None:
            self._decomp = _decompose(self)
        return self._decomp

    def __repr__(self):
        name = f" {self.label}" if self.label else ""
        return f"<Subspace{name} dim={self.dim} N={self.ambient.N} horizon={self.horizon}>"


def orthonormalize(gens: Sequence[Polynomial], A: Ambient, tol: Tolerances | None = None,
                   horizon: int | None = None, label: str | None = None) -> Subspace:
    """Orthonormal basis of the span of ``gens`` (numerical rank by SVD)."""
    tol = tol or Tolerances()
    gens = list(gens)
    if not gens:
        return Subspace(A, np.zeros((A.N, 0)), horizon, tol, (), label, {"empty_generators": True})
    X = np.column_stack([A.vector(g) for g in gens])
    U, s, _ = np.linalg.svd(X, full_matrices=False)
    smax = s[0] if s.size else 0.0
    rank = int(np.sum(s > tol.rank * smax)) if smax > 0 else 0
    return Subspace(A, U[:, :rank], horizon, tol, gens, label)


def full_subspace(A: Ambient, tol: Tolerances | None = None) -> Subspace:
    return Subspace(A, np.eye(A.N, dtype=complex), None, tol, (), "ambient")


def project(h: Polynomial, V: Subspace) -> Polynomial:
    """Orthogonal projection of ``h`` onto ``V``."""
    A = V.ambient
    return A.polynomial(V.project_vector(A.vector(h)), V.tol.prune)


# ---------------------------------------------------------------------------
# series and homogeneous decomposition


@dataclass
class SubspaceSeries:
    """Nested bases ``V_0 ⊇ V_1 ⊇ ... ⊇ V_{D+1} = {0}``."""

    ambient: Ambient
    levels: list

    def dims(self) -> list[int]:
        return [L.shape[1] for L in self.levels]


@dataclass
class Decomposition:
    """Orthogonal components ``W_0, ..., W_D`` (zero-width placeholders kept)."""

    ambient: Ambient
    components: list
    series: SubspaceSeries
    tol: Tolerances = field(default_factory=Tolerances)
    horizon: int | None = None

    def dims(self) -> list[int]:
        return [W.shape[1] for W in self.components]

    def basis_polynomials(self, k: int) -> list[Polynomial]:
        W = self.components[k]
        return [self.ambient.polynomial(W[:, j], self.tol.prune) for j in range(W.shape[1])]

    def component(self, k: int) -> Subspace:
        return Subspace(self.ambient, self.components[k], self.horizon, self.tol, (), f"W{k}")

    def stacked(self) -> np.ndarray:
        return np.hstack(self.components) if self.components else np.zeros((self.ambient.N, 0))


def _null_split(M: np.ndarray, tau: float):
    """Split the column space of the input of ``M`` into (row space, kernel)."""
    d = M.shape[1]
    if d == 0:
        return np.zeros((0, 0)), np.zeros((0, 0))
    if M.shape[0] == 0:
        return np.zeros((d, 0)), np.eye(d)
    _, s, vh = np.linalg.svd(M, full_matrices=True)
    rank = int(np.sum(s > tau))
    V = vh.conj().T
    return V[:, :rank], V[:, rank:]


def _canonical(W: np.ndarray, A: Ambient, k: int) -> np.ndarray:
    """Basis of span(W) with distinct graded-lex leading monomials.

    Column echelon form with row pivots chosen in graded-lex order among the
    degree-``k`` rows, then Gram-Schmidt run from the last pivot backwards;
    this keeps every basis vector's leading monomial at its pivot.
    """
    d = W.shape[1]
    if d == 0:
        return W
    E = W.copy()
    rows = range(A.rows(k).start, A.rows(k).stop)
    free = list(range(d))
    pivots = []
    for i in rows:
        if not free:
            break
        c = max(free, key=lambda j: abs(E[i, j]))
        if abs(E[i, c]) <= PIVOT_FLOOR:
            continue
        E[:, c] /= E[i, c]
        for j in range(d):
            if j != c:
                E[:, j] -= E[i, j] * E[:, c]
        free.remove(c)
        pivots.append(c)
    if free:
        Q, _ = np.linalg.qr(W)
        return Q
    U = np.zeros_like(E)
    for pos in range(d - 1, -1, -1):
        v = E[:, pivots[pos]].copy()
        for _ in range(2):
            v -= U[:, pos + 1:] @ (U[:, pos + 1:].conj().T @ v)
        U[:, pos] = v / np.linalg.norm(v)
    return U


def _decompose(V: Subspace) -> Decomposition:
    A, tol = V.ambient, V.tol
    B = V.basis.copy()
    levels, comps = [B], []
    for k in range(A.D + 1):
        keep, kernel = _null_split(B[A.rows(k)], tol.rank)
        W = B @ keep if keep.size else np.zeros((A.N, 0), dtype=complex)
        W[A.rows_upto(k - 1)] = 0.0
        comps.append(_canonical(W, A, k))
        B = B @ kernel if kernel.size else np.zeros((A.N, 0), dtype=complex)
        if B.shape[1]:
            B[A.rows_upto(k)] = 0.0
            B, _ = np.linalg.qr(B)
        levels.append(B)
    series = SubspaceSeries(A, levels)
    dec = Decomposition(A, comps, series, tol, V.horizon)
    total = sum(dec.dims())
    if total != V.dim:
        raise IntegrityError(f"component dimensions sum to {total}, subspace has dim {V.dim}")
    S = dec.stacked()
    _check_orthonormal(S, max(tol.orth, 1e-10) * 10)
    return dec


def subspace_series(V: Subspace) -> SubspaceSeries:
    return V.decomposition().series


def homogeneous_decomposition(V: Subspace) -> Decomposition:
    return V.decomposition()


def decompose_element(h: Polynomial, V: Subspace) -> list[Polynomial]:
    """Components ``P_{W_k} h`` for k = 0..D; ``h`` must lie in ``V``."""
    A = V.ambient
    x = A.vector(h)
    res = float(np.linalg.norm(x - V.project_vector(x)))
    if res > V.tol.check * max(1.0, float(np.linalg.norm(x))):
        raise ValueError(f"element is not in the subspace (residual {res:.3e})")
    return [A.polynomial(W @ (W.conj().T @ x), V.tol.prune) for W in V.decomposition().components]


def wandering_subspace(V: Subspace) -> Subspace:
    """``M = {v in V : v ⊥ trunc(z_i V) for every i}``.

    The result's ``flags["truncation_limited"]`` is set when some product
    ``z_i v`` had terms above degree ``D`` that were dropped.
    """
    A, Q = V.ambient, V.basis
    if V.dim == 0:
        return Subspace(A, Q, V.horizon, V.tol, (), "M", {"truncation_limited": False})
    blocks, dropped = [], 0.0
    for i in range(A.n):
        e = [0] * A.n
        e[i] = 1
        Y, d = A.apply_shift(e, Q)
        blocks.append(Y)
        dropped = max(dropped, d)
    U = np.hstack(blocks)
    _, kernel = _null_split(U.conj().T @ Q, V.tol.rank)
    M = Q @ kernel if kernel.size else np.zeros((A.N, 0), dtype=complex)
    if M.shape[1]:
        M, _ = np.linalg.qr(M)
    return Subspace(A, M, V.horizon, V.tol, (), "M",
                    {"truncation_limited": dropped > V.tol.check})


@dataclass
class LWReport:
    """Matrix of ``P_m`` restricted to a homogeneous subspace ``W``."""

    m: int | None
    matrix: np.ndarray
    sigma_min: float | None
    invertible: bool
    degenerate: bool


def restricted_projection_LW(W: Subspace, m: int | None = None) -> LWReport:
    """``P_m`` restricted to ``W`` (whitened coordinates, orthonormal basis).

    Raises ``ValueError`` when the order function is not constant on the
    nonzero elements of ``W``.
    """
    A, Q, tol = W.ambient, W.basis, W.tol
    if W.dim == 0:
        return LWReport(m, np.zeros((0, 0)), None, True, True)
    block_norm = [float(np.linalg.norm(Q[A.rows(d)])) for d in range(A.D + 1)]
    lowest = next(d for d, v in enumerate(block_norm) if v > tol.rank)
    if m is None:
        m = lowest
    elif lowest < m:
        raise ValueError(f"subspace has nonzero content in degree {lowest} < {m}")
    L = Q[A.rows(m)]
    s = np.linalg.svd(L, compute_uv=False)
    smin = float(s[-1]) if s.size == W.dim else 0.0
    if smin <= tol.rank:
        raise ValueError(f"not homogeneous: some element has order above {m} "
                         f"(sigma_min {smin:.3e})")
    return LWReport(m, L, smin, True, False)


def order_of_vector(x: np.ndarray, A: Ambient, tau: float):
    """Lowest degree whose block norm exceeds ``tau``, or ``INFINITY``."""
    for d in range(A.D + 1):
        if np.linalg.norm(x[A.rows(d)]) > tau:
            return d
    return INFINITY

