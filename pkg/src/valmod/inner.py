"""Inner-function tests and boundary sampling.

Two notions are checked here:

* R1-inner functions: ``<z^m f, f> = 0`` for every monomial ``z^m`` of
  positive degree, computed from the weight table of a space model;
* A2_alpha-inner functions on the disk: ``int |f|^2 z^m dmu_alpha`` equals
  ``1`` for ``m = 0`` and ``0`` otherwise, where
  ``dmu_alpha = (1 - |z|^2)^alpha dx dy / pi``.  The integral is computed by
  quadrature and, independently, from the radial moments.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtri, roots_jacobi

from .beurling import Verdict
from .poly import Polynomial, monomials_up_to
from .scalars import QI
from .spaces import SpaceModel, make_space, norm
from .subspace import IntegrityError

__all__ = [
    "BoundaryGrid",
    "R1FunctionResult",
    "A2AlphaResult",
    "InnerEquivalenceResult",
    "torus_grid",
    "sphere_grid",
    "is_r1_inner_function",
    "a2alpha_quadrature",
    "a2alpha_moments",
    "is_a2alpha_inner",
    "compare_inner_notions",
    "check_prop_20_2",
    "boundary_sample",
    "write_boundary_csv",
]

ROUTE_TOL = 1e-8
INNER_TOL = 1e-9


# ---------------------------------------------------------------------------
# boundary grids


@dataclass(frozen=True)
class BoundaryGrid:
    kind: str                 # "TORUS" or "SPHERE"
    n: int
    points: np.ndarray        # (count, n) complex
    weights: np.ndarray       # quadrature weights summing to one


def _unit_roots(p: int) -> np.ndarray:
    z = np.exp(2j * np.pi * np.arange(p) / p)
    exact = {0: 1, 1: 1j, 2: -1, 3: -1j}
    for j in range(p):
        if (4 * j) % p == 0:
            z[j] = exact[(4 * j) // p]
    return z


def torus_grid(n: int, per_circle: int) -> BoundaryGrid:
    """Product of ``per_circle`` roots of unity in each coordinate.

    Quarter-turn points are set to exactly ``1, i, -1, -i``.
    """
    if per_circle < 1:
        raise ValueError("need at least one point per circle")
    roots = _unit_roots(per_circle)
    pts = np.array(np.meshgrid(*([roots] * n), indexing="ij")).reshape(n, -1).T
    return BoundaryGrid("TORUS", n, pts, np.full(len(pts), 1.0 / len(pts)))


def sphere_grid(n: int, count: int, seed: int = 0) -> BoundaryGrid:
    """Deterministic points on the unit sphere of C^n.

    The coordinate poles ``e_1, ..., e_n`` come first; the remaining points
    are a generalized golden-ratio (Kronecker) sequence in ``[0,1)^(2n)``
    pushed through the normal quantile function and normalized.
    """
    if count < n:
        raise ValueError("count must be at least n (the poles are always included)")
    poles = np.eye(n, dtype=complex)
    extra = count - n
    d = 2 * n
    # root of x^(d+1) = x + 1, the d-dimensional golden ratio
    phi = 2.0
    for _ in range(60):
        phi = (1 + phi) ** (1.0 / (d + 1))
    alpha = (1.0 / phi) ** np.arange(1, d + 1)
    j = np.arange(1, extra + 1)[:, None] + seed
    u = (0.5 + alpha * j) % 1.0
    g = ndtri(u)
    z = g[:, :n] + 1j * g[:, n:]
    z /= np.linalg.norm(z, axis=1, keepdims=True)
    pts = np.vstack([poles, z])
    return BoundaryGrid("SPHERE", n, pts, np.full(len(pts), 1.0 / len(pts)))


# ---------------------------------------------------------------------------
# R1-inner functions


@dataclass
class R1FunctionResult:
    verdict: Verdict
    max_pairing: float
    pairings: dict = field(default_factory=dict)    # m -> <z^m f, f>
    exact: bool = False

    @property
    def passed(self) -> bool:
        return self.verdict is Verdict.PASS


def is_r1_inner_function(f: Polynomial, S: SpaceModel, tol: float = INNER_TOL) -> R1FunctionResult:
    """``<z^m f, f> = 0`` for all ``1 <= |m| <= deg f``.

    Pairings for ``|m| > deg f`` vanish identically, so this sweep is
    complete.  In float mode the threshold is ``tol * max(1, ||f||^2)``.
    """
    if f.n != S.n:
        raise ValueError("dimension mismatch")
    if f.degree > S.D:
        raise ValueError("degree exceeds the truncation degree")
    exact = f.exact and S.has_exact_weights
    pairings = {}
    for m in monomials_up_to(f.n, max(f.degree, 0)):
        if sum(m) == 0:
            continue
        total = QI(0) if exact else 0j
        for k, c in f.terms.items():
            km = tuple(a + b for a, b in zip(k, m))
            if km in f.terms:
                if exact:
                    total = total + c * f.terms[km].conjugate() * S.exact_weights[km]
                else:
                    total += complex(c) * complex(f.terms[km]).conjugate() * S.weights[km]
        pairings[m] = total
    worst = max((abs(v) for v in pairings.values()), default=0.0)
    if exact:
        ok = not any(pairings.values())
    else:
        ok = worst <= tol * max(1.0, norm(f, S) ** 2)
    return R1FunctionResult(Verdict.PASS if ok else Verdict.FAIL, float(worst), pairings, exact)


# ---------------------------------------------------------------------------
# A2_alpha-inner functions


def a2alpha_quadrature(f: Polynomial, alpha: float, sweep: int) -> np.ndarray:
    """``I_m = int |f|^2 z^m (1-|z|^2)^alpha dx dy / pi`` for m = 0..sweep.

    Substituting ``t = |z|^2`` gives ``int_0^1 (1-t)^alpha avg_theta(...) dt``;
    Gauss-Jacobi handles the radial weight and equally spaced angles give
    the angular mean exactly for the trigonometric degrees involved.
    """
    if f.n != 1:
        raise ValueError("A2_alpha tests are one-variable")
    d = max(f.degree, 0)
    q = d + sweep // 2 + 2
    x, wx = roots_jacobi(q, float(alpha), 0.0)
    t = 0.5 * (x + 1.0)
    wt = wx * 0.5 ** (alpha + 1.0)
    ntheta = 2 * d + sweep + 2
    theta = 2.0 * np.pi * np.arange(ntheta) / ntheta
    z = np.sqrt(t)[:, None] * np.exp(1j * theta)[None, :]
    coeffs = np.zeros(d + 1, dtype=complex)
    for k, c in f.terms.items():
        coeffs[k[0]] = complex(c)
    fz = np.polynomial.polynomial.polyval(z, coeffs)
    dens = np.abs(fz) ** 2
    out = np.empty(sweep + 1, dtype=complex)
    for m in range(sweep + 1):
        out[m] = np.sum(wt * np.mean(dens * z ** m, axis=1))
    return out


def a2alpha_moments(f: Polynomial, moments, sweep: int) -> np.ndarray:
    """``I_m = sum_j f_j conj(f_{j+m}) mu_{j+m}`` for m = 0..sweep."""
    if f.n != 1:
        raise ValueError("A2_alpha tests are one-variable")
    out = np.zeros(sweep + 1, dtype=complex)
    for m in range(sweep + 1):
        for (j,), c in f.terms.items():
            cc = f.terms.get((j + m,))
            if cc is not None:
                out[m] += complex(c) * complex(cc).conjugate() * float(moments[j + m])
    return out


@dataclass
class A2AlphaResult:
    verdict: Verdict
    quadrature: np.ndarray
    moments: np.ndarray
    moment_verdict: Verdict
    discrepancy: float

    @property
    def passed(self) -> bool:
        return self.verdict is Verdict.PASS


def _reproduces(values: np.ndarray, tol: float) -> bool:
    target = np.zeros_like(values)
    target[0] = 1.0
    return bool(np.max(np.abs(values - target)) <= tol)


def is_a2alpha_inner(f: Polynomial, alpha: float, sweep: int | None = None,
                     tol: float = INNER_TOL, route_tol: float = ROUTE_TOL) -> A2AlphaResult:
    """Check the reproducing identity for ``r = z^m``, m = 0..sweep, both ways.

    Raises :class:`IntegrityError` when the two routes differ by more than
    ``route_tol``.
    """
    if alpha < 0:
        raise ValueError("alpha must be non-negative")
    d = max(f.degree, 0)
    sweep = d if sweep is None else sweep
    S = make_space("A2_DISK_ALPHA", 1, max(d + sweep, 1), alpha=alpha)
    quad = a2alpha_quadrature(f, alpha, sweep)
    mom = a2alpha_moments(f, S.moments.moments, sweep)
    disc = float(np.max(np.abs(quad - mom)))
    if disc > route_tol:
        raise IntegrityError(f"quadrature and moment routes differ by {disc:.3e}")
    vq = Verdict.PASS if _reproduces(quad, tol) else Verdict.FAIL
    vm = Verdict.PASS if _reproduces(mom, tol) else Verdict.FAIL
    return A2AlphaResult(vq, quad, mom, vm, disc)


@dataclass
class InnerEquivalenceResult:
    consistent: bool
    a2alpha: A2AlphaResult
    r1: R1FunctionResult
    normalized: Polynomial


def compare_inner_notions(f: Polynomial, alpha: float, tol: float = INNER_TOL) -> InnerEquivalenceResult:
    """Compare the A2_alpha-inner test with the R1-inner test after normalization.

    ``f`` is scaled to unit norm in A2_alpha first, since the reproducing
    identity fixes the norm while the R1 condition is scale-free.
    """
    if f.n != 1:
        raise ValueError("need a one-variable polynomial")
    if f.is_zero():
        raise ValueError("f must be nonzero")
    d = max(f.degree, 1)
    S = make_space("A2_DISK_ALPHA", 1, d, alpha=alpha)
    g = f.to_float().scale(1.0 / norm(f, S))
    a2 = is_a2alpha_inner(g, alpha, tol=tol)
    r1 = is_r1_inner_function(g, S, tol=tol)
    return InnerEquivalenceResult(a2.passed == r1.passed, a2, r1, g)


check_prop_20_2 = compare_inner_notions


# ---------------------------------------------------------------------------
# boundary sampling


@dataclass
class BoundarySample:
    grid: BoundaryGrid
    values: np.ndarray        # |f| at each grid point
    approximate: bool = False

    @property
    def argmin(self) -> int:
        return int(np.argmin(self.values))

    @property
    def argmax(self) -> int:
        return int(np.argmax(self.values))

    def value_at(self, point, atol: float = 1e-14):
        d = np.max(np.abs(self.grid.points - np.asarray(point, dtype=complex)), axis=1)
        i = int(np.argmin(d))
        if d[i] > atol:
            raise KeyError(f"point {point} is not on the grid")
        return float(self.values[i])


def boundary_sample(f: Polynomial, grid: BoundaryGrid, approximate: bool = False) -> BoundarySample:
    """Evaluate ``|f|`` on every grid point (rows in grid order).

    ``approximate`` marks samples of truncated series rather than genuine
    polynomials.
    """
    if f.n != grid.n:
        raise ValueError("dimension mismatch")
    g = f.to_float()
    acc = np.zeros(len(grid.points), dtype=complex)
    for k, c in g.terms.items():
        acc += c * np.prod(grid.points ** np.asarray(k), axis=1)
    return BoundarySample(grid, np.abs(acc), approximate)


def write_boundary_csv(sample: BoundarySample, path) -> None:
    n = sample.grid.n
    head = ["index"] + [f"z{i + 1}_{part}" for i in range(n) for part in ("re", "im")] + ["abs_f"]

    def coords(p):
        return [repr(float(v)) for z in p for v in (z.real, z.imag)]

    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(head)
        for i, (p, v) in enumerate(zip(sample.grid.points, sample.values)):
            wr.writerow([i] + coords(p) + [repr(float(v))])
        for label, i in (("min", sample.argmin), ("max", sample.argmax)):
            wr.writerow([label] + coords(sample.grid.points[i]) + [repr(float(sample.values[i]))])
