"""Monomial-orthogonal Hilbert-module models truncated at degree ``D``.

Every model is described by a positive weight ``w(k) = ||z^k||^2`` per
multi-index; distinct monomials are orthogonal, so

    <f, g> = sum_k f_k * conj(g_k) * w(k).

Weights are computed numerically (quadrature or series-coefficient matching)
when the model is built and then cached on the immutable :class:`SpaceModel`.
"""

from __future__ import annotations

import csv
import math
from collections.abc import Callable, Mapping, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from types import MappingProxyType

import numpy as np
from scipy.special import beta

from .poly import Polynomial, monomials_up_to
from .scalars import QI

__all__ = [
    "KINDS",
    "SpaceModel",
    "MomentTable",
    "make_space",
    "inner_product",
    "norm",
    "kernel_partial_sum",
    "kernel_closed_form",
    "sphere_weight",
    "sphere_weights_monte_carlo",
    "ball_bergman_weight",
    "ball_volume_moment",
    "disk_quadrature",
    "radial_moments",
    "alpha_moment_exact",
    "write_weights_csv",
]

KINDS = ("H2_POLYDISK", "H2_BALL", "H2_POLYBALL", "A2_BALL", "A2_DISK_ALPHA", "A2_RADIAL")

RADIAL_NODES = 64
RADIAL_RTOL = 1e-12
RADIAL_MAX_PANELS = 4096


def _gl01(npts: int):
    x, w = np.polynomial.legendre.leggauss(npts)
    return 0.5 * (x + 1.0), 0.5 * w


# ---------------------------------------------------------------------------
# sphere and ball weights


def _simplex_monomial_integral(k: Sequence[int]) -> float:
    """Integral of prod t_j^k_j over the standard simplex sum t_j = 1.

    Conical-product rule: peel one coordinate at a time, each 1-D factor
    integrated by Gauss-Legendre with enough nodes to be exact.
    """
    n = len(k)
    total = 1.0
    for j in range(n - 1):
        rest = sum(k[j + 1:])
        power = rest + (n - 2 - j)
        deg = k[j] + power
        u, wq = _gl01(deg // 2 + 2)
        total *= float(np.sum(wq * u ** k[j] * (1.0 - u) ** power))
    return total


def sphere_weight(k: Sequence[int]) -> float:
    """``||z^k||^2`` in H^2 of the unit ball (normalized surface measure)."""
    n = len(k)
    if n == 1:
        return 1.0
    return math.factorial(n - 1) * _simplex_monomial_integral(k)


def sphere_weights_monte_carlo(n: int, D: int, samples: int = 200_000, seed: int = 0):
    """Monte-Carlo estimate of the sphere weights with standard errors.

    Returns ``{k: (mean, stderr)}``.  Points are normalized complex Gaussian
    vectors, which are uniformly distributed on the sphere.
    """
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((samples, n)) + 1j * rng.standard_normal((samples, n))
    z /= np.linalg.norm(z, axis=1, keepdims=True)
    a = np.abs(z) ** 2
    out = {}
    for k in monomials_up_to(n, D):
        vals = np.prod(a ** np.asarray(k), axis=1)
        out[k] = (float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(samples)))
    return out


def _binomial_series(n: int, J: int) -> list[float]:
    # Taylor coefficients of (1 - s)^-(n+1)
    a = [1.0]
    for j in range(1, J + 1):
        a.append(a[-1] * (n + j) / j)
    return a


def ball_bergman_weight(k: Sequence[int], series: Sequence[float] | None = None) -> float:
    """``||z^k||^2`` in the Bergman space of the ball, read off the kernel.

    The closed-form kernel ``n!/pi^n * (1 - <z,w>)^-(n+1)`` is expanded with
    the binomial series and the multinomial theorem; the coefficient of
    ``z^k conj(w)^k`` is ``1/w(k)``.
    """
    n, d = len(k), sum(k)
    if series is None:
        series = _binomial_series(n, d)
    multinom = math.factorial(d)
    for e in k:
        multinom //= math.factorial(e)
    coeff = math.factorial(n) / math.pi ** n * series[d] * multinom
    return 1.0 / coeff


def ball_volume_moment(k: Sequence[int], nodes: int = 40) -> float:
    """Lebesgue integral of |z^k|^2 over the unit ball by polar quadrature.

    Independent of :func:`ball_bergman_weight`: radial Gauss-Legendre times
    the sphere weight times the sphere's surface area.
    """
    n, d = len(k), sum(k)
    rho, wq = _gl01(nodes)
    radial = float(np.sum(wq * rho ** (2 * d + 2 * n - 1)))
    area = 2.0 * math.pi ** n / math.factorial(n - 1)
    return area * radial * sphere_weight(k)


def disk_quadrature(func: Callable, nr: int = 64, ntheta: int = 128) -> complex:
    """Tensor-product quadrature of ``func(z)`` over the unit disk, dx dy.

    Gauss-Legendre in the radius, uniform (trapezoid) nodes in the angle.
    """
    r, wr = _gl01(nr)
    theta = 2.0 * math.pi * np.arange(ntheta) / ntheta
    R, T = np.meshgrid(r, theta, indexing="ij")
    vals = func(R * np.exp(1j * T))
    return complex(np.sum(vals * (wr * r)[:, None]) * 2.0 * math.pi / ntheta)


# ---------------------------------------------------------------------------
# radial moments


@dataclass(frozen=True)
class MomentTable:
    """Radial moments ``mu_m = int r^(2m) dnu(r)`` for m = 0..D."""

    moments: tuple

    def __post_init__(self):
        if any(not (m > 0) for m in self.moments):
            raise ValueError("radial moments must be strictly positive")

    def is_log_convex(self, rtol: float = 1e-12) -> bool:
        mu = [float(m) for m in self.moments]
        return all(mu[m] ** 2 <= mu[m - 1] * mu[m + 1] * (1 + rtol) for m in range(1, len(mu) - 1))


def radial_moments(weight: Callable[[np.ndarray], np.ndarray], D: int,
                   nodes: int = RADIAL_NODES, rtol: float = RADIAL_RTOL) -> MomentTable:
    """``mu_m = int_0^1 r^(2m) weight(r) 2r dr`` by composite Gauss-Legendre.

    The panel count doubles until every moment changes by less than ``rtol``
    relatively.
    """
    x, wq = np.polynomial.legendre.leggauss(nodes)
    m = np.arange(D + 1)

    def rule(panels):
        edges = np.linspace(0.0, 1.0, panels + 1)
        a, b = edges[:-1, None], edges[1:, None]
        r = (0.5 * (b - a) * (x + 1.0) + a).ravel()
        wr = (0.5 * (b - a) * wq).ravel()
        f = wr * weight(r) * 2.0 * r
        return np.array([np.sum(f * r ** (2 * k)) for k in m])

    panels = 1
    prev = rule(panels)
    while panels < RADIAL_MAX_PANELS:
        panels *= 2
        cur = rule(panels)
        if np.all(np.abs(cur - prev) <= rtol * np.abs(cur)):
            return MomentTable(tuple(float(v) for v in cur))
        prev = cur
    raise ArithmeticError("radial quadrature did not reach the requested tolerance")


def alpha_moment_exact(m: int, alpha: int) -> Fraction:
    """``m! alpha! / (m + alpha + 1)!`` (measure ``(1-|z|^2)^alpha dx dy / pi``)."""
    return Fraction(math.factorial(m) * math.factorial(alpha), math.factorial(m + alpha + 1))


# ---------------------------------------------------------------------------
# the model


@dataclass(frozen=True)
class SpaceModel:
    kind: str
    n: int
    D: int
    weights: Mapping = field(repr=False, compare=False)
    alpha: float | None = None
    blocks: tuple | None = None
    moments: MomentTable | None = field(default=None, repr=False, compare=False)
    exact_weights: Mapping | None = field(default=None, repr=False, compare=False)

    def weight(self, k: Sequence[int]) -> float:
        k = tuple(k)
        if sum(k) > self.D:
            raise ValueError(f"monomial degree {sum(k)} exceeds truncation degree {self.D}")
        return self.weights[k]

    def exact_weight(self, k: Sequence[int]) -> Fraction:
        if self.exact_weights is None:
            raise ValueError(f"{self.kind} has no exact rational weight table")
        return self.exact_weights[tuple(k)]

    @property
    def has_exact_weights(self) -> bool:
        return self.exact_weights is not None

    def describe(self) -> dict:
        out = {"kind": self.kind, "n": self.n, "D": self.D}
        if self.alpha is not None:
            out["alpha"] = self.alpha
        if self.blocks is not None:
            out["blocks"] = list(self.blocks)
        return out


def make_space(kind: str, n: int, D: int, alpha: float | None = None,
               blocks: Sequence[int] | None = None, moments: Sequence[float] | None = None,
               radial_weight: Callable | None = None) -> SpaceModel:
    """Build a space model with its weight table for all ``|k| <= D``."""
    kind = kind.upper()
    if kind not in KINDS:
        raise ValueError(f"unknown space kind {kind!r}")
    if n < 1 or D < 1:
        raise ValueError("need n >= 1 and D >= 1")
    mons = monomials_up_to(n, D)
    exact = None
    table = None

    if kind == "H2_POLYDISK":
        weights = {k: 1.0 for k in mons}
        exact = {k: Fraction(1) for k in mons}
    elif kind == "H2_BALL":
        weights = {k: sphere_weight(k) for k in mons}
    elif kind == "H2_POLYBALL":
        if not blocks:
            raise ValueError("H2_POLYBALL needs block dimensions")
        blocks = tuple(int(b) for b in blocks)
        if sum(blocks) != n or min(blocks) < 1:
            raise ValueError(f"block dimensions {blocks} do not partition n = {n}")
        cuts = np.cumsum((0,) + blocks)
        weights = {}
        for k in mons:
            w = 1.0
            for a, b in zip(cuts[:-1], cuts[1:]):
                w *= sphere_weight(k[a:b])
            weights[k] = w
    elif kind == "A2_BALL":
        series = _binomial_series(n, D)
        weights = {k: ball_bergman_weight(k, series) for k in mons}
    else:
        if n != 1:
            raise ValueError(f"{kind} is a one-variable (disk) model; got n = {n}")
        if kind == "A2_DISK_ALPHA":
            if alpha is None or alpha < 0:
                raise ValueError("A2_DISK_ALPHA needs alpha >= 0")
            # int_0^1 t^m (1-t)^alpha dt; quadrature stalls at the endpoint for alpha < 1
            table = MomentTable(tuple(float(beta(m + 1, float(alpha) + 1)) for m in range(D + 1)))
            if float(alpha).is_integer():
                exact = {(m,): alpha_moment_exact(m, int(alpha)) for m in range(D + 1)}
        elif moments is not None:
            if len(moments) < D + 1:
                raise ValueError(f"need {D + 1} radial moments, got {len(moments)}")
            table = MomentTable(tuple(float(m) for m in moments[:D + 1]))
        elif radial_weight is not None:
            table = radial_moments(radial_weight, D)
        else:
            raise ValueError("A2_RADIAL needs a moment table or a radial weight")
        weights = {(m,): table.moments[m] for m in range(D + 1)}

    if any(not (w > 0) or not math.isfinite(w) for w in weights.values()):
        raise ArithmeticError("non-positive or non-finite monomial weight")
    return SpaceModel(kind=kind, n=n, D=D, weights=MappingProxyType(weights),
                      alpha=None if alpha is None else float(alpha),
                      blocks=tuple(blocks) if blocks else None, moments=table,
                      exact_weights=None if exact is None else MappingProxyType(exact))


def inner_product(f: Polynomial, g: Polynomial, S: SpaceModel):
    """``<f, g>`` in the model; exact when both inputs and the weights are."""
    if f.n != S.n or g.n != S.n:
        raise ValueError("polynomial dimension does not match the space")
    if max(f.degree, g.degree) > S.D:
        raise ValueError("degree exceeds the truncation degree")
    small, big = (f, g) if len(f.terms) <= len(g.terms) else (g, f)
    if f.exact and g.exact and S.has_exact_weights:
        total = QI(0)
        for k, c in small.terms.items():
            if k in big.terms:
                a, b = (c, big.terms[k]) if small is f else (big.terms[k], c)
                total = total + a * b.conjugate() * S.exact_weights[k]
        return total
    total = 0j
    for k, c in small.terms.items():
        if k in big.terms:
            a, b = (complex(c), complex(big.terms[k]))
            if small is not f:
                a, b = b, a
            total += a * b.conjugate() * S.weights[k]
    return total


def norm(f: Polynomial, S: SpaceModel) -> float:
    return math.sqrt(abs(complex(inner_product(f, f, S)).real))


def kernel_closed_form(n: int, z: Sequence[complex], w: Sequence[complex]) -> complex:
    s = sum(complex(a) * complex(b).conjugate() for a, b in zip(z, w))
    return math.factorial(n) / math.pi ** n / (1.0 - s) ** (n + 1)


def kernel_partial_sum(S: SpaceModel, z: Sequence[complex], w: Sequence[complex],
                       K: int | None = None) -> complex:
    """``sum_{|k| <= K} z^k conj(w)^k / w(k)`` for the Bergman ball model."""
    if S.kind != "A2_BALL":
        raise ValueError("kernel_partial_sum is defined for the A2_BALL model")
    K = S.D if K is None else K
    if K > S.D:
        raise ValueError("K exceeds the truncation degree")
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    if z.shape != (S.n,) or w.shape != (S.n,):
        raise ValueError("points must have n coordinates")
    if np.linalg.norm(z) >= 1 or np.linalg.norm(w) >= 1:
        raise ValueError("points must lie in the open unit ball")
    prod = z * w.conj()
    total = 0j
    for k in monomials_up_to(S.n, K):
        total += np.prod(prod ** np.asarray(k)) / S.weights[k]
    return complex(total)


def write_weights_csv(S: SpaceModel, path) -> None:
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow([f"k{i + 1}" for i in range(S.n)] + ["weight"])
        for k in monomials_up_to(S.n, S.D):
            wr.writerow(list(k) + [repr(S.weights[k])])
