import csv
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from valmod.beurling import Verdict
from valmod.inner import (a2alpha_moments, a2alpha_quadrature, boundary_sample,
                          compare_inner_notions, is_a2alpha_inner, is_r1_inner_function,
                          sphere_grid, torus_grid, write_boundary_csv)
from valmod.poly import Polynomial
from valmod.presets import bidisk_inner_example, random_polynomial
from valmod.spaces import make_space, norm
from valmod.subspace import IntegrityError

KINDS2 = ["H2_POLYDISK", "H2_BALL", "A2_BALL"]


def homogeneous(n, d):
    exps = st.tuples(*[st.integers(0, d)] * n).filter(lambda k: sum(k) == d)
    part = st.integers(-8, 8).map(lambda v: v / 2)
    coeffs = st.builds(complex, part, part).filter(lambda c: c != 0)
    return st.dictionaries(exps, coeffs, min_size=1, max_size=4).map(lambda t: Polynomial(n, t))


class TestR1InnerFunction:
    @pytest.mark.parametrize("kind", ["H2_POLYDISK", "H2_BALL"])
    def test_example_function(self, kind):
        S = make_space(kind, 2, 4)
        assert is_r1_inner_function(bidisk_inner_example(False), S).passed
        out = is_r1_inner_function(bidisk_inner_example(True), S)
        assert out.passed

    def test_exact_route(self):
        S = make_space("H2_POLYDISK", 2, 3)
        out = is_r1_inner_function(bidisk_inner_example(True), S)
        assert out.exact and out.max_pairing == 0

    def test_not_inner(self):
        S = make_space("H2_BALL", 2, 3)
        f = Polynomial(2, {(0, 0): 1.0, (1, 0): 1.0})
        out = is_r1_inner_function(f, S)
        assert out.verdict is Verdict.FAIL
        np.testing.assert_allclose(out.pairings[(1, 0)], S.weight((1, 0)))

    @pytest.mark.parametrize("kind", KINDS2)
    @given(data=st.data())
    @settings(max_examples=30, deadline=None)
    def test_homogeneous_functions_are_inner(self, kind, data):
        d = data.draw(st.integers(0, 4))
        f = data.draw(homogeneous(2, d))
        assert is_r1_inner_function(f, make_space(kind, 2, 4)).passed

    @pytest.mark.parametrize("kind", KINDS2)
    @given(seed=st.integers(0, 10_000), theta=st.tuples(*[st.floats(0, 2 * np.pi)] * 3))
    @settings(max_examples=30, deadline=None)
    def test_unimodular_invariance(self, kind, seed, theta):
        S = make_space(kind, 2, 4)
        f = random_polynomial(random.Random(seed), 2, 4).to_float()
        lam = np.exp(1j * theta[0])
        rot = np.exp(1j * np.array(theta[1:]))
        g = Polynomial(2, {k: lam * c * np.prod(rot ** np.array(k)) for k, c in f.terms.items()})
        a, b = is_r1_inner_function(f, S), is_r1_inner_function(g, S)
        assert a.verdict == b.verdict
        np.testing.assert_allclose(a.max_pairing, b.max_pairing, rtol=1e-9, atol=1e-12)


class TestA2Alpha:
    @pytest.mark.parametrize("alpha", [0, 1, 2.5])
    @pytest.mark.parametrize("k", [0, 1, 3])
    def test_normalized_monomials_are_inner(self, alpha, k):
        S = make_space("A2_DISK_ALPHA", 1, max(k, 1), alpha=alpha)
        z = Polynomial(1, {(k,): 1.0})
        f = z.scale(1 / norm(z, S))
        assert is_a2alpha_inner(f, alpha).passed

    def test_unnormalized_fails_but_comparison_normalizes(self):
        f = Polynomial(1, {(2,): 3.0})
        assert not is_a2alpha_inner(f, 1).passed
        out = compare_inner_notions(f, 1)
        assert out.consistent and out.a2alpha.passed and out.r1.passed

    def test_non_inner(self):
        out = compare_inner_notions(Polynomial(1, {(0,): 1.0, (1,): 1.0}), 0)
        assert out.consistent and not out.a2alpha.passed and not out.r1.passed

    def test_routes_agree(self):
        f = Polynomial(1, {(0,): 1.0, (2,): 0.5j, (5,): -2.0})
        np.testing.assert_allclose(a2alpha_quadrature(f, 1.5, 6),
                                   a2alpha_moments(f, make_space("A2_DISK_ALPHA", 1, 11, alpha=1.5)
                                                   .moments.moments, 6), atol=1e-12)

    def test_route_disagreement_is_integrity_error(self):
        f = Polynomial(1, {(0,): 1.0, (1,): 1.0})
        with pytest.raises(IntegrityError):
            is_a2alpha_inner(f, 1.0, route_tol=-1.0)

    @pytest.mark.parametrize("alpha", [0, 1, 2.5])
    def test_random_equivalence(self, alpha):
        rng = random.Random(int(alpha * 10))
        for _ in range(10):
            f = random_polynomial(rng, 1, 6)
            out = compare_inner_notions(f, alpha)
            assert out.consistent
            assert out.a2alpha.discrepancy <= 1e-8


class TestBoundary:
    def test_torus_exact_points(self):
        grid = torus_grid(2, 8)
        assert len(grid.points) == 64
        sample = boundary_sample(bidisk_inner_example(), grid)
        assert sample.value_at((1, 1)) == 2.0
        assert sample.value_at((1, -1)) == 0.0
        assert sample.value_at((1j, -1j)) == 0.0

    def test_sphere_grid(self):
        grid = sphere_grid(2, 50, seed=3)
        np.testing.assert_allclose(np.linalg.norm(grid.points, axis=1), 1.0, atol=1e-14)
        sample = boundary_sample(bidisk_inner_example(), grid)
        assert sample.value_at((1, 0)) == 0.0
        assert sample.value_at((0, 1)) == 1.0
        assert not np.array_equal(grid.points, sphere_grid(2, 50, seed=4).points)
        np.testing.assert_array_equal(grid.points, sphere_grid(2, 50, seed=3).points)

    def test_sphere_grid_is_roughly_uniform(self):
        grid = sphere_grid(2, 4000)
        # E|z1|^2 = 1/2 and E|z1|^4 = 1/3 on the unit sphere of C^2
        a = np.abs(grid.points[:, 0]) ** 2
        np.testing.assert_allclose(a.mean(), 0.5, atol=0.02)
        np.testing.assert_allclose((a ** 2).mean(), 1 / 3, atol=0.02)

    def test_csv(self, tmp_path):
        sample = boundary_sample(bidisk_inner_example(), torus_grid(2, 4))
        path = tmp_path / "b.csv"
        write_boundary_csv(sample, path)
        rows = list(csv.reader(open(path)))
        assert rows[0] == ["index", "z1_re", "z1_im", "z2_re", "z2_im", "abs_f"]
        assert len(rows) == 1 + 16 + 2
        assert rows[-2][0] == "min" and float(rows[-2][-1]) == 0.0
        assert rows[-1][0] == "max" and float(rows[-1][-1]) == 2.0

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            boundary_sample(bidisk_inner_example(), torus_grid(1, 4))
