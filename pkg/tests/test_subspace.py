import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from valmod.poly import INFINITY, Polynomial, ord
from valmod.presets import (blaschke_instance, blaschke_series, gap_monomial_instance,
                            random_instance, random_polynomial, submodule_generators)
from valmod.spaces import make_space, norm
from valmod.subspace import (Ambient, IntegrityError, Subspace, Tolerances, decompose_element,
                             full_subspace, order_of_vector, orthonormalize, project,
                             restricted_projection_LW, subspace_series, wandering_subspace)


def span(gens, kind="H2_POLYDISK", n=2, D=4, horizon=None):
    A = Ambient(make_space(kind, n, D))
    return orthonormalize([g.to_float() for g in gens], A, horizon=horizon)


def var(i, n=2):
    return Polynomial.variable(i, n, exact=False)


class TestTolerances:
    def test_uniform(self):
        t = Tolerances.uniform(1e-6)
        assert t.rank == t.orth == t.trigger == t.check == 1e-6

    def test_from_env(self):
        assert Tolerances.from_env({"VALMOD_TOL": "0.1"}).check == 0.1
        assert Tolerances.from_env({}) == Tolerances()

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            Tolerances.uniform(0)


class TestAmbient:
    def test_whitening_matches_inner_product(self):
        S = make_space("H2_BALL", 2, 3)
        A = Ambient(S)
        f = Polynomial(2, {(1, 1): 2.0, (0, 2): 1j})
        np.testing.assert_allclose(np.linalg.norm(A.vector(f)) ** 2, 4 / 6 + 1 / 3)
        assert A.polynomial(A.vector(f)).almost_equal(f)

    def test_shift_reports_dropped_mass(self):
        A = Ambient(make_space("H2_POLYDISK", 1, 3))
        X = np.column_stack([A.vector(Polynomial(1, {(3,): 1.0})), A.vector(Polynomial(1, {(1,): 1.0}))])
        Y, dropped = A.apply_shift((1,), X)
        np.testing.assert_allclose(dropped, 1.0)
        np.testing.assert_allclose(Y[:, 1], A.vector(Polynomial(1, {(2,): 1.0})))

    def test_non_orthonormal_basis_rejected(self):
        A = Ambient(make_space("H2_POLYDISK", 1, 2))
        with pytest.raises(IntegrityError):
            Subspace(A, np.ones((3, 1)))


class TestOrthonormalize:
    def test_rank_deficient_generators(self):
        z1, z2 = var(0), var(1)
        V = span([z1, z2, z1 + z2, z1 * z2])
        assert V.dim == 3
        np.testing.assert_allclose(V.basis.conj().T @ V.basis, np.eye(3), atol=1e-12)
        assert V.contains(z1 - 2 * z2)
        assert not V.contains(z1 * z1)

    def test_empty(self):
        V = span([])
        assert V.dim == 0 and V.flags["empty_generators"]

    def test_projection(self):
        z1, z2 = var(0), var(1)
        V = span([z1])
        assert project(z1 + z2, V).almost_equal(z1)


class TestDecomposition:
    def test_monomial_example_dims(self):
        V = span(gap_monomial_instance(4).generators)
        assert V.dim == 13
        assert subspace_series(V).dims() == [13, 13, 11, 9, 5, 0]
        assert V.decomposition().dims() == [0, 2, 2, 4, 5]

    def test_full_space(self):
        A = Ambient(make_space("H2_BALL", 2, 3))
        dec = full_subspace(A).decomposition()
        assert dec.dims() == [1, 2, 3, 4]

    def test_element_components_reconstruct(self):
        z1, z2 = var(0), var(1)
        V = span(submodule_generators([Polynomial(2, {(2, 0): 1, (0, 1): -1}, exact=True)], 4))
        h = z2 * (z1 * z1 - z2) + 3 * (z1 * z1 - z2)
        parts = decompose_element(h, V)
        total = Polynomial.zero(2)
        for k, p in enumerate(parts):
            assert p.is_zero() or ord(p) == k
            total = total + p
        assert total.almost_equal(h, 1e-10)

    def test_element_outside_rejected(self):
        V = span([var(0)])
        with pytest.raises(ValueError):
            decompose_element(var(1), V)

    @given(seed=st.integers(0, 10_000), kind=st.sampled_from(["H2_POLYDISK", "H2_BALL", "A2_BALL"]))
    @settings(max_examples=40, deadline=None)
    def test_random_decomposition_properties(self, seed, kind):
        rng = random.Random(seed)
        inst = random_instance(rng)
        V = span(inst.generators, kind, inst.n, inst.D)
        dec = V.decomposition()
        assert sum(dec.dims()) == V.dim
        B = dec.stacked()
        np.testing.assert_allclose(B.conj().T @ B, np.eye(V.dim), atol=1e-9)
        for k in range(inst.D + 1):
            W = dec.components[k]
            for j in range(W.shape[1]):
                assert order_of_vector(W[:, j], V.ambient, 1e-8) == k
        h = random.Random(seed + 1)
        coeffs = [h.uniform(-1, 1) for _ in range(len(inst.generators))]
        elem = Polynomial.zero(inst.n)
        for c, g in zip(coeffs, inst.generators):
            elem = elem + g.to_float().scale(c)
        parts = decompose_element(elem, V)
        total = Polynomial.zero(inst.n)
        for p in parts:
            total = total + p
        assert total.almost_equal(elem, 1e-8)


class TestWandering:
    def test_one_variable_shift(self):
        V = span(submodule_generators([Polynomial(1, {(1,): 1}, exact=True)], 5), n=1, D=5)
        M = wandering_subspace(V)
        assert M.dim == 1
        (m,) = M.polynomials()
        assert set(m.terms) == {(1,)}
        np.testing.assert_allclose(abs(m.coeff((1,))), 1.0)
        assert M.flags["truncation_limited"]

    def test_maximal_ideal(self):
        V = span(submodule_generators([Polynomial(2, {(1, 0): 1}, exact=True),
                                       Polynomial(2, {(0, 1): 1}, exact=True)], 3), D=3)
        M = wandering_subspace(V)
        assert M.dim == 2
        for p in M.polynomials():
            assert all(sum(k) == 1 for k in p.terms)


class TestRestrictedProjection:
    def test_component_is_invertible(self):
        V = span(submodule_generators([Polynomial(2, {(2, 0): 1, (0, 1): -1}, exact=True)], 4))
        dec = V.decomposition()
        for k in range(5):
            rep = restricted_projection_LW(dec.component(k))
            if dec.dims()[k]:
                assert rep.invertible and rep.m == k and rep.sigma_min > 0
            else:
                assert rep.degenerate

    def test_mixed_orders_rejected(self):
        z = var(0, 1)
        A = Ambient(make_space("H2_POLYDISK", 1, 3))
        with pytest.raises(ValueError):
            restricted_projection_LW(orthonormalize([z, z * z], A))

    def test_order_constant_but_not_homogeneous(self):
        z = var(0, 1)
        A = Ambient(make_space("H2_POLYDISK", 1, 3))
        rep = restricted_projection_LW(orthonormalize([z + z * z], A))
        assert rep.m == 1
        np.testing.assert_allclose(rep.sigma_min, 1 / np.sqrt(2))

    def test_order_of_vector(self):
        A = Ambient(make_space("H2_POLYDISK", 2, 3))
        assert order_of_vector(np.zeros(A.N), A, 1e-12) == INFINITY
        assert order_of_vector(A.vector(Polynomial(2, {(1, 1): 1.0})), A, 1e-12) == 2


def test_random_polynomial_is_exact():
    p = random_polynomial(random.Random(0), 2, 3)
    assert p.exact and p.degree <= 3


class TestKnownCases:
    def setup_method(self):
        inst = blaschke_instance()
        self.S = make_space("H2_POLYDISK", 1, 12)
        self.V = orthonormalize(inst.float_generators(), Ambient(self.S), horizon=inst.horizon)
        self.zzB = blaschke_series(0.5, 12, exact=False).shift((2,)).truncate(12)

    def test_blaschke_element_splits_at_one_and_two(self):
        z = Polynomial.variable(0, 1)
        parts = decompose_element(z + self.zzB, self.V)
        norms = [norm(p, self.S) for p in parts]
        np.testing.assert_allclose(norms[1:3], [1.0, 1.0], atol=1e-6)
        # the truncated generators are only nearly orthogonal
        assert norms[0] == 0 and max(norms[3:]) < 1e-3

    def test_blaschke_component_singular_value(self):
        rep = restricted_projection_LW(self.V.decomposition().component(2))
        np.testing.assert_allclose(rep.sigma_min, 0.5 / norm(self.zzB, self.S), rtol=1e-6)

    def test_homogeneous_layer_singular_value(self):
        A = Ambient(make_space("H2_BALL", 2, 3))
        rep = restricted_projection_LW(orthonormalize([Polynomial(2, {(2, 0): 1.0})], A))
        np.testing.assert_allclose(rep.sigma_min, 1.0)

    def test_wandering_of_full_space(self):
        A = Ambient(make_space("H2_POLYDISK", 1, 4))
        M = wandering_subspace(full_subspace(A))
        assert M.dim == 1 and set(M.polynomials()[0].terms) == {(0,)}

    def test_wandering_of_gap_instance(self):
        V = span(gap_monomial_instance(4).generators)
        M = wandering_subspace(V)
        for i in range(2):
            assert M.contains(Polynomial.variable(i, 2))
        # z1*z2 is not in V, so it cannot be in M either
        assert not M.contains(Polynomial(2, {(1, 1): 1.0}))

    @pytest.mark.parametrize("alpha", [0.0, 1.0, 2.5])
    def test_one_variable_wandering_exceeds_first_layer(self, alpha):
        checked = 0
        for seed in range(150):
            rng = random.Random(seed)
            inst = random_instance(rng, n=1, D=rng.randint(3, 4))
            A = Ambient(make_space("A2_DISK_ALPHA", 1, inst.D, alpha=alpha))
            V = orthonormalize(inst.float_generators(), A)
            M = wandering_subspace(V)
            dec = V.decomposition()
            k = next((k for k, d in enumerate(dec.dims()) if d), None)
            if k is None or M.dim < 2:
                continue
            checked += 1
            W = dec.components[k]
            np.testing.assert_allclose(W - M.basis @ (M.basis.conj().T @ W), 0, atol=1e-8)
            assert M.dim > W.shape[1]
        assert checked > 5
