import random
from fractions import Fraction

import pytest

from valmod.beurling import beurling_verdict
from valmod.oracle import (OracleInstance, OracleSizeError, enumerate_monomial_subspaces,
                           exact_r1_inner_function, exact_weights, is_upset, oracle_verdicts)
from valmod.poly import Polynomial, ord
from valmod.presets import (bidisk_inner_example, gap_monomial_instance, monomial_span,
                            random_instance, submodule_generators)
from valmod.scalars import QI, ZERO
from valmod.spaces import make_space
from valmod.subspace import Ambient, orthonormalize


def float_verdicts(inst, kind="H2_POLYDISK", alpha=None):
    A = Ambient(make_space(kind, inst.n, inst.D, alpha=alpha))
    return beurling_verdict(orthonormalize(inst.float_generators(), A, horizon=inst.horizon))


class TestWeights:
    def test_polydisk_and_disk(self):
        assert set(exact_weights("H2_POLYDISK", 2, 2).values()) == {Fraction(1)}
        w = exact_weights("A2_DISK_ALPHA", 1, 3, alpha=1)
        assert w[(0,)] == Fraction(1, 2) and w[(3,)] == Fraction(1, 20)

    def test_unsupported(self):
        with pytest.raises(ValueError):
            exact_weights("H2_BALL", 2, 2)
        with pytest.raises(ValueError):
            exact_weights("A2_DISK_ALPHA", 1, 2, alpha=0.5)

    def test_size_bound(self):
        inst = OracleInstance(2, 5, gap_monomial_instance(5).generators)
        with pytest.raises(OracleSizeError):
            inst.subspace()
        assert inst.subspace(bounded=False).dim == 19


class TestExactSubspace:
    def test_counterexample_verdicts(self):
        rep = oracle_verdicts(OracleInstance(2, 4, gap_monomial_instance(4).generators))
        assert rep.verdicts() == {"invariant": "FAIL", "r1_inner": "PASS", "full_projection": "FAIL"}
        assert rep.consistent
        w = rep.full_projection.witnesses[0]
        assert w.residual == Polynomial(2, {(1, 1): QI(1)}, exact=True)
        assert w.residual_norm == 1.0

    def test_components_are_exactly_orthogonal(self):
        seed = Polynomial(2, {(2, 0): QI(1), (0, 1): QI(-1), (1, 0): QI(0, 1)}, exact=True)
        ES = OracleInstance(2, 4, submodule_generators([seed], 4)).subspace()
        vecs = [v for comp in ES.components for v in comp]
        assert len(vecs) == ES.dim == sum(ES.dims())
        for i, u in enumerate(vecs):
            for v in vecs[i + 1:]:
                assert ES.dot(u, v) == ZERO
        for k, comp in enumerate(ES.components):
            for v in comp:
                assert ord(ES.polynomial(v)) == k

    def test_series_dims(self):
        ES = OracleInstance(2, 4, gap_monomial_instance(4).generators).subspace()
        assert ES.series_dims() == [13, 13, 11, 9, 5, 0]
        assert ES.contains(ES.vector(Polynomial(2, {(2, 1): QI(3)}, exact=True)))
        assert not ES.contains(ES.vector(Polynomial(2, {(1, 1): QI(1)}, exact=True)))

    @pytest.mark.parametrize("seed", range(30))
    def test_agrees_with_float(self, seed):
        inst = random_instance(random.Random(1000 + seed))
        exact = oracle_verdicts(OracleInstance(inst.n, inst.D, inst.generators))
        assert exact.consistent
        assert exact.verdicts() == float_verdicts(inst).verdicts()

    @pytest.mark.parametrize("seed", range(10))
    def test_agrees_with_float_on_weighted_disk(self, seed):
        inst = random_instance(random.Random(seed), n=1)
        exact = oracle_verdicts(OracleInstance(1, inst.D, inst.generators, "A2_DISK_ALPHA", 2))
        assert exact.verdicts() == float_verdicts(inst, "A2_DISK_ALPHA", 2).verdicts()


class TestInnerFunctions:
    def test_bidisk_example(self):
        ok, bad = exact_r1_inner_function(bidisk_inner_example(), exact_weights("H2_POLYDISK", 2, 2))
        assert ok and not bad

    def test_non_inner(self):
        f = Polynomial(1, {(0,): QI(1), (1,): QI(1)}, exact=True)
        ok, bad = exact_r1_inner_function(f, exact_weights("H2_POLYDISK", 1, 1))
        assert not ok and bad[0][0] == (1,)

    def test_float_input_rejected(self):
        with pytest.raises(TypeError):
            exact_r1_inner_function(bidisk_inner_example(False), exact_weights("H2_POLYDISK", 2, 2))


class TestMonomialSubsets:
    def test_upsets(self):
        assert is_upset({(1,), (2,), (3,)}, 1, 3)
        assert not is_upset({(1,), (3,)}, 1, 3)
        assert is_upset({(3,)}, 1, 3)
        assert is_upset(set(), 2, 2)

    def test_enumeration_one_variable(self):
        def verdict(S):
            return OracleInstance(1, 3, monomial_span(S, 1)).subspace().verdict()

        rep = enumerate_monomial_subspaces(1, 3, verdict)
        assert rep.total == 16
        assert rep.invariant_count == 5
        assert rep.passed

    def test_enumeration_bound(self):
        with pytest.raises(OracleSizeError):
            enumerate_monomial_subspaces(2, 4, lambda S: None)
