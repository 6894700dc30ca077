import math

import numpy as np
import pytest

from classes.agreement import cross_entropy_identity_check, hellinger_sq, kl_div, verify_agreement_bound
from classes.numerics import ContractError


class TestHellinger:

    def test_identical(self):
        assert hellinger_sq([0.2, 0.8], [0.2, 0.8]) == 0.0

    def test_disjoint(self):
        assert hellinger_sq([1.0, 0.0], [0.0, 1.0]) == pytest.approx(1.0)

    def test_random_pair_matches_direct_formula(self):
        rng = np.random.default_rng(0)
        p, q = rng.dirichlet(np.ones(6)), rng.dirichlet(np.ones(6))
        direct = 0.5 * sum((math.sqrt(a) - math.sqrt(b)) ** 2 for a, b in zip(p, q))
        assert hellinger_sq(p, q) == pytest.approx(direct, abs=1e-15)

    def test_negative_entries(self):
        with pytest.raises(ContractError):
            hellinger_sq([1.2, -0.2], [0.5, 0.5])


class TestKL:

    def test_self_divergence(self):
        assert kl_div([0.3, 0.7], [0.3, 0.7]) == 0.0

    def test_one_hot_against_uniform(self):
        assert kl_div([1.0, 0.0], [0.5, 0.5]) == pytest.approx(math.log(2))

    def test_infinite_when_support_missing(self):
        assert kl_div([0.5, 0.5], [1.0, 0.0]) == math.inf

    def test_random_pair_matches_direct_formula(self):
        rng = np.random.default_rng(1)
        g, p = rng.dirichlet(np.ones(5)), rng.dirichlet(np.ones(5))
        assert kl_div(g, p) == pytest.approx(sum(a * math.log(a / b) for a, b in zip(g, p)), abs=1e-14)


class TestAgreementBound:

    def test_equal_distributions(self):
        report = verify_agreement_bound([0.5, 0.5], [0.5, 0.5], [0.5, 0.5])
        assert report.h2 == 0.0 and report.rhs == 0.0
        assert report.holds

    def test_disjoint_with_infinite_rhs(self):
        report = verify_agreement_bound([1.0, 0.0], [0.0, 1.0], [0.5, 0.5])
        assert report.h2 == pytest.approx(1.0)
        assert report.rhs == math.inf
        assert report.holds

    def test_random_triples(self):
        rng = np.random.default_rng(2)
        for _ in range(1000):
            dim = int(rng.integers(2, 11))
            p, q, g = (rng.dirichlet(np.ones(dim)) for _ in range(3))
            assert verify_agreement_bound(p, q, g).holds


class TestCrossEntropyIdentity:

    def test_random_triples(self):
        rng = np.random.default_rng(3)
        for _ in range(200):
            dim = int(rng.integers(2, 11))
            left, right = cross_entropy_identity_check(*(rng.dirichlet(np.ones(dim)) for _ in range(3)))
            assert left == pytest.approx(right, abs=1e-10)

    def test_zero_when_all_equal(self):
        left, right = cross_entropy_identity_check([0.4, 0.6], [0.4, 0.6], [0.4, 0.6])
        assert left == pytest.approx(0.0, abs=1e-15) and right == pytest.approx(0.0, abs=1e-15)

    def test_one_hot_against_uniform(self):
        left, right = cross_entropy_identity_check([1.0, 0.0], [0.5, 0.5], [0.5, 0.5])
        assert left == pytest.approx(2 * math.log(2))
        assert right == pytest.approx(2 * math.log(2))

    def test_rejects_zero_entries(self):
        with pytest.raises(ContractError):
            cross_entropy_identity_check([1.0, 0.0], [1.0, 0.0], [0.5, 0.5])
