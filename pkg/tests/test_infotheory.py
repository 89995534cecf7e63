import math

import numpy as np
import pytest

from miprune.errors import ConfigError
from miprune.infotheory import (
    DiscreteJoint,
    conditional_entropy,
    conditional_mi,
    entropy,
    group_mutual_information,
    mutual_information,
    naive_bayes_joint,
    random_joint,
    run_verification_suite,
    verify_chain_rule,
    verify_lse_bounds,
    verify_submodularity,
)

# 40-digit references for the frozen fixtures
H_QUARTER = 0.56233514461880835029        # H(0.25, 0.75)
H_COND_22 = 0.60684255882441103119        # H(X|Y) of [[.4,.1],[.2,.3]]
MI_22 = 0.086304621735534278232           # MI of the same joint

JOINT_22 = DiscreteJoint(("x", "y"), np.array([[0.4, 0.1], [0.2, 0.3]]))


def product_joint(px, py, names=("x", "y")):
    return DiscreteJoint(names, np.outer(px, py))


class TestEntropy:
    def test_uniform_binary(self):
        j = product_joint([0.5, 0.5], [1.0])
        assert entropy(j, "x") == pytest.approx(math.log(2), abs=1e-15)

    def test_point_mass(self):
        j = product_joint([1.0, 0.0], [1.0])
        assert entropy(j, "x") == 0.0

    def test_quarter_three_quarter(self):
        j = product_joint([0.25, 0.75], [1.0])
        assert entropy(j, "x") == pytest.approx(H_QUARTER, abs=1e-12)

    def test_unknown_variable(self):
        with pytest.raises(KeyError):
            entropy(JOINT_22, "z")


class TestConditionalEntropy:
    def test_independent_equals_marginal_entropy(self):
        j = product_joint([0.3, 0.7], [0.6, 0.4])
        assert conditional_entropy(j, "x", "y") == pytest.approx(
            entropy(j, "x"), abs=1e-12
        )

    def test_deterministic_copy_is_zero(self):
        j = DiscreteJoint(("x", "y"), np.array([[0.5, 0.0], [0.0, 0.5]]))
        assert conditional_entropy(j, "x", "y") == pytest.approx(0.0, abs=1e-15)

    def test_fixture(self):
        assert conditional_entropy(JOINT_22, "x", "y") == pytest.approx(
            H_COND_22, abs=1e-12
        )

    def test_axis_order_irrelevant(self):
        flipped = DiscreteJoint(("y", "x"), JOINT_22.probs.T.copy())
        assert conditional_entropy(flipped, "x", "y") == pytest.approx(
            conditional_entropy(JOINT_22, "x", "y"), abs=1e-14
        )


class TestMutualInformation:
    def test_independent_is_zero(self):
        j = product_joint([0.3, 0.7], [0.2, 0.8])
        assert mutual_information(j, "x", "y") == pytest.approx(0.0, abs=1e-14)

    def test_identical_uniform_binary(self):
        j = DiscreteJoint(("x", "y"), np.array([[0.5, 0.0], [0.0, 0.5]]))
        assert mutual_information(j, "x", "y") == pytest.approx(math.log(2), abs=1e-14)

    def test_fixture_and_internal_agreement(self):
        # the function itself cross-checks the two formulas to 1e-12
        assert mutual_information(JOINT_22, "x", "y") == pytest.approx(MI_22, abs=1e-12)

    def test_symmetry_on_random_joints(self, rng):
        for _ in range(300):
            j = random_joint(rng, rng.integers(2, 6, size=2), names=("x", "y"))
            assert mutual_information(j, "x", "y") == pytest.approx(
                mutual_information(j, "y", "x"), abs=1e-12
            )


class TestConditionalMI:
    def test_independent_pair_is_zero(self, rng):
        # y independent of (x, z)
        pxz = rng.random((3, 2))
        pxz /= pxz.sum()
        py = np.array([0.4, 0.6])
        probs = pxz[:, None, :] * py[None, :, None]
        j = DiscreteJoint(("x", "y", "z"), probs)
        assert conditional_mi(j, "x", "y", "z") == pytest.approx(0.0, abs=1e-13)

    def test_constant_conditioner_reduces_to_mi(self, rng):
        pxy = rng.random((3, 4))
        pxy /= pxy.sum()
        j3 = DiscreteJoint(("x", "y", "z"), pxy[:, :, None])
        j2 = DiscreteJoint(("x", "y"), pxy)
        assert conditional_mi(j3, "x", "y", "z") == pytest.approx(
            mutual_information(j2, "x", "y"), abs=1e-13
        )

    def test_matches_triple_sum(self, rng):
        for _ in range(100):
            j = random_joint(rng, (2, 2, 2), names=("x", "y", "z"))
            p = j.probs
            # direct sum of p(x,y,z) log p(x|y,z)/p(x|z)
            pyz = p.sum(axis=0, keepdims=True)
            pz = p.sum(axis=(0, 1), keepdims=True)
            px_z = p.sum(axis=1, keepdims=True) / pz
            px_yz = p / pyz
            mask = p > 0
            direct = float(np.sum(p[mask] * np.log((px_yz / px_z)[mask])))
            assert conditional_mi(j, "x", "y", "z") == pytest.approx(direct, abs=1e-12)

    def test_nonnegative(self, rng):
        for _ in range(200):
            j = random_joint(rng, rng.integers(2, 5, size=3), names=("x", "y", "z"))
            assert conditional_mi(j, "x", "y", "z") >= -1e-12


class TestChainRule:
    def test_holds_on_random_joints(self, rng):
        for _ in range(300):
            j = random_joint(rng, rng.integers(2, 6, size=3), names=("vs", "vi", "t"))
            report = verify_chain_rule(j, "vs", "vi", "t")
            assert report.passed
            assert report.set_gain == pytest.approx(report.conditional, abs=1e-10)

    def test_naive_bayes_estimate_is_tight(self, rng):
        # vi and vs conditionally independent given t: the estimate gap
        # MI(vi; vs | t) vanishes
        j = naive_bayes_joint(rng, [2, 3], 3, ground_names=("vs", "vi"), target_name="t")
        report = verify_chain_rule(j, "vs", "vi", "t")
        assert report.passed
        assert abs(report.estimate_gap) <= 1e-10
        assert conditional_mi(j, "vi", "vs", "t") == pytest.approx(0.0, abs=1e-12)

    def test_dependent_joint_reports_gap(self, rng):
        for _ in range(50):
            j = random_joint(rng, (3, 3, 2), names=("vs", "vi", "t"))
            report = verify_chain_rule(j, "vs", "vi", "t")
            assert report.passed
            assert report.estimate_gap == pytest.approx(
                conditional_mi(j, "vi", "vs", "t"), abs=1e-10
            )


class TestSubmodularity:
    def test_three_binary_symptoms(self, rng):
        for _ in range(20):
            j = naive_bayes_joint(rng, [2, 2, 2], 2)
            report = verify_submodularity(j, ["g0", "g1", "g2"], "y")
            assert report.passed
            assert report.monotone
            assert report.worst_slack >= -1e-10

    def test_equal_sets_have_zero_slack(self, rng):
        j = naive_bayes_joint(rng, [2, 2], 2)
        # A == B chains contribute slack exactly 0; worst_slack <= 0 + fp noise
        report = verify_submodularity(j, ["g0", "g1"], "y")
        assert report.passed

    def test_rejects_non_naive_bayes(self, rng):
        for _ in range(10):
            j = random_joint(rng, (2, 2, 2), names=("g0", "g1", "y"))
            try:
                verify_submodularity(j, ["g0", "g1"], "y")
            except ConfigError:
                return
        pytest.fail("no random joint violated conditional independence")


class TestLseBounds:
    def test_constant_vector_upper_tight(self):
        report = verify_lse_bounds([2.5] * 8)
        assert report.passed
        assert report.lse_value == pytest.approx(2.5 + math.log(8), abs=1e-12)

    def test_dominant_entry_lower_tight(self):
        report = verify_lse_bounds([100.0, 0.0, -3.0])
        assert report.passed
        assert report.lse_value == pytest.approx(100.0, abs=1e-12)

    def test_random_sweep(self, rng):
        for _ in range(500):
            z = rng.normal(scale=5, size=int(rng.integers(1, 20)))
            assert verify_lse_bounds(z).passed

    def test_rejects_empty(self):
        with pytest.raises(ConfigError):
            verify_lse_bounds([])


class TestDiscreteJointValidation:
    def test_rejects_bad_mass(self):
        with pytest.raises(ConfigError):
            DiscreteJoint(("x",), np.array([0.5, 0.6]))

    def test_rejects_negative(self):
        with pytest.raises(ConfigError):
            DiscreteJoint(("x",), np.array([1.1, -0.1]))

    def test_rejects_too_many_variables(self):
        with pytest.raises(ConfigError):
            DiscreteJoint(tuple("abcde"), np.full((2,) * 5, 1 / 32))

    def test_rejects_large_alphabet(self):
        with pytest.raises(ConfigError):
            DiscreteJoint(("x",), np.full(9, 1 / 9))

    def test_group_mi_rejects_overlap(self):
        with pytest.raises(ConfigError):
            group_mutual_information(JOINT_22, ["x"], ["x"])


class TestSuite:
    def test_passes(self):
        report = run_verification_suite(trials=300, seed=5)
        assert report.passed
        assert report.first_failure == ""

    def test_fault_injection_fails(self):
        report = run_verification_suite(trials=300, seed=5, inject_fault=True)
        assert not report.passed
        assert report.mass_failures >= 1
        assert "trial 17" in report.first_failure
