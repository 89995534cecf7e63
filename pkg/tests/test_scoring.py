import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import logsumexp, rel_entr

from miprune import (
    ConditionalTable,
    ConfigError,
    MarginalVector,
    PmiTable,
    PruneConfig,
    ScoreVector,
    combine,
    cross_score_max,
    global_score,
    pmi,
    self_score_max,
    text_marginal,
)

LN_4_3 = 0.28768207245178092744
LN_2_1 = 0.74193734472937731248          # ln(3 * 0.7)
GLOBAL_FIXTURE_ROW0 = 0.091516221849435680068  # 0.8*ln(4/3) + 0.2*ln(1/2)


def cross_pmi(values):
    return PmiTable(np.asarray(values, dtype=float), mode="cross")


def self_pmi(values):
    return PmiTable(np.asarray(values, dtype=float), mode="self")


class TestCrossScoreMax:
    def test_zero_row(self):
        sv = cross_score_max(cross_pmi([[0.0, 0.0, 0.0]]))
        assert sv.values[0] == 0.0

    def test_fixture_row(self):
        sv = cross_score_max(cross_pmi([[LN_4_3, math.log(0.5)]]))
        assert sv.values[0] == pytest.approx(LN_4_3, abs=1e-15)

    def test_single_text_token_scores_zero(self, rng):
        # one text column: conditional and marginal are both [1], PMI = 0
        from conftest import unit_matrix
        from miprune.selection import build_tables, cross_scores

        v = unit_matrix(rng, 5, 4)
        t = unit_matrix(rng, 1, 4, kind="textual")
        with pytest.warns(UserWarning, match="single text token"):
            tables = build_tables(v, t, PruneConfig(budget=2), need_self=False)
        sv = cross_scores(tables, PruneConfig(budget=2))
        np.testing.assert_allclose(sv.values, 0.0, atol=1e-12)

    def test_wrong_mode(self):
        from miprune import InvalidModeError

        with pytest.raises(InvalidModeError):
            cross_score_max(self_pmi([[0.0]]))


class TestSelfScoreMax:
    def test_empty_selection_is_zero(self):
        sv = self_score_max(self_pmi(np.zeros((4, 4))), selected=[])
        np.testing.assert_array_equal(sv.values, 0.0)

    def test_diagonal_entry_when_self_selected(self):
        table = self_pmi([[1.5, 0.2], [0.2, 1.5]])
        sv = self_score_max(table, selected=[0])
        assert sv.values[0] == 1.5

    def test_hand_computed_fixture(self):
        # 3 tokens, self-conditional row 1 = [0.7, 0.2, 0.1], marginal 1/3
        cond = ConditionalTable(
            np.array([[0.5, 0.3, 0.2], [0.7, 0.2, 0.1], [0.1, 0.2, 0.7]]),
            mode="self", normalization="softmax",
        )
        from miprune import visual_marginal

        table = pmi(cond, visual_marginal(3))
        sv = self_score_max(table, selected=[0])
        assert sv.values[1] == pytest.approx(LN_2_1, abs=1e-12)

    def test_out_of_range_selected(self):
        with pytest.raises(IndexError):
            self_score_max(self_pmi(np.zeros((3, 3))), selected=[3])


class TestGlobalScore:
    def test_conditional_equal_marginal_is_zero(self):
        cond = ConditionalTable(np.array([[0.6, 0.4]]), mode="cross",
                                normalization="softmax")
        marg = MarginalVector(np.array([0.6, 0.4]), mode="cross")
        sv = global_score(cond, pmi(cond, marg))
        assert sv.values[0] == pytest.approx(0.0, abs=1e-12)

    def test_fixture_value(self):
        cond = ConditionalTable(np.array([[0.8, 0.2]]), mode="cross",
                                normalization="softmax")
        marg = MarginalVector(np.array([0.6, 0.4]), mode="cross")
        sv = global_score(cond, pmi(cond, marg))
        assert sv.values[0] == pytest.approx(GLOBAL_FIXTURE_ROW0, abs=1e-12)

    def test_matches_kl_divergence(self, rng):
        for _ in range(200):
            n, t = int(rng.integers(1, 8)), int(rng.integers(2, 9))
            cond_vals = rng.exponential(size=(n, t))
            cond_vals /= cond_vals.sum(axis=1, keepdims=True)
            cond = ConditionalTable(cond_vals, mode="cross", normalization="softmax")
            marg = text_marginal(cond)
            sv = global_score(cond, pmi(cond, marg))
            reference = rel_entr(cond_vals, marg.values[None, :]).sum(axis=1)
            np.testing.assert_allclose(sv.values, reference, atol=1e-10)
            assert np.all(sv.values >= -1e-12)

    def test_restricted_renormalized_self(self):
        cond_vals = np.array([[0.5, 0.3, 0.2], [0.25, 0.5, 0.25], [0.1, 0.4, 0.5]])
        cond = ConditionalTable(cond_vals, mode="self", normalization="softmax")
        from miprune import visual_marginal

        table = pmi(cond, visual_marginal(3))
        sv = global_score(cond, table, selected=[0, 2])
        w = cond_vals[:, [0, 2]]
        w = w / w.sum(axis=1, keepdims=True)
        expected = (w * table.values[:, [0, 2]]).sum(axis=1)
        np.testing.assert_allclose(sv.values, expected, atol=1e-12)

    def test_empty_selected_is_zero(self):
        cond = ConditionalTable(np.full((3, 3), 1 / 3), mode="self",
                                normalization="softmax")
        from miprune import visual_marginal

        sv = global_score(cond, pmi(cond, visual_marginal(3)), selected=[])
        np.testing.assert_array_equal(sv.values, 0.0)


class TestCombine:
    def cross(self, vals):
        return ScoreVector(np.asarray(vals, float), kind="cross", aggregation="max")

    def self_(self, vals):
        return ScoreVector(np.asarray(vals, float), kind="self", aggregation="max")

    def test_lambda_one_is_cross(self):
        out = combine(self.cross([0.3, -0.2]), self.self_([5.0, 5.0]), 1.0)
        np.testing.assert_array_equal(out.values, [0.3, -0.2])

    def test_lambda_zero_is_negated_self(self):
        out = combine(self.cross([9.0, 9.0]), self.self_([0.4, -0.1]), 0.0)
        np.testing.assert_array_equal(out.values, [-0.4, 0.1])

    def test_midpoint(self):
        out = combine(self.cross([0.4]), self.self_([0.2]), 0.5)
        assert out.values[0] == pytest.approx(0.1, abs=1e-15)

    def test_lambda_out_of_range(self):
        with pytest.raises(ConfigError):
            combine(self.cross([0.0]), self.self_([0.0]), 1.5)

    @settings(max_examples=40, deadline=None)
    @given(seed=st.integers(0, 10**6),
           lam=st.floats(0.0, 1.0, allow_nan=False))
    def test_affine_in_inputs(self, seed, lam):
        rng = np.random.default_rng(seed)
        c1, c2 = rng.normal(size=4), rng.normal(size=4)
        s1, s2 = rng.normal(size=4), rng.normal(size=4)
        lhs = (combine(self.cross(c1), self.self_(s1), lam).values
               + combine(self.cross(c2), self.self_(s2), lam).values)
        rhs = combine(self.cross(c1 + c2), self.self_(s1 + s2), lam).values
        np.testing.assert_allclose(lhs, rhs, atol=1e-12)

    def test_argmax_invariant_to_monotone_transform_at_lambda_one(self, rng):
        cross = rng.normal(size=20)
        order = np.argsort(-combine(self.cross(cross), self.self_(np.zeros(20)), 1.0).values)
        for transform in (lambda x: 2 * x + 1, np.exp, lambda x: x**3):
            mapped = combine(self.cross(transform(cross)), self.self_(np.zeros(20)), 1.0)
            assert np.array_equal(np.argsort(-mapped.values), order)


class TestMaxVsGlobalBound:
    def test_lse_sandwich_on_random_tables(self, rng):
        for _ in range(300):
            n, t = int(rng.integers(1, 7)), int(rng.integers(1, 9))
            table = rng.normal(size=(n, t)) * 3
            row_max = table.max(axis=1)
            lse = logsumexp(table, axis=1)
            assert np.all(row_max <= lse + 1e-9)
            assert np.all(lse <= row_max + np.log(t) + 1e-9)


class TestPruneConfig:
    def test_defaults(self):
        cfg = PruneConfig(budget=64)
        assert cfg.tau == 0.1 and cfg.lambda_ == 1.0
        assert cfg.aggregation == "max" and cfg.normalization == "softmax"
        assert cfg.effective_self_tau == 0.1

    def test_self_tau_override(self):
        assert PruneConfig(budget=1, self_tau=0.5).effective_self_tau == 0.5

    @pytest.mark.parametrize("kwargs", [
        dict(budget=0),
        dict(budget=1, tau=-0.1),
        dict(budget=1, lambda_=1.2),
        dict(budget=1, lambda_=-0.01),
        dict(budget=1, aggregation="median"),
        dict(budget=1, normalization="zscore"),
        dict(budget=1, self_tau=0.0),
    ])
    def test_rejects_bad_values(self, kwargs):
        with pytest.raises(ConfigError):
            PruneConfig(**kwargs)
