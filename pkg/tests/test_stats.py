"""Scoring, signed-rank test, confidence intervals, ATS and hypothesis logic.

Each nontrivial computation is checked against an independent oracle:
full sign-assignment enumeration for the exact p-value, test inversion for
the Hodges-Lehmann interval, and a label-permutation test for the ATS.
"""

import itertools

import numpy as np
import pytest
from scipy.stats import rankdata

import pisphere.stats as S
from pisphere.stats import (
    AtsResult,
    FactorMap,
    FactorScores,
    FactorSpec,
    QuestionnaireResponse,
    StatsError,
    TestResult,
    ats_interaction,
    effect_label,
    evaluate_hypotheses,
    hodges_lehmann_ci,
    score_factors,
    wilcoxon_signed_rank,
)

# ---------------------------------------------------------------------------
# oracles


def enumeration_p(d):
    """Two-sided exact p over all 2^n sign assignments (reference path)."""
    d = np.asarray(d, dtype=float)
    ranks = rankdata(np.abs(d))
    w_obs = ranks[d > 0].sum()
    low = high = 0
    for signs in itertools.product((0, 1), repeat=len(d)):
        w = sum(r for r, s in zip(ranks, signs) if s)
        if w <= w_obs + 1e-9:
            low += 1
        if w >= w_obs - 1e-9:
            high += 1
    return min(1.0, 2.0 * min(low, high) / 2 ** len(d))


def inversion_ci(d, alpha=0.05):
    """Smallest and largest shift surviving the two-sided test at alpha."""
    d = np.asarray(d, dtype=float)
    n = len(d)
    walsh = np.sort([(d[i] + d[j]) / 2.0 for i in range(n) for j in range(i, n)])

    def rejected(mu):
        dd = d - mu
        dd = dd[dd != 0.0]
        if len(dd) < 5:
            return False
        return wilcoxon_signed_rank([(0.0, x) for x in dd]).p_value <= alpha

    accepted = [w for w in walsh if not rejected(w - 1e-9) or not rejected(w + 1e-9)]
    return min(accepted), max(accepted)


def permutation_interaction_p(scores, draws=10_000, seed=0):
    """Label permutation on joint-rank condition differences."""
    vals = np.array([[s.rea, s.ada] for s in scores])
    ranks = rankdata(vals.ravel()).reshape(vals.shape)
    rd = ranks[:, 1] - ranks[:, 0]
    groups = np.array([s.order for s in scores])
    n_a = int((groups == "A").sum())
    obs = abs(rd[groups == "A"].mean() - rd[groups == "B"].mean())
    rng = np.random.default_rng(seed)
    hits = 0
    for _ in range(draws):
        p = rng.permutation(rd)
        if abs(p[:n_a].mean() - p[n_a:].mean()) >= obs - 1e-12:
            hits += 1
    return (hits + 1) / (draws + 1)


def synthetic_scores(rng, n_per=12, interaction=0.0, cond_effect=0.0, order_effect=0.0):
    out = []
    for k, order in enumerate(("A", "B")):
        for s in range(n_per):
            base = rng.normal(3.0, 1.0) + order_effect * k
            rea = base + rng.normal(0, 0.5)
            ada = base + cond_effect + interaction * (1 if k else -1) + rng.normal(0, 0.5)
            out.append(FactorScores(f"p{order}{s}", order, rea, ada))
    return out


# ---------------------------------------------------------------------------


def two_item_map(reverse_second=False, hi=5):
    return FactorMap(
        factors=(
            FactorSpec("F", "X", (1, hi), (("i1", False), ("i2", reverse_second))),
        )
    )


class TestScoring:
    def test_all_threes_mean_three(self):
        resp = QuestionnaireResponse("p1", "REA", "A", (("i1", 3), ("i2", 3)))
        out = score_factors([resp], two_item_map())
        assert out[("p1", "REA")]["F"] == 3.0

    def test_reverse_coding(self):
        resp = QuestionnaireResponse("p1", "REA", "A", (("i1", 1), ("i2", 5)))
        out = score_factors([resp], two_item_map(reverse_second=True))
        assert out[("p1", "REA")]["F"] == 1.0

    def test_spreadsheet_recompute_oracle(self):
        rng = np.random.default_rng(0)
        items = [(f"i{k}", bool(k % 3 == 0)) for k in range(1, 7)]
        fmap = FactorMap(factors=(FactorSpec("F", "X", (1, 7), tuple(items)),))
        responses, expected = [], {}
        for p in range(10):
            scores = tuple((iid, int(rng.integers(1, 8))) for iid, _ in items)
            responses.append(QuestionnaireResponse(f"p{p}", "ADA", "B", scores))
            vals = [(8 - v if rev else v) for (iid, rev), (_, v) in zip(items, scores)]
            expected[f"p{p}"] = sum(vals) / len(vals)
        out = score_factors(responses, fmap)
        for p in range(10):
            assert abs(out[(f"p{p}", "ADA")]["F"] - expected[f"p{p}"]) < 1e-12

    def test_item_order_permutation_invariant(self):
        resp = QuestionnaireResponse("p1", "REA", "A", (("i2", 4), ("i1", 2)))
        out = score_factors([resp], two_item_map())
        assert out[("p1", "REA")]["F"] == 3.0

    def test_missing_item_names_participant(self):
        resp = QuestionnaireResponse("p7", "REA", "A", (("i1", 3),))
        with pytest.raises(StatsError, match="p7.*i2"):
            score_factors([resp], two_item_map())

    def test_out_of_range_rejected(self):
        resp = QuestionnaireResponse("p1", "REA", "A", (("i1", 6), ("i2", 3)))
        with pytest.raises(StatsError, match="outside scale"):
            score_factors([resp], two_item_map())

    def test_duplicate_participant_condition_rejected(self):
        r = QuestionnaireResponse("p1", "REA", "A", (("i1", 3), ("i2", 3)))
        with pytest.raises(StatsError, match="duplicate"):
            score_factors([r, r], two_item_map())

    def test_item_in_two_factors_of_one_instrument_rejected(self):
        with pytest.raises(StatsError):
            FactorMap(
                factors=(
                    FactorSpec("F1", "X", (1, 5), (("i1", False),)),
                    FactorSpec("F2", "X", (1, 5), (("i1", False),)),
                )
            )


class TestWilcoxon:
    def test_identical_pairs_degenerate(self):
        res = wilcoxon_signed_rank([(2.0, 2.0)] * 8)
        assert res.p_value == 1.0 and res.effect_size_r == 0.0 and res.degenerate

    def test_needs_five_nonzero(self):
        with pytest.raises(StatsError):
            wilcoxon_signed_rank([(0, 1), (0, 2), (0, 3), (0, 4)])

    def test_labels_flip_at_thresholds(self):
        assert effect_label(0.0999999) == "negligible"
        assert effect_label(0.10) == "small"
        assert effect_label(0.2999999) == "small"
        assert effect_label(0.30) == "medium"
        assert effect_label(0.4999999) == "medium"
        assert effect_label(0.50) == "large"
        assert effect_label(1.0) == "large"

    def test_exact_matches_enumeration(self):
        rng = np.random.default_rng(1)
        checked = 0
        while checked < 60:
            n = int(rng.integers(5, 13))
            d = rng.integers(-4, 5, n).astype(float)
            d = d[d != 0.0]
            if len(d) < 5:
                continue
            res = wilcoxon_signed_rank([(0.0, x) for x in d])
            assert abs(res.p_value - enumeration_p(d)) < 1e-12
            checked += 1

    def test_swap_symmetry(self):
        rng = np.random.default_rng(2)
        pairs = [(float(a), float(b)) for a, b in rng.normal(3, 1, (10, 2))]
        fwd = wilcoxon_signed_rank(pairs)
        rev = wilcoxon_signed_rank([(b, a) for a, b in pairs])
        assert fwd.p_value == rev.p_value
        assert fwd.effect_size_r == rev.effect_size_r
        assert abs(fwd.ci_lower + rev.ci_upper) < 1e-12
        assert abs(fwd.ci_upper + rev.ci_lower) < 1e-12

    def test_shift_invariance(self):
        rng = np.random.default_rng(3)
        pairs = [(float(a), float(b)) for a, b in rng.normal(0, 1, (12, 2))]
        shifted = [(a + 7.5, b + 7.5) for a, b in pairs]
        r0, r1 = wilcoxon_signed_rank(pairs), wilcoxon_signed_rank(shifted)
        assert r0.p_value == r1.p_value and r0.effect_size_r == r1.effect_size_r
        assert abs(r0.ci_lower - r1.ci_lower) < 1e-9

    def test_large_n_uses_normal_approximation(self):
        rng = np.random.default_rng(4)
        d = rng.normal(0.3, 1.0, 40)
        res = wilcoxon_signed_rank([(0.0, x) for x in d])
        from scipy.stats import wilcoxon as scipy_wilcoxon

        ref = scipy_wilcoxon(d, alternative="two-sided", correction=True,
                             mode="approx").pvalue
        assert abs(res.p_value - ref) < 1e-9

    def test_result_fields_validated(self):
        with pytest.raises(StatsError):
            TestResult(p_value=1.5, ci_lower=0, ci_upper=0, effect_size_r=0,
                       label="negligible", n=5)
        with pytest.raises(StatsError):
            TestResult(p_value=0.5, ci_lower=1, ci_upper=0, effect_size_r=0,
                       label="negligible", n=5)


class TestHodgesLehmann:
    def test_symmetric_pairs_straddle_zero(self):
        d = [-3.0, -2.0, -1.0, 1.0, 2.0, 3.0]
        lo, hi = hodges_lehmann_ci([(0.0, x) for x in d])
        assert lo < 0.0 < hi

    def test_point_mass(self):
        lo, hi = hodges_lehmann_ci([(0.0, 2.0)] * 6)
        assert (lo, hi) == (2.0, 2.0)

    def test_matches_inversion_oracle(self):
        rng = np.random.default_rng(5)
        checked = 0
        while checked < 10:
            d = np.round(rng.normal(1.0, 2.0, int(rng.integers(6, 11))), 2)
            d = d[d != 0.0]
            if len(d) < 6:
                continue
            lo, hi = hodges_lehmann_ci([(0.0, x) for x in d])
            lo2, hi2 = inversion_ci(d)
            assert abs(lo - lo2) < 1e-9 and abs(hi - hi2) < 1e-9
            checked += 1

    def test_needs_five_pairs(self):
        with pytest.raises(StatsError):
            hodges_lehmann_ci([(0, 1)] * 4)


class TestAts:
    def test_identical_scores_degenerate(self):
        scores = [FactorScores(f"p{i}", "A" if i < 4 else "B", 3.0, 3.0) for i in range(8)]
        res = ats_interaction(scores)
        assert res.p_value == 1.0 and res.degenerate

    def test_needs_four_per_group(self):
        scores = [FactorScores(f"p{i}", "A" if i < 3 else "B", 1.0 * i, 2.0 * i)
                  for i in range(7)]
        with pytest.raises(StatsError):
            ats_interaction(scores)

    def test_matches_permutation_oracle(self):
        rng = np.random.default_rng(6)
        for t in range(5):
            scores = synthetic_scores(rng, interaction=rng.uniform(0, 1.0), cond_effect=0.3)
            ats_p = ats_interaction(scores).p_value
            perm_p = permutation_interaction_p(scores, draws=4000, seed=t)
            assert abs(ats_p - perm_p) <= 0.05

    def test_main_effect_without_interaction_accepted(self):
        rng = np.random.default_rng(7)
        high = sum(
            ats_interaction(synthetic_scores(rng, cond_effect=1.0)).p_value > 0.05
            for _ in range(40)
        )
        assert high >= 36  # >= 90% non-rejections under the null interaction

    def test_zero_variance_group_uses_permutation_fallback(self):
        scores = [FactorScores(f"a{i}", "A", 1.0, 1.0) for i in range(5)]
        scores += [FactorScores(f"b{i}", "B", float(i), float(i) + (1.0 if i % 2 else -1.0))
                   for i in range(5)]
        res = ats_interaction(scores)
        assert res.degenerate and 0.0 < res.p_value <= 1.0


class TestHypotheses:
    @staticmethod
    def result(r, lo=-1.0, hi=1.0):
        return TestResult(p_value=0.1, ci_lower=lo, ci_upper=hi,
                          effect_size_r=r, label=effect_label(r), n=16)

    def test_reference_pattern_decisions(self):
        results = {
            "Animacy": self.result(0.12),
            "Competence": self.result(0.02),
            "Perceived Intelligence": self.result(0.35, lo=-0.9, hi=-0.2),
        }
        decisions = {d.hypothesis: d for d in evaluate_hypotheses(results)}
        assert not decisions["H0(2)"].rejected
        assert not decisions["H0(3)"].rejected
        assert decisions["H0(4)"].rejected
        assert decisions["H0(4)"].direction == "REA"

    def test_direction_ada(self):
        results = {
            "Animacy": self.result(0.0),
            "Competence": self.result(0.0),
            "Perceived Intelligence": self.result(0.6, lo=0.2, hi=0.9),
        }
        d = {x.hypothesis: x for x in evaluate_hypotheses(results)}["H0(4)"]
        assert d.rejected and d.direction == "ADA"

    def test_missing_factor_rejected(self):
        with pytest.raises(StatsError):
            evaluate_hypotheses({"Animacy": self.result(0.1)})


class TestPipeline:
    def test_fixture_reports_all_eight_factors(self):
        from pisphere import defaults

        responses = S.read_responses_csv(str(defaults.default_responses_csv_path()))
        fmap = S.factor_map_from_dict(defaults.default_factor_map())
        tests, interactions = S.analyze_all(responses, fmap)
        assert len(tests) == 8 and len(interactions) == 8
        expected = {
            "Anthropomorphism", "Animacy", "Likeability", "Perceived Intelligence",
            "Perceived Safety", "Warmth", "Competence", "Discomfort",
        }
        assert set(tests) == expected
        report = S.format_report(tests, interactions, evaluate_hypotheses(tests))
        for f in expected:
            assert f in report

    def test_report_csv(self, tmp_path):
        res = {"F": TestResult(p_value=0.5, ci_lower=-1, ci_upper=1,
                               effect_size_r=0.2, label="small", n=10)}
        p = tmp_path / "report.csv"
        S.write_report_csv(res, str(p))
        lines = p.read_text().splitlines()
        assert lines[0].startswith("factor,") and lines[1].startswith("F,")

    def test_csv_requires_fixed_columns(self, tmp_path):
        p = tmp_path / "bad.csv"
        p.write_text("a,b\n1,2\n")
        with pytest.raises(StatsError):
            S.read_responses_csv(str(p))

    def test_ats_result_type(self):
        assert AtsResult(p_value=0.5, statistic=1.0, df=1.0).p_value == 0.5
