"""Questionnaire scoring and the nonparametric analysis pipeline.

Implements factor scoring with reverse coding, the two-sided Wilcoxon
signed-rank test (exact by rank-sum enumeration for small n, normal
approximation with tie and continuity corrections above), Hodges-Lehmann
confidence intervals, effect size r with threshold labels, the rank-based
ANOVA-type statistic for the condition x order interaction of a 2x2 mixed
design, and the decision logic for the three quantitative null hypotheses.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import chi2, norm, rankdata

CONDITIONS = ("REA", "ADA")
ORDERS = ("A", "B")
HYPOTHESIS_FACTORS = {
    "H0(2)": "Animacy",
    "H0(3)": "Competence",
    "H0(4)": "Perceived Intelligence",
}
EFFECT_THRESHOLDS = ((0.50, "large"), (0.30, "medium"), (0.10, "small"))


class StatsError(ValueError):
    pass


def effect_label(r: float) -> str:
    for threshold, name in EFFECT_THRESHOLDS:
        if r >= threshold:
            return name
    return "negligible"


# ---------------------------------------------------------------------------
# questionnaire types and scoring


@dataclass(frozen=True)
class QuestionnaireResponse:
    participant_id: str
    condition: str
    order: str
    scores: tuple[tuple[str, int], ...]

    def __post_init__(self):
        if self.condition not in CONDITIONS:
            raise StatsError(f"condition must be one of {CONDITIONS}, got {self.condition!r}")
        if self.order not in ORDERS:
            raise StatsError(f"order must be one of {ORDERS}, got {self.order!r}")

    @property
    def score_map(self) -> dict[str, int]:
        return dict(self.scores)


@dataclass(frozen=True)
class FactorSpec:
    factor_id: str
    instrument: str
    scale: tuple[int, int]  # inclusive item range, e.g. (1, 5)
    items: tuple[tuple[str, bool], ...]  # (item_id, reverse_coded)

    def __post_init__(self):
        lo, hi = self.scale
        if not (lo < hi):
            raise StatsError(f"factor {self.factor_id}: bad scale range {self.scale}")
        if not self.items:
            raise StatsError(f"factor {self.factor_id}: no items")


@dataclass(frozen=True)
class FactorMap:
    factors: tuple[FactorSpec, ...]

    def __post_init__(self):
        seen: dict[str, str] = {}
        for f in self.factors:
            for item, _ in f.items:
                key = (f.instrument, item)
                if key in seen:
                    raise StatsError(
                        f"item {item!r} appears in factors {seen[key]!r} and "
                        f"{f.factor_id!r} of instrument {f.instrument!r}"
                    )
                seen[key] = f.factor_id

    def factor_ids(self) -> list[str]:
        return [f.factor_id for f in self.factors]


def factor_map_from_dict(d: dict) -> FactorMap:
    try:
        return FactorMap(
            factors=tuple(
                FactorSpec(
                    factor_id=f["id"],
                    instrument=f["instrument"],
                    scale=(int(f["scale"][0]), int(f["scale"][1])),
                    items=tuple((str(i), bool(rev)) for i, rev in f["items"]),
                )
                for f in d["factors"]
            )
        )
    except (KeyError, TypeError) as e:
        raise StatsError(f"malformed factor map: {e}") from e


def load_factor_map(path: str) -> FactorMap:
    with open(path) as f:
        return factor_map_from_dict(json.load(f))


def reverse_code(score: int, scale: tuple[int, int]) -> int:
    lo, hi = scale
    return lo + hi - score


def score_factors(
    responses: list[QuestionnaireResponse], fmap: FactorMap
) -> dict[tuple[str, str], dict[str, float]]:
    """Per (participant, condition) factor means after reverse coding.

    Raises StatsError when an item is missing or out of its scale range,
    or when a (participant, condition) pair repeats.
    """
    out: dict[tuple[str, str], dict[str, float]] = {}
    for resp in responses:
        key = (resp.participant_id, resp.condition)
        if key in out:
            raise StatsError(f"duplicate response for participant {key[0]!r} in {key[1]}")
        sm = resp.score_map
        factor_scores: dict[str, float] = {}
        for f in fmap.factors:
            vals = []
            for item, rev in f.items:
                if item not in sm:
                    raise StatsError(
                        f"participant {resp.participant_id!r} missing item {item!r}"
                    )
                v = sm[item]
                lo, hi = f.scale
                if not (lo <= v <= hi):
                    raise StatsError(
                        f"participant {resp.participant_id!r} item {item!r}: "
                        f"score {v} outside scale [{lo}, {hi}]"
                    )
                vals.append(reverse_code(v, f.scale) if rev else v)
            factor_scores[f.factor_id] = float(np.mean(vals))
        out[key] = factor_scores
    return out


def read_responses_csv(path: str) -> list[QuestionnaireResponse]:
    """CSV with columns participant_id, condition, order, then item columns."""
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        fixed = {"participant_id", "condition", "order"}
        if reader.fieldnames is None or not fixed <= set(reader.fieldnames):
            raise StatsError(f"responses CSV must have columns {sorted(fixed)}")
        items = [c for c in reader.fieldnames if c not in fixed]
        out = []
        for row in reader:
            try:
                scores = tuple((c, int(row[c])) for c in items if row[c] != "")
            except ValueError as e:
                raise StatsError(f"non-integer item score in row {row}: {e}") from e
            out.append(
                QuestionnaireResponse(
                    participant_id=row["participant_id"],
                    condition=row["condition"],
                    order=row["order"],
                    scores=scores,
                )
            )
    return out


# ---------------------------------------------------------------------------
# Wilcoxon signed-rank


@dataclass(frozen=True)
class TestResult:
    __test__ = False  # keep pytest from collecting this as a test class

    p_value: float
    ci_lower: float
    ci_upper: float
    effect_size_r: float
    label: str
    n: int
    degenerate: bool = False

    def __post_init__(self):
        if not (0.0 <= self.p_value <= 1.0):
            raise StatsError("p_value outside [0, 1]")
        if self.ci_lower > self.ci_upper:
            raise StatsError("ci_lower > ci_upper")


def _signed_rank_distribution(doubled_ranks: np.ndarray) -> np.ndarray:
    """Counts of W+ over all sign assignments, indexed by doubled rank sum.

    Ranks arrive doubled so midranks from ties become integers.  Counts are
    exact in float64 for n <= 25 (2^25 < 2^53).
    """
    total = int(doubled_ranks.sum())
    counts = np.zeros(total + 1)
    counts[0] = 1.0
    for r2 in doubled_ranks:
        r2 = int(r2)
        shifted = np.zeros_like(counts)
        shifted[r2:] = counts[: counts.size - r2]
        counts += shifted
    return counts


EXACT_N_MAX = 25


def _exact_two_sided_p(d: np.ndarray) -> tuple[float, float]:
    """Exact two-sided p and the doubled W+ for nonzero differences d."""
    ranks = rankdata(np.abs(d))
    doubled = np.rint(2.0 * ranks).astype(int)
    w2 = int(np.rint(doubled[d > 0].sum()))
    counts = _signed_rank_distribution(np.asarray(doubled))
    total = counts.sum()
    p_low = counts[: w2 + 1].sum() / total
    p_high = counts[w2:].sum() / total
    return min(1.0, 2.0 * min(p_low, p_high)), w2


def _approx_two_sided_p(d: np.ndarray) -> float:
    n = d.size
    ranks = rankdata(np.abs(d))
    w_plus = ranks[d > 0].sum()
    mean = n * (n + 1) / 4.0
    var = n * (n + 1) * (2 * n + 1) / 24.0
    _, tie_counts = np.unique(ranks, return_counts=True)
    var -= (tie_counts**3 - tie_counts).sum() / 48.0
    if var <= 0:
        return 1.0
    dev = abs(w_plus - mean)
    z = max(0.0, dev - 0.5) / math.sqrt(var)  # continuity correction
    return float(min(1.0, 2.0 * norm.sf(z)))


def wilcoxon_signed_rank(pairs: list[tuple[float, float]]) -> TestResult:
    """Two-sided signed-rank test on differences b - a with zeros dropped.

    Exact null distribution by rank-sum counting for n <= 25, normal
    approximation with tie and continuity corrections above.  Effect size
    r = |Phi^-1(p/2)| / sqrt(n) over the nonzero pair count.
    """
    a = np.array([p[0] for p in pairs], dtype=float)
    b = np.array([p[1] for p in pairs], dtype=float)
    d_all = b - a
    d = d_all[d_all != 0.0]
    n = int(d.size)
    if n == 0:
        return TestResult(
            p_value=1.0, ci_lower=0.0, ci_upper=0.0,
            effect_size_r=0.0, label="negligible", n=0, degenerate=True,
        )
    if n < 5:
        raise StatsError(f"need at least 5 nonzero differences, got {n}")

    if n <= EXACT_N_MAX:
        p, _ = _exact_two_sided_p(d)
    else:
        p = _approx_two_sided_p(d)

    z = float(norm.isf(p / 2.0)) if p < 1.0 else 0.0
    r = min(1.0, abs(z) / math.sqrt(n))
    lo, hi = hodges_lehmann_ci(pairs)
    return TestResult(
        p_value=p, ci_lower=lo, ci_upper=hi,
        effect_size_r=r, label=effect_label(r), n=n,
    )


def _signed_rank_quantile(n: int, alpha_half: float) -> int:
    """Largest c with P(W+ <= c) <= alpha/2 under the exact untied null.

    Returns -1 when even W+ = 0 exceeds the tail mass (tiny n).
    """
    if n <= EXACT_N_MAX:
        doubled = 2 * np.arange(1, n + 1)
        counts = _signed_rank_distribution(doubled)
        cdf = np.cumsum(counts) / counts.sum()
        # cdf index i corresponds to W+ = i/2; untied sums are integers (even index)
        c = -1
        for w in range(n * (n + 1) // 2 + 1):
            if cdf[2 * w] <= alpha_half:
                c = w
            else:
                break
        return c
    mean = n * (n + 1) / 4.0
    sd = math.sqrt(n * (n + 1) * (2 * n + 1) / 24.0)
    return int(math.floor(mean + norm.ppf(alpha_half) * sd))


def hodges_lehmann_ci(
    pairs: list[tuple[float, float]], level: float = 0.95
) -> tuple[float, float]:
    """Confidence interval for the median difference from Walsh averages.

    Orders the n(n+1)/2 Walsh averages of the differences and cuts both
    tails at the exact signed-rank critical value (normal approximation
    above n = 25).  Equivalent to inverting the two-sided test.
    """
    d = np.array([b - a for a, b in pairs], dtype=float)
    n = d.size
    if n < 5:
        raise StatsError(f"need at least 5 pairs, got {n}")
    walsh = np.sort((d[:, None] + d[None, :])[np.triu_indices(n)] / 2.0)
    c = _signed_rank_quantile(n, (1.0 - level) / 2.0)
    # reject iff W+ <= c or W+ >= M - c, so shifts between the (c+1)-th
    # smallest and (c+1)-th largest Walsh averages survive the test
    k = max(c, 0)
    m = walsh.size
    if 2 * k >= m:
        k = 0
    return float(walsh[k]), float(walsh[m - 1 - k])


# ---------------------------------------------------------------------------
# rank-based ANOVA-type interaction test (2x2 mixed design)


@dataclass(frozen=True)
class FactorScores:
    """One participant's factor score in both conditions, with order group."""

    participant_id: str
    order: str
    rea: float
    ada: float


@dataclass(frozen=True)
class AtsResult:
    p_value: float
    statistic: float
    df: float
    degenerate: bool = False


def _permutation_interaction_p(
    scores: list[FactorScores], draws: int = 10_000, seed: int = 0
) -> float:
    """Permutation test on group labels of per-subject condition differences."""
    diffs = np.array([s.ada - s.rea for s in scores])
    groups = np.array([s.order for s in scores])
    n_a = int((groups == "A").sum())
    obs = abs(diffs[groups == "A"].mean() - diffs[groups == "B"].mean())
    rng = np.random.default_rng(seed)
    hits = 0
    for _ in range(draws):
        perm = rng.permutation(diffs)
        stat = abs(perm[:n_a].mean() - perm[n_a:].mean())
        if stat >= obs - 1e-12:
            hits += 1
    return (hits + 1) / (draws + 1)


def ats_interaction(scores: list[FactorScores]) -> AtsResult:
    """ANOVA-type statistic for the condition x order interaction.

    Scores of both conditions are midranked jointly; the ATS compares the
    interaction contrast of relative cell effects against a Box-type
    chi-square approximation.  Groups with zero rank variance make the
    scaling singular, in which case a label-permutation test on the
    per-subject condition differences supplies the p-value.
    """
    groups = [[s for s in scores if s.order == o] for o in ORDERS]
    if min(len(g) for g in groups) < 4:
        raise StatsError("need at least 4 participants per order group")

    all_vals = np.array([[s.rea, s.ada] for g in groups for s in g])
    if np.ptp(all_vals) == 0.0:
        return AtsResult(p_value=1.0, statistic=0.0, df=1.0, degenerate=True)

    big_n = all_vals.size
    ranks = rankdata(all_vals.ravel()).reshape(all_vals.shape)
    sizes = [len(g) for g in groups]
    offsets = np.cumsum([0] + sizes)

    p_hat = np.empty(4)
    v_blocks = []
    degenerate_group = False
    for k in range(2):
        rk = ranks[offsets[k] : offsets[k + 1]] / big_n  # subjects x conditions
        p_hat[2 * k : 2 * k + 2] = rk.mean(axis=0) - 0.5 / big_n
        cov = np.cov(rk, rowvar=False)
        if np.allclose(cov, 0.0):
            degenerate_group = True
        v_blocks.append(cov / sizes[k])
    if degenerate_group:
        return AtsResult(
            p_value=_permutation_interaction_p(scores),
            statistic=0.0, df=1.0, degenerate=True,
        )
    v_hat = big_n * np.block(
        [[v_blocks[0], np.zeros((2, 2))], [np.zeros((2, 2)), v_blocks[1]]]
    )

    p2 = np.eye(2) - 0.5
    t_mat = np.kron(p2, p2)
    tv = t_mat @ v_hat
    trace_tv = float(np.trace(tv))
    if trace_tv <= 1e-12:
        return AtsResult(
            p_value=_permutation_interaction_p(scores),
            statistic=0.0, df=1.0, degenerate=True,
        )
    f_stat = big_n * float(p_hat @ t_mat @ p_hat) / trace_tv
    df = trace_tv**2 / float(np.trace(tv @ tv))
    p = float(chi2.sf(df * f_stat, df))
    return AtsResult(p_value=p, statistic=f_stat, df=df)


# ---------------------------------------------------------------------------
# hypothesis evaluation and reporting


@dataclass(frozen=True)
class HypothesisDecision:
    hypothesis: str
    factor: str
    rejected: bool
    direction: str  # "REA", "ADA" or "" when accepted or CI straddles zero
    result: TestResult


def evaluate_hypotheses(results: dict[str, TestResult]) -> list[HypothesisDecision]:
    """Decide the quantitative null hypotheses from per-factor test results.

    A null is rejected when the effect reaches at least medium size
    (r >= 0.30).  Differences are ADA minus REA, so a confidence interval
    entirely below zero favours REA and one above zero favours ADA.
    """
    decisions = []
    for hyp, factor in HYPOTHESIS_FACTORS.items():
        if factor not in results:
            raise StatsError(f"missing test result for factor {factor!r}")
        res = results[factor]
        rejected = res.effect_size_r >= 0.30
        direction = ""
        if rejected:
            if res.ci_upper < 0.0:
                direction = "REA"
            elif res.ci_lower > 0.0:
                direction = "ADA"
        decisions.append(
            HypothesisDecision(
                hypothesis=hyp, factor=factor,
                rejected=rejected, direction=direction, result=res,
            )
        )
    return decisions


def analyze_factor(
    scores: dict[tuple[str, str], dict[str, float]], factor: str
) -> TestResult:
    """Signed-rank test of ADA vs REA for one factor, paired by participant."""
    participants = sorted({pid for pid, _ in scores})
    pairs = []
    for pid in participants:
        try:
            rea = scores[(pid, "REA")][factor]
            ada = scores[(pid, "ADA")][factor]
        except KeyError as e:
            raise StatsError(f"participant {pid!r} missing a condition: {e}") from e
        pairs.append((rea, ada))
    return wilcoxon_signed_rank(pairs)


def analyze_all(
    responses: list[QuestionnaireResponse], fmap: FactorMap
) -> tuple[dict[str, TestResult], dict[str, AtsResult]]:
    """Full pipeline: score, test every factor, ATS interaction per factor."""
    scores = score_factors(responses, fmap)
    orders = {r.participant_id: r.order for r in responses}
    tests: dict[str, TestResult] = {}
    interactions: dict[str, AtsResult] = {}
    for factor in fmap.factor_ids():
        tests[factor] = analyze_factor(scores, factor)
        fs = [
            FactorScores(
                participant_id=pid, order=orders[pid],
                rea=scores[(pid, "REA")][factor], ada=scores[(pid, "ADA")][factor],
            )
            for pid in sorted({p for p, _ in scores})
        ]
        interactions[factor] = ats_interaction(fs)
    return tests, interactions


REPORT_COLUMNS = ("factor", "n", "ci_lower", "ci_upper", "p_value", "effect_size_r", "label")


def report_rows(tests: dict[str, TestResult]) -> list[list]:
    rows = []
    for factor, r in tests.items():
        rows.append(
            [factor, r.n, round(r.ci_lower, 4), round(r.ci_upper, 4),
             round(r.p_value, 4), round(r.effect_size_r, 4), r.label]
        )
    return rows


def write_report_csv(tests: dict[str, TestResult], path: str) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(REPORT_COLUMNS)
        w.writerows(report_rows(tests))


def format_report(
    tests: dict[str, TestResult],
    interactions: dict[str, AtsResult] | None = None,
    decisions: list[HypothesisDecision] | None = None,
) -> str:
    lines = [
        f"{'factor':<24} {'n':>3} {'CI low':>8} {'CI high':>8} {'p':>8} {'r':>6}  label"
    ]
    for factor, r in tests.items():
        lines.append(
            f"{factor:<24} {r.n:>3} {r.ci_lower:>8.3f} {r.ci_upper:>8.3f} "
            f"{r.p_value:>8.4f} {r.effect_size_r:>6.3f}  {r.label}"
        )
    if interactions:
        lines.append("")
        lines.append("condition x order interaction (ATS):")
        for factor, a in interactions.items():
            tag = " (degenerate, permutation p)" if a.degenerate else ""
            lines.append(f"  {factor:<22} p = {a.p_value:.4f}{tag}")
    if decisions:
        lines.append("")
        for d in decisions:
            verdict = "reject" if d.rejected else "accept"
            extra = f", effect favours {d.direction}" if d.direction else ""
            lines.append(
                f"{d.hypothesis} [{d.factor}]: {verdict} "
                f"(r = {d.result.effect_size_r:.3f}, {d.result.label}{extra})"
            )
    return "\n".join(lines) + "\n"
