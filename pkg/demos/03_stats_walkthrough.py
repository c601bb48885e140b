"""Score the bundled questionnaire fixture and walk the analysis pipeline.

Reads the packaged responses CSV and factor map, scores the eight factors,
runs the exact Wilcoxon signed-rank test with Hodges-Lehmann intervals per
factor, checks the order-by-condition interaction, and prints the report
plus the three hypothesis decisions. The fixture is synthetic; the point
is to see every stage of the pipeline on realistic-shaped data.

Run:  python3 demos/03_stats_walkthrough.py
"""

from pisphere.defaults import default_factor_map, default_responses_csv_path
from pisphere.stats import (
    analyze_all,
    evaluate_hypotheses,
    factor_map_from_dict,
    format_report,
    read_responses_csv,
    score_factors,
)


def main():
    fmap = factor_map_from_dict(default_factor_map())
    responses = read_responses_csv(str(default_responses_csv_path()))
    print(f"{len(responses)} questionnaire responses, "
          f"{len(fmap.factors)} factors\n")

    scores = score_factors(responses, fmap)
    sample = sorted(scores)[0]
    print(f"example scored cell {sample}:")
    for factor, value in sorted(scores[sample].items()):
        print(f"  {factor:<24s} {value:.2f}")

    tests, interactions = analyze_all(responses, fmap)
    decisions = evaluate_hypotheses(tests)
    print()
    print(format_report(tests, interactions, decisions))


if __name__ == "__main__":
    main()
