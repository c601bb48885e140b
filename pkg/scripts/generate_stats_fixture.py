"""Regenerate the packaged questionnaire fixture.

Writes the item-to-factor mapping for the two instruments and a synthetic
16-participant response table with embedded condition effects, used by the
stats CLI example and the test suite.
"""

import csv
import json
import pathlib
import sys

import numpy as np

DATA = pathlib.Path(__file__).resolve().parent.parent / "src" / "pisphere" / "data"

FACTORS = [
    # (id, instrument, scale hi, item prefix, count, reversed item indices, ADA shift)
    ("Anthropomorphism", "GodSpeed", 5, "gs_anth", 5, (), 0.2),
    ("Animacy", "GodSpeed", 5, "gs_anim", 6, (), 0.1),
    ("Likeability", "GodSpeed", 5, "gs_like", 5, (), 0.3),
    ("Perceived Intelligence", "GodSpeed", 5, "gs_intel", 5, (), -0.8),
    ("Perceived Safety", "GodSpeed", 5, "gs_safe", 3, (3,), 0.0),
    ("Warmth", "RoSAS", 7, "rs_warm", 6, (), 1.0),
    ("Competence", "RoSAS", 7, "rs_comp", 6, (), 0.0),
    ("Discomfort", "RoSAS", 7, "rs_disc", 6, (6,), -1.6),
]


def main() -> int:
    fmap = {
        "factors": [
            {
                "id": fid,
                "instrument": inst,
                "scale": [1, hi],
                "items": [
                    [f"{prefix}{i}", i in rev] for i in range(1, count + 1)
                ],
            }
            for fid, inst, hi, prefix, count, rev, _ in FACTORS
        ]
    }
    with open(DATA / "factors.json", "w") as f:
        json.dump(fmap, f, indent=2)
        f.write("\n")

    rng = np.random.default_rng(20)
    items = [
        (f"{prefix}{i}", hi, i in rev, shift)
        for _, _, hi, prefix, count, rev, shift in FACTORS
        for i in range(1, count + 1)
    ]
    header = ["participant_id", "condition", "order"] + [it[0] for it in items]
    rows = []
    for p in range(16):
        pid = f"P{p + 1:02d}"
        order = "A" if p < 8 else "B"
        base = rng.normal(0.0, 0.4)
        for cond in ("REA", "ADA"):
            row = [pid, cond, order]
            for item, hi, rev, shift in items:
                mid = (1 + hi) / 2.0
                mu = mid + base + (shift if cond == "ADA" else 0.0)
                v = int(np.clip(round(mu + rng.normal(0.0, 0.8)), 1, hi))
                if rev:
                    v = 1 + hi - v
                row.append(v)
            rows.append(row)

    with open(DATA / "responses.csv", "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(header)
        w.writerows(rows)
    print(f"wrote factors.json ({len(FACTORS)} factors) and responses.csv ({len(rows)} rows)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
