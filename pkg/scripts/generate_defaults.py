"""Regenerate the packaged default data files.

Produces the default arena description, the three pre-adaptation snapshots
(seed 1), and the default config carrying the calibrated adaptation rate.
Run from the repo root:  python3 scripts/generate_defaults.py [--calibrate]
"""

import argparse
import json
import pathlib
import sys

from pisphere import experiment as E
from pisphere.arena import default_arena, save_arena
from pisphere.logs import config_hash
from pisphere.networks import snapshot
from pisphere.simulator import SimConfig

DATA = pathlib.Path(__file__).resolve().parent.parent / "src" / "pisphere" / "data"
PREADAPT_SEED = 1
CALIBRATION_SEEDS = list(range(30))


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--calibrate", action="store_true", help="rerun rate calibration (slow)")
    args = ap.parse_args()

    DATA.mkdir(parents=True, exist_ok=True)
    arena = default_arena()
    save_arena(arena, DATA / "arena.json")

    cfg = SimConfig()
    pairs = E.preadapt(arena, E.PREADAPT_LEARNING, seed=PREADAPT_SEED, sim_cfg=cfg)
    for i, p in enumerate(pairs):
        (DATA / f"snapshot_{i}.pinw").write_bytes(snapshot(p))
    print("wrote 3 snapshots, step counts:", [p.step_count for p in pairs])

    if args.calibrate:
        rate = E.calibrate_ada_rate(
            arena, snapshot(pairs[1]), CALIBRATION_SEEDS, cfg, E.PREADAPT_LEARNING
        )
        print("calibrated rate:", rate)
    else:
        rate = 3.2  # last calibration result; rerun with --calibrate to refresh

    config = {
        "sim": {k: v for k, v in vars(cfg).items()},
        "learning": {
            "eps_controller": rate,
            "eps_model": rate / 10.0,
            "noise_variance": 0.01,
            "weight_clip": 5.0,
            "gradient_clip": 1.0,
            "adapting": True,
        },
        "preadapt_learning": {k: v for k, v in vars(E.PREADAPT_LEARNING).items()},
        "default_snapshot": "snapshot_1.pinw",
        "preadapt_seed": PREADAPT_SEED,
        "calibration_seeds": CALIBRATION_SEEDS,
    }
    with open(DATA / "config.json", "w") as f:
        json.dump(config, f, indent=2, sort_keys=True)
        f.write("\n")
    print("config hash:", config_hash(config))
    return 0


if __name__ == "__main__":
    sys.exit(main())
