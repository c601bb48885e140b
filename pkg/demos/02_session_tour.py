"""Run one frozen (REA) and one adapting (ADA) session side by side.

Uses the packaged arena and the shipped pre-adapted snapshot, drives both
sessions with the same scripted interactor seed, then prints behavior
metrics and the network hashes. The frozen run ends with the hash it
started with; the adapting run does not. Logs land in demos/out/ and can
be replayed with `pisphere replay --in <file>`.

Run:  python3 demos/02_session_tour.py
"""

import pathlib

from pisphere.arena import default_arena
from pisphere.defaults import default_learning, default_snapshot_bytes
from pisphere.experiment import (
    ADA,
    REA,
    ConditionSpec,
    ScriptedInteractor,
    behavior_metrics,
    run_condition,
)
from pisphere.logs import sha256_hex
from pisphere.networks import LearningConfig, snapshot

DURATION_S = 120.0
SEED = 7


def main():
    arena = default_arena()
    snap = default_snapshot_bytes()
    out_dir = pathlib.Path(__file__).parent / "out"
    out_dir.mkdir(exist_ok=True)

    specs = {
        REA: ConditionSpec(REA, snap,
                           LearningConfig(eps_controller=0.0, eps_model=0.0,
                                          adapting=False),
                           duration=DURATION_S),
        ADA: ConditionSpec(ADA, snap, default_learning(), duration=DURATION_S),
    }

    start_hash = sha256_hex(snap)[:12]
    print(f"starting snapshot hash {start_hash}, {DURATION_S:.0f} s per session\n")
    for mode, spec in specs.items():
        log, final = run_condition(spec, arena, ScriptedInteractor(), SEED)
        path = out_dir / f"{mode.lower()}_seed{SEED}.jsonl"
        log.save(str(path))
        m = behavior_metrics(log, arena)
        end_hash = sha256_hex(snapshot(final))[:12]
        print(f"{mode}:  mean speed {m.mean_speed:.3f} m/s  "
              f"coverage {m.coverage:.2f}  turn bias {m.turn_bias:+.2f}  "
              f"edge approaches {m.edge_approaches}")
        print(f"      final network hash {end_hash} "
              f"({'unchanged' if end_hash == start_hash else 'changed'}), "
              f"log -> {path}")
    print("\nreplay either log to confirm the run is a pure function of "
          "its seed and events:")
    print(f"  pisphere replay --in {out_dir}/rea_seed{SEED}.jsonl")


if __name__ == "__main__":
    main()
