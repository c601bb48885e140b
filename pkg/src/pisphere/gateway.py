"""Command-line front end for the simulation, protocol and analysis tools.

Subcommands: preadapt (write the three pre-adaptation snapshots), calibrate
(tune the adaptation rate against the pit constraint and write a config),
run (headless scripted condition producing a session log), replay (verify a
log re-executes bit-identically), stats (questionnaire analysis), tokens
(blind condition tokens for an operator) and serve (the live session
service).
"""

from __future__ import annotations

import argparse
import json
import pathlib
import secrets
import sys

import numpy as np

from . import defaults, experiment, stats
from .arena import load_arena
from .logs import SessionLog, config_hash
from .networks import LearningConfig, snapshot


def _load_config(path: str | None) -> dict:
    if path is None:
        return defaults.default_config()
    with open(path) as f:
        return json.load(f)


def _load_arena(path: str | None):
    return load_arena(path) if path else defaults.default_arena_spec()


def _load_snapshot(path: str | None) -> bytes:
    if path is None:
        return defaults.default_snapshot_bytes()
    with open(path, "rb") as f:
        return f.read()


def cmd_preadapt(args) -> int:
    arena = _load_arena(args.arena)
    cfg = _load_config(args.config)
    sim_cfg = defaults.sim_from_dict(cfg["sim"])
    learning = defaults.learning_from_dict(cfg["preadapt_learning"])
    pairs = experiment.preadapt(
        arena, learning, seed=args.seed, sim_cfg=sim_cfg, duration_s=args.duration_s
    )
    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for i, p in enumerate(pairs):
        (out / f"snapshot_{i}.pinw").write_bytes(snapshot(p))
    print(f"wrote 3 snapshots to {out} (step counts {[p.step_count for p in pairs]})")
    return 0


def cmd_calibrate(args) -> int:
    arena = _load_arena(args.arena)
    cfg = _load_config(args.config)
    sim_cfg = defaults.sim_from_dict(cfg["sim"])
    snap = _load_snapshot(args.snapshot)
    seeds = list(range(args.seed, args.seed + args.seed_count))
    rate = experiment.calibrate_ada_rate(arena, snap, seeds, sim_cfg)
    cfg["learning"]["eps_controller"] = rate
    cfg["learning"]["eps_model"] = rate / 10.0
    cfg["calibration_seeds"] = seeds
    with open(args.out, "w") as f:
        json.dump(cfg, f, indent=2, sort_keys=True)
        f.write("\n")
    print(f"calibrated rate {rate}; wrote {args.out} (hash {config_hash(cfg)[:12]})")
    return 0


def _condition_spec(mode: str, snap: bytes, cfg: dict, duration_s: float):
    if mode == experiment.REA:
        learning = LearningConfig(
            eps_controller=0.0, eps_model=0.0,
            noise_variance=cfg["learning"].get("noise_variance", 0.01),
            adapting=False,
        )
    else:
        learning = defaults.learning_from_dict({**cfg["learning"], "adapting": True})
    return experiment.ConditionSpec(mode, snap, learning, duration=duration_s)


def cmd_run(args) -> int:
    arena = _load_arena(args.arena)
    cfg = _load_config(args.config)
    sim_cfg = defaults.sim_from_dict(cfg["sim"])
    snap = _load_snapshot(args.snapshot)
    mode = args.mode.upper()
    spec = _condition_spec(mode, snap, cfg, args.duration_s)
    log, _ = experiment.run_condition(
        spec, arena, experiment.ScriptedInteractor(), args.seed, sim_cfg
    )
    log.save(args.out)
    print(f"wrote {args.out}: {len(log.rows)} rows, {len(log.events)} events")
    return 0


def cmd_replay(args) -> int:
    log = SessionLog.load(getattr(args, "in"))
    ok, msg = experiment.replay_condition(log)
    print(msg)
    return 0 if ok else 1


def cmd_stats(args) -> int:
    responses = stats.read_responses_csv(getattr(args, "in"))
    fmap = (
        stats.load_factor_map(args.factors)
        if args.factors
        else stats.factor_map_from_dict(defaults.default_factor_map())
    )
    tests, interactions = stats.analyze_all(responses, fmap)
    decisions = None
    if set(stats.HYPOTHESIS_FACTORS.values()) <= set(tests):
        decisions = stats.evaluate_hypotheses(tests)
    if args.out:
        stats.write_report_csv(tests, args.out)
    sys.stdout.write(stats.format_report(tests, interactions, decisions))
    return 0


def cmd_tokens(args) -> int:
    """Blind condition tokens: opaque ids an operator can start sessions with."""
    rng = np.random.default_rng(args.seed) if args.seed is not None else None
    mapping = {}
    for i in range(args.count):
        for cond in (experiment.REA, experiment.ADA):
            if rng is not None:
                tok = "tk" + "".join(f"{b:02x}" for b in rng.integers(0, 256, 8))
            else:
                tok = "tk" + secrets.token_hex(8)
            mapping[tok] = {"condition": cond, "participant": i + 1}
    with open(args.out, "w") as f:
        json.dump(mapping, f, indent=2)
        f.write("\n")
    print(f"wrote {2 * args.count} tokens to {args.out}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .server import ServerSettings, create_app

    settings = ServerSettings(
        arena_path=args.arena,
        snapshot_path=args.snapshot,
        config_path=args.config,
        log_dir=args.log_dir,
        blind=args.blind,
        tokens_path=args.tokens,
        duration_s=args.duration_s,
        speedup=args.speedup,
        static_dir=args.static,
    )
    app = create_app(settings)
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pisphere", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, snapshot_flag=True):
        sp.add_argument("--arena", default=None, help="arena JSON (default: packaged)")
        sp.add_argument("--config", default=None, help="config JSON (default: packaged)")
        if snapshot_flag:
            sp.add_argument("--snapshot", default=None, help="start snapshot (default: packaged)")

    sp = sub.add_parser("preadapt", help="run the three pre-adaptation trials")
    common(sp, snapshot_flag=False)
    sp.add_argument("--seed", type=int, default=1)
    sp.add_argument("--duration-s", type=float, default=experiment.PREADAPT_DURATION_S)
    sp.add_argument("--out", required=True, help="output directory for snapshots")
    sp.set_defaults(func=cmd_preadapt)

    sp = sub.add_parser("calibrate", help="tune the adaptation rate on the pit constraint")
    common(sp)
    sp.add_argument("--seed", type=int, default=0, help="first calibration seed")
    sp.add_argument("--seed-count", type=int, default=30)
    sp.add_argument("--out", required=True, help="output config JSON")
    sp.set_defaults(func=cmd_calibrate)

    sp = sub.add_parser("run", help="headless scripted condition session")
    common(sp)
    sp.add_argument("--mode", choices=["rea", "ada", "REA", "ADA"], required=True)
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--duration-s", type=float, default=experiment.DEFAULT_DURATION_S)
    sp.add_argument("--out", required=True, help="output session log (JSONL)")
    sp.set_defaults(func=cmd_run)

    sp = sub.add_parser("replay", help="re-execute a log and verify bit-identical rows")
    sp.add_argument("--in", required=True, help="session log to verify")
    sp.set_defaults(func=cmd_replay)

    sp = sub.add_parser("stats", help="questionnaire analysis pipeline")
    sp.add_argument("--in", required=True, help="responses CSV")
    sp.add_argument("--factors", default=None, help="factor map JSON (default: packaged)")
    sp.add_argument("--out", default=None, help="optional report CSV")
    sp.set_defaults(func=cmd_stats)

    sp = sub.add_parser("tokens", help="generate blind condition tokens")
    sp.add_argument("--count", type=int, default=16, help="participants")
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_tokens)

    sp = sub.add_parser("serve", help="live session service")
    common(sp)
    sp.add_argument("--host", default="127.0.0.1")
    sp.add_argument("--port", type=int, default=8000)
    sp.add_argument("--blind", action="store_true")
    sp.add_argument("--tokens", default=None, help="token map JSON (for blind mode)")
    sp.add_argument("--log-dir", default="logs")
    sp.add_argument("--duration-s", type=float, default=experiment.DEFAULT_DURATION_S)
    sp.add_argument("--speedup", type=float, default=1.0,
                    help="sim seconds per wall second; 0 runs unthrottled")
    sp.add_argument("--static", default=None, help="directory of UI assets to serve at /")
    sp.set_defaults(func=cmd_serve)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (OSError, ValueError, RuntimeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
