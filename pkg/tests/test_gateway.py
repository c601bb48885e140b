"""CLI subcommands: determinism, replay closure, stats fixture, errors."""

import json

import pytest

from pisphere import defaults
from pisphere.gateway import main
from pisphere.logs import SessionLog


def run_cli(*argv):
    return main(list(argv))


class TestRun:
    def test_twice_byte_identical(self, tmp_path):
        a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        assert run_cli("run", "--mode", "rea", "--seed", "7",
                       "--duration-s", "15", "--out", str(a)) == 0
        assert run_cli("run", "--mode", "rea", "--seed", "7",
                       "--duration-s", "15", "--out", str(b)) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_replay_closure(self, tmp_path):
        for mode in ("rea", "ada"):
            p = tmp_path / f"{mode}.jsonl"
            assert run_cli("run", "--mode", mode, "--seed", "3",
                           "--duration-s", "15", "--out", str(p)) == 0
            assert run_cli("replay", "--in", str(p)) == 0

    def test_modes_differ(self, tmp_path):
        a, b = tmp_path / "rea.jsonl", tmp_path / "ada.jsonl"
        run_cli("run", "--mode", "rea", "--seed", "3", "--duration-s", "15", "--out", str(a))
        run_cli("run", "--mode", "ada", "--seed", "3", "--duration-s", "15", "--out", str(b))
        la, lb = SessionLog.load(str(a)), SessionLog.load(str(b))
        assert la.header["condition"] == "REA" and lb.header["condition"] == "ADA"
        assert la.header["config_hash"] != lb.header["config_hash"]

    def test_missing_snapshot_file_fails(self, tmp_path):
        rc = run_cli("run", "--mode", "rea", "--seed", "1",
                     "--snapshot", str(tmp_path / "nope.pinw"),
                     "--out", str(tmp_path / "x.jsonl"))
        assert rc != 0

    def test_replay_detects_corruption(self, tmp_path):
        p = tmp_path / "log.jsonl"
        run_cli("run", "--mode", "ada", "--seed", "5", "--duration-s", "10", "--out", str(p))
        log = SessionLog.load(str(p))
        log.rows[10]["sensors"][0] += 1e-9
        log.save(str(p))
        assert run_cli("replay", "--in", str(p)) == 1


class TestPreadapt:
    def test_writes_three_snapshots(self, tmp_path):
        out = tmp_path / "snaps"
        assert run_cli("preadapt", "--seed", "2", "--duration-s", "10",
                       "--out", str(out)) == 0
        files = sorted(p.name for p in out.iterdir())
        assert files == ["snapshot_0.pinw", "snapshot_1.pinw", "snapshot_2.pinw"]
        for f in out.iterdir():
            assert f.stat().st_size == 234


class TestStats:
    def test_fixture_reports_all_factors(self, tmp_path, capsys):
        csv_path = str(defaults.default_responses_csv_path())
        report = tmp_path / "report.csv"
        assert run_cli("stats", "--in", csv_path, "--out", str(report)) == 0
        text = capsys.readouterr().out
        for factor in ("Anthropomorphism", "Animacy", "Likeability",
                       "Perceived Intelligence", "Perceived Safety",
                       "Warmth", "Competence", "Discomfort"):
            assert factor in text
        assert "H0(2)" in text and "H0(4)" in text
        assert len(report.read_text().splitlines()) == 9  # header + 8 factors

    def test_bad_csv_fails(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("a,b\n1,2\n")
        assert run_cli("stats", "--in", str(bad)) == 1


class TestTokens:
    def test_seeded_token_map(self, tmp_path):
        out = tmp_path / "tokens.json"
        assert run_cli("tokens", "--count", "4", "--seed", "1", "--out", str(out)) == 0
        mapping = json.loads(out.read_text())
        assert len(mapping) == 8
        conditions = [v["condition"] for v in mapping.values()]
        assert conditions.count("REA") == 4 and conditions.count("ADA") == 4
        # opaque: the token strings themselves never leak the condition
        for tok in mapping:
            assert "REA" not in tok and "ADA" not in tok


class TestCalibrateWiring:
    def test_config_update_shape(self, tmp_path):
        # full calibration is exercised in the acceptance suite; here only
        # the config plumbing, via a pre-written config with the tuned rate
        cfg = defaults.default_config()
        assert cfg["learning"]["eps_controller"] == pytest.approx(10 * cfg["learning"]["eps_model"])
        assert cfg["default_snapshot"] == "snapshot_1.pinw"
