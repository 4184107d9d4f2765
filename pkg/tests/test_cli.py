"""End-to-end CLI: subcommand pipelines, exit codes, rerun determinism."""

import json

import pytest

from causal_scope.cli import EXIT_CONFIG, EXIT_IO, EXIT_OK, main
from causal_scope.report import read_csv, read_json


@pytest.fixture()
def env_config_path(tmp_path):
    path = tmp_path / "env.json"
    path.write_text(
        json.dumps(
            {
                "core_kind": "confounded_mimic",
                "d_a": 1,
                "distractor_level": "none",
                "seed": 9,
            }
        )
    )
    return path


def _probe(tmp_path, env_config_path, mode, out_name, extra=()):
    out = tmp_path / out_name
    code = main(
        [
            "probe",
            "--env-config", str(env_config_path),
            "--n", "20",
            "--horizon", "80",
            "--mode", mode,
            "--seed", "9",
            "--out", str(out),
            *extra,
        ]
    )
    assert code == EXIT_OK
    return out


def test_probe_discover_baseline_report_pipeline(tmp_path, env_config_path):
    base = _probe(tmp_path, env_config_path, "baseline", "base.traj",
                  extra=("--csv", str(tmp_path / "base.csv")))
    inter = _probe(tmp_path, env_config_path, "intervention", "inter.traj")
    assert (tmp_path / "base.csv").exists()
    assert (tmp_path / "base.traj.manifest.json").exists()

    mask_out = tmp_path / "mask.json"
    code = main(
        [
            "discover",
            "--baseline", str(base),
            "--intervention", str(inter),
            "--alpha", "0.05",
            "--horizons", "1,5",
            "--out", str(mask_out),
        ]
    )
    assert code == EXIT_OK
    report = read_json(mask_out)
    assert report["mask"] == [1, 0]
    flat = read_csv(mask_out.with_suffix(".csv"))
    # one row per (dimension, horizon)
    assert len(flat) == 2 * 2
    assert {r["dim"] for r in flat} == {"0", "1"}

    sel_out = tmp_path / "mi.json"
    code = main(
        [
            "baseline",
            "--method", "mi",
            "--trajs", str(base),
            "--budget", "1",
            "--out", str(sel_out),
        ]
    )
    assert code == EXIT_OK
    sel = read_json(sel_out)
    assert sel["method"] == "mi" and sum(sel["mask"]) == 1

    report_dir = tmp_path / "report"
    code = main(
        ["report", "--in", str(tmp_path), "--out", str(report_dir), "--plots"]
    )
    assert code == EXIT_OK
    summary = read_csv(report_dir / "summary.csv")
    assert any(r["command"] == "discover" for r in summary)
    assert (report_dir / "mask.pvalues.svg").exists()
    assert (report_dir / "mi.ranking.svg").exists()


def test_rerun_is_byte_identical(tmp_path, env_config_path):
    out1 = _probe(tmp_path, env_config_path, "baseline", "a.traj")
    out2 = _probe(tmp_path, env_config_path, "baseline", "b.traj")
    assert out1.read_bytes() == out2.read_bytes()
    m1 = read_json(tmp_path / "a.traj.manifest.json")
    m2 = read_json(tmp_path / "b.traj.manifest.json")
    assert m1["outputs"][0]["sha256"] == m2["outputs"][0]["sha256"]
    assert m1["manifest_hash"] == m2["manifest_hash"]


def test_sweep_command_and_figure(tmp_path):
    out_dir = tmp_path / "scout"
    code = main(
        [
            "sweep",
            "--kind", "scout",
            "--seeds", "3",
            "--n", "20",
            "--horizon", "60",
            "--out", str(out_dir),
        ]
    )
    assert code == EXIT_OK
    assert (out_dir / "scout.csv").exists()
    assert (out_dir / "scout.svg").exists()
    manifest = read_json(out_dir / "scout.manifest.json")
    assert manifest["command"] == "sweep"
    assert len(manifest["outputs"]) == 2


def test_missing_input_file_exit_io(tmp_path):
    code = main(
        [
            "probe",
            "--env-config", str(tmp_path / "missing.json"),
            "--out", str(tmp_path / "x.traj"),
        ]
    )
    assert code == EXIT_IO


def test_bad_config_exit_config(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"core_kind": "warp_drive"}))
    code = main(
        ["probe", "--env-config", str(bad), "--out", str(tmp_path / "x.traj")]
    )
    assert code == EXIT_CONFIG


def test_malformed_json_exit_config(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    code = main(
        ["probe", "--env-config", str(bad), "--out", str(tmp_path / "x.traj")]
    )
    assert code == EXIT_CONFIG


def test_report_empty_dir_exit_config(tmp_path):
    empty = tmp_path / "empty"
    empty.mkdir()
    code = main(["report", "--in", str(empty), "--out", str(tmp_path / "out")])
    assert code == EXIT_CONFIG
