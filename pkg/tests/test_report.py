"""Report serialization (canonical JSON/CSV) and figure rendering."""

import numpy as np
import pytest

from causal_scope import EnvConfig
from causal_scope.report import (
    SWEEP_FIGURES,
    read_csv,
    read_json,
    render_partial_figure,
    render_pvalue_figure,
    render_ranking_figure,
    render_scaling_figure,
    render_scout_figure,
    write_csv,
    write_json,
)
from causal_scope.sweeps import parallel_map


def test_json_roundtrip_and_byte_determinism(tmp_path):
    obj = {"b": [1.5, 2.25], "a": {"z": "x", "m": 7}}
    p1, p2 = tmp_path / "a.json", tmp_path / "b.json"
    write_json(obj, p1)
    write_json(obj, p2)
    assert p1.read_bytes() == p2.read_bytes()
    assert read_json(p1) == obj
    # keys are sorted in the byte stream
    text = p1.read_text()
    assert text.index('"a"') < text.index('"b"')
    assert text.endswith("\n")


def test_csv_roundtrip_exact_floats(tmp_path):
    rows = [
        {"x": 0.1 + 0.2, "label": "a", "n": 3},
        {"x": 1e-17, "label": "b", "n": -1},
    ]
    p = tmp_path / "rows.csv"
    write_csv(rows, p)
    back = read_csv(p)
    assert len(back) == 2
    # repr() round-trips floats exactly through the text form.
    assert float(back[0]["x"]) == rows[0]["x"]
    assert float(back[1]["x"]) == rows[1]["x"]
    assert back[0]["label"] == "a"
    assert p.read_text().count("\r") == 0


def test_write_csv_empty_needs_fieldnames(tmp_path):
    with pytest.raises(ValueError):
        write_csv([], tmp_path / "e.csv")
    write_csv([], tmp_path / "e.csv", fieldnames=["a", "b"])
    assert (tmp_path / "e.csv").read_text() == "a,b\n"


def test_parallel_map_preserves_order(monkeypatch):
    items = list(range(20))
    assert parallel_map(lambda x: x * x, items) == [x * x for x in items]
    monkeypatch.setenv("CAUSAL_SCOPE_THREADS", "4")
    assert parallel_map(lambda x: x - 1, items) == [x - 1 for x in items]


SCALING_ROWS = [
    {"level": lvl, "method": m, "seed": s, "return": -100.0 - 10 * i - s % 7}
    for i, lvl in enumerate(["none", "easy"])
    for m in ("full", "ibd", "oracle")
    for s in (0, 1)
]

PARTIAL_ROWS = [
    {"alpha": a, "seed": s, "recall": min(1.0, a * 5), "precision": 1.0}
    for a in (0.0, 0.1, 0.2)
    for s in (0, 1)
]

SCOUT_ROWS = [
    {"env": e, "policy": p, "seed": s, "f1": 0.9 if p == "structured_random" else 0.88}
    for e in ("chain_3", "point_mass_medium")
    for p in ("structured_random", "uniform_random")
    for s in (0, 1)
]


@pytest.mark.parametrize(
    "render,rows",
    [
        (render_scaling_figure, SCALING_ROWS),
        (render_partial_figure, PARTIAL_ROWS),
        (render_scout_figure, SCOUT_ROWS),
    ],
)
def test_sweep_figures_byte_identical(tmp_path, render, rows):
    p1 = tmp_path / "fig1.svg"
    p2 = tmp_path / "fig2.svg"
    render(rows, p1)
    render(rows, p2)
    data = p1.read_bytes()
    assert data == p2.read_bytes()
    assert data.lstrip().startswith(b"<?xml")


def test_sweep_figures_registry():
    assert set(SWEEP_FIGURES) == {"scaling", "partial", "scout"}


def _mask_report():
    return {
        "env_hash": "abc",
        "config": {"alpha": 0.05, "horizons": [1, 5]},
        "mask": [1, 0],
        "per_dim": [
            {
                "index": 0,
                "label_if_known": "causal",
                "p_by_horizon": {"1": 1e-6, "5": 1e-5},
                "adjusted_p_by_horizon": {"1": 4e-6, "5": 2e-5},
                "selected": True,
            },
            {
                "index": 1,
                "label_if_known": "autonomous",
                "p_by_horizon": {"1": 0.4, "5": 0.9},
                "adjusted_p_by_horizon": {"1": 0.8, "5": 1.0},
                "selected": False,
            },
        ],
    }


def test_pvalue_figure(tmp_path):
    p = tmp_path / "p.svg"
    render_pvalue_figure(_mask_report(), p)
    assert p.stat().st_size > 0


def test_ranking_figure(tmp_path):
    report = {
        "method": "mi",
        "budget": 1,
        "scores": [0.5, 0.2, 0.9],
        "ranking": [2, 0, 1],
        "mask": [0, 0, 1],
    }
    p = tmp_path / "r.svg"
    render_ranking_figure(report, p)
    assert p.stat().st_size > 0
