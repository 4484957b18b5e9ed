import csv
import io
import json
import os

import numpy as np
import pytest

from pmicopula.simlab import (REJECTION_HEADER, VARIANCE_HEADER, StudyConfig, build_model,
                              rejection_study, run_study, to_csv, variance_long,
                              variance_study)


def test_config_validation():
    with pytest.raises(ValueError, match="degenerate"):
        StudyConfig("gaussian", [0.3], [50], pairs=[("Pi", "Pi")])
    with pytest.raises(ValueError):
        StudyConfig("gaussian", [0.3], [50], repetitions=10)
    with pytest.raises(ValueError):
        StudyConfig("gaussian", [], [50])
    with pytest.raises(ValueError):
        StudyConfig("gaussian", [0.3], [])
    with pytest.raises(ValueError):
        StudyConfig("gaussian", [1.5], [50])
    with pytest.raises(ValueError):
        StudyConfig("student", [0.3], [50])
    with pytest.raises(ValueError):
        StudyConfig("gaussian", [0.3], [50], kinds=["KDE"])
    with pytest.raises(ValueError):
        StudyConfig("gaussian", [0.3], [50], replicates=10)
    cfg = StudyConfig("gaussian", [0.3], [50], pairs=[("Pi", "M_Gamma"), "T3"])
    assert cfg.pairs == ("T1", "T3")


def test_build_model_zero_parameter_is_independence():
    assert build_model("frank", 0.0).family == build_model("independence", 0.0).family
    assert build_model("clayton", 0.0).family == build_model("independence", 0.0).family


def test_size_under_independence():
    cfg = StudyConfig("frank", [0.0], [250], repetitions=200, pairs=["T1"], seed=11)
    (row,) = rejection_study(cfg)
    level = 0.05
    sd = np.sqrt(level * (1 - level) / 200)
    assert abs(row["rate"] - level) <= 3 * sd
    assert row["rejections"] == round(row["rate"] * row["repetitions"])


def test_power_grows_with_negative_dependence():
    cfg = StudyConfig("gaussian", [-0.95, -0.15], [1000], repetitions=40, pairs=["T1"],
                      replicates=300, seed=5)
    strong, weak = rejection_study(cfg)
    assert strong["rate"] > weak["rate"]


def test_pmi_truth_is_conservative():
    cfg = StudyConfig("gaussian", [0.75], [250], repetitions=100, seed=3)
    for row in rejection_study(cfg):
        assert row["rate"] < cfg.level + 3 * row["stderr"] or row["rate"] < cfg.level


def test_variances_positive_and_kinds_agree():
    cfg = StudyConfig("frank", [5.0], [500], repetitions=30, kinds=["EC", "ECC"],
                      replicates=500, seed=1)
    rows = variance_study(cfg)
    med = {}
    for r in rows:
        assert len(r["variance_samples"]) == 30
        assert all(v > 0 for v in r["variance_samples"])
        med[(r["pair"], r["kind"])] = np.median(r["variance_samples"])
    for pair in cfg.pairs:
        ec, ecc = med[(pair, "EC")], med[(pair, "ECC")]
        assert abs(ec - ecc) <= 0.25 * min(ec, ecc)


def test_worker_count_does_not_change_results():
    base = dict(family="gaussian", params=[-0.5, 0.2], ns=[30, 60], repetitions=20,
                replicates=200, seed=9)
    one = rejection_study(StudyConfig(**base, workers=1))
    two = rejection_study(StudyConfig(**base, workers=2))
    assert one == two


def test_csv_roundtrip_and_determinism(tmp_path):
    cfg = StudyConfig("fgm", [0.5], [40], repetitions=20, replicates=200, seed=4)
    out = tmp_path / "rates.csv"
    rows = run_study(cfg, "rejection", str(out))
    first = out.read_bytes()
    run_study(cfg, "rejection", str(out))
    assert out.read_bytes() == first
    parsed = list(csv.DictReader(io.StringIO(first.decode())))
    assert tuple(parsed[0]) == REJECTION_HEADER
    assert len(parsed) == len(rows) == 3
    for p, r in zip(parsed, rows):
        assert float(p["rate"]) == r["rate"]
        assert int(p["rejections"]) / int(p["repetitions"]) == r["rate"]
    assert not os.path.exists(str(out) + ".journal")


def test_variance_long_format(tmp_path):
    cfg = StudyConfig("gaussian", [0.3], [40], repetitions=20, replicates=200, pairs=["T2"])
    out = tmp_path / "var.csv"
    rows = run_study(cfg, "variance", str(out))
    parsed = list(csv.DictReader(out.open()))
    assert tuple(parsed[0]) == VARIANCE_HEADER
    assert [float(p["variance"]) for p in parsed] == rows[0]["variance_samples"]
    assert len(variance_long(rows)) == 20


def test_journal_resume_skips_finished_cells(tmp_path, monkeypatch):
    from pmicopula import simlab
    cfg = StudyConfig("gaussian", [0.1, 0.4], [30], repetitions=20, replicates=200, seed=2)
    journal = str(tmp_path / "j.journal")
    full = rejection_study(cfg, journal)
    with open(journal) as fh:
        recs = [json.loads(line) for line in fh]
    assert len(recs) == 2
    # keep the first cell plus a torn trailing line, as after a crash
    with open(journal, "w") as fh:
        fh.write(json.dumps(recs[0]) + "\n" + '{"study": "rej')
    calls = []
    real = simlab._run_cell
    monkeypatch.setattr(simlab, "_run_cell", lambda job: calls.append(job[1:3]) or real(job))
    assert rejection_study(cfg, journal) == full
    assert calls == [(1, 0)]


def test_journal_ignores_other_configs(tmp_path):
    journal = str(tmp_path / "j.journal")
    a = StudyConfig("gaussian", [0.1], [30], repetitions=20, replicates=200, seed=2)
    b = StudyConfig("gaussian", [0.1], [30], repetitions=20, replicates=200, seed=3)
    rejection_study(a, journal)
    assert rejection_study(b, journal) == rejection_study(b)


def test_to_csv_keeps_full_precision():
    text = to_csv([{"a": 0.1 + 0.2, "b": 3}], ("a", "b"))
    assert text == "a,b\n0.30000000000000004,3\n"
