import csv
import io
import json
import math
import random

import pytest

from bipgenus import harness
from bipgenus.harness import (
    ExperimentConfig,
    RunFailed,
    TrialRecord,
    aggregate,
    run_experiment,
    run_trials,
    summarize,
    trials_csv,
)
from bipgenus.theory import gamma_const


def cfg(**kw):
    base = {"experiment_id": "E5_johansson_gap", "n1": 300, "n2": 300, "d": 2.0, "trials": 6, "master_seed": 42}
    base.update(kw)
    return ExperimentConfig.from_dict(base)


@pytest.mark.parametrize("bad", [
    {"n2": None},
    {"lambda": 0.5},
    {"p": 0.01},
    {"trials": 0},
    {"experiment_id": "E9"},
    {"tolerances": {"nonsense": 1.0}},
    {"extra_key": 1},
])
def test_config_validation(bad):
    with pytest.raises((ValueError, TypeError)):
        cfg(**bad)


def test_lambda_and_p_resolution():
    c = ExperimentConfig.from_dict({"experiment_id": "E3_balanced_genus", "n1": 100, "lambda": 0.5,
                                    "p": 0.01, "trials": 1, "master_seed": 1})
    r = c.resolved()
    assert r["n2"] == 200 and r["lambda"] == 0.5
    assert r["d"] == pytest.approx(0.01 * math.sqrt(100 * 200))
    assert r["j_range"] == [2, 3, 4, 5]
    assert r["tolerances"]["max_rel_width"] == 0.5
    assert ExperimentConfig.from_dict(r | {"lambda": None, "d": None}).resolved() == r


def test_summary_single_and_identical():
    s = summarize([3.0])
    assert s.mean == 3.0 and s.ci95_half_width is None and s.sd == 0.0
    s = summarize([2.0, 2.0, 2.0])
    assert s.sd == 0.0 and s.ci95_half_width == 0.0
    s = summarize([1.0, 2.0, 3.0, 4.0])
    assert s.ci95_half_width == pytest.approx(1.96 * s.sd / 2)
    with pytest.raises(ValueError):
        summarize([])


def test_aggregate_is_order_independent():
    c = cfg(trials=8)
    recs = run_trials(c, workers=1)
    shuffled = recs[:]
    random.Random(0).shuffle(shuffled)
    assert aggregate(recs, c).to_json() == aggregate(shuffled, c).to_json()
    with pytest.raises(ValueError):
        aggregate([], c)


def test_reports_are_byte_identical_and_parallel_safe():
    c = cfg(experiment_id="E1_subcritical_planarity", d=0.9, trials=6)
    a = aggregate(run_trials(c, workers=1), c).to_json()
    b = aggregate(run_trials(c, workers=1), c).to_json()
    p = aggregate(run_trials(c, workers=2), c).to_json()
    assert a == b == p


def test_trial_errors_are_recorded_and_bounded(monkeypatch):
    def flaky(cfg_, i):
        if i == 3:
            raise RuntimeError("boom")
        return {"gap_ok": 1, "gap_offenders": 0, "largest_n1": 1}

    monkeypatch.setitem(harness._MEASURE, "E5_johansson_gap", flaky)
    with pytest.raises(RunFailed, match="1 of 10"):
        run_trials(cfg(trials=10), workers=1)
    recs = run_trials(cfg(trials=200), workers=1)
    assert [r.trial_index for r in recs if r.error] == [3]
    rep = aggregate(recs, cfg(trials=200))
    assert rep.trials_failed == 1 and rep.trials_ok == 199


def test_genus_containment_flag_from_records():
    c = ExperimentConfig.from_dict({"experiment_id": "E3_balanced_genus", "n1": 5000, "lambda": 1.0, "d": 2.0,
                                    "trials": 2, "master_seed": 0})
    ref = gamma_const(2.0, 1.0).value * c.p_resolved * 5000 * 5000
    base = {"e": 0, "v": 0, "kappa": 0, "genus_point": 0.0, "face_upper_bound": 0, "j_star": 2}

    def rec(i, lo, up):
        return TrialRecord(i, base | {"genus_lower": lo, "genus_upper": up, "rel_width": (up - lo) / up})

    rep = aggregate([rec(0, 700, 800), rec(1, 700, 800)], c)
    assert rep.theory_reference["gamma_p_n1_n2"]["value"] == pytest.approx(ref)
    assert "tail_bound" in rep.theory_reference["gamma_p_n1_n2"]
    assert rep.pass_flags["containment"] and rep.pass_flags["width"]
    rep = aggregate([rec(0, 0, 700), rec(1, 0, 700)], c)
    assert not rep.pass_flags["containment"] and not rep.pass_flags["width"]


def test_flags_recomputable_from_csv(tmp_path):
    c = cfg(trials=5)
    report, records = run_experiment(c, str(tmp_path), workers=1)
    assert sorted(p.name for p in tmp_path.iterdir()) == ["config.resolved.json", "report.json", "trials.csv"]
    rows = list(csv.DictReader(io.StringIO((tmp_path / "trials.csv").read_text())))
    assert list(rows[0]) == ["trial_index", "gap_offenders", "gap_ok", "largest_n1", "error"]
    rebuilt = [TrialRecord(int(r["trial_index"]), {k: float(v) for k, v in r.items()
                                                   if k not in ("trial_index", "error")}) for r in rows]
    assert aggregate(rebuilt, c).pass_flags == report.pass_flags
    saved = json.loads((tmp_path / "report.json").read_text())
    assert saved["config"] == c.resolved() == json.loads((tmp_path / "config.resolved.json").read_text())
    assert saved["passed"] == report.passed
    assert trials_csv(records[::-1]) == (tmp_path / "trials.csv").read_text()


@pytest.mark.parametrize("eid, extra", [
    ("E2_tree_components", {}),
    ("E4_unbalanced_projection", {"n1": 60, "n2": 6000}),
    ("E6_face_bound", {"p": 0.004, "d": None}),
])
def test_every_experiment_runs(eid, extra):
    c = cfg(experiment_id=eid, trials=3, **extra)
    rep = aggregate(run_trials(c, workers=1), c)
    assert rep.trials_ok == 3 and rep.pass_flags
    json.loads(rep.to_json())
