import csv
import io
import math

import pytest

import wsl_sausage as ws


def test_volume_and_radius():
    value, exact, se = ws.volume({"box": {"side": 2.0}}, 2)
    assert exact and se == 0.0
    assert value == pytest.approx(4.0)
    assert ws.equivalent_radius({"box": {"side": 2.0}}, 2) == pytest.approx(2.0 / math.sqrt(math.pi))


def test_interval_sausage():
    est = ws.sausage_volume([[0.0], [0.5]], {"ball": {"radius": 1.0}}, method="interval")
    assert est["value"] == pytest.approx(2.5)
    assert est["method"] == "interval"


def test_hitting_sausage_two_discs():
    r, c = 1.0, 1.2
    lens = 2 * r * r * math.acos(c / (2 * r)) - 0.5 * c * math.sqrt(4 * r * r - c * c)
    est = ws.sausage_volume([[0.0, 0.0], [c, 0.0]], {"ball": {"radius": r}}, samples=100000, seed=3)
    assert abs(est["value"] - (2 * math.pi - lens)) <= 4 * est["std_error"]


def test_cap_measure():
    assert ws.cap_measure(1.0, 2, math.pi) == pytest.approx(4 * math.pi)
    assert ws.cap_measure(2.0, 1, 0.3) == pytest.approx(0.6)


def test_coupling_curve():
    rows = ws.coupling_failure_curve(0.5, 2.0, 5, 0.1, 2, [10.0, 1e4], replicates=500, seed=2)
    assert [r["R"] for r in rows] == [10.0, 1e4]
    assert rows[0]["failure_prob"] >= rows[1]["failure_prob"]


def test_detection_starts_at_void_probability():
    pts = ws.detection_survival(0.5, 0.5, 1.0, grid_n=3, replicates=4000, seed=4)
    t0, s0, se0 = pts[0]
    assert t0 == 0.0
    assert abs(s0 - math.exp(-0.5 * math.pi * 0.25)) <= 4 * se0
    assert all(b[1] <= a[1] for a, b in zip(pts, pts[1:]))


def test_run_experiment_csv():
    out = ws.run_experiment({"experiment": "discrete", "seed": 5, "replicates": 2000, "workers": 1})
    rows = list(csv.DictReader(io.StringIO(out["csv"])))
    assert rows[0]["schema_version"] == str(ws.CSV_SCHEMA_VERSION)
    assert rows[0]["experiment"] == "discrete"
    assert float(rows[0]["ball_volume"]) == pytest.approx(3.0)
    assert out["invariants_pass"]
    assert "discrete" in ws.experiment_names()


def test_config_error_is_value_error():
    with pytest.raises(ValueError, match="^colour:"):
        ws.run_experiment({"experiment": "volume", "colour": 1})


def test_selftest():
    assert all(c["pass"] for c in ws.selftest(seed=1))
    assert not all(c["pass"] for c in ws.selftest(seed=1, cap_measure_fault=1.1))
