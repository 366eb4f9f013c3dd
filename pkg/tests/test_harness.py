"""Evaluation harness: datasets, metrics, table regression, report schema,
determinism, sweep ranking and skip logic."""

import math
import random

import pytest

from hecond import harness
from hecond.comparator import ComparatorConfig, OracleBackend, select
from hecond.kernels import heaviside_ref
from hecond.presets import Q435


# ------------------------------------------------------------------ datasets


def test_gen_pairs_contract():
    ds = harness.gen_pairs(50, seed=3)
    assert len(ds.pairs) == 50 and ds.seed == 3 and ds.min_gap is None
    assert all(abs(a) <= 0.12 and abs(b) <= 0.12 for a, b in ds.pairs)
    assert ds == harness.gen_pairs(50, seed=3)
    assert ds != harness.gen_pairs(50, seed=4)


def test_gen_pairs_min_gap():
    ds = harness.gen_pairs(30, seed=5, min_gap=0.05)
    assert all(abs(a - b) >= 0.05 for a, b in ds.pairs)
    with pytest.raises(harness.InfeasibleParamsError):
        harness.gen_pairs(5, seed=0, min_gap=0.25)
    with pytest.raises(ValueError):
        harness.gen_pairs(0, seed=0)


def test_validate_pairs():
    with pytest.raises(ValueError, match="outside"):
        harness.validate_pairs(harness.PairDataset(((0.5, 0.0),)))
    with pytest.raises(ValueError, match="min_gap"):
        harness.validate_pairs(harness.PairDataset(((0.05, 0.05),), min_gap=0.1))


def test_pairs_file_roundtrip(tmp_path):
    ds = harness.gen_pairs(10, seed=6, min_gap=0.02)
    path = tmp_path / "pairs.txt"
    harness.save_pairs(path, ds)
    back = harness.load_pairs(path)
    assert back == ds  # seed and min_gap survive via the header comment


def test_pairs_file_formats(tmp_path):
    path = tmp_path / "pairs.txt"
    path.write_text("# comment\n0.05 -0.03\n\n0.1,0.02 # trailing comment\n")
    ds = harness.load_pairs(path)
    assert ds.pairs == ((0.05, -0.03), (0.1, 0.02))
    path.write_text("0.05 0.03 0.01\n")
    with pytest.raises(ValueError, match="two reals"):
        harness.load_pairs(path)
    path.write_text("# nothing\n")
    with pytest.raises(ValueError, match="no pairs"):
        harness.load_pairs(path)


# ------------------------------------------------------------------- metrics


def test_mae():
    assert harness.mae([1.0, 2.0], [1.5, 1.0]) == 0.75
    assert harness.mae([0.0], [0.0]) == 0.0
    with pytest.raises(ValueError):
        harness.mae([1.0], [1.0, 2.0])
    with pytest.raises(ValueError):
        harness.mae([], [])


def test_simple_error_definition():
    for x in (0.07, -0.12, 0.02):
        for r in (1, 3):
            want = heaviside_ref(x) - select(
                x, 0.0, ComparatorConfig(r), OracleBackend()
            ).weight_first
            assert harness.simple_error(x, r) == want
    assert harness.simple_error(0.0, 4) == 0.0


def test_simple_error_csv():
    text = harness.simple_error_csv((1, 2), n_points=5)
    lines = text.strip().splitlines()
    assert lines[0] == "x,r1,r2"
    assert len(lines) == 6


# ------------------------------------------------------------------- table 1


def test_table1_matches_published_rows():
    report = harness.run_table1(range(1, 9))
    assert [row["r"] for row in report["rows"]] == list(range(1, 9))
    for row in report["rows"]:
        assert abs(row["mae_gt_half"] - row["reference_gt_half"]) <= 0.05
        assert abs(row["mae_gt"] - row["reference_gt"]) <= 0.05


def test_table1_custom_rows():
    report = harness.run_table1([2, 10])
    assert report["rows"][1]["r"] == 10
    assert report["rows"][1]["reference_gt"] is None
    with pytest.raises(ValueError):
        harness.run_table1([])


def test_table1_grid_excludes_tie_point():
    assert 0.0 not in harness.TABLE1_GRID
    assert len(harness.TABLE1_GRID) == 8


# ------------------------------------------------------------- eval reports


def _strip_volatile(d: dict) -> dict:
    d = dict(d)
    d.pop("timestamp")
    d.pop("seconds_per_instance")
    d["instances"] = [
        {k: v for k, v in inst.items() if k != "seconds"} for inst in d["instances"]
    ]
    return d


def test_simulate_eval_deterministic():
    ds = harness.gen_pairs(8, seed=9)
    r1 = harness.run_encrypted_eval("paper-r3", "gt", 2, ds, backend="simulate")
    r2 = harness.run_encrypted_eval("paper-r3", "gt", 2, ds, backend="simulate")
    assert _strip_volatile(r1.to_dict()) == _strip_volatile(r2.to_dict())


def test_eval_report_schema_and_flags():
    ds = harness.gen_pairs(10, seed=10)
    rep = harness.run_encrypted_eval("paper-r3", "gt_half", 3, ds, backend="simulate")
    d = rep.to_dict()
    harness.validate_report(d)
    assert d["kind"] == "eval" and d["backend"] == "simulate"
    # flags must be internally consistent
    failed = sum(
        1 for i in d["instances"] if not (i["budget_ok"] and i["error_ok"])
    )
    assert failed == d["failed_instances"]
    assert d["success"] == (failed == 0)
    assert d["unit_error_instances"] <= d["failed_instances"]
    assert d["fail_threshold"] == pytest.approx(10 * 8 * 7.0**-8)
    # simulate backend cannot measure budgets
    assert all(i["min_budget"] is None for i in d["instances"])


def test_validate_report_rejects_damage():
    ds = harness.gen_pairs(4, seed=11)
    good = harness.run_encrypted_eval(
        "paper-r3", "gt_half", 1, ds, backend="simulate"
    ).to_dict()
    harness.validate_report(good)
    for mutate in (
        lambda d: d.pop("mae_weights"),
        lambda d: d.update(schema_version=99),
        lambda d: d.update(mae_scaled=-1.0),
        lambda d: d.update(failed_instances="zero"),
    ):
        bad = dict(good)
        mutate(bad)
        with pytest.raises(ValueError):
            harness.validate_report(bad)


def test_eval_rejects_unknown_backend():
    ds = harness.gen_pairs(2, seed=1)
    with pytest.raises(ValueError, match="backend"):
        harness.run_encrypted_eval("paper-r3", "gt_half", 1, ds, backend="mock")


def test_toy_encrypted_pipeline_smoke(toy):
    # the documented example: the toy preset runs the full encrypted
    # pipeline at r=1 with weight MAE against the oracle circuit below 0.5
    preset, keys = toy
    ds = harness.gen_pairs(4, seed=12)
    rep = harness.run_encrypted_eval(
        preset, "gt_half", 1, ds, backend="encrypted", keys=keys
    )
    assert rep.mae_weights < 0.5
    assert rep.depth_weight == {"ct_muls": 2, "plain_muls": 1}
    assert rep.depth_scaled["ct_muls"] == 3
    assert rep.n_instances == 4
    for inst in rep.instances:
        assert inst["min_budget"] is not None


def test_gap_binned_errors_shrink_with_gap():
    ds = harness.gen_pairs(80, seed=13)
    rep = harness.run_encrypted_eval("paper-r3", "gt_half", 2, ds, backend="simulate")
    bins = harness.gap_binned_errors(rep, bin_width=0.06)
    assert len(bins) >= 3
    assert bins[0]["mean_error"] > bins[-1]["mean_error"]
    assert sum(b["count"] for b in bins) == 80


def test_reference_attached_only_for_matching_runs():
    ds = harness.gen_pairs(4, seed=14)
    with_ref = harness.run_encrypted_eval("paper-r3", "eq", 3, ds, backend="simulate")
    assert with_ref.reference == {"mae_weights_ideal": 0.52, "mae_scaled_ideal": 0.057}
    without = harness.run_encrypted_eval("paper-r3", "eq", 2, ds, backend="simulate")
    assert without.reference is None


# --------------------------------------------------------------------- sweep


def test_sweep_ranks_production_base_first():
    ds = harness.gen_pairs(12, seed=4)
    grid = {
        "d": [16384], "q": [Q435], "t": [65536],
        "b": [3, 7], "n_i": [8], "n_f": [6, 8],
    }
    out = harness.sweep(grid, dataset=ds)
    labels = [e["preset"] for e in out["ranked"]]
    maes = [e["mae_weights"] for e in out["ranked"]]
    assert maes == sorted(maes)
    # base 3 spreads values over denser digit strings, and this dataset has a
    # near-extreme pair whose convolution growth wraps t; both b7 combos land
    # ahead of both b3 combos here (on gentler datasets b3 can win on
    # truncation alone, so the ranking is tied to the dataset, by design)
    assert all("-b7-" in lab for lab in labels[:2])
    assert all("-b3-" in lab for lab in labels[2:])
    assert any(lab.endswith("b7-ni8-nf8") for lab in labels[:2])
    assert out["skipped"] == []
    harness_fields = {"schema_version", "kind", "ranked", "skipped", "backend"}
    assert harness_fields <= set(out)


def test_sweep_skips_infeasible_digit_budgets():
    ds = harness.gen_pairs(2, seed=1)
    grid = {
        "d": [64], "q": [2**61 - 1], "t": [65536],
        "b": [7], "n_i": [32], "n_f": [6, 33],
    }
    out = harness.sweep(grid, dataset=ds, allow_nonstandard=True)
    assert len(out["skipped"]) == 1
    assert "exceeds degree" in out["skipped"][0]["reason"]
    assert len(out["ranked"]) == 1
    # everything skipped leaves an empty ranking
    grid["n_f"] = [33]
    out = harness.sweep(grid, dataset=ds, allow_nonstandard=True)
    assert out["ranked"] == [] and len(out["skipped"]) == 1


def test_sweep_guards_grid():
    ds = harness.gen_pairs(2, seed=1)
    with pytest.raises(ValueError, match="unknown grid keys"):
        harness.sweep({"base": [7]}, dataset=ds)
    with pytest.raises(ValueError, match="outside the published grid"):
        harness.sweep({"b": [11]}, dataset=ds)


def test_timing_policy_is_documented_not_asserted():
    assert "never asserted" in harness.TIMING_POLICY
    ds = harness.gen_pairs(2, seed=1)
    rep = harness.run_encrypted_eval("paper-r3", "gt_half", 1, ds, backend="simulate")
    assert rep.seconds_per_instance >= 0.0
    assert math.isfinite(rep.seconds_per_instance)
