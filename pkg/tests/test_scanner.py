import json
import math

import numpy as np
import pytest

from rabiscan.scanner import (
    AxisSpec,
    PRESETS,
    ScanConfig,
    classify_phase,
    emit,
    preset,
    read_scan_csv,
    read_scan_json,
    scan2d,
)

SMALL = dict(omega=0.5, lam_axis=AxisSpec(-0.6, 0.6, 3), g_axis=AxisSpec(0.5, 3.0, 4), workers=1)


def rows_equal(a, b):
    for x, y in zip(a.row(), b.row()):
        if isinstance(x, str) or isinstance(y, str):
            if str(x) != str(y):
                return False
        elif math.isnan(x) and math.isnan(y):
            continue
        elif x != y:
            return False
    return True


@pytest.fixture(scope="module")
def small_dataset():
    return scan2d(ScanConfig(**SMALL))


def test_grid_complete_and_lambda_major(small_dataset):
    ds = small_dataset
    assert len(ds.records) == 3 * 4
    lams = [r.lam for r in ds.records]
    assert lams == sorted(lams)
    gs = [r.g_over_gs for r in ds.records[:4]]
    assert gs == sorted(gs)
    assert ds.ok
    seen = {(r.lam, r.g_over_gs) for r in ds.records}
    assert len(seen) == 12


def test_parallel_execution_matches_serial(small_dataset):
    parallel = scan2d(ScanConfig(**{**SMALL, "workers": 2}))
    assert all(rows_equal(a, b) for a, b in zip(small_dataset.records, parallel.records))


def test_negative_anisotropy_nodes_mirror_positive(small_dataset):
    ds = small_dataset
    r_neg = ds.record_at(-0.6, 3.0)
    r_pos = ds.record_at(0.6, 3.0)
    assert r_neg.n_z == r_pos.n_z
    assert r_neg.a_norm == pytest.approx(-r_pos.a_norm, abs=1e-6)


def test_csv_roundtrip_identical(tmp_path, small_dataset):
    path = tmp_path / "scan.csv"
    emit(small_dataset, path, "csv")
    back = read_scan_csv(path)
    assert len(back.records) == len(small_dataset.records)
    assert all(rows_equal(a, b) for a, b in zip(small_dataset.records, back.records))


def test_json_roundtrip_and_pointwise_truncation(tmp_path, small_dataset):
    path = tmp_path / "scan.json"
    emit(small_dataset, path, "json")
    back = read_scan_json(path)
    assert all(rows_equal(a, b) for a, b in zip(small_dataset.records, back.records))
    payload = json.loads(path.read_text())
    assert payload["metadata"]["truncation_policy"] == "adaptive"
    assert all(isinstance(r["n_max_used"], int) for r in payload["records"])


def test_emit_deterministic_bytes(tmp_path, small_dataset):
    p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
    emit(small_dataset, p1, "csv")
    emit(scan2d(ScanConfig(**SMALL)), p2, "csv")

    def hash_region(path):
        return [
            line
            for line in path.read_text().splitlines()
            if not line.startswith(("# generated_at", "# wall_time_s"))
        ]

    assert hash_region(p1) == hash_region(p2)


def test_per_point_failures_flagged_not_fatal():
    cfg = ScanConfig(
        omega=0.5,
        lam_axis=AxisSpec(0.0, 0.5, 2),
        g_axis=AxisSpec(1.0, 2.0, 2),
        policy="fixed",
        n_max=3,  # below the adaptive floor and no override: every point refuses
        workers=1,
    )
    ds = scan2d(cfg)
    assert len(ds.records) == 4
    assert all(r.status.startswith("error:") for r in ds.records)
    assert all(math.isnan(r.e0) for r in ds.records)


def test_selection_drops_expensive_columns():
    cfg = ScanConfig(**{**SMALL, "selection": ("energies", "observables")})
    ds = scan2d(cfg)
    assert all(math.isnan(r.n_z) for r in ds.records)
    assert not any(math.isnan(r.e0) for r in ds.records)


def test_zero_coupling_row_marks_normalization_not_applicable(small_dataset):
    cfg = ScanConfig(omega=0.5, lam_axis=AxisSpec(0.3, 0.3, 1), g_axis=AxisSpec(0.0, 1.0, 2), workers=1)
    ds = scan2d(cfg)
    r0 = ds.record_at(0.3, 0.0)
    assert math.isnan(r0.a_norm)
    assert r0.status == "ok"
    assert r0.n_z == 0


def test_classification_examples():
    ds = scan2d(ScanConfig(omega=0.01, lam_axis=AxisSpec(0.5, 0.5, 1), g_axis=AxisSpec(0.5, 0.5, 1), workers=1))
    label = classify_phase(ds.records[0])
    assert (label.regime, label.parity, label.n_z) == ("normal", -1, 0)

    ds = scan2d(ScanConfig(omega=0.5, lam_axis=AxisSpec(0.5, 0.5, 1), g_axis=AxisSpec(3.0, 3.0, 1), workers=1))
    label = classify_phase(ds.records[0])
    assert (label.regime, label.parity, label.n_z) == ("x-type", 1, 1)

    ds_m = scan2d(ScanConfig(omega=0.5, lam_axis=AxisSpec(-0.5, -0.5, 1), g_axis=AxisSpec(3.0, 3.0, 1), workers=1))
    label_m = classify_phase(ds_m.records[0])
    assert label_m.regime == "p-type"
    assert label_m.n_z == label.n_z


def test_preset_registry_and_overrides():
    assert set(PRESETS) == {f"fig1{c}" for c in "abcdef"} | {"fig2", "fig3", "fig4"}
    cfg, note = PRESETS["fig1a"]
    assert cfg.omega == 0.01
    assert cfg.lam_axis.steps == cfg.g_axis.steps == 201
    assert note
    small = preset("fig1e", lambda_steps=11, g_steps=7, workers=1)
    assert small.omega == 0.1
    assert small.lam_axis.steps == 11 and small.g_axis.steps == 7
    with pytest.raises(KeyError):
        preset("fig9")


def test_config_validation():
    with pytest.raises(ValueError):
        ScanConfig(omega=-1.0, lam_axis=AxisSpec(0, 1, 3), g_axis=AxisSpec(0, 1, 3)).validate()
    with pytest.raises(ValueError):
        ScanConfig(omega=0.5, lam_axis=AxisSpec(0, 1, 0), g_axis=AxisSpec(0, 1, 3)).validate()
    with pytest.raises(ValueError):
        ScanConfig(omega=0.5, lam_axis=AxisSpec(1, 0, 5), g_axis=AxisSpec(0, 1, 3)).validate()
    with pytest.raises(ValueError):
        ScanConfig(
            omega=0.5, lam_axis=AxisSpec(0, 1, 3), g_axis=AxisSpec(0, 1, 3), selection=("bogus",)
        ).validate()
