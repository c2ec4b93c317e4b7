import math
import pathlib

import numpy as np
import pytest

from qrmplot.io import read_scan_csv, read_wave_csv, to_grid

DATA = pathlib.Path(__file__).parent / "data"


def test_read_scan_fixture():
    table = read_scan_csv(DATA / "gap_map_sample.csv")
    assert table.metadata["omega"] == 0.5
    lam, g, z = to_grid(table, "gap")
    assert lam.shape == (29,)
    assert g.shape == (33,)
    assert z.shape == (33, 29)
    assert np.isfinite(z).all()
    assert float(z.min()) >= 0.0


def test_missing_column_raises():
    table = read_scan_csv(DATA / "gap_map_sample.csv")
    with pytest.raises(KeyError):
        to_grid(table, "not_a_column")


def test_ragged_grid_rejected(tmp_path):
    source = (DATA / "gap_map_sample.csv").read_text().splitlines()
    clipped = source[:-3]  # drop rows: grid no longer rectangular
    bad = tmp_path / "ragged.csv"
    bad.write_text("\n".join(clipped) + "\n")
    with pytest.raises(ValueError):
        to_grid(read_scan_csv(bad), "gap")


def test_nan_cells_parse():
    table = read_scan_csv(DATA / "gap_map_sample.csv")
    # fixture was generated without node counts: column parses to nan
    assert math.isnan(float(table["n_z"][0]))


def test_read_wave_fixture():
    wave = read_wave_csv(DATA / "wave_sample.csv")
    assert wave.metadata["lambda"] == 0.7
    assert wave.metadata["space"] == "position"
    assert len(wave.x) == len(wave.psi_plus) == len(wave.psi_minus)
    step = wave.x[1] - wave.x[0]
    norm = step * float(np.sum(wave.psi_plus**2 + wave.psi_minus**2))
    assert norm == pytest.approx(1.0, abs=1e-6)


def test_empty_wave_rejected(tmp_path):
    empty = tmp_path / "w.csv"
    empty.write_text("# rabiscan wave export\nx,psi_plus,psi_minus\n")
    with pytest.raises(ValueError):
        read_wave_csv(empty)
