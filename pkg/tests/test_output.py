import json

import numpy as np
import pytest

from hybrid_tdgl.config import parse_config, run_config
from hybrid_tdgl.grid import Grid
from hybrid_tdgl.output import (CSV_COLUMNS, manifest, read_diagnostics_csv, read_vtk,
                                snapshot_arrays, write_outputs, write_snapshot_csv, write_vtk)
from hybrid_tdgl.stepper import SimState

CFG = """
[grid]
nodes = 12
[scheme]
tau = 0.25
n_steps = 4
[field]
value = 0.3
[inhomogeneity]
kind = random_blobs_2d
count = 3
seed = 2
[output]
snapshot_times = 0, 1
formats = csv, vtk, snapcsv
"""


@pytest.fixture(scope="module")
def run():
    return run_config(parse_config(CFG))


def test_vtk_of_uniform_state_is_all_ones(tmp_path):
    g = Grid.cube(2, 1.0, 5)
    st = SimState(np.ones(g.shape, complex), np.zeros((2, *g.shape)))
    p = tmp_path / "one.vtk"
    write_vtk(st, g, p)
    dims, arrays = read_vtk(p)
    assert dims == (5, 5, 1)
    assert np.all(arrays["abs_psi"] == 1.0) and np.all(arrays["re_psi"] == 1.0)
    assert np.all(arrays["im_psi"] == 0.0) and arrays["A"].shape == (25, 3)
    head = p.read_bytes()[:200]
    assert head.startswith(b"# vtk DataFile Version 3.0") and b"BINARY" in head


def test_vtk_round_trip_3d(tmp_path):
    g = Grid((0, 0, 0), (1, 2, 3), (3, 4, 5))
    rng = np.random.default_rng(0)
    st = SimState(rng.normal(size=g.shape) + 1j * rng.normal(size=g.shape),
                  rng.normal(size=(3, *g.shape)))
    p = tmp_path / "s.vtk"
    write_vtk(st, g, p, delta=np.full(g.shape, 0.3))
    dims, arrays = read_vtk(p)
    ref = snapshot_arrays(st, g, np.full(g.shape, 0.3))
    assert dims == (3, 4, 5)
    for k, v in ref.items():
        assert np.array_equal(arrays[k], v), k


def test_diagnostics_csv_rows(run, tmp_path):
    setup, res = run
    written = write_outputs(setup, res, tmp_path)
    csv_path = tmp_path / "diagnostics.csv"
    lines = csv_path.read_text().splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert len(lines) == setup.config.scheme.n_steps + 2  # header + t=0 + one per step
    data = read_diagnostics_csv(csv_path)
    assert data["energy"][0] == res.rows[0].energy
    assert sorted(p.name for p in tmp_path.iterdir()) == sorted(
        ["diagnostics.csv", "manifest.json", "snapshot_000000.vtk", "snapshot_000000.csv",
         "snapshot_000004.vtk", "snapshot_000004.csv"])
    assert len(written) == 6


def test_snapshot_csv_columns(tmp_path):
    g = Grid.cube(2, 1.0, 4)
    st = SimState(np.full(g.shape, 0.5j), np.zeros((2, *g.shape)))
    p = tmp_path / "s.csv"
    write_snapshot_csv(st, g, p)
    header = p.read_text().splitlines()[0].split(",")
    assert header[:5] == ["x", "y", "abs_psi", "re_psi", "im_psi"]
    data = np.loadtxt(p, delimiter=",", skiprows=1)
    assert data.shape == (16, len(header))
    np.testing.assert_array_equal(data[:, 4], 0.5)


def test_manifest_rerun_is_bitwise(run, tmp_path):
    setup, res = run
    write_outputs(setup, res, tmp_path / "a")
    info = json.loads((tmp_path / "a" / "manifest.json").read_text())
    assert info["resolved"]["S"] == setup.stepper.S
    assert info["steps_completed"] == 4 and not info["halted"]
    setup2, res2 = run_config(parse_config(info["config"]))
    write_outputs(setup2, res2, tmp_path / "b")
    for name in ("diagnostics.csv", "snapshot_000004.vtk", "snapshot_000004.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_manifest_contents(run):
    setup, res = run
    info = manifest(setup, res)
    r = info["resolved"]
    assert r["x0"] == pytest.approx(setup.table.root())
    assert r["thresholds"]["max_bound_S"] == 2 * r["lipschitz_L"]
    assert r["delta_values"] == [0.0, 0.3]


def test_io_errors_carry_path(run, tmp_path):
    setup, res = run
    target = tmp_path / "file"
    target.write_text("x")
    with pytest.raises(OSError) as exc:
        write_outputs(setup, res, target / "sub")
    assert str(target) in str(exc.value)
