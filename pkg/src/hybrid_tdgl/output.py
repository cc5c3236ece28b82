"""Diagnostics CSV, legacy-VTK / CSV snapshots and the run manifest."""

import csv
import datetime
import json
import os

import numpy as np

from . import __version__
from .config import to_text
from .grid import curl
from .stepper import max_bound, stability_thresholds

CSV_COLUMNS = ("n", "t", "energy", "max_abs_psi", "mean_abs_psi", "psi_iters", "a_iters",
               "energy_violation")


def _io(path, exc):
    return OSError(f"{path}: {exc.strerror or exc}")


def write_diagnostics_csv(rows, path):
    """One line per recorded step; floats in shortest round-trip form."""
    try:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(CSV_COLUMNS)
            for r in rows:
                w.writerow([repr(getattr(r, c)) if isinstance(getattr(r, c), float)
                            else getattr(r, c) for c in CSV_COLUMNS])
    except OSError as exc:
        raise _io(path, exc) from exc


def read_diagnostics_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return {k: np.array([float(r[k]) for r in rows]) for k in CSV_COLUMNS}


def snapshot_arrays(state, grid, delta=None):
    """Named point arrays of a state: scalars ``(N,)`` and vectors ``(N, 3)`` in file order."""
    flat = grid.flat
    out = {"abs_psi": flat(np.abs(state.psi)), "re_psi": flat(state.psi.real),
           "im_psi": flat(state.psi.imag)}
    vec = np.zeros((grid.size, 3))
    for k in range(grid.dim):
        vec[:, k] = flat(state.a[k])
    out["A"] = vec
    c = curl(state.a, grid)
    if grid.dim == 2:
        out["curl_A"] = flat(c)
    else:
        out["curl_A"] = np.stack([flat(c[k]) for k in range(3)], axis=1)
    out["delta"] = flat(np.zeros(grid.shape) if delta is None else delta)
    return out


def write_vtk(state, grid, path, delta=None, title="hybrid TDGL snapshot"):
    """Legacy VTK structured points, binary big-endian doubles."""
    dims = list(grid.n) + [1] * (3 - grid.dim)
    origin = list(grid.lo) + [0.0] * (3 - grid.dim)
    spacing = list(grid.h) + [1.0] * (3 - grid.dim)
    arrays = snapshot_arrays(state, grid, delta)
    header = (f"# vtk DataFile Version 3.0\n{title} t={state.t!r}\nBINARY\n"
              f"DATASET STRUCTURED_POINTS\nDIMENSIONS {dims[0]} {dims[1]} {dims[2]}\n"
              f"ORIGIN {origin[0]!r} {origin[1]!r} {origin[2]!r}\n"
              f"SPACING {spacing[0]!r} {spacing[1]!r} {spacing[2]!r}\n"
              f"POINT_DATA {grid.size}\n")
    try:
        with open(path, "wb") as fh:
            fh.write(header.encode("ascii"))
            for name, arr in arrays.items():
                if arr.ndim == 1:
                    fh.write(f"SCALARS {name} double 1\nLOOKUP_TABLE default\n".encode("ascii"))
                else:
                    fh.write(f"VECTORS {name} double\n".encode("ascii"))
                fh.write(np.ascontiguousarray(arr, dtype=">f8").tobytes())
                fh.write(b"\n")
    except OSError as exc:
        raise _io(path, exc) from exc


def read_vtk(path):
    """Parse a file written by :func:`write_vtk`; returns ``(dims, {name: array})``."""
    with open(path, "rb") as fh:
        buf = fh.read()
    pos, dims, npts, arrays = 0, None, None, {}

    def line():
        nonlocal pos
        end = buf.index(b"\n", pos)
        text = buf[pos:end].decode("ascii")
        pos = end + 1
        return text

    for _ in range(4):
        line()
    while pos < len(buf):
        text = line().split()
        if not text:
            continue
        if text[0] == "DIMENSIONS":
            dims = tuple(int(v) for v in text[1:])
        elif text[0] == "POINT_DATA":
            npts = int(text[1])
        elif text[0] in ("SCALARS", "VECTORS"):
            ncomp = 1 if text[0] == "SCALARS" else 3
            if text[0] == "SCALARS":
                line()  # lookup table
            nbytes = 8 * ncomp * npts
            arr = np.frombuffer(buf[pos:pos + nbytes], dtype=">f8").astype(float)
            arrays[text[1]] = arr if ncomp == 1 else arr.reshape(npts, 3)
            pos += nbytes
    return dims, arrays


def write_snapshot_csv(state, grid, path, delta=None):
    arrays = snapshot_arrays(state, grid, delta)
    coords = [grid.flat(x) for x in grid.mesh()]
    names = ["x", "y", "z"][:grid.dim]
    cols, data = list(names), list(coords)
    for name, arr in arrays.items():
        if arr.ndim == 1:
            cols.append(name)
            data.append(arr)
        else:
            for k, axis in enumerate("xyz"):
                cols.append(f"{name}_{axis}")
                data.append(arr[:, k])
    try:
        np.savetxt(path, np.column_stack(data), delimiter=",", header=",".join(cols), comments="",
                   fmt="%.17g")
    except OSError as exc:
        raise _io(path, exc) from exc


def manifest(setup, result, extra=None):
    table = setup.table
    info = {
        "version": __version__,
        "created": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "config": to_text(setup.config),
        "resolved": {
            "beta": table.params.beta, "nu0": table.params.nu0,
            "nu0_mode": table.params.nu0_mode.value, "lipschitz_L": table.lipschitz_L,
            "S": setup.stepper.S, "x0": float(table.root(0.0)),
            "max_bound": max_bound(table), "thresholds": stability_thresholds(table),
            "delta_values": [float(v) for v in table.delta_grid],
        },
        "steps_completed": result.state.n,
        "halted": result.halted,
        "error": None if result.error is None else repr(result.error),
        "snapshots": [s.t for s in result.snapshots],
    }
    if extra:
        info.update(extra)
    return info


def write_outputs(setup, result, out_dir=None, formats=None):
    """Write diagnostics, snapshots and manifest; returns the list of written paths."""
    spec = setup.config.output
    out_dir = spec.dir if out_dir is None else out_dir
    formats = spec.formats if formats is None else formats
    try:
        os.makedirs(out_dir, exist_ok=True)
    except OSError as exc:
        raise _io(out_dir, exc) from exc
    written = []
    if "csv" in formats:
        p = os.path.join(out_dir, "diagnostics.csv")
        write_diagnostics_csv(result.rows, p)
        written.append(p)
    for snap in result.snapshots:
        stem = os.path.join(out_dir, f"snapshot_{snap.n:06d}")
        if "vtk" in formats:
            write_vtk(snap, setup.grid, stem + ".vtk", setup.delta)
            written.append(stem + ".vtk")
        if "snapcsv" in formats:
            write_snapshot_csv(snap, setup.grid, stem + ".csv", setup.delta)
            written.append(stem + ".csv")
    p = os.path.join(out_dir, "manifest.json")
    try:
        with open(p, "w") as fh:
            json.dump(manifest(setup, result), fh, indent=2)
    except OSError as exc:
        raise _io(p, exc) from exc
    written.append(p)
    return written
