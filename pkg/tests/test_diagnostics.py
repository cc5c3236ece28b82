import math

import numpy as np
import pytest

from hybrid_tdgl.diagnostics import (DiagnosticsRow, discrete_energy, energy_source, h1, hcurl, l2,
                                     modulus_stats, monitor_energy_decay, monitor_max_modulus)
from hybrid_tdgl.grid import Grid
from hybrid_tdgl.operators import Discretization

GRID = Grid.cube(2, np.pi, 33)
AREA = (2 * np.pi) ** 2


def _zeros_a(grid=GRID):
    return np.zeros((grid.dim, *grid.shape))


def test_energy_of_normal_state(cold_table):
    psi = np.zeros(GRID.shape, complex)
    e = discrete_energy(psi, _zeros_a(), 0.0, cold_table, 2.0, GRID)
    assert e == pytest.approx(0.5 * AREA * float(cold_table.F(0.0)), rel=1e-12)


def test_energy_of_uniform_superconducting_state(cold_table):
    x0 = cold_table.root()
    psi = np.full(GRID.shape, math.sqrt(x0) * np.exp(0.7j))
    e = discrete_energy(psi, _zeros_a(), 0.0, cold_table, 2.0, GRID)
    assert e == pytest.approx(0.5 * AREA * float(cold_table.F(x0)), rel=1e-12)
    # the uniform minimiser lies below the normal state
    assert e < discrete_energy(0 * psi, _zeros_a(), 0.0, cold_table, 2.0, GRID)


def test_magnetic_energy_vanishes_for_matching_potential(cold_table):
    x, y = GRID.mesh()
    H = 0.4
    a = np.stack([-0.5 * H * y, 0.5 * H * x])
    psi = np.zeros(GRID.shape, complex)
    e_match = discrete_energy(psi, a, H, cold_table, 2.0, GRID)
    e_zero = discrete_energy(psi, _zeros_a(), H, cold_table, 2.0, GRID)
    e_normal = 0.5 * AREA * float(cold_table.F(0.0))
    assert e_match == pytest.approx(e_normal, rel=1e-12)
    assert e_zero - e_normal == pytest.approx(0.5 * H ** 2 * AREA, rel=1e-10)


def test_energy_is_gauge_invariant_for_constant_shift(cold_table):
    # phase exp(i k c.x) with A -> A - c is an exact discrete symmetry only up to O(h^2)
    x, y = GRID.mesh()
    rng = np.random.default_rng(0)
    psi = 0.5 + 0.1 * rng.normal(size=GRID.shape)
    c = np.array([0.2, -0.1])
    a = np.zeros((2, *GRID.shape))
    e0 = discrete_energy(psi + 0j, a, 0.0, cold_table, 2.0, GRID)
    psi_g = psi * np.exp(2.0j * (c[0] * x + c[1] * y))
    a_g = a - c[:, None, None]
    e1 = discrete_energy(psi_g, a_g, 0.0, cold_table, 2.0, GRID)
    assert abs(e1 - e0) < 1e-3 * abs(e0)


def test_energy_shape_errors(cold_table):
    with pytest.raises(ValueError):
        discrete_energy(np.zeros((3, 3)), _zeros_a(), 0.0, cold_table, 2.0, GRID)


def test_energy_source_formula():
    disc = Discretization(GRID, 2.0)
    a = np.zeros(2 * GRID.size)
    n_cells_area = disc.n_cells * disc.w_cell
    assert energy_source(disc, a, 0.3, 0.3) == 0.0
    src = energy_source(disc, a, 0.5, 0.3)
    assert src == pytest.approx(n_cells_area * (0.3 - 0.5) * 0.4, rel=1e-12)
    # equals the magnetic-energy jump when A is held fixed
    jump = 0.5 * (disc.magnetic_energy(a, 0.3) - disc.magnetic_energy(a, 0.5))
    assert src == pytest.approx(jump, rel=1e-12)


def test_norms():
    x, y = GRID.mesh()
    assert l2(np.ones(GRID.shape), GRID) == pytest.approx(2 * np.pi, rel=1e-14)
    # trapezoid is spectrally accurate for periodic integrands
    assert l2(np.sin(x), GRID) == pytest.approx(np.sqrt(2) * np.pi, rel=1e-12)
    assert l2(np.exp(1j * x), GRID) == pytest.approx(2 * np.pi, rel=1e-14)
    u = np.sin(x) * np.sin(y)
    exact_h1 = np.sqrt(np.pi ** 2 * 3)
    assert h1(u, GRID) == pytest.approx(exact_h1, rel=5e-3)
    a = np.stack([-y / 2, x / 2])
    # |A|^2 integrates to 2 pi^4 / 3 and the curl is 1
    exact = np.sqrt(AREA / 12 * 2 * np.pi ** 2 + AREA)
    assert hcurl(a, GRID) == pytest.approx(exact, rel=5e-3)
    with pytest.raises(ValueError):
        l2(np.zeros((3, 4, 4)), GRID)


def test_modulus_stats():
    psi = np.full(GRID.shape, 0.5 + 0j)
    psi[0, 0] = 2.0
    mx, mean = modulus_stats(psi)
    assert mx == 2.0 and mean == pytest.approx((0.5 * (GRID.size - 1) + 2) / GRID.size)
    _, mean_w = modulus_stats(psi, GRID)
    assert mean_w < mean  # the corner node carries a quarter weight
    assert modulus_stats(np.zeros(0)) == (0.0, 0.0)


def _rows(energies, sources=None, maxes=None):
    sources = sources or [0.0] * len(energies)
    maxes = maxes or [0.5] * len(energies)
    return [DiagnosticsRow(n, 0.1 * n, e, m, m, source_term=s)
            for n, (e, s, m) in enumerate(zip(energies, sources, maxes))]


def test_energy_monitor_flags_constructed_bump():
    assert monitor_energy_decay(_rows([3.0, 2.0, 1.5, 1.4])) == []
    assert monitor_energy_decay(_rows([3.0, 2.0, 2.5, 1.4, 1.41])) == [2, 4]
    # a positive source allows a matching increase
    assert monitor_energy_decay(_rows([1.0, 1.2], [0.0, 0.25])) == []
    # round-off sized increases are tolerated
    assert monitor_energy_decay(_rows([1.0, 1.0 + 1e-12])) == []
    assert monitor_energy_decay(_rows([1.0])) == []


def test_max_modulus_monitor():
    rows = _rows([1, 1, 1], maxes=[0.9, 1.0000001, 0.99])
    assert monitor_max_modulus(rows, 1.0) == [1]
    assert monitor_max_modulus(rows, 1.1) == []


def test_row_field_names():
    assert DiagnosticsRow.names()[:5] == ["n", "t", "energy", "max_abs_psi", "mean_abs_psi"]
