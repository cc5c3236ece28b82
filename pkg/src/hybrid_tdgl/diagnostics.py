"""Discrete energy, norms, modulus statistics and invariant monitors."""

from dataclasses import dataclass, fields

import numpy as np

from .grid import BoundaryMode, curl, grad
from .operators import Discretization


@dataclass(frozen=True)
class DiagnosticsRow:
    n: int
    t: float
    energy: float
    max_abs_psi: float
    mean_abs_psi: float
    psi_iters: int = 0
    a_iters: int = 0
    psi_residual: float = 0.0
    a_residual: float = 0.0
    source_term: float = 0.0
    energy_violation: float = 0.0

    @classmethod
    def names(cls):
        return [f.name for f in fields(cls)]


def _delta_nodes(delta, grid):
    if delta is None:
        return np.zeros(grid.size)
    delta = np.asarray(delta, dtype=float)
    if delta.ndim == 0:
        return np.full(grid.size, float(delta))
    grid.check_scalar(delta, "delta")
    return grid.flat(delta)


def energy_parts(disc, psi_flat, a_flat, H, gap_table, delta_flat):
    """Kinetic, condensation and magnetic contributions (they sum to E)."""
    kin = 0.5 * disc.kinetic_energy(psi_flat, a_flat)
    pot = 0.5 * float(np.dot(disc.w_node, gap_table.F(np.abs(psi_flat) ** 2, delta_flat)))
    mag = 0.5 * disc.magnetic_energy(a_flat, H)
    return kin, pot, mag


def discrete_energy(psi, a, H, gap_table, kappa, grid, delta=None, mode=BoundaryMode.GAUGE_COUPLED,
                    disc=None):
    """Discrete free energy ``E`` of the state ``(psi, a)`` in the applied field ``H``.

    The kinetic part uses the edge differences of the stepper, the condensation
    part the tabulated ``F`` with trapezoid weights.
    """
    grid.check_scalar(psi, "psi")
    grid.check_vector(a, "A")
    if disc is None:
        disc = Discretization(grid, kappa, mode)
    parts = energy_parts(disc, grid.flat(psi), disc.flat_vector(a), H, gap_table,
                         _delta_nodes(delta, grid))
    return float(sum(parts))


def energy_source(disc, a_prev_flat, H_prev, H_new):
    """Energy change caused by switching the applied field from ``H_prev`` to ``H_new``.

    Equals ``(H_new - H_prev, (H_new + H_prev)/2 - curl A_prev)`` over the cells,
    the discrete counterpart of the field-work term; zero for constant ``H``.
    """
    hn, hp = disc.applied_cells(H_new), disc.applied_cells(H_prev)
    if np.array_equal(hn, hp):
        return 0.0
    return float(disc.w_cell * np.dot(hn - hp, 0.5 * (hn + hp) - disc.cell_curl(a_prev_flat)))


def _wdot(u, grid):
    return float(np.sum(grid.weights * np.abs(u) ** 2))


def l2(field, grid):
    """Trapezoidal L2 norm of a scalar, complex or vector field."""
    field = np.asarray(field)
    if field.shape == grid.shape:
        return np.sqrt(_wdot(field, grid))
    grid.check_vector(field)
    return np.sqrt(sum(_wdot(c, grid) for c in field))


def h1(field, grid):
    g = grad(np.asarray(field), grid)
    return np.sqrt(l2(field, grid) ** 2 + sum(_wdot(c, grid) for c in g))


def hcurl(a, grid):
    c = curl(a, grid)
    return np.sqrt(l2(a, grid) ** 2 + l2(c, grid) ** 2)


def modulus_stats(psi, grid=None):
    """``(max |psi|, mean |psi|)``; the mean is trapezoid weighted when a grid is given."""
    m = np.abs(np.asarray(psi))
    if m.size == 0:
        return 0.0, 0.0
    if grid is None:
        return float(m.max()), float(m.mean())
    w = grid.weights
    return float(m.max()), float(np.sum(w * m) / np.sum(w))


def _column(series, name):
    return np.array([getattr(r, name) for r in series], dtype=float)


def monitor_energy_decay(series, rtol=1e-8):
    """Steps ``n`` where ``E^n > E^{n-1} + source^n + rtol (1 + |E^{n-1}|)``.

    ``series`` is a list of :class:`DiagnosticsRow`; for constant fields the
    recorded source term is zero and this is plain monotonicity.
    """
    if len(series) < 2:
        return []
    e = _column(series, "energy")
    src = _column(series, "source_term")
    n = _column(series, "n").astype(int)
    bad = e[1:] > e[:-1] + src[1:] + rtol * (1.0 + np.abs(e[:-1]))
    return [int(k) for k in n[1:][bad]]


def monitor_max_modulus(series, bound):
    """Steps whose ``max |psi|`` exceeds ``bound``."""
    return [int(r.n) for r in series if r.max_abs_psi > bound]
