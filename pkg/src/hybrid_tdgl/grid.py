"""Uniform node-colocated grids and pointwise finite-difference operators.

Fields are plain numpy arrays on :attr:`Grid.shape` (``indexing='ij'``): the
order parameter is complex with that shape, a vector potential is real with
shape ``(dim, *grid.shape)``.  Flattening for linear algebra or file output
uses Fortran order so that axis 0 runs fastest.
"""

import enum
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import ConfigError, ShapeError


class BoundaryMode(str, enum.Enum):
    HOMOGENEOUS_NEUMANN = "neumann"
    GAUGE_COUPLED = "gauge"

    @classmethod
    def parse(cls, mode):
        try:
            return cls(mode)
        except ValueError:
            raise ConfigError(f"unknown boundary mode {mode!r}") from None


@dataclass(frozen=True)
class Grid:
    lo: tuple
    hi: tuple
    n: tuple

    def __post_init__(self):
        lo, hi, n = (tuple(float(v) for v in self.lo), tuple(float(v) for v in self.hi),
                     tuple(int(v) for v in self.n))
        if not (len(lo) == len(hi) == len(n)) or len(n) not in (2, 3):
            raise ConfigError("grid must be 2D or 3D with matching lo/hi/n")
        if any(k < 3 for k in n) or any(a >= b for a, b in zip(lo, hi)):
            raise ConfigError("need n >= 3 and lo < hi on every axis")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        object.__setattr__(self, "n", n)

    @classmethod
    def cube(cls, dim, half_width, nodes):
        """``(-half_width, half_width)^dim`` with ``nodes`` nodes per axis."""
        return cls((-half_width,) * dim, (half_width,) * dim, (nodes,) * dim)

    @property
    def dim(self):
        return len(self.n)

    @property
    def shape(self):
        return self.n

    @property
    def size(self):
        return int(np.prod(self.n))

    @cached_property
    def h(self):
        return tuple((b - a) / (k - 1) for a, b, k in zip(self.lo, self.hi, self.n))

    @property
    def cell_volume(self):
        return float(np.prod(self.h))

    @property
    def volume(self):
        return float(np.prod([b - a for a, b in zip(self.lo, self.hi)]))

    def axes(self):
        return [np.linspace(a, b, k) for a, b, k in zip(self.lo, self.hi, self.n)]

    def mesh(self):
        return np.meshgrid(*self.axes(), indexing="ij")

    @cached_property
    def weights(self):
        """Trapezoidal quadrature weights (boundary nodes half weight per axis)."""
        w = np.full(self.n, self.cell_volume)
        for ax, k in enumerate(self.n):
            t = np.ones(k)
            t[0] = t[-1] = 0.5
            w = w * t.reshape([-1 if m == ax else 1 for m in range(self.dim)])
        return w

    def flat(self, arr):
        return np.asarray(arr).ravel(order="F")

    def unflat(self, vec):
        return np.asarray(vec).reshape(self.n, order="F")

    def check_scalar(self, arr, name="field"):
        if np.shape(arr) != self.shape:
            raise ShapeError(f"{name} has shape {np.shape(arr)}, grid is {self.shape}")

    def check_vector(self, arr, name="vector field"):
        if np.shape(arr) != (self.dim, *self.shape):
            raise ShapeError(f"{name} has shape {np.shape(arr)}, expected {(self.dim, *self.shape)}")


def grad(field, grid):
    """Centered differences inside, second-order one-sided at the boundary."""
    grid.check_scalar(field)
    parts = np.gradient(field, *grid.h, edge_order=2)
    return np.stack(parts)


def div(a, grid):
    grid.check_vector(a)
    return sum(np.gradient(a[k], grid.h[k], axis=k, edge_order=2) for k in range(grid.dim))


def _d(arr, grid, axis):
    return np.gradient(arr, grid.h[axis], axis=axis, edge_order=2)


def curl(a, grid):
    """Scalar ``d0 A1 - d1 A0`` in 2D, the usual vector curl in 3D."""
    grid.check_vector(a)
    if grid.dim == 2:
        return _d(a[1], grid, 0) - _d(a[0], grid, 1)
    return np.stack([
        _d(a[2], grid, 1) - _d(a[1], grid, 2),
        _d(a[0], grid, 2) - _d(a[2], grid, 0),
        _d(a[1], grid, 0) - _d(a[0], grid, 1),
    ])


def curl_curl(a, grid):
    c = curl(a, grid)
    if grid.dim == 2:
        return np.stack([_d(c, grid, 1), -_d(c, grid, 0)])
    return curl(c, grid)


def supercurrent(psi, kappa, grid):
    """``(1/kappa) Im(psi grad psi*)`` at the nodes."""
    g = grad(psi, grid)
    return np.imag(psi[None] * np.conj(g)) / kappa


def _pad(arr, axis, lo, hi):
    lo = np.expand_dims(lo, axis)
    hi = np.expand_dims(hi, axis)
    return np.concatenate([lo, arr, hi], axis=axis)


def _take(arr, idx, axis):
    return np.take(arr, idx, axis=axis)


def apply_A_bc(a, grid, axis, mode=BoundaryMode.HOMOGENEOUS_NEUMANN, H=None):
    """Vector potential with one ghost layer on both ends of ``axis``.

    Neumann mirrors every component.  The gauge-coupled rule mirrors the
    normal component and sets tangential ghosts so that the centered curl at
    the boundary nodes equals the applied field (``n x curl A = n x H``).
    """
    mode = BoundaryMode.parse(mode)
    grid.check_vector(a)
    out = []
    m, h = axis, grid.h[axis]
    n = grid.n[axis]
    for k in range(grid.dim):
        lo = _take(a[k], 1, m)
        hi = _take(a[k], n - 2, m)
        if mode is BoundaryMode.GAUGE_COUPLED and k != m:
            Hv = _applied_components(H, grid.dim)
            c = 3 - m - k
            eps = _levi_civita(c, m, k)
            # tangential condition: d_m A_k = d_k A_m + eps_{c m k} H_c
            dk_am = _d(a[m], grid, k)
            g = dk_am + eps * Hv[c]
            lo = lo - 2.0 * h * _take(g, 0, m)
            hi = hi + 2.0 * h * _take(g, n - 1, m)
        out.append(_pad(a[k], m, lo, hi))
    return np.stack(out)


def _levi_civita(i, j, k):
    return float(np.sign((j - i) * (k - i) * (k - j)))


def _applied_components(H, dim):
    """Applied field as three Cartesian components (2D fields point along axis 2)."""
    if H is None:
        return np.zeros(3)
    H = np.atleast_1d(np.asarray(H, dtype=float))
    if dim == 2 and H.size == 1:
        return np.array([0.0, 0.0, H[0]])
    return H.reshape(3)


def _edge_factors(a_k, kappa, h):
    """Coefficients multiplying the right (a) and left (b) node of each edge."""
    abar = 0.5 * a_k
    return 1j / (kappa * h) + 0.5 * abar, -1j / (kappa * h) + 0.5 * abar


def apply_psi_bc(psi, a, kappa, grid, axis, mode=BoundaryMode.HOMOGENEOUS_NEUMANN):
    """Order parameter with one ghost layer on both ends of ``axis``.

    Neumann mirrors (``d_n psi = 0``).  The gauge-coupled rule rotates the
    mirrored value by the phase that the boundary edge's averaged normal
    potential implies, realizing ``d_n psi = i kappa (A.n) psi`` to second
    order; with zero normal potential it is the plain mirror.
    """
    mode = BoundaryMode.parse(mode)
    grid.check_scalar(psi, "psi")
    m, n = axis, grid.n[axis]
    lo = _take(psi, 1, m)
    hi = _take(psi, n - 2, m)
    if mode is BoundaryMode.GAUGE_COUPLED:
        am = a[m]
        a_lo, _ = _edge_factors(_take(am, 0, m) + _take(am, 1, m), kappa, grid.h[m])
        a_hi, _ = _edge_factors(_take(am, n - 2, m) + _take(am, n - 1, m), kappa, grid.h[m])
        lo = np.where(a_lo.real == 0, lo, (a_lo / np.conj(a_lo)) ** 2 * lo)
        hi = np.where(a_hi.real == 0, hi, (np.conj(a_hi) / a_hi) ** 2 * hi)
    return _pad(psi, m, lo, hi)


def covariant_laplacian(psi, a, kappa, grid, mode=BoundaryMode.HOMOGENEOUS_NEUMANN):
    """Discrete ``(i/kappa grad + A)^2 psi``.

    Flux form: on every edge the covariant difference
    ``(i/kappa)(psi_+ - psi_-)/h + Abar psi_bar`` (edge averages) is formed and
    its adjoint is applied, which expands to
    ``-lap psi/kappa^2 + (2i/kappa) A.grad psi + (i/kappa) div A psi + |A|^2 psi``
    up to O(h^2).  Boundary rows use the ghost nodes of :func:`apply_psi_bc`.
    """
    mode = BoundaryMode.parse(mode)
    grid.check_scalar(psi, "psi")
    grid.check_vector(a, "A")
    out = np.zeros(grid.shape, dtype=complex)
    for k in range(grid.dim):
        n = grid.n[k]
        pp = apply_psi_bc(psi, a, kappa, grid, k, mode)
        ap = apply_A_bc(a, grid, k)[k]
        edge_a, edge_b = _edge_factors(_take(ap, range(0, n + 1), k) + _take(ap, range(1, n + 2), k),
                                       kappa, grid.h[k])
        a_plus = _take(edge_a, range(1, n + 1), k)
        a_minus = _take(edge_a, range(0, n), k)
        b_minus = _take(edge_b, range(0, n), k)
        out += ((np.abs(a_plus) ** 2 + np.abs(a_minus) ** 2) * psi
                + a_plus ** 2 * _take(pp, range(2, n + 2), k)
                + b_minus ** 2 * _take(pp, range(0, n), k))
    return out
