"""BCS gap nonlinearity ``f(|psi|^2, delta)``, its potential ``F`` and lookup tables.

    f(s, d) = 1 - nu0/4 * int_0^w  [tanh(b(E+d)) + tanh(b(E-d))] / E  dxi
    F(s, d) = s - nu0/(2b) * int_0^w [lncosh(b(E+d)) + lncosh(b(E-d))] dxi

with ``E = sqrt(xi^2 + s)``, ``b`` the dimensionless inverse temperature and
``w`` the normalized Debye cutoff.  ``F`` is an antiderivative of ``f`` in ``s``.
"""

import enum
import logging
from dataclasses import dataclass, field

import numpy as np

from . import quadrature
from .errors import DomainError, NoRootInBracket, QuadratureFailure

log = logging.getLogger(__name__)

BETA0 = 0.882
OMEGA_TILDE = 29.3
_LN2 = np.log(2.0)


class Nu0Mode(str, enum.Enum):
    GAP_NORMALIZATION = "gap_normalization"
    BCS_ZERO_T = "bcs_zero_t"


def lncosh(x):
    """Overflow-free ``ln cosh x``."""
    ax = np.abs(x)
    return ax + np.log1p(np.exp(-2.0 * ax)) - _LN2


def nu0_from_gap_normalization(beta0=BETA0, omega_tilde=OMEGA_TILDE, quad_tol=1e-12):
    """Coupling ``nu0`` with ``nu0 * int_0^w tanh(beta0 xi)/(2 xi) dxi = 1``."""
    if beta0 <= 0 or omega_tilde <= 0:
        raise DomainError("beta0 and omega_tilde must be positive")

    def integrand(xi):
        out = np.full_like(xi, 0.5 * beta0)
        nz = xi > 0
        out[nz] = np.tanh(beta0 * xi[nz]) / (2.0 * xi[nz])
        return out

    val = quadrature.integrate(integrand, quadrature.graded_breakpoints(omega_tilde), quad_tol)
    if not np.isfinite(val) or val <= 0:
        raise QuadratureFailure(f"normalization integral is {val}")
    return 1.0 / val


def nu0_bcs_zero_temperature(omega_tilde=OMEGA_TILDE):
    """Zero-temperature BCS estimate ``2 / arcsinh(w)``."""
    if omega_tilde <= 0:
        raise DomainError("omega_tilde must be positive")
    return 2.0 / np.log(omega_tilde + np.sqrt(omega_tilde * omega_tilde + 1.0))


def beta_from_reduced_temperature(t_ratio, beta0=BETA0):
    """``beta`` at ``T = t_ratio * T_c``; ``beta`` scales as ``1/T``."""
    if not 0 < t_ratio <= 1:
        raise DomainError(f"t_ratio must lie in (0, 1], got {t_ratio}")
    return beta0 / t_ratio


@dataclass(frozen=True)
class GapParams:
    beta: float
    beta0: float = BETA0
    omega_tilde: float = OMEGA_TILDE
    nu0: float = None
    nu0_mode: Nu0Mode = Nu0Mode.BCS_ZERO_T
    quad_tol: float = 1e-10

    def __post_init__(self):
        object.__setattr__(self, "nu0_mode", Nu0Mode(self.nu0_mode))
        for name in ("beta", "beta0", "omega_tilde", "quad_tol"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be positive")
        if self.nu0 is None:
            if self.nu0_mode is Nu0Mode.GAP_NORMALIZATION:
                nu0 = nu0_from_gap_normalization(self.beta0, self.omega_tilde,
                                                 min(self.quad_tol, 1e-12))
            else:
                nu0 = nu0_bcs_zero_temperature(self.omega_tilde)
            object.__setattr__(self, "nu0", float(nu0))
        elif not self.nu0 > 0:
            raise DomainError("nu0 must be positive")


def _prepare(s, delta):
    s = np.asarray(s, dtype=float)
    if np.any(s < 0):
        raise DomainError("s = |psi|^2 must be non-negative")
    s, delta = np.broadcast_arrays(s, np.abs(np.asarray(delta, dtype=float)))
    return s, delta


def _f_kernel(s, d, beta):
    """Integrand of the f-integral without the nu0/4 factor; shape (batch, nodes)."""
    def kernel(xi):
        e = np.sqrt(xi[None, :] ** 2 + s[:, None])
        num = np.tanh(beta * (e + d[:, None])) + np.tanh(beta * (e - d[:, None]))
        safe = np.where(e > 0, e, 1.0)
        # E -> 0 only at s = 0, xi = 0: limit 2 beta sech^2(beta d)
        lim = 2.0 * beta / np.cosh(beta * d[:, None]) ** 2
        return np.where(e > 0, num / safe, lim)
    return kernel


def eval_f(s, delta, params):
    """Gap nonlinearity by quadrature; broadcasts over ``s`` and ``delta``."""
    s, d = _prepare(s, delta)
    shape = s.shape
    s, d = s.ravel(), d.ravel()
    scale = params.nu0 / 4.0
    kernel = _f_kernel(s, d, params.beta)
    integral = quadrature.integrate(
        kernel, quadrature.graded_breakpoints(params.omega_tilde), params.quad_tol / scale)
    out = (1.0 - scale * integral).reshape(shape)
    return out[()] if out.ndim == 0 else out


def eval_F(s, delta, params):
    """Potential whose ``s``-derivative is :func:`eval_f`."""
    s, d = _prepare(s, delta)
    shape = s.shape
    s, d = s.ravel(), d.ravel()
    beta = params.beta
    scale = params.nu0 / (2.0 * beta)

    def kernel(xi):
        e = np.sqrt(xi[None, :] ** 2 + s[:, None])
        return lncosh(beta * (e + d[:, None])) + lncosh(beta * (e - d[:, None]))

    integral = quadrature.integrate(
        kernel, quadrature.graded_breakpoints(params.omega_tilde), params.quad_tol / scale)
    out = (s - scale * integral).reshape(shape)
    return out[()] if out.ndim == 0 else out


def find_gap_root(params, delta=0.0, tol=1e-12, s_max=2.0):
    """Bisection root of ``s -> f(s, delta)`` on ``[0, s_max]``."""
    if tol <= 0:
        raise DomainError("tol must be positive")
    lo, hi = 0.0, float(s_max)
    flo, fhi = eval_f(lo, delta, params), eval_f(hi, delta, params)
    if not (flo < 0 < fhi):
        raise NoRootInBracket(f"f(0)={flo:.3e}, f({hi})={fhi:.3e} do not bracket a root")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if eval_f(mid, delta, params) < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class GapTable:
    """Tabulated ``f`` and ``F`` on a uniform ``s`` grid times a ``delta`` grid.

    ``f`` is interpolated bilinearly.  The potential lookup integrates that
    interpolant exactly (piecewise quadratic in ``s``, anchored at the
    quadrature value ``F(0, delta)``) so that ``dF/ds == f`` holds for the
    tabulated functions; the discrete energy law of the stepper relies on it.
    Beyond ``s_max`` ``f`` is frozen at the edge value (truncation).
    """

    s_grid: np.ndarray
    delta_grid: np.ndarray
    f_values: np.ndarray  # (n_s, n_delta)
    F_values: np.ndarray  # (n_s, n_delta), quadrature values
    params: GapParams
    lipschitz_L: float
    monotone: np.ndarray = field(repr=False)
    F_cum: np.ndarray = field(repr=False)

    @property
    def ds(self):
        return self.s_grid[1] - self.s_grid[0]

    @property
    def s_max(self):
        return self.s_grid[-1]

    def _s_index(self, s):
        s = np.asarray(s, dtype=float)
        k = np.clip(np.searchsorted(self.s_grid, s, side="right") - 1, 0, len(self.s_grid) - 2)
        t = s - self.s_grid[k]
        return k, t

    def _d_index(self, delta):
        d = np.abs(np.asarray(delta, dtype=float))
        g = self.delta_grid
        if len(g) == 1:
            return np.zeros(d.shape, np.int64), np.zeros(d.shape, np.int64), np.zeros(d.shape)
        j = np.clip(np.searchsorted(g, d, side="right") - 1, 0, len(g) - 2)
        th = np.clip((d - g[j]) / (g[j + 1] - g[j]), 0.0, 1.0)
        return j, j + 1, th

    def _col_f(self, k, t, j):
        f0 = self.f_values[k, j]
        f1 = self.f_values[k + 1, j]
        return f0 + (f1 - f0) * (t / self.ds)

    def _col_F(self, s, k, t, j):
        ds = self.ds
        f0 = self.f_values[k, j]
        f1 = self.f_values[k + 1, j]
        over = s > self.s_max
        t_in = np.where(over, ds, t)
        val = self.F_cum[k, j] + f0 * t_in + (f1 - f0) * t_in * t_in / (2.0 * ds)
        return np.where(over, val + self.f_values[-1, j] * (s - self.s_max), val)

    def f(self, s, delta=0.0):
        s, delta = np.broadcast_arrays(np.asarray(s, float), np.asarray(delta, float))
        k, t = self._s_index(np.minimum(s, self.s_max))
        t = np.where(s > self.s_max, self.ds, t)
        j0, j1, th = self._d_index(delta)
        return (1.0 - th) * self._col_f(k, t, j0) + th * self._col_f(k, t, j1)

    def F(self, s, delta=0.0):
        s, delta = np.broadcast_arrays(np.asarray(s, float), np.asarray(delta, float))
        k, t = self._s_index(np.minimum(s, self.s_max))
        j0, j1, th = self._d_index(delta)
        return (1.0 - th) * self._col_F(s, k, t, j0) + th * self._col_F(s, k, t, j1)

    def root(self, delta=0.0):
        """Exact zero of the interpolated ``f(., delta)`` (first upward crossing)."""
        d = np.abs(float(delta))
        vals = self.f(self.s_grid, np.full_like(self.s_grid, d))
        idx = np.nonzero((vals[:-1] < 0) & (vals[1:] >= 0))[0]
        if len(idx) == 0:
            raise NoRootInBracket(f"table f(., {d}) has no sign change on [0, {self.s_max}]")
        k = idx[0]
        return self.s_grid[k] - vals[k] * self.ds / (vals[k + 1] - vals[k])

    def save(self, path):
        """Write an ``.npz`` dump readable by :meth:`load`."""
        p = self.params
        np.savez(path, s_grid=self.s_grid, delta_grid=self.delta_grid,
                 f_values=self.f_values, F_values=self.F_values,
                 params=np.array([p.beta, p.beta0, p.omega_tilde, p.nu0, p.quad_tol]),
                 nu0_mode=np.array(p.nu0_mode.value), lipschitz_L=np.array(self.lipschitz_L))

    @classmethod
    def load(cls, path):
        with np.load(path) as z:
            beta, beta0, omega, nu0, tol = z["params"]
            params = GapParams(beta=beta, beta0=beta0, omega_tilde=omega, nu0=nu0,
                               nu0_mode=str(z["nu0_mode"]), quad_tol=tol)
            return _assemble(z["s_grid"], z["delta_grid"], z["f_values"], z["F_values"],
                             params, float(z["lipschitz_L"]))


def _assemble(s_grid, delta_grid, f_values, F_values, params, lipschitz_L=None):
    ds = s_grid[1] - s_grid[0]
    slopes = np.diff(f_values, axis=0) / ds
    if lipschitz_L is None:
        # one-sided quotients bound the slope of the piecewise-linear interpolant
        lipschitz_L = 1.1 * float(np.max(np.abs(slopes)))
    monotone = np.all(slopes >= 0, axis=0)
    F_cum = np.empty_like(f_values)
    F_cum[0] = F_values[0]
    F_cum[1:] = F_values[0] + np.cumsum(0.5 * ds * (f_values[1:] + f_values[:-1]), axis=0)
    return GapTable(s_grid, delta_grid, f_values, F_values, params, lipschitz_L, monotone, F_cum)


def build_gap_table(params, s_max=2.0, n_s=512, delta_max=0.0, n_delta=1, delta_values=None):
    """Tabulate ``f`` and ``F`` by quadrature.

    ``delta_values`` overrides the uniform ``delta`` grid; pass the exact
    distinct values of a piecewise-constant inhomogeneity to avoid any
    interpolation in ``delta``.
    """
    if s_max < 1.5:
        raise DomainError("s_max must be at least 1.5")
    if n_s < 64:
        raise DomainError("n_s must be at least 64")
    s_grid = np.linspace(0.0, s_max, n_s)
    if delta_values is not None:
        delta_grid = np.unique(np.abs(np.asarray(delta_values, dtype=float)))
    elif n_delta == 1:
        delta_grid = np.array([abs(delta_max)])
    else:
        delta_grid = np.linspace(0.0, delta_max, n_delta)
    if len(delta_grid) > 1 and np.any(np.diff(delta_grid) <= 0):
        raise DomainError("delta grid must be strictly increasing")

    S, D = np.meshgrid(s_grid, delta_grid, indexing="ij")
    f_values = eval_f(S, D, params)
    F_values = eval_F(S, D, params)
    if not (np.all(np.isfinite(f_values)) and np.all(np.isfinite(F_values))):
        raise QuadratureFailure("non-finite table entries")
    table = _assemble(s_grid, delta_grid, f_values, F_values, params)
    for d, ok in zip(delta_grid, table.monotone):
        if not ok:
            log.info("f(., delta=%g) is not monotone on the table grid", d)
    return table
