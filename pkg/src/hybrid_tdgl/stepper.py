"""Stabilized linear IMEX time stepping for the hybrid TDGL system.

Each step solves two linear systems.  The order parameter is advanced with
the nonlinearity frozen at ``|psi^{n-1}|^2`` and the potential at ``A^{n-1}``:

    [(1/tau + S) + K(A^{n-1}) + f(|psi^{n-1}|^2, delta)] psi^n = (1/tau + S) psi^{n-1}

and then the vector potential with the new order parameter:

    [sigma/tau + curl curl + |psi^n|^2] A^n = sigma/tau A^{n-1} - j(psi^n) + curl H^n.

Both are assembled in the weighted (energy) form of :mod:`.operators`; the
psi system is solved with BiCGSTAB on its row-scaled form, the A system with
CG, each with a Jacobi preconditioner.
"""

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse.linalg as spla

from .diagnostics import DiagnosticsRow, energy_parts, energy_source, modulus_stats
from .errors import ConfigError, NumericalBlowup, SolveFailure
from .grid import BoundaryMode, _applied_components
from .operators import Discretization


@dataclass(frozen=True)
class SchemeParams:
    """Time-stepping parameters; ``S=None`` means ``2 L`` from the gap table."""

    tau: float
    S: float | None = None
    sigma: float = 1.0
    kappa: float = 2.0
    n_steps: int = 0
    solver_tol: float = 1e-10
    solver_maxit: int = 5000
    mode: BoundaryMode = BoundaryMode.GAUGE_COUPLED

    def __post_init__(self):
        object.__setattr__(self, "mode", BoundaryMode.parse(self.mode))
        checks = [("tau", self.tau > 0), ("sigma", self.sigma > 0), ("kappa", self.kappa > 0),
                  ("n_steps", self.n_steps >= 0), ("solver_tol", 0 < self.solver_tol < 1),
                  ("solver_maxit", self.solver_maxit >= 1),
                  ("S", self.S is None or self.S >= 0)]
        for key, ok in checks:
            if not ok:
                raise ConfigError(f"invalid value {getattr(self, key)!r}", f"scheme.{key}")

    def stabilizer(self, gap_table):
        return 2.0 * gap_table.lipschitz_L if self.S is None else float(self.S)


def stability_thresholds(gap_table):
    """Stabilizer thresholds quoted by the two stability results."""
    L = gap_table.lipschitz_L
    return {"max_bound_S": 2.0 * L, "energy_proof_S": 1.5 * L}


@dataclass(frozen=True)
class AppliedField:
    """Applied field ``H(t)``: a constant, the decaying profile or a tilted vector."""

    kind: str = "constant"
    value: tuple = (0.0,)
    base: float = 0.5
    amplitude: float = 1.0
    rate: float = 1.0

    @classmethod
    def constant(cls, value):
        return cls("constant", tuple(np.atleast_1d(np.asarray(value, dtype=float)).tolist()))

    @classmethod
    def decaying(cls, base=0.5, amplitude=1.0, rate=1.0):
        """``base + amplitude * exp(-rate t)`` (out-of-plane in 2D)."""
        return cls("decaying", (0.0,), base, amplitude, rate)

    @classmethod
    def tilted(cls, magnitude=0.5, angle=math.pi / 36):
        """Constant 3D field of given magnitude tilted by ``angle`` from the z axis in the y-z plane."""
        return cls.constant((0.0, magnitude * math.sin(angle), magnitude * math.cos(angle)))

    def __post_init__(self):
        if self.kind not in ("constant", "decaying"):
            raise ConfigError(f"unknown field kind {self.kind!r}", "field.kind")
        if len(self.value) not in (1, 3):
            raise ConfigError("field value needs 1 or 3 components", "field.value")

    @property
    def is_constant(self):
        return self.kind == "constant" or self.amplitude == 0.0

    def __call__(self, t):
        if self.kind == "decaying":
            return self.base + self.amplitude * math.exp(-self.rate * t)
        return self.value[0] if len(self.value) == 1 else np.array(self.value)

    def components(self, t, dim):
        return _applied_components(self(t), dim)


@dataclass
class SimState:
    psi: np.ndarray
    a: np.ndarray
    t: float = 0.0
    n: int = 0
    s_prev: np.ndarray = None

    def __post_init__(self):
        self.psi = np.asarray(self.psi, dtype=complex)
        self.a = np.asarray(self.a, dtype=float)
        if self.s_prev is None:
            self.s_prev = np.abs(self.psi) ** 2

    def copy(self):
        return SimState(self.psi.copy(), self.a.copy(), self.t, self.n, self.s_prev.copy())


def initial_state(grid, psi0=0.8 + 0.6j, a0=1e-6):
    """Uniform initial data; ``a0`` is a scalar or one value per component."""
    psi = np.full(grid.shape, complex(psi0)) if np.ndim(psi0) == 0 else np.array(psi0, complex)
    grid.check_scalar(psi, "psi0")
    a0 = np.broadcast_to(np.asarray(a0, dtype=float), (grid.dim,))
    a = np.stack([np.full(grid.shape, v) for v in a0])
    return SimState(psi, a)


class _Counter:
    def __init__(self):
        self.n = 0

    def __call__(self, _):
        self.n += 1


def _solve(method, M, b, x0, tol, maxit, step, what):
    if not np.all(np.isfinite(b)):
        raise NumericalBlowup(f"non-finite right-hand side in the {what} solve", step)
    bnorm = np.linalg.norm(b)
    if bnorm == 0.0:
        return np.zeros_like(b), 0, 0.0
    inv_diag = 1.0 / M.diagonal()
    pre = spla.LinearOperator(M.shape, matvec=lambda v: inv_diag * v.ravel(), dtype=M.dtype)
    count = _Counter()
    x, info = method(M, b, x0=x0, rtol=tol, atol=0.0, maxiter=maxit, M=pre, callback=count)
    res = float(np.linalg.norm(b - M @ x) / bnorm)
    if not np.all(np.isfinite(x)):
        raise NumericalBlowup(f"non-finite solution in the {what} solve", step)
    if info != 0 and res > 10 * tol:
        raise SolveFailure(f"{what} solve did not converge (info={info})", res, step)
    return x, count.n, res


@dataclass
class RunResult:
    state: SimState
    rows: list
    snapshots: list = field(default_factory=list)
    halted: bool = False
    error: Exception | None = None


class Stepper:
    """Holds the grid operators and parameters shared by every step of a run."""

    def __init__(self, grid, gap_table, scheme, applied=None, delta=None):
        self.grid = grid
        self.table = gap_table
        self.scheme = scheme
        self.field = applied if applied is not None else AppliedField.constant(0.0)
        self.disc = Discretization(grid, scheme.kappa, scheme.mode)
        # the A system alone does not need the table
        self.S = scheme.stabilizer(gap_table) if gap_table is not None else float(scheme.S or 0.0)
        if delta is None:
            delta = np.zeros(grid.shape)
        delta = np.broadcast_to(np.asarray(delta, dtype=float), grid.shape)
        self.delta = grid.flat(delta).copy()
        self.w_vec = np.tile(self.disc.w_node, grid.dim)

    # -- the two linear systems --------------------------------------------

    def psi_matrix(self, a_flat, s_prev_flat):
        """Row-scaled psi operator; depends only on ``A^{n-1}`` and ``|psi^{n-1}|^2``."""
        c = 1.0 / self.scheme.tau + self.S
        f = self.table.f(s_prev_flat, self.delta)
        M = self.disc.kinetic_operator(a_flat)
        M.setdiag(M.diagonal() + c + f)
        return M

    def a_matrix(self, psi_flat):
        return self.disc.a_operator(psi_flat, self.scheme.sigma / self.scheme.tau)

    def psi_step(self, state):
        """Return ``(psi^n, iterations, relative residual)`` as flat arrays."""
        g, sc = self.grid, self.scheme
        psi_prev = g.flat(state.psi)
        a_prev = self.disc.flat_vector(state.a)
        M = self.psi_matrix(a_prev, g.flat(state.s_prev))
        b = (1.0 / sc.tau + self.S) * psi_prev
        return _solve(spla.bicgstab, M, b, psi_prev, sc.solver_tol, sc.solver_maxit,
                      state.n + 1, "psi")

    def a_step(self, state, psi_flat, t_new):
        """Return ``(A^n, iterations, relative residual)`` with ``A^n`` flat."""
        sc = self.scheme
        a_prev = self.disc.flat_vector(state.a)
        M = self.a_matrix(psi_flat)
        b = (sc.sigma / sc.tau) * self.w_vec * a_prev - self.disc.current(psi_flat) \
            + self.disc.field_forcing(self.field(t_new))
        return _solve(spla.cg, M, b, a_prev, sc.solver_tol, sc.solver_maxit, state.n + 1, "A")

    # -- bookkeeping -------------------------------------------------------

    def energy(self, state):
        return float(sum(energy_parts(self.disc, self.grid.flat(state.psi),
                                      self.disc.flat_vector(state.a), self.field(state.t),
                                      self.table, self.delta)))

    def row(self, state, energy=None, prev_energy=None, source=0.0, iters=(0, 0), res=(0.0, 0.0)):
        e = self.energy(state) if energy is None else energy
        mx, mean = modulus_stats(state.psi, self.grid)
        viol = 0.0 if prev_energy is None else max(0.0, e - prev_energy - source)
        return DiagnosticsRow(state.n, state.t, e, mx, mean, iters[0], iters[1],
                              res[0], res[1], source, viol)

    def step(self, state, prev_energy=None):
        """Advance one step; returns ``(new_state, DiagnosticsRow)``."""
        g = self.grid
        n_new = state.n + 1
        t_new = n_new * self.scheme.tau
        psi, it_p, res_p = self.psi_step(state)
        a, it_a, res_a = self.a_step(state, psi, t_new)
        if not (np.all(np.isfinite(psi)) and np.all(np.isfinite(a))):
            raise NumericalBlowup("non-finite field after step", n_new)
        new = SimState(g.unflat(psi).copy(), self.disc.unflat_vector(a), t_new, n_new)
        if prev_energy is None:
            prev_energy = self.energy(state)
        source = 0.0
        if not self.field.is_constant:
            source = energy_source(self.disc, self.disc.flat_vector(state.a),
                                   self.field(state.t), self.field(t_new))
        e = self.energy(new)
        if not math.isfinite(e):
            raise NumericalBlowup("non-finite energy", n_new)
        return new, self.row(new, e, prev_energy, source, (it_p, it_a), (res_p, res_a))

    def run(self, state, n_steps=None, snapshot_times=(), progress=None):
        """Advance ``n_steps`` (default ``scheme.n_steps``) recording every step.

        Snapshots are copies of the state at the first step whose time is
        within half a step of each requested time.  A numerical failure stops
        the run and is returned in the result with ``halted=True``.
        """
        n_steps = self.scheme.n_steps if n_steps is None else int(n_steps)
        tau = self.scheme.tau
        pending = sorted(float(t) for t in snapshot_times)
        snaps = []

        def take(s):
            while pending and abs(s.t - pending[0]) <= 0.5 * tau:
                snaps.append(s.copy())
                pending.pop(0)
            while pending and pending[0] < s.t - 0.5 * tau:
                pending.pop(0)

        rows = [self.row(state)]
        take(state)
        cur = state
        for _ in range(n_steps):
            try:
                cur, r = self.step(cur, rows[-1].energy)
            except (NumericalBlowup, SolveFailure) as exc:
                return RunResult(cur, rows, snaps, True, exc)
            rows.append(r)
            take(cur)
            if progress is not None:
                progress(r)
        return RunResult(cur, rows, snaps)


def max_bound(gap_table, delta=0.0):
    """Modulus bound ``max(1, sqrt(x0))`` used when checking the maximum principle."""
    return max(1.0, math.sqrt(gap_table.root(delta)))


def psi_step(state, gap_table, scheme, grid, delta=None):
    """One psi update of ``state`` on ``grid``; returns the new order parameter."""
    psi, _, _ = Stepper(grid, gap_table, scheme, delta=delta).psi_step(state)
    return grid.unflat(psi)


def a_step(state, psi, scheme, grid, applied=None):
    """One A update given the already advanced ``psi``; returns the new potential."""
    st = Stepper(grid, None, scheme, applied)
    a, _, _ = st.a_step(state, grid.flat(psi), (state.n + 1) * scheme.tau)
    return st.disc.unflat_vector(a)
