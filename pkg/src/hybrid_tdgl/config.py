"""Run configuration: strict INI parsing, defaults and construction of run objects.

Example::

    [grid]
    dim = 2
    nodes = 64
    lo = -pi
    hi = pi

    [scheme]
    tau = 0.25
    n_steps = 400

Numbers accept a trailing ``pi`` factor (``-2pi``, ``0.5*pi``).  Lists are
comma separated.  Unknown sections or keys and duplicates are errors.
"""

import configparser
import math
import re
from dataclasses import asdict, dataclass, replace
from dataclasses import field as _field

import numpy as np

from .errors import ConfigError
from .gap import BETA0, OMEGA_TILDE, GapParams, Nu0Mode, beta_from_reduced_temperature, build_gap_table
from .grid import BoundaryMode, Grid
from .inhomogeneity import random_blobs_2d, random_spheres
from .stepper import AppliedField, SchemeParams, SimState, Stepper, initial_state


@dataclass(frozen=True)
class GridSpec:
    dim: int = 2
    nodes: tuple = (64, 64)
    lo: tuple = (-math.pi, -math.pi)
    hi: tuple = (math.pi, math.pi)


@dataclass(frozen=True)
class PhysicsSpec:
    kappa: float = 2.0
    sigma: float = 1.0
    beta: float | None = None
    t_ratio: float = 0.1
    beta0: float = BETA0
    omega_tilde: float = OMEGA_TILDE
    nu0_mode: str = Nu0Mode.BCS_ZERO_T.value
    nu0: float | None = None
    quad_tol: float = 1e-10
    s_max: float = 2.0
    n_s: int = 512


@dataclass(frozen=True)
class SchemeSpec:
    tau: float = 0.25
    n_steps: int = 0
    S: float | None = None  # None: 2 L
    solver_tol: float = 1e-10
    solver_maxit: int = 5000
    bc: str = BoundaryMode.GAUGE_COUPLED.value


@dataclass(frozen=True)
class FieldSpec:
    kind: str = "constant"  # constant | decaying | tilted
    value: tuple = (0.0,)
    base: float = 0.5
    amplitude: float = 1.0
    rate: float = 1.0
    magnitude: float = 0.5
    angle: float = math.pi / 36


@dataclass(frozen=True)
class InitSpec:
    psi: complex = 0.8 + 0.6j
    a: tuple = (1e-6,)
    file: str | None = None


@dataclass(frozen=True)
class InhomogeneitySpec:
    kind: str = "none"  # none | random_spheres | random_blobs_2d
    count: int = 0
    radius_min: float = 0.3
    radius_max: float = 0.8
    delta_value: float = 0.3
    seed: int | None = None


@dataclass(frozen=True)
class OutputSpec:
    dir: str = "out"
    snapshot_times: tuple = ()
    formats: tuple = ("csv", "vtk")


@dataclass(frozen=True)
class RunConfig:
    grid: GridSpec = _field(default_factory=GridSpec)
    physics: PhysicsSpec = _field(default_factory=PhysicsSpec)
    scheme: SchemeSpec = _field(default_factory=SchemeSpec)
    field: FieldSpec = _field(default_factory=FieldSpec)
    init: InitSpec = _field(default_factory=InitSpec)
    inhomogeneity: InhomogeneitySpec = _field(default_factory=InhomogeneitySpec)
    output: OutputSpec = _field(default_factory=OutputSpec)

    def with_changes(self, **sections):
        """Copy with some fields of some sections replaced: ``with_changes(scheme={"tau": 0.1})``."""
        new = {k: replace(getattr(self, k), **v) for k, v in sections.items()}
        return validate(replace(self, **new))


_SPEC_TYPES = {"grid": GridSpec, "physics": PhysicsSpec, "scheme": SchemeSpec, "field": FieldSpec,
               "init": InitSpec, "inhomogeneity": InhomogeneitySpec, "output": OutputSpec}

_PI = re.compile(r"^([+-]?(?:\d+\.?\d*(?:e[+-]?\d+)?|\.\d+)?)\s*\*?\s*pi$", re.IGNORECASE)


def parse_number(text, key):
    t = text.strip()
    m = _PI.match(t)
    try:
        if m:
            coef = m.group(1)
            c = 1.0 if coef in ("", "+") else -1.0 if coef == "-" else float(coef)
            return c * math.pi
        return float(t)
    except ValueError:
        raise ConfigError(f"not a number: {text!r}", key) from None


def _parse_int(text, key):
    try:
        return int(text.strip())
    except ValueError:
        raise ConfigError(f"not an integer: {text!r}", key) from None


def _list(text):
    return [p.strip() for p in text.split(",") if p.strip()]


def _parse_value(section, name, text):
    key = f"{section}.{name}"
    kind = _FIELD_KINDS[section][name]
    if kind == "float":
        return parse_number(text, key)
    if kind == "float?":
        return None if text.strip().lower() in ("auto", "none", "") else parse_number(text, key)
    if kind == "int":
        return _parse_int(text, key)
    if kind == "int?":
        return None if text.strip().lower() in ("none", "") else _parse_int(text, key)
    if kind == "floats":
        return tuple(parse_number(p, key) for p in _list(text))
    if kind == "ints":
        return tuple(_parse_int(p, key) for p in _list(text))
    if kind == "complex":
        try:
            return complex(text.strip().replace(" ", "").replace("i", "j"))
        except ValueError:
            raise ConfigError(f"not a complex number: {text!r}", key) from None
    if kind == "strs":
        return tuple(_list(text))
    if kind == "str?":
        return text.strip() or None
    return text.strip()


_FIELD_KINDS = {
    "grid": {"dim": "int", "nodes": "ints", "lo": "floats", "hi": "floats"},
    "physics": {"kappa": "float", "sigma": "float", "beta": "float?", "t_ratio": "float",
                "beta0": "float", "omega_tilde": "float", "nu0_mode": "str", "nu0": "float?",
                "quad_tol": "float", "s_max": "float", "n_s": "int"},
    "scheme": {"tau": "float", "n_steps": "int", "t_end": "float", "S": "float?",
               "solver_tol": "float", "solver_maxit": "int", "bc": "str"},
    "field": {"kind": "str", "value": "floats", "base": "float", "amplitude": "float",
              "rate": "float", "magnitude": "float", "angle": "float"},
    "init": {"psi": "complex", "a": "floats", "file": "str?"},
    "inhomogeneity": {"kind": "str", "count": "int", "radius_min": "float", "radius_max": "float",
                      "delta_value": "float", "amplitude": "float", "seed": "int?"},
    "output": {"dir": "str", "snapshot_times": "floats", "formats": "strs"},
}


def parse_config(text):
    """Parse and validate configuration text; raises :class:`ConfigError`."""
    cp = configparser.ConfigParser(strict=True, interpolation=None, inline_comment_prefixes=("#", ";"))
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.DuplicateOptionError as exc:
        raise ConfigError("duplicate key", f"{exc.section}.{exc.option}") from None
    except configparser.DuplicateSectionError as exc:
        raise ConfigError("duplicate section", exc.section) from None
    except configparser.Error as exc:
        raise ConfigError(f"malformed configuration: {exc.message}") from None
    values = {}
    for section in cp.sections():
        if section not in _FIELD_KINDS:
            raise ConfigError("unknown section", section)
        vals = {}
        for name, raw in cp.items(section):
            if name not in _FIELD_KINDS[section]:
                raise ConfigError("unknown key", f"{section}.{name}")
            vals[name] = _parse_value(section, name, raw)
        values[section] = vals
    return build_config(values)


def build_config(values):
    """Config from a ``{section: {key: value}}`` mapping of already typed values."""
    values = {k: dict(v) for k, v in values.items()}
    g = values.setdefault("grid", {})
    dim = g.get("dim", 2)
    for k in ("nodes", "lo", "hi"):
        if k in g:
            v = tuple(np.atleast_1d(g[k]).tolist())
            if len(v) == 1:
                v = v * dim
            g[k] = v
    g.setdefault("nodes", (64,) * dim)
    g.setdefault("lo", (-math.pi,) * dim)
    g.setdefault("hi", (math.pi,) * dim)
    sch = values.setdefault("scheme", {})
    if "t_end" in sch:
        t_end = sch.pop("t_end")
        if "n_steps" in sch:
            raise ConfigError("give either n_steps or t_end", "scheme.t_end")
        tau = sch.get("tau", SchemeSpec.tau)
        if tau <= 0:
            raise ConfigError(f"invalid value {tau!r}", "scheme.tau")
        sch["n_steps"] = int(round(t_end / tau))
    inh = values.get("inhomogeneity", {})
    if "amplitude" in inh:
        inh["delta_value"] = inh.pop("amplitude")
    for k, typ in _SPEC_TYPES.items():
        if k == "init" and "a" in values.get(k, {}):
            values[k]["a"] = tuple(values[k]["a"])
        values[k] = typ(**values.get(k, {}))
    return validate(RunConfig(**values))


def _need(ok, key, msg):
    if not ok:
        raise ConfigError(msg, key)


def validate(cfg):
    g, p, s, f, i, h, o = (cfg.grid, cfg.physics, cfg.scheme, cfg.field, cfg.init,
                           cfg.inhomogeneity, cfg.output)
    _need(g.dim in (2, 3), "grid.dim", "must be 2 or 3")
    for k in ("nodes", "lo", "hi"):
        _need(len(getattr(g, k)) == g.dim, f"grid.{k}", f"needs {g.dim} entries")
    _need(all(n >= 3 for n in g.nodes), "grid.nodes", "need at least 3 nodes per axis")
    _need(all(a < b for a, b in zip(g.lo, g.hi)), "grid.lo", "need lo < hi on every axis")
    for k in ("kappa", "sigma", "beta0", "omega_tilde", "quad_tol"):
        _need(getattr(p, k) > 0, f"physics.{k}", f"must be positive, got {getattr(p, k)!r}")
    _need(p.beta is None or p.beta > 0, "physics.beta", "must be positive")
    _need(0 < p.t_ratio <= 1, "physics.t_ratio", "must lie in (0, 1]")
    _need(p.nu0 is None or p.nu0 > 0, "physics.nu0", "must be positive")
    _need(p.nu0_mode in {m.value for m in Nu0Mode}, "physics.nu0_mode",
          f"unknown mode {p.nu0_mode!r}")
    _need(p.s_max >= 1.5, "physics.s_max", "must be >= 1.5")
    _need(p.n_s >= 64, "physics.n_s", "must be >= 64")
    _need(s.tau > 0, "scheme.tau", f"must be positive, got {s.tau!r}")
    _need(s.n_steps >= 0, "scheme.n_steps", "must be >= 0")
    _need(s.S is None or s.S >= 0, "scheme.S", "must be >= 0 or auto")
    _need(0 < s.solver_tol < 1, "scheme.solver_tol", "must lie in (0, 1)")
    _need(s.solver_maxit >= 1, "scheme.solver_maxit", "must be >= 1")
    _need(s.bc in {m.value for m in BoundaryMode}, "scheme.bc", f"unknown mode {s.bc!r}")
    _need(f.kind in ("constant", "decaying", "tilted"), "field.kind", f"unknown kind {f.kind!r}")
    _need(len(f.value) in (1, 3), "field.value", "needs 1 or 3 components")
    _need(f.kind != "tilted" or g.dim == 3, "field.kind", "tilted fields need a 3D grid")
    if f.kind == "constant":
        _need(len(f.value) == (1 if g.dim == 2 else 3), "field.value",
              "2D fields are scalar, 3D fields have 3 components")
    _need(g.dim == 2 or f.kind != "decaying", "field.kind", "decaying field is 2D only")
    _need(len(i.a) in (1, g.dim), "init.a", f"needs 1 or {g.dim} entries")
    _need(abs(i.psi) <= 1e6, "init.psi", "unreasonable magnitude")
    _need(h.kind in ("none", "random_spheres", "random_blobs_2d"), "inhomogeneity.kind",
          f"unknown kind {h.kind!r}")
    if h.kind != "none":
        _need(h.seed is not None, "inhomogeneity.seed", "a seed is required")
        _need(h.count >= 0, "inhomogeneity.count", "must be >= 0")
        _need(0 <= h.radius_min <= h.radius_max, "inhomogeneity.radius_min",
              "need 0 <= radius_min <= radius_max")
        _need((h.kind == "random_spheres") == (g.dim == 3), "inhomogeneity.kind",
              "random_spheres is 3D, random_blobs_2d is 2D")
    _need(all(t >= 0 for t in o.snapshot_times), "output.snapshot_times", "must be >= 0")
    _need(set(o.formats) <= {"csv", "vtk", "snapcsv"}, "output.formats",
          "allowed formats: csv, vtk, snapcsv")
    return cfg


def _fmt(v):
    if isinstance(v, (tuple, list)):
        return ", ".join(_fmt(x) for x in v)
    if isinstance(v, complex):
        return repr(v).strip("()")
    if isinstance(v, float):
        return repr(v)
    return "auto" if v is None else str(v)


def to_text(cfg):
    """INI text that :func:`parse_config` maps back to an equal config."""
    out = []
    for section in _SPEC_TYPES:
        out.append(f"[{section}]")
        for k, v in asdict(getattr(cfg, section)).items():
            if v is None and _FIELD_KINDS[section][k] in ("str?", "int?"):
                continue
            out.append(f"{k} = {_fmt(v)}")
        out.append("")
    return "\n".join(out)


# -- construction of run objects ---------------------------------------------

def make_grid(cfg):
    return Grid(cfg.grid.lo, cfg.grid.hi, cfg.grid.nodes)


def make_params(cfg):
    p = cfg.physics
    beta = p.beta if p.beta is not None else beta_from_reduced_temperature(p.t_ratio, p.beta0)
    return GapParams(beta=beta, beta0=p.beta0, omega_tilde=p.omega_tilde, nu0=p.nu0,
                     nu0_mode=p.nu0_mode, quad_tol=p.quad_tol)


def make_delta(cfg, grid=None):
    grid = make_grid(cfg) if grid is None else grid
    h = cfg.inhomogeneity
    if h.kind == "none":
        return np.zeros(grid.shape)
    gen = random_spheres if h.kind == "random_spheres" else random_blobs_2d
    return gen(grid, h.count, (h.radius_min, h.radius_max), h.delta_value, h.seed)


def make_table(cfg, delta):
    p = cfg.physics
    return build_gap_table(make_params(cfg), s_max=p.s_max, n_s=p.n_s,
                           delta_values=np.unique(np.abs(delta)))


def make_applied(cfg):
    f = cfg.field
    if f.kind == "decaying":
        return AppliedField.decaying(f.base, f.amplitude, f.rate)
    if f.kind == "tilted":
        return AppliedField.tilted(f.magnitude, f.angle)
    return AppliedField.constant(f.value)


def make_scheme(cfg):
    s, p = cfg.scheme, cfg.physics
    return SchemeParams(tau=s.tau, S=s.S, sigma=p.sigma, kappa=p.kappa, n_steps=s.n_steps,
                        solver_tol=s.solver_tol, solver_maxit=s.solver_maxit, mode=s.bc)


def make_initial(cfg, grid):
    i = cfg.init
    if i.file:
        try:
            with np.load(i.file) as z:
                state = SimState(z["psi"], z["a"])
        except OSError as exc:
            raise ConfigError(f"cannot read initial data: {exc}", "init.file") from None
        except KeyError:
            raise ConfigError("initial-data file needs arrays 'psi' and 'a'", "init.file") from None
        grid.check_scalar(state.psi, "init psi")
        grid.check_vector(state.a, "init a")
        return state
    return initial_state(grid, i.psi, i.a)


@dataclass
class Setup:
    config: RunConfig
    grid: Grid
    delta: np.ndarray
    table: object
    stepper: Stepper
    state: SimState


def prepare(cfg):
    """Everything needed to run ``cfg``: grid, delta field, gap table, stepper, initial state."""
    grid = make_grid(cfg)
    delta = make_delta(cfg, grid)
    table = make_table(cfg, delta)
    stepper = Stepper(grid, table, make_scheme(cfg), make_applied(cfg), delta)
    return Setup(cfg, grid, delta, table, stepper, make_initial(cfg, grid))


def run_config(cfg, progress=None):
    """Build and run ``cfg``; returns ``(setup, RunResult)``."""
    setup = prepare(cfg)
    res = setup.stepper.run(setup.state, cfg.scheme.n_steps, cfg.output.snapshot_times, progress)
    return setup, res
