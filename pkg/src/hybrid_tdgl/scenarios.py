"""Named presets for the standard experiments.

Values not fixed by the experiment descriptions (grid resolution of the 2D
runs, the field for the pinning studies, disk/sphere counts and radii) are
choices of this package and are listed in ``PRESET_CHOICES``.
"""

import math

from .config import build_config
from .errors import ConfigError

PI = math.pi
TILT = math.pi / 36

# (section, key) values chosen here rather than taken from an experiment description
PRESET_CHOICES = {
    "fig1": {"grid.nodes": 64, "physics.kappa": 2.0, "init.a": 1e-6},
    "fig3": {"grid.nodes": 64, "field.value": 0.5, "inhomogeneity": "12 disks, r in [0.3, 0.8]"},
    "fig4": {"grid.nodes": 128, "field.value": 0.5, "scheme.t_end": 100.0,
             "inhomogeneity": "48 disks, r in [0.3, 0.8]"},
    "fig5": {"scheme.tau": 0.25, "scheme.S": 4.0, "inhomogeneity": "10 spheres, r in [0.5, 1.0]"},
    "table1": {"grid.nodes": 64, "scheme.S": 4.0},
}


def _fig1(H):
    return {
        "grid": {"dim": 2, "nodes": 64, "lo": -PI, "hi": PI},
        "physics": {"t_ratio": 0.96, "kappa": 2.0},
        "scheme": {"tau": 0.5, "t_end": 100.0},
        "field": {"kind": "constant", "value": (H,)},
        "init": {"psi": 0.08 + 0.06j, "a": (1e-6,)},
    }


def _pinning2d(k, S, nodes, count, seed, inhom):
    d = {
        "grid": {"dim": 2, "nodes": nodes, "lo": -k * PI, "hi": k * PI},
        "physics": {"kappa": 2.0},
        "scheme": {"tau": 0.25, "t_end": 100.0, "S": S},
        "field": {"kind": "constant", "value": (0.5,)},
        "output": {"snapshot_times": (25.0, 50.0, 75.0, 100.0)},
    }
    if inhom:
        d["inhomogeneity"] = {"kind": "random_blobs_2d", "count": count, "radius_min": 0.3,
                              "radius_max": 0.8, "delta_value": 0.3, "seed": seed}
    return d


def _fig5(field, inhom):
    d = {
        "grid": {"dim": 3, "nodes": 20, "lo": -PI, "hi": PI},
        "physics": {"kappa": 2.0},
        "scheme": {"tau": 0.25, "t_end": 400.0, "S": 4.0},
        "field": field,
        "output": {"snapshot_times": (80.0, 240.0, 400.0)},
    }
    if inhom:
        d["inhomogeneity"] = {"kind": "random_spheres", "count": 10, "radius_min": 0.5,
                              "radius_max": 1.0, "delta_value": 0.3, "seed": 5}
    return d


def _table1(k):
    return {
        "grid": {"dim": 2, "nodes": 64, "lo": -k * PI, "hi": k * PI},
        "physics": {"kappa": 2.0},
        "scheme": {"tau": 5e-4, "t_end": 0.064, "S": 4.0 if k == 1 else 2.0},
        "field": {"kind": "decaying", "base": 0.5, "amplitude": 1.0, "rate": 1.0},
    }


_PRESETS = {
    "fig1_H015": lambda: _fig1(0.15),
    "fig1_H030": lambda: _fig1(0.3),
    "fig3_homog": lambda: _pinning2d(1, 4.0, 64, 12, 3, False),
    "fig3_inhomog": lambda: _pinning2d(1, 4.0, 64, 12, 3, True),
    "fig4_homog": lambda: _pinning2d(2, 2.0, 128, 48, 4, False),
    "fig4_inhomog": lambda: _pinning2d(2, 2.0, 128, 48, 4, True),
    "fig5_axis": lambda: _fig5({"kind": "constant", "value": (0.0, 0.0, 0.5)}, False),
    "fig5_tilt": lambda: _fig5({"kind": "tilted", "magnitude": 0.5, "angle": TILT}, False),
    "fig5_tilt_inhomog": lambda: _fig5({"kind": "tilted", "magnitude": 0.5, "angle": TILT}, True),
    "table1_omega1": lambda: _table1(1),
    "table1_omega2": lambda: _table1(2),
}

NAMES = tuple(_PRESETS)


def scenario_values(name):
    try:
        return _PRESETS[name]()
    except KeyError:
        raise ConfigError(f"unknown scenario {name!r}; known: {', '.join(NAMES)}", "scenario") from None


def scenario(name):
    """The validated :class:`RunConfig` of a named preset."""
    return build_config(scenario_values(name))
