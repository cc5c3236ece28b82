"""Seeded random inhomogeneity fields (unions of disks or spheres).

Randomness comes from numpy's PCG64 bit generator seeded with the given
integer, so a seed fixes the field bitwise on every platform numpy supports.
Centers are drawn first (``count x dim`` uniforms over the box), then radii.
"""

import numpy as np

from .errors import ConfigError


def _rng(seed):
    if seed is None:
        raise ConfigError("a seed is required for random inhomogeneities", "inhomogeneity.seed")
    return np.random.Generator(np.random.PCG64(int(seed)))


def random_balls(grid, count, radius_range, delta_value, seed):
    """``delta_value`` inside the union of ``count`` random balls, 0 outside."""
    if count < 0:
        raise ConfigError("count must be >= 0", "inhomogeneity.count")
    r_lo, r_hi = (float(r) for r in radius_range)
    if not 0 <= r_lo <= r_hi:
        raise ConfigError("need 0 <= radius_min <= radius_max", "inhomogeneity.radius_range")
    rng = _rng(seed)
    lo, hi = np.array(grid.lo), np.array(grid.hi)
    centers = lo + (hi - lo) * rng.random((count, grid.dim))
    radii = r_lo + (r_hi - r_lo) * rng.random(count)
    x = grid.mesh()
    inside = np.zeros(grid.shape, dtype=bool)
    for c, r in zip(centers, radii):
        d2 = sum((x[k] - c[k]) ** 2 for k in range(grid.dim))
        inside |= d2 <= r * r
    return np.where(inside, float(delta_value), 0.0)


def random_spheres(grid, count, radius_range, delta_value, seed):
    if grid.dim != 3:
        raise ConfigError("random_spheres needs a 3D grid", "inhomogeneity.kind")
    return random_balls(grid, count, radius_range, delta_value, seed)


def random_blobs_2d(grid, count, radius_range, amplitude, seed):
    if grid.dim != 2:
        raise ConfigError("random_blobs_2d needs a 2D grid", "inhomogeneity.kind")
    return random_balls(grid, count, radius_range, amplitude, seed)
