"""Composite Gauss-Legendre quadrature on graded panels.

The integrands in this package (tanh/ln cosh kernels of the gap equation) have
structure on scales ``1/beta`` and ``sqrt(s)`` near the origin while extending
to the Debye cutoff, so the base partition is geometric towards zero.  Every
panel is then halved uniformly until two successive levels agree.
"""

import numpy as np

from .errors import QuadratureFailure

ORDER = 16
_NODES, _WEIGHTS = np.polynomial.legendre.leggauss(ORDER)


def graded_breakpoints(upper, n_geometric=40, ratio=0.5):
    """Breakpoints ``0 < upper*ratio**k < ... < upper`` plus the origin."""
    pts = upper * ratio ** np.arange(n_geometric, -1, -1, dtype=float)
    return np.concatenate(([0.0], pts))


def _rule(breaks, level):
    """Flattened nodes/weights after splitting each panel into 2**level parts."""
    m = 2 ** level
    lo, hi = breaks[:-1], breaks[1:]
    frac = np.arange(m + 1) / m
    sub = lo[:, None] + (hi - lo)[:, None] * frac[None, :]
    a, b = sub[:, :-1].ravel(), sub[:, 1:].ravel()
    half = 0.5 * (b - a)
    mid = 0.5 * (b + a)
    x = (mid[:, None] + half[:, None] * _NODES[None, :]).ravel()
    w = (half[:, None] * _WEIGHTS[None, :]).ravel()
    return x, w


def integrate(func, breaks, tol=1e-10, max_level=8):
    """Integrate ``func`` over ``[breaks[0], breaks[-1]]``.

    ``func`` receives a 1D array of abscissae and returns an array whose last
    axis matches it; leading axes are treated as a batch of integrands and the
    tolerance is enforced on the worst member.  Returns the finer estimate.
    """
    breaks = np.asarray(breaks, dtype=float)
    x, w = _rule(breaks, 0)
    prev = np.asarray(func(x)) @ w
    if not np.all(np.isfinite(prev)):
        raise QuadratureFailure("non-finite integrand values")
    for level in range(1, max_level + 1):
        x, w = _rule(breaks, level)
        cur = np.asarray(func(x)) @ w
        if not np.all(np.isfinite(cur)):
            raise QuadratureFailure("non-finite integrand values")
        err = np.max(np.abs(cur - prev)) if np.ndim(cur) else abs(cur - prev)
        if err <= tol:
            return cur
        prev = cur
    raise QuadratureFailure(
        f"panel halving stopped at level {max_level} with change {err:.3e} > {tol:.1e}")
