"""Expansion coefficients of the gap nonlinearity near the critical temperature.

With ``beta = beta0 / (1 - eps^2)``, ``s = eps^2 |psi0|^2`` and
``delta = eps delta0`` the nonlinearity behaves like

    f ~ eps^2 * nu0/2 * (g21 |psi0|^2 - g1 + g23 delta0^2)

where, writing ``x = beta0 xi`` and integrating over ``(0, w)``,

    g0  = int tanh(x) / (2 xi)
    g1  = int beta0 sech^2(x)                         = tanh(beta0 w)
    g21 = int tanh(x)/(2 xi^3) - beta0 sech^2(x)/(2 xi^2)
    g22 = int beta0 sech^2(x) - beta0^2 xi tanh(x) sech^2(x)
    g23 = int beta0^2 tanh(x) sech^2(x) / xi

and ``g1 ~ 1`` makes the bracket the classical cubic Ginzburg-Landau term.
"""

from dataclasses import dataclass

import numpy as np

from . import quadrature
from .gap import BETA0, OMEGA_TILDE, GapParams, eval_f, nu0_from_gap_normalization
from .errors import DomainError

# below this x = beta0*xi the g21 integrand is replaced by its Taylor series
SERIES_X = 1e-2


@dataclass(frozen=True)
class GammaCoefficients:
    gamma0: float
    gamma1: float
    gamma21: float
    gamma22: float
    gamma23: float
    beta0: float
    omega_tilde: float

    def as_dict(self):
        return {k: getattr(self, k) for k in
                ("gamma0", "gamma1", "gamma21", "gamma22", "gamma23", "beta0", "omega_tilde")}


def _sech2(x):
    return 1.0 / np.cosh(np.minimum(x, 350.0)) ** 2


def _integrands(beta0):
    b = beta0

    def func(xi):
        x = b * xi
        t = np.tanh(x)
        s2 = _sech2(x)
        safe = np.where(xi > 0, xi, 1.0)
        g0 = np.where(xi > 0, t / (2.0 * safe), 0.5 * b)
        g1 = b * s2
        small = x < SERIES_X
        xs = np.where(small, x, SERIES_X)
        series = b ** 3 * (1.0 / 3.0 - 4.0 * xs ** 2 / 15.0 + 17.0 * xs ** 4 / 105.0)
        direct = t / (2.0 * safe ** 3) - b * s2 / (2.0 * safe ** 2)
        g21 = np.where(small, series, direct)
        g22 = b * s2 - b * b * xi * t * s2
        g23 = np.where(xi > 0, b * b * t * s2 / safe, 0.0)
        return np.stack([g0, g1, g21, g22, g23])

    return func


def gamma_hats(beta0=BETA0, omega_tilde=OMEGA_TILDE, quad_tol=1e-12):
    """All five coefficients by composite Gauss-Legendre quadrature."""
    if beta0 <= 0 or omega_tilde <= 0:
        raise DomainError("beta0 and omega_tilde must be positive")
    vals = quadrature.integrate(_integrands(beta0), quadrature.graded_breakpoints(omega_tilde),
                                quad_tol)
    return GammaCoefficients(*(float(v) for v in vals), float(beta0), float(omega_tilde))


def gamma1_closed_form(beta0, omega_tilde):
    return float(np.tanh(beta0 * omega_tilde))


def gamma22_closed_form(beta0, omega_tilde):
    u = beta0 * omega_tilde
    return float(0.5 * np.tanh(u) + 0.5 * u * _sech2(u))


def limiting_gl_f(s, delta0, coeffs, nu0):
    """Cubic-GL effective nonlinearity ``nu0/2 (g21 s - 1 + g23 delta0^2)``."""
    s = np.asarray(s, dtype=float)
    return 0.5 * nu0 * (coeffs.gamma21 * s - 1.0 + coeffs.gamma23 * np.asarray(delta0) ** 2)


def limiting_root(delta0, coeffs):
    return (1.0 - coeffs.gamma23 * delta0 ** 2) / coeffs.gamma21


@dataclass(frozen=True)
class ConsistencyRow:
    eps: float
    max_discrepancy: float
    scaled: float  # max_discrepancy / eps^2


def hybrid_vs_limit_consistency(beta0=BETA0, omega_tilde=OMEGA_TILDE, eps_list=(0.2, 0.1, 0.05),
                                psi0_sq=(0.25, 0.5, 1.0, 1.5), delta0=(0.0, 0.3),
                                quad_tol=1e-13):
    """Pointwise comparison of the hybrid ``f`` with its scaled limit.

    For each ``eps`` returns the maximum over the sample set of
    ``|f(eps^2 s, eps d; beta0/(1-eps^2)) - eps^2 f_GL(s, d)|`` using the
    normalization-identity ``nu0`` at ``beta0``.
    """
    nu0 = nu0_from_gap_normalization(beta0, omega_tilde, quad_tol)
    coeffs = gamma_hats(beta0, omega_tilde, quad_tol)
    s, d = np.meshgrid(np.asarray(psi0_sq, float), np.asarray(delta0, float), indexing="ij")
    rows = []
    for eps in eps_list:
        eps = float(eps)
        if not 0 <= eps < 1:
            raise DomainError("eps must lie in [0, 1)")
        params = GapParams(beta=beta0 / (1.0 - eps * eps), beta0=beta0, omega_tilde=omega_tilde,
                           nu0=nu0, quad_tol=quad_tol)
        hyb = eval_f(eps * eps * s, eps * d, params)
        lim = eps * eps * limiting_gl_f(s, d, coeffs, nu0)
        err = float(np.max(np.abs(hyb - lim)))
        rows.append(ConsistencyRow(eps, err, err / eps ** 2 if eps > 0 else 0.0))
    return rows
