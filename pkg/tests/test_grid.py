import numpy as np
import pytest

from hybrid_tdgl.errors import ConfigError, ShapeError
from hybrid_tdgl.grid import (BoundaryMode, Grid, apply_A_bc, apply_psi_bc, covariant_laplacian,
                              curl, curl_curl, div, grad, supercurrent)
from refinement import KAPPA, refinement_ratios

G33 = Grid.cube(2, np.pi, 33)



def test_grid_geometry():
    g = Grid((0.0, -1.0), (2.0, 1.0), (5, 9))
    assert g.h == (0.5, 0.25)
    assert g.size == 45
    assert np.isclose(g.weights.sum(), g.volume)
    v = np.arange(45.0)
    assert np.array_equal(g.flat(g.unflat(v)), v)


@pytest.mark.parametrize("args", [((0,), (1,), (4,)), ((0, 0), (1, 1), (2, 5)), ((0, 1), (1, 1), (4, 4))])
def test_grid_rejects_bad_geometry(args):
    with pytest.raises(ConfigError):
        Grid(*args)


def test_shape_checks():
    with pytest.raises(ShapeError):
        grad(np.zeros((4, 4)), G33)
    with pytest.raises(ShapeError):
        curl(np.zeros((3, *G33.shape)), G33)
    with pytest.raises(ConfigError):
        BoundaryMode.parse("dirichlet")


def test_grad_of_constant_and_linear():
    x, y = G33.mesh()
    assert np.max(np.abs(grad(np.full(G33.shape, 2.5), G33))) < 1e-13
    g = grad(x, G33)
    np.testing.assert_allclose(g[0], 1.0, atol=1e-13)
    np.testing.assert_allclose(g[1], 0.0, atol=1e-13)


def test_curl_examples():
    x, y = G33.mesh()
    assert np.max(np.abs(curl(np.ones((2, *G33.shape)), G33))) < 1e-13
    np.testing.assert_allclose(curl(np.stack([-y / 2, x / 2]), G33), 1.0, atol=1e-13)
    g3 = Grid.cube(3, np.pi, 9)
    x3 = g3.mesh()[0]
    a = np.stack([np.zeros_like(x3), np.zeros_like(x3), x3])
    c = curl(a, g3)
    np.testing.assert_allclose(c[0], 0, atol=1e-13)
    np.testing.assert_allclose(c[1], -1, atol=1e-13)
    np.testing.assert_allclose(c[2], 0, atol=1e-13)


def test_curl_curl_of_gradient_vanishes():
    # centered differences along different axes commute, so this is rounding only
    x, y = G33.mesh()
    cc = curl_curl(grad(np.sin(x) * np.cos(y), G33), G33)
    assert np.max(np.abs(cc)) < 1e-12


def test_curl_grad_and_div_curl_vanish():
    g = Grid.cube(3, np.pi, 17)
    x, y, z = g.mesh()
    assert np.max(np.abs(curl(grad(np.sin(x) * np.cos(y) * np.sin(z), g), g))) < 1e-12
    a = np.stack([np.sin(y * z), np.cos(x + z), x * y])
    assert np.max(np.abs(div(curl(a, g), g))) < 1e-12


def test_covariant_laplacian_constant_is_zero():
    psi = np.full(G33.shape, 0.3 - 0.4j)
    a = np.zeros((2, *G33.shape))
    for mode in BoundaryMode:
        assert np.all(covariant_laplacian(psi, a, KAPPA, G33, mode) == 0)


def test_covariant_laplacian_gauge_null_mode():
    errs, whole = [], []
    for n in (33, 65):
        g = Grid.cube(2, np.pi, n)
        x, y = g.mesh()
        av = (0.3, -0.2)
        psi = np.exp(1j * KAPPA * (av[0] * x + av[1] * y))
        a = np.stack([np.full(g.shape, av[0]), np.full(g.shape, av[1])])
        errs.append(np.max(np.abs(covariant_laplacian(psi, a, KAPPA, g)[2:-2, 2:-2])))
        whole.append(np.max(np.abs(covariant_laplacian(psi, a, KAPPA, g, "gauge"))))
    # interior: at least second order (the edge-phase form is in fact more accurate)
    assert errs[0] < 1e-5 and errs[0] / errs[1] > 3.2
    # whole domain with the gauge-coupled ghosts: first order from the boundary rows
    assert whole[0] < 5e-3 and 1.6 < whole[0] / whole[1] < 2.4


def test_covariant_laplacian_matches_scaled_laplacian():
    x, y = G33.mesh()
    psi = np.cos(x) + 0j
    out = covariant_laplacian(psi, np.zeros((2, *G33.shape)), KAPPA, G33)
    assert np.max(np.abs(out - np.cos(x) / KAPPA ** 2)) < 1e-2


def test_supercurrent_examples():
    x, y = G33.mesh()
    assert np.all(supercurrent(np.cos(x) + 0j, KAPPA, G33) == 0)
    assert np.all(supercurrent(np.full(G33.shape, 1 + 1j), KAPPA, G33) == 0)
    theta = 1.5
    j = supercurrent(np.exp(1j * theta * x), KAPPA, G33)
    np.testing.assert_allclose(j[0], -theta / KAPPA, rtol=3e-2)
    np.testing.assert_allclose(j[1], 0, atol=1e-14)


def test_neumann_constant_is_exact_on_boundary():
    psi = np.full(G33.shape, 0.6 + 0.8j)
    a = np.zeros((2, *G33.shape))
    for axis in range(2):
        pp = apply_psi_bc(psi, a, KAPPA, G33, axis)
        assert np.all(pp == psi[0, 0])
    assert np.all(covariant_laplacian(psi, a, KAPPA, G33) == 0)


def test_gauge_bc_reduces_to_neumann_without_normal_potential():
    rng = np.random.default_rng(0)
    psi = rng.normal(size=G33.shape) + 1j * rng.normal(size=G33.shape)
    a = rng.normal(size=(2, *G33.shape))
    a[0][[0, 1, -2, -1], :] = 0.0
    a[1][:, [0, 1, -2, -1]] = 0.0
    for axis in range(2):
        assert np.array_equal(apply_psi_bc(psi, a, KAPPA, G33, axis, "gauge"),
                              apply_psi_bc(psi, a, KAPPA, G33, axis, "neumann"))


def test_gauge_bc_phase_tracks_normal_potential():
    # psi = exp(i k a x) solves (i/k d + a) psi = 0; the ghost must continue it
    x, y = G33.mesh()
    av = 0.2
    psi = np.exp(1j * KAPPA * av * x)
    a = np.stack([np.full(G33.shape, av), np.zeros(G33.shape)])
    pp = apply_psi_bc(psi, a, KAPPA, G33, 0, "gauge")
    h = G33.h[0]
    exact_lo = np.exp(1j * KAPPA * av * (x[0] - h))
    assert np.max(np.abs(pp[0] - exact_lo)) < 1e-2


@pytest.mark.parametrize("dim", [2, 3])
def test_gauge_A_bc_imposes_applied_curl(dim):
    g = Grid.cube(dim, np.pi, 17)
    rng = np.random.default_rng(1)
    a = rng.normal(size=(dim, *g.shape))
    H = 0.7 if dim == 2 else np.array([0.2, -0.3, 0.5])
    Hv = np.array([0, 0, H]) if dim == 2 else H
    for m in range(dim):
        ap = apply_A_bc(a, g, m, "gauge", H)
        n, h = g.n[m], g.h[m]
        for k in range(dim):
            if k == m:
                continue
            c = 3 - m - k
            sign = float(np.sign((m - c) * (k - c) * (k - m)))
            dk_am = np.gradient(a[m], g.h[k], axis=k, edge_order=2)
            for end, (i0, i1) in (("lo", (0, 2)), ("hi", (n - 1, n + 1))):
                dm_ak = (np.take(ap[k], i1, axis=m) - np.take(ap[k], i1 - 2, axis=m)) / (2 * h)
                node = 0 if end == "lo" else n - 1
                curl_c = sign * (dm_ak - np.take(dk_am, node, axis=m))
                np.testing.assert_allclose(curl_c, Hv[c], atol=1e-10)


def test_neumann_A_bc_mirrors():
    rng = np.random.default_rng(2)
    a = rng.normal(size=(2, *G33.shape))
    ap = apply_A_bc(a, G33, 1)
    assert np.array_equal(ap[:, :, 0], a[:, :, 1])
    assert np.array_equal(ap[:, :, -1], a[:, :, -2])


def test_linear_exactness():
    x, y = G33.mesh()
    u = 2 * x - 3 * y + 1
    g = grad(u, G33)
    np.testing.assert_allclose(g[0], 2, atol=1e-12)
    np.testing.assert_allclose(g[1], -3, atol=1e-12)
    a = np.stack([0.5 * y, 1.5 * x])
    np.testing.assert_allclose(curl(a, G33), 1.0, atol=1e-12)
    np.testing.assert_allclose(curl_curl(a, G33), 0, atol=1e-11)


def test_curl_curl_adjoint_identity_first_order():
    # <curl curl A, B> = <curl A, curl B> when curl A vanishes on the boundary
    gaps = []
    for n in (33, 65):
        g = Grid.cube(2, np.pi, n)
        x, y = g.mesh()
        # stream function with s ~ dist^4 at the boundary, so curl A = -lap s vanishes there
        sx, sy = (np.cos(x) + 1) ** 2, (np.cos(y) + 1) ** 2
        dsx, dsy = -2 * (np.cos(x) + 1) * np.sin(x), -2 * (np.cos(y) + 1) * np.sin(y)
        a = np.stack([sx * dsy, -dsx * sy])
        b = np.stack([np.sin(y) + x, np.cos(x) * y])
        w = g.weights
        lhs = np.sum(w * np.sum(curl_curl(a, g) * b, axis=0))
        rhs = np.sum(w * curl(a, g) * curl(b, g))
        gaps.append(abs(lhs - rhs))
    assert gaps[1] < 0.6 * gaps[0] or gaps[1] < 1e-10


def test_refinement_ratios_are_second_order():
    for name, (errs, ratios) in refinement_ratios().items():
        assert np.all((ratios >= 3.2) & (ratios <= 4.8)), (name, errs, ratios)
