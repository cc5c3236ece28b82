"""Sparse operators of the energy-consistent discretization used by the stepper.

The discrete free energy is

    2E = sum_k sum_edges w_e |(i/kappa) G_k psi + (P_k A_k)(P_k psi)|^2
         + sum_nodes w F(|psi|^2, delta) + sum_cells v |C A - H|^2

with ``G_k``/``P_k`` the forward difference/average onto the edges along
axis ``k`` (midpoint rule along the edge, trapezoid across), and ``C`` the
curl evaluated at cell centres.  The psi- and A-operators below are exact
partial derivatives of this functional, so the natural boundary conditions
of the gauge-coupled mode are ``(i/kappa grad + A) psi . n = 0`` and
``n x (curl A - H) = 0``, and the energy law of the scheme carries over to
the discrete level.
"""

from functools import cached_property

import numpy as np
import scipy.sparse as sp

from .grid import BoundaryMode, _applied_components


def _diff_1d(n, h):
    return sp.diags([-np.ones(n - 1), np.ones(n - 1)], [0, 1], shape=(n - 1, n)) / h


def _avg_1d(n):
    return sp.diags([np.full(n - 1, 0.5), np.full(n - 1, 0.5)], [0, 1], shape=(n - 1, n))


def _kron(ops):
    """Tensor product for Fortran-ordered flattening (axis 0 fastest)."""
    out = ops[0]
    for op in ops[1:]:
        out = sp.kron(op, out)
    return sp.csr_matrix(out)


def _trap(n):
    t = np.ones(n)
    t[0] = t[-1] = 0.5
    return t


def _kron_vec(vecs):
    out = vecs[0]
    for v in vecs[1:]:
        out = np.kron(v, out)
    return out


class _Pattern:
    """CSR sparsity pattern of a sum of triples ``(row, col)``, with the triple-to-slot map."""

    def __init__(self, rows, cols, n):
        keys = rows.astype(np.int64) * n + cols
        self.keys, self.inverse = np.unique(keys, return_inverse=True)
        self.n = n
        self.nnz = len(self.keys)
        self.rows = rows
        self.indices = (self.keys % n).astype(np.int32)
        counts = np.bincount(self.keys // n, minlength=n)
        self.indptr = np.concatenate(([0], np.cumsum(counts))).astype(np.int32)

    def position(self, rows, cols):
        keys = rows.astype(np.int64) * self.n + cols
        pos = np.searchsorted(self.keys, keys)
        if np.any(pos >= self.nnz) or np.any(self.keys[np.minimum(pos, self.nnz - 1)] != keys):
            raise ValueError("entries outside the sparsity pattern")
        return pos

    def matrix(self, data):
        return sp.csr_matrix((data, self.indices, self.indptr), shape=(self.n, self.n))


class Discretization:
    """Precomputed sparse pieces for one grid, ``kappa`` and boundary mode."""

    def __init__(self, grid, kappa, mode=BoundaryMode.GAUGE_COUPLED):
        self.grid = grid
        self.kappa = float(kappa)
        self.mode = BoundaryMode.parse(mode)
        d, n, h = grid.dim, grid.n, grid.h
        vol = grid.cell_volume
        eye = [sp.identity(k, format="csr") for k in n]
        self.G, self.P, self.w_edge = [], [], []
        for k in range(d):
            self.G.append(_kron([_diff_1d(n[m], h[m]) if m == k else eye[m] for m in range(d)]))
            self.P.append(_kron([_avg_1d(n[m]) if m == k else eye[m] for m in range(d)]))
            self.w_edge.append(vol * _kron_vec([np.ones(n[m] - 1) if m == k else _trap(n[m])
                                                for m in range(d)]))
        self.w_node = grid.flat(grid.weights)
        self.w_cell = vol
        cell_d = [_kron([_diff_1d(n[m], h[m]) if m == k else _avg_1d(n[m]) for m in range(d)])
                  for k in range(d)]
        if d == 2:
            self.C = sp.hstack([-cell_d[1], cell_d[0]]).tocsr()
        else:
            z = None
            self.C = sp.bmat([[z, -cell_d[2], cell_d[1]],
                              [cell_d[2], z, -cell_d[0]],
                              [-cell_d[1], cell_d[0], z]]).tocsr()
        self.n_cells = cell_d[0].shape[0]

    @property
    def n_nodes(self):
        return self.grid.size

    @cached_property
    def curlcurl(self):
        """``C^T V C`` (weighted form, symmetric positive semidefinite)."""
        return (self.C.T @ self.C * self.w_cell).tocsr()

    @cached_property
    def _neumann_fix(self):
        """Per axis: boundary (row, neighbour) pairs and the sign of the correction."""
        g = self.grid
        idx = np.arange(g.size).reshape(g.n, order="F")
        out = []
        for k in range(g.dim):
            n = g.n[k]
            first = np.take(idx, 0, axis=k).ravel()
            second = np.take(idx, 1, axis=k).ravel()
            last = np.take(idx, n - 1, axis=k).ravel()
            before = np.take(idx, n - 2, axis=k).ravel()
            e_shape = [g.n[m] - (1 if m == k else 0) for m in range(g.dim)]
            e_idx = np.arange(self.G[k].shape[0]).reshape(e_shape, order="F")
            e_first = np.take(e_idx, 0, axis=k).ravel()
            e_last = np.take(e_idx, n - 2, axis=k).ravel()
            out.append((first, second, e_first, last, before, e_last))
        return out

    def flat_vector(self, a):
        return np.concatenate([self.grid.flat(a[k]) for k in range(self.grid.dim)])

    def unflat_vector(self, vec):
        N = self.n_nodes
        return np.stack([self.grid.unflat(vec[k * N:(k + 1) * N]) for k in range(self.grid.dim)])

    def edge_potential(self, a_flat, k):
        N = self.n_nodes
        return self.P[k] @ a_flat[k * N:(k + 1) * N]

    def covariant_edges(self, psi_flat, a_flat):
        """Covariant differences on the edges of every axis."""
        return [(1j / self.kappa) * (self.G[k] @ psi_flat)
                + self.edge_potential(a_flat, k) * (self.P[k] @ psi_flat)
                for k in range(self.grid.dim)]

    @cached_property
    def _psi_pattern(self):
        """Index maps that fill the psi operator's fixed sparsity pattern in one pass."""
        g = self.grid
        tri_i, tri_j, tri = [], [], []
        for k in range(g.dim):
            G = self.G[k].tocoo()
            # G and P share their structure: two entries per edge row, same columns
            order = np.lexsort((G.col, G.row))
            e, col, gv = G.row[order], G.col[order], G.data[order]
            pv = np.asarray(self.P[k].tocsr()[e, col]).ravel()
            lo, hi = slice(0, None, 2), slice(1, None, 2)
            cols = np.stack([col[lo], col[hi]], axis=1)
            gs = np.stack([gv[lo], gv[hi]], axis=1)
            ps = np.stack([pv[lo], pv[hi]], axis=1)
            edges = e[lo]
            for a in range(2):
                for b in range(2):
                    tri_i.append(cols[:, a])
                    tri_j.append(cols[:, b])
                    tri.append((k, edges, gs[:, a], ps[:, a], gs[:, b], ps[:, b]))
        pattern = _Pattern(np.concatenate(tri_i), np.concatenate(tri_j), g.size)
        # edge indices made global over the concatenated per-axis edge arrays
        offsets = np.cumsum([0] + [len(w) for w in self.w_edge])
        e = np.concatenate([offsets[t[0]] + t[1] for t in tri])
        coef = {name: np.concatenate([t[m] for t in tri]) for m, name in
                ((2, "ga"), (3, "pa"), (4, "gb"), (5, "pb"))}
        scale = np.concatenate(self.w_edge)[e] / self.w_node[pattern.rows]
        fix = []
        if self.mode is not BoundaryMode.GAUGE_COUPLED:
            for k, (first, second, e_first, last, before, e_last) in enumerate(self._neumann_fix):
                fix.append((pattern.position(first, second), offsets[k] + e_first, -1j / g.h[k]))
                fix.append((pattern.position(last, before), offsets[k] + e_last, 1j / g.h[k]))
        return pattern, e, coef, scale, fix

    def kinetic_operator(self, a_flat):
        """Row-scaled covariant Laplacian ``W^-1 sum_k B_k^H w_e B_k`` (+ Neumann fix)."""
        pattern, e, c, scale, fix = self._psi_pattern
        ik = 1j / self.kappa
        abar = np.concatenate([self.edge_potential(a_flat, k) for k in range(self.grid.dim)])
        ab = abar[e]
        val = np.conj(ik * c["ga"] + ab * c["pa"]) * (ik * c["gb"] + ab * c["pb"]) * scale
        n = pattern.nnz
        data = np.bincount(pattern.inverse, val.real, n) + 1j * np.bincount(pattern.inverse, val.imag, n)
        for pos, e_idx, factor in fix:
            # mirror ghosts drop the normal-potential coupling in boundary rows
            data[pos] += factor * 2.0 * abar[e_idx] / self.kappa
        return pattern.matrix(data)

    def kinetic_energy(self, psi_flat, a_flat):
        """``sum_k sum_e w_e |D_k psi|^2`` (twice the kinetic part of E)."""
        return float(sum(np.dot(w, np.abs(e) ** 2)
                         for w, e in zip(self.w_edge, self.covariant_edges(psi_flat, a_flat))))

    def cell_curl(self, a_flat):
        return self.C @ a_flat

    def applied_cells(self, H):
        """Applied field sampled on the cells, stacked like ``C @ a``."""
        Hc = _applied_components(H, self.grid.dim)
        if self.grid.dim == 2:
            return np.full(self.n_cells, Hc[2])
        return np.repeat(Hc, self.n_cells)

    def magnetic_energy(self, a_flat, H):
        r = self.cell_curl(a_flat) - self.applied_cells(H)
        return float(self.w_cell * np.dot(r, r))

    def field_forcing(self, H):
        """Weighted ``curl H`` term ``C^T V H``; nonzero only near the boundary for uniform H."""
        if self.mode is BoundaryMode.HOMOGENEOUS_NEUMANN:
            return np.zeros(self.grid.dim * self.n_nodes)
        return self.w_cell * (self.C.T @ self.applied_cells(H))

    def pair_mass(self, psi_flat):
        """Weighted ``A |psi|^2`` operator: block diag of ``P_k^T w_e |P_k psi|^2 P_k``."""
        blocks = [self.P[k].T @ sp.diags(self.w_edge[k] * np.abs(self.P[k] @ psi_flat) ** 2)
                  @ self.P[k] for k in range(self.grid.dim)]
        return sp.block_diag(blocks, format="csr")

    @cached_property
    def _a_pattern(self):
        N, d = self.n_nodes, self.grid.dim
        cc = self.curlcurl.tocoo()
        rows, cols, tri = [cc.row, np.arange(d * N)], [cc.col, np.arange(d * N)], []
        for k in range(d):
            Pc = self.P[k].tocoo()
            order = np.lexsort((Pc.col, Pc.row))
            e, col, pv = Pc.row[order], Pc.col[order], Pc.data[order]
            for a in range(2):
                for b in range(2):
                    rows.append(k * N + col[a::2])
                    cols.append(k * N + col[b::2])
                    tri.append((k, e[a::2], pv[a::2] * pv[b::2]))
        n_fixed = len(cc.row) + d * N
        pattern = _Pattern(np.concatenate(rows), np.concatenate(cols), d * N)
        pos_cc = pattern.inverse[:len(cc.row)]
        pos_diag = pattern.inverse[len(cc.row):n_fixed]
        pos_pm = pattern.inverse[n_fixed:]
        offsets = np.cumsum([0] + [len(w) for w in self.w_edge])
        e = np.concatenate([offsets[t[0]] + t[1] for t in tri])
        coef = np.concatenate([t[2] for t in tri]) * np.concatenate(self.w_edge)[e]
        base = np.bincount(pos_cc, cc.data, pattern.nnz)
        return pattern, base, pos_diag, pos_pm, e, coef

    def a_operator(self, psi_flat, mass):
        """Weighted A-system matrix ``mass W + C^T V C + pair_mass(psi)`` (SPD for mass > 0)."""
        pattern, base, pos_diag, pos_pm, e, coef = self._a_pattern
        rho = np.concatenate([np.abs(self.P[k] @ psi_flat) ** 2 for k in range(self.grid.dim)])
        data = base + np.bincount(pos_diag, mass * np.tile(self.w_node, self.grid.dim), pattern.nnz)
        data += np.bincount(pos_pm, coef * rho[e], pattern.nnz)
        return pattern.matrix(data)

    def current(self, psi_flat):
        """Weighted supercurrent ``P_k^T w_e Re(conj((i/kappa) G_k psi) P_k psi)``."""
        parts = []
        for k in range(self.grid.dim):
            g = (1j / self.kappa) * (self.G[k] @ psi_flat)
            parts.append(self.P[k].T @ (self.w_edge[k] * np.real(np.conj(g) * (self.P[k] @ psi_flat))))
        return np.concatenate(parts)
