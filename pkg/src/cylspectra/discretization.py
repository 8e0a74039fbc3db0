"""Quadrature evaluation of the p-energy, its exact nodal gradient, and
sparse stiffness/mass assembly for the linear case.

Bilinear Q1 elements on the tensor grid.  All integrals use the same Gauss
rule, and gradients are exact derivatives of the quadrature sums, so
finite-difference checks pass to tight tolerance and optimizer line
searches see a consistent objective.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import (AdmissibilityError, DimensionMismatchError,
                     QuotientUndefinedError, UnsupportedExponentError)
from .mesh import BC, CylinderMesh


class QuadratureRule:
    """Tensor Gauss rule with 2 or 3 points per direction per cell."""

    def __init__(self, points_per_dir=3):
        if points_per_dir not in (2, 3):
            raise ValueError("points_per_dir must be 2 or 3")
        self.points_per_dir = points_per_dir
        if points_per_dir == 2:
            a = 1.0 / np.sqrt(3.0)
            self.nodes = np.array([-a, a])
            self.weights = np.array([1.0, 1.0])
        else:
            b = np.sqrt(3.0 / 5.0)
            self.nodes = np.array([-b, 0.0, b])
            self.weights = np.array([5.0, 8.0, 5.0]) / 9.0


@dataclass
class DiscreteField:
    """Nodal coefficients over the free DOFs of a mesh (Dirichlet nodes 0)."""

    values: np.ndarray
    mesh: CylinderMesh

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.mesh.n_free,):
            raise DimensionMismatchError(
                f"field has {self.values.shape} values for a mesh with "
                f"{self.mesh.n_free} free DOFs")

    def grid(self):
        return self.mesh.expand(self.values)

    def copy(self):
        return DiscreteField(self.values.copy(), self.mesh)


@dataclass
class SparsePair:
    """Stiffness (with the a12 cross terms) and mass matrix over free DOFs."""

    stiffness: sp.csr_matrix
    mass: sp.csr_matrix


def _check_p(p):
    if p < 2:
        raise UnsupportedExponentError(f"p must be >= 2, got {p}")


class _CellData:
    """Reference shape values/gradients at the quadrature grid of a mesh."""

    def __init__(self, mesh, quad):
        g, w = quad.nodes, quad.weights
        nq = g.size
        xi = g[:, None] * np.ones((1, nq))
        eta = np.ones((nq, 1)) * g[None, :]
        # corner order: (i,j), (i+1,j), (i+1,j+1), (i,j+1)
        self.N = np.stack([
            0.25 * (1 - xi) * (1 - eta),
            0.25 * (1 + xi) * (1 - eta),
            0.25 * (1 + xi) * (1 + eta),
            0.25 * (1 - xi) * (1 + eta),
        ])
        dN_dxi = np.stack([
            -0.25 * (1 - eta), 0.25 * (1 - eta),
            0.25 * (1 + eta), -0.25 * (1 + eta),
        ])
        dN_deta = np.stack([
            -0.25 * (1 - xi), -0.25 * (1 + xi),
            0.25 * (1 + xi), 0.25 * (1 - xi),
        ])
        self.dN_dx1 = dN_dxi * (2.0 / mesh.h1)
        self.dN_dx2 = dN_deta * (2.0 / mesh.h2)
        self.w = (w[:, None] * w[None, :]) * (mesh.h1 * mesh.h2 / 4.0)
        # physical x2 of each (cross cell, eta point): coefficients live here
        x2_left = mesh.x2[:-1]
        self.x2q = x2_left[:, None] + (g[None, :] + 1.0) * (mesh.h2 / 2.0)


def _cells(mesh, quad):
    # cached on the mesh so lifetimes match (meshes are immutable)
    cache = mesh.__dict__.setdefault("_quadrature_cache", {})
    data = cache.get(quad.points_per_dir)
    if data is None:
        data = _CellData(mesh, quad)
        cache[quad.points_per_dir] = data
    return data


def _corners(grid):
    return (grid[:-1, :-1], grid[1:, :-1], grid[1:, 1:], grid[:-1, 1:])


def _gather(grid, shapes):
    """Sum of corner values times per-corner shape arrays -> (nc1,nc2,nq,nq)."""
    c = _corners(grid)
    out = c[0][:, :, None, None] * shapes[0]
    for a in (1, 2, 3):
        out += c[a][:, :, None, None] * shapes[a]
    return out


def _coeff_arrays(mesh, coeffs, cells):
    a11, a12, a22 = coeffs.entries(cells.x2q)
    # broadcast over the axial cell index and the xi point
    return (a11[None, :, None, :], a12[None, :, None, :], a22[None, :, None, :])


def _scatter(contrib, shape):
    """Accumulate per-cell, per-corner values back onto the nodal grid."""
    grid = np.zeros(shape)
    grid[:-1, :-1] += contrib[..., 0]
    grid[1:, :-1] += contrib[..., 1]
    grid[1:, 1:] += contrib[..., 2]
    grid[:-1, 1:] += contrib[..., 3]
    return grid


def _quadratic_form(mesh, coeffs, grid, cells):
    g1 = _gather(grid, cells.dN_dx1)
    g2 = _gather(grid, cells.dN_dx2)
    a11, a12, a22 = _coeff_arrays(mesh, coeffs, cells)
    q = a11 * g1 * g1 + 2.0 * a12 * g1 * g2 + a22 * g2 * g2
    return q, g1, g2, (a11, a12, a22)


def energy(mesh, coeffs, u, p, quad=None) -> float:
    """Quadrature value of the p-energy  integral |A grad u . grad u|^{p/2}.

    Nonnegative; zero only for the zero field.  The quadratic form is taken
    in absolute value before the p/2 power to guard against roundoff
    producing tiny negatives at quadrature points.
    """
    _check_p(p)
    quad = quad or QuadratureRule()
    cells = _cells(mesh, quad)
    grid = u if isinstance(u, np.ndarray) else mesh.expand(u.values)
    q = _quadratic_form(mesh, coeffs, grid, cells)[0]
    if p == 2:
        dens = np.abs(q)
    else:
        dens = np.abs(q) ** (p / 2.0)
    return float(np.einsum("ijkl,kl->", dens, cells.w))


def energy_gradient(mesh, coeffs, u, p, quad=None) -> np.ndarray:
    """Exact derivative of the discrete energy w.r.t. each free nodal value."""
    _check_p(p)
    quad = quad or QuadratureRule()
    cells = _cells(mesh, quad)
    grid = u if isinstance(u, np.ndarray) else mesh.expand(u.values)
    q, g1, g2, (a11, a12, a22) = _quadratic_form(mesh, coeffs, grid, cells)
    if p == 2:
        s = cells.w[None, None, :, :] * np.ones_like(q)
    else:
        s = (p / 2.0) * np.abs(q) ** ((p - 2.0) / 2.0) * np.sign(q)
        s *= cells.w[None, None, :, :]
    f1 = 2.0 * s * (a11 * g1 + a12 * g2)
    f2 = 2.0 * s * (a12 * g1 + a22 * g2)
    contrib = (np.tensordot(f1, cells.dN_dx1, axes=([2, 3], [1, 2]))
               + np.tensordot(f2, cells.dN_dx2, axes=([2, 3], [1, 2])))
    return _scatter(contrib, grid.shape)[~mesh.dirichlet_mask]


def p_mass(mesh, u, p, quad=None):
    """Quadrature value and exact gradient of  integral |u|^p.

    Returns
    -------
    (value, gradient) : (float, ndarray over free DOFs)
    """
    _check_p(p)
    quad = quad or QuadratureRule()
    cells = _cells(mesh, quad)
    grid = u if isinstance(u, np.ndarray) else mesh.expand(u.values)
    uq = _gather(grid, cells.N)
    if p == 2:
        dens = uq * uq
        t = 2.0 * uq
    else:
        absu = np.abs(uq)
        dens = absu ** p
        t = p * np.sign(uq) * absu ** (p - 1.0)
    value = float(np.einsum("ijkl,kl->", dens, cells.w))
    t *= cells.w[None, None, :, :]
    contrib = np.tensordot(t, cells.N, axes=([2, 3], [1, 2]))
    grad = _scatter(contrib, grid.shape)[~mesh.dirichlet_mask]
    return value, grad


def _mass_value(mesh, grid, p, quad):
    """p-mass value only (skips the gradient work of `p_mass`)."""
    cells = _cells(mesh, quad)
    uq = _gather(grid, cells.N)
    dens = uq * uq if p == 2 else np.abs(uq) ** p
    return float(np.einsum("ijkl,kl->", dens, cells.w))


def _pow_nn(x, e):
    """x**e for nonnegative x with fast paths for half-integer exponents."""
    if e == 0.5:
        return np.sqrt(x)
    if e == 1.0:
        return x
    if e == 1.5:
        return x * np.sqrt(x)
    if e == 2.0:
        return x * x
    return x ** e


def _eval_value(mesh, coeffs, grid, p, quad):
    """(energy, p-mass) in one pass over the quadrature grid."""
    cells = _cells(mesh, quad)
    q = _quadratic_form(mesh, coeffs, grid, cells)[0]
    uq = _gather(grid, cells.N)
    w = cells.w
    if p == 2:
        E = float(np.einsum("ijkl,kl->", np.abs(q), w))
        m = float(np.einsum("ijkl,kl->", uq * uq, w))
    else:
        E = float(np.einsum("ijkl,kl->", _pow_nn(np.abs(q), p / 2.0), w))
        m = float(np.einsum("ijkl,kl->", _pow_nn(np.abs(uq), p), w))
    return E, m


def _eval_full(mesh, coeffs, grid, p, quad):
    """(energy, its gradient, p-mass, its gradient) in one fused pass."""
    cells = _cells(mesh, quad)
    q, g1, g2, (a11, a12, a22) = _quadratic_form(mesh, coeffs, grid, cells)
    uq = _gather(grid, cells.N)
    wq = cells.w
    w = wq[None, None, :, :]
    free = ~mesh.dirichlet_mask
    if p == 2:
        E = float(np.einsum("ijkl,kl->", np.abs(q), wq))
        s = np.broadcast_to(w, q.shape)
        m = float(np.einsum("ijkl,kl->", uq * uq, wq))
        t = 2.0 * uq * w
    else:
        absq = np.abs(q)
        E = float(np.einsum("ijkl,kl->", _pow_nn(absq, p / 2.0), wq))
        s = (p / 2.0) * _pow_nn(absq, (p - 2.0) / 2.0) * np.sign(q) * w
        absu = np.abs(uq)
        m = float(np.einsum("ijkl,kl->", _pow_nn(absu, p), wq))
        t = p * np.sign(uq) * _pow_nn(absu, p - 1.0) * w
    f1 = 2.0 * s * (a11 * g1 + a12 * g2)
    f2 = 2.0 * s * (a12 * g1 + a22 * g2)
    contrib = (np.tensordot(f1, cells.dN_dx1, axes=([2, 3], [1, 2]))
               + np.tensordot(f2, cells.dN_dx2, axes=([2, 3], [1, 2])))
    gE = _scatter(contrib, grid.shape)[free]
    gM = _scatter(np.tensordot(t, cells.N, axes=([2, 3], [1, 2])),
                  grid.shape)[free]
    return E, gE, m, gM


def rayleigh(mesh, coeffs, u, p, quad=None) -> float:
    """Rayleigh quotient energy / p-mass; scale invariant in u."""
    quad = quad or QuadratureRule()
    m = p_mass(mesh, u, p, quad)[0]
    if m <= 0.0:
        raise QuotientUndefinedError("Rayleigh quotient of the zero field")
    return energy(mesh, coeffs, u, p, quad) / m


def grad_p_norm(mesh, u, p, quad=None) -> float:
    """Plain gradient p-norm  integral |grad u|^p  (no coefficients)."""
    _check_p(p)
    quad = quad or QuadratureRule()
    cells = _cells(mesh, quad)
    grid = u if isinstance(u, np.ndarray) else mesh.expand(u.values)
    g1 = _gather(grid, cells.dN_dx1)
    g2 = _gather(grid, cells.dN_dx2)
    dens = (g1 * g1 + g2 * g2) ** (p / 2.0)
    return float(np.einsum("ijkl,kl->", dens, cells.w))


def cell_integrals(mesh, coeffs, grid, p, quad=None):
    """Per-cell integrals used by slab profiles and end-mass splits.

    Returns a dict of (n_cells1, n_cells2) arrays: `a_energy` for
    |A grad u . grad u|^{p/2}, `grad_p` for |grad u|^p, `p_mass` for |u|^p.
    """
    _check_p(p)
    quad = quad or QuadratureRule()
    cells = _cells(mesh, quad)
    q, g1, g2, _ = _quadratic_form(mesh, coeffs, grid, cells)
    uq = _gather(grid, cells.N)
    w = cells.w
    a_energy = np.einsum("ijkl,kl->ij", np.abs(q) ** (p / 2.0), w)
    grad_p = np.einsum("ijkl,kl->ij", (g1 * g1 + g2 * g2) ** (p / 2.0), w)
    mass = np.einsum("ijkl,kl->ij", np.abs(uq) ** p, w)
    return {"a_energy": a_energy, "grad_p": grad_p, "p_mass": mass}


def assemble_p2(mesh, coeffs, quad=None) -> SparsePair:
    """Assemble the p=2 stiffness and mass matrices over the free DOFs.

    The stiffness includes the a12 cross terms
    a11 d1u d1v + a12 (d1u d2v + d2u d1v) + a22 d2u d2v; the mass matrix is
    the L2 Gram matrix.  u' K u equals energy(u, p=2) by construction.
    """
    quad = quad or QuadratureRule()
    cells = _cells(mesh, quad)
    nq = quad.points_per_dir
    a11, a12, a22 = coeffs.entries(cells.x2q)  # (nc2, nq)
    w = cells.w  # (nq, nq)

    d1, d2, N = cells.dN_dx1, cells.dN_dx2, cells.N
    # element matrices per cross-section row j (identical along the axis)
    ke = np.zeros((mesh.n_cells2, 4, 4))
    me = np.zeros((4, 4))
    for a in range(4):
        for b in range(4):
            sym = d1[a] * d2[b] + d2[a] * d1[b]
            ke[:, a, b] = (
                a11 @ (w * d1[a] * d1[b]).sum(axis=0)
                + a12 @ (w * sym).sum(axis=0)
                + a22 @ (w * d2[a] * d2[b]).sum(axis=0))
            me[a, b] = np.sum(w * N[a] * N[b])

    n1, n2 = mesh.x1.size, mesh.x2.size
    i = np.arange(mesh.n_cells1)[:, None]
    j = np.arange(mesh.n_cells2)[None, :]
    corner_nodes = np.stack([
        i * n2 + j, (i + 1) * n2 + j, (i + 1) * n2 + (j + 1), i * n2 + (j + 1)
    ])  # (4, nc1, nc2)

    dof = mesh.free_dof_map.ravel()
    rows, cols, kdata, mdata = [], [], [], []
    for a in range(4):
        ra = dof[corner_nodes[a].ravel()]
        for b in range(4):
            cb = dof[corner_nodes[b].ravel()]
            keep = (ra >= 0) & (cb >= 0)
            rows.append(ra[keep])
            cols.append(cb[keep])
            kvals = np.broadcast_to(
                ke[None, :, a, b], (mesh.n_cells1, mesh.n_cells2)).ravel()
            kdata.append(kvals[keep])
            mdata.append(np.full(keep.sum(), me[a, b]))
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    n = mesh.n_free
    K = sp.coo_matrix((np.concatenate(kdata), (rows, cols)), shape=(n, n)).tocsr()
    M = sp.coo_matrix((np.concatenate(mdata), (rows, cols)), shape=(n, n)).tocsr()
    return SparsePair(K, M)


def lift_cross_section(cross, mesh) -> DiscreteField:
    """Extend the cross-section ground state constantly along the axis.

    Only admissible on mixed meshes (the lift violates the Dirichlet ends
    of the other boundary conditions).  The result is renormalized to unit
    p-mass on the cylinder.
    """
    if mesh.spec.bc is not BC.MIXED:
        raise AdmissibilityError(
            "the axial lift of the cross-section state is only admissible "
            "with mixed boundary conditions")
    if mesh.n_cells2 != cross.n_cells or not np.allclose(
            mesh.x2, cross.x2_nodes, atol=1e-12):
        raise DimensionMismatchError(
            "mesh cross resolution does not match the 1D ground state")
    grid = np.tile(cross.w_nodes, (mesh.x1.size, 1))
    field = DiscreteField(mesh.restrict(grid), mesh)
    m = p_mass(mesh, field, cross.p)[0]
    field.values /= m ** (1.0 / cross.p)
    return field
