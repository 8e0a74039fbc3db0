"""Eigenpair solvers.

Four entry points: `minimize_rayleigh` (normalized projected gradient
descent on the Rayleigh quotient, any p >= 2), `linear_spectrum` (p = 2,
shift-free inverse iteration with M-orthogonal deflation on the assembled
pencil), `cross_section_ground_state` (the 1D problem on the cross section),
and `half_cylinder_eigen` (first eigenvalue of a half cylinder with a
Dirichlet far end).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse.linalg as spla

from . import discretization as disc
from .discretization import DiscreteField, QuadratureRule
from .errors import ConfigurationError, SolverError
from .mesh import BC, CylinderMesh, DomainSpec, Shape, build_mesh


class Init(enum.Enum):
    LIFTED_W = "lifted_w"
    PERTURBED_LIFT = "perturbed_lift"
    ONES = "ones"


class Side(enum.Enum):
    PLUS = "plus"
    MINUS = "minus"


@dataclass
class SolveOptions:
    tol_residual: float = 1e-8
    tol_stagnation: float = 1e-12
    max_iters: int = 50000
    armijo_c: float = 1e-4
    armijo_shrink: float = 0.5
    init: Init = Init.LIFTED_W
    positivity_projection: bool = True
    seed: int = 0
    precondition: bool = True  # Sobolev-gradient steps (stiffness-solved)

    def __post_init__(self):
        if self.tol_residual <= 0 or self.tol_stagnation <= 0:
            raise ConfigurationError("tolerances must be positive")
        if not (0 < self.armijo_c < 1 and 0 < self.armijo_shrink < 1):
            raise ConfigurationError("Armijo parameters must lie in (0, 1)")


@dataclass
class EigenResult:
    lam: float
    field: DiscreteField
    iterations: int
    final_residual: float
    rayleigh_history: np.ndarray
    converged: bool


class CrossSectionResult:
    """Ground state of the cross-section problem on omega = (-1/2, 1/2).

    `w_nodes` are the nodal values (zero at the interval ends,
    p-normalized, positive inside); `w_prime_q` the element slope repeated
    at the quadrature points of each cell; `poincare_cp` the discrete
    Poincare constant, mu1(omega; a22 = 1)^{-1/p}.
    """

    def __init__(self, mu1, w_nodes, x2_nodes, p, w_prime_q, poincare_cp,
                 iterations=0, residual=0.0):
        self.mu1 = float(mu1)
        self.w_nodes = np.asarray(w_nodes, dtype=float)
        self.x2_nodes = np.asarray(x2_nodes, dtype=float)
        self.p = float(p)
        self.w_prime_q = np.asarray(w_prime_q, dtype=float)
        self.poincare_cp = float(poincare_cp)
        self.iterations = iterations
        self.residual = residual
        self.n_cells = len(x2_nodes) - 1
        h = x2_nodes[1] - x2_nodes[0]
        self.w_slope = np.diff(self.w_nodes) / h
        self.cell_midpoints = 0.5 * (self.x2_nodes[:-1] + self.x2_nodes[1:])


# ---------------------------------------------------------------------------
# descent engine
# ---------------------------------------------------------------------------

def _minimize_quotient(fval, fgrad, u0, p, opts, precond=None):
    """Projected gradient descent with a BB step seed and Armijo backtracking.

    `fval(u) -> (E, m)`, `fgrad(u) -> (E, gE, m, gM)`.  The iterate is kept
    p-normalized; the accepted Rayleigh values form a nonincreasing history.
    The residual and the stopping rule live on the plain quotient gradient
    d = (gE - lam gM)/m; when `precond` is given the step is taken along the
    preconditioned direction instead (Sobolev-gradient descent), which keeps
    iteration counts mesh-independent.  Stops on a small residual, on
    persistent stagnation of the quotient, or (flagged) at max_iters.
    """
    u = np.array(u0, dtype=float)
    _, m0 = fval(u)
    if m0 <= 0:
        raise SolverError("initial field has zero p-mass")
    u /= m0 ** (1.0 / p)

    E, gE, m, gM = fgrad(u)
    lam = E / m
    history = [lam]
    res = np.inf
    converged = False
    tau = None
    prev_u = prev_s = None
    fresh_bb = True
    iterations = 0

    it = 0
    while it < opts.max_iters:
        it += 1
        iterations = it
        d = (gE - lam * gM) / m
        res = float(np.max(np.abs(d))) if d.size else 0.0
        if res <= opts.tol_residual * max(1.0, abs(lam)):
            converged = True
            break

        if precond is not None:
            s = precond(d)
            slope = float(d @ s)
            if not np.isfinite(slope) or slope <= 0.0:
                s, slope = d, float(d @ d)
        else:
            s = d
            slope = float(d @ d)

        if prev_u is not None:
            du = u - prev_u
            ds = s - prev_s
            num = float(du @ ds)
            den = float(ds @ ds)
            tau = num / den if (num > 0 and den > 0) else (tau or 1.0) * 2.0
            fresh_bb = False
        elif precond is not None:
            tau = 1.0
            fresh_bb = True
        else:
            tau = 0.01 / (np.linalg.norm(d) / (np.linalg.norm(u) + 1e-30) + 1e-30)
            fresh_bb = True
        tau = min(max(tau, 1e-16), 1e8)

        accepted = False
        for _ in range(80):
            v = u - tau * s
            Ev, mv = fval(v)
            if mv > 0 and Ev / mv <= lam - opts.armijo_c * tau * slope:
                accepted = True
                break
            tau *= opts.armijo_shrink
            if tau < 1e-18:
                break
        if not accepted:
            if not fresh_bb:
                # retry the same iterate with a fresh step-size seed
                prev_u = prev_s = None
                continue
            converged = True  # no admissible descent left at this precision
            break
        prev_u, prev_s = u.copy(), s.copy()

        u = v / mv ** (1.0 / p)
        lam = Ev / mv
        history.append(lam)

        # stagnation over a window; robust to the BB sawtooth
        window = 30
        if len(history) > window:
            total_drop = history[-window - 1] - history[-1]
            if total_drop <= window * opts.tol_stagnation * max(1.0, abs(lam)):
                converged = True
                break

        if opts.positivity_projection and it % 50 == 0:
            if float(np.sum(u)) < 0.0:
                u = -u
            w = np.clip(u, 0.0, None)
            Ew, mw = fval(w)
            if mw > 0 and Ew / mw <= lam:
                u = w / mw ** (1.0 / p)
                lam = Ew / mw
                history.append(lam)
                prev_u = prev_s = None

        E, gE, m, gM = fgrad(u)
        lam = E / m

    if opts.positivity_projection:
        if float(np.sum(u)) < 0.0:
            u = -u
        if np.any(u < 0.0):
            w = np.clip(u, 0.0, None)
            Ew, mw = fval(w)
            if mw > 0 and Ew / mw <= lam * (1.0 + 1e-12):
                u = w

    Ef, mf = fval(u)
    u /= mf ** (1.0 / p)
    lam = Ef / mf
    return u, lam, iterations, res, np.asarray(history), converged


# ---------------------------------------------------------------------------
# cylinder solves
# ---------------------------------------------------------------------------

def _initial_grid(mesh, cross, opts):
    if opts.init is Init.ONES:
        return np.ones((mesh.x1.size, mesh.x2.size))
    ell = mesh.spec.ell
    if mesh.spec.bc is BC.MIXED:
        axial = np.ones_like(mesh.x1)
    else:
        axial = np.cos(np.pi * mesh.x1 / (2.0 * ell))
    grid = axial[:, None] * cross.w_nodes[None, :]
    if opts.init is Init.PERTURBED_LIFT:
        length = mesh.x1[-1] - mesh.x1[0]
        phase = 2.0 * np.pi * ((opts.seed * 0.6180339887498949) % 1.0)
        wobble = 1.0 + 0.01 * np.sin(
            np.pi * (mesh.x1 - mesh.x1[0]) / length + phase)
        grid = grid * wobble[:, None]
    return grid


def minimize_rayleigh(mesh, coeffs, p, opts=None, quad=None,
                      cross=None) -> EigenResult:
    """First eigenpair by Rayleigh-quotient descent over the free DOFs.

    Stops when the projected gradient falls below
    ``tol_residual * max(1, |lambda|)`` in the max norm, or when the
    quotient stagnates.  A non-converged run (max_iters reached) is
    returned flagged rather than raised, so parameter sweeps can record
    partial data.
    """
    opts = opts or SolveOptions()
    quad = quad or QuadratureRule()
    if cross is None:
        cross = cross_section_ground_state(mesh.n_cells2, coeffs, p, quad=quad)

    mask = ~mesh.dirichlet_mask
    shape = mesh.dirichlet_mask.shape

    def to_grid(u):
        grid = np.zeros(shape)
        grid[mask] = u
        return grid

    def fval(u):
        return disc._eval_value(mesh, coeffs, to_grid(u), p, quad)

    def fgrad(u):
        return disc._eval_full(mesh, coeffs, to_grid(u), p, quad)

    precond = None
    if opts.precondition:
        pair = disc.assemble_p2(mesh, coeffs, quad)
        try:
            lu = spla.splu(pair.stiffness.tocsc())
        except RuntimeError as exc:  # pragma: no cover
            raise SolverError(f"preconditioner factorization failed: {exc}") from exc
        precond = lu.solve

    u0 = mesh.restrict(_initial_grid(mesh, cross, opts))
    u, lam, iters, res, history, conv = _minimize_quotient(
        fval, fgrad, u0, p, opts, precond=precond)
    return EigenResult(lam, DiscreteField(u, mesh), iters, res, history, conv)


def linear_spectrum(mesh, coeffs, k, opts=None, quad=None):
    """k smallest eigenpairs of the p = 2 pencil (K, M).

    Shift-free inverse power iteration; each new mode is kept M-orthogonal
    to the previously found ones (re-orthogonalized every step, so nearby
    clusters deflate cleanly).  Inner solves use a sparse LU factorization
    of the stiffness matrix.
    """
    opts = opts or SolveOptions()
    quad = quad or QuadratureRule()
    if k < 1 or k > mesh.n_free:
        raise ConfigurationError(f"need 1 <= k <= {mesh.n_free}, got {k}")
    pair = disc.assemble_p2(mesh, coeffs, quad)
    K, M = pair.stiffness, pair.mass
    try:
        lu = spla.splu(K.tocsc())
    except RuntimeError as exc:  # pragma: no cover - factorization breakdown
        raise SolverError(f"stiffness factorization failed: {exc}") from exc

    found = []
    results = []
    rng = np.random.default_rng(1234)
    for j in range(k):
        v = rng.standard_normal(mesh.n_free)
        v = _m_orthogonalize(v, found, M)
        nrm = np.sqrt(float(v @ (M @ v)))
        if nrm <= 0:
            raise SolverError("deflation produced a zero start vector")
        v /= nrm
        lam = float(v @ (K @ v))
        history = [lam]
        res = np.inf
        converged = False
        iterations = 0
        for it in range(1, opts.max_iters + 1):
            w = lu.solve(M @ v)
            w = _m_orthogonalize(w, found, M)
            nrm = np.sqrt(float(w @ (M @ w)))
            if not np.isfinite(nrm) or nrm <= 0:
                raise SolverError("inverse iteration broke down")
            w /= nrm
            lam = float(w @ (K @ w))
            history.append(lam)
            r = K @ w - lam * (M @ w)
            res = float(np.linalg.norm(r) / np.linalg.norm(w))
            v = w
            iterations = it
            if res <= opts.tol_residual:
                converged = True
                break
        found.append(v)
        if j == 0 and float(np.sum(v)) < 0.0:
            v = -v
            found[-1] = v
        elif j > 0:
            anchor = int(np.argmax(np.abs(v)))
            if v[anchor] < 0.0:
                v = -v
                found[-1] = v
        fld = DiscreteField(v.copy(), mesh)
        m = disc.p_mass(mesh, fld.grid(), 2.0, quad)[0]
        fld.values /= np.sqrt(m)
        results.append(EigenResult(lam, fld, iterations, res,
                                   np.asarray(history), converged))
    results.sort(key=lambda r: r.lam)
    return results


def _m_orthogonalize(v, basis, M):
    for _ in range(2):
        for b in basis:
            v = v - float(b @ (M @ v)) * b
    return v


def half_cylinder_eigen(side, ell, resolution, coeffs, p,
                        opts=None, quad=None) -> EigenResult:
    """First eigenvalue of the half cylinder with a Dirichlet far end.

    `side` PLUS is (0, ell) with the natural end at 0; MINUS is (-ell, 0)
    with the natural end at 0.  For p = 2 the assembled pencil is solved;
    otherwise the descent solver runs with the lifted quarter-wave start.
    """
    opts = opts or SolveOptions()
    nx2, cpu = resolution
    shape = Shape.HALF_PLUS if side is Side.PLUS else Shape.HALF_MINUS
    mesh = build_mesh(DomainSpec(shape, ell, BC.HALF_CYLINDER, cpu, nx2))
    if p == 2:
        return linear_spectrum(mesh, coeffs, 1, opts, quad)[0]
    return minimize_rayleigh(mesh, coeffs, p, opts, quad)


# ---------------------------------------------------------------------------
# cross-section (1D) problem
# ---------------------------------------------------------------------------

def _gauss_1d(points=3):
    if points == 2:
        a = 1.0 / np.sqrt(3.0)
        return np.array([-a, a]), np.array([1.0, 1.0])
    b = np.sqrt(3.0 / 5.0)
    return np.array([-b, 0.0, b]), np.array([5.0, 8.0, 5.0]) / 9.0


class _Cross1D:
    """Quadrature kernels for the 1D functional on (-1/2, 1/2)."""

    def __init__(self, nx2, coeffs, p):
        self.nx2 = nx2
        self.p = p
        self.x2 = np.linspace(-0.5, 0.5, nx2 + 1)
        self.h = 1.0 / nx2
        g, w = _gauss_1d()
        self.g = g
        self.wq = w * (self.h / 2.0)
        self.n0 = (1.0 - g) / 2.0
        self.n1 = (1.0 + g) / 2.0
        x2q = self.x2[:-1, None] + (g[None, :] + 1.0) * (self.h / 2.0)
        self.x2q = x2q
        self.a22q = coeffs.a22(x2q)

    def full(self, u_free):
        full = np.zeros(self.nx2 + 1)
        full[1:-1] = u_free
        return full

    def value(self, u_free):
        full = self.full(u_free)
        slope = np.diff(full) / self.h
        dens_e = np.abs(self.a22q * slope[:, None] ** 2) ** (self.p / 2.0)
        E = float(np.sum(dens_e * self.wq[None, :]))
        uq = full[:-1, None] * self.n0[None, :] + full[1:, None] * self.n1[None, :]
        m = float(np.sum(np.abs(uq) ** self.p * self.wq[None, :]))
        return E, m

    def value_grad(self, u_free):
        p = self.p
        full = self.full(u_free)
        slope = np.diff(full) / self.h
        q = self.a22q * slope[:, None] ** 2
        absq = np.abs(q)
        E = float(np.sum(absq ** (p / 2.0) * self.wq[None, :]))
        s = (p / 2.0) * absq ** ((p - 2.0) / 2.0) * np.sign(q)
        dq_dslope = 2.0 * self.a22q * slope[:, None]
        per_cell = np.sum(s * dq_dslope * self.wq[None, :], axis=1)
        gE_full = np.zeros_like(full)
        gE_full[:-1] -= per_cell / self.h
        gE_full[1:] += per_cell / self.h

        uq = full[:-1, None] * self.n0[None, :] + full[1:, None] * self.n1[None, :]
        absu = np.abs(uq)
        m = float(np.sum(absu ** p * self.wq[None, :]))
        t = p * np.sign(uq) * absu ** (p - 1.0) * self.wq[None, :]
        gM_full = np.zeros_like(full)
        gM_full[:-1] += np.sum(t * self.n0[None, :], axis=1)
        gM_full[1:] += np.sum(t * self.n1[None, :], axis=1)
        return E, gE_full[1:-1], m, gM_full[1:-1]


def _cross_p2(kernel):
    """Dense generalized eigensolve of the 1D p = 2 problem."""
    n = kernel.nx2
    h = kernel.h
    ke_scale = np.sum(kernel.a22q * kernel.wq[None, :], axis=1) / h ** 2
    K = np.zeros((n + 1, n + 1))
    M = np.zeros((n + 1, n + 1))
    m00 = np.sum(kernel.n0 ** 2 * kernel.wq)
    m01 = np.sum(kernel.n0 * kernel.n1 * kernel.wq)
    m11 = np.sum(kernel.n1 ** 2 * kernel.wq)
    for c in range(n):
        K[c, c] += ke_scale[c]
        K[c + 1, c + 1] += ke_scale[c]
        K[c, c + 1] -= ke_scale[c]
        K[c + 1, c] -= ke_scale[c]
        M[c, c] += m00
        M[c + 1, c + 1] += m11
        M[c, c + 1] += m01
        M[c + 1, c] += m01
    Ki = K[1:-1, 1:-1]
    Mi = M[1:-1, 1:-1]
    vals, vecs = scipy.linalg.eigh(Ki, Mi)
    mu = float(vals[0])
    w = vecs[:, 0]
    if w[np.argmax(np.abs(w))] < 0:
        w = -w
    res = float(np.linalg.norm(Ki @ w - mu * (Mi @ w)) / np.linalg.norm(w))
    return mu, w, res


def cross_section_ground_state(nx2, coeffs, p, opts=None,
                               quad=None) -> CrossSectionResult:
    """Ground state of the cross-section problem with Dirichlet ends.

    Solves the 1D analogue of the cylinder problem with coefficient a22:
    dense generalized eigensolve for p = 2, projected gradient descent
    otherwise.  Also computes the discrete Poincare constant from the
    plain (a22 = 1) problem at the same p and resolution.
    """
    if nx2 < 8:
        raise ConfigurationError(f"nx2 must be >= 8 for the 1D solve, got {nx2}")
    opts = opts or SolveOptions()
    kernel = _Cross1D(nx2, coeffs, p)

    if p == 2:
        mu1, w_free, res = _cross_p2(kernel)
        iters = 0
    else:
        w0 = np.cos(np.pi * kernel.x2[1:-1])
        w_free, mu1, iters, res, _, conv = _minimize_quotient(
            kernel.value, kernel.value_grad, w0, p, opts)
        if not conv:
            raise SolverError("cross-section descent did not converge")

    full = kernel.full(w_free)
    if np.sum(full) < 0:
        full = -full
    m = kernel.value(full[1:-1])[1]
    full /= m ** (1.0 / p)

    if float(np.max(np.abs(kernel.a22q - 1.0))) < 1e-14:
        mu_plain = mu1
    else:
        ident = _IdentityA22()
        mu_plain = cross_section_ground_state(nx2, ident, p, opts).mu1
    poincare_cp = mu_plain ** (-1.0 / p)

    slope = np.diff(full) / kernel.h
    w_prime_q = np.repeat(slope[:, None], kernel.g.size, axis=1)
    return CrossSectionResult(mu1, full, kernel.x2, p, w_prime_q,
                              poincare_cp, iterations=iters, residual=res)


class _IdentityA22:
    """Minimal stand-in coefficient object for the plain 1D problem."""

    def a22(self, x2):
        return np.ones_like(np.asarray(x2, dtype=float))
