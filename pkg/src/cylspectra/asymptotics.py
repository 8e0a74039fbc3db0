"""Length sweeps and the derived spectral diagnostics.

Everything the long-cylinder story needs: per-length sweeps of the four
eigenvalue problems, half-cylinder ladders with geometric-tail
extrapolation of the semi-infinite values, slab decay fits, the
cross-section gap integral and its sign test, exponential test-function
bounds, second-eigenvalue upper bounds from disjoint half supports,
pointwise Picone residuals, end-mass splits and end-profile distances.

Sign conventions.  The PLUS half-cylinder problem on (0, ell) has its
natural (no-flux) boundary at its left edge and extends rightward --
exactly the geometry seen from the *left* end of a full cylinder.  All
plus-labelled derived quantities (`d_plus`, `n_plus`, the PLUS side of
`translate_distance`) therefore refer to the left end of the full
cylinder, and minus-labelled ones to the right end.  Reflecting the
coefficients (a12 -> -a12) swaps the two labels exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import discretization as disc
from .discretization import DiscreteField, QuadratureRule
from .eigensolve import (CrossSectionResult, Side, SolveOptions,
                         cross_section_ground_state, half_cylinder_eigen,
                         linear_spectrum, minimize_rayleigh)
from .errors import ConfigurationError, DimensionMismatchError
from .mesh import BC, DomainSpec, Shape, SlabProfile, build_mesh, slab_integrals


@dataclass
class DecayFit:
    """Geometric decay ratio fitted to a slab energy profile."""

    alpha_hat: float
    r_squared: float
    window: tuple
    no_decay: bool = False


@dataclass
class NuEstimate:
    """Half-cylinder ladder and its extrapolated semi-infinite limit."""

    side: Side
    ladder: list          # (ell, lambda_tilde) pairs
    last_value: float
    extrapolated: float
    monotone_ok: bool


@dataclass
class EndMassSplit:
    """p-mass and energy shares of the two cylinder halves (split at x1=0).

    `d_plus`/`n_plus` belong to the left end (the end the PLUS half-cylinder
    problem models), `d_minus`/`n_minus` to the right end.
    """

    d_plus: float
    d_minus: float
    n_plus: float
    n_minus: float


@dataclass
class GapIntegral:
    """Signed cross-section gap integral and the a12.W' != 0 trigger."""

    value: float
    a12_gradw_vanishes: bool


@dataclass
class SweepRow:
    ell: float
    p: float
    family: str
    lambda_mixed: float
    lambda_dirichlet: float
    lambda_half_plus: float
    lambda_half_minus: float
    mu1: float
    gap: float
    alpha_hat: float
    d_plus: float
    d_minus: float
    n_plus: float
    n_minus: float
    iterations: int
    residual: float
    converged: bool


@dataclass
class SweepTable:
    rows: list = field(default_factory=list)

    def column(self, name):
        return np.array([getattr(r, name) for r in self.rows])


def _first_eigen(mesh, coeffs, p, opts, quad, cross=None):
    if p == 2:
        return linear_spectrum(mesh, coeffs, 1, opts, quad)[0]
    return minimize_rayleigh(mesh, coeffs, p, opts, quad, cross=cross)


def sweep_lambda(ells, family_coeffs, p, resolution, opts=None,
                 quad=None) -> SweepTable:
    """Solve all four problems per length and fill the derived columns.

    For each ell: the mixed and all-Dirichlet full-cylinder problems plus
    both half-cylinder problems, all at the same cross resolution, together
    with the cross-section value, the gap, the decay fit of the mixed
    minimizer and its end-mass split.  Rows are independent; non-converged
    solves are flagged in the row and the sweep continues.
    """
    ells = list(ells)
    if any(b <= a for a, b in zip(ells, ells[1:])):
        raise ConfigurationError("ells must be strictly increasing")
    opts = opts or SolveOptions()
    quad = quad or QuadratureRule()
    nx2, cpu = resolution
    cross = cross_section_ground_state(nx2, family_coeffs, p)
    table = SweepTable()
    for ell in ells:
        mesh_m = build_mesh(DomainSpec(Shape.FULL_CYLINDER, ell, BC.MIXED, cpu, nx2))
        mesh_d = build_mesh(DomainSpec(Shape.FULL_CYLINDER, ell, BC.DIRICHLET_ALL, cpu, nx2))
        r_m = _first_eigen(mesh_m, family_coeffs, p, opts, quad, cross)
        r_d = _first_eigen(mesh_d, family_coeffs, p, opts, quad, cross)
        r_p = half_cylinder_eigen(Side.PLUS, ell, resolution, family_coeffs, p, opts, quad)
        r_mi = half_cylinder_eigen(Side.MINUS, ell, resolution, family_coeffs, p, opts, quad)

        profile = slab_integrals(mesh_m, family_coeffs, r_m.field, p, quad)
        alpha = _sweep_alpha(profile, ell)
        split = end_mass_split(r_m.field, mesh_m, family_coeffs, p, quad)
        conv = all(r.converged for r in (r_m, r_d, r_p, r_mi))
        table.rows.append(SweepRow(
            ell=float(ell), p=float(p), family=family_coeffs.label,
            lambda_mixed=r_m.lam, lambda_dirichlet=r_d.lam,
            lambda_half_plus=r_p.lam, lambda_half_minus=r_mi.lam,
            mu1=cross.mu1, gap=cross.mu1 - r_m.lam, alpha_hat=alpha,
            d_plus=split.d_plus, d_minus=split.d_minus,
            n_plus=split.n_plus, n_minus=split.n_minus,
            iterations=r_m.iterations, residual=r_m.final_residual,
            converged=conv))
    return table


def _sweep_alpha(profile, ell):
    """Decay ratio for a sweep row; nan when the cylinder is too short."""
    for window in (default_window(ell), (1, len(profile) // 2 - 1)):
        try:
            return fit_decay(profile, window, oriented=True).alpha_hat
        except ConfigurationError:
            continue
    return float("nan")


def nu_infinity_estimate(side, family_coeffs, p, ell_ladder, resolution,
                         opts=None, quad=None, monotone_slack=1e-7) -> NuEstimate:
    """Half-cylinder ladder along increasing lengths with tail extrapolation.

    The limit is estimated by fitting a geometric tail through the last
    three rungs (Aitken delta-squared).  If the ladder fails the expected
    monotone decrease beyond `monotone_slack`, or the tail is not
    geometric-decreasing, the last rung is reported as the estimate.
    """
    ladder_ells = list(ell_ladder)
    if len(ladder_ells) < 3:
        raise ConfigurationError("need a ladder of at least 3 lengths")
    if any(b <= a for a, b in zip(ladder_ells, ladder_ells[1:])):
        raise ConfigurationError("ladder lengths must be strictly increasing")
    opts = opts or SolveOptions()
    values = []
    for ell in ladder_ells:
        r = half_cylinder_eigen(side, ell, resolution, family_coeffs, p, opts, quad)
        values.append(r.lam)
    diffs = np.diff(values)
    monotone_ok = bool(np.all(diffs <= monotone_slack))
    last = values[-1]
    extrapolated = last
    if monotone_ok:
        d1, d2 = values[-2] - values[-3], values[-1] - values[-2]
        denom = d2 - d1
        # geometric-decreasing tail: both steps down, ratio in (0, 1)
        if d1 < 0.0 and d2 < 0.0 and denom > 0.0 and d2 / d1 < 1.0:
            extrapolated = last - d2 * d2 / denom
    return NuEstimate(side, list(zip(ladder_ells, values)), last,
                      extrapolated, monotone_ok)


def default_window(ell):
    """Interior slab window [2, ell-2] from the dominant end."""
    return (2, int(np.floor(ell)) - 2)


def orient_profile(profile: SlabProfile) -> SlabProfile:
    """Reorder slabs so index 0 sits at the dominant (heavier) end."""
    k = max(1, len(profile) // 4)
    left = profile.p_mass[:k].sum()
    right = profile.p_mass[-k:].sum()
    if right > left:
        return SlabProfile(profile.edges, profile.grad_energy[::-1],
                           profile.p_mass[::-1], profile.a_energy[::-1])
    return profile


def fit_decay(profile, window, oriented=False) -> DecayFit:
    """Least-squares geometric fit of the slab gradient energies.

    Fits log(grad_energy) against the slab index from the dominant end over
    `window` = (first, last) inclusive; `alpha_hat` is exp(slope).  A flat
    profile comes back with alpha_hat = 1 and the `no_decay` flag.
    """
    if oriented:
        profile = orient_profile(profile)
    lo, hi = window
    hi = min(hi, len(profile) - 1)
    idx = np.arange(lo, hi + 1)
    if idx.size < 3:
        raise ConfigurationError("decay window must contain at least 3 slabs")
    values = profile.grad_energy[idx]
    if np.any(values <= 0.0):
        raise ConfigurationError("nonpositive slab energies in the fit window")
    logs = np.log(values)
    slope, intercept = np.polyfit(idx, logs, 1)
    fitted = slope * idx + intercept
    ss_res = float(np.sum((logs - fitted) ** 2))
    ss_tot = float(np.sum((logs - logs.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else max(0.0, 1.0 - ss_res / ss_tot)
    alpha = float(np.exp(slope))
    return DecayFit(alpha_hat=alpha, r_squared=r2, window=(lo, hi),
                    no_decay=alpha > 0.999)


def gap_integral_I2(cross: CrossSectionResult, coeffs, p,
                    zero_tol=1e-10) -> GapIntegral:
    """Signed cross-section integral deciding the gap side.

    Computes  integral |a22 W'^2|^{(p-2)/2} (a12 W') W  over the section by
    the 1D quadrature of the ground state, and reports whether a12 W' is
    identically zero within tolerance (the trigger separating the gap and
    no-gap regimes).
    """
    g, wq = _gauss_1d_of(cross)
    x2q = cross.x2_nodes[:-1, None] + (g[None, :] + 1.0) * (
        (cross.x2_nodes[1] - cross.x2_nodes[0]) / 2.0)
    a12q = coeffs.a12(x2q)
    a22q = coeffs.a22(x2q)
    wq_vals = _w_at_quadrature(cross, g)
    wp = cross.w_prime_q
    weight = np.abs(a22q * wp ** 2) ** ((p - 2.0) / 2.0)
    integrand = weight * (a12q * wp) * wq_vals
    value = float(np.sum(integrand * wq[None, :]))
    scale = float(np.max(np.abs(a12q * wp))) if a12q.size else 0.0
    ref = float(np.max(np.abs(wp))) * max(1.0, float(np.max(np.abs(a12q))))
    vanishes = scale <= zero_tol * max(1.0, ref)
    return GapIntegral(value, vanishes)


def _gauss_1d_of(cross):
    from .eigensolve import _gauss_1d
    g, w = _gauss_1d()
    h = cross.x2_nodes[1] - cross.x2_nodes[0]
    return g, w * (h / 2.0)


def _w_at_quadrature(cross, g):
    n0 = (1.0 - g) / 2.0
    n1 = (1.0 + g) / 2.0
    w = cross.w_nodes
    return w[:-1, None] * n0[None, :] + w[1:, None] * n1[None, :]


def exp_test_upper_bound(eps, cross: CrossSectionResult, coeffs, p,
                         truncation) -> float:
    """Rayleigh quotient of the exponentially decaying lifted test function.

    The test function exp(-eps x1) W(x2) on (0, truncation) x omega is
    integrated by tensor quadrature (unit axial panels, 3-point Gauss).
    The value upper-bounds the semi-infinite infimum and tends to the
    cross-section value as eps -> 0.
    """
    if eps <= 0.0:
        raise ConfigurationError("eps must be positive")
    if truncation < 10.0 / eps:
        raise ConfigurationError(
            f"truncation {truncation} too small: the neglected tail would "
            f"dominate, need at least {10.0 / eps}")
    g, wq = _gauss_1d_of(cross)
    x2q = cross.x2_nodes[:-1, None] + (g[None, :] + 1.0) * (
        (cross.x2_nodes[1] - cross.x2_nodes[0]) / 2.0)
    a11q = coeffs.a11(x2q)
    a12q = coeffs.a12(x2q)
    a22q = coeffs.a22(x2q)
    wv = _w_at_quadrature(cross, g)
    wp = cross.w_prime_q

    # cross-section density of |A grad v . grad v| at unit axial factor
    q_sec = (eps ** 2 * a11q * wv ** 2
             - 2.0 * eps * a12q * wp * wv
             + a22q * wp ** 2)
    sec_energy = float(np.sum(np.abs(q_sec) ** (p / 2.0) * wq[None, :]))
    sec_mass = float(np.sum(np.abs(wv) ** p * wq[None, :]))

    # axial quadrature of exp(-p eps x1) over unit panels
    n_panels = int(np.ceil(truncation))
    edges = np.linspace(0.0, truncation, n_panels + 1)
    ga, wa = np.polynomial.legendre.leggauss(3)
    mid = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * np.diff(edges)
    x1q = mid[:, None] + half[:, None] * ga[None, :]
    w1 = half[:, None] * wa[None, :]
    axial = float(np.sum(np.exp(-p * eps * x1q) * w1))
    return (axial * sec_energy) / (axial * sec_mass)


def slab_bound(cross: CrossSectionResult, coeffs, p, variant="squared"):
    """Cross-section upper-bound integral from the slab construction.

    `variant` 'as_printed' uses  a22 W'^2 - (a12 W')/a11  inside the p/2
    power; 'squared' uses  a22 W'^2 - (a12 W')^2/a11.  Negative integrand
    values are clamped at zero before the power; the number of clamped
    quadrature points is returned alongside the value.
    """
    if variant not in ("as_printed", "squared"):
        raise ConfigurationError(f"unknown slab-bound variant {variant!r}")
    g, wq = _gauss_1d_of(cross)
    x2q = cross.x2_nodes[:-1, None] + (g[None, :] + 1.0) * (
        (cross.x2_nodes[1] - cross.x2_nodes[0]) / 2.0)
    a11q = coeffs.a11(x2q)
    a12q = coeffs.a12(x2q)
    a22q = coeffs.a22(x2q)
    wp = cross.w_prime_q
    base = a22q * wp ** 2
    cross_term = a12q * wp
    if variant == "as_printed":
        integrand = base - cross_term / a11q
    else:
        integrand = base - cross_term ** 2 / a11q
    clamped = int(np.count_nonzero(integrand < 0.0))
    integrand = np.clip(integrand, 0.0, None)
    value = float(np.sum(integrand ** (p / 2.0) * wq[None, :]))
    return value, clamped


def beta2_upper_bound(ell, resolution, coeffs, p, opts=None, quad=None) -> float:
    """Upper bound for the second min-max eigenvalue from disjoint supports.

    Two half-cylinder solves; functions supported on the two halves have
    disjoint support, so the larger of the two first eigenvalues bounds the
    second min-max value of the full cylinder.
    """
    opts = opts or SolveOptions()
    rp = half_cylinder_eigen(Side.PLUS, ell, resolution, coeffs, p, opts, quad)
    rm = half_cylinder_eigen(Side.MINUS, ell, resolution, coeffs, p, opts, quad)
    return max(rp.lam, rm.lam)


def picone_residual_min(u: DiscreteField, cross: CrossSectionResult, mesh,
                        coeffs, p, w_floor=None, quad=None) -> float:
    """Minimum of the pointwise Picone residual against the lifted state.

    R(u, v) = |A grad u . grad u|^{p/2}
              - |A grad v . grad v|^{(p-2)/2} A grad v . grad(u^p / v^{p-1})
    with v the axial lift of the cross-section ground state, evaluated at
    quadrature points where v exceeds `w_floor` (default 1e-3 max W; the
    ratio u^p / v^{p-1} is unstable where v vanishes at the walls).  The
    returned minimum is normalized by the local energy scale, so the
    theoretical bound reads  min >= -1e-10.  Requires u >= 0.
    """
    quad = quad or QuadratureRule()
    if mesh.n_cells2 != cross.n_cells:
        raise DimensionMismatchError(
            "mesh cross resolution does not match the 1D ground state")
    grid = mesh.expand(u.values)
    umax = float(np.max(np.abs(grid))) or 1.0
    if float(np.min(grid)) < -1e-12 * umax:
        raise ConfigurationError(
            "Picone residual requires a nonnegative field")
    grid = np.clip(grid, 0.0, None)
    if w_floor is None:
        w_floor = 1e-3 * float(np.max(cross.w_nodes))

    cells = disc._cells(mesh, quad)
    gu1 = disc._gather(grid, cells.dN_dx1)
    gu2 = disc._gather(grid, cells.dN_dx2)
    uq = disc._gather(grid, cells.N)

    # the lift is x1-independent: per (cross cell, eta point) values
    from .eigensolve import _gauss_1d
    geta, _ = _gauss_1d(quad.points_per_dir)
    n0 = (1.0 - geta) / 2.0
    n1 = (1.0 + geta) / 2.0
    wn = cross.w_nodes
    vq_sec = wn[:-1, None] * n0[None, :] + wn[1:, None] * n1[None, :]
    vp_sec = cross.w_slope[:, None] * np.ones_like(vq_sec)
    vq = np.broadcast_to(vq_sec[None, :, None, :], uq.shape)
    gv2 = np.broadcast_to(vp_sec[None, :, None, :], uq.shape)

    a11, a12, a22 = disc._coeff_arrays(mesh, coeffs, cells)
    qu = np.abs(a11 * gu1 ** 2 + 2 * a12 * gu1 * gu2 + a22 * gu2 ** 2)
    qv = np.abs(a22 * gv2 ** 2)  # grad v = (0, W')
    term1 = qu ** (p / 2.0)

    valid = vq > w_floor
    ratio = np.where(valid, uq / np.where(valid, vq, 1.0), 0.0)
    # grad(u^p / v^{p-1}) = p (u/v)^{p-1} grad u - (p-1) (u/v)^p grad v
    h1 = p * ratio ** (p - 1.0) * gu1
    h2 = p * ratio ** (p - 1.0) * gu2 - (p - 1.0) * ratio ** p * gv2
    # A grad v = (a12 W', a22 W')
    adv_dot = a12 * gv2 * h1 + a22 * gv2 * h2
    term2 = qv ** ((p - 2.0) / 2.0) * adv_dot
    residual = term1 - term2
    scale = np.maximum(term1, np.abs(term2)) + 1e-300
    rel = np.where(valid, residual / scale, np.inf)
    return float(np.min(rel))


def end_mass_split(u: DiscreteField, mesh, coeffs, p, quad=None) -> EndMassSplit:
    """Split the p-mass and energy of a full-cylinder field at x1 = 0.

    Plus labels the left end (whose boundary layer the PLUS half-cylinder
    problem models), minus the right end; `d_plus + d_minus` recovers the
    total p-mass and `n_plus + n_minus` the total energy.
    """
    if mesh.spec.shape is not Shape.FULL_CYLINDER:
        raise ConfigurationError("end-mass split expects a full cylinder")
    quad = quad or QuadratureRule()
    grid = mesh.expand(u.values)
    per_cell = disc.cell_integrals(mesh, coeffs, grid, p, quad)
    centers = 0.5 * (mesh.x1[:-1] + mesh.x1[1:])
    left = centers < 0.0
    mass = per_cell["p_mass"]
    ener = per_cell["a_energy"]
    return EndMassSplit(
        d_plus=float(mass[left].sum()), d_minus=float(mass[~left].sum()),
        n_plus=float(ener[left].sum()), n_minus=float(ener[~left].sum()))


def translate_distance(u_full: DiscreteField, u_half: DiscreteField, side,
                       r, p, quad=None) -> float:
    """L^p distance between an end profile and the half-cylinder minimizer.

    Both fields are restricted to the axial slab of width `r` at the end
    `side` models (PLUS: the end with outward normal -x1, i.e. the left
    edge of each domain; MINUS: the right edge), aligned in sign, and the
    difference integrated in L^p on the common local coordinates.
    """
    quad = quad or QuadratureRule()
    mesh_f, mesh_h = u_full.mesh, u_half.mesh
    if mesh_f.n_cells2 != mesh_h.n_cells2 or not np.allclose(
            mesh_f.x2, mesh_h.x2, atol=1e-12):
        raise DimensionMismatchError("cross resolutions differ")
    if abs(mesh_f.h1 - mesh_h.h1) > 1e-12:
        raise DimensionMismatchError("axial resolutions differ")
    n_cells = int(round(r / mesh_f.h1))
    if abs(n_cells * mesh_f.h1 - r) > 1e-9 or n_cells < 1:
        raise DimensionMismatchError("r must be a whole number of axial cells")
    if n_cells > mesh_f.n_cells1 or n_cells > mesh_h.n_cells1:
        raise DimensionMismatchError("r exceeds a domain length")

    side = side if isinstance(side, Side) else Side(side)
    grid_f = mesh_f.expand(u_full.values)
    grid_h = mesh_h.expand(u_half.values)
    if side is Side.PLUS:
        sl_f = grid_f[:n_cells + 1, :]
        sl_h = grid_h[:n_cells + 1, :]
    else:
        sl_f = grid_f[-(n_cells + 1):, :]
        sl_h = grid_h[-(n_cells + 1):, :]
    if float(np.sum(sl_f * sl_h)) < 0.0:
        sl_h = -sl_h
    return _lp_norm_on_grid(sl_f - sl_h, mesh_f.h1, mesh_f.h2, p, quad)


def _lp_norm_on_grid(grid, h1, h2, p, quad):
    """(integral |u|^p)^(1/p) of a bilinear nodal patch with spacings h1, h2."""
    g, w = quad.nodes, quad.weights
    n00 = np.outer((1 - g) / 2, (1 - g) / 2)
    n10 = np.outer((1 + g) / 2, (1 - g) / 2)
    n11 = np.outer((1 + g) / 2, (1 + g) / 2)
    n01 = np.outer((1 - g) / 2, (1 + g) / 2)
    uq = (grid[:-1, :-1, None, None] * n00 + grid[1:, :-1, None, None] * n10
          + grid[1:, 1:, None, None] * n11 + grid[:-1, 1:, None, None] * n01)
    wq = (w[:, None] * w[None, :]) * (h1 * h2 / 4.0)
    total = float(np.einsum("ijkl,kl->", np.abs(uq) ** p, wq))
    return total ** (1.0 / p)
