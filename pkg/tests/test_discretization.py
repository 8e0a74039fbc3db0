import numpy as np
import pytest

import cylspectra as cs
from cylspectra.errors import (AdmissibilityError, QuotientUndefinedError,
                               UnsupportedExponentError)

from conftest import random_field


def fd_gradient(func, values, step=1e-6):
    out = np.zeros_like(values)
    for i in range(values.size):
        up = values.copy()
        up[i] += step
        dn = values.copy()
        dn[i] -= step
        out[i] = (func(up) - func(dn)) / (2 * step)
    return out


@pytest.mark.parametrize("p", [2.0, 2.5, 3.0, 4.0])
def test_energy_gradient_matches_fd(p, small_mixed_mesh, offdiag_field):
    mesh = small_mixed_mesh
    for seed in range(5):
        u = random_field(mesh, seed)
        grad = cs.energy_gradient(mesh, offdiag_field, u, p)
        fd = fd_gradient(
            lambda v: cs.energy(mesh, offdiag_field,
                                cs.DiscreteField(v, mesh), p), u.values)
        rel = np.max(np.abs(fd - grad)) / np.max(np.abs(grad))
        assert rel < 1e-6


@pytest.mark.parametrize("p", [2.0, 2.5, 3.0, 4.0])
def test_mass_gradient_matches_fd(p, small_mixed_mesh):
    mesh = small_mixed_mesh
    for seed in range(5):
        u = random_field(mesh, 100 + seed)
        _, grad = cs.p_mass(mesh, u, p)
        fd = fd_gradient(
            lambda v: cs.p_mass(mesh, cs.DiscreteField(v, mesh), p)[0],
            u.values)
        rel = np.max(np.abs(fd - grad)) / np.max(np.abs(grad))
        assert rel < 1e-6


def test_zero_field(small_mixed_mesh, identity_field):
    mesh = small_mixed_mesh
    zero = cs.DiscreteField(np.zeros(mesh.n_free), mesh)
    assert cs.energy(mesh, identity_field, zero, 3.0) == 0.0
    assert np.all(cs.energy_gradient(mesh, identity_field, zero, 3.0) == 0.0)
    value, grad = cs.p_mass(mesh, zero, 3.0)
    assert value == 0.0 and np.all(grad == 0.0)
    with pytest.raises(QuotientUndefinedError):
        cs.rayleigh(mesh, identity_field, zero, 3.0)


def test_p_below_two_rejected(small_mixed_mesh, identity_field):
    u = random_field(small_mixed_mesh, 0)
    with pytest.raises(UnsupportedExponentError):
        cs.energy(small_mixed_mesh, identity_field, u, 1.5)
    with pytest.raises(UnsupportedExponentError):
        cs.p_mass(small_mixed_mesh, u, 1.9)


def test_homogeneity_exact_for_dyadic_scaling(small_mixed_mesh, offdiag_field):
    mesh = small_mixed_mesh
    u = random_field(mesh, 11)
    doubled = cs.DiscreteField(2.0 * u.values, mesh)
    for p in (2.0, 3.0, 4.0):
        assert cs.energy(mesh, offdiag_field, doubled, p) == \
            2.0 ** p * cs.energy(mesh, offdiag_field, u, p)
        assert cs.p_mass(mesh, doubled, p)[0] == 2.0 ** p * cs.p_mass(mesh, u, p)[0]
    # non-dyadic exponent: near machine precision
    e1 = cs.energy(mesh, offdiag_field, doubled, 2.5)
    e0 = cs.energy(mesh, offdiag_field, u, 2.5)
    assert e1 == pytest.approx(2.0 ** 2.5 * e0, rel=1e-13)


def test_rayleigh_scale_invariance(small_mixed_mesh, offdiag_field):
    mesh = small_mixed_mesh
    u = random_field(mesh, 5)
    scaled = cs.DiscreteField(-3.7 * u.values, mesh)
    r0 = cs.rayleigh(mesh, offdiag_field, u, 3.0)
    r1 = cs.rayleigh(mesh, offdiag_field, scaled, 3.0)
    assert r1 == pytest.approx(r0, rel=1e-12)


def test_p2_duality(small_mixed_mesh, offdiag_field):
    mesh = small_mixed_mesh
    pair = cs.assemble_p2(mesh, offdiag_field)
    K, M = pair.stiffness, pair.mass
    assert abs(K - K.T).max() < 1e-14
    assert abs(M - M.T).max() < 1e-14
    for seed in range(3):
        u = random_field(mesh, 40 + seed)
        uKu = float(u.values @ (K @ u.values))
        uMu = float(u.values @ (M @ u.values))
        assert uKu == pytest.approx(
            cs.energy(mesh, offdiag_field, u, 2.0), rel=1e-12)
        assert uMu == pytest.approx(cs.p_mass(mesh, u, 2.0)[0], rel=1e-12)
        grad = cs.energy_gradient(mesh, offdiag_field, u, 2.0)
        assert np.allclose(grad, 2.0 * (K @ u.values), rtol=1e-12, atol=1e-14)


def test_mass_matrix_positive_definite(small_mixed_mesh, identity_field):
    pair = cs.assemble_p2(small_mixed_mesh, identity_field)
    import scipy.sparse.linalg as spla
    smallest = spla.eigsh(pair.mass, k=1, which="SA",
                          return_eigenvectors=False)
    assert smallest[0] > 0


def test_lift_rayleigh_is_cross_value(identity_field):
    mesh = cs.build_mesh(
        cs.DomainSpec(cs.Shape.FULL_CYLINDER, 2, cs.BC.MIXED, 4, 32))
    for p in (2.0, 3.0):
        cross = cs.cross_section_ground_state(32, identity_field, p)
        lift = cs.lift_cross_section(cross, mesh)
        assert cs.p_mass(mesh, lift, p)[0] == pytest.approx(1.0, abs=1e-12)
        assert cs.rayleigh(mesh, identity_field, lift, p) == \
            pytest.approx(cross.mu1, rel=1e-12)
        grid = lift.grid()
        assert np.allclose(grid, grid[0][None, :])  # x1-independent columns


def test_lift_requires_mixed(identity_field):
    cross = cs.cross_section_ground_state(16, identity_field, 2)
    mesh = cs.build_mesh(
        cs.DomainSpec(cs.Shape.FULL_CYLINDER, 2, cs.BC.DIRICHLET_ALL, 4, 16))
    with pytest.raises(AdmissibilityError):
        cs.lift_cross_section(cross, mesh)


def test_separated_dirichlet_mode(identity_field):
    # first Dirichlet eigenvalue on (-2,2)x(-1/2,1/2): pi^2 + (pi/4)^2 + O(h^2)
    mesh = cs.build_mesh(
        cs.DomainSpec(cs.Shape.FULL_CYLINDER, 2, cs.BC.DIRICHLET_ALL, 8, 32))
    pair = cs.assemble_p2(mesh, identity_field)
    import scipy.sparse.linalg as spla
    lam = spla.eigsh(pair.stiffness, k=1, M=pair.mass, sigma=0,
                     which="LM", return_eigenvectors=False)[0]
    exact = np.pi ** 2 + (np.pi / 4) ** 2
    assert lam == pytest.approx(exact, rel=2e-3)


def test_ellipticity_transfer(small_mixed_mesh, offdiag_field):
    mesh = small_mixed_mesh
    margin = offdiag_field.lambda_margin
    for p in (2.0, 3.0):
        for seed in range(3):
            u = random_field(mesh, 60 + seed)
            e = cs.energy(mesh, offdiag_field, u, p)
            plain = cs.grad_p_norm(mesh, u, p)
            assert e >= margin ** (p / 2.0) * plain * (1 - 1e-12)


def test_rayleigh_poincare_lower_bound(offdiag_field):
    # quotient >= margin^{p/2} * mu1(plain cross problem) for lateral-zero fields
    mesh = cs.build_mesh(
        cs.DomainSpec(cs.Shape.FULL_CYLINDER, 1, cs.BC.MIXED, 3, 16))
    for p in (2.0, 3.0):
        cross_plain = cs.cross_section_ground_state(
            16, cs.make_coefficients(
                cs.CoefficientFamily(cs.FamilyKind.IDENTITY)), p)
        bound = offdiag_field.lambda_margin ** (p / 2.0) * \
            cross_plain.poincare_cp ** (-p)
        for seed in range(4):
            u = random_field(mesh, 80 + seed)
            assert cs.rayleigh(mesh, offdiag_field, u, p) >= bound * (1 - 1e-10)


def test_quadrature_rule_validation():
    with pytest.raises(ValueError):
        cs.QuadratureRule(points_per_dir=4)
    rule = cs.QuadratureRule(points_per_dir=2)
    assert rule.weights.sum() == pytest.approx(2.0)


@pytest.mark.parametrize("n", [2, 3])
def test_quadrature_polynomial_exactness(n):
    # exact up to degree 2n-1 on [-1, 1]
    rule = cs.QuadratureRule(points_per_dir=n)
    for degree in range(2 * n):
        exact = 0.0 if degree % 2 else 2.0 / (degree + 1)
        approx = float(np.sum(rule.weights * rule.nodes ** degree))
        assert approx == pytest.approx(exact, abs=1e-14)
