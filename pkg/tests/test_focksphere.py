import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from kepler2d.eigenstates import MomentumPoint, QuantumNumbers
from kepler2d.errors import DomainError
from kepler2d.focksphere import (
    SpherePoint,
    area_jacobian_check,
    chi_from_phi,
    chi_identification_error,
    chord_identity_check,
    generator_action,
    generator_convergence,
    kernel_eigensolve,
    kernel_matrix,
    project,
    project_arrays,
    rotation_generator_check,
    unproject,
    unproject_arrays,
)

RNG = np.random.default_rng(1234)


def test_project_examples():
    u = project(MomentumPoint(0.0, 0.0), 2.0)
    assert (u.ux, u.uy, u.uz) == (0.0, 0.0, -1.0)
    u = project(MomentumPoint(0.7, 0.0), 0.7)
    assert_allclose(u.as_array(), [1.0, 0.0, 0.0], atol=1e-15)
    u = project(MomentumPoint(3e8, -4e8), 0.5)
    assert u.uz > 1 - 1e-15


def test_unproject_examples():
    k = unproject(SpherePoint(0.0, 0.0, -1.0), 1.3)
    assert k.q == 0.0
    k = unproject(SpherePoint(1.0, 0.0, 0.0), 1.3)
    assert_allclose([k.qx, k.qy], [1.3, 0.0], atol=1e-15)
    with pytest.raises(DomainError):
        unproject(SpherePoint(0.0, 0.0, 1.0), 1.0)


def test_round_trip():
    v = RNG.normal(size=(1000, 3))
    v /= np.linalg.norm(v, axis=1)[:, None]
    v = v[v[:, 2] < 0.99]
    q0 = 0.8
    back = np.array(project_arrays(*unproject_arrays(v[:, 0], v[:, 1], v[:, 2], q0), q0)).T
    assert np.max(np.abs(back - v)) < 1e-12


def test_unproject_modulus():
    u = SpherePoint.from_angles(1.1, 0.4)
    k = unproject(u, 0.6)
    assert_allclose(k.q, 0.6 * math.sqrt((1 + u.uz) / (1 - u.uz)), rtol=1e-14)
    assert_allclose(k.phi_q, 0.4, rtol=1e-14)


def test_sphere_point_validation():
    with pytest.raises(DomainError):
        SpherePoint(1.0, 1.0, 0.0)


def test_chord_examples():
    q0 = 1.7
    assert chord_identity_check(MomentumPoint(0.3, 0.2), MomentumPoint(0.3, 0.2), q0).lhs == 0.0
    r = chord_identity_check(MomentumPoint(0.0, 0.0), MomentumPoint(q0, 0.0), q0)
    assert_allclose([r.lhs, r.rhs], [math.sqrt(2)] * 2, rtol=1e-15)


def test_chord_random_pairs():
    q0 = 0.4
    ks = RNG.normal(scale=2.0, size=(1000, 4))
    worst = max(chord_identity_check(MomentumPoint(a, b), MomentumPoint(c, d), q0).abs_error
                for a, b, c, d in ks)
    assert worst < 1e-12


def test_area_jacobian():
    for qx, qy in RNG.normal(size=(50, 2)):
        assert area_jacobian_check(MomentumPoint(qx, qy), 0.9).passed


def test_chi_examples():
    u = SpherePoint.from_angles(0.9, 2.0)
    assert_allclose(chi_from_phi(QuantumNumbers(0, 0), u), math.sqrt(math.pi), rtol=1e-14)
    pole_value = 2 * math.pi * math.sqrt(3 / (4 * math.pi))
    for theta in (1e-2, 1e-3):
        near_pole = SpherePoint.from_angles(theta, 0.3)
        assert_allclose(chi_from_phi(QuantumNumbers(1, 0), near_pole), pole_value * math.cos(theta), rtol=1e-9)
    assert chi_identification_error(QuantumNumbers(2, 1)) < 1e-10


def test_kernel_matrix_constant_row_sums():
    from kepler2d.quadrature import sphere_grid
    order, q0 = 10, 1.0
    mat = kernel_matrix(order, q0)
    w = sphere_grid(order).weights
    assert_allclose(mat, mat.T, atol=0)
    # M sqrt(w) = (4 pi / 2 pi q0) sqrt(w): the constant is an exact eigenvector.
    assert_allclose(mat @ np.sqrt(w), 2.0 / q0 * np.sqrt(w), rtol=1e-12)


@pytest.mark.parametrize("n,order", [(0, 20), (1, 20), (2, 30)])
def test_kernel_shell_cluster_at_one(n, order):
    spectrum = kernel_eigensolve(order, 1.0 / (n + 0.5), lmax_report=n)
    assert spectrum.multiplicities[n] == 2 * n + 1
    assert abs(spectrum.cluster_values[n] - 1.0) < 1e-3
    if n == 0:
        assert abs(spectrum.eigenvalues[0] - 1.0) < 1e-12


def test_kernel_clusters_order_30():
    spectrum = kernel_eigensolve(30, 0.73)
    assert spectrum.multiplicities == [1, 3, 5, 7, 9]
    assert spectrum.clusters_ok()
    d = spectrum.to_dict(25)
    assert len(d["eigenvalues"]) == 25 and d["clusters"][2]["multiplicity"] == 5


def test_kernel_order_too_small():
    with pytest.raises(DomainError):
        kernel_eigensolve(3, 1.0, lmax_report=4)


def test_generator_n0_vanishes():
    for qx, qy in [(0.1, 0.0), (1.3, -0.4), (5.0, 2.0)]:
        assert abs(generator_action(QuantumNumbers(0, 0), MomentumPoint(qx, qy))) < 1e-6
        assert abs(generator_action(QuantumNumbers(0, 0), MomentumPoint(qx, qy), "y")) < 1e-6


@pytest.mark.parametrize("n,m", [(1, 0), (1, 1), (2, -1), (2, 2)])
@pytest.mark.parametrize("axis", ["x", "y"])
def test_generator_second_order(n, m, axis):
    res = generator_convergence(QuantumNumbers(n, m), MomentumPoint(0.37, 0.21), axis=axis)
    assert not res.exact
    assert abs(res.slope - 2.0) < 0.1
    ratio = res.residuals[0] / res.residuals[1]
    assert 3.6 < ratio < 4.4


def test_generator_alpha_domain():
    with pytest.raises(DomainError):
        rotation_generator_check(QuantumNumbers(1, 0), MomentumPoint(0.3, 0.1), 0.1)
