"""Stereographic (Fock) projection of the momentum plane onto the unit sphere.

The momentum ``q`` maps to

    u = (2 q0 qx, 2 q0 qy, q**2 - q0**2) / (q**2 + q0**2)

so ``q = 0`` is the south pole and ``|q| -> inf`` the north pole.  On the
sphere the momentum-space Schroedinger equation becomes the integral
equation ``chi(u) = (2 pi q0)^-1 int chi(u') / |u - u'| dOmega'``; this
module discretises that kernel, checks the sphere-side wavefunction against
spherical harmonics and checks the rotation generators.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .eigenstates import MomentumPoint, QuantumNumbers, phi_momentum
from .errors import DomainError, SingularNodeError
from .quadrature import sphere_grid
from .reports import VerificationReport
from .specfun import spherical_harmonic

DEFAULT_GRID_ORDER = 30
DEFAULT_CLUSTER_TOL = 1e-3


@dataclass(frozen=True)
class SpherePoint:
    ux: float
    uy: float
    uz: float

    def __post_init__(self):
        if abs(self.ux ** 2 + self.uy ** 2 + self.uz ** 2 - 1.0) > 1e-12:
            raise DomainError("sphere point is not on the unit sphere")

    @classmethod
    def from_angles(cls, theta: float, phi: float) -> "SpherePoint":
        st = math.sin(theta)
        return cls(st * math.cos(phi), st * math.sin(phi), math.cos(theta))

    @property
    def theta(self) -> float:
        return math.atan2(math.hypot(self.ux, self.uy), self.uz)

    @property
    def phi(self) -> float:
        return math.atan2(self.uy, self.ux)

    def as_array(self) -> np.ndarray:
        return np.array([self.ux, self.uy, self.uz])


def project_arrays(qx, qy, q0: float):
    """Vectorised stereographic map; returns ``(ux, uy, uz)``."""
    if q0 <= 0:
        raise DomainError("q0 must be positive")
    qx = np.asarray(qx, dtype=float)
    qy = np.asarray(qy, dtype=float)
    s = qx * qx + qy * qy + q0 * q0
    return 2.0 * q0 * qx / s, 2.0 * q0 * qy / s, (qx * qx + qy * qy - q0 * q0) / s


def unproject_arrays(ux, uy, uz, q0: float):
    """Inverse of :func:`project_arrays`; ``q = q0 (ux, uy) / (1 - uz)``."""
    if q0 <= 0:
        raise DomainError("q0 must be positive")
    uz = np.asarray(uz, dtype=float)
    if np.any(uz >= 1.0):
        raise DomainError("the north pole corresponds to infinite momentum")
    den = 1.0 - uz
    return q0 * np.asarray(ux) / den, q0 * np.asarray(uy) / den


def project(k: MomentumPoint, q0: float) -> SpherePoint:
    ux, uy, uz = project_arrays(k.qx, k.qy, q0)
    # Renormalise away the last-ulp drift so the point validates.
    r = math.sqrt(float(ux) ** 2 + float(uy) ** 2 + float(uz) ** 2)
    return SpherePoint(float(ux) / r, float(uy) / r, float(uz) / r)


def unproject(u: SpherePoint, q0: float) -> MomentumPoint:
    qx, qy = unproject_arrays(u.ux, u.uy, u.uz, q0)
    return MomentumPoint(float(qx), float(qy))


def chord_identity_check(k1: MomentumPoint, k2: MomentumPoint, q0: float,
                         tol: float = 1e-12) -> VerificationReport:
    """Chord length on the sphere versus its momentum-space expression."""
    u1 = np.array(project_arrays(k1.qx, k1.qy, q0))
    u2 = np.array(project_arrays(k2.qx, k2.qy, q0))
    lhs = float(np.linalg.norm(u1 - u2))
    dq = math.hypot(k1.qx - k2.qx, k1.qy - k2.qy)
    rhs = 2.0 * q0 * dq / math.sqrt((k1.q ** 2 + q0 ** 2) * (k2.q ** 2 + q0 ** 2))
    return VerificationReport.compare("chord", lhs, rhs, tol)


def area_jacobian_check(k: MomentumPoint, q0: float, tol: float = 1e-8) -> VerificationReport:
    """Numerical surface Jacobian of the projection versus ``(2 q0 / (q^2 + q0^2))^2``."""
    h = 1e-5 * (k.q + q0)
    dx = (np.array(project_arrays(k.qx + h, k.qy, q0)) - np.array(project_arrays(k.qx - h, k.qy, q0))) / (2 * h)
    dy = (np.array(project_arrays(k.qx, k.qy + h, q0)) - np.array(project_arrays(k.qx, k.qy - h, q0))) / (2 * h)
    lhs = float(np.linalg.norm(np.cross(dx, dy)))
    rhs = (2.0 * q0 / (k.q ** 2 + q0 ** 2)) ** 2
    return VerificationReport.compare("area element", lhs, rhs, tol)


def chi_values(qn: QuantumNumbers, ux, uy, uz):
    """Sphere-side wavefunction ``chi = q0^-1/2 ((q^2 + q0^2) / (2 q0))^(3/2) Phi(q)``."""
    q0 = qn.q0
    qx, qy = unproject_arrays(ux, uy, uz, q0)
    # (q^2 + q0^2) / (2 q0) == q0 / (1 - uz)
    scale = (q0 / (1.0 - np.asarray(uz, dtype=float))) ** 1.5 / math.sqrt(q0)
    return scale * phi_momentum(qn, qx, qy)


def chi_from_phi(qn: QuantumNumbers, u: SpherePoint) -> complex:
    return complex(chi_values(qn, u.ux, u.uy, u.uz))


def chi_identification_error(qn: QuantumNumbers, n_points: int = 200, seed: int = 0) -> float:
    """Max ``|chi - 2 pi Y_n^m|`` over random points on the sphere."""
    rng = np.random.default_rng(seed)
    v = rng.normal(size=(n_points, 3))
    v /= np.linalg.norm(v, axis=1)[:, None]
    chi = chi_values(qn, v[:, 0], v[:, 1], v[:, 2])
    theta = np.arctan2(np.hypot(v[:, 0], v[:, 1]), v[:, 2])
    phi = np.arctan2(v[:, 1], v[:, 0])
    ylm = spherical_harmonic(qn.n, qn.m, theta, phi)
    return float(np.max(np.abs(chi - 2.0 * math.pi * ylm)))


@dataclass
class KernelSpectrum:
    eigenvalues: np.ndarray           # descending
    multiplicities: list
    grid_order: int
    q0: float
    cluster_values: list = field(default_factory=list)
    expected_values: list = field(default_factory=list)
    max_rel_deviation: list = field(default_factory=list)
    cluster_tol: float = DEFAULT_CLUSTER_TOL

    @property
    def lmax(self) -> int:
        return len(self.multiplicities) - 1

    def clusters_ok(self) -> bool:
        return all(mult == 2 * l + 1 and dev <= self.cluster_tol
                   for l, (mult, dev) in enumerate(zip(self.multiplicities, self.max_rel_deviation)))

    def to_dict(self, n_eigenvalues: int | None = None) -> dict:
        ev = self.eigenvalues if n_eigenvalues is None else self.eigenvalues[:n_eigenvalues]
        return {
            "grid_order": self.grid_order,
            "n_nodes": int(len(self.eigenvalues)),
            "q0": self.q0,
            "cluster_tol": self.cluster_tol,
            "clusters": [
                {"l": l, "multiplicity": int(mult), "mean": float(val), "expected": float(exp),
                 "max_rel_deviation": float(dev)}
                for l, (mult, val, exp, dev) in enumerate(zip(
                    self.multiplicities, self.cluster_values, self.expected_values,
                    self.max_rel_deviation))
            ],
            "eigenvalues": [float(e) for e in ev],
        }


def kernel_matrix(grid_order: int, q0: float) -> np.ndarray:
    """Symmetrised discretisation of ``u -> (2 pi q0)^-1 int f(u') / |u - u'| dOmega'``.

    Off-diagonal entries are ``sqrt(w_i w_j) / |u_i - u_j|``; each diagonal
    entry is chosen so the unsymmetrised row sums to exactly ``4 pi``, the
    kernel's action on a constant.
    """
    if q0 <= 0:
        raise DomainError("q0 must be positive")
    grid = sphere_grid(grid_order)
    u = grid.cartesian
    w = grid.weights
    gram = u @ u.T
    dist = np.sqrt(np.maximum(2.0 - 2.0 * gram, 0.0))
    np.fill_diagonal(dist, np.inf)
    if np.min(dist) < 1e-12:
        raise SingularNodeError("two sphere-grid nodes coincide")
    inv = 1.0 / dist
    diag = 4.0 * math.pi - inv @ w
    sw = np.sqrt(w)
    mat = sw[:, None] * inv * sw[None, :]
    np.fill_diagonal(mat, diag)
    return mat / (2.0 * math.pi * q0)


def kernel_eigensolve(grid_order: int = DEFAULT_GRID_ORDER, q0: float = 2.0, lmax_report: int = 4,
                      cluster_tol: float = DEFAULT_CLUSTER_TOL) -> KernelSpectrum:
    """Spectrum of the discretised sphere kernel, grouped into ``l`` clusters.

    The ``l``-th cluster is expected at ``2 / (q0 (2l + 1))`` with
    multiplicity ``2l + 1``; membership is decided by relative distance to
    that value (at most ``cluster_tol``).
    """
    if lmax_report < 0:
        raise DomainError("lmax_report must be >= 0")
    if grid_order < lmax_report + 1:
        raise DomainError("grid order too small to resolve the requested degrees")
    ev = np.linalg.eigvalsh(kernel_matrix(grid_order, q0))[::-1]

    mults, means, expected, devs = [], [], [], []
    start = 0
    for l in range(lmax_report + 1):
        target = 2.0 / (q0 * (2 * l + 1))
        rel = np.abs(ev / target - 1.0)
        members = rel <= cluster_tol
        mults.append(int(np.count_nonzero(members)))
        # The 2l+1 eigenvalues that should form this cluster, by rank.
        block = ev[start:start + 2 * l + 1]
        start += 2 * l + 1
        means.append(float(np.mean(block)))
        expected.append(target)
        devs.append(float(np.max(np.abs(block / target - 1.0))))
    return KernelSpectrum(ev, mults, grid_order, q0, means, expected, devs, cluster_tol)


def _weighted_phi(qn: QuantumNumbers, qx, qy):
    q0 = qn.q0
    return (qx * qx + qy * qy + q0 * q0) ** 1.5 * phi_momentum(qn, qx, qy)


def _rotate(qx, qy, q0, alpha, axis):
    ux, uy, uz = project_arrays(qx, qy, q0)
    c, s = math.cos(alpha), math.sin(alpha)
    if axis == "x":
        ux, uz = ux * c + uz * s, uz * c - ux * s
    else:
        uy, uz = uy * c + uz * s, uz * c - uy * s
    return unproject_arrays(ux, uy, uz, q0)


def rotation_derivative(qn: QuantumNumbers, k: MomentumPoint, alpha: float, axis: str = "x") -> complex:
    """Central difference in ``alpha`` of ``Phi`` pulled back through a sphere rotation.

    ``axis="x"`` rotates in the ``(u_x, u_z)`` plane, ``axis="y"`` in the
    ``(u_y, u_z)`` plane.  The transformed function is
    ``(q^2 + q0^2)^(-3/2) [(q'^2 + q0^2)^(3/2) Phi(q')]``.
    """
    q0 = qn.q0
    plus = _weighted_phi(qn, *_rotate(k.qx, k.qy, q0, alpha, axis))
    minus = _weighted_phi(qn, *_rotate(k.qx, k.qy, q0, -alpha, axis))
    return complex((plus - minus) / (2.0 * alpha) / (k.q ** 2 + q0 ** 2) ** 1.5)


def generator_action(qn: QuantumNumbers, k: MomentumPoint, axis: str = "x") -> complex:
    """Compact generator ``(q^2 - q0^2) r_a - 2 q_a (q . rho) - 3 i q_a`` applied to ``Phi``.

    Position operators act as ``i d/dq``; derivatives are central
    differences with step ``1e-5 (q + q0)``.
    """
    q0 = qn.q0
    qx, qy = k.qx, k.qy
    h = 1e-5 * (k.q + q0)
    dphx = (phi_momentum(qn, qx + h, qy) - phi_momentum(qn, qx - h, qy)) / (2 * h)
    dphy = (phi_momentum(qn, qx, qy + h) - phi_momentum(qn, qx, qy - h)) / (2 * h)
    phi = phi_momentum(qn, qx, qy)
    q_dot_rho = 1j * (qx * dphx + qy * dphy)
    if axis == "x":
        qa, ra = qx, 1j * dphx
    else:
        qa, ra = qy, 1j * dphy
    return complex((k.q ** 2 - q0 ** 2) * ra - 2.0 * qa * q_dot_rho - 3j * qa * phi)


def rotation_generator_check(qn: QuantumNumbers, k: MomentumPoint, alpha: float,
                             axis: str = "x", tol: float = 1e-3) -> VerificationReport:
    """Compare ``2 i q0 dPhi/dalpha`` with the generator applied to ``Phi``."""
    if not 0 < alpha <= 1e-2:
        raise DomainError("alpha must lie in (0, 1e-2]")
    if axis not in ("x", "y"):
        raise DomainError("axis must be 'x' or 'y'")
    lhs = 2j * qn.q0 * rotation_derivative(qn, k, alpha, axis)
    rhs = generator_action(qn, k, axis)
    return VerificationReport.compare(f"generator A{axis} n={qn.n} m={qn.m}", lhs, rhs, tol,
                                      n=qn.n, m=qn.m, alpha=alpha, axis=axis)


def fit_slope(hs, residuals) -> float:
    """Least-squares slope of ``log residual`` against ``log h``."""
    return float(np.polyfit(np.log(hs), np.log(residuals), 1)[0])


@dataclass(frozen=True)
class ConvergenceResult:
    steps: tuple
    residuals: tuple
    slope: float
    exact: bool

    def passed(self, target: float = 2.0, width: float = 0.1) -> bool:
        """True when the fitted slope is within ``width`` of ``target``,
        or when every residual is already at roundoff (``exact``)."""
        return self.exact or abs(self.slope - target) <= width


def generator_convergence(qn: QuantumNumbers, k: MomentumPoint,
                          alphas=(1e-2, 5e-3, 2.5e-3), axis: str = "x",
                          floor: float = 1e-8) -> ConvergenceResult:
    """Residual of :func:`rotation_generator_check` across ``alphas`` and its log-log slope.

    When every residual is below ``floor`` times the size of ``Phi``'s
    generator scale the identity holds to roundoff and no slope exists
    (``exact=True``, ``slope=nan``); this is what happens for ``n = 0``.
    """
    res = [rotation_generator_check(qn, k, a, axis).abs_error for a in alphas]
    scale = max(1.0, abs(complex(phi_momentum(qn, k.qx, k.qy))) * (k.q ** 2 + qn.q0 ** 2))
    if max(res) <= floor * scale:
        return ConvergenceResult(tuple(alphas), tuple(res), float("nan"), True)
    return ConvergenceResult(tuple(alphas), tuple(res), fit_slope(alphas, res), False)
