"""Closed-form bound states of the planar Coulomb problem.

Units are excitonic Rydbergs: the potential is ``-2/rho`` and a shell with
principal quantum number ``n`` has ``E = -q0**2`` with ``q0 = 1/(n + 1/2)``.
Fourier convention: ``Phi(q) = int Psi(rho) exp(i q.rho) d^2 rho``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, QuadratureError
from .quadrature import integrate_finite, integrate_oscillatory_semiinfinite
from .reports import VerificationReport
from .specfun import assoc_laguerre, assoc_legendre, bessel_j, factorial_ratio, phase_factor


@dataclass(frozen=True)
class QuantumNumbers:
    n: int
    m: int = 0

    def __post_init__(self):
        if self.n < 0:
            raise DomainError(f"principal quantum number must be >= 0, got {self.n}")
        if abs(self.m) > self.n:
            raise DomainError(f"|m| must not exceed n, got n={self.n}, m={self.m}")

    @property
    def q0(self) -> float:
        return 1.0 / (self.n + 0.5)


@dataclass(frozen=True)
class EnergyLevel:
    energy: float
    q0: float


@dataclass(frozen=True)
class RealSpacePoint:
    rho: float
    phi_rho: float = 0.0

    def __post_init__(self):
        if self.rho < 0:
            raise DomainError("rho must be non-negative")


@dataclass(frozen=True)
class MomentumPoint:
    qx: float
    qy: float = 0.0

    @property
    def q(self) -> float:
        return math.hypot(self.qx, self.qy)

    @property
    def phi_q(self) -> float:
        return math.atan2(self.qy, self.qx)


def energy_level(n: int) -> EnergyLevel:
    if n < 0:
        raise DomainError(f"n must be >= 0, got {n}")
    q0 = 1.0 / (n + 0.5)
    return EnergyLevel(-q0 * q0, q0)


def degeneracy(n: int) -> int:
    if n < 0:
        raise DomainError(f"n must be >= 0, got {n}")
    return 2 * n + 1


def _polar(point, phi):
    if isinstance(point, RealSpacePoint):
        return point.rho, point.phi_rho
    return point, phi


def radial_real(qn: QuantumNumbers, rho):
    """Radial factor of :func:`psi_real` (``Psi = radial * exp(i m phi)``)."""
    n, am = qn.n, abs(qn.m)
    q0 = qn.q0
    rho = np.asarray(rho, dtype=float)
    if np.any(rho < 0):
        raise DomainError("rho must be non-negative")
    beta = 2.0 * q0 * rho
    norm = math.sqrt(q0 ** 3 * factorial_ratio(n, am) / math.pi)
    out = norm * beta ** am * np.exp(-q0 * rho) * assoc_laguerre(n - am, 2 * am, beta)
    return out.item() if out.ndim == 0 else out


def psi_real(qn: QuantumNumbers, rho, phi_rho=0.0):
    """Normalised real-space eigenfunction ``Psi_nm(rho, phi_rho)``.

    ``rho`` may be a :class:`RealSpacePoint` or an array of radii.
    """
    rho, phi_rho = _polar(rho, phi_rho)
    out = radial_real(qn, rho) * np.exp(1j * qn.m * np.asarray(phi_rho, dtype=float))
    out = np.asarray(out)
    return out.item() if out.ndim == 0 else out


def radial_momentum(qn: QuantumNumbers, q):
    """``Phi_nm`` at momentum magnitude ``q`` and azimuth 0 (phase included)."""
    n, am = qn.n, abs(qn.m)
    q0 = qn.q0
    q = np.asarray(q, dtype=float)
    s = q * q + q0 * q0
    cos_theta = np.clip((q * q - q0 * q0) / s, -1.0, 1.0)
    amp = math.sqrt(2.0 * math.pi * factorial_ratio(n, am))
    out = phase_factor(qn.m) * amp * (2.0 * q0 / s) ** 1.5 * assoc_legendre(n, am, cos_theta)
    out = np.asarray(out)
    return out.item() if out.ndim == 0 else out


def phi_momentum(qn: QuantumNumbers, qx, qy=0.0):
    """Orthonormal momentum-space eigenfunction ``Phi_nm(q)``.

    ``qx`` may be a :class:`MomentumPoint`; otherwise ``qx``/``qy`` are
    broadcastable arrays of Cartesian components.
    """
    if isinstance(qx, MomentumPoint):
        qx, qy = qx.qx, qx.qy
    qx = np.asarray(qx, dtype=float)
    qy = np.asarray(qy, dtype=float)
    q = np.hypot(qx, qy)
    out = np.asarray(radial_momentum(qn, q) * np.exp(1j * qn.m * np.arctan2(qy, qx)))
    return out.item() if out.ndim == 0 else out


def psi_from_momentum(qn: QuantumNumbers, rho: float, phi_rho: float = 0.0, tol: float = 1e-10):
    """Inverse Fourier transform of :func:`phi_momentum`, reduced to one radial integral.

    With ``Phi = F(q) exp(i m phi_q)`` the angular integral is
    ``2 pi (-i)**m J_m(q rho)``, so
    ``Psi = (-i)**m exp(i m phi_rho) / (2 pi) * int_0^inf F(q) J_m(q rho) q dq``.
    The radial integral is taken in ``y = (q/q0)**2``.

    Returns ``(value, QuadResult)``.
    """
    if rho < 0:
        raise DomainError("rho must be non-negative")
    q0 = qn.q0
    m = qn.m
    prefactor = (-1j) ** m * np.exp(1j * m * phi_rho) / (2.0 * math.pi) * (0.5 * q0 * q0)

    if rho == 0.0:
        if m != 0:
            return 0j, None
        # y = 1/v**2 - 1 maps [0, inf) onto (0, 1] and cancels the (1+y)^(-3/2) decay.
        def h(v):
            v = np.maximum(v, 1e-300)
            y = 1.0 / (v * v) - 1.0
            return radial_momentum(qn, q0 * np.sqrt(y)) * 2.0 / v ** 3

        res = integrate_finite(h, 0.0, 1.0, tol)
    else:
        x = q0 * rho

        def h(y):
            return radial_momentum(qn, q0 * np.sqrt(y)) * bessel_j(m, x * np.sqrt(y))

        res = integrate_oscillatory_semiinfinite(h, abs(m), x, tol)
    value = complex(prefactor * res.value)
    if not res.converged:
        raise QuadratureError(f"inverse transform did not converge for {qn} at rho={rho}", (value, res))
    return value, res


def fourier_consistency(qn: QuantumNumbers, p, tol: float = 1e-6) -> VerificationReport:
    """Compare ``Psi`` rebuilt from ``Phi`` against the closed form at one point."""
    rho, phi_rho = _polar(p, 0.0)
    lhs, res = psi_from_momentum(qn, rho, phi_rho, tol=min(1e-10, 0.01 * tol))
    rhs = complex(psi_real(qn, rho, phi_rho))
    cost = res.n_evals if res is not None else 0
    report = VerificationReport.compare(f"fourier n={qn.n} m={qn.m}", lhs, rhs, tol, cost,
                                        n=qn.n, m=qn.m, rho=float(rho))
    # Absolute comparison; wavefunction values are O(1) or smaller.
    return VerificationReport(report.label, lhs, rhs, report.abs_error, report.rel_error, tol,
                              report.abs_error <= tol, cost, report.params)


def _decay_length(qn: QuantumNumbers) -> float:
    return (2 * qn.n + 60) / qn.q0


def real_space_overlap(qn1: QuantumNumbers, qn2: QuantumNumbers, tol: float = 1e-12) -> complex:
    """``int conj(Psi_1) Psi_2 d^2 rho``; the angular part is exact."""
    if qn1.m != qn2.m:
        return 0j
    r_max = max(_decay_length(qn1), _decay_length(qn2))

    def f(r):
        return radial_real(qn1, r) * radial_real(qn2, r) * r

    res = integrate_finite(f, 0.0, r_max, tol)
    return complex(2.0 * math.pi * res.value)


def momentum_norm(qn: QuantumNumbers, weighted: bool = True, tol: float = 1e-12) -> float:
    """``(2 pi)^-2 int w(q) |Phi|^2 d^2 q`` with ``w = (q^2 + q0^2)/(2 q0^2)`` (or 1)."""
    q0 = qn.q0

    # q = q0 tan(s/2) maps [0, pi) onto [0, inf) and tames the power-law tail.
    def f(s):
        s = np.minimum(s, math.pi - 1e-12)
        q = q0 * np.tan(0.5 * s)
        dq = 0.5 * q0 / np.cos(0.5 * s) ** 2
        w = (q * q + q0 * q0) / (2.0 * q0 * q0) if weighted else 1.0
        return w * np.abs(radial_momentum(qn, q)) ** 2 * q * dq

    res = integrate_finite(f, 0.0, math.pi, tol)
    return res.value / (2.0 * math.pi)
