"""Numerical verification of the Legendre-Bessel-Laguerre integral relation.

For ``0 <= m <= n`` and ``x > 0``::

    int_0^inf P_n^m((1-y)/(1+y)) J_m(x sqrt(y)) (1+y)^(-3/2) dy
        = (-1)^n (2x)^m exp(-x) L_{n-m}^{2m}(2x) / (n + 1/2)

The left side is integrated numerically, lobe by lobe between Bessel
zeros with epsilon acceleration; the right side is closed form.  With
``n = m = 0`` it reduces to ``int J_0(x sqrt(y)) (1+y)^(-3/2) dy = 2 exp(-x)``.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, QuadratureError
from .quadrature import integrate_finite, integrate_oscillatory_semiinfinite
from .reports import VerificationReport
from .specfun import assoc_laguerre, assoc_legendre, bessel_j, phase_factor

DEFAULT_X_VALUES = (0.1, 0.5, 1.0, 2.0, 5.0, 10.0)
DEFAULT_N_MAX = 8
DEFAULT_TOL = 1e-8
N_CAP = 12
# Quadrature is asked for this fraction of the comparison tolerance.
QUAD_SAFETY = 0.1
# Below this the lobe sums cannot be trusted in double precision.
QUAD_FLOOR = 1e-15


@dataclass(frozen=True)
class ScaledVariables:
    """``x = q0 rho`` and ``y = (q / q0)^2``."""
    x: float
    y: float = 0.0

    def __post_init__(self):
        if self.x < 0 or self.y < 0:
            raise DomainError("scaled variables must be non-negative")

    @classmethod
    def from_physical(cls, q0: float, rho: float, q: float = 0.0) -> "ScaledVariables":
        return cls(q0 * rho, (q / q0) ** 2)


def _check_indices(n: int, m: int, allow_negative_m: bool = False):
    if n < 0:
        raise DomainError(f"n must be >= 0, got {n}")
    if allow_negative_m:
        if abs(m) > n:
            raise DomainError(f"|m| must not exceed n, got n={n}, m={m}")
    elif not 0 <= m <= n:
        raise DomainError(f"need 0 <= m <= n, got n={n}, m={m}")


def closed_form_rhs(n: int, m: int, x: float) -> float:
    """``(-1)^n (2x)^m exp(-x) L_{n-m}^{2m}(2x) / (n + 1/2)`` for ``0 <= m <= n``."""
    _check_indices(n, m)
    sign = -1.0 if n % 2 else 1.0
    return sign * (2.0 * x) ** m * math.exp(-x) * float(assoc_laguerre(n - m, 2 * m, 2.0 * x)) / (n + 0.5)


def integrand(n: int, m: int, x: float, bessel_order: int | None = None):
    """``y -> P_n^|m|((1-y)/(1+y)) J_k(x sqrt(y)) (1+y)^(-3/2)``, ``k = bessel_order`` (default ``m``)."""
    am = abs(m)
    k = m if bessel_order is None else bessel_order

    def f(y):
        y = np.asarray(y, dtype=float)
        s = 1.0 + y
        return assoc_legendre(n, am, (1.0 - y) / s) * bessel_j(k, x * np.sqrt(y)) / s ** 1.5

    return f


def _integrate(n: int, m: int, x: float, tol: float, bessel_order: int):
    return integrate_oscillatory_semiinfinite(integrand(n, m, x, bessel_order), abs(bessel_order), x, tol)


def _quad_tol(tol: float, rhs) -> float:
    return max(QUAD_SAFETY * tol * max(1.0, abs(rhs)), QUAD_FLOOR)


def verify_new_integral(n: int, m: int, x: float, tol: float = DEFAULT_TOL) -> VerificationReport:
    """Compare the integral with its closed form at one ``(n, m, x)``.

    Raises
    ------
    QuadratureError
        If the integral does not converge to the accuracy the comparison
        needs.  ``err.result`` holds a failed :class:`VerificationReport`
        built from the partial value.
    """
    _check_indices(n, m)
    if x <= 0:
        raise DomainError("x must be positive; x = 0 is covered by verify_origin_limit")
    if tol <= 0:
        raise DomainError("tol must be positive")
    rhs = closed_form_rhs(n, m, x)
    res = _integrate(n, m, x, _quad_tol(tol, rhs), m)
    report = VerificationReport.compare(f"integral n={n} m={m} x={x:g}", res.value, rhs, tol,
                                        res.n_evals, n=n, m=m, x=float(x),
                                        quad_error=res.abs_error_estimate)
    if not res.converged:
        failed = report.failed_copy(
            f"quadrature error estimate {res.abs_error_estimate:.2e} above requested "
            f"{_quad_tol(tol, rhs):.2e}")
        raise QuadratureError(f"integral did not converge for n={n} m={m} x={x:g}", failed)
    return report


def verify_phase_form(n: int, m: int, x: float, tol: float = DEFAULT_TOL,
                      phase: complex | None = None) -> VerificationReport:
    """Complex form ``c (-1)^(n+m) (-i)^m I = (2x)^|m| exp(-x) L_{n-|m|}^{2|m|}(2x) / (n+1/2)``.

    ``I`` is the integral with ``P_n^|m|`` and the signed-order Bessel
    function ``J_m``.  ``phase`` defaults to ``c = (-i)^|m|``; passing
    another unit number (for instance ``1j ** abs(m)``) is how the
    sensitivity of the identity to that choice is checked.
    """
    _check_indices(n, m, allow_negative_m=True)
    if x <= 0:
        raise DomainError("x must be positive")
    am = abs(m)
    c = phase_factor(m) if phase is None else complex(phase)
    rhs = (2.0 * x) ** am * math.exp(-x) * float(assoc_laguerre(n - am, 2 * am, 2.0 * x)) / (n + 0.5)
    res = _integrate(n, m, x, _quad_tol(tol, rhs), m)
    sign = -1.0 if (n + m) % 2 else 1.0
    lhs = complex(c * sign * (-1j) ** m * res.value)
    report = VerificationReport.compare(f"phase form n={n} m={m} x={x:g}", lhs, rhs, tol,
                                        res.n_evals, n=n, m=m, x=float(x), phase=c)
    if not res.converged:
        raise QuadratureError(f"integral did not converge for n={n} m={m} x={x:g}",
                              report.failed_copy("quadrature did not converge"))
    return report


def verify_parity(n: int, m: int, y_samples, tol: float = 1e-12) -> VerificationReport:
    """``P_n^m((y-1)/(y+1)) = (-1)^(n+m) P_n^m((1-y)/(1+y))``; reports the largest residual."""
    _check_indices(n, m)
    y = np.asarray(list(y_samples), dtype=float)
    if y.size == 0 or np.any(y <= 0):
        raise DomainError("y samples must be a non-empty list of positive numbers")
    t = (1.0 - y) / (1.0 + y)
    sign = -1.0 if (n + m) % 2 else 1.0
    left = assoc_legendre(n, m, -t)
    right = sign * assoc_legendre(n, m, t)
    worst = int(np.argmax(np.abs(left - right)))
    return VerificationReport.compare(f"parity n={n} m={m}", float(left[worst]), float(right[worst]),
                                      tol, int(y.size), n=n, m=m, y=float(y[worst]))


def verify_origin_limit(n: int, tol: float = 1e-12) -> VerificationReport:
    """The ``m = 0`` relation at ``x = 0``, where ``J_0 = 1``.

    With ``y = 1/v^2 - 1`` the integral becomes ``2 int_0^1 P_n(2v^2 - 1) dv``
    and must equal ``(-1)^n / (n + 1/2)``; for ``n = 0`` that is
    ``int (1+y)^(-3/2) dy = 2``.
    """
    if n < 0:
        raise DomainError("n must be >= 0")
    res = integrate_finite(lambda v: 2.0 * assoc_legendre(n, 0, 2.0 * v * v - 1.0), 0.0, 1.0, 0.1 * tol)
    rhs = (-1.0 if n % 2 else 1.0) / (n + 0.5)
    return VerificationReport.compare(f"origin limit n={n}", res.value, rhs, tol, res.n_evals,
                                      n=n, m=0, x=0.0)


def _scan_one(args):
    n, m, x, tol = args
    try:
        return verify_new_integral(n, m, x, tol)
    except QuadratureError as err:
        return err.result


@dataclass
class ScanSummary:
    reports: list

    @property
    def total(self) -> int:
        return len(self.reports)

    @property
    def n_passed(self) -> int:
        return sum(r.passed for r in self.reports)

    @property
    def passed(self) -> bool:
        return self.n_passed == self.total

    @property
    def worst_error(self) -> float:
        """Largest ``abs_error / max(1, |rhs|)``, the quantity held to ``tol``."""
        return max((r.abs_error / max(1.0, abs(r.rhs)) for r in self.reports), default=0.0)

    @property
    def total_cost(self) -> int:
        return sum(r.cost for r in self.reports)


def scan_report(n_max: int = DEFAULT_N_MAX, x_values=DEFAULT_X_VALUES, tol: float = DEFAULT_TOL,
                workers: int = 1, allow_large_n: bool = False) -> list:
    """Run :func:`verify_new_integral` over ``0 <= m <= n <= n_max`` and ``x_values``.

    Failures, including quadrature non-convergence, are recorded as failed
    reports and the scan continues.  Ordering is ``n``, then ``m``, then
    ``x`` regardless of ``workers``.  ``n_max`` above 12 requires
    ``allow_large_n``; the cost grows quickly with ``n``.
    """
    x_values = [float(x) for x in x_values]
    if not x_values:
        raise DomainError("x_values must not be empty")
    if n_max < 0:
        raise DomainError("n_max must be >= 0")
    if n_max > N_CAP and not allow_large_n:
        raise DomainError(f"n_max above {N_CAP} needs allow_large_n=True")
    if any(x <= 0 for x in x_values):
        raise DomainError("x values must be positive")
    jobs = [(n, m, x, tol) for n in range(n_max + 1) for m in range(n + 1) for x in x_values]
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            return list(pool.map(_scan_one, jobs, chunksize=4))
    return [_scan_one(job) for job in jobs]


def summarize(reports) -> ScanSummary:
    return ScanSummary(list(reports))
