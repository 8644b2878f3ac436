"""Special functions used throughout the package.

Conventions
-----------
* ``assoc_legendre`` is the Ferrers function as tabulated by
  Gradshteyn & Ryzhik (6th ed., 8.752.1):
  ``P_n^m(x) = (-1)**m (1 - x**2)**(m/2) d^m P_n / dx^m``.
  This sign is what makes the Bessel-Legendre integral relation in
  :mod:`kepler2d.identity_verifier` hold with ``c_lm = (-i)**|m|``.
* ``spherical_harmonic`` multiplies by ``c_lm = (-i)**|m|`` on top of that.

All routines accept scalars or numpy arrays for the continuous argument and
return an object of the same shape (a Python float/complex for scalar input).
Degrees up to ``MAX_DEGREE`` are supported at full double precision; the
recurrences keep working beyond it but the normalisation factorials switch to
log-space and lose a few digits.
"""
from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import DomainError

MAX_DEGREE = 32

_PHASES = (1 + 0j, -1j, -1 + 0j, 1j)

# Below this argument the power series of J_m is used instead of Miller's
# backward recurrence.
_SERIES_CUTOFF = 1.0
_RESCALE = 1e250


def _as_array(x):
    arr = np.asarray(x, dtype=float)
    return arr, arr.ndim == 0


def _unwrap(out, scalar):
    if scalar:
        return out.item()
    return out


def phase_factor(m: int) -> complex:
    """Return ``(-i)**|m|`` exactly (one of 1, -i, -1, i)."""
    return _PHASES[abs(int(m)) % 4]


@lru_cache(maxsize=None)
def factorial_ratio(l: int, m: int) -> float:
    """``(l - |m|)! / (l + |m|)!`` as a float.

    Exact rational arithmetic up to ``MAX_DEGREE``, log-gamma beyond.
    """
    m = abs(m)
    if m > l:
        raise DomainError(f"|m|={m} exceeds l={l}")
    if l <= MAX_DEGREE:
        return float(Fraction(math.factorial(l - m), math.factorial(l + m)))
    return math.exp(math.lgamma(l - m + 1) - math.lgamma(l + m + 1))


def _double_factorial_odd(m: int) -> float:
    # (2m - 1)!!
    out = 1.0
    for k in range(1, 2 * m, 2):
        out *= k
    return out


def assoc_legendre(n: int, m: int, x):
    """Associated Legendre function ``P_n^m(x)`` on ``[-1, 1]``, including ``(-1)**m``.

    Upward recurrence in degree starting from ``P_m^m``.
    """
    if n < 0 or m < 0 or m > n:
        raise DomainError(f"need 0 <= m <= n, got n={n}, m={m}")
    x, scalar = _as_array(x)
    if np.any(np.abs(x) > 1.0):
        raise DomainError("assoc_legendre requires |x| <= 1")

    sign = -1.0 if m % 2 else 1.0
    pmm = sign * _double_factorial_odd(m) * np.power(np.clip(1.0 - x * x, 0.0, None), 0.5 * m)
    if n == m:
        return _unwrap(pmm, scalar)
    pm1 = x * (2 * m + 1) * pmm
    for l in range(m + 2, n + 1):
        pmm, pm1 = pm1, (x * (2 * l - 1) * pm1 - (l + m - 1) * pmm) / (l - m)
    return _unwrap(pm1, scalar)


def assoc_laguerre(k: int, alpha: int, x):
    """Associated Laguerre polynomial ``L_k^alpha(x)``, with ``L_k^alpha(0) = C(k+alpha, k)``."""
    if k < 0 or alpha < 0:
        raise DomainError(f"need k, alpha >= 0, got k={k}, alpha={alpha}")
    x, scalar = _as_array(x)
    if np.any(x < 0):
        raise DomainError("assoc_laguerre requires x >= 0")

    prev = np.ones_like(x)
    if k == 0:
        return _unwrap(prev, scalar)
    cur = 1.0 + alpha - x
    for j in range(1, k):
        prev, cur = cur, ((2 * j + 1 + alpha - x) * cur - (j + alpha) * prev) / (j + 1)
    return _unwrap(cur, scalar)


def _bessel_series(order: int, x: np.ndarray) -> np.ndarray:
    half = 0.5 * x
    term = np.power(half, order) / math.factorial(order)
    total = term.copy()
    q = -half * half
    for k in range(1, 40):
        term = term * q / (k * (k + order))
        total += term
        if np.all(np.abs(term) <= 1e-17 * np.abs(total)):
            break
    return total


def _miller_start(order: int, xmax: float) -> int:
    start = int(max(order, xmax) + 12.0 * xmax ** (1.0 / 3.0) + 30)
    return start + (start % 2)


def _bessel_miller(orders, x: np.ndarray) -> np.ndarray:
    """Miller's backward recurrence, normalised by ``J_0 + 2 sum J_2k = 1``.

    Returns an array of shape ``(len(orders),) + x.shape``.
    """
    top = max(orders)
    start = _miller_start(top, float(np.max(x)))
    wanted = {o: i for i, o in enumerate(orders)}
    out = np.zeros((len(orders),) + x.shape)

    inv_x = 1.0 / x
    j_next = np.zeros_like(x)
    j_cur = np.full_like(x, 1e-280)
    norm = np.zeros_like(x)
    for k in range(start, 0, -1):
        # j_cur holds J_k (unnormalised); step down to J_{k-1}.
        if k in wanted:
            out[wanted[k]] = j_cur
        if k % 2 == 0:
            norm += 2.0 * j_cur
        j_prev = 2.0 * k * inv_x * j_cur - j_next
        j_next, j_cur = j_cur, j_prev
        big = np.abs(j_cur) > _RESCALE
        if np.any(big):
            scale = np.where(big, 1.0 / _RESCALE, 1.0)
            j_cur = j_cur * scale
            j_next = j_next * scale
            norm = norm * scale
            out = out * scale
    norm += j_cur
    if 0 in wanted:
        out[wanted[0]] = j_cur
    return out / norm


def bessel_j_orders(orders, x) -> np.ndarray:
    """Evaluate ``J_m(x)`` for several non-negative orders from one sweep.

    Returns shape ``(len(orders),) + np.shape(x)``.
    """
    orders = [int(o) for o in orders]
    if any(o < 0 for o in orders):
        raise DomainError("bessel_j_orders expects non-negative orders")
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise DomainError("bessel_j requires x >= 0")
    out = np.zeros((len(orders),) + x.shape)
    flat = x.reshape(-1)
    res = out.reshape(len(orders), -1)

    zero = flat == 0.0
    small = (flat > 0.0) & (flat <= _SERIES_CUTOFF)
    large = flat > _SERIES_CUTOFF
    for i, o in enumerate(orders):
        res[i, zero] = 1.0 if o == 0 else 0.0
        if np.any(small):
            res[i, small] = _bessel_series(o, flat[small])
    if np.any(large):
        res[:, large] = _bessel_miller(orders, flat[large])
    return out


def bessel_j(m: int, x):
    """Bessel function of the first kind ``J_m(x)`` for integer ``m`` and ``x >= 0``.

    Negative orders use ``J_{-m} = (-1)**m J_m``.
    """
    x_arr, scalar = _as_array(x)
    order = abs(int(m))
    out = bessel_j_orders([order], x_arr)[0]
    if m < 0 and order % 2 == 1:
        out = -out
    return _unwrap(out, scalar)


def spherical_harmonic(l: int, m: int, theta, phi):
    """``Y_l^m(theta, phi)`` with the extra phase ``c_lm = (-i)**|m|``."""
    if l < 0 or abs(m) > l:
        raise DomainError(f"need |m| <= l, got l={l}, m={m}")
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    scalar = theta.ndim == 0 and phi.ndim == 0
    norm = math.sqrt((2 * l + 1) / (4.0 * math.pi) * factorial_ratio(l, m))
    plm = assoc_legendre(l, abs(m), np.clip(np.cos(theta), -1.0, 1.0))
    out = phase_factor(m) * norm * plm * np.exp(1j * m * phi)
    return _unwrap(np.asarray(out), scalar)
