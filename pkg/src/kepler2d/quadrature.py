"""Numerical integration engines.

Three tools live here:

* :func:`integrate_finite` -- adaptive 21-point Gauss-Kronrod on ``[a, b]``.
* :func:`integrate_oscillatory_semiinfinite` -- integrals over ``[0, inf)`` of
  integrands carrying a factor ``J_m(x * sqrt(y))``.  After ``y = t**2`` the
  half-line is cut at the zeros of ``J_m(x t)``, each lobe is integrated with
  the Gauss-Kronrod core, and the alternating partial sums are accelerated
  with Wynn's epsilon algorithm.
* :func:`sphere_grid` -- Gauss-Legendre in ``cos(theta)`` times the
  trapezoid rule in ``phi``.

Integrands are called with numpy arrays and must return arrays of the same
shape (real or complex).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DomainError
from .specfun import bessel_j_orders

_XGK = np.array([
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.0,
])
_WGK = np.array([
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077208980223048,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
])
_WG = np.array([
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
])

# Full 21-point node/weight vectors on [-1, 1].
_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_KW = np.concatenate([_WGK[:-1], _WGK[::-1]])
_GW = np.zeros(21)
_GW[1:10:2] = _WG
_GW[11:20:2] = _WG[::-1]

_EPS = np.finfo(float).eps
N_RULE = 21


@dataclass(frozen=True)
class QuadResult:
    value: complex | float
    abs_error_estimate: float
    n_evals: int
    converged: bool


def _gk21(f, a, b):
    """Apply the Gauss-Kronrod pair to every interval ``[a_i, b_i]`` at once."""
    center = 0.5 * (a + b)
    half = 0.5 * (b - a)
    t = center[:, None] + half[:, None] * _NODES[None, :]
    fx = np.asarray(f(t.reshape(-1))).reshape(t.shape)
    kron = (fx @ _KW) * half
    gauss = (fx @ _GW) * half

    # QUADPACK error heuristic, with a roundoff floor.
    abs_half = np.abs(half)
    resabs = (np.abs(fx) @ _KW) * abs_half
    mean = kron / np.where(half == 0, 1.0, half) * 0.5
    resasc = (np.abs(fx - mean[:, None]) @ _KW) * abs_half
    err = np.abs(kron - gauss)
    with np.errstate(divide="ignore", invalid="ignore"):
        scaled = resasc * np.minimum(1.0, (200.0 * err / resasc) ** 1.5)
    err = np.where(resasc > 0, scaled, err)
    floor = 50.0 * _EPS * resabs
    err = np.where(resabs > np.finfo(float).tiny / (50 * _EPS), np.maximum(err, floor), err)
    return kron, err, resabs


def integrate_intervals(f, edges, tol: float, rtol: float = 0.0, max_pieces: int = 200):
    """Integrate ``f`` separately over consecutive intervals of ``edges``.

    Each interval is refined until its error estimate is at most
    ``max(tol, rtol * integral of |f|)``.  Work is batched so ``f`` is called
    on one array per refinement round.

    Returns ``(values, errors, n_evals, converged)`` where the first two are
    arrays with one entry per interval and ``converged`` is a boolean array.
    """
    edges = np.asarray(edges, dtype=float)
    n_int = len(edges) - 1
    owner = np.arange(n_int)
    a, b = edges[:-1].copy(), edges[1:].copy()
    vals, errs, absv = _gk21(f, a, b)
    n_evals = N_RULE * n_int
    converged = np.zeros(n_int, dtype=bool)
    pieces = np.ones(n_int, dtype=int)

    while True:
        tot_err = np.bincount(owner, weights=errs, minlength=n_int)
        target = np.maximum(tol, rtol * np.bincount(owner, weights=absv, minlength=n_int))
        converged = tot_err <= target
        open_owner = ~converged & (pieces < max_pieces)
        if not np.any(open_owner):
            break
        # Pieces already at their roundoff floor cannot improve by bisection.
        refinable = errs > 2.0 * 50.0 * _EPS * absv
        open_owner &= np.bincount(owner, weights=refinable, minlength=n_int) > 0
        if not np.any(open_owner):
            break
        sel = open_owner[owner] & refinable
        # Within each open interval bisect every piece above its share of tol,
        # and always the worst piece.
        lengths = np.bincount(owner, weights=np.abs(b - a), minlength=n_int)
        share = target[owner] * np.abs(b - a) / np.where(lengths[owner] > 0, lengths[owner], 1.0)
        split = sel & (errs > 0.5 * share)
        worst = np.full(n_int, -1)
        cand = np.flatnonzero(sel)
        order = cand[np.argsort(errs[cand])]
        worst[owner[order]] = order
        for o in np.flatnonzero(open_owner):
            if worst[o] >= 0:
                split[worst[o]] = True

        mid = 0.5 * (a[split] + b[split])
        na = np.concatenate([a[split], mid])
        nb = np.concatenate([mid, b[split]])
        nowner = np.concatenate([owner[split], owner[split]])
        nv, ne, nabs = _gk21(f, na, nb)
        n_evals += N_RULE * len(na)
        keep = ~split
        a = np.concatenate([a[keep], na])
        b = np.concatenate([b[keep], nb])
        owner = np.concatenate([owner[keep], nowner])
        vals = np.concatenate([vals[keep], nv])
        errs = np.concatenate([errs[keep], ne])
        absv = np.concatenate([absv[keep], nabs])
        pieces = np.bincount(owner, minlength=n_int)

    values = np.bincount(owner, weights=vals.real, minlength=n_int)
    if np.iscomplexobj(vals):
        values = values + 1j * np.bincount(owner, weights=vals.imag, minlength=n_int)
    errors = np.bincount(owner, weights=errs, minlength=n_int)
    return values, errors, n_evals, converged


def integrate_finite(f, a: float, b: float, tol: float = 1e-12, max_pieces: int = 2000) -> QuadResult:
    """Adaptive Gauss-Kronrod (G10/K21) integral of ``f`` over ``[a, b]``.

    ``tol`` is an absolute tolerance on the whole integral.  If the
    subdivision limit is hit first, the result comes back with
    ``converged=False``.
    """
    if not a < b:
        raise DomainError(f"need a < b, got a={a}, b={b}")
    if tol <= 0:
        raise DomainError("tol must be positive")
    vals, errs, n_evals, conv = integrate_intervals(f, [a, b], tol, max_pieces=max_pieces)
    value = vals[0]
    if np.iscomplexobj(vals):
        value = complex(value)
    else:
        value = float(value)
    return QuadResult(value, float(errs[0]), int(n_evals), bool(conv[0]))


def wynn_epsilon(partial_sums):
    """Wynn's epsilon algorithm on a sequence of partial sums.

    Returns the deepest even-column entry of the epsilon table built from
    the whole sequence.
    """
    s = [complex(v) for v in partial_sums]
    if len(s) < 3:
        return s[-1]
    prev = [0j] * (len(s) + 1)
    cur = list(s)
    best = s[-1]
    col = 0
    while len(cur) > 1:
        nxt = []
        for i in range(len(cur) - 1):
            diff = cur[i + 1] - cur[i]
            if diff == 0:
                # Sequence has converged exactly at this depth.
                return cur[i + 1] if col % 2 == 0 else best
            nxt.append(prev[i + 1] + 1.0 / diff)
        prev, cur = cur, nxt
        col += 1
        if col % 2 == 0:
            best = cur[-1]
    return best


def _mcmahon_zero(order: int, k: int) -> float:
    beta = (k + 0.5 * order - 0.25) * math.pi
    mu = 4.0 * order * order
    b8 = 8.0 * beta
    return (beta - (mu - 1.0) / b8
            - 4.0 * (mu - 1.0) * (7.0 * mu - 31.0) / (3.0 * b8 ** 3))


@lru_cache(maxsize=64)
def _bessel_zeros_cached(order: int, count: int) -> tuple:
    ks = np.arange(1, count + 1)
    z = np.array([_mcmahon_zero(order, int(k)) for k in ks])
    # One Newton step using J_m' = (J_{m-1} - J_{m+1}) / 2.
    lo = abs(order - 1)
    vals = bessel_j_orders(sorted({lo, order, order + 1}), z)
    lookup = dict(zip(sorted({lo, order, order + 1}), vals))
    jm1 = lookup[lo] * (-1.0 if order == 0 else 1.0)
    deriv = 0.5 * (jm1 - lookup[order + 1])
    step = lookup[order] / np.where(deriv == 0, 1.0, deriv)
    refined = z - np.clip(step, -0.5, 0.5)
    # Boundaries only need to be increasing; fall back to the asymptotic
    # spacing where the expansion misbehaves for low k and high order.
    for i in range(1, len(refined)):
        if not refined[i] > refined[i - 1] + 0.5:
            refined[i] = refined[i - 1] + math.pi
    if refined[0] <= 0:
        refined[0] = 0.5 * refined[1]
    return tuple(refined)


def bessel_zeros(order: int, count: int) -> np.ndarray:
    """Approximate first ``count`` positive zeros of ``J_order``."""
    return np.array(_bessel_zeros_cached(abs(int(order)), int(count)))


def integrate_oscillatory_semiinfinite(
    f,
    bessel_order: int,
    frequency: float,
    tol: float = 1e-10,
    max_lobes: int = 600,
    min_lobes: int = 24,
    batch: int = 12,
    lobe_rtol: float = 1e-13,
) -> QuadResult:
    """Integrate ``f(y)`` over ``[0, inf)`` where ``f`` contains ``J_m(frequency * sqrt(y))``.

    Parameters
    ----------
    f : callable
        Vectorised integrand in ``y``.
    bessel_order, frequency : int, float
        ``m`` and ``x`` of the Bessel factor; the lobes are cut at the zeros
        of ``J_m(x t)`` with ``t = sqrt(y)``.
    tol : float
        Absolute tolerance on the accelerated sum.
    lobe_rtol : float
        Per-lobe tolerance relative to the lobe's integral of ``|f|``.  It is
        independent of ``tol``, so tightening ``tol`` only extends the same
        sequence of partial sums and the reported error cannot grow.

    The error estimate is three times the largest gap between the newest
    epsilon extrapolation and the three before it, plus the summed lobe
    errors.
    """
    if frequency <= 0:
        raise DomainError("frequency must be positive; use the analytic x = 0 limit instead")
    if tol <= 0:
        raise DomainError("tol must be positive")

    def g(t):
        return 2.0 * t * f(t * t)

    zeros = bessel_zeros(bessel_order, max_lobes) / frequency
    edges = np.concatenate([[0.0], zeros])

    partial = []
    estimates = []
    running = 0.0
    lobe_err = 0.0
    n_evals = 0
    estimate, err = 0.0, math.inf
    done = 0
    while done < max_lobes:
        stop = min(done + batch, max_lobes)
        vals, errs, ne, _ = integrate_intervals(g, edges[done:stop + 1], 1e-300, rtol=lobe_rtol)
        n_evals += ne
        lobe_err += float(np.sum(errs))
        for v in vals:
            running = running + v
            partial.append(running)
            if len(partial) >= 3:
                estimates.append(wynn_epsilon(partial[-_WINDOW:]))
        done = stop
        if len(estimates) >= 4:
            estimate = estimates[-1]
            spread = max(abs(estimate - e) for e in estimates[-4:-1])
            err = 3.0 * spread + lobe_err + 10 * _EPS * abs(estimate)
            if done >= min_lobes and err <= tol:
                break

    estimate = complex(estimate)
    if estimate.imag == 0.0:
        estimate = estimate.real
    return QuadResult(estimate, float(err), int(n_evals), bool(err <= tol))


# Partial sums fed to the epsilon table; older ones only add roundoff.
_WINDOW = 40


@dataclass(frozen=True)
class SphereGrid:
    theta: np.ndarray
    phi: np.ndarray
    weights: np.ndarray
    order: int

    @property
    def nodes(self) -> np.ndarray:
        """``(N, 2)`` array of ``(theta, phi)`` pairs."""
        return np.column_stack([self.theta, self.phi])

    @property
    def cartesian(self) -> np.ndarray:
        """``(N, 3)`` unit vectors."""
        st = np.sin(self.theta)
        return np.column_stack([st * np.cos(self.phi), st * np.sin(self.phi), np.cos(self.theta)])

    def integrate(self, values) -> complex | float:
        """Sum ``values`` (sampled at the nodes) against the weights."""
        return np.asarray(values) @ self.weights

    def __len__(self):
        return len(self.weights)


def sphere_grid(order: int) -> SphereGrid:
    """Product rule on the unit sphere with ``order`` Gauss points in ``cos(theta)``
    and ``2 * order`` equispaced azimuths.

    Integrates ``Y_l^m * conj(Y_l'^m')`` exactly whenever ``l + l' < 2 * order``.
    """
    if order < 1:
        raise DomainError("sphere grid order must be >= 1")
    x, wx = np.polynomial.legendre.leggauss(order)
    n_phi = 2 * order
    phi = 2.0 * np.pi * np.arange(n_phi) / n_phi
    theta = np.arccos(x)
    tt, pp = np.meshgrid(theta, phi, indexing="ij")
    ww = np.repeat(wx, n_phi) * (2.0 * np.pi / n_phi)
    for arr in (tt, pp, ww):
        arr.setflags(write=False)
    return SphereGrid(tt.reshape(-1), pp.reshape(-1), ww, order)
