"""Finite-difference check of the Runge-Lenz operator algebra in real space.

Operators act on complex fields sampled on a cell-centred Cartesian grid:

* ``H  = -Laplacian - 2/rho``
* ``Lz = -i (x d/dy - y d/dx)``
* ``A  = q^2 rho + rho H - 2 q (q.rho) - 3 i q`` with ``q = -i grad``

The last line is the compact form of the Runge-Lenz vector; it needs no
cross products.  All derivatives are second-order central differences
with zero padding outside the grid.

Residual norms are relative and taken over the central two-thirds of the
grid in each direction.  The discrete ``1/rho`` is not a consistent
approximation within a few cells of the origin, so points with
``rho < core_radius`` are left out of the residual (but not of the field
norm it is divided by).
"""
from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from .eigenstates import QuantumNumbers, psi_real
from .errors import BoundaryContaminationWarning, DomainError
from .reports import VerificationReport

DEFAULT_EXTENT = 12.0
DEFAULT_SIZE = 256
DEFAULT_CORE_RADIUS = 1.0
INTERIOR_FRACTION = 2.0 / 3.0
BOUNDARY_THRESHOLD = 1e-10
SLOPE_WINDOW = (1.85, 2.15)
GAUSSIAN_CENTRE = (1.2, -0.7)
GAUSSIAN_WIDTH = 1.5

PRESETS = {
    "default": (256, 512, 1024),
    "fast": (128, 256, 512),
    "coarse": (64,),
}
# Bound on ||Ax Psi_00|| / ||Psi_00|| at a preset's finest grid: 1e-3 at
# 1024 x 1024, scaled as h^2 for coarser presets.  None: not checked.
ANNIHILATION_BOUNDS = {
    "default": 1e-3,
    "fast": 4e-3,
    "coarse": None,
}


class OperatorId(enum.Enum):
    H = "H"
    Lz = "Lz"
    Ax = "Ax"
    Ay = "Ay"


@dataclass(frozen=True)
class GridField:
    """Samples ``values[i, j] = f(x_i, y_j)`` with ``x_i = x0 + (i + 1/2) h``.

    ``origin_offset`` is the lower-left corner ``(x0, y0)`` of the grid.
    """
    nx: int
    ny: int
    h: float
    origin_offset: tuple
    values: np.ndarray
    label: str = ""

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex)
        if values.shape != (self.nx, self.ny):
            raise DomainError(f"values have shape {values.shape}, expected {(self.nx, self.ny)}")
        if self.h <= 0:
            raise DomainError("grid spacing must be positive")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "origin_offset", tuple(float(c) for c in self.origin_offset))
        x, y = self.axes()
        if np.any(x == 0.0) and np.any(y == 0.0):
            raise DomainError("grid contains rho = 0")

    @classmethod
    def centred(cls, n: int, extent: float = DEFAULT_EXTENT, values=None, label: str = ""):
        """``n x n`` grid on ``[-extent, extent]^2``; zero field unless ``values`` given."""
        h = 2.0 * extent / n
        if values is None:
            values = np.zeros((n, n), dtype=complex)
        return cls(n, n, h, (-extent, -extent), values, label)

    @classmethod
    def sample(cls, func: Callable, n: int, extent: float = DEFAULT_EXTENT, label: str = ""):
        """Sample ``func(x, y)`` (vectorised) on a centred grid."""
        grid = cls.centred(n, extent)
        x, y = grid.mesh()
        return grid.with_values(func(x, y), label)

    def axes(self):
        x0, y0 = self.origin_offset
        x = x0 + (np.arange(self.nx) + 0.5) * self.h
        y = y0 + (np.arange(self.ny) + 0.5) * self.h
        return x, y

    def mesh(self):
        x, y = self.axes()
        return np.meshgrid(x, y, indexing="ij")

    def with_values(self, values, label: str | None = None) -> "GridField":
        return GridField(self.nx, self.ny, self.h, self.origin_offset, values,
                         self.label if label is None else label)

    def interior_mask(self, core_radius: float = 0.0) -> np.ndarray:
        """Central two-thirds of the grid, minus the disc ``rho < core_radius``."""
        x, y = self.mesh()
        x0, y0 = self.origin_offset
        cx, cy = x0 + 0.5 * self.nx * self.h, y0 + 0.5 * self.ny * self.h
        half_x = 0.5 * INTERIOR_FRACTION * self.nx * self.h
        half_y = 0.5 * INTERIOR_FRACTION * self.ny * self.h
        mask = (np.abs(x - cx) <= half_x) & (np.abs(y - cy) <= half_y)
        if core_radius > 0:
            mask &= np.hypot(x, y) >= core_radius
        return mask

    def boundary_ratio(self) -> float:
        """Largest boundary magnitude relative to the largest magnitude overall."""
        v = np.abs(self.values)
        top = v.max()
        if top == 0:
            return 0.0
        edge = max(v[0].max(), v[-1].max(), v[:, 0].max(), v[:, -1].max())
        return float(edge / top)


# Stencils -------------------------------------------------------------------

def _d1(f, h, axis):
    g = np.zeros_like(f)
    if axis == 0:
        g[1:-1] = f[2:] - f[:-2]
        g[0] = f[1]
        g[-1] = -f[-2]
    else:
        g[:, 1:-1] = f[:, 2:] - f[:, :-2]
        g[:, 0] = f[:, 1]
        g[:, -1] = -f[:, -2]
    return g / (2.0 * h)


def _d2(f, h, axis):
    g = -2.0 * f
    if axis == 0:
        g[1:] += f[:-1]
        g[:-1] += f[1:]
    else:
        g[:, 1:] += f[:, :-1]
        g[:, :-1] += f[:, 1:]
    return g / (h * h)


class _Stencils:
    """Discrete operators on one grid geometry; coordinates are cached."""

    def __init__(self, grid: GridField):
        self.h = grid.h
        self.x, self.y = grid.mesh()
        self.inv_rho = 1.0 / np.hypot(self.x, self.y)

    def lap(self, f):
        return _d2(f, self.h, 0) + _d2(f, self.h, 1)

    def H(self, f):
        return -self.lap(f) - 2.0 * self.inv_rho * f

    def Lz(self, f):
        return -1j * (self.x * _d1(f, self.h, 1) - self.y * _d1(f, self.h, 0))

    def A(self, f, axis):
        # q^2 (c f) + c H f - 2 q_c (q.rho f) - 3 i q_c f, with q = -i grad.
        h, x, y = self.h, self.x, self.y
        c = x if axis == 0 else y
        other = 1 - axis
        cf = c * f
        q_qrho = _d2(cf, h, axis) + _d1(_d1((y if axis == 0 else x) * f, h, other), h, axis)
        return -self.lap(cf) + c * self.H(f) + 2.0 * q_qrho - 3.0 * _d1(f, h, axis)

    def apply(self, op: OperatorId, f):
        if op is OperatorId.H:
            return self.H(f)
        if op is OperatorId.Lz:
            return self.Lz(f)
        return self.A(f, 0 if op is OperatorId.Ax else 1)


def _warn_boundary(f: GridField):
    ratio = f.boundary_ratio()
    if ratio > BOUNDARY_THRESHOLD:
        warnings.warn(f"field {f.label or '<unnamed>'} is {ratio:.1e} of its peak at the grid "
                      "boundary; stencils there see zero padding",
                      BoundaryContaminationWarning, stacklevel=3)


def apply_operator(op: OperatorId, f: GridField) -> GridField:
    """Apply ``H``, ``Lz``, ``Ax`` or ``Ay`` to ``f``."""
    op = OperatorId(op)
    _warn_boundary(f)
    return f.with_values(_Stencils(f).apply(op, f.values))


def _relative_norm(residual, f: GridField, core_radius: float) -> float:
    num = f.interior_mask(core_radius)
    den = f.interior_mask(0.0)
    top = np.sum(np.abs(f.values[den]) ** 2)
    if top == 0:
        raise DomainError("field vanishes on the interior")
    return float(math.sqrt(np.sum(np.abs(residual[num]) ** 2) / top))


def _expected_rhs(a: OperatorId, b: OperatorId, s: _Stencils, f):
    """Right-hand side of ``[a, b] f`` from the closed algebra, or None."""
    O = OperatorId
    if O.H in (a, b):
        return 0.0
    table = {
        (O.Lz, O.Ax): lambda: 1j * s.A(f, 1),
        (O.Lz, O.Ay): lambda: -1j * s.A(f, 0),
        (O.Ax, O.Ay): lambda: -4j * s.Lz(s.H(f)),
    }
    if (a, b) in table:
        return table[(a, b)]()
    if (b, a) in table:
        return -table[(b, a)]()
    return 0.0 if a is b else None


def commutator_residual(a: OperatorId, b: OperatorId, f: GridField,
                        expected: Callable | None = None,
                        core_radius: float = DEFAULT_CORE_RADIUS) -> float:
    """``||([a, b] - RHS) f|| / ||f||`` on the interior.

    ``RHS`` is taken from the operator algebra unless ``expected`` is given,
    in which case it is called with the :class:`GridField` and must return
    an array of the same shape.
    """
    a, b = OperatorId(a), OperatorId(b)
    _warn_boundary(f)
    s = _Stencils(f)
    v = f.values
    comm = s.apply(a, s.apply(b, v)) - s.apply(b, s.apply(a, v))
    rhs = expected(f) if expected is not None else _expected_rhs(a, b, s, v)
    if rhs is None:
        raise DomainError(f"no known right-hand side for [{a.value}, {b.value}]")
    return _relative_norm(comm - rhs, f, core_radius)


def a_squared_residual(f: GridField, core_radius: float = DEFAULT_CORE_RADIUS) -> float:
    """Interior residual of ``(Ax^2 + Ay^2 - H(4 Lz^2 + 1) - 4) f``."""
    _warn_boundary(f)
    s = _Stencils(f)
    v = f.values
    r = s.A(s.A(v, 0), 0) + s.A(s.A(v, 1), 1) - s.H(4.0 * s.Lz(s.Lz(v)) + v) - 4.0 * v
    return _relative_norm(r, f, core_radius)


def action_residual(op: OperatorId, f: GridField, eigenvalue: complex = 0.0,
                    core_radius: float = DEFAULT_CORE_RADIUS) -> float:
    """``||(op - eigenvalue) f|| / ||f||`` on the interior."""
    op = OperatorId(op)
    _warn_boundary(f)
    r = _Stencils(f).apply(op, f.values) - eigenvalue * f.values
    return _relative_norm(r, f, core_radius)


def hermiticity_gap(op: OperatorId, f: GridField, g: GridField) -> float:
    """``|<f, op g> - <op f, g>| / (||f|| ||g||)`` with the grid inner product."""
    op = OperatorId(op)
    s = _Stencils(f)
    left = np.vdot(f.values, s.apply(op, g.values))
    right = np.vdot(s.apply(op, f.values), g.values)
    scale = np.linalg.norm(f.values) * np.linalg.norm(g.values)
    return float(abs(left - right) / scale)


def j_squared_identity(n: int) -> VerificationReport:
    """Exact check of ``n(n+1) = -(1/4 + 1/E_n)`` with ``E_n = -1/(n+1/2)^2``."""
    if n < 0:
        raise DomainError("n must be >= 0")
    energy = -1 / (Fraction(n) + Fraction(1, 2)) ** 2
    lhs = Fraction(n * (n + 1))
    rhs = -(Fraction(1, 4) + 1 / energy)
    ok = lhs == rhs
    err = abs(lhs - rhs)
    return VerificationReport(f"j(j+1) n={n}", lhs, rhs, float(err),
                              float(err / abs(rhs)) if rhs else float(err),
                              0.0, ok, 0, {"n": n, "energy": energy})


# Test fields and the refinement study ---------------------------------------

def gaussian_field(n: int, extent: float = DEFAULT_EXTENT, centre=GAUSSIAN_CENTRE,
                   width: float = GAUSSIAN_WIDTH) -> GridField:
    """Off-centre Gaussian packet; it has no rotational symmetry about the origin."""
    cx, cy = centre

    def f(x, y):
        return np.exp(-((x - cx) ** 2 + (y - cy) ** 2) / (2.0 * width ** 2))

    return GridField.sample(f, n, extent, "gauss")


def eigenstate_field(n_q: int, m: int, n: int, extent: float = DEFAULT_EXTENT) -> GridField:
    qn = QuantumNumbers(n_q, m)

    def f(x, y):
        return psi_real(qn, np.hypot(x, y), np.arctan2(y, x))

    return GridField.sample(f, n, extent, f"psi{n_q}{m}")


DEFAULT_STATES = ((0, 0), (1, 0), (1, 1), (2, 1))

# Identity name -> operator pairs whose residuals it covers.
IDENTITIES = {
    "[H,.]=0": (("H", "Lz"), ("H", "Ax"), ("H", "Ay")),
    "[Lz,Ax]=iAy": (("Lz", "Ax"),),
    "[Lz,Ay]=-iAx": (("Lz", "Ay"),),
    "[Ax,Ay]=-4iLzH": (("Ax", "Ay"),),
    "A^2=H(4Lz^2+1)+4": (("A^2", ""),),
}


def field_residuals(f: GridField, core_radius: float = DEFAULT_CORE_RADIUS) -> dict:
    """All commutator and ``A^2`` residuals of one field, sharing operator applications.

    Keys are ``"a,b"`` for commutators and ``"A^2"``.
    """
    _warn_boundary(f)
    s = _Stencils(f)
    v = f.values
    Hv, Lv, Axv, Ayv = s.H(v), s.Lz(v), s.A(v, 0), s.A(v, 1)
    res = {
        "H,Lz": s.H(Lv) - s.Lz(Hv),
        "H,Ax": s.H(Axv) - s.A(Hv, 0),
        "H,Ay": s.H(Ayv) - s.A(Hv, 1),
        "Lz,Ax": s.Lz(Axv) - s.A(Lv, 0) - 1j * Ayv,
        "Lz,Ay": s.Lz(Ayv) - s.A(Lv, 1) + 1j * Axv,
        "Ax,Ay": s.A(Ayv, 0) - s.A(Axv, 1) + 4j * s.Lz(Hv),
        "A^2": s.A(Axv, 0) + s.A(Ayv, 1) - s.H(4.0 * s.Lz(Lv) + v) - 4.0 * v,
    }
    return {k: _relative_norm(r, f, core_radius) for k, r in res.items()}


def fit_slope(hs, residuals) -> float:
    """Least-squares slope of ``log(residual)`` against ``log(h)``."""
    hs = np.asarray(hs, dtype=float)
    residuals = np.asarray(residuals, dtype=float)
    if len(hs) < 2:
        return math.nan
    return float(np.polyfit(np.log(hs), np.log(residuals), 1)[0])


@dataclass
class RefinementStudy:
    """Residuals of every identity on every test field across a grid sequence."""
    sizes: tuple
    hs: list
    core_radius: float
    rows: list = field(default_factory=list)          # (pair, field, h, residual)
    eigen_rows: list = field(default_factory=list)    # (field, h, residual)
    annihilation: list = field(default_factory=list)  # ||Ax Psi_00|| / ||Psi_00|| per h

    def series(self, pair: str, label: str) -> list:
        return [r for p, lab, _, r in self.rows if p == pair and lab == label]

    def labels(self) -> list:
        return sorted({lab for _, lab, _, _ in self.rows})

    def slopes(self) -> dict:
        """``{(pair, field): slope}``; NaN when only one grid was run."""
        pairs = sorted({p for p, _, _, _ in self.rows})
        return {(p, lab): fit_slope(self.hs, self.series(p, lab))
                for p in pairs for lab in self.labels()}

    def eigen_slopes(self) -> dict:
        out = {}
        for lab in sorted({lab for lab, _, _ in self.eigen_rows}):
            out[lab] = fit_slope(self.hs, [r for l2, _, r in self.eigen_rows if l2 == lab])
        return out

    @property
    def slope_checked(self) -> bool:
        return len(self.hs) >= 2

    def identity_passed(self, name: str, window=SLOPE_WINDOW) -> bool:
        if not self.slope_checked:
            return False
        lo, hi = window
        slopes = self.slopes()
        for a, b in IDENTITIES[name]:
            pair = "A^2" if a == "A^2" else f"{a},{b}"
            for lab in self.labels():
                if not lo <= slopes[(pair, lab)] <= hi:
                    return False
        return True

    def worst_slope_deviation(self) -> float:
        if not self.slope_checked:
            return math.nan
        return max(abs(s - 2.0) for s in self.slopes().values())

    def table_rows(self) -> list:
        return [{"pair": p, "field": lab, "h": h, "residual": r} for p, lab, h, r in self.rows]


def refinement_study(sizes=PRESETS["default"], extent: float = DEFAULT_EXTENT,
                     core_radius: float = DEFAULT_CORE_RADIUS,
                     states=DEFAULT_STATES) -> RefinementStudy:
    """Run every identity on the Gaussian and on ``Psi_nm`` for ``states``.

    Also records the eigen-action residual ``||(H - E_n) Psi|| / ||Psi||`` and
    ``||Ax Psi_00|| / ||Psi_00||`` on each grid.
    """
    sizes = tuple(int(n) for n in sizes)
    if not sizes or min(sizes) < 8:
        raise DomainError("grid sizes must be >= 8")
    hs = [2.0 * extent / n for n in sizes]
    study = RefinementStudy(sizes, hs, core_radius)
    with warnings.catch_warnings():
        # Higher states are not decayed at the edge of the default box; the
        # interior mask keeps the zero padding out of the residuals.
        warnings.simplefilter("ignore", BoundaryContaminationWarning)
        for n, h in zip(sizes, hs):
            fields = [gaussian_field(n, extent)]
            fields += [eigenstate_field(nq, m, n, extent) for nq, m in states]
            for f in fields:
                for pair, r in field_residuals(f, core_radius).items():
                    study.rows.append((pair, f.label, h, r))
            for (nq, m), f in zip(states, fields[1:]):
                energy = -1.0 / (nq + 0.5) ** 2
                study.eigen_rows.append((f.label, h, action_residual("H", f, energy, core_radius)))
                if nq == 0:
                    study.annihilation.append(action_residual("Ax", f, 0.0, core_radius))
    return study
