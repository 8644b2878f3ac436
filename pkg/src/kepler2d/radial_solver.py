"""Finite-difference oracle for the bound-state spectrum.

Solves ``-R'' - R'/rho - 2R/rho + m^2 R/rho^2 = E R`` without reference to
the closed-form energies.  The operator is discretised in conservative
(finite-volume) form on cells ``[f_i, f_{i+1}]`` whose first face sits at
``rho = 0``; the zero flux through that face is the regularity condition.
Scaling by the square root of the cell mass ``rho_i (f_{i+1} - f_i)`` turns
the generalised problem into a symmetric tridiagonal one, which is the
discrete counterpart of ``R = rho^(-1/2) u``.  Nodes are cell centres, so
``rho = 0`` is never sampled.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .errors import DomainError, GridTooCoarseError
from .reports import VerificationReport

DEFAULT_POINTS = 40000
DEFAULT_EXTENT = 40.0   # r_max = DEFAULT_EXTENT / q0 of the targeted shell


@dataclass(frozen=True)
class RadialGrid:
    r_max: float
    n_points: int = DEFAULT_POINTS
    spacing: str = "uniform"
    offset: float | None = None

    def __post_init__(self):
        if self.r_max <= 0 or self.n_points < 4:
            raise DomainError("grid needs r_max > 0 and at least 4 points")
        if self.spacing not in ("uniform", "log"):
            raise DomainError(f"unknown spacing {self.spacing!r}")

    @classmethod
    def for_shell(cls, n: int, n_points: int = DEFAULT_POINTS, spacing: str = "uniform"):
        """Grid sized for shell ``n``: ``r_max = 40 (n + 1/2)``."""
        return cls(DEFAULT_EXTENT * (n + 0.5), n_points, spacing)

    @property
    def faces(self) -> np.ndarray:
        if self.spacing == "uniform":
            return np.linspace(0.0, self.r_max, self.n_points + 1)
        first = self.offset if self.offset is not None else self.r_max * 1e-6
        return np.concatenate([[0.0], np.geomspace(first, self.r_max, self.n_points)])

    @property
    def nodes(self) -> np.ndarray:
        f = self.faces
        return 0.5 * (f[1:] + f[:-1])

    def refined(self) -> "RadialGrid":
        return RadialGrid(self.r_max, 2 * self.n_points, self.spacing, self.offset)

    def covers(self, n: int) -> bool:
        """True when ``exp(-q0 r_max) < 1e-10`` for shell ``n``."""
        return math.exp(-self.r_max / (n + 0.5)) < 1e-10


@dataclass
class RadialSpectrum:
    m: int
    energies: np.ndarray
    node_counts: list
    grid: RadialGrid
    vectors: np.ndarray   # symmetric-basis eigenvectors, one column per state

    def radial_function(self, k: int) -> np.ndarray:
        """``R_k`` on the grid nodes, normalised so ``int R^2 rho drho = 1``."""
        w = _cell_mass(self.grid)
        return self.vectors[:, k] / np.sqrt(w)

    def to_rows(self):
        return [{"m": self.m, "k": k, "energy": float(e), "nodes": int(c)}
                for k, (e, c) in enumerate(zip(self.energies, self.node_counts))]


def _cell_mass(grid: RadialGrid) -> np.ndarray:
    f = grid.faces
    r = 0.5 * (f[1:] + f[:-1])
    return r * np.diff(f)


def radial_operator(m: int, grid: RadialGrid):
    """Diagonal and off-diagonal of the symmetric tridiagonal radial operator."""
    f = grid.faces
    r = 0.5 * (f[1:] + f[:-1])
    w = r * np.diff(f)
    inner = f[1:-1] / np.diff(r)            # face weight rho_{i+1/2} / (rho_{i+1} - rho_i)
    stiff_diag = np.zeros_like(r)
    stiff_diag[:-1] += inner
    stiff_diag[1:] += inner
    diag = stiff_diag / w + m * m / r ** 2 - 2.0 / r
    off = -inner / np.sqrt(w[:-1] * w[1:])
    return diag, off


def _count_nodes(v: np.ndarray) -> int:
    big = v[np.abs(v) > 1e-8 * np.max(np.abs(v))]
    return int(np.count_nonzero(np.signbit(big[1:]) != np.signbit(big[:-1])))


def solve_radial(m: int, n_states: int, grid: RadialGrid, drift_tol: float | None = None) -> RadialSpectrum:
    """Lowest ``n_states`` eigenpairs of the radial operator for azimuthal number ``m``.

    With ``drift_tol`` set the solve is repeated on a grid with twice the
    points and :class:`GridTooCoarseError` is raised if any eigenvalue moves
    by more than ``drift_tol`` relative.
    """
    if n_states < 1:
        raise DomainError("n_states must be >= 1")
    m = abs(int(m))
    diag, off = radial_operator(m, grid)
    energies, vecs = eigh_tridiagonal(diag, off, select="i", select_range=(0, n_states - 1))
    for k in range(n_states):
        # Fix the sign so the first large lobe is positive.
        v = vecs[:, k]
        if v[np.argmax(np.abs(v) > 1e-3 * np.max(np.abs(v)))] < 0:
            vecs[:, k] = -v
    nodes = [_count_nodes(vecs[:, k]) for k in range(n_states)]
    if drift_tol is not None:
        fine = eigh_tridiagonal(*radial_operator(m, grid.refined()), select="i",
                                select_range=(0, n_states - 1), eigvals_only=True)
        drift = np.max(np.abs(fine / energies - 1.0))
        if drift > drift_tol:
            raise GridTooCoarseError(
                f"eigenvalues drift by {drift:.3e} between {grid.n_points} and "
                f"{2 * grid.n_points} points (allowed {drift_tol:.1e})")
    return RadialSpectrum(m, energies, nodes, grid, vecs)


def shell_energy(n: int, m: int, grid: RadialGrid | None = None) -> float:
    """Computed energy of shell ``n`` in the ``|m|`` channel (the ``n - |m|``-th radial state)."""
    am = abs(m)
    if am > n:
        raise DomainError("|m| must not exceed n")
    grid = grid or RadialGrid.for_shell(n)
    return float(solve_radial(am, n - am + 1, grid).energies[-1])


def degeneracy_check(n: int, grid: RadialGrid | None = None, tol: float = 1e-5) -> VerificationReport:
    """Spread of the shell-``n`` energy across ``|m| = 0..n``.

    ``lhs``/``rhs`` are the largest and smallest computed energies and the
    check passes when their spread relative to the exact shell energy is at
    most ``tol``.
    """
    if n < 0:
        raise DomainError("n must be >= 0")
    grid = grid or RadialGrid.for_shell(n)
    energies = [shell_energy(n, am, grid) for am in range(n + 1)]
    hi, lo = max(energies), min(energies)
    exact = 1.0 / (n + 0.5) ** 2
    spread = hi - lo
    rel = spread / exact
    return VerificationReport(f"degeneracy n={n}", hi, lo, spread, rel, tol, rel <= tol,
                              grid.n_points * (n + 1), {"n": n, "energies": energies})


def spectrum_table(n_max: int, grid_points: int = DEFAULT_POINTS) -> list:
    """Rows ``(n, m, E_computed, E_exact, error)`` for ``0 <= m <= n <= n_max``.

    ``error`` is relative to the exact energy.
    """
    if n_max < 0:
        raise DomainError("n_max must be >= 0")
    rows = []
    for n in range(n_max + 1):
        grid = RadialGrid.for_shell(n, grid_points)
        exact = -1.0 / (n + 0.5) ** 2
        for m in range(n + 1):
            e = shell_energy(n, m, grid)
            rows.append({"n": n, "m": m, "E_computed": e, "E_exact": exact,
                         "error": abs(e / exact - 1.0)})
    return rows
