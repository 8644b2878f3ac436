"""Command-line driver for the verification suites.

Exit codes: 0 when every check passes, 1 when any check fails, 2 for
usage or configuration errors.

Config files are flat ``key = value`` text (``#`` starts a comment).
Recognised keys are the long flag names with ``_`` for ``-``::

    n_max = 8
    x = 0.1, 0.5, 1, 2, 5, 10
    tol = 1e-8
    grid_order = 30
    preset = default
    out = results
    format = csv, json
    parallel = 1
    spectrum_tol = 1e-6
    degeneracy_tol = 1e-5
    fock_tol = 1e-3
    fock_n = 4
    annihilation_tol = 1e-3   # default: per preset

Flags given on the command line override the file.
"""
from __future__ import annotations

import argparse
import logging
import math
import sys
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import focksphere, identity_verifier, operator_algebra, radial_solver
from .eigenstates import MomentumPoint, QuantumNumbers, RealSpacePoint, fourier_consistency
from .errors import DomainError
from .reports import dumps_json, reports_to_csv, write_csv

log = logging.getLogger("kepler2d")

FORMATS = ("csv", "json", "svg")
SUITES = ("spectrum", "integral", "fock", "commutators", "consistency")


class ConfigError(Exception):
    """Bad flags or config file; maps to exit code 2."""


@dataclass(frozen=True)
class RunConfig:
    out: Path = Path(".")
    formats: tuple = ("csv", "json")
    n_max: int | None = None
    x: tuple = identity_verifier.DEFAULT_X_VALUES
    tol: float = identity_verifier.DEFAULT_TOL
    grid_order: int = focksphere.DEFAULT_GRID_ORDER
    fock_n: int = 4
    lmax: int | None = None
    preset: str = "default"
    parallel: int = 1
    spectrum_tol: float = 1e-6
    degeneracy_tol: float = 1e-5
    fock_tol: float = focksphere.DEFAULT_CLUSTER_TOL
    annihilation_tol: float | None = None
    grid_points: int = radial_solver.DEFAULT_POINTS
    presets: dict = field(default_factory=lambda: dict(operator_algebra.PRESETS))

    def validate(self) -> "RunConfig":
        for name in ("tol", "spectrum_tol", "degeneracy_tol", "fock_tol"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        bad = set(self.formats) - set(FORMATS)
        if bad:
            raise ConfigError(f"unknown format(s): {', '.join(sorted(bad))}")
        if not self.out.is_dir():
            raise ConfigError(f"output directory {self.out} does not exist")
        if self.preset not in self.presets:
            raise ConfigError(f"unknown preset {self.preset!r}; choose from {', '.join(self.presets)}")
        if self.annihilation_tol is not None and not self.annihilation_tol > 0:
            raise ConfigError("annihilation_tol must be positive")
        if self.parallel < 1:
            raise ConfigError("parallel must be >= 1")
        return self


@dataclass
class SuiteResult:
    suite: str
    passed: bool
    worst_error: float
    runtime: float = 0.0
    detail: dict = field(default_factory=dict)

    def summary(self) -> dict:
        worst = None if math.isnan(self.worst_error) else float(self.worst_error)
        return {"suite": self.suite, "passed": self.passed, "worst_error": worst,
                "runtime": round(self.runtime, 3), "detail": self.detail}


def _float_list(text: str) -> tuple:
    try:
        return tuple(float(v) for v in text.replace(",", " ").split())
    except ValueError as err:
        raise ConfigError(f"bad number list {text!r}") from err


def _format_list(text: str) -> tuple:
    return tuple(v.strip() for v in text.split(",") if v.strip())


_CONVERTERS = {
    "n_max": int, "grid_order": int, "fock_n": int, "lmax": int, "parallel": int, "grid_points": int,
    "tol": float, "spectrum_tol": float, "degeneracy_tol": float, "fock_tol": float,
    "annihilation_tol": float,
    "x": _float_list, "format": _format_list, "preset": str, "out": Path,
}


def read_config_file(path: Path) -> dict:
    """Parse a flat ``key = value`` file into typed values."""
    try:
        text = Path(path).read_text()
    except OSError as err:
        raise ConfigError(f"cannot read config {path}: {err}") from err
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _CONVERTERS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        try:
            values[key] = _CONVERTERS[key](value)
        except ValueError as err:
            raise ConfigError(f"{path}:{lineno}: bad value for {key}: {value!r}") from err
    return values


def build_config(args: argparse.Namespace) -> RunConfig:
    values = read_config_file(args.config) if args.config else {}
    for key in _CONVERTERS:
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = flag
    if "format" in values:
        values["formats"] = values.pop("format")
    return RunConfig(**values).validate()


# Suites ---------------------------------------------------------------------

def run_spectrum(cfg: RunConfig) -> SuiteResult:
    n_max = 4 if cfg.n_max is None else cfg.n_max
    if n_max < 0:
        raise ConfigError("n_max must be >= 0")
    rows = radial_solver.spectrum_table(n_max, cfg.grid_points)
    spreads = []
    for n in range(n_max + 1):
        energies = [r["E_computed"] for r in rows if r["n"] == n]
        spreads.append((max(energies) - min(energies)) * (n + 0.5) ** 2)
    worst = max(r["error"] for r in rows)
    passed = worst <= cfg.spectrum_tol and max(spreads) <= cfg.degeneracy_tol
    if "csv" in cfg.formats:
        with open(cfg.out / "spectrum.csv", "w", newline="") as fh:
            write_csv(rows, ("n", "m", "E_computed", "E_exact", "error"), fh)
    detail = {"rows": len(rows), "max_rel_error": worst, "max_degeneracy_spread": max(spreads),
              "spectrum_tol": cfg.spectrum_tol, "degeneracy_tol": cfg.degeneracy_tol}
    return SuiteResult("spectrum", passed, worst, detail=detail)


def _integral_svg(reports, path: Path):
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    ns = sorted({r.params["n"] for r in reports})
    xs = sorted({r.params["x"] for r in reports})
    grid = np.full((len(ns), len(xs)), np.nan)
    for r in reports:
        i, j = ns.index(r.params["n"]), xs.index(r.params["x"])
        err = max(r.abs_error / max(1.0, abs(r.rhs)), 1e-17)
        grid[i, j] = np.fmax(grid[i, j], np.log10(err))
    plt.rcParams["svg.hashsalt"] = "kepler2d"
    fig, ax = plt.subplots(figsize=(5, 4))
    im = ax.imshow(grid, origin="lower", aspect="auto", cmap="viridis")
    ax.set_xticks(range(len(xs)), [f"{x:g}" for x in xs])
    ax.set_yticks(range(len(ns)), [str(n) for n in ns])
    ax.set_xlabel("x")
    ax.set_ylabel("n")
    fig.colorbar(im, label="log10 max over m of scaled |lhs - rhs|")
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def run_integral(cfg: RunConfig) -> SuiteResult:
    n_max = identity_verifier.DEFAULT_N_MAX if cfg.n_max is None else cfg.n_max
    if n_max < 0:
        raise ConfigError("n_max must be >= 0")
    try:
        reports = identity_verifier.scan_report(n_max, cfg.x, cfg.tol, workers=cfg.parallel)
    except DomainError as err:
        raise ConfigError(str(err)) from err
    summary = identity_verifier.summarize(reports)
    if "csv" in cfg.formats:
        (cfg.out / "integral_scan.csv").write_text(reports_to_csv(reports))
    if "json" in cfg.formats:
        payload = {"tol": cfg.tol, "total": summary.total, "passed": summary.n_passed,
                   "worst_error": summary.worst_error,
                   "reports": [r.to_dict() for r in reports]}
        (cfg.out / "integral_scan.json").write_text(dumps_json(payload))
    if "svg" in cfg.formats:
        _integral_svg(reports, cfg.out / "integral_scan.svg")
    failures = [r.label + (f" ({r.params['failure']})" if "failure" in r.params else "")
                for r in reports if not r.passed]
    detail = {"total": summary.total, "passed": summary.n_passed, "tol": cfg.tol,
              "failures": failures[:20]}
    return SuiteResult("integral", summary.passed, summary.worst_error, detail=detail)


def run_fock(cfg: RunConfig) -> SuiteResult:
    n = cfg.fock_n
    lmax = n if cfg.lmax is None else cfg.lmax
    if n < 0 or lmax < 0:
        raise ConfigError("n and lmax must be >= 0")
    if cfg.grid_order < 2 * (max(n, lmax) + 1):
        raise ConfigError(f"grid order {cfg.grid_order} is below 2(l+1) = {2 * (max(n, lmax) + 1)}")
    q0 = 1.0 / (n + 0.5)
    spectrum = focksphere.kernel_eigensolve(cfg.grid_order, q0, max(n, lmax), cfg.fock_tol)
    worst = max(spectrum.max_rel_deviation)
    shell = spectrum.cluster_values[n]
    payload = spectrum.to_dict((max(n, lmax) + 1) ** 2)
    payload.update(n=n, shell_cluster=shell, shell_multiplicity=spectrum.multiplicities[n])
    if "json" in cfg.formats:
        (cfg.out / "fock_spectrum.json").write_text(dumps_json(payload))
    detail = {"grid_order": cfg.grid_order, "n": n, "multiplicities": spectrum.multiplicities,
              "shell_cluster": shell}
    passed = spectrum.clusters_ok() and abs(shell - 1.0) <= cfg.fock_tol
    return SuiteResult("fock", passed, worst, detail=detail)


def run_commutators(cfg: RunConfig) -> SuiteResult:
    sizes = cfg.presets[cfg.preset]
    study = operator_algebra.refinement_study(sizes)
    if "csv" in cfg.formats:
        with open(cfg.out / "commutators.csv", "w", newline="") as fh:
            write_csv(study.table_rows(), ("pair", "field", "h", "residual"), fh)
    annihilation = study.annihilation[-1]
    detail = {"preset": cfg.preset, "sizes": list(sizes), "annihilation_residual": annihilation}
    if not study.slope_checked:
        msg = f"preset {cfg.preset!r} has a single grid; slope check skipped"
        warnings.warn(msg, stacklevel=2)
        detail["warning"] = msg
        # One grid supports no convergence claim, so nothing is checked.
        return SuiteResult("commutators", True, math.nan, detail=detail)
    identities = {name: study.identity_passed(name) for name in operator_algebra.IDENTITIES}
    detail["identities"] = identities
    detail["slopes"] = {f"{p}|{lab}": s for (p, lab), s in study.slopes().items()}
    bound = cfg.annihilation_tol
    if bound is None:
        bound = operator_algebra.ANNIHILATION_BOUNDS.get(cfg.preset, 1e-3)
    detail["annihilation_bound"] = bound
    passed = all(identities.values()) and annihilation <= bound
    return SuiteResult("commutators", passed, study.worst_slope_deviation(), detail=detail)


def run_consistency(cfg: RunConfig) -> SuiteResult:
    """Fourier round trip, sphere identification, generators and the exact j(j+1) relation."""
    errors = {}
    rng = np.random.default_rng(0)
    four = []
    for n in range(3):
        for m in range(-n, n + 1):
            qn = QuantumNumbers(n, m)
            for rho, phi in zip(rng.uniform(0.05, 12.0, 10), rng.uniform(-np.pi, np.pi, 10)):
                four.append(fourier_consistency(qn, RealSpacePoint(rho, phi), 1e-6))
    errors["fourier"] = max(r.abs_error for r in four)
    chi = max(focksphere.chi_identification_error(QuantumNumbers(n, m))
              for n in range(4) for m in range(-n, n + 1))
    errors["chi"] = chi
    k = MomentumPoint(0.37, 0.21)
    gens = {f"{n}{m}": focksphere.generator_convergence(QuantumNumbers(n, m), k)
            for n, m in ((0, 0), (1, 0), (1, 1))}
    a00 = abs(focksphere.generator_action(QuantumNumbers(0, 0), k))
    errors["generator_A_phi00"] = a00
    j_ok = all(operator_algebra.j_squared_identity(n).passed for n in range(65))
    passed = (all(r.passed for r in four) and chi <= 1e-10 and a00 <= 1e-6 and j_ok
              and all(g.passed() for g in gens.values()))
    detail = {"errors": errors, "j_squared_exact": j_ok,
              "generator_slopes": {key: (None if g.exact else g.slope) for key, g in gens.items()}}
    if "json" in cfg.formats:
        (cfg.out / "consistency.json").write_text(dumps_json(detail))
    return SuiteResult("consistency", passed, max(errors.values()), detail=detail)


RUNNERS = {
    "spectrum": run_spectrum,
    "integral": run_integral,
    "fock": run_fock,
    "commutators": run_commutators,
    "consistency": run_consistency,
}


def _timed(name: str, cfg: RunConfig) -> SuiteResult:
    log.info("running %s", name)
    start = time.perf_counter()
    result = RUNNERS[name](cfg)
    result.runtime = time.perf_counter() - start
    return result


def run_suites(names, cfg: RunConfig) -> list:
    if cfg.parallel > 1 and len(names) > 1:
        inner = replace(cfg, parallel=1)
        with ProcessPoolExecutor(min(cfg.parallel, len(names))) as pool:
            return list(pool.map(_timed, names, [inner] * len(names)))
    return [_timed(name, cfg) for name in names]


def write_summary(results, cfg: RunConfig):
    suites = [r.summary() for r in results]
    worst = [s["worst_error"] for s in suites if s["worst_error"] is not None]
    payload = {"passed": all(r.passed for r in results),
               "worst_error": max(worst) if worst else None,
               "runtime": round(sum(r.runtime for r in results), 3),
               "suites": suites}
    (cfg.out / "summary.json").write_text(dumps_json(payload))


# Argument parsing -----------------------------------------------------------

def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--out", type=Path, default=None, help="existing output directory (default: .)")
    p.add_argument("--format", type=_format_list, default=None,
                   help="comma-separated subset of csv,json,svg")
    p.add_argument("--config", type=Path, default=None, help="flat key = value config file")
    p.add_argument("--parallel", type=int, default=None, help="worker processes")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kepler2d", description="Numerical checks of the two-dimensional hydrogen atom.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spectrum", help="finite-difference spectrum and degeneracy")
    p.add_argument("--n-max", dest="n_max", type=int, default=None)
    p.add_argument("--grid-points", dest="grid_points", type=int, default=None)
    p.add_argument("--tol", dest="spectrum_tol", type=float, default=None)
    _add_common(p)

    p = sub.add_parser("verify-integral", help="scan the Legendre-Bessel-Laguerre integral relation")
    p.add_argument("--n-max", dest="n_max", type=int, default=None)
    p.add_argument("--x", type=_float_list, default=None, help="comma-separated x values")
    p.add_argument("--tol", type=float, default=None)
    _add_common(p)

    p = sub.add_parser("fock", help="eigenvalues of the sphere kernel")
    p.add_argument("--grid-order", dest="grid_order", type=int, default=None)
    p.add_argument("--n", dest="fock_n", type=int, default=None)
    p.add_argument("--lmax", type=int, default=None)
    p.add_argument("--tol", dest="fock_tol", type=float, default=None)
    _add_common(p)

    p = sub.add_parser("commutators", help="grid refinement study of the operator algebra")
    p.add_argument("--preset", default=None, help="one of: " + ", ".join(operator_algebra.PRESETS))
    _add_common(p)

    p = sub.add_parser("all", help="run every suite and write summary.json")
    p.add_argument("--n-max", dest="n_max", type=int, default=None,
                   help="shared by spectrum and verify-integral when given")
    p.add_argument("--x", type=_float_list, default=None)
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--grid-order", dest="grid_order", type=int, default=None)
    p.add_argument("--preset", default=None)
    _add_common(p)
    return parser


_COMMAND_SUITES = {
    "spectrum": ("spectrum",),
    "verify-integral": ("integral",),
    "fock": ("fock",),
    "commutators": ("commutators",),
    "all": SUITES,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        cfg = build_config(args)
        results = run_suites(_COMMAND_SUITES[args.command], cfg)
    except (ConfigError, DomainError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    write_summary(results, cfg)
    for r in results:
        worst = "n/a" if math.isnan(r.worst_error) else f"{r.worst_error:.3e}"
        print(f"{r.suite:12s} {'PASS' if r.passed else 'FAIL'}  worst={worst}  ({r.runtime:.1f}s)")
    return 0 if all(r.passed for r in results) else 1


if __name__ == "__main__":
    sys.exit(main())
