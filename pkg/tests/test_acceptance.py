"""Acceptance gate: one test per criterion, each at its stated tolerance."""
import math
import time
from fractions import Fraction

import numpy as np

from kepler2d import focksphere, identity_verifier, operator_algebra, radial_solver
from kepler2d.eigenstates import MomentumPoint, QuantumNumbers, RealSpacePoint, fourier_consistency

X_VALUES = (0.1, 0.5, 1.0, 2.0, 5.0, 10.0)


def test_01_spectrum(criterion):
    start = time.perf_counter()
    rows = radial_solver.spectrum_table(4)
    runtime = time.perf_counter() - start
    worst = max(r["error"] for r in rows)
    ok = len(rows) == 15 and worst <= 1e-6 and runtime <= 30.0
    criterion(1, "spectrum n<=4 rel error <= 1e-6 in <= 30 s", ok,
              f"worst={worst:.2e} runtime={runtime:.1f}s")
    assert ok


def test_02_degeneracy(criterion):
    reports = [radial_solver.degeneracy_check(n, tol=1e-5) for n in range(5)]
    worst = max(r.rel_error for r in reports)
    ok = all(r.passed for r in reports)
    criterion(2, "degeneracy spread <= 1e-5 relative, n<=4", ok, f"worst={worst:.2e}")
    assert ok


def test_03_integral_relation(criterion):
    reports = identity_verifier.scan_report(8, X_VALUES, 1e-8)
    summary = identity_verifier.summarize(reports)
    known = [abs(identity_verifier.verify_new_integral(0, 0, x, 1e-10).lhs - 2 * math.exp(-x)) for x in X_VALUES]
    ok = summary.total == 270 and summary.passed and max(known) <= 1e-10
    criterion(3, "integral relation, 270 cases at 1e-8; n=m=0 vs 2exp(-x) at 1e-10", ok,
              f"passed={summary.n_passed}/{summary.total} worst={summary.worst_error:.2e} "
              f"known={max(known):.2e}")
    assert ok


def test_04_phase_form(criterion):
    cases = [(n, m, x) for n in range(1, 5) for m in range(-n, 0) for x in (0.5, 2.0)]
    holds = [identity_verifier.verify_phase_form(n, m, x, 1e-8) for n, m, x in cases]
    # (-i)^|m| and i^|m| coincide for even |m|, so only odd |m| can tell them apart.
    control = [identity_verifier.verify_phase_form(n, m, x, 1e-8, phase=1j ** abs(m))
               for n, m, x in cases if m % 2]
    ok = all(r.passed for r in holds) and control and not any(r.passed for r in control)
    criterion(4, "phase form for negative m at 1e-8; +i^|m| control fails", bool(ok),
              f"holds={sum(r.passed for r in holds)}/{len(holds)} "
              f"control_failed={sum(not r.passed for r in control)}/{len(control)}")
    assert ok


def test_05_fock_kernel(criterion):
    details = []
    ok = True
    for n in range(5):
        spectrum = focksphere.kernel_eigensolve(30, 1.0 / (n + 0.5), lmax_report=4, cluster_tol=1e-3)
        start = n * n
        shell = spectrum.eigenvalues[start:start + 2 * n + 1]
        shell_ok = np.max(np.abs(shell - 1.0)) <= 1e-3
        ok &= spectrum.clusters_ok() and spectrum.multiplicities == [1, 3, 5, 7, 9] and bool(shell_ok)
        details.append(max(spectrum.max_rel_deviation))
    criterion(5, "kernel clusters at order 30 within 1e-3, multiplicities 2l+1, l=n at 1", ok,
              f"worst={max(details):.2e}")
    assert ok


def test_06_chi_identification(criterion):
    worst = max(focksphere.chi_identification_error(QuantumNumbers(n, m), 200, seed=n)
                for n in range(4) for m in range(-n, n + 1))
    ok = worst <= 1e-10
    criterion(6, "chi = 2 pi Y_n^m at 200 points, n<=3, within 1e-10", ok, f"worst={worst:.2e}")
    assert ok


def test_07_operator_algebra(criterion, default_study):
    lo, hi = 2.0 - 0.15, 2.0 + 0.15
    slopes = default_study.slopes()
    passed = {name: default_study.identity_passed(name, (lo, hi)) for name in operator_algebra.IDENTITIES}
    annihilation = default_study.annihilation[-1]
    ok = len(passed) == 5 and all(passed.values()) and annihilation <= 1e-3
    spread = (min(slopes.values()), max(slopes.values()))
    criterion(7, "five identities O(h^2) slope 2 +- 0.15; A Psi_00 <= 1e-3 on finest grid", ok,
              f"slopes=[{spread[0]:.3f}, {spread[1]:.3f}] A_psi00={annihilation:.2e}")
    assert ok


def test_08_j_squared(criterion):
    ok = True
    for n in range(65):
        report = operator_algebra.j_squared_identity(n)
        energy = -1 / (Fraction(2 * n + 1, 2)) ** 2
        ok &= report.passed and report.lhs == n * (n + 1) == -(Fraction(1, 4) + 1 / energy)
    criterion(8, "n(n+1) = -(1/4 + 1/E_n) exactly, n<=64", ok)
    assert ok


def test_09_generators(criterion):
    k = MomentumPoint(0.37, 0.21)
    results = {nm: focksphere.generator_convergence(QuantumNumbers(*nm), k) for nm in ((0, 0), (1, 0), (1, 1))}
    points = [MomentumPoint(*p) for p in ((0.37, 0.21), (1.5, -0.8), (0.02, 3.0))]
    a00 = max(abs(focksphere.generator_action(QuantumNumbers(0, 0), p)) for p in points)
    ok = all(r.passed(2.0, 0.1) for r in results.values()) and a00 <= 1e-6
    slopes = ", ".join(f"{nm}: {'exact' if r.exact else f'{r.slope:.3f}'}" for nm, r in results.items())
    criterion(9, "rotation generator O(alpha^2), slope 2 +- 0.1; A Phi_00 = 0 within 1e-6", ok,
              f"{slopes}; A_phi00={a00:.1e}")
    assert ok


def test_10_fourier_consistency(criterion):
    rng = np.random.default_rng(10)
    worst = 0.0
    ok = True
    for n in range(3):
        for m in range(-n, n + 1):
            qn = QuantumNumbers(n, m)
            for rho, phi in zip(rng.uniform(0.0, 10.0, 10), rng.uniform(-math.pi, math.pi, 10)):
                r = fourier_consistency(qn, RealSpacePoint(rho, phi), tol=1e-6)
                worst = max(worst, r.abs_error)
                ok &= r.passed
    criterion(10, "Psi from Phi at 10 points per state, n<=2, within 1e-6", ok, f"worst={worst:.2e}")
    assert ok
