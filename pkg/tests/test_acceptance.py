"""Acceptance suite: one test per criterion, each at its stated tolerance.

Every test records a one-line PASS/FAIL summary; the lines are printed at
the end of the pytest run (see ``conftest.py``).
"""

import io
import math
import time

import numpy as np
import pytest

from casimir_audit.cli import main
from casimir_audit.constants import BOLTZMANN, HBAR, SPEED_OF_LIGHT, ZETA3
from casimir_audit.experiments import TheoryBand, exclusion_test, synthetic_series, theory_band
from casimir_audit.lifshitz import Configuration, Geometry, SummationSettings, free_energy, pressure
from casimir_audit.reflection import SchemeConfig, screened_tm
from casimir_audit.thermo import ABS_FLOOR, leading_drude_entropy, nernst_audit, nernst_sweep

from conftest import builtin

SUMMARY: list[str] = []

UM = 1e-6
STANDARD = SchemeConfig()
PLASMA = SchemeConfig("plasma-prescription")
SCREENED_DH = SchemeConfig("screened", "debye-hueckel")
SCREENED_TF = SchemeConfig("screened", "thomas-fermi")
AU_SKIN_DEPTH = SPEED_OF_LIGHT / 1.37e16


def record(number: int, title: str, ok: bool, detail: str) -> None:
    line = f"criterion {number:2d} {'PASS' if ok else 'FAIL'}  {title}: {detail}"
    SUMMARY.append(line)
    print(line)
    assert ok, line


def plates(a):
    return Geometry("parallel-plates", a)


def test_criterion_01_ideal_metal_zero_temperature():
    ideal = builtin("ideal-metal")
    start = time.perf_counter()
    f = free_energy(plates(UM), ideal, STANDARD, 1.0).value
    p = pressure(plates(UM), ideal, STANDARD, 1.0).value
    elapsed = time.perf_counter() - start
    f_ref = -math.pi**2 * HBAR * SPEED_OF_LIGHT / (720 * UM**3)
    p_ref = -math.pi**2 * HBAR * SPEED_OF_LIGHT / (240 * UM**4)
    ef, ep = abs(f / f_ref - 1), abs(p / p_ref - 1)
    record(1, "ideal-metal zero-T limit", ef < 1e-3 and ep < 1e-3 and elapsed < 10,
           f"F rel err {ef:.2e}, P rel err {ep:.2e}, {elapsed:.2f} s")


def test_criterion_02_classical_limit():
    T = 300.0
    f = free_energy(plates(UM), builtin("ideal-metal"), STANDARD, T, SummationSettings(zero_frequency_only=True))
    ref = -BOLTZMANN * T * ZETA3 / (8 * math.pi * UM**2)
    err = abs(f.value / ref - 1)
    record(2, "classical l=0 limit", err <= 1e-10, f"rel err {err:.2e}")


POINTS = [
    ("au-drude", STANDARD, 0.3 * UM, 295.0),
    ("au-drude", STANDARD, 1.0 * UM, 10.0),
    ("au-plasma", PLASMA, 2.0 * UM, 295.0),
    ("si-intrinsic", STANDARD, 0.5 * UM, 295.0),
    ("ionic-dielectric", SCREENED_DH, 1.0 * UM, 1.0),
]


def test_criterion_03_pressure_energy_consistency():
    worst = 0.0
    for name, scheme, a, T in POINTS:
        m = builtin(name)
        da = 1e-3 * a
        fp = free_energy(plates(a + da), m, scheme, T).value
        fm = free_energy(plates(a - da), m, scheme, T).value
        p = pressure(plates(a), m, scheme, T).value
        worst = max(worst, abs(-(fp - fm) / (2 * da) / p - 1))
    record(3, "-dF/da vs pressure at 5 points", worst <= 1e-4, f"worst rel err {worst:.2e}")


def test_criterion_04_plasma_nernst_consistent():
    start = time.perf_counter()
    trace = nernst_audit(UM, Configuration(builtin("au-plasma"), PLASMA))
    elapsed = time.perf_counter() - start
    ok = abs(trace.s_zero) < ABS_FLOOR and trace.verdict == "nernst-consistent" and elapsed < 300
    record(4, "plasma prescription Nernst audit", ok,
           f"S(0+) = {trace.s_zero:.3e} J/(K m^2), {trace.verdict}, {elapsed:.1f} s")


def test_criterion_05_drude_perfect_lattice_violates():
    details, ok = [], True
    # 1 um is the stated point; 2 um additionally satisfies delta0/a <= 0.02
    for a in (1 * UM, 2 * UM):
        trace = nernst_audit(a, Configuration(builtin("au-drude"), STANDARD))
        ref = leading_drude_entropy(a, AU_SKIN_DEPTH)
        err = abs(trace.s_zero / ref - 1)
        ok &= trace.violating and err <= 0.15
        details.append(f"a={a / UM:g} um: S(0+)={trace.s_zero:.4e} vs {ref:.4e} ({err:.1%}, {trace.verdict})")
    record(5, "standard Drude perfect lattice", ok, "; ".join(details))


def test_criterion_06_screened_tf_matches_drude():
    grid = [0.5 * UM, 1 * UM, 2 * UM]
    au = builtin("au-drude")
    traces = nernst_sweep(grid, [("drude", Configuration(au, STANDARD)), ("tf", Configuration(au, SCREENED_TF))],
                          workers=4)
    drude, tf = traces[:3], traces[3:]
    details, ok = [], True
    for d, t in zip(drude, tf):
        gap = abs(d.s_zero - t.s_zero)
        allowed = 3 * (d.residual + t.residual)
        ok &= gap < allowed
        details.append(f"a={d.separation / UM:g} um: |dS|={gap:.2e} vs 3x residuals {allowed:.2e}")
    record(6, "screened-TF and Drude share S(a,0+)", ok, "; ".join(details))


def test_criterion_07_ionic_dielectric_separation_dependence():
    cfg = Configuration(builtin("ionic-dielectric"), SCREENED_DH)
    near, far = nernst_sweep([0.5 * UM, 2 * UM], {"ionic": cfg}, workers=2)
    gap = abs(near.s_zero - far.s_zero)
    allowed = 5 * (near.residual + far.residual)
    ok = near.violating and far.violating and gap > allowed
    record(7, "screened-DH ionic dielectric S(a,0+) depends on a", ok,
           f"S(0.5um)={near.s_zero:.4e}, S(2um)={far.s_zero:.4e}, gap {gap:.2e} vs 5x residuals {allowed:.2e}")


def test_criterion_08_screened_coefficient_limits():
    eps0, k = 11.66, 1e6
    low = abs(screened_tm(eps0, 1e-6 * k, k) - (eps0 - 1) / (eps0 + 1))
    high = abs(screened_tm(eps0, 1e6 * k, k) - 1.0)
    record(8, "screened r_TM limits", low <= 1e-9 and high <= 1e-9,
           f"kappa/k=1e-6: |dr|={low:.2e}; kappa/k=1e6: |dr|={high:.2e} (tolerance 1e-9)")


def test_criterion_09_exclusion_calibration():
    au, dark, light = builtin("au-drude"), builtin("si-intrinsic"), builtin("si-doped")
    base = Configuration((au, dark), STANDARD)
    modified = Configuration((au, light), (STANDARD, SCREENED_DH))
    grid = np.linspace(100e-9, 500e-9, 9)
    g = Geometry("sphere-plate", grid[0], 98.95e-6)
    # fixed density: the band collapses onto its centre
    band = theory_band(grid, modified, (2.1e25, 2.1e25), g, 295.0, base, plates=(1,))
    half_width = 0.1 * np.abs(band.center)
    levels = (0.70, 0.95, 0.999)
    trials, excluded, monotone = 10_000, 0, True
    rng = np.random.default_rng(20240601)
    for seed in rng.integers(0, 2**63, size=trials):
        series = synthetic_series(band, half_width, 0.70, seed=int(seed))
        verdict = exclusion_test(series, band, levels)
        for pt in verdict.points:
            excluded += 0.70 in pt.excluded_at
            if 0.999 in pt.excluded_at and 0.95 not in pt.excluded_at:
                monotone = False
            if 0.95 in pt.excluded_at and 0.70 not in pt.excluded_at:
                monotone = False
    n = trials * grid.size
    rate = excluded / n
    sigma = math.sqrt(0.3 * 0.7 / n)
    ok = abs(rate - 0.30) <= 3 * sigma and monotone
    record(9, "exclusion calibration", ok,
           f"rate {rate:.4f} over {n} points (3 sigma = {3 * sigma:.4f}), monotone={monotone}")


def _cli(*argv):
    out = io.StringIO()
    code = main(list(argv), stdout=out)
    assert code == 0, argv
    return out.getvalue()


def test_criterion_10_determinism(tmp_path):
    files = {}
    for workers in (1, 8):
        d = tmp_path / f"w{workers}"
        d.mkdir()
        _cli("nernst", "--preset", "ionic-dielectric", "--out", str(d / "sweep.csv"), "--workers", str(workers))
        _cli("synth", "--preset", "si-doped", "--out", str(d / "series.csv"), "--seed", "42",
             "--workers", str(workers))
        _cli("compare", "--preset", "si-doped", "--series", str(d / "series.csv"), "--out", str(d / "report.json"),
             "--seed", "42", "--workers", str(workers))
        files[workers] = {p.name: p.read_bytes() for p in sorted(d.iterdir())}
    same = files[1] == files[8]
    record(10, "byte-identical outputs for 1 and 8 workers", same, f"compared {sorted(files[1])}")
