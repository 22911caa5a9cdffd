"""Casimir entropy and the Nernst-theorem audit.

Entropy is obtained by differentiating the free energy numerically in T
(central differences with one Richardson step).  The audit walks a
descending temperature ladder with the carrier density held fixed and
extrapolates S(a, T) to T = 0 with a cubic through the four coldest points.
"""

from __future__ import annotations

import contextlib
import csv
import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .constants import BOLTZMANN, ZETA3
from .dielectric import applicability_gate
from .errors import CasimirError, DomainError
from .lifshitz import Configuration, Geometry, SummationSettings, _pair, free_energy
from .parallel import ordered_map

#: Tighter engine settings used for entropy by default; F must be accurate
#: to ~1e-13 relative for differences over dT ~ T/16 to resolve 1e-17 J/(K m^2).
AUDIT_SETTINGS = SummationSettings(rtol=1e-13, quad_rtol=1e-13)

ABS_FLOOR = 1e-16  # J/(K m^2)
MIN_TEMPERATURE = 1e-3  # K, lowest temperature ever evaluated


@dataclass(frozen=True)
class TemperatureLadder:
    """Geometric ladder ``start, start*ratio, ...`` down to ``floor``."""

    start: float = 1.0
    ratio: float = 0.5
    floor: float = 5e-3
    count: int = 16

    def __post_init__(self):
        if not 0 < self.ratio < 1:
            raise DomainError("ladder ratio must lie in (0, 1)")
        if not self.start > self.floor > 0:
            raise DomainError("ladder needs start > floor > 0")
        if len(self.temperatures) < 4:
            raise DomainError("ladder must contain at least 4 temperatures")

    @property
    def temperatures(self) -> tuple[float, ...]:
        out = []
        T = self.start
        while T >= self.floor and len(out) < self.count:
            out.append(T)
            T *= self.ratio
        return tuple(out)


@dataclass(frozen=True)
class EntropyEstimate:
    value: float
    error: float
    temperature: float
    step: float


def entropy(
    a: float,
    materials,
    scheme,
    T: float,
    step: float = 1.0 / 16,
    settings: SummationSettings | None = None,
    workers: int = 1,
) -> EntropyEstimate:
    """Entropy per unit area ``-dF/dT`` in J/(K m^2).

    Central differences at ``dT`` and ``dT/2`` combined by one Richardson
    step; the error estimate is the Richardson correction plus the
    propagated engine error.  ``dT = step * T`` is clamped so that
    ``T - dT`` stays above 1 mK.
    """
    settings = settings or AUDIT_SETTINGS
    dT = step * T
    if T - dT < MIN_TEMPERATURE:
        dT = T - MIN_TEMPERATURE
    if not dT > 0:
        raise DomainError(f"temperature {T} K too low for a finite-difference step")
    geometry = Geometry("parallel-plates", a)
    temps = [T + dT, T - dT, T + dT / 2, T - dT / 2]

    def F(t):
        try:
            return free_energy(geometry, materials, scheme, t, settings)
        except CasimirError as exc:
            raise type(exc)(f"{exc} [entropy at a = {a:.4g} m, T = {T:.4g} K]") from exc

    fp, fm, hp, hm = ordered_map(F, temps, workers)
    d1 = -(fp.value - fm.value) / (2 * dT)
    d2 = -(hp.value - hm.value) / dT
    value = (4 * d2 - d1) / 3
    noise = (4 * (hp.error + hm.error) / dT + (fp.error + fm.error) / (2 * dT)) / 3
    return EntropyEstimate(value, abs(d2 - d1) / 3 + noise, T, dT)


def extrapolate_to_zero(temperatures: Sequence[float], entropies: Sequence[float]):
    """Value at T = 0 of the cubic through four points, and a residual.

    The residual is the spread between the cubic and a least-squares
    quadratic through the same points, evaluated at T = 0.
    """
    T = np.asarray(temperatures, dtype=float)
    S = np.asarray(entropies, dtype=float)
    if T.size != 4:
        raise DomainError("extrapolation uses exactly four points")
    scale = T.max()
    x = T / scale
    cubic = np.polyfit(x, S, 3)[-1]
    quad = np.polyfit(x, S, 2)[-1]
    return float(cubic), float(abs(cubic - quad))


@dataclass(frozen=True)
class EntropyTrace:
    separation: float
    material: str
    scheme: str
    temperatures: tuple[float, ...]
    entropies: tuple[float, ...]
    errors: tuple[float, ...]
    s_zero: float
    residual: float
    verdict: str
    diagnostics: tuple[str, ...] = field(default=())

    @property
    def violating(self) -> bool:
        return self.verdict == "nernst-violating"


def classify(s_zero: float, residual: float, floor: float = ABS_FLOOR) -> str:
    if abs(s_zero) > max(floor, 3 * residual):
        return "nernst-violating"
    return "nernst-consistent"


def _describe(config: Configuration):
    mats, schemes = _pair(config.materials), _pair(config.scheme)
    material = mats[0].name if mats[0] == mats[1] else f"{mats[0].name}|{mats[1].name}"
    scheme = schemes[0].label if schemes[0] == schemes[1] else f"{schemes[0].label}|{schemes[1].label}"
    return material, scheme


def nernst_audit(
    a: float,
    config: Configuration,
    ladder: TemperatureLadder | None = None,
    settings: SummationSettings | None = None,
    floor: float = ABS_FLOOR,
    workers: int = 1,
) -> EntropyTrace:
    """Sample S(a, T) down the ladder and classify the T -> 0 limit."""
    ladder = ladder or TemperatureLadder()
    settings = settings or AUDIT_SETTINGS
    material, scheme = _describe(config)
    temps = ladder.temperatures
    notes = []

    gates = {applicability_gate(m.carriers).verdict for m in _pair(config.materials) if m.carriers is not None}
    if len(gates) > 1 and any(s.scheme == "screened" for s in _pair(config.scheme)):
        notes.append("applicability gate differs between plates")

    estimates = ordered_map(
        lambda T: entropy(a, config.materials, config.scheme, T, settings=settings), temps, workers
    )
    S = np.array([e.value for e in estimates])
    err = np.array([e.error for e in estimates])
    tail_T, tail_S = np.array(temps[-4:]), S[-4:]
    s_zero, residual = extrapolate_to_zero(tail_T, tail_S)
    residual += float(err[-4:].max())

    magnitudes = np.abs(tail_S)
    steps = np.diff(magnitudes)
    # steps smaller than the numerical error of their endpoints count as ties
    tail_err = err[-4:]
    significant = np.abs(steps) > tail_err[1:] + tail_err[:-1]
    monotone = bool(np.all(steps[significant] <= 0) or np.all(steps[significant] >= 0))
    if magnitudes.max() <= floor:
        verdict = "nernst-consistent"
    elif not monotone:
        verdict = "inconclusive"
        notes.append("non-monotone |S| over the four coldest points")
    else:
        verdict = classify(s_zero, residual, floor)
    return EntropyTrace(
        a, material, scheme, tuple(temps), tuple(S.tolist()), tuple(err.tolist()),
        s_zero, residual, verdict, tuple(notes),
    )


def nernst_sweep(
    separations: Sequence[float],
    catalog: Sequence[tuple[str, Configuration]] | dict,
    ladder: TemperatureLadder | None = None,
    settings: SummationSettings | None = None,
    floor: float = ABS_FLOOR,
    workers: int = 1,
) -> list[EntropyTrace]:
    """One trace per (separation, catalog entry), in grid-major order.

    For violating entries the S(a, 0+) values are checked for dependence on
    the separation; the outcome is appended to each trace's diagnostics.
    """
    grid = [float(a) for a in separations]
    if not grid:
        raise DomainError("separation grid is empty")
    entries = list(catalog.items()) if isinstance(catalog, dict) else list(catalog)
    jobs = [(a, name, cfg) for name, cfg in entries for a in grid]
    traces = ordered_map(
        lambda job: _named(nernst_audit(job[0], job[2], ladder, settings, floor), job[1]), jobs, workers
    )
    out = []
    for i, (name, _) in enumerate(entries):
        block = traces[i * len(grid) : (i + 1) * len(grid)]
        violating = [t for t in block if t.violating]
        if len(violating) >= 2:
            values = np.array([t.s_zero for t in violating])
            spread = np.ptp(values)
            noise = 3 * max(t.residual for t in violating)
            note = "S(a,0+) depends on separation" if spread > noise else "S(a,0+) independent of separation"
            block = [_with_note(t, note) if t.violating else t for t in block]
        out.extend(block)
    return out


def _named(trace: EntropyTrace, name: str) -> EntropyTrace:
    return replace(trace, material=name) if name else trace


def _with_note(trace: EntropyTrace, note: str) -> EntropyTrace:
    return replace(trace, diagnostics=trace.diagnostics + (note,))


@contextlib.contextmanager
def _text_sink(target):
    if hasattr(target, "write"):
        yield target
    else:
        with open(target, "w", newline="") as fh:
            yield fh


SWEEP_COLUMNS = ("a_m", "scheme", "material", "T_K", "S", "S_err", "S_at_zero", "residual", "verdict")


def write_sweep_csv(traces: Sequence[EntropyTrace], path) -> None:
    """One row per ladder temperature of every trace; ``path`` may be an open text file."""
    with _text_sink(path) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SWEEP_COLUMNS)
        for t in traces:
            for T, S, err in zip(t.temperatures, t.entropies, t.errors):
                writer.writerow([repr(t.separation), t.scheme, t.material, repr(T), repr(S), repr(err),
                                 repr(t.s_zero), repr(t.residual), t.verdict])


def leading_drude_entropy(a: float, skin_depth: float = 0.0) -> float:
    """Closed-form T -> 0 entropy of Drude plates on a perfect lattice.

    ``-k_B zeta(3) / (16 pi a^2) * (1 - 4 delta0/a)``; used as an oracle.
    """
    return -BOLTZMANN * ZETA3 / (16 * math.pi * a * a) * (1 - 4 * skin_depth / a)
