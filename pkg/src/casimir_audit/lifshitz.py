"""Lifshitz free energy, pressure and sphere-plate force.

Every Matsubara term is a transverse-wavenumber integral.  With
``y = 2 a q_l`` the free-energy term becomes::

    (1 / 4a^2) * integral_{y_l}^inf  y * sum_pol ln(1 - r1 r2 e^-y) dy,   y_l = 2 a xi_l / c

and the pressure term::

    (1 / 8a^3) * integral_{y_l}^inf  y^2 * sum_pol r1 r2 e^-y / (1 - r1 r2 e^-y) dy

Terms with l >= 1 share one Gauss-Kronrod panel layout in ``t = y - y_l``
so quadrature errors vary smoothly with frequency (and hence with T).
At low temperature the sum over l is carried by the Euler-Maclaurin
formula: a few hundred explicit terms followed by the integral over xi
with Gregory end corrections.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .constants import BOLTZMANN, HBAR, SPEED_OF_LIGHT
from .dielectric import Material, susceptibility
from .errors import CasimirError, ConvergenceError, DomainError
from .parallel import ordered_map
from .quadrature import GREGORY, PanelRule, gregory_correction, integrate
from .reflection import SchemeConfig, _fresnel_from_chi, check_admissible, zero_frequency


class PFAWarning(UserWarning):
    """Sphere radius too small compared with the separation for PFA."""


@dataclass(frozen=True)
class Geometry:
    kind: str
    separation: float
    radius: float | None = None

    def __post_init__(self):
        if self.kind not in ("parallel-plates", "sphere-plate"):
            raise DomainError(f"unknown geometry {self.kind!r}")
        if not self.separation > 0:
            raise DomainError(f"separation must be > 0, got {self.separation}")
        if self.kind == "sphere-plate":
            if self.radius is None or not self.radius > 0:
                raise DomainError("sphere-plate geometry needs a positive radius")
            if self.radius / self.separation <= 100:
                warnings.warn(
                    f"R/a = {self.radius / self.separation:.3g} <= 100: PFA unreliable",
                    PFAWarning,
                    stacklevel=3,
                )

    def at(self, separation: float) -> Geometry:
        return Geometry(self.kind, separation, self.radius)


@dataclass(frozen=True)
class SummationSettings:
    """Tolerances for the Matsubara sum and the wavenumber quadrature.

    ``em_crossover`` is the number of Matsubara terms above which the sum
    switches to the Euler-Maclaurin treatment.
    """

    rtol: float = 1e-9
    max_index: int = 10_000_000
    quad_atol: float = 0.0
    tail_estimate: bool = True
    quad_rtol: float = 1e-13
    em_crossover: int = 4096
    zero_frequency_only: bool = False

    def __post_init__(self):
        if not 0 < self.rtol < 1:
            raise DomainError("rtol must lie in (0, 1)")
        if self.max_index < 1:
            raise DomainError("max_index must be >= 1")
        if not 0 < self.quad_rtol < 1:
            raise DomainError("quad_rtol must lie in (0, 1)")


@dataclass(frozen=True)
class LifshitzResult:
    value: float
    terms: int
    truncation_error: float
    quadrature_error: float
    method: str = "direct"

    @property
    def error(self) -> float:
        return self.truncation_error + self.quadrature_error

    def scaled(self, factor: float) -> LifshitzResult:
        f = abs(factor)
        return LifshitzResult(
            self.value * factor, self.terms, self.truncation_error * f, self.quadrature_error * f, self.method
        )


class Configuration(NamedTuple):
    """Material pair plus zero-frequency schemes (one per plate or shared)."""

    materials: Material | tuple[Material, Material]
    scheme: SchemeConfig | tuple[SchemeConfig, SchemeConfig]


def matsubara_frequency(l: int, T: float) -> float:
    """``xi_l = 2 pi k_B T l / hbar`` in rad/s."""
    if not T > 0:
        raise DomainError(f"temperature must be > 0, got {T}")
    return 2.0 * math.pi * BOLTZMANN * T * l / HBAR


def _pair(x):
    if isinstance(x, (tuple, list)):
        if len(x) != 2:
            raise DomainError("expected one or two entries")
        return tuple(x)
    return (x, x)


# Panel edges in t = y - y_l.  Graded towards t = 0 where small-frequency
# terms (Drude TE, l = 0 log singularity) have their structure.
_T_EDGES = np.array([
    0.0, 1e-9, 1e-7, 1e-5, 1e-4, 1e-3, 3e-3, 1e-2, 0.03, 0.07, 0.15, 0.3, 0.5, 0.75,
    1.1, 1.6, 2.2, 3.0, 4.0, 5.5, 7.5, 10.0, 13.0, 17.0, 22.0, 28.0, 35.0, 43.0, 52.0,
])
_T_MAX = float(_T_EDGES[-1])
# Edges of the xi integral in units of c/2a, offsets beyond its lower limit.
_S_OFFSETS = np.array([0.0, 0.05, 0.15, 0.3, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0, 4.0, 6.0, 8.0, 11.0, 15.0, 20.0, 27.0, 36.0, 46.0, 58.0])
_EM_START = 256
_EM_SAMPLES = len(GREGORY) + 1


def _log_one_minus(x, y, e):
    """``ln(1 - x e^-y)`` without cancellation for x e^-y near 0 or 1."""
    xe = x * e
    with np.errstate(divide="ignore", invalid="ignore"):
        near_one = np.log((1.0 - x) - x * np.expm1(-y))
    return np.where(xe < 0.5, np.log1p(-xe), near_one)


def _occupation(x, y, e):
    """``x e^-y / (1 - x e^-y)``."""
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(x == 0, 0.0, x * e / ((1.0 - x) - x * np.expm1(-y)))


class _Kernel:
    """Wavenumber integrals for one (plates, a, T, observable) combination."""

    def __init__(self, materials, schemes, a: float, T: float, kind: str, settings: SummationSettings):
        self.materials = tuple(m.at_temperature(T) for m in materials)
        self.schemes = schemes
        for m, s in zip(self.materials, self.schemes):
            check_admissible(m, s)
        self.a = a
        self.T = T
        self.kind = kind
        self.settings = settings
        self.vacuum = any(m.is_vacuum for m in self.materials)
        self.y_scale = 1.0 / (4 * a * a) if kind == "energy" else 1.0 / (8 * a**3)
        self.rule = PanelRule.from_edges(_T_EDGES)

    def _h(self, y, x_tm, x_te):
        e = np.exp(-y)
        if self.kind == "energy":
            return y * (_log_one_minus(x_tm, y, e) + _log_one_minus(x_te, y, e))
        return y * y * (_occupation(x_tm, y, e) + _occupation(x_te, y, e))

    def zero_term(self):
        """l = 0 wavenumber integral (without the 1/2 weight) and its error."""
        if self.vacuum:
            return 0.0, 0.0
        a, T = self.a, self.T

        def fn(y):
            k = y / (2 * a)
            r1 = zero_frequency(self.materials[0], self.schemes[0], k, T)
            r2 = zero_frequency(self.materials[1], self.schemes[1], k, T)
            return self._h(y, r1.tm * r2.tm, r1.te * r2.te)

        res = integrate(fn, _T_EDGES, rtol=self.settings.quad_rtol, atol=self.settings.quad_atol)
        return float(res.value), float(res.error)

    def _reflections(self, m: Material, xi, q):
        if m.ideal_metal:
            ones = np.ones(np.broadcast(xi, q).shape)
            return ones, -ones
        chi = susceptibility(m, xi)
        return _fresnel_from_chi(chi, xi, q)

    def _sample(self, xi, rule):
        xi = xi[:, None]
        y0 = 2 * self.a * xi / SPEED_OF_LIGHT
        y = y0 + rule.nodes[None, :]
        q = y / (2 * self.a)
        tm1, te1 = self._reflections(self.materials[0], xi, q)
        tm2, te2 = self._reflections(self.materials[1], xi, q)
        return self._h(y, tm1 * tm2, te1 * te2)

    def terms(self, xi):
        """Wavenumber integrals for frequencies ``xi > 0`` plus error estimates."""
        xi = np.asarray(xi, dtype=float)
        if self.vacuum:
            return np.zeros_like(xi), np.zeros_like(xi)
        rtol = self.settings.quad_rtol
        while True:
            values, errors, panel_err = self.rule.apply(self._sample(xi, self.rule))
            floor = 1e-4 * np.max(np.abs(values)) if values.size else 0.0
            target = rtol * np.maximum(np.abs(values), floor) + self.settings.quad_atol
            bad = errors > target
            if not bad.any():
                return values, errors
            if self.rule.n_panels > 2000:
                raise ConvergenceError(
                    f"wavenumber quadrature stalled at a = {self.a:.4g} m, T = {self.T:.4g} K"
                )
            pe = panel_err[bad]
            mask = np.any(pe >= 0.25 * pe.max(axis=-1, keepdims=True), axis=0)
            self.rule = self.rule.bisect(mask)

    def xi_integral(self, xi_start: float):
        """``integral_{xi_start}^inf terms(xi) d xi`` with its error estimate."""
        xi_c = SPEED_OF_LIGHT / (2 * self.a)
        s0 = xi_start / xi_c
        edges = np.union1d(s0 + _S_OFFSETS, s0 * np.array([1.25, 1.6, 2.0, 2.6, 3.4, 4.5, 6.0, 8.0]))
        edges = edges[edges <= s0 + _S_OFFSETS[-1]]

        def fn(s):
            return self.terms(xi_c * s)[0]

        res = integrate(fn, edges, rtol=self.settings.quad_rtol, atol=0.0)
        return float(res.value) * xi_c, float(res.error) * xi_c


def _truncation_index(f0_half: float, terms: np.ndarray, rtol: float):
    """First index L (terms[L] is the last kept) meeting the stopping rule, and its tail."""
    partial = f0_half + np.cumsum(terms)
    small = np.abs(terms) <= rtol * np.abs(partial)
    ok = small.copy()
    ok[1:] &= small[:-1]
    ok[2:] &= small[:-2]
    ok[:2] = False
    for L in np.flatnonzero(ok):
        last, prev = terms[L], terms[L - 1]
        if last == 0:
            return int(L), 0.0
        ratio = last / prev if prev != 0 else math.inf
        if 0 <= ratio < 1:
            tail = last * ratio / (1 - ratio)
            if abs(tail) <= rtol * abs(partial[L]):
                return int(L), float(tail)
    return None, None


def _temperature_prefactor(kind: str, T: float) -> float:
    if kind == "energy":
        return BOLTZMANN * T / (2 * math.pi)
    return -BOLTZMANN * T / math.pi


def _matsubara_sum(materials, schemes, a, T, kind, settings: SummationSettings) -> LifshitzResult:
    if not T > 0:
        raise DomainError(f"temperature must be > 0, got {T}")
    if not a > 0:
        raise DomainError(f"separation must be > 0, got {a}")
    kernel = _Kernel(materials, schemes, a, T, kind, settings)
    pref = _temperature_prefactor(kind, T) * kernel.y_scale
    if kernel.vacuum:
        return LifshitzResult(0.0, 0, 0.0, 0.0)
    f0, f0_err = kernel.zero_term()
    if settings.zero_frequency_only:
        return LifshitzResult(pref * 0.5 * f0, 1, 0.0, abs(pref) * 0.5 * f0_err, "zero-frequency")

    delta = matsubara_frequency(1, T)
    xi_c = SPEED_OF_LIGHT / (2 * a)
    needed = math.log(1.0 / settings.rtol) * xi_c / delta
    if needed > settings.em_crossover:
        return _euler_maclaurin(kernel, f0, f0_err, delta, pref, settings)
    return _direct(kernel, f0, f0_err, delta, pref, settings)


def _direct(kernel, f0, f0_err, delta, pref, settings):
    values: list[np.ndarray] = []
    errors: list[np.ndarray] = []
    start, block = 1, 256
    while True:
        if start > settings.max_index:
            raise ConvergenceError(
                f"Matsubara sum not converged within {settings.max_index} terms "
                f"(a = {kernel.a:.4g} m, T = {kernel.T:.4g} K)"
            )
        stop = min(start + block, settings.max_index + 1)
        v, e = kernel.terms(np.arange(start, stop) * delta)
        values.append(v)
        errors.append(e)
        terms = np.concatenate(values)
        L, tail = _truncation_index(0.5 * f0, terms, settings.rtol)
        if L is not None:
            break
        start, block = stop, min(2 * block, 8192)
    kept = terms[: L + 1]
    total = math.fsum([0.5 * f0, *kept.tolist()])
    if settings.tail_estimate:
        total += tail
    quad_err = 0.5 * f0_err + math.fsum(np.concatenate(errors)[: L + 1].tolist())
    return LifshitzResult(pref * total, L + 1, abs(pref * tail), abs(pref) * quad_err, "direct")


def _euler_maclaurin(kernel, f0, f0_err, delta, pref, settings):
    start = _EM_START
    while True:
        ls = np.arange(1, start + _EM_SAMPLES)
        v, e = kernel.terms(ls * delta)
        head = math.fsum([0.5 * f0, *v[: start - 1].tolist(), 0.5 * v[start - 1]])
        samples = v[start - 1 :]
        greg = gregory_correction(samples)
        last = abs(GREGORY[-1] * np.diff(samples, n=_EM_SAMPLES - 1)[0])
        tail, tail_err = kernel.xi_integral(start * delta)
        total = head + greg + tail / delta
        if last <= settings.rtol * abs(total) or start * 4 > settings.max_index:
            break
        start *= 4
    if last > settings.rtol * abs(total):
        raise ConvergenceError(f"Euler-Maclaurin end correction not converged at T = {kernel.T:.4g} K")
    quad_err = 0.5 * f0_err + math.fsum(e.tolist()) + tail_err / delta
    return LifshitzResult(pref * total, int(ls[-1]) + 1, abs(pref) * last, abs(pref) * quad_err, "euler-maclaurin")


def _plates(materials, scheme):
    return _pair(materials), _pair(scheme)


def free_energy(geometry: Geometry, materials, scheme, T: float, settings: SummationSettings | None = None) -> LifshitzResult:
    """Free energy per unit area (J/m^2) between two half-spaces."""
    settings = settings or SummationSettings()
    mats, schemes = _plates(materials, scheme)
    return _matsubara_sum(mats, schemes, geometry.separation, T, "energy", settings)


def pressure(geometry: Geometry, materials, scheme, T: float, settings: SummationSettings | None = None) -> LifshitzResult:
    """Casimir pressure (Pa); negative means attraction."""
    settings = settings or SummationSettings()
    mats, schemes = _plates(materials, scheme)
    return _matsubara_sum(mats, schemes, geometry.separation, T, "pressure", settings)


def sphere_force(geometry: Geometry, materials, scheme, T: float, settings: SummationSettings | None = None) -> LifshitzResult:
    """Sphere-plate force (N) in the proximity force approximation, ``2 pi R F_pp(a)``."""
    if geometry.kind != "sphere-plate":
        raise DomainError("sphere_force needs a sphere-plate geometry")
    plates = Geometry("parallel-plates", geometry.separation)
    return free_energy(plates, materials, scheme, T, settings).scaled(2 * math.pi * geometry.radius)


def observable(kind: str, geometry: Geometry, config: Configuration, T: float, settings=None) -> LifshitzResult:
    """Dispatch to ``energy``, ``pressure`` or ``force``."""
    if kind == "energy":
        return free_energy(geometry, config.materials, config.scheme, T, settings)
    if kind == "pressure":
        return pressure(geometry, config.materials, config.scheme, T, settings)
    if kind == "force":
        return sphere_force(geometry, config.materials, config.scheme, T, settings)
    raise DomainError(f"unknown observable {kind!r}")


@dataclass(frozen=True)
class DifferenceSeries:
    separations: np.ndarray
    values: np.ndarray
    errors: np.ndarray


def observable_difference(
    base: Configuration,
    modified: Configuration,
    geometry: Geometry,
    separations: Sequence[float],
    T: float,
    settings: SummationSettings | None = None,
    kind: str = "force",
    workers: int = 1,
) -> DifferenceSeries:
    """``value(modified) - value(base)`` over a grid of separations."""
    grid = np.asarray(separations, dtype=float)
    if grid.size == 0:
        raise DomainError("separation grid is empty")

    def one(a):
        g = geometry.at(a)
        try:
            mod = observable(kind, g, modified, T, settings)
            ref = observable(kind, g, base, T, settings)
        except CasimirError as exc:
            raise type(exc)(f"{exc} [a = {a!r} m]") from exc
        return mod.value - ref.value, mod.error + ref.error

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", PFAWarning)
        out = ordered_map(one, grid.tolist(), workers)
    return DifferenceSeries(grid, np.array([o[0] for o in out]), np.array([o[1] for o in out]))
