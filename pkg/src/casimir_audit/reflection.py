"""Reflection coefficients at imaginary Matsubara frequencies.

Nonzero frequencies always use the Fresnel coefficients of the full
permittivity.  The scheme only changes the zero-frequency term:

* ``standard``: the xi -> 0 limit of Fresnel (Drude metal: TM = 1, TE = 0).
* ``plasma-prescription``: TM = 1 and the plasma-model TE coefficient.
* ``screened``: static TM coefficient with carrier screening, TE = 0.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .constants import SPEED_OF_LIGHT
from .dielectric import (
    DEGENERATE,
    MAXWELL_BOLTZMANN,
    Material,
    applicability_gate,
    debye_hueckel_length,
    susceptibility,
    thomas_fermi_length,
)
from .errors import DomainError, SchemeError

SCHEMES = ("standard", "plasma-prescription", "screened")
SCREENING = ("debye-hueckel", "thomas-fermi")


@dataclass(frozen=True)
class SchemeConfig:
    """Zero-frequency treatment for one half-space.

    ``eps0_in_kappa`` selects whether the static core permittivity divides
    the squared screening wavenumber (``kappa**2 = e**2 n / (eps_vac eps0 k_B T)``)
    or is left out of it.
    """

    scheme: str = "standard"
    screening: str | None = None
    eps0_in_kappa: bool = True

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise SchemeError(f"unknown scheme {self.scheme!r}; expected one of {SCHEMES}")
        if self.scheme == "screened":
            if self.screening not in SCREENING:
                raise SchemeError("screened scheme needs screening='debye-hueckel' or 'thomas-fermi'")
        elif self.screening is not None:
            raise SchemeError(f"screening source given for non-screened scheme {self.scheme!r}")

    @property
    def label(self) -> str:
        if self.scheme == "screened":
            return "screened-DH" if self.screening == "debye-hueckel" else "screened-TF"
        return self.scheme

    @classmethod
    def from_label(cls, label: str, eps0_in_kappa: bool = True) -> SchemeConfig:
        aliases = {
            "standard": ("standard", None),
            "drude": ("standard", None),
            "plasma": ("plasma-prescription", None),
            "plasma-prescription": ("plasma-prescription", None),
            "screened-dh": ("screened", "debye-hueckel"),
            "screened-tf": ("screened", "thomas-fermi"),
        }
        try:
            scheme, screening = aliases[label.lower()]
        except KeyError:
            raise SchemeError(f"unknown scheme label {label!r}") from None
        return cls(scheme, screening, eps0_in_kappa)


class ReflectionPair(NamedTuple):
    tm: float
    te: float


def _fresnel_from_chi(chi, xi, q):
    """Fresnel coefficients in cancellation-free form.

    ``chi = eps - 1``; ``q = sqrt(k**2 + xi**2/c**2)``.  Uses
    ``eps q - k_in = chi ((eps + 1) q**2 - xi**2/c**2) / (eps q + k_in)``.
    """
    w2 = (xi / SPEED_OF_LIGHT) ** 2
    shift = chi * w2
    k_in = np.sqrt(q * q + shift)
    eps = 1.0 + chi
    r_te = -shift / (q + k_in) ** 2
    denom = eps * q + k_in
    r_tm = (chi / denom) * (((eps + 1.0) * q * q - w2) / denom)
    return r_tm, r_te


def fresnel(material: Material, xi, k) -> ReflectionPair:
    """Fresnel reflection coefficients at imaginary frequency ``xi > 0``."""
    xi_arr = np.asarray(xi, dtype=float)
    if np.any(~(xi_arr > 0)):
        raise DomainError("fresnel needs xi > 0; use zero_frequency for xi = 0")
    k = np.asarray(k, dtype=float)
    if material.ideal_metal:
        ones = np.ones(np.broadcast(xi_arr, k).shape)
        return _unwrap(ReflectionPair(ones, -ones))
    q = np.sqrt(k * k + (xi_arr / SPEED_OF_LIGHT) ** 2)
    chi = susceptibility(material, xi_arr)
    return _unwrap(ReflectionPair(*_fresnel_from_chi(chi, xi_arr, q)))


def _unwrap(pair: ReflectionPair) -> ReflectionPair:
    if np.ndim(pair.tm) == 0:
        return ReflectionPair(float(pair.tm), float(pair.te))
    return pair


def check_admissible(material: Material, scheme: SchemeConfig) -> None:
    """Raise :class:`SchemeError` if ``scheme`` cannot be applied to ``material``."""
    if scheme.scheme != "screened" or material.ideal_metal or material.carriers is None:
        return
    gate = applicability_gate(material.carriers)
    if scheme.screening == "debye-hueckel" and gate.verdict != "screened-DH-applicable":
        reason = gate.reason or "degenerate statistics"
        raise SchemeError(f"{material.name}: Debye-Hueckel screening not applicable ({reason})")
    if scheme.screening == "thomas-fermi" and gate.verdict != "screened-TF-applicable":
        reason = gate.reason or "Maxwell-Boltzmann statistics"
        raise SchemeError(f"{material.name}: Thomas-Fermi screening not applicable ({reason})")


def screening_wavenumber(material: Material, scheme: SchemeConfig, T: float) -> float:
    """Inverse screening length kappa (1/m); zero without carriers."""
    check_admissible(material, scheme)
    gas = material.carriers
    if gas is None or gas.density == 0:
        return 0.0
    eps0 = material.core_eps0 if scheme.eps0_in_kappa else 1.0
    if scheme.screening == "debye-hueckel":
        if gas.statistics != MAXWELL_BOLTZMANN:
            raise SchemeError(f"{material.name}: Debye-Hueckel screening not applicable")
        return 1.0 / debye_hueckel_length(gas, eps0, T)
    if gas.statistics != DEGENERATE:
        raise SchemeError(f"{material.name}: Thomas-Fermi screening not applicable")
    return 1.0 / thomas_fermi_length(gas, eps0)


def screened_tm(eps0: float, kappa: float, k):
    """Static TM coefficient ``(eps0 s - k)/(eps0 s + k)``, ``s = sqrt(k**2 + kappa**2)``."""
    k = np.asarray(k, dtype=float)
    s = np.hypot(k, kappa)
    return (eps0 * s - k) / (eps0 * s + k)


def plasma_te(plasma_frequency: float, k):
    """Zero-frequency TE coefficient of the plasma model."""
    k = np.asarray(k, dtype=float)
    p2 = (plasma_frequency / SPEED_OF_LIGHT) ** 2
    root = np.sqrt(k * k + p2)
    return -p2 / (k + root) ** 2


def zero_frequency(material: Material, scheme: SchemeConfig, k, T: float) -> ReflectionPair:
    """Reflection coefficients of the l = 0 Matsubara term at wavenumber ``k > 0``."""
    k_arr = np.asarray(k, dtype=float)
    if np.any(~(k_arr > 0)):
        raise DomainError("zero-frequency coefficients need k > 0")
    if not T > 0:
        raise DomainError(f"temperature must be > 0, got {T}")
    ones = np.ones_like(k_arr)
    zeros = np.zeros_like(k_arr)
    if material.ideal_metal:
        return _unwrap(ReflectionPair(ones, -ones))
    check_admissible(material, scheme)
    fc = material.free_carriers
    if scheme.scheme == "screened":
        kappa = screening_wavenumber(material, scheme, T)
        return _unwrap(ReflectionPair(screened_tm(material.core_eps0, kappa, k_arr), zeros))
    if fc is None:
        eps0 = material.core_eps0
        return _unwrap(ReflectionPair(ones * ((eps0 - 1.0) / (eps0 + 1.0)), zeros))
    if scheme.scheme == "plasma-prescription" or fc.variant == "plasma":
        return _unwrap(ReflectionPair(ones, plasma_te(fc.plasma_frequency, k_arr)))
    return _unwrap(ReflectionPair(ones, zeros))

