"""Permittivity on the imaginary frequency axis and carrier screening.

The permittivity of a half-space is composed of a finite sum of damped
oscillators (bound charges) plus an optional free-carrier term::

    eps(i xi) = 1 + sum_j f_j / (w_j**2 + xi**2 + g_j xi) + chi_free(xi)

with ``chi_free = wp**2 / (xi (xi + gamma))`` (Drude) or ``wp**2 / xi**2``
(plasma).  All frequencies are angular (rad/s).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Literal

import numpy as np

from .constants import BOLTZMANN, ELEMENTARY_CHARGE, VACUUM_PERMITTIVITY
from .errors import DomainError, StatisticsError

#: Value returned by :func:`eval_eps` for a conductor at zero frequency.
STATIC_CONDUCTOR = math.inf

MAXWELL_BOLTZMANN = "maxwell-boltzmann"
DEGENERATE = "degenerate"


@dataclass(frozen=True)
class OscillatorTerm:
    """Damped oscillator contribution ``f / (w**2 + xi**2 + g xi)``."""

    strength: float
    resonance: float
    damping: float = 0.0

    def __post_init__(self):
        if self.strength < 0:
            raise DomainError(f"oscillator strength must be >= 0, got {self.strength}")
        if self.resonance <= 0:
            raise DomainError(f"oscillator resonance must be > 0, got {self.resonance}")
        if self.damping < 0:
            raise DomainError(f"oscillator damping must be >= 0, got {self.damping}")


@dataclass(frozen=True)
class FreeCarrierTerm:
    """Drude or plasma free-carrier susceptibility.

    ``relaxation`` is the relaxation rate at ``reference_temperature``.  When
    ``debye_temperature`` is set the rate follows a simplified Bloch-Grueneisen
    law for a perfect crystal lattice: linear in T above ``debye_temperature/4``
    and proportional to T**5 below, continuous at the junction.  Otherwise the
    rate is constant.
    """

    variant: Literal["drude", "plasma"]
    plasma_frequency: float
    relaxation: float = 0.0
    debye_temperature: float | None = None
    reference_temperature: float = 300.0

    def __post_init__(self):
        if self.variant not in ("drude", "plasma"):
            raise DomainError(f"unknown free-carrier variant {self.variant!r}")
        if self.plasma_frequency <= 0:
            raise DomainError("plasma frequency must be > 0")
        if self.relaxation < 0:
            raise DomainError("relaxation rate must be >= 0")
        if self.variant == "drude" and self.relaxation == 0:
            raise DomainError("drude term needs a positive relaxation rate; use variant='plasma'")

    def relaxation_at(self, T: float) -> float:
        if self.variant == "plasma" or self.debye_temperature is None:
            return self.relaxation
        t_junction = self.debye_temperature / 4.0
        if T >= t_junction:
            return self.relaxation * T / self.reference_temperature
        at_junction = self.relaxation * t_junction / self.reference_temperature
        return at_junction * (T / t_junction) ** 5


@dataclass(frozen=True)
class CarrierGas:
    """Mobile charge carriers responsible for static screening.

    ``density_min``/``density_max`` bound the density uncertainty; they
    default to ``density``.  ``critical_density`` is the user-supplied
    threshold below which Maxwell-Boltzmann statistics hold.
    """

    density: float
    statistics: str = MAXWELL_BOLTZMANN
    fermi_energy: float | None = None
    critical_density: float = math.inf
    density_min: float | None = None
    density_max: float | None = None

    def __post_init__(self):
        if self.statistics not in (MAXWELL_BOLTZMANN, DEGENERATE):
            raise DomainError(f"unknown carrier statistics {self.statistics!r}")
        if self.density < 0:
            raise DomainError("carrier density must be >= 0")
        if self.statistics == DEGENERATE and (self.fermi_energy is None or self.fermi_energy <= 0):
            raise DomainError("degenerate statistics require a positive Fermi energy")
        if self.density_min is None:
            object.__setattr__(self, "density_min", self.density)
        if self.density_max is None:
            object.__setattr__(self, "density_max", self.density)
        if not self.density_min <= self.density <= self.density_max:
            raise DomainError(
                f"density band [{self.density_min}, {self.density_max}] does not contain {self.density}"
            )


@dataclass(frozen=True)
class Material:
    """One dielectric half-space.

    ``ideal_metal=True`` short-circuits everything else: reflection
    coefficients are pinned to (+1, -1) at every frequency.
    """

    name: str
    oscillators: tuple[OscillatorTerm, ...] = ()
    free_carriers: FreeCarrierTerm | None = None
    carriers: CarrierGas | None = None
    ideal_metal: bool = False
    metadata: tuple = field(default=(), compare=False)

    def __post_init__(self):
        object.__setattr__(self, "oscillators", tuple(self.oscillators))

    @cached_property
    def core_eps0(self) -> float:
        """Static permittivity of the bound charges alone."""
        return 1.0 + math.fsum(o.strength / o.resonance**2 for o in self.oscillators)

    @property
    def eps0(self) -> float:
        """Static permittivity; infinite when free carriers are present."""
        if self.free_carriers is not None or self.ideal_metal:
            return math.inf
        return self.core_eps0

    @property
    def is_vacuum(self) -> bool:
        return not self.ideal_metal and self.free_carriers is None and not any(
            o.strength > 0 for o in self.oscillators
        )

    @property
    def temperature_dependent(self) -> bool:
        fc = self.free_carriers
        return fc is not None and fc.variant == "drude" and fc.debye_temperature is not None

    def at_temperature(self, T: float) -> Material:
        """Freeze any temperature-dependent relaxation at ``T``."""
        if not self.temperature_dependent:
            return self
        fc = self.free_carriers
        frozen = FreeCarrierTerm("drude", fc.plasma_frequency, fc.relaxation_at(T))
        return replace(self, free_carriers=frozen)

    def with_density(self, n: float) -> Material:
        """Copy with carrier density ``n``; a free-carrier term scales as sqrt(n)."""
        if self.carriers is None:
            raise DomainError(f"material {self.name!r} has no carrier gas")
        gas = self.carriers
        lo = min(gas.density_min, n)
        hi = max(gas.density_max, n)
        new_gas = replace(gas, density=n, density_min=lo, density_max=hi)
        fc = self.free_carriers
        if fc is not None:
            if gas.density <= 0 or n <= 0:
                raise DomainError("cannot rescale plasma frequency from or to zero density")
            fc = replace(fc, plasma_frequency=fc.plasma_frequency * math.sqrt(n / gas.density))
        return replace(self, carriers=new_gas, free_carriers=fc)


def susceptibility(material: Material, xi):
    """``eps(i xi) - 1`` for ``xi > 0``, vectorized over ``xi``.

    Working with the susceptibility avoids cancellation at high frequency
    where eps is close to one.
    """
    xi = np.asarray(xi, dtype=float)
    chi = np.zeros_like(xi)
    for osc in material.oscillators:
        chi = chi + osc.strength / (osc.resonance**2 + xi * xi + osc.damping * xi)
    fc = material.free_carriers
    if fc is not None:
        if fc.variant == "drude":
            chi = chi + fc.plasma_frequency**2 / (xi * (xi + fc.relaxation))
        else:
            chi = chi + fc.plasma_frequency**2 / (xi * xi)
    return chi


def eval_eps(material: Material, xi: float) -> float:
    """Permittivity at imaginary frequency ``xi`` (rad/s).

    Returns :data:`STATIC_CONDUCTOR` (``inf``) at ``xi == 0`` for materials
    with free carriers or for the ideal metal.
    """
    if not xi >= 0:
        raise DomainError(f"imaginary frequency must be >= 0, got {xi}")
    if material.ideal_metal:
        return STATIC_CONDUCTOR
    if xi == 0:
        return material.eps0
    return 1.0 + float(susceptibility(material, xi))


def debye_hueckel_length(gas: CarrierGas, eps0: float, T: float) -> float:
    """Debye-Hueckel screening length ``sqrt(eps_vac eps0 k_B T / (e**2 n))``.

    Returns ``inf`` (no screening) for a carrier-free gas.
    """
    if gas.statistics != MAXWELL_BOLTZMANN:
        raise StatisticsError("Debye-Hueckel screening needs Maxwell-Boltzmann statistics")
    if not T > 0:
        raise DomainError(f"temperature must be > 0, got {T}")
    if gas.density == 0:
        return math.inf
    return math.sqrt(
        VACUUM_PERMITTIVITY * eps0 * BOLTZMANN * T / (ELEMENTARY_CHARGE**2 * gas.density)
    )


def thomas_fermi_length(gas: CarrierGas, eps0: float) -> float:
    """Thomas-Fermi screening length ``sqrt(2 eps_vac eps0 E_F / (3 e**2 n))``."""
    if gas.statistics != DEGENERATE:
        raise StatisticsError("Thomas-Fermi screening needs degenerate statistics")
    if gas.density <= 0:
        raise DomainError("Thomas-Fermi screening needs a positive carrier density")
    return math.sqrt(
        2.0 * VACUUM_PERMITTIVITY * eps0 * gas.fermi_energy / (3.0 * ELEMENTARY_CHARGE**2 * gas.density)
    )


@dataclass(frozen=True)
class Applicability:
    verdict: Literal["screened-DH-applicable", "screened-TF-applicable", "not-applicable"]
    reason: str = ""

    @property
    def applicable(self) -> bool:
        return self.verdict != "not-applicable"


def applicability_gate(gas: CarrierGas | None) -> Applicability:
    """Which screened treatment (if any) the carrier gas admits."""
    if gas is None:
        return Applicability("not-applicable", "no carrier gas")
    if gas.statistics == DEGENERATE:
        return Applicability("screened-TF-applicable")
    if gas.density < gas.critical_density:
        return Applicability("screened-DH-applicable")
    return Applicability("not-applicable", "density above critical")
