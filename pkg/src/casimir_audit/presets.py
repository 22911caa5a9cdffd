"""Built-in material library and named run presets.

Materials are stored as plain tables in the config schema so that a preset
can be dumped to TOML and reloaded without loss.
"""

from __future__ import annotations

import copy
import math

from .constants import ELECTRON_MASS, ELEMENTARY_CHARGE, VACUUM_PERMITTIVITY
from .errors import SchemaError


def plasma_frequency(density: float, effective_mass: float) -> float:
    """``sqrt(n e^2 / (eps_vac m*))`` in rad/s; ``effective_mass`` in electron masses."""
    return math.sqrt(density * ELEMENTARY_CHARGE**2 / (VACUUM_PERMITTIVITY * effective_mass * ELECTRON_MASS))


# Si core: one undamped oscillator giving eps0 = 11.66.
_SI_RESONANCE = 6.6e15
_SI_OSCILLATOR = [10.66 * _SI_RESONANCE**2, _SI_RESONANCE, 0.0]
# Maxwell-Boltzmann statistics are assumed below roughly the effective
# density of states of the Si conduction band at room temperature.
_SI_CRITICAL_DENSITY = 3.2e25
# reduced electron-hole mass of a photo-excited plasma, 1/(1/0.26 + 1/0.5)
_SI_PAIR_MASS = 1.0 / (1.0 / 0.26 + 1.0 / 0.5)
_SI_LIGHT_DENSITY = 2.1e25

_AU_CARRIERS = {"density": 5.9e28, "statistics": "degenerate", "fermi_energy": 8.86e-19}

MATERIALS: dict[str, dict] = {
    "vacuum": {},
    "ideal-metal": {"ideal_metal": True},
    # perfect-lattice gold: relaxation falls as T**5 below T_D/4
    "au-drude": {
        "free_carriers": {
            "variant": "drude",
            "plasma_frequency": 1.37e16,
            "relaxation": 5.32e13,
            "debye_temperature": 165.0,
            "reference_temperature": 300.0,
        },
        "carriers": dict(_AU_CARRIERS),
    },
    "au-drude-constant": {
        "free_carriers": {"variant": "drude", "plasma_frequency": 1.37e16, "relaxation": 5.32e13},
        "carriers": dict(_AU_CARRIERS),
    },
    "au-plasma": {
        "free_carriers": {"variant": "plasma", "plasma_frequency": 1.37e16},
        "carriers": dict(_AU_CARRIERS),
    },
    "si-intrinsic": {
        "oscillators": [list(_SI_OSCILLATOR)],
        "carriers": {"density": 1.0e16, "statistics": "maxwell-boltzmann", "critical_density": _SI_CRITICAL_DENSITY},
    },
    "si-doped": {
        "oscillators": [list(_SI_OSCILLATOR)],
        "free_carriers": {
            "variant": "drude",
            "plasma_frequency": plasma_frequency(_SI_LIGHT_DENSITY, _SI_PAIR_MASS),
            "relaxation": 1.0e14,
        },
        "carriers": {
            "density": _SI_LIGHT_DENSITY,
            "statistics": "maxwell-boltzmann",
            "critical_density": _SI_CRITICAL_DENSITY,
            "density_min": 1.7e25,
            "density_max": 2.5e25,
        },
    },
    # static permittivity 4, mobile ions that stay put in number as T -> 0
    "ionic-dielectric": {
        "oscillators": [[3.0e32, 1.0e16, 0.0]],
        "carriers": {"density": 1.0e20, "statistics": "maxwell-boltzmann", "critical_density": 1.0e24},
    },
}

_MICRON = 1e-6
_AUDIT_GRID = [0.5 * _MICRON, 1.0 * _MICRON, 2.0 * _MICRON]
_SPHERE_GRID = [a / 1e9 for a in range(100, 501, 50)]

PRESETS: dict[str, dict] = {
    "ideal-metal": {
        "materials": {"plate1": "ideal-metal", "plate2": "ideal-metal"},
        "geometry": {"kind": "parallel-plates", "separations": [_MICRON], "temperature": 1.0},
        "scheme": {"plate1": "standard", "plate2": "standard", "catalog": ["ideal-metal:standard"]},
    },
    "au-drude": {
        "materials": {"plate1": "au-drude", "plate2": "au-drude"},
        "geometry": {"kind": "parallel-plates", "separations": list(_AUDIT_GRID)},
        "scheme": {"plate1": "standard", "plate2": "standard", "catalog": ["au-drude:standard"]},
    },
    "au-plasma": {
        "materials": {"plate1": "au-plasma", "plate2": "au-plasma"},
        "geometry": {"kind": "parallel-plates", "separations": list(_AUDIT_GRID)},
        "scheme": {"plate1": "plasma", "plate2": "plasma", "catalog": ["au-plasma:plasma"]},
    },
    "au-screened-tf": {
        "materials": {"plate1": "au-drude", "plate2": "au-drude"},
        "geometry": {"kind": "parallel-plates", "separations": list(_AUDIT_GRID)},
        "scheme": {
            "plate1": "screened-tf",
            "plate2": "screened-tf",
            "catalog": ["au-drude:standard", "au-drude:screened-tf"],
        },
    },
    # dark phase: Au sphere above Si with its conductivity neglected
    "si-intrinsic": {
        "materials": {"plate1": "au-drude", "plate2": "si-intrinsic"},
        "geometry": {"kind": "sphere-plate", "radius": 98.95e-6, "separations": list(_SPHERE_GRID)},
        "scheme": {"plate1": "standard", "plate2": "standard"},
    },
    # light phase under the screened scheme, compared against the dark phase
    "si-doped": {
        "materials": {"plate1": "au-drude", "plate2": "si-doped"},
        "geometry": {"kind": "sphere-plate", "radius": 98.95e-6, "separations": list(_SPHERE_GRID)},
        "scheme": {"plate1": "standard", "plate2": "screened-dh"},
        "experiment": {
            "kind": "force-difference",
            "base_plate1": "au-drude",
            "base_plate2": "si-intrinsic",
            "base_scheme1": "standard",
            "base_scheme2": "standard",
            "density_plates": [2],
            "levels": [0.70],
        },
    },
    "ionic-dielectric": {
        "materials": {"plate1": "ionic-dielectric", "plate2": "ionic-dielectric"},
        "geometry": {"kind": "parallel-plates", "separations": list(_AUDIT_GRID)},
        "scheme": {
            "plate1": "screened-dh",
            "plate2": "screened-dh",
            "catalog": ["ionic-dielectric:screened-dh", "ionic-dielectric:standard"],
        },
    },
}


def preset(name: str) -> dict:
    """Deep copy of a preset's raw config tables."""
    try:
        return copy.deepcopy(PRESETS[name])
    except KeyError:
        raise SchemaError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
