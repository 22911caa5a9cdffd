"""Thermal Casimir-Lifshitz engine with Nernst-theorem and exclusion audits."""

from .dielectric import (
    CarrierGas,
    FreeCarrierTerm,
    Material,
    OscillatorTerm,
    applicability_gate,
    debye_hueckel_length,
    eval_eps,
    thomas_fermi_length,
)
from .errors import CasimirError, ConvergenceError, DomainError, SchemaError, SchemeError, StatisticsError
from .experiments import (
    ComparisonVerdict,
    MeasurementSeries,
    TheoryBand,
    exclusion_test,
    load_series,
    report,
    synthetic_series,
    theory_band,
)
from .lifshitz import (
    Configuration,
    Geometry,
    LifshitzResult,
    SummationSettings,
    free_energy,
    matsubara_frequency,
    observable,
    observable_difference,
    pressure,
    sphere_force,
)
from .reflection import ReflectionPair, SchemeConfig, fresnel, zero_frequency
from .stats import normal_quantile, two_sided_z
from .thermo import EntropyTrace, TemperatureLadder, entropy, nernst_audit, nernst_sweep

__version__ = "0.1.0"
