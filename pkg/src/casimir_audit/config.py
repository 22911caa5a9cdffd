"""Run configuration: TOML sections, presets and resolution to engine objects.

A config file has flat sections ``materials``, ``geometry``, ``scheme``,
``engine``, ``experiment`` and ``output``.  Custom materials live in
``[materials.catalog.<name>]`` tables; names not found there resolve to the
built-in library in :mod:`casimir_audit.presets`.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import tomli
import tomlkit

from .dielectric import CarrierGas, FreeCarrierTerm, Material, OscillatorTerm
from .errors import CasimirError, SchemaError
from .lifshitz import Configuration, Geometry, SummationSettings
from .presets import MATERIALS, preset
from .reflection import SchemeConfig
from .thermo import ABS_FLOOR, TemperatureLadder

DEFAULT_TEMPERATURE = 295.0


@dataclass(frozen=True)
class MaterialsSection:
    plate1: str = "ideal-metal"
    plate2: str = "ideal-metal"
    catalog: dict = field(default_factory=dict)


@dataclass(frozen=True)
class GeometrySection:
    kind: str = "parallel-plates"
    separations: tuple = (1e-6,)
    radius: float | None = None
    temperature: float = DEFAULT_TEMPERATURE
    ladder_start: float = 1.0
    ladder_ratio: float = 0.5
    ladder_floor: float = 5e-3
    ladder_count: int = 16
    xi_min: float = 1e12
    xi_max: float = 1e18
    xi_points: int = 61


@dataclass(frozen=True)
class SchemeSection:
    plate1: str = "standard"
    plate2: str = "standard"
    eps0_in_kappa: bool = True
    catalog: tuple = ()


@dataclass(frozen=True)
class EngineSection:
    rtol: float = 1e-9
    quad_rtol: float = 1e-13
    max_index: int = 10_000_000
    em_crossover: int = 4096
    workers: int = 1
    audit_rtol: float = 1e-13
    entropy_floor: float = ABS_FLOOR


@dataclass(frozen=True)
class ExperimentSection:
    series: str | None = None
    kind: str = "force-difference"
    base_plate1: str | None = None
    base_plate2: str | None = None
    base_scheme1: str = "standard"
    base_scheme2: str = "standard"
    density_plates: tuple = (2,)
    density_min: float | None = None
    density_max: float | None = None
    levels: tuple = (0.70, 0.95, 0.999)
    fraction: float = 0.95
    window_min: float | None = None
    window_max: float | None = None
    seed: int = 0
    synthetic_confidence: float = 0.70
    synthetic_relative_half_width: float = 0.1
    synthetic_offset_sigma: float = 0.0
    synthetic_noise: bool = True


@dataclass(frozen=True)
class OutputSection:
    path: str | None = None
    table: bool = False


_SECTIONS = {
    "materials": MaterialsSection,
    "geometry": GeometrySection,
    "scheme": SchemeSection,
    "engine": EngineSection,
    "experiment": ExperimentSection,
    "output": OutputSection,
}
_TUPLE_KEYS = {"separations", "catalog", "density_plates", "levels"}


def _section(cls, raw: dict, name: str):
    known = {f.name for f in fields(cls)}
    unknown = set(raw) - known
    if unknown:
        raise SchemaError(f"unknown key(s) in [{name}]: {', '.join(sorted(unknown))}")
    kwargs = {}
    for key, value in raw.items():
        if key in _TUPLE_KEYS and not isinstance(value, dict):
            value = tuple(value) if isinstance(value, (list, tuple)) else (value,)
        kwargs[key] = value
    return cls(**kwargs)


@dataclass(frozen=True)
class RunConfig:
    materials: MaterialsSection = field(default_factory=MaterialsSection)
    geometry: GeometrySection = field(default_factory=GeometrySection)
    scheme: SchemeSection = field(default_factory=SchemeSection)
    engine: EngineSection = field(default_factory=EngineSection)
    experiment: ExperimentSection = field(default_factory=ExperimentSection)
    output: OutputSection = field(default_factory=OutputSection)

    @classmethod
    def from_dict(cls, raw: dict) -> RunConfig:
        unknown = set(raw) - set(_SECTIONS)
        if unknown:
            raise SchemaError(f"unknown section(s): {', '.join(sorted(unknown))}")
        kwargs = {}
        for name, section in _SECTIONS.items():
            body = raw.get(name, {})
            if not isinstance(body, dict):
                raise SchemaError(f"[{name}] must be a table")
            kwargs[name] = _section(section, dict(body), name)
        cfg = cls(**kwargs)
        cfg.validate()
        return cfg

    def to_dict(self) -> dict:
        out = {}
        for name in _SECTIONS:
            body = asdict(getattr(self, name))
            out[name] = {k: list(v) if isinstance(v, tuple) else v for k, v in body.items() if v is not None}
        return out

    def with_overrides(self, **sections) -> RunConfig:
        """Copy with selected keys replaced, e.g. ``engine={"workers": 8}``."""
        cfg = self
        for name, changes in sections.items():
            if changes:
                cfg = replace(cfg, **{name: replace(getattr(cfg, name), **changes)})
        cfg.validate()
        return cfg

    # resolution ----------------------------------------------------------

    def material(self, name: str) -> Material:
        table = self.materials.catalog.get(name)
        if table is None:
            table = MATERIALS.get(name)
        if table is None:
            raise SchemaError(f"material {name!r} is neither in [materials.catalog] nor built in")
        return material_from_table(name, table)

    def material_table(self, name: str) -> dict:
        return self.materials.catalog.get(name, MATERIALS.get(name))

    def scheme_config(self, label: str) -> SchemeConfig:
        return SchemeConfig.from_label(label, self.scheme.eps0_in_kappa)

    def configuration(self) -> Configuration:
        mats = (self.material(self.materials.plate1), self.material(self.materials.plate2))
        schemes = (self.scheme_config(self.scheme.plate1), self.scheme_config(self.scheme.plate2))
        return Configuration(mats, schemes)

    def base_configuration(self) -> Configuration:
        exp = self.experiment
        if exp.base_plate1 is None or exp.base_plate2 is None:
            raise SchemaError("[experiment] needs base_plate1 and base_plate2 for difference observables")
        mats = (self.material(exp.base_plate1), self.material(exp.base_plate2))
        schemes = (self.scheme_config(exp.base_scheme1), self.scheme_config(exp.base_scheme2))
        return Configuration(mats, schemes)

    def catalog(self) -> list[tuple[str, Configuration]]:
        """Nernst catalog entries ``material:scheme``; defaults to the main pair."""
        if not self.scheme.catalog:
            cfg = self.configuration()
            return [(self.materials.plate1 if self.materials.plate1 == self.materials.plate2
                     else f"{self.materials.plate1}|{self.materials.plate2}", cfg)]
        out = []
        for entry in self.scheme.catalog:
            name, sep, label = entry.partition(":")
            if not sep:
                raise SchemaError(f"catalog entry {entry!r} must read 'material:scheme'")
            out.append((name, Configuration(self.material(name), self.scheme_config(label))))
        return out

    def geometry_at(self, a: float) -> Geometry:
        return Geometry(self.geometry.kind, a, self.geometry.radius)

    def settings(self) -> SummationSettings:
        e = self.engine
        return SummationSettings(rtol=e.rtol, quad_rtol=e.quad_rtol, max_index=e.max_index, em_crossover=e.em_crossover)

    def audit_settings(self) -> SummationSettings:
        e = self.engine
        return SummationSettings(
            rtol=e.audit_rtol, quad_rtol=e.quad_rtol, max_index=e.max_index, em_crossover=e.em_crossover
        )

    def ladder(self) -> TemperatureLadder:
        g = self.geometry
        return TemperatureLadder(g.ladder_start, g.ladder_ratio, g.ladder_floor, g.ladder_count)

    def density_band(self, material: Material) -> tuple[float, float]:
        exp = self.experiment
        if material.carriers is None:
            raise SchemaError(f"material {material.name!r} has no carrier gas for a density band")
        lo = material.carriers.density_min if exp.density_min is None else exp.density_min
        hi = material.carriers.density_max if exp.density_max is None else exp.density_max
        return lo, hi

    def window(self) -> tuple[float, float] | None:
        exp = self.experiment
        if exp.window_min is None and exp.window_max is None:
            return None
        return (exp.window_min or 0.0, math.inf if exp.window_max is None else exp.window_max)

    def validate(self) -> None:
        try:
            self._validate()
        except SchemaError:
            raise
        except (CasimirError, TypeError, ValueError) as exc:
            raise SchemaError(f"invalid configuration: {exc}") from exc

    def _validate(self) -> None:
        g = self.geometry
        if not g.separations:
            raise SchemaError("[geometry] separations must be nonempty")
        if any(not float(a) > 0 for a in g.separations):
            raise SchemaError("[geometry] separations must be positive")
        if not g.temperature > 0:
            raise SchemaError("[geometry] temperature must be > 0")
        if not (g.xi_points >= 1 and 0 <= g.xi_min <= g.xi_max):
            raise SchemaError("[geometry] needs 0 <= xi_min <= xi_max and xi_points >= 1")
        self.configuration()
        self.catalog()
        self.settings()
        self.ladder()
        exp = self.experiment
        if any(not 0.5 < p < 1 for p in exp.levels):
            raise SchemaError("[experiment] levels must lie in (0.5, 1)")
        if not 0 < exp.fraction <= 1:
            raise SchemaError("[experiment] fraction must lie in (0, 1]")
        if any(i not in (1, 2) for i in exp.density_plates):
            raise SchemaError("[experiment] density_plates entries must be 1 or 2")
        if self.engine.workers < 1:
            raise SchemaError("[engine] workers must be >= 1")


def material_from_table(name: str, table: dict) -> Material:
    """Build a :class:`Material` from its config table."""
    allowed = {"oscillators", "free_carriers", "carriers", "ideal_metal"}
    unknown = set(table) - allowed
    if unknown:
        raise SchemaError(f"material {name!r}: unknown key(s) {', '.join(sorted(unknown))}")
    try:
        oscillators = tuple(OscillatorTerm(*row) for row in table.get("oscillators", ()))
        fc = table.get("free_carriers")
        gas = table.get("carriers")
        return Material(
            name,
            oscillators,
            FreeCarrierTerm(**fc) if fc else None,
            CarrierGas(**gas) if gas else None,
            bool(table.get("ideal_metal", False)),
        )
    except (CasimirError, TypeError) as exc:
        raise SchemaError(f"material {name!r}: {exc}") from exc


def _merge(base: dict, override: dict) -> dict:
    out = dict(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], value)
        else:
            out[key] = value
    return out


def load_config(path=None, preset_name: str | None = None) -> RunConfig:
    """Preset tables (if any) overlaid by the file (if any)."""
    raw = preset(preset_name) if preset_name else {}
    if path is not None:
        try:
            with open(path, "rb") as fh:
                raw = _merge(raw, tomli.load(fh))
        except tomli.TOMLDecodeError as exc:
            raise SchemaError(f"{path}: {exc}") from None
        except OSError as exc:
            raise SchemaError(f"cannot read config {path}: {exc}") from None
    return RunConfig.from_dict(raw)


def dump_config(cfg: RunConfig) -> str:
    """Self-contained TOML: referenced built-in materials are copied into the catalog."""
    data = cfg.to_dict()
    names = {cfg.materials.plate1, cfg.materials.plate2}
    names |= {n for n in (cfg.experiment.base_plate1, cfg.experiment.base_plate2) if n}
    names |= {entry.partition(":")[0] for entry in cfg.scheme.catalog}
    catalog = dict(data["materials"].get("catalog", {}))
    for name in sorted(names):
        catalog.setdefault(name, cfg.material_table(name))
    data["materials"]["catalog"] = catalog
    return tomlkit.dumps(data)


def write_config(cfg: RunConfig, path) -> None:
    Path(path).write_text(dump_config(cfg))
