"""Measured series, theory bands and confidence-level exclusion.

Measurement CSV layout::

    a_unit,kind,confidence[,label,temperature_K]
    nm,force-difference,0.70,light-dark,295
    a,value,half_width
    100,-1.2e-12,0.3e-12
    ...

Half-widths are stated at ``confidence`` and converted to one standard
deviation with the two-sided normal quantile.  A point is excluded at level
p when its distance to the nearest edge of the theory band exceeds
``z_p * sigma`` with ``sigma = sqrt(sigma_expt**2 + sigma_theory**2)``.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import DomainError, SchemaError
from .lifshitz import Configuration, Geometry, SummationSettings, _pair, observable, observable_difference
from .parallel import ordered_map
from .stats import two_sided_z
from .thermo import _text_sink

KINDS = ("force-difference", "pressure-difference", "pressure", "force")
UNITS = {"m": 1.0, "um": 1e-6, "nm": 1e-9}


@dataclass(frozen=True)
class MeasurementSeries:
    kind: str
    separations: np.ndarray
    values: np.ndarray
    half_widths: np.ndarray
    confidence: float
    label: str = ""
    temperature: float | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SchemaError(f"unknown measurement kind {self.kind!r}")
        if not 0.5 < self.confidence < 1:
            raise SchemaError(f"confidence must lie in (0.5, 1), got {self.confidence}")
        a = np.asarray(self.separations, dtype=float)
        if a.size == 0:
            raise SchemaError("measurement series is empty")
        if np.any(np.diff(a) <= 0):
            raise SchemaError("separations must be strictly increasing")
        hw = np.asarray(self.half_widths, dtype=float)
        if np.any(~(hw > 0)):
            raise SchemaError("half-widths must be positive")
        for name in ("separations", "values", "half_widths"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))

    def __len__(self):
        return self.separations.size

    @property
    def sigmas(self) -> np.ndarray:
        return self.half_widths / two_sided_z(self.confidence)


def load_series(path) -> MeasurementSeries:
    """Read a measurement CSV, converting separations to metres."""
    path = Path(path)
    with open(path, newline="") as fh:
        lines = [(i + 1, row) for i, row in enumerate(csv.reader(fh)) if row and not row[0].startswith("#")]
    if len(lines) < 3:
        raise SchemaError(f"{path}: expected a meta header, its values and a column header")
    (_, meta_keys), (meta_line, meta_vals) = lines[0], lines[1]
    meta_keys = [k.strip() for k in meta_keys]
    if meta_keys[:3] != ["a_unit", "kind", "confidence"]:
        raise SchemaError(f"{path}:1: header must start with a_unit,kind,confidence")
    meta = dict(zip(meta_keys, (v.strip() for v in meta_vals)))
    unit = meta.get("a_unit")
    if unit not in UNITS:
        raise SchemaError(f"{path}:{meta_line}: unknown separation unit {unit!r}")
    try:
        confidence = float(meta["confidence"])
        temperature = float(meta["temperature_K"]) if meta.get("temperature_K") else None
    except (KeyError, ValueError) as exc:
        raise SchemaError(f"{path}:{meta_line}: bad metadata ({exc})") from None
    col_line, cols = lines[2]
    if [c.strip() for c in cols] != ["a", "value", "half_width"]:
        raise SchemaError(f"{path}:{col_line}: columns must be a,value,half_width")
    rows = []
    for lineno, row in lines[3:]:
        if len(row) != 3:
            raise SchemaError(f"{path}:{lineno}: expected 3 fields, got {len(row)}")
        try:
            a, v, hw = (float(x) for x in row)
        except ValueError:
            raise SchemaError(f"{path}:{lineno}: non-numeric field") from None
        if not all(math.isfinite(x) for x in (a, v, hw)):
            raise SchemaError(f"{path}:{lineno}: non-finite value")
        if not hw > 0:
            raise SchemaError(f"{path}:{lineno}: half_width must be > 0")
        rows.append((a * UNITS[unit], v, hw))
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    arr = np.array(rows)
    if np.any(np.diff(arr[:, 0]) <= 0):
        bad = int(np.flatnonzero(np.diff(arr[:, 0]) <= 0)[0]) + 1
        raise SchemaError(f"{path}:{lines[3 + bad][0]}: separations must be strictly increasing")
    return MeasurementSeries(meta["kind"], arr[:, 0], arr[:, 1], arr[:, 2], confidence,
                             meta.get("label", ""), temperature)


def write_series(series: MeasurementSeries, path, unit: str = "m") -> None:
    scale = UNITS[unit]
    with _text_sink(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["a_unit", "kind", "confidence", "label", "temperature_K"])
        w.writerow([unit, series.kind, repr(series.confidence), series.label,
                    "" if series.temperature is None else repr(series.temperature)])
        w.writerow(["a", "value", "half_width"])
        for a, v, hw in zip(series.separations, series.values, series.half_widths):
            w.writerow([repr(float(a / scale)), repr(float(v)), repr(float(hw))])


@dataclass(frozen=True)
class TheoryBand:
    separations: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    error: np.ndarray

    def __post_init__(self):
        if np.any(self.lower > self.upper):
            raise DomainError("theory band has lower > upper")

    @property
    def center(self) -> np.ndarray:
        return 0.5 * (self.lower + self.upper)

    @property
    def half_width(self) -> np.ndarray:
        return 0.5 * (self.upper - self.lower)


def _at_density(config: Configuration, n: float, plates: Sequence[int]) -> Configuration:
    mats = list(_pair(config.materials))
    for i in plates:
        mats[i] = mats[i].with_density(n)
    return Configuration(tuple(mats), config.scheme)


def theory_band(
    separations: Sequence[float],
    modified: Configuration,
    density_band: tuple[float, float],
    geometry: Geometry,
    T: float,
    base: Configuration | None = None,
    kind: str = "force",
    plates: Sequence[int] = (1,),
    settings: SummationSettings | None = None,
    workers: int = 1,
) -> TheoryBand:
    """Envelope of the prediction at the two ends of the carrier-density band.

    With ``base`` the prediction is ``value(modified) - value(base)``;
    otherwise the observable of ``modified`` itself.  Densities are applied
    to the plates listed in ``plates`` of the modified configuration.
    """
    n_min, n_max = density_band
    if not n_min <= n_max:
        raise DomainError("density band needs n_min <= n_max")
    grid = np.asarray(separations, dtype=float)
    densities = [n_min] if n_min == n_max else [n_min, n_max]
    curves, errs = [], []
    for n in densities:
        cfg = _at_density(modified, n, plates)
        if base is not None:
            diff = observable_difference(base, cfg, geometry, grid, T, settings, kind, workers)
            curves.append(diff.values)
            errs.append(diff.errors)
        else:
            res = ordered_map(lambda a: observable(kind, geometry.at(a), cfg, T, settings), grid.tolist(), workers)
            curves.append(np.array([r.value for r in res]))
            errs.append(np.array([r.error for r in res]))
    stack = np.vstack(curves)
    return TheoryBand(grid, stack.min(axis=0), stack.max(axis=0), np.vstack(errs).max(axis=0))


@dataclass(frozen=True)
class PointVerdict:
    separation: float
    value: float
    sigma: float
    distance_sigma: float
    excluded_at: tuple[float, ...]


@dataclass(frozen=True)
class ComparisonVerdict:
    levels: tuple[float, ...]
    points: tuple[PointVerdict, ...]
    fractions: dict = field(default_factory=dict)
    overall: dict = field(default_factory=dict)
    window: tuple[float, float] | None = None
    required_fraction: float = 0.95

    @property
    def sigma_trace(self) -> np.ndarray:
        return np.array([p.sigma for p in self.points])


def exclusion_test(
    series: MeasurementSeries,
    band: TheoryBand,
    levels: Sequence[float],
    fraction: float = 0.95,
    window: tuple[float, float] | None = None,
) -> ComparisonVerdict:
    """Nearest-edge z-test of every point against the theory band."""
    if band.separations.shape != series.separations.shape or not np.allclose(
        band.separations, series.separations, rtol=1e-12, atol=0
    ):
        raise DomainError("theory band and measurement series use different separation grids")
    levels = tuple(sorted(float(p) for p in levels))
    for p in levels:
        if not 0.5 < p < 1:
            raise DomainError(f"confidence level must lie in (0.5, 1), got {p}")
    z_stated = two_sided_z(series.confidence)
    sigma_expt = series.half_widths / z_stated
    sigma_theory = band.half_width / z_stated
    sigma = np.sqrt(sigma_expt**2 + sigma_theory**2)
    x = series.values
    distance = np.maximum(0.0, np.maximum(band.lower - x, x - band.upper))
    dsig = distance / sigma
    z = {p: two_sided_z(p) for p in levels}
    points = tuple(
        PointVerdict(float(a), float(v), float(s), float(d), tuple(p for p in levels if d > z[p]))
        for a, v, s, d in zip(series.separations, x, sigma, dsig)
    )
    if window is None:
        in_window = np.ones(len(points), dtype=bool)
    else:
        in_window = (series.separations >= window[0]) & (series.separations <= window[1])
    n_window = int(in_window.sum())
    fractions, overall = {}, {}
    for p in levels:
        hits = sum(1 for pt, w in zip(points, in_window) if w and p in pt.excluded_at)
        frac = hits / n_window if n_window else 0.0
        fractions[p] = frac
        overall[p] = "excluded" if n_window and frac >= fraction else "not-excluded"
    return ComparisonVerdict(levels, points, fractions, overall, window, fraction)


def synthetic_series(
    band: TheoryBand,
    half_widths,
    confidence: float = 0.70,
    offset_sigma: float = 0.0,
    seed: int = 0,
    kind: str = "force-difference",
    label: str = "synthetic",
    temperature: float | None = None,
    noise: bool = True,
) -> MeasurementSeries:
    """Synthetic measurements drawn around the band centre.

    Means sit ``offset_sigma`` combined standard deviations beyond the upper
    band edge (or at the centre when the offset is zero) plus Gaussian noise
    of the stated experimental sigma.
    """
    rng = np.random.default_rng(seed)
    if offset_sigma < 0:
        raise DomainError("offset_sigma must be >= 0")
    hw = np.broadcast_to(np.asarray(half_widths, dtype=float), band.separations.shape).copy()
    z = two_sided_z(confidence)
    sigma_e = hw / z
    sigma = np.sqrt(sigma_e**2 + (band.half_width / z) ** 2)
    if offset_sigma:
        mean = band.upper + offset_sigma * sigma
    else:
        mean = band.center
    values = mean + (rng.normal(size=mean.shape) * sigma_e if noise else 0.0)
    return MeasurementSeries(kind, band.separations.copy(), values, hw, confidence, label, temperature)


POINT_COLUMNS = ("a_m", "value", "half_width", "band_lower", "band_upper", "sigma", "distance_sigma", "excluded_at")


def report(verdict: ComparisonVerdict, band: TheoryBand, series: MeasurementSeries, out_path) -> tuple[Path, Path]:
    """Write the JSON report and its per-point CSV; returns both paths."""
    out_path = Path(out_path)
    csv_path = out_path.with_name(out_path.stem + "_points.csv")
    doc = {
        "series": {
            "kind": series.kind,
            "label": series.label,
            "confidence": series.confidence,
            "temperature_K": series.temperature,
            "a_m": series.separations.tolist(),
            "value": series.values.tolist(),
            "half_width": series.half_widths.tolist(),
        },
        "band": {
            "a_m": band.separations.tolist(),
            "lower": band.lower.tolist(),
            "upper": band.upper.tolist(),
            "numerical_error": band.error.tolist(),
        },
        "per_point": [
            {"a": p.separation, "distance_sigma": p.distance_sigma, "excluded_at": list(p.excluded_at)}
            for p in verdict.points
        ],
        "overall": {
            repr(p): {"verdict": verdict.overall[p], "fraction": verdict.fractions[p]} for p in verdict.levels
        },
        "rule": {
            "required_fraction": verdict.required_fraction,
            "window_m": list(verdict.window) if verdict.window else None,
            "signed_convention": "theory - experiment",
        },
    }
    with open(out_path, "w") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")
    with open(csv_path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(POINT_COLUMNS)
        for p, v, hw, lo, hi in zip(verdict.points, series.values, series.half_widths, band.lower, band.upper):
            w.writerow([repr(p.separation), repr(float(v)), repr(float(hw)), repr(float(lo)), repr(float(hi)),
                        repr(p.sigma), repr(p.distance_sigma), ";".join(repr(x) for x in p.excluded_at)])
    return out_path, csv_path


def read_points_csv(path) -> list[dict]:
    """Reload a per-point CSV written by :func:`report`."""
    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            rec = {k: float(row[k]) for k in POINT_COLUMNS[:-1]}
            rec["excluded_at"] = tuple(float(x) for x in row["excluded_at"].split(";") if x)
            out.append(rec)
    return out
