"""Command-line front end.

Canonical output is CSV (or JSON for ``compare``) with every number written
in round-trip precision.  ``--table`` additionally prints an aligned,
human-readable table to stderr.

Exit codes: 0 success, 2 configuration or schema error, 3 non-convergence.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
import warnings
from pathlib import Path

import numpy as np

from .config import RunConfig, dump_config, load_config
from .dielectric import eval_eps
from .errors import CasimirError, ConvergenceError
from .experiments import exclusion_test, load_series, report, synthetic_series, theory_band, write_series
from .lifshitz import PFAWarning, observable
from .parallel import ordered_map
from .thermo import nernst_sweep, write_sweep_csv

EXIT_OK, EXIT_CONFIG, EXIT_CONVERGENCE = 0, 2, 3

# measurement kind -> (engine observable, needs a base configuration)
_SERIES_KINDS = {
    "force-difference": ("force", True),
    "pressure-difference": ("pressure", True),
    "force": ("force", False),
    "pressure": ("pressure", False),
}


def _parse_levels(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad level list {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="TOML run configuration")
    common.add_argument("--preset", help="named preset used as the base configuration")
    common.add_argument("--out", type=Path, help="output path (default: stdout)")
    common.add_argument("--seed", type=int, help="random seed for synthetic data")
    common.add_argument("--levels", type=_parse_levels, help="confidence levels, e.g. 0.70,0.95,0.999")
    common.add_argument("--workers", type=int, help="parallel workers for engine calls")
    common.add_argument("--scheme", help="zero-frequency scheme label applied to both plates")
    common.add_argument("--series", help="measurement CSV (overrides experiment.series)")
    common.add_argument("--dump-config", action="store_true", help="print the effective config and exit")
    common.add_argument("--table", action="store_true", help="also print a human-readable table to stderr")

    parser = argparse.ArgumentParser(prog="casimir-audit", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("eps", "permittivity on the imaginary axis"),
        ("energy", "free energy per unit area versus separation"),
        ("pressure", "pressure versus separation"),
        ("force", "sphere-plate force versus separation"),
        ("nernst", "entropy ladder and Nernst verdicts"),
        ("compare", "exclusion test of a measurement series"),
        ("synth", "write a synthetic measurement series"),
    ):
        sub.add_parser(name, parents=[common], help=help_text)
    return parser


def resolve_config(args) -> RunConfig:
    cfg = load_config(args.config, args.preset)
    overrides = {"engine": {}, "scheme": {}, "experiment": {}, "output": {}}
    if args.workers is not None:
        overrides["engine"]["workers"] = args.workers
    if args.scheme is not None:
        overrides["scheme"].update(plate1=args.scheme, plate2=args.scheme)
    if args.seed is not None:
        overrides["experiment"]["seed"] = args.seed
    if args.levels is not None:
        overrides["experiment"]["levels"] = args.levels
    if args.series is not None:
        overrides["experiment"]["series"] = args.series
    if args.out is not None:
        overrides["output"]["path"] = str(args.out)
    if args.table:
        overrides["output"]["table"] = True
    return cfg.with_overrides(**overrides)


def _emit(rows: list[list], header, cfg: RunConfig, stdout) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    if cfg.output.path:
        Path(cfg.output.path).write_text(buf.getvalue())
    else:
        stdout.write(buf.getvalue())
    if cfg.output.table:
        _print_table(header, rows)


def _print_table(header, rows) -> None:
    cells = [list(map(str, header))] + [[_short(v) for v in row] for row in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    for r in cells:
        print("  ".join(c.rjust(w) for c, w in zip(r, widths)), file=sys.stderr)


def _short(value) -> str:
    if isinstance(value, str):
        try:
            return f"{float(value):.6g}"
        except ValueError:
            return value
    return f"{value:.6g}" if isinstance(value, float) else str(value)


def cmd_eps(cfg: RunConfig, stdout) -> int:
    g = cfg.geometry
    if g.xi_points == 1:
        grid = np.array([g.xi_min])
    elif g.xi_min > 0:
        grid = np.geomspace(g.xi_min, g.xi_max, g.xi_points)
    else:
        grid = np.concatenate([[0.0], np.geomspace(g.xi_max / 10 ** (g.xi_points - 2), g.xi_max, g.xi_points - 1)])
    names = list(dict.fromkeys([cfg.materials.plate1, cfg.materials.plate2]))
    rows = []
    for name in names:
        material = cfg.material(name).at_temperature(g.temperature)
        rows.extend([name, repr(float(xi)), repr(float(eval_eps(material, float(xi))))] for xi in grid)
    _emit(rows, ["material", "xi_rad_s", "eps"], cfg, stdout)
    return EXIT_OK


def _sweep(kind: str, cfg: RunConfig, stdout) -> int:
    config = cfg.configuration()
    settings = cfg.settings()
    T = cfg.geometry.temperature
    if kind == "force" and cfg.geometry.kind != "sphere-plate":
        raise CasimirError("force needs geometry.kind = 'sphere-plate' and a radius")

    def one(a):
        try:
            return observable(kind, cfg.geometry_at(a), config, T, settings)
        except CasimirError as exc:
            raise type(exc)(f"{exc} [a = {a!r} m]") from exc

    results = ordered_map(one, [float(a) for a in cfg.geometry.separations], cfg.engine.workers)
    rows = [
        [repr(float(a)), repr(r.value), r.terms, repr(r.truncation_error), repr(r.quadrature_error), r.method]
        for a, r in zip(cfg.geometry.separations, results)
    ]
    unit = {"energy": "J_m2", "pressure": "Pa", "force": "N"}[kind]
    header = ["a_m", f"{kind}_{unit}", "terms", "truncation_error", "quadrature_error", "method"]
    _emit(rows, header, cfg, stdout)
    return EXIT_OK


def cmd_nernst(cfg: RunConfig, stdout) -> int:
    traces = nernst_sweep(
        [float(a) for a in cfg.geometry.separations],
        cfg.catalog(),
        cfg.ladder(),
        cfg.audit_settings(),
        cfg.engine.entropy_floor,
        cfg.engine.workers,
    )
    header = ["a_m", "material", "scheme", "S_at_zero", "residual", "verdict", "diagnostics"]
    rows = [
        [repr(t.separation), t.material, t.scheme, repr(t.s_zero), repr(t.residual), t.verdict, "; ".join(t.diagnostics)]
        for t in traces
    ]
    if cfg.output.path:
        out = Path(cfg.output.path)
        write_sweep_csv(traces, out)
        verdict_path = out.with_name(out.stem + "_verdicts.csv")
        with open(verdict_path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            w.writerows(rows)
    else:
        buf = io.StringIO()
        write_sweep_csv(traces, buf)
        stdout.write(buf.getvalue())
    for row in rows:
        print(f"{row[1]:>20} {row[2]:>20} a={float(row[0]):.3g} m  S(0+)={float(row[3]):+.4e}  {row[5]}",
              file=sys.stderr)
    if cfg.output.table:
        _print_table(header, rows)
    return EXIT_OK


def _band_for(cfg: RunConfig, series_kind: str, separations, workers: int):
    if series_kind not in _SERIES_KINDS:
        raise CasimirError(f"unknown measurement kind {series_kind!r}")
    kind, needs_base = _SERIES_KINDS[series_kind]
    modified = cfg.configuration()
    base = cfg.base_configuration() if needs_base else None
    plates = [i - 1 for i in cfg.experiment.density_plates]
    mats = modified.materials
    band = cfg.density_band(mats[plates[0]])
    geometry = cfg.geometry_at(float(separations[0]))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", PFAWarning)
        return theory_band(separations, modified, band, geometry, cfg.geometry.temperature, base, kind, plates,
                           cfg.settings(), workers)


def cmd_compare(cfg: RunConfig, stdout) -> int:
    exp = cfg.experiment
    if not exp.series:
        raise CasimirError("compare needs experiment.series or --series")
    series = load_series(exp.series)
    band = _band_for(cfg, series.kind, series.separations, cfg.engine.workers)
    verdict = exclusion_test(series, band, exp.levels, exp.fraction, cfg.window())
    out = Path(cfg.output.path or "compare.json")
    json_path, csv_path = report(verdict, band, series, out)
    for p in verdict.levels:
        stdout.write(f"level {p!r}: {verdict.overall[p]} (fraction {verdict.fractions[p]!r})\n")
    stdout.write(f"report: {json_path}\npoints: {csv_path}\n")
    return EXIT_OK


def cmd_synth(cfg: RunConfig, stdout) -> int:
    exp = cfg.experiment
    band = _band_for(cfg, exp.kind, [float(a) for a in cfg.geometry.separations], cfg.engine.workers)
    scale = np.maximum(np.abs(band.lower), np.abs(band.upper))
    if not np.any(scale > 0):
        raise CasimirError("theory band is identically zero; cannot size synthetic half-widths")
    scale = np.where(scale > 0, scale, scale.max())
    series = synthetic_series(
        band,
        exp.synthetic_relative_half_width * scale,
        exp.synthetic_confidence,
        exp.synthetic_offset_sigma,
        exp.seed,
        exp.kind,
        label=f"synthetic seed={exp.seed} offset={exp.synthetic_offset_sigma!r}sigma",
        temperature=cfg.geometry.temperature,
        noise=exp.synthetic_noise,
    )
    if cfg.output.path:
        write_series(series, cfg.output.path)
    else:
        buf = io.StringIO()
        write_series(series, buf)
        stdout.write(buf.getvalue())
    return EXIT_OK


COMMANDS = {
    "eps": cmd_eps,
    "energy": lambda cfg, out: _sweep("energy", cfg, out),
    "pressure": lambda cfg, out: _sweep("pressure", cfg, out),
    "force": lambda cfg, out: _sweep("force", cfg, out),
    "nernst": cmd_nernst,
    "compare": cmd_compare,
    "synth": cmd_synth,
}


def main(argv=None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        if args.dump_config:
            stdout.write(dump_config(cfg))
            return EXIT_OK
        return COMMANDS[args.command](cfg, stdout)
    except ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except (CasimirError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
