import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from casimir_audit.errors import DomainError, SchemaError
from casimir_audit.experiments import (
    MeasurementSeries,
    TheoryBand,
    exclusion_test,
    load_series,
    read_points_csv,
    report,
    synthetic_series,
    theory_band,
    write_series,
)
from casimir_audit.lifshitz import Configuration, Geometry
from casimir_audit.reflection import SchemeConfig
from casimir_audit.stats import two_sided_z

from conftest import builtin

LEVELS = (0.70, 0.95, 0.999)
Z70 = two_sided_z(0.70)


def write(tmp_path, text, name="series.csv"):
    path = tmp_path / name
    path.write_text(text)
    return path


GOOD = """a_unit,kind,confidence
nm,force-difference,0.70
a,value,half_width
100,-1.0e-12,2e-13
200,-5.0e-13,1e-13
300,-2.0e-13,5e-14
"""


def test_load_three_rows_in_nanometres(tmp_path):
    s = load_series(write(tmp_path, GOOD))
    assert len(s) == 3
    assert np.allclose(s.separations, [1e-7, 2e-7, 3e-7], rtol=1e-15)
    assert s.kind == "force-difference" and s.confidence == 0.70


def test_load_optional_metadata(tmp_path):
    text = GOOD.replace("a_unit,kind,confidence\nnm,force-difference,0.70", "a_unit,kind,confidence,label,temperature_K\num,pressure,0.95,run7,295")
    s = load_series(write(tmp_path, text))
    assert s.label == "run7" and s.temperature == 295.0
    assert s.separations[0] == pytest.approx(1e-4)


@pytest.mark.parametrize(
    "row, line",
    [("400,1e-13,0", 7), ("400,1e-13,-1e-14", 7), ("400,1e-13,nan", 7), ("400,abc,1e-14", 7), ("400,1e-13", 7)],
)
def test_bad_rows_name_the_line(tmp_path, row, line):
    with pytest.raises(SchemaError, match=f":{line}:"):
        load_series(write(tmp_path, GOOD + row + "\n"))


def test_non_monotone_separations(tmp_path):
    with pytest.raises(SchemaError, match="increasing"):
        load_series(write(tmp_path, GOOD + "250,1e-13,1e-14\n"))


@pytest.mark.parametrize(
    "text",
    [
        "",
        "a_unit,kind,confidence\nnm,force-difference,0.70\na,value,half_width\n",
        "unit,kind,confidence\nnm,force-difference,0.70\na,value,half_width\n1,1,1\n",
        "a_unit,kind,confidence\nft,force-difference,0.70\na,value,half_width\n1,1,1\n",
        "a_unit,kind,confidence\nnm,force-difference,1.5\na,value,half_width\n1,1,1\n",
        "a_unit,kind,confidence\nnm,torque,0.7\na,value,half_width\n1,1,1\n",
    ],
)
def test_malformed_files(tmp_path, text):
    with pytest.raises(SchemaError):
        load_series(write(tmp_path, text))


def test_series_writer_round_trip(tmp_path):
    s = load_series(write(tmp_path, GOOD))
    path = tmp_path / "again.csv"
    write_series(s, path, unit="nm")
    again = load_series(path)
    assert np.allclose(again.separations, s.separations, rtol=1e-15)
    assert np.array_equal(again.values, s.values)
    assert np.array_equal(again.half_widths, s.half_widths)


def band_at(values, half_width=0.0, a=None):
    values = np.asarray(values, dtype=float)
    a = np.arange(1, values.size + 1) * 1e-7 if a is None else a
    return TheoryBand(a, values - half_width, values + half_width, np.zeros_like(values))


def series_at(values, hw, confidence=0.70, a=None):
    values = np.asarray(values, dtype=float)
    a = np.arange(1, values.size + 1) * 1e-7 if a is None else a
    return MeasurementSeries("pressure", a, values, np.full(values.size, hw), confidence)


def test_point_on_band_edge_not_excluded():
    band = band_at([1.0], half_width=0.5)
    v = exclusion_test(series_at([1.5], 0.1), band, LEVELS)
    assert v.points[0].excluded_at == ()
    assert v.points[0].distance_sigma == 0.0


def test_four_sigma_excluded_everywhere():
    # zero-width band: sigma is the experimental sigma alone
    hw = Z70
    v = exclusion_test(series_at([4.0], hw), band_at([0.0]), LEVELS)
    assert v.points[0].distance_sigma == pytest.approx(4.0, rel=1e-14)
    assert v.points[0].excluded_at == LEVELS


def test_one_and_half_sigma_excluded_at_70_only():
    v = exclusion_test(series_at([-1.5], Z70), band_at([0.0]), LEVELS)
    assert v.points[0].excluded_at == (0.70,)


def test_theory_half_width_enters_combined_sigma():
    band = band_at([0.0], half_width=Z70 * 0.75)
    v = exclusion_test(series_at([band.upper[0] + 2.0], Z70), band, LEVELS)
    # sigma_expt = 1, sigma_theory = 0.75 -> combined 1.25, distance 2.0
    assert v.sigma_trace[0] == pytest.approx(1.25)
    assert v.points[0].distance_sigma == pytest.approx(1.6)


def test_mismatched_grid():
    with pytest.raises(DomainError):
        exclusion_test(series_at([1.0, 2.0], 0.1), band_at([1.0]), LEVELS)


def test_overall_fraction_and_window():
    values = [5.0] * 19 + [0.0]
    v = exclusion_test(series_at(values, Z70), band_at([0.0] * 20), LEVELS)
    assert v.fractions[0.999] == pytest.approx(0.95)
    assert v.overall[0.999] == "excluded"
    a = np.arange(1, 21) * 1e-7
    windowed = exclusion_test(series_at(values, Z70), band_at([0.0] * 20), LEVELS, window=(a[-3], a[-1]))
    assert windowed.fractions[0.999] == pytest.approx(2 / 3)
    assert windowed.overall[0.999] == "not-excluded"


@st.composite
def datasets(draw):
    n = draw(st.integers(1, 12))
    centre = draw(st.lists(st.floats(-1e3, 1e3), min_size=n, max_size=n))
    width = draw(st.lists(st.floats(0, 10), min_size=n, max_size=n))
    values = draw(st.lists(st.floats(-1e3, 1e3), min_size=n, max_size=n))
    hw = draw(st.floats(1e-3, 50))
    conf = draw(st.floats(0.51, 0.999))
    return np.array(centre), np.array(width), np.array(values), hw, conf


@given(datasets())
@settings(max_examples=150)
def test_monotone_exclusion(data):
    centre, width, values, hw, conf = data
    band = TheoryBand(np.arange(1, centre.size + 1) * 1e-7, centre - width, centre + width, np.zeros_like(centre))
    levels = (0.6, 0.70, 0.9, 0.95, 0.99, 0.999)
    v = exclusion_test(series_at(values, hw, conf), band, levels)
    for pt in v.points:
        for p in pt.excluded_at:
            assert all(q in pt.excluded_at for q in levels if q < p)


@given(datasets())
@settings(max_examples=150)
def test_negation_symmetry(data):
    centre, width, values, hw, conf = data
    a = np.arange(1, centre.size + 1) * 1e-7
    band = TheoryBand(a, centre - width, centre + width, np.zeros_like(centre))
    flipped = TheoryBand(a, -(centre + width), -(centre - width), np.zeros_like(centre))
    v = exclusion_test(series_at(values, hw, conf), band, LEVELS)
    w = exclusion_test(series_at(-values, hw, conf), flipped, LEVELS)
    assert [p.excluded_at for p in v.points] == [p.excluded_at for p in w.points]
    assert v.overall == w.overall


def test_calibration_small_sample():
    band = band_at(np.zeros(400))
    rates = []
    for seed in range(25):
        s = synthetic_series(band, Z70, 0.70, seed=seed, kind="pressure")
        v = exclusion_test(s, band, (0.70,))
        rates.append(v.fractions[0.70])
    mean = np.mean(rates)
    assert abs(mean - 0.30) < 3 * np.sqrt(0.3 * 0.7 / (400 * 25))


def test_synthetic_is_seeded():
    band = band_at([1.0, 2.0, 3.0], 0.1)
    a = synthetic_series(band, 0.2, seed=11)
    b = synthetic_series(band, 0.2, seed=11)
    c = synthetic_series(band, 0.2, seed=12)
    assert np.array_equal(a.values, b.values)
    assert not np.array_equal(a.values, c.values)


def test_synthetic_offset_without_noise_is_excluded():
    band = band_at(np.linspace(1, 2, 9), 0.05)
    s = synthetic_series(band, 0.1, offset_sigma=5.0, noise=False)
    v = exclusion_test(s, band, LEVELS)
    assert v.overall[0.999] == "excluded"
    assert all(p.distance_sigma == pytest.approx(5.0) for p in v.points)


def light_dark():
    au, dark, light = builtin("au-drude"), builtin("si-intrinsic"), builtin("si-doped")
    base = Configuration((au, dark), SchemeConfig())
    modified = Configuration((au, light), (SchemeConfig(), SchemeConfig("screened", "debye-hueckel")))
    return base, modified, Geometry("sphere-plate", 1e-7, 98.95e-6)


GRID = np.linspace(100e-9, 500e-9, 5)


def test_zero_width_band_when_density_fixed():
    base, modified, g = light_dark()
    band = theory_band(GRID, modified, (2.1e25, 2.1e25), g, 295.0, base, plates=(1,))
    assert np.array_equal(band.lower, band.upper)


def test_band_widening_never_narrows():
    base, modified, g = light_dark()
    narrow = theory_band(GRID, modified, (1.9e25, 2.3e25), g, 295.0, base, plates=(1,))
    wide = theory_band(GRID, modified, (1.7e25, 2.5e25), g, 295.0, base, plates=(1,))
    assert np.all(wide.lower <= narrow.lower) and np.all(wide.upper >= narrow.upper)
    assert np.all(np.diff(np.abs(wide.center)) < 0)


def test_band_without_base_is_plain_observable():
    _, modified, g = light_dark()
    band = theory_band(GRID[:2], modified, (2.1e25, 2.1e25), g, 295.0, kind="force", plates=(1,))
    assert np.all(band.lower < 0)


def test_band_rejects_inverted_density():
    base, modified, g = light_dark()
    with pytest.raises(DomainError):
        theory_band(GRID, modified, (2.5e25, 1.7e25), g, 295.0, base, plates=(1,))


def test_report_blocks_and_round_trip(tmp_path):
    band = band_at([0.0, 1.0, 2.0], 0.1)
    s = series_at([0.5, 1.0, 9.0], 0.2)
    v = exclusion_test(s, band, LEVELS)
    json_path, csv_path = report(v, band, s, tmp_path / "out.json")
    doc = json.loads(json_path.read_text())
    assert set(doc) >= {"series", "band", "per_point", "overall"}
    assert doc["per_point"][2]["excluded_at"] == list(v.points[2].excluded_at)
    assert doc["rule"]["signed_convention"] == "theory - experiment"
    rows = read_points_csv(csv_path)
    for row, pt, value in zip(rows, v.points, s.values):
        assert row["a_m"] == pt.separation
        assert row["distance_sigma"] == pt.distance_sigma
        assert row["sigma"] == pt.sigma
        assert row["value"] == value
        assert row["excluded_at"] == pt.excluded_at


def test_report_without_levels(tmp_path):
    band = band_at([0.0, 1.0])
    s = series_at([0.5, 1.0], 0.2)
    v = exclusion_test(s, band, ())
    json_path, _ = report(v, band, s, tmp_path / "r.json")
    doc = json.loads(json_path.read_text())
    assert doc["overall"] == {}
    assert [p["distance_sigma"] for p in doc["per_point"]] == [p.distance_sigma for p in v.points]


def test_report_single_level(tmp_path):
    band = band_at([0.0])
    s = series_at([0.5], 0.2)
    json_path, _ = report(exclusion_test(s, band, (0.999,)), band, s, tmp_path / "r.json")
    assert list(json.loads(json_path.read_text())["overall"]) == ["0.999"]
