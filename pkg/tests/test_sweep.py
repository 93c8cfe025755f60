import csv
import json

import numpy as np
import pytest

from cavity_router import sweep
from cavity_router.model import Port
from cavity_router.sweep import (
    FIGURES,
    PROB_COLUMNS,
    Axis,
    GridSpec,
    InvariantError,
    figure_system,
    map_2d,
    overlay_curves,
    photon_number_scan,
    reproduce_figure,
    spectrum_1d,
)
from cavity_router.dressed import extract_valley_widths
from cavity_router.scattering import four_port_grid

from oracles import exact_probabilities, exact_u


def k_axis(points=801, lo=-6.0, hi=6.0):
    return Axis("Delta_k_n", lo, hi, points)


@pytest.mark.parametrize("args", [("x", 0, 1, 1), ("x", 1, 1, 5), ("x", 2, 1, 5)])
def test_axis_validation(args):
    with pytest.raises(ValueError):
        Axis(*args)


def test_spectrum_columns_and_conservation():
    t = spectrum_1d(GridSpec((k_axis(),), figure_system(delta_a=1.5)))
    assert t.columns == ("Delta_k_n", *PROB_COLUMNS)
    assert len(t) == 801
    total = t.column("T_p") + t.column("R_p") + t.column("T_pbar") + t.column("R_pbar")
    assert np.max(np.abs(total - 1)) < 1e-12


def test_resonant_spectrum_symmetric():
    t = spectrum_1d(GridSpec((k_axis(),), figure_system(delta_a=0.0)))
    tp = t.column("T_p")
    assert np.max(np.abs(tp - tp[::-1])) < 1e-12
    centers = [v.center for v in extract_valley_widths(t.column("Delta_k_n"), tp)]
    assert centers == pytest.approx([-1.0, 1.0], abs=1e-3)


def test_detuned_spectrum_has_narrow_left_valley():
    t = spectrum_1d(GridSpec((k_axis(4001),), figure_system(delta_a=4.0)))
    left, right = extract_valley_widths(t.column("Delta_k_n"), t.column("T_p"))
    assert left.center < right.center
    assert left.fwhm < right.fwhm


def test_no_photon_spectrum():
    t = spectrum_1d(GridSpec((Axis("Delta_k_n", -1, 1, 3),), figure_system(n=0, delta_a=3.0)))
    assert t.column("T_p")[1] == pytest.approx((1 - 2 * 0.5) ** 2, abs=1e-15)


def test_map_pit_line_and_poles():
    s = figure_system()
    grid = GridSpec((k_axis(121), Axis("Delta_a", -6, 6, 121)), s)
    t = map_2d(grid)
    dk, da = t.column("Delta_k_n"), t.column("Delta_a")
    on_pit = np.isclose(dk, -da, atol=1e-12)
    assert on_pit.sum() == 121
    assert np.all(np.abs(t.column("T_p")[on_pit] - 1) < 1e-12)
    assert np.all(np.isfinite(t.data))
    # the grid contains the origin, where U is finite
    origin = (dk == 0) & (da == 0)
    assert origin.sum() == 1 and np.isfinite(t.column("T_p")[origin]).all()

    pit, poles = overlay_curves(grid.axes[1].values(), s.cavity)
    assert pit.columns == ("Delta_a", "Delta_k_n")
    for col in ("Delta_k_lower", "Delta_k_upper"):
        x = poles.column(col)
        r = four_port_grid(s, x, Port.R_A, delta_a=poles.column("Delta_a"))
        assert np.max(np.abs(r.R_p - 0.6)) < 1e-10
        assert np.max(np.abs(r.T - 0.4)) < 1e-10


def test_map_is_row_major_delta_a_slow():
    grid = GridSpec((k_axis(5), Axis("Delta_a", -1, 1, 3)), figure_system())
    t = map_2d(grid)
    assert list(t.column("Delta_a")) == [-1.0] * 5 + [0.0] * 5 + [1.0] * 5
    assert list(t.column("Delta_k_n")[:5]) == list(np.linspace(-6, 6, 5))


def test_map_independent_of_thread_count():
    grid = GridSpec((k_axis(101), Axis("Delta_a", -6, 6, 57)), figure_system())
    ref = map_2d(grid, threads=1).data
    for threads in (2, 3, 8):
        assert np.array_equal(map_2d(grid, threads=threads).data, ref)


def test_photon_number_scan_values():
    s = figure_system()
    t = photon_number_scan(s, np.arange(0, 251), [1.0, 5.0, 10.0])
    for da in (1.0, 5.0, 10.0):
        rows = t.column("Delta_a") == da
        tp = t.column("T_p")[rows]
        assert np.all(np.diff(tp) > 0)
        assert tp[0] == pytest.approx(0.0, abs=1e-15)
    n1 = (t.column("n") == 1) & (t.column("Delta_a") == 1.0)
    exact = exact_probabilities(exact_u(0, 1, 1, 1), ("0.5", "0.3", "0.1", "0.1"))[0]
    assert t.column("T_p")[n1][0] == pytest.approx(float(exact), abs=1e-12)


def test_photon_number_scan_rejects_non_integers():
    with pytest.raises(ValueError):
        photon_number_scan(figure_system(), np.array([0.5, 1.0]), [1.0])


def test_invariant_breach_is_reported(monkeypatch):
    monkeypatch.setattr(sweep, "u_factor", lambda *a, **k: np.full(np.shape(a[0]), -1.0 + 0j))
    with pytest.raises(InvariantError, match="grid index 0"):
        spectrum_1d(GridSpec((k_axis(11),), figure_system()))


def test_csv_and_meta(tmp_path):
    t = photon_number_scan(figure_system(), np.arange(3), [1.0])
    path = t.write(tmp_path / "scan.csv")
    with path.open() as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["n", "Delta_a", *PROB_COLUMNS]
    assert [r[0] for r in rows[1:]] == ["0", "1", "2"]
    meta = json.loads((tmp_path / "scan.meta").read_text())
    assert meta["parameters"]["gamma_ar"] == 0.5
    assert meta["version"]
    assert meta["rows"] == 3


def test_json_mirrors_csv(tmp_path):
    t = spectrum_1d(GridSpec((k_axis(7),), figure_system()))
    t.write(tmp_path / "a.csv")
    t.write(tmp_path / "a.json", "json")
    records = json.loads((tmp_path / "a.json").read_text())
    with (tmp_path / "a.csv").open() as fh:
        rows = list(csv.DictReader(fh))
    assert len(records) == len(rows) == 7
    for rec, row in zip(records, rows):
        assert rec == {k: float(v) for k, v in row.items()}


def test_unknown_format(tmp_path):
    with pytest.raises(ValueError):
        spectrum_1d(GridSpec((k_axis(3),), figure_system())).write(tmp_path / "x", "xml")


def test_reproduce_figure_files(tmp_path):
    assert set(FIGURES) == {"fig2", "fig4a", "fig4b", "fig4c", "fig5a", "fig5b"}
    names = {p.name for p in reproduce_figure("fig4a", tmp_path)}
    assert names == {"fig4a_Da0.csv", "fig4a_Da1.5.csv", "fig4a_Da4.csv"}
    names = {p.name for p in reproduce_figure("fig5a", tmp_path)}
    assert names == {"fig5a_n0.csv", "fig5a_n1.csv", "fig5a_n20.csv"}
    paths = reproduce_figure("fig2", tmp_path / "f2")
    assert sorted(p.name for p in paths) == sorted([
        "fig2a_T_p.csv", "fig2b_R_p.csv", "fig2c_T.csv", "fig2_pit_line.csv", "fig2_pole_curves.csv",
    ])
    for p in paths:
        assert p.with_suffix(".meta").exists()


def test_unknown_figure(tmp_path):
    with pytest.raises(ValueError, match="unknown figure id"):
        reproduce_figure("fig3", tmp_path)


def test_figure_bytes_independent_of_threads(tmp_path):
    a = reproduce_figure("fig2", tmp_path / "a", threads=1)
    b = reproduce_figure("fig2", tmp_path / "b", threads=4)
    for pa, pb in zip(a, b):
        assert pa.read_bytes() == pb.read_bytes()
