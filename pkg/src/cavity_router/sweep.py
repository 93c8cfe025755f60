"""
Grid evaluation of the four-port coefficients and figure datasets.

Every table row is checked for probability conservation and for a
unimodular even-mode transmission before it is returned. Rows are computed
in parallel (one task per grid row) and assembled in index order, so output
is identical for any thread count.
"""

from __future__ import annotations

import csv
import datetime as _dt
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from ._parallel import map_ordered
from .model import FIG2_COUPLINGS, CavityParams, CouplingMatrix, Port, ValidatedSystem, validate_system
from .modes import reconstruct_four_port
from .scattering import _pole_roots, u_factor

__all__ = [
    "InvariantError",
    "Axis",
    "GridSpec",
    "SweepTable",
    "PROB_COLUMNS",
    "spectrum_1d",
    "map_2d",
    "overlay_curves",
    "photon_number_scan",
    "FIGURES",
    "figure_system",
    "reproduce_figure",
]

PROB_COLUMNS = ("T_p", "R_p", "T_pbar", "R_pbar", "T")
INT_COLUMNS = {"n"}
CONSERVATION_TOL = 1e-12

DEFAULT_1D_POINTS = 4001
DEFAULT_2D_POINTS = 401
DEFAULT_SPAN = 6.0


class InvariantError(AssertionError):
    """A computed row violates conservation or |t_even| = 1."""


@dataclass(frozen=True)
class Axis:
    name: str
    lo: float
    hi: float
    points: int

    def __post_init__(self):
        if self.points < 2:
            raise ValueError(f"axis {self.name}: need at least 2 points")
        if not self.lo < self.hi:
            raise ValueError(f"axis {self.name}: need min < max")

    def values(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.points)


@dataclass(frozen=True)
class GridSpec:
    axes: tuple[Axis, ...]
    system: ValidatedSystem
    port: Port = Port.R_A


@dataclass
class SweepTable:
    columns: tuple[str, ...]
    data: np.ndarray
    meta: dict = field(default_factory=dict)

    def column(self, name: str) -> np.ndarray:
        return self.data[:, self.columns.index(name)]

    def select(self, names) -> "SweepTable":
        idx = [self.columns.index(c) for c in names]
        return SweepTable(tuple(names), self.data[:, idx], dict(self.meta))

    def __len__(self):
        return len(self.data)

    def _cell(self, name, value):
        return str(int(value)) if name in INT_COLUMNS else repr(float(value))

    def write(self, path: str | Path, fmt: str = "csv") -> Path:
        """Write the data file plus a ``.meta`` sidecar; returns the data path."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        if fmt == "csv":
            with path.open("w", newline="") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(self.columns)
                for row in self.data:
                    w.writerow([self._cell(c, v) for c, v in zip(self.columns, row)])
        elif fmt == "json":
            records = [
                {c: (int(v) if c in INT_COLUMNS else float(v)) for c, v in zip(self.columns, row)}
                for row in self.data
            ]
            path.write_text(json.dumps(records, indent=1) + "\n")
        else:
            raise ValueError(f"unknown format {fmt!r}")
        meta = {
            "tool": "cavity_router",
            "version": __version__,
            "created": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
            "columns": list(self.columns),
            "rows": len(self.data),
            **self.meta,
        }
        path.with_suffix(".meta").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
        return path


def _probabilities(system: ValidatedSystem, port: Port, delta_k, delta_a, n, lam):
    """Probability columns for broadcast inputs, with the row invariants enforced."""
    u = u_factor(delta_k, delta_a, n, lam, system.gamma)
    res = reconstruct_four_port(u, port, system.couplings)
    total = res.total()
    bad = np.abs(total - 1) > CONSERVATION_TOL
    if np.any(bad):
        i = int(np.argmax(bad))
        raise InvariantError(
            f"probability sum {np.ravel(total)[i]!r} != 1 at grid index {i}"
        )
    unimod = np.abs(np.abs(1 + u) - 1) > CONSERVATION_TOL
    if np.any(unimod):
        i = int(np.argmax(unimod))
        raise InvariantError(f"|t_even| != 1 at grid index {i}")
    return [np.broadcast_to(v, np.shape(u)) for v in (res.T_p, res.R_p, res.T_pbar, res.R_pbar, res.T)]


def _meta(grid_or_system, port, **extra):
    system = grid_or_system.system if isinstance(grid_or_system, GridSpec) else grid_or_system
    meta = {"parameters": system.as_dict(), "port": str(port)}
    if isinstance(grid_or_system, GridSpec):
        meta["axes"] = [vars(a) for a in grid_or_system.axes]
    meta.update(extra)
    return meta


def spectrum_1d(grid: GridSpec) -> SweepTable:
    """T_p, R_p, ... against the photon detuning (Delta_k^n = vk - omega_2)."""
    if len(grid.axes) != 1:
        raise ValueError("spectrum_1d takes exactly one axis")
    axis = grid.axes[0]
    x = axis.values()
    s = grid.system
    probs = _probabilities(s, grid.port, x, s.delta_a, s.cavity.n, s.cavity.lam)
    data = np.column_stack([x, *probs])
    return SweepTable((axis.name, *PROB_COLUMNS), data, _meta(grid, grid.port, kind="spectrum"))


def map_2d(grid: GridSpec, threads=None) -> SweepTable:
    """Row-major map over (Delta_k^n fast, Delta_a slow).

    The first axis is the photon detuning and the second the cavity detuning.
    """
    if len(grid.axes) != 2:
        raise ValueError("map_2d takes exactly two axes")
    xk, xa = grid.axes[0].values(), grid.axes[1].values()
    s = grid.system

    def row(da):
        probs = _probabilities(s, grid.port, xk, da, s.cavity.n, s.cavity.lam)
        return np.column_stack([xk, np.full_like(xk, da), *probs])

    blocks = map_ordered(row, xa, threads)
    data = np.vstack(blocks)
    cols = (grid.axes[0].name, grid.axes[1].name, *PROB_COLUMNS)
    return SweepTable(cols, data, _meta(grid, grid.port, kind="map2d", order="row-major, Delta_a slow"))


def overlay_curves(delta_a_values, cavity: CavityParams) -> tuple[SweepTable, SweepTable]:
    """Analytic full-transmission line and the two pole curves."""
    da = np.asarray(delta_a_values, dtype=float)
    pit = SweepTable(("Delta_a", "Delta_k_n"), np.column_stack([da, -da]),
                     {"kind": "pit_line", "condition": "Delta_k_n + Delta_a = 0"})
    roots = np.array([_pole_roots(float(a), cavity.n_lambda_sq) for a in da])
    poles = SweepTable(
        ("Delta_a", "Delta_k_lower", "Delta_k_upper"),
        np.column_stack([da, roots]),
        {"kind": "pole_curves", "condition": "Delta_k_n (Delta_k_n + Delta_a) = n lambda^2",
         "n": cavity.n, "lambda": cavity.lam},
    )
    return pit, poles


def photon_number_scan(system: ValidatedSystem, n_values, delta_a_values, delta_k: float = 0.0,
                       port: Port = Port.R_A) -> SweepTable:
    """Coefficients against the cavity photon number at fixed photon detuning."""
    n_values = np.asarray(n_values)
    if n_values.dtype.kind not in "iu" or np.any(n_values < 0):
        raise ValueError("photon numbers must be non-negative integers")
    blocks = []
    for da in delta_a_values:
        probs = _probabilities(system, port, delta_k, da, n_values, system.cavity.lam)
        blocks.append(np.column_stack([n_values, np.full(len(n_values), float(da)), *probs]))
    return SweepTable(("n", "Delta_a", *PROB_COLUMNS), np.vstack(blocks),
                      _meta(system, port, kind="nscan", Delta_k_n=delta_k))


# --- figure datasets ---------------------------------------------------------

def figure_system(n: int = 1, delta_a: float = 0.0, lam: float = 1.0) -> ValidatedSystem:
    """The coupling set shared by all figures, in units of gamma."""
    return validate_system(CouplingMatrix(**FIG2_COUPLINGS), None, CavityParams(lam=lam, n=n),
                           delta_a)


def _label(x: float) -> str:
    return f"{x:g}"


def _fig2(out: Path, fmt: str, threads, points=DEFAULT_2D_POINTS, span=DEFAULT_SPAN):
    s = figure_system(n=1)
    grid = GridSpec((Axis("Delta_k_n", -span, span, points), Axis("Delta_a", -span, span, points)), s)
    table = map_2d(grid, threads)
    table.meta["figure"] = "fig2"
    paths = []
    for panel, col in (("a", "T_p"), ("b", "R_p"), ("c", "T")):
        sub = table.select(("Delta_k_n", "Delta_a", col))
        sub.meta["panel"] = panel
        paths.append(sub.write(out / f"fig2{panel}_{col}.{fmt}", fmt))
    pit, poles = overlay_curves(grid.axes[1].values(), s.cavity)
    paths.append(pit.write(out / f"fig2_pit_line.{fmt}", fmt))
    paths.append(poles.write(out / f"fig2_pole_curves.{fmt}", fmt))
    return paths


def _spectra(tag, out, fmt, cases, points=DEFAULT_1D_POINTS, span=DEFAULT_SPAN):
    paths = []
    for suffix, system in cases:
        t = spectrum_1d(GridSpec((Axis("Delta_k_n", -span, span, points),), system))
        t.meta["figure"] = tag
        paths.append(t.write(out / f"{tag}_{suffix}.{fmt}", fmt))
    return paths


def _fig4a(out, fmt, threads):
    cases = [(f"Da{_label(d)}", figure_system(n=1, delta_a=d)) for d in (0.0, 1.5, 4.0)]
    return _spectra("fig4a", out, fmt, cases)


def _fig4b(out, fmt, threads, points=DEFAULT_1D_POINTS):
    paths = []
    da = np.linspace(0.0, 10.0, points)
    for n in (0, 1):
        s = figure_system(n=n)
        probs = _probabilities(s, Port.R_A, 0.0, da, n, s.cavity.lam)
        t = SweepTable(("Delta_a", *PROB_COLUMNS), np.column_stack([da, *probs]),
                       _meta(s, Port.R_A, kind="resonant slice", Delta_k_n=0.0, figure="fig4b"))
        paths.append(t.write(out / f"fig4b_n{n}.{fmt}", fmt))
    return paths


FIG4C_DELTA_A = 10.0


def _fig4c(out, fmt, threads):
    cases = [(f"n{n}", figure_system(n=n, delta_a=FIG4C_DELTA_A)) for n in (0, 1)]
    return _spectra("fig4c", out, fmt, cases)


def _fig5a(out, fmt, threads):
    cases = [(f"n{n}", figure_system(n=n, delta_a=1.0)) for n in (0, 1, 20)]
    return _spectra("fig5a", out, fmt, cases)


FIG5B_N_MAX = 50


def _fig5b(out, fmt, threads):
    s = figure_system(n=1)
    paths = []
    for da in (1.0, 5.0, 10.0):
        t = photon_number_scan(s, np.arange(FIG5B_N_MAX + 1), [da])
        t.meta["figure"] = "fig5b"
        paths.append(t.write(out / f"fig5b_Da{_label(da)}.{fmt}", fmt))
    return paths


FIGURES = {
    "fig2": _fig2,
    "fig4a": _fig4a,
    "fig4b": _fig4b,
    "fig4c": _fig4c,
    "fig5a": _fig5a,
    "fig5b": _fig5b,
}


def reproduce_figure(figure_id: str, out_dir: str | Path, fmt: str = "csv", threads=None) -> list[Path]:
    """Write every curve/panel of one figure; returns the data file paths."""
    try:
        build = FIGURES[figure_id]
    except KeyError:
        raise ValueError(f"unknown figure id {figure_id!r} (choose from {', '.join(FIGURES)})")
    return build(Path(out_dir), fmt, threads)
