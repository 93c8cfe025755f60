"""
Fast invariant suite behind ``cavity-router selftest``.

Each check returns ``(name, ok, detail)``. The whole suite, including one
wavepacket run and the decay calibration, finishes in well under a minute.
"""

from __future__ import annotations

import math
import time

import numpy as np

from .dressed import dressed_block, dressed_pair, extract_valley_widths
from .model import (
    FIG2_COUPLINGS, CavityParams, CouplingMatrix, EmitterParams, Port, ScatterPoint, parse_config,
)
from .modes import build_parity_basis, out_channel_vector, reconstruct_four_port
from .oracle import OracleConfig, decay_calibration, verify_against_closed_form
from .scattering import special_points, u_factor
from .sweep import Axis, GridSpec, figure_system, map_2d, spectrum_1d

__all__ = ["run_selftest", "CHECKS"]


def _random_couplings(rng, size):
    return rng.uniform(1e-3, 1.0, size=(size, 4))


def check_model():
    text = "gamma_ar = 0.5\ngamma_al=0.3 # chiral\ngamma_br=0.1\ngamma_bl=0.1\nlambda=1\nn=1\nDelta_a=0\n"
    vals = parse_config(text)
    c = CouplingMatrix(vals["gamma_ar"], vals["gamma_al"], vals["gamma_br"], vals["gamma_bl"])
    ok = c.gamma_a + c.gamma_b == c.gamma and math.isclose(c.gamma, 1.0)
    given = (100.0, 130.0, 31.0, 207.3)
    p = ScatterPoint.from_frequencies(given[3], EmitterParams(100.0, 130.0),
                                      CavityParams(lam=1, n=3, omega_a=31.0))
    back = p.to_frequencies(100.0, 31.0, 3)
    ok &= all(math.isclose(a, b, rel_tol=1e-12) for a, b in zip(back, given))
    return ok, f"gamma={c.gamma!r}, round trip {back}"


def check_modes():
    rng = np.random.default_rng(1)
    worst = 0.0
    for rates in _random_couplings(rng, 200):
        m = build_parity_basis(CouplingMatrix(*rates)).matrix
        worst = max(worst, float(np.max(np.abs(m.T @ m - np.eye(4)))))
    c = CouplingMatrix(**FIG2_COUPLINGS)
    t = np.exp(0.7j)
    direct = out_channel_vector(t, Port.R_A, c)
    res = reconstruct_four_port(t - 1, Port.R_A, c)
    amp = np.array([res.t_p, res.r_p, res.t_pbar, res.r_pbar])
    route = float(np.max(np.abs(direct - amp)))
    return worst < 1e-12 and route < 1e-12, f"|M^T M - I|={worst:.1e} route={route:.1e}"


def check_scattering():
    rng = np.random.default_rng(2)
    size = 10_000
    rates = _random_couplings(rng, size)
    dk = rng.uniform(-10, 10, size)
    da = rng.uniform(-10, 10, size)
    n = rng.integers(0, 21, size)
    lam = rng.uniform(1e-3, 2, size)
    worst = 0.0
    # one coupling set per block keeps this vectorized
    for block in np.array_split(np.arange(size), 50):
        c = CouplingMatrix(*rates[block[0]])
        u = u_factor(dk[block], da[block], n[block], lam[block], c.gamma)
        total = reconstruct_four_port(u, Port.R_A, c).total()
        worst = max(worst, float(np.max(np.abs(total - 1))), float(np.max(np.abs(np.abs(1 + u) - 1))))
    return worst < 1e-12, f"max conservation error {worst:.1e}"


def check_special_points():
    c = CouplingMatrix(**FIG2_COUPLINGS)
    worst = 0.0
    for da in np.linspace(-6, 6, 25):
        cav = CavityParams(lam=1.0, n=1)
        sp = special_points(da, cav, c.gamma)
        u_pit = u_factor(sp.pit_line, da, 1, 1.0, c.gamma)
        worst = max(worst, abs(u_pit))
        for root in sp.pole_roots:
            r = reconstruct_four_port(u_factor(root, da, 1, 1.0, c.gamma), Port.R_A, c)
            worst = max(worst, abs(r.R_p - 0.6), abs(r.T - 0.4), abs(r.T_p))
    return worst < 1e-10, f"max deviation {worst:.1e}"


def check_dressed():
    rng = np.random.default_rng(3)
    worst = 0.0
    for _ in range(100):
        da, lam, n = rng.uniform(-8, 8), rng.uniform(0.01, 2), int(rng.integers(1, 20))
        pair = dressed_pair(da, lam, n)
        eig = np.linalg.eigvalsh(dressed_block(da, lam, n))
        roots = special_points(da, CavityParams(lam=lam, n=n)).pole_roots
        worst = max(worst, float(np.max(np.abs(np.sort(eig) - np.array(pair.roots)))),
                    float(np.max(np.abs(np.array(roots) - np.array(pair.roots)))),
                    abs(pair.gamma_plus + pair.gamma_minus - 1))
    return worst < 1e-12, f"max deviation {worst:.1e}"


def check_sweep():
    s = figure_system(n=1, delta_a=0.0)
    spec = spectrum_1d(GridSpec((Axis("Delta_k_n", -6, 6, 801),), s))
    tp = spec.column("T_p")
    sym = float(np.max(np.abs(tp - tp[::-1])))
    valleys = extract_valley_widths(spec.column("Delta_k_n"), tp)
    centers = sorted(v.center for v in valleys)
    ok = sym < 1e-12 and len(centers) == 2 and abs(centers[0] + 1) < 1e-2 and abs(centers[1] - 1) < 1e-2
    grid = GridSpec((Axis("Delta_k_n", -6, 6, 41), Axis("Delta_a", -6, 6, 41)), s)
    a, b = map_2d(grid, threads=1), map_2d(grid, threads=4)
    ok &= np.array_equal(a.data, b.data)
    return ok, f"symmetry {sym:.1e}, valleys at {[round(x, 3) for x in centers]}"


def check_oracle():
    decay = decay_calibration()
    s = figure_system(n=1, delta_a=1.5)
    report = verify_against_closed_form(OracleConfig.for_gamma(-1.5, s.gamma), s)
    ok = decay.max_relative_error < 0.01 and report.passed
    return ok, f"decay err {decay.max_relative_error:.1e}, PIT carrier err {report.max_error:.1e}"


CHECKS = (
    ("model", check_model),
    ("mode-transform", check_modes),
    ("scattering", check_scattering),
    ("special-points", check_special_points),
    ("dressed", check_dressed),
    ("sweep", check_sweep),
    ("oracle", check_oracle),
)


def run_selftest(log=None) -> bool:
    """Run every check; ``log`` receives one line per check. Returns overall success."""
    all_ok = True
    for name, fn in CHECKS:
        t0 = time.perf_counter()
        try:
            ok, detail = fn()
        except Exception as exc:  # a crash is a failed check, not a crashed suite
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        all_ok &= bool(ok)
        if log is not None:
            log(f"{'PASS' if ok else 'FAIL'} {name}: {detail} ({time.perf_counter() - t0:.1f}s)")
    return all_ok
