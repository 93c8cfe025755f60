import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cavity_router.model import CavityParams, CouplingMatrix, Port, ScatterPoint
from cavity_router.scattering import (
    PLANE_WAVE_AT_ORIGIN,
    SingularPointError,
    effective_potential,
    emitter_amplitudes,
    even_transmission,
    four_port,
    scattering_factor,
    solve_even_mode,
    special_points,
    two_level_u,
    u_factor,
)

from oracles import exact_probabilities, exact_u, quadratic_roots

detuning = st.floats(-10, 10)
rate = st.floats(1e-3, 1.0)


def cav(n=1, lam=1.0):
    return CavityParams(lam=lam, n=n)


def test_two_level_resonance():
    assert scattering_factor(ScatterPoint(0.0, 3.0), cav(n=0), 1.0) == -2
    assert even_transmission(ScatterPoint(0.0, 3.0), cav(n=0), 1.0) == -1


def test_pit_gives_exact_zero():
    assert scattering_factor(ScatterPoint(-2.0, 2.0), cav(), 1.0) == 0
    assert even_transmission(ScatterPoint(-2.0, 2.0), cav(), 1.0) == 1


def test_detuned_value_against_exact_arithmetic():
    u = scattering_factor(ScatterPoint(0.0, 1.0), cav(), 1.0)
    assert u == pytest.approx(complex(-0.5, 1) / 1.25, abs=1e-15)
    assert abs(u - complex(exact_u(0, 1, 1, 1))) < 1e-15


@given(detuning, detuning, st.integers(0, 20), st.floats(0, 2), st.floats(0.1, 3))
def test_circle_property(dk, da, n, lam, gamma):
    u = complex(u_factor(dk, da, n, lam, gamma))
    assert abs(abs(1 + u) - 1) < 1e-12
    assert abs(2 * u.real + abs(u) ** 2) < 1e-12


def test_circle_and_conservation_random_grid():
    rng = np.random.default_rng(11)
    size = 10_000
    dk, da = rng.uniform(-10, 10, (2, size))
    n = rng.integers(0, 21, size)
    lam = rng.uniform(0, 2, size)
    u = u_factor(dk, da, n, lam, 1.0)
    assert np.max(np.abs(np.abs(1 + u) - 1)) < 1e-12
    c = CouplingMatrix(*rng.uniform(1e-3, 1, 4)).scaled(1.0)
    u = u_factor(dk, da, n, lam, c.gamma)
    for port in Port:
        from cavity_router.modes import reconstruct_four_port

        assert np.max(np.abs(reconstruct_four_port(u, port, c).total() - 1)) < 1e-12


@given(rate, rate, rate, rate, detuning, detuning, st.integers(0, 5))
def test_probabilities_match_exact_arithmetic(ar, al, br, bl, dk, da, n):
    c = CouplingMatrix(ar, al, br, bl)
    r = four_port(ScatterPoint(dk, da), cav(n=n), c, Port.R_A)
    exact = exact_probabilities(exact_u(dk, da, n, 1, c.gamma), (ar, al, br, bl))
    got = (r.T_p, r.R_p, r.T_pbar, r.R_pbar)
    for g, e in zip(got, exact):
        assert abs(g - float(e)) < 1e-12


def test_two_level_reduction():
    dk = np.linspace(-6, 6, 801)
    np.testing.assert_allclose(u_factor(dk, 2.0, 0, 1.0, 1.0), two_level_u(dk, 1.0), atol=1e-15, rtol=0)
    # lam = 0 is the same limit
    np.testing.assert_allclose(u_factor(dk, 2.0, 5, 0.0, 1.0), two_level_u(dk, 1.0), atol=1e-15, rtol=0)


def test_fig2_pit_point(fig2_couplings):
    r = four_port(ScatterPoint(-2.0, 2.0), cav(), fig2_couplings, Port.R_A)
    assert r.T_p == 1 and r.R_p == 0 and r.T == 0


@pytest.mark.parametrize("da", [-4.0, -0.3, 0.0, 1.5, 4.0])
def test_fig2_pole_points(fig2_couplings, da):
    for root in special_points(da, cav()).pole_roots:
        r = four_port(ScatterPoint(root, da), cav(), fig2_couplings, Port.R_A)
        assert r.T_p == pytest.approx(0, abs=1e-12)
        assert r.R_p == pytest.approx(4 * 0.5 * 0.3, abs=1e-12)
        assert r.T == pytest.approx(0.4, abs=1e-12)
        assert abs(scattering_factor(ScatterPoint(root, da), cav(), 1.0) + 2) < 1e-9


def test_fig2_resonant_transmission(fig2_couplings):
    r = four_port(ScatterPoint(0.0, 1.0), cav(), fig2_couplings, Port.R_A)
    exact = exact_probabilities(exact_u(0, 1, 1, 1), ("0.5", "0.3", "0.1", "0.1"))
    assert r.T_p == pytest.approx(0.8, abs=1e-12)
    assert r.T_p == pytest.approx(float(exact[0]), abs=1e-15)


def test_potential_values():
    assert effective_potential(ScatterPoint(0.0, 0.0), cav(), 1.0).value == 0
    v = effective_potential(ScatterPoint(0.0, 1.0), cav(n=0), 1.0)
    assert v.kind == "infinite" and math.isinf(v.value)
    assert effective_potential(ScatterPoint(2.0, 0.0), cav(), 1.0).value == pytest.approx(2 / 3)
    assert effective_potential(ScatterPoint(2.0, 0.0), cav(n=0), 1.0).value == pytest.approx(0.5)


def test_potential_infinite_sign_is_left_limit():
    da = 1.5
    for root in special_points(da, cav()).pole_roots:
        v = effective_potential(ScatterPoint(root, da), cav(), 1.0)
        if v.kind == "finite":
            # rounding moved the root slightly off the pole; nothing to check
            continue
        left = effective_potential(ScatterPoint(root - 1e-7, da), cav(), 1.0)
        assert math.copysign(1, v.value) == math.copysign(1, left.value)


def test_potential_exact_pole():
    # Dk = 1, Da = 0, n lam^2 = 1: denominator exactly zero
    v = effective_potential(ScatterPoint(1.0, 0.0), cav(), 1.0)
    assert v.kind == "infinite"
    left = effective_potential(ScatterPoint(1.0 - 1e-9, 0.0), cav(), 1.0)
    assert math.copysign(1, v.value) == math.copysign(1, left.value)


def test_potential_indeterminate():
    # s = 0 and q = 0 together needs n lam^2 = 0, reachable only with lam = 0 and n > 0
    v = effective_potential(ScatterPoint(0.0, 0.0), CavityParams(lam=0.0, n=1), 1.0)
    assert v.kind == "infinite"
    assert not effective_potential(ScatterPoint(0.0, 0.0), cav(n=0), 1.0).is_finite


def test_amplitudes_vanish_for_n0_zeta_and_at_pit():
    _, zeta = emitter_amplitudes(ScatterPoint(0.3, 1.0), cav(n=0), 1.0)
    assert zeta == 0
    beta, _ = emitter_amplitudes(ScatterPoint(-1.0, 1.0), cav(), 1.0)
    assert beta == 0


@given(detuning, detuning, st.integers(0, 10), st.floats(0.05, 2), st.floats(0.1, 3))
def test_amplitude_residuals(dk, da, n, lam, gamma):
    """Substitute back into the coupled amplitude equations."""
    p = ScatterPoint(dk, da)
    c = CavityParams(lam=lam, n=n)
    beta, zeta = emitter_amplitudes(p, c, gamma)
    t = even_transmission(p, c, gamma)
    f0 = 0.5 * (1 + t) * PLANE_WAVE_AT_ORIGIN
    g = math.sqrt(n) * lam
    scale = 1 + abs(dk) + abs(da) + g
    assert abs(-dk * beta + math.sqrt(gamma) * f0 + g * zeta) < 1e-10 * scale
    assert abs(-(dk + da) * zeta + g * beta) < 1e-10 * scale
    # jump of the photon amplitude across the emitter
    assert abs(-1j * (t - 1) * PLANE_WAVE_AT_ORIGIN + math.sqrt(gamma) * beta) < 1e-10


def test_amplitudes_finite_at_pole():
    da = 1.5
    root = special_points(da, cav()).pole_roots[1]
    beta, zeta = emitter_amplitudes(ScatterPoint(root, da), cav(), 1.0)
    assert np.isfinite(beta) and np.isfinite(zeta) and abs(beta) > 0


def test_explicit_f0_singular_at_pole():
    with pytest.raises(SingularPointError):
        emitter_amplitudes(ScatterPoint(1.0, 0.0), cav(), 1.0, f0=0.1)
    beta, zeta = emitter_amplitudes(ScatterPoint(0.5, 0.0), cav(), 1.0, f0=1.0)
    assert beta == pytest.approx(0.5 / (0.25 - 1))
    assert zeta == pytest.approx(beta / 0.5)


def test_solve_even_mode_bundle():
    sol = solve_even_mode(ScatterPoint(0.4, 1.0), cav(), 1.0)
    assert abs(abs(sol.t_ke) - 1) < 1e-12
    assert sol.V.is_finite


def test_special_points_examples():
    sp = special_points(0.0, cav())
    assert sp.pole_roots == (-1.0, 1.0)
    assert sp.pit_line == 0
    assert sp.splitting == pytest.approx(2.0)
    lo, hi = special_points(3.0, cav()).pole_roots
    assert lo == pytest.approx((-3 - math.sqrt(13)) / 2, abs=1e-12)
    assert hi == pytest.approx((-3 + math.sqrt(13)) / 2, abs=1e-12)
    assert special_points(2.0, cav(n=0)).pole_roots == (-2.0, 0.0)


@given(st.floats(-50, 50), st.integers(0, 40), st.floats(0, 3))
def test_pole_root_residual(da, n, lam):
    nl2 = n * lam * lam
    roots = special_points(da, CavityParams(lam=lam, n=n)).pole_roots
    for x in roots:
        assert abs(x * (x + da) - nl2) < 1e-10 * max(1, da * da, nl2)
    ref = quadratic_roots(da, nl2)
    for x, r in zip(roots, ref):
        assert abs(x - r) < 1e-9 * max(1, abs(da), math.sqrt(nl2))
