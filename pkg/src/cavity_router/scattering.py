"""
Closed-form single-photon scattering in the even (interacting) channel.

All the physics of the four-port router is carried by one complex number,
the scattering factor

    U = -i g s / (q + i g s / 2),    s = Dk + Da,    q = Dk * s - n * lam**2,

with ``Dk`` the photon detuning from omega_2 and ``Da`` the cavity-transition
detuning. ``U`` always lies on the circle |1 + U| = 1. When n * lam**2 = 0 the
factor ``s`` cancels and the two-level form -i g / (Dk + i g / 2) is used, so
there is no 0/0 anywhere on the real parameter domain.

The array functions accept numpy broadcasting; the ``ScatterPoint`` wrappers
return Python scalars.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import CavityParams, CouplingMatrix, Port, ScatterPoint, ValidatedSystem
from .modes import FourPortResult, reconstruct_four_port

__all__ = [
    "u_factor",
    "two_level_u",
    "scattering_factor",
    "even_transmission",
    "Potential",
    "effective_potential",
    "emitter_amplitudes",
    "EvenModeSolution",
    "solve_even_mode",
    "four_port",
    "four_port_grid",
    "SpecialPoints",
    "special_points",
    "SingularPointError",
    "PLANE_WAVE_AT_ORIGIN",
]

# incoming plane wave e^{ikx}/sqrt(2 pi) evaluated at x = 0
PLANE_WAVE_AT_ORIGIN = 1.0 / math.sqrt(2.0 * math.pi)


class SingularPointError(ArithmeticError):
    """The requested quantity has no finite value at this parameter point."""


def two_level_u(delta_k, gamma):
    """Scattering factor of a bare two-level emitter."""
    delta_k = np.asarray(delta_k, dtype=float)
    return -1j * gamma / (delta_k + 0.5j * gamma)


def u_factor(delta_k, delta_a, n, lam, gamma):
    """Vectorized scattering factor U = t_even - 1.

    Parameters
    ----------
    delta_k, delta_a : float or array
        Photon detuning from omega_2 and cavity detuning omega_a - omega_32.
    n : int or int array
        Cavity photon number.
    lam : float or array
        Cavity drive strength on the |2> <-> |3> transition.
    gamma : float
        Total waveguide coupling rate.
    """
    dk, da, n, lam = np.broadcast_arrays(
        np.asarray(delta_k, dtype=float),
        np.asarray(delta_a, dtype=float),
        np.asarray(n),
        np.asarray(lam, dtype=float),
    )
    nl2 = n * lam * lam
    s = dk + da
    q = dk * s - nl2
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        general = (-1j * gamma) * s / (q + (0.5j * gamma) * s)
        bare = (-1j * gamma) / (dk + 0.5j * gamma)
    out = np.where(nl2 == 0, bare, general)
    return out[()] if out.ndim == 0 else out


def scattering_factor(point: ScatterPoint, cavity: CavityParams, gamma: float) -> complex:
    return complex(u_factor(point.Delta_k_n, point.Delta_a, cavity.n, cavity.lam, gamma))


def even_transmission(point: ScatterPoint, cavity: CavityParams, gamma: float) -> complex:
    """t_even = 1 + U; unimodular for real parameters."""
    return 1.0 + scattering_factor(point, cavity, gamma)


@dataclass(frozen=True)
class Potential:
    """Strength of the energy-dependent delta potential.

    ``kind`` is ``"finite"``, ``"infinite"`` (value is +inf or -inf, the sign
    of the limit approached from smaller Delta_k) or ``"indeterminate"``
    (value is NaN).
    """

    value: float
    kind: str

    @property
    def is_finite(self) -> bool:
        return self.kind == "finite"


def effective_potential(point: ScatterPoint, cavity: CavityParams, gamma: float) -> Potential:
    """Diagnostic only; scattering quantities never go through V."""
    dk, da = point.Delta_k_n, point.Delta_a
    nl2 = cavity.n_lambda_sq
    if nl2 == 0:
        # s cancels: V = gamma / Dk
        if dk == 0:
            return Potential(-math.inf, "infinite")
        return Potential(gamma / dk, "finite")
    s = dk + da
    q = dk * s - nl2
    if q == 0:
        if s == 0:
            return Potential(math.nan, "indeterminate")
        slope = 2 * dk + da
        if slope == 0:
            return Potential(math.nan, "indeterminate")
        sign = -math.copysign(1.0, gamma * s * slope)
        return Potential(sign * math.inf, "infinite")
    return Potential(gamma * s / q, "finite")


def emitter_amplitudes(
    point: ScatterPoint, cavity: CavityParams, gamma: float, f0: complex | None = None
) -> tuple[complex, complex]:
    """Amplitudes (beta, zeta) of |2,n> and |3,n-1> in the scattering eigenstate.

    ``f0`` is the photon amplitude at the emitter. By default it is the
    midpoint value (1 + t_even) / (2 sqrt(2 pi)) of the unit plane wave, and
    the amplitudes are written in a form that stays finite at the poles
    (where f0 vanishes). An explicit ``f0`` uses beta = sqrt(g) f0 s / q and
    zeta = sqrt(n) lam sqrt(g) f0 / q directly and raises
    ``SingularPointError`` when q = 0 and f0 != 0.
    """
    dk, da = point.Delta_k_n, point.Delta_a
    nl2 = cavity.n_lambda_sq
    root_g = math.sqrt(gamma)
    g_eff = cavity.effective_coupling
    s = dk + da
    q = dk * s - nl2
    if f0 is None:
        p0 = PLANE_WAVE_AT_ORIGIN
        if nl2 == 0:
            return root_g * p0 / complex(dk, 0.5 * gamma), 0j
        denom = complex(q, 0.5 * gamma * s)
        return root_g * p0 * s / denom, g_eff * root_g * p0 / denom
    f0 = complex(f0)
    if nl2 == 0:
        if dk == 0:
            if f0 == 0:
                raise SingularPointError("beta is 0/0 at the bare resonance")
            raise SingularPointError("beta diverges at the bare resonance for f0 != 0")
        return root_g * f0 / dk, 0j
    if q == 0:
        if f0 == 0:
            raise SingularPointError("beta is 0/0 at a pole; omit f0 for the regular limit")
        raise SingularPointError("beta diverges at a pole for f0 != 0")
    return root_g * f0 * s / q, g_eff * root_g * f0 / q


@dataclass(frozen=True)
class EvenModeSolution:
    t_ke: complex
    V: Potential
    beta: complex
    zeta: complex


def solve_even_mode(point: ScatterPoint, cavity: CavityParams, gamma: float) -> EvenModeSolution:
    beta, zeta = emitter_amplitudes(point, cavity, gamma)
    return EvenModeSolution(
        t_ke=even_transmission(point, cavity, gamma),
        V=effective_potential(point, cavity, gamma),
        beta=beta,
        zeta=zeta,
    )


def four_port(
    point: ScatterPoint, cavity: CavityParams, couplings: CouplingMatrix, port: Port
) -> FourPortResult:
    u = scattering_factor(point, cavity, couplings.gamma)
    return reconstruct_four_port(u, port, couplings)


def four_port_grid(system: ValidatedSystem, delta_k, port: Port, delta_a=None, n=None, lam=None):
    """Array version of ``four_port``; any of the detunings/cavity knobs may be arrays."""
    u = u_factor(
        delta_k,
        system.delta_a if delta_a is None else delta_a,
        system.cavity.n if n is None else n,
        system.cavity.lam if lam is None else lam,
        system.gamma,
    )
    return reconstruct_four_port(u, port, system.couplings)


@dataclass(frozen=True)
class SpecialPoints:
    """Full-transmission detuning and the two zero-transmission detunings."""

    pit_line: float
    pole_roots: tuple[float, float]

    @property
    def splitting(self) -> float:
        return self.pole_roots[1] - self.pole_roots[0]


def _pole_roots(delta_a, nl2):
    """Roots of x (x + Da) = n lam^2, lower first, without cancellation."""
    omega = math.sqrt(delta_a * delta_a + 4 * nl2)
    if delta_a >= 0:
        lo = -(delta_a + omega) / 2
        hi = nl2 / -lo if lo != 0 else 0.0
    else:
        hi = (omega - delta_a) / 2
        lo = nl2 / -hi if hi != 0 else 0.0
    if nl2 == 0:
        # degenerate quadratic x (x + Da) = 0
        lo, hi = sorted((0.0, -delta_a))
    return lo, hi


def special_points(delta_a: float, cavity: CavityParams, gamma: float = 1.0) -> SpecialPoints:
    """PIT line Dk = -Da and the pole roots (-Da -/+ Omega_n) / 2.

    ``gamma`` does not enter; it is accepted for a uniform call signature.
    """
    lo, hi = _pole_roots(float(delta_a), cavity.n_lambda_sq)
    return SpecialPoints(pit_line=-float(delta_a), pole_roots=(lo, hi))
