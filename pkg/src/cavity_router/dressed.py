"""
Dressed-state picture of the cavity-driven upper transition.

Inside the n-excitation block spanned by |2,n> and |3,n-1>, measured from
the |2,n> energy (omega_2 + n omega_a), the Hamiltonian is

    [[0,            sqrt(n) lam],
     [sqrt(n) lam,  -Delta_a   ]]

because |3,n-1> lies at omega_32 - omega_a = -Delta_a. With this sign the
dressed energies coincide with the photon detunings Delta_k^n at which the
even-mode transmission has its poles. The emitter then looks like a V-type
system whose two arms decay into the waveguides at rates
gamma * |<2,n|phi_pm>|^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import ValidationError

__all__ = [
    "rabi_splitting",
    "DressedPair",
    "dressed_pair",
    "dressed_block",
    "large_detuning_approx",
    "LargeDetuning",
    "Valley",
    "extract_valley_widths",
]


def rabi_splitting(delta_a: float, lam: float, n: int) -> float:
    return math.sqrt(delta_a * delta_a + 4 * n * lam * lam)


def dressed_block(delta_a: float, lam: float, n: int) -> np.ndarray:
    g = math.sqrt(n) * lam
    return np.array([[0.0, g], [g, -delta_a]])


@dataclass(frozen=True)
class DressedPair:
    """Dressed doublet of the |2,n>, |3,n-1> block.

    ``plus`` is the branch that becomes |2,n> as lam -> 0. Vectors are the
    real coefficients on (|2,n>, |3,n-1>). For n = 0 the block is the bare
    |2,0> level alone: ``two_level`` is set, ``E_minus`` is NaN and
    ``gamma_minus`` is 0.
    """

    E_plus: float
    E_minus: float
    Omega_n: float
    c_plus: tuple[float, float]
    c_minus: tuple[float, float]
    gamma_plus: float
    gamma_minus: float
    two_level: bool = False

    @property
    def roots(self) -> tuple[float, float]:
        """Dressed energies in ascending order."""
        return tuple(sorted((self.E_plus, self.E_minus)))


def dressed_pair(delta_a: float, lam: float, n: int, gamma: float = 1.0) -> DressedPair:
    """Closed-form diagonalization of the 2x2 dressed block."""
    if n == 0:
        return DressedPair(
            E_plus=0.0,
            E_minus=math.nan,
            Omega_n=abs(delta_a),
            c_plus=(1.0, 0.0),
            c_minus=(0.0, 1.0),
            gamma_plus=gamma,
            gamma_minus=0.0,
            two_level=True,
        )
    g = math.sqrt(n) * lam
    omega = rabi_splitting(delta_a, lam, n)
    # the branch tied to |2,n> sits at 0 for lam -> 0; the other at -Delta_a.
    # Write both without subtractive cancellation.
    if delta_a >= 0:
        e_other = -(delta_a + omega) / 2
        e_two = g * g / -e_other if e_other != 0 else 0.0
    else:
        e_other = (omega - delta_a) / 2
        e_two = g * g / -e_other
    if delta_a == 0 and g == 0:
        e_two, e_other = 0.0, 0.0

    def vec(e):
        # second row of (H - e) v = 0: g v1 = (Delta_a + e) v2
        a, b = e + delta_a, g
        norm = math.hypot(a, b)
        if norm == 0:
            return (1.0, 0.0)
        return (a / norm, b / norm)

    c_plus = vec(e_two)
    c_minus = vec(e_other)
    if g == 0:
        c_plus, c_minus = (1.0, 0.0), (0.0, 1.0)
    w_plus = c_plus[0] ** 2
    return DressedPair(
        E_plus=e_two,
        E_minus=e_other,
        Omega_n=omega,
        c_plus=c_plus,
        c_minus=c_minus,
        gamma_plus=gamma * w_plus,
        gamma_minus=gamma * (1.0 - w_plus),
    )


@dataclass(frozen=True)
class LargeDetuning:
    gamma_plus: float
    gamma_minus: float
    mixing: float


def large_detuning_approx(delta_a: float, lam: float, n: int, gamma: float = 1.0) -> LargeDetuning:
    """Effective linewidths quoted for Delta_a >> sqrt(n) lam.

    gamma_+ ~ Da^2 / (Da^2 + n lam^2) gamma,
    gamma_- ~ sqrt(n) lam Da / (Da^2 + n lam^2) gamma.

    Note that gamma_- here scales with the first power of the mixing ratio
    sqrt(n) lam / Da, whereas the exact |<2,n|phi_->|^2 weight scales with
    its square; the two differ by roughly that ratio.
    """
    if delta_a == 0:
        raise ValidationError("approximation undefined at resonance", key="Delta_a")
    if delta_a < 0:
        raise ValidationError("large-detuning expansion assumes Delta_a > 0", key="Delta_a")
    nl2 = n * lam * lam
    denom = delta_a * delta_a + nl2
    return LargeDetuning(
        gamma_plus=delta_a * delta_a / denom * gamma,
        gamma_minus=math.sqrt(n) * lam * delta_a / denom * gamma,
        mixing=math.sqrt(n) * lam / delta_a,
    )


@dataclass(frozen=True)
class Valley:
    center: float
    fwhm: float
    depth: float
    truncated: bool = False

    def as_row(self) -> tuple:
        return (self.center, self.fwhm, self.depth)


def _crossing(x, y, i, j, level):
    """Linear interpolation of the level crossing between samples i and j."""
    if y[j] == y[i]:
        return x[i]
    return x[i] + (level - y[i]) * (x[j] - x[i]) / (y[j] - y[i])


def extract_valley_widths(x, transmission, baseline: float = 1.0, min_depth: float = 1e-6):
    """Locate transmission valleys and measure their full width at half depth.

    Half depth is the midpoint between the valley minimum and ``baseline``.
    A valley whose half-depth crossing is not reached before the end of the
    grid is returned with ``truncated=True`` and the width measured to the
    grid edge. Minima shallower than ``min_depth`` below the baseline are
    ignored.

    Returns a list of ``Valley`` sorted by center.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(transmission, dtype=float)
    if x.ndim != 1 or x.shape != y.shape or x.size < 3:
        raise ValueError("need matching 1D arrays with at least three samples")
    if np.any(np.diff(x) <= 0):
        raise ValueError("abscissa must be strictly increasing")

    interior = (y[1:-1] < y[:-2]) & (y[1:-1] <= y[2:])
    candidates = list(np.nonzero(interior)[0] + 1)
    if y[0] < y[1]:
        candidates.insert(0, 0)
    if y[-1] < y[-2]:
        candidates.append(len(y) - 1)

    valleys = []
    last = len(y) - 1
    for i in candidates:
        depth = baseline - y[i]
        if depth < min_depth:
            continue
        half = y[i] + depth / 2
        truncated = i in (0, last)

        j = i
        while j > 0 and y[j] < half:
            j -= 1
        if y[j] < half:
            left = x[0]
            truncated = True
        else:
            left = _crossing(x, y, j, j + 1, half)

        k = i
        while k < last and y[k] < half:
            k += 1
        if y[k] < half:
            right = x[-1]
            truncated = True
        else:
            right = _crossing(x, y, k - 1, k, half)

        center = x[i]
        if 0 < i < last:
            # parabolic refinement of the minimum
            y0, y1, y2 = y[i - 1], y[i], y[i + 1]
            curv = y0 - 2 * y1 + y2
            if curv > 0:
                h = x[i + 1] - x[i]
                center = x[i] + 0.5 * h * (y0 - y2) / curv
        valleys.append(Valley(center=float(center), fwhm=float(right - left),
                              depth=float(depth), truncated=truncated))
    return sorted(valleys, key=lambda v: v.center)
