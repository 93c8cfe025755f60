"""
Even/odd channel decomposition and four-port reconstruction.

Channel vectors are ordered (R_a, L_a, R_b, L_b), where the left-going
components are taken at mirrored position -x. In that basis the even mode
is the only combination that touches the emitter; the three odd modes
propagate freely.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import CouplingMatrix, Port, ValidationError

__all__ = [
    "SingleWaveguideError",
    "ParityBasis",
    "InputDecomposition",
    "FourPortResult",
    "build_parity_basis",
    "decompose_input",
    "reconstruct_four_port",
    "channel_vector",
    "out_channel_vector",
]

ROW_NAMES = ("E", "O", "O_a", "O_b")


class SingleWaveguideError(ValidationError):
    """One waveguide is fully decoupled; the two-waveguide basis degenerates."""


@dataclass(frozen=True)
class ParityBasis:
    """Orthogonal 4x4 change of basis; rows are E, O, O_a, O_b."""

    matrix: np.ndarray

    @property
    def even_row(self) -> np.ndarray:
        return self.matrix[0]

    def orthogonality_error(self) -> float:
        m = self.matrix
        return float(np.max(np.abs(m.T @ m - np.eye(4))))

    def to_csv(self) -> str:
        cols = ",".join(str(p) for p in Port)
        lines = [f"mode,{cols}"]
        for name, row in zip(ROW_NAMES, self.matrix):
            lines.append(name + "," + ",".join(repr(float(x)) for x in row))
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class InputDecomposition:
    """Weights of a single-channel input on the even and odd modes."""

    even_amplitude: float
    odd_amplitudes: tuple[float, float, float]

    def norm_sq(self) -> float:
        return self.even_amplitude ** 2 + sum(a * a for a in self.odd_amplitudes)


def build_parity_basis(couplings: CouplingMatrix) -> ParityBasis:
    """Build the parity-operator basis for the given chiral rates.

    Rows are normalized to unit length. The O row as written already has
    unit norm, so normalization only guards against rounding.
    """
    ga, gb, g = couplings.gamma_a, couplings.gamma_b, couplings.gamma
    if ga == 0 or gb == 0:
        empty = "a" if ga == 0 else "b"
        raise SingleWaveguideError(
            f"waveguide {empty} is decoupled; use the single-waveguide even mode "
            "(the four-port amplitudes remain valid)",
            key=f"gamma_{empty}",
        )
    ar, al, br, bl = (np.sqrt(x) for x in couplings.as_array())
    sg = np.sqrt(g)
    e = np.array([ar, al, br, bl]) / sg
    o = np.array([
        np.sqrt(gb / ga) * ar / sg,
        np.sqrt(gb / ga) * al / sg,
        -np.sqrt(ga / gb) * br / sg,
        -np.sqrt(ga / gb) * bl / sg,
    ])
    # a chiral-only waveguide (say gamma_al = 0) still gives a unit O_p row
    o_a = np.array([al, -ar, 0.0, 0.0]) / np.sqrt(ga)
    o_b = np.array([0.0, 0.0, bl, -br]) / np.sqrt(gb)
    m = np.vstack([e, o, o_a, o_b])
    m /= np.linalg.norm(m, axis=1, keepdims=True)
    return ParityBasis(m)


def decompose_input(port: Port, couplings: CouplingMatrix) -> InputDecomposition:
    col = build_parity_basis(couplings).matrix[:, port.index]
    return InputDecomposition(float(col[0]), tuple(float(x) for x in col[1:]))


def channel_vector(port: Port) -> np.ndarray:
    v = np.zeros(4, dtype=complex)
    v[port.index] = 1.0
    return v


def out_channel_vector(t_even, port: Port, couplings: CouplingMatrix) -> np.ndarray:
    """Out-state channel amplitudes obtained by scattering in the parity basis.

    The input column is rotated into (E, O, O_a, O_b), the even component is
    multiplied by ``t_even`` and the result rotated back. This is the route
    independent of the closed-form amplitudes in ``reconstruct_four_port``.
    """
    m = build_parity_basis(couplings).matrix
    s = np.diag([t_even, 1.0, 1.0, 1.0]).astype(complex)
    return m.T @ s @ m @ channel_vector(port)


@dataclass(frozen=True)
class FourPortResult:
    """Out-channel amplitudes for a photon entering through ``port``.

    ``t_p`` continues in the input channel, ``r_p`` is reflected in the same
    waveguide, ``t_pbar`` and ``r_pbar`` are transmitted and reflected into
    the other waveguide. Fields may be scalars or same-shaped arrays.
    Probabilities are recomputed on access.
    """

    t_p: complex | np.ndarray
    r_p: complex | np.ndarray
    t_pbar: complex | np.ndarray
    r_pbar: complex | np.ndarray
    port: Port

    @property
    def T_p(self):
        return np.abs(self.t_p) ** 2

    @property
    def R_p(self):
        return np.abs(self.r_p) ** 2

    @property
    def T_pbar(self):
        return np.abs(self.t_pbar) ** 2

    @property
    def R_pbar(self):
        return np.abs(self.r_pbar) ** 2

    @property
    def T(self):
        """Transfer into the other waveguide, T_pbar + R_pbar."""
        return self.T_pbar + self.R_pbar

    def probabilities(self) -> dict:
        return {
            "T_p": self.T_p,
            "R_p": self.R_p,
            "T_pbar": self.T_pbar,
            "R_pbar": self.R_pbar,
            "T": self.T,
        }

    def total(self):
        return self.T_p + self.R_p + self.T_pbar + self.R_pbar


def reconstruct_four_port(u, port: Port, couplings: CouplingMatrix) -> FourPortResult:
    """Four-port amplitudes from the scattering factor ``u = t_even - 1``."""
    g = couplings.gamma
    g_in = couplings.rate(port)
    back = couplings.rate(port.flipped())
    across = couplings.rate(port.other_waveguide())
    across_back = couplings.rate(port.other_waveguide().flipped())
    return FourPortResult(
        t_p=(g_in / g) * u + 1,
        r_p=(np.sqrt(g_in * back) / g) * u,
        t_pbar=(np.sqrt(g_in * across) / g) * u,
        r_pbar=(np.sqrt(g_in * across_back) / g) * u,
        port=port,
    )
