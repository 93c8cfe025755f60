"""
Parameter containers for the two-waveguide router.

Units follow hbar = 1 and group velocity v = 1, so photon momentum and
photon frequency coincide. Every quantity below is a frequency or a rate;
the CLI rescales them to units of the total coupling rate gamma unless the
caller asks for absolute units.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, replace
from pathlib import Path

__all__ = [
    "ValidationError",
    "RegimeWarning",
    "Port",
    "CouplingMatrix",
    "EmitterParams",
    "CavityParams",
    "ScatterPoint",
    "ValidatedSystem",
    "validate_system",
    "CONFIG_KEYS",
    "parse_config",
    "load_config",
    "system_from_mapping",
    "FIG2_COUPLINGS",
]

# relative factor standing in for "much smaller than"
REGIME_FACTOR = 0.1


class ValidationError(ValueError):
    """Raised when a parameter set violates a hard constraint.

    ``key`` names the offending parameter so the CLI can report it.
    """

    def __init__(self, message: str, key: str | None = None):
        super().__init__(message if key is None else f"{key}: {message}")
        self.key = key


class RegimeWarning(UserWarning):
    """Parameters are outside the regime where the model is trustworthy."""


class Port(enum.Enum):
    """One of the four chiral channels, ``(waveguide, direction)``."""

    R_A = ("a", "r")
    L_A = ("a", "l")
    R_B = ("b", "r")
    L_B = ("b", "l")

    @property
    def waveguide(self) -> str:
        return self.value[0]

    @property
    def direction(self) -> str:
        return self.value[1]

    @property
    def index(self) -> int:
        """Position in the channel ordering (R_a, L_a, R_b, L_b)."""
        return list(Port).index(self)

    def flipped(self) -> "Port":
        """Same waveguide, opposite direction."""
        d = "l" if self.direction == "r" else "r"
        return Port((self.waveguide, d))

    def other_waveguide(self) -> "Port":
        """Other waveguide, same direction."""
        w = "b" if self.waveguide == "a" else "a"
        return Port((w, self.direction))

    @classmethod
    def parse(cls, text: str) -> "Port":
        """Accept ``R_a``, ``Ra``, ``a_r``, ``a,r`` and case variants."""
        s = text.strip().lower().replace("_", "").replace(",", "").replace("-", "")
        if len(s) == 2:
            if s[0] in "rl" and s[1] in "ab":
                return cls((s[1], s[0]))
            if s[0] in "ab" and s[1] in "rl":
                return cls((s[0], s[1]))
        raise ValidationError(f"unknown port label {text!r}", key="port")

    def __str__(self) -> str:
        return f"{self.direction.upper()}_{self.waveguide}"


def _check_rate(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise ValidationError("coupling rate must be finite", key=name)
    if value < 0:
        raise ValidationError("negative coupling rate", key=name)
    return value


@dataclass(frozen=True)
class CouplingMatrix:
    """Chiral decay rates of the |1> <-> |2> transition into each channel."""

    gamma_ar: float
    gamma_al: float
    gamma_br: float
    gamma_bl: float

    def __post_init__(self):
        for name in ("gamma_ar", "gamma_al", "gamma_br", "gamma_bl"):
            object.__setattr__(self, name, _check_rate(name, getattr(self, name)))
        if self.gamma <= 0:
            raise ValidationError("total coupling gamma must be positive", key="gamma")

    @property
    def gamma_a(self) -> float:
        return self.gamma_ar + self.gamma_al

    @property
    def gamma_b(self) -> float:
        return self.gamma_br + self.gamma_bl

    @property
    def gamma(self) -> float:
        return self.gamma_a + self.gamma_b

    def rate(self, port: Port) -> float:
        return getattr(self, f"gamma_{port.waveguide}{port.direction}")

    def as_array(self):
        """Rates in channel order (R_a, L_a, R_b, L_b)."""
        return (self.gamma_ar, self.gamma_al, self.gamma_br, self.gamma_bl)

    def scaled(self, factor: float) -> "CouplingMatrix":
        return CouplingMatrix(*(factor * g for g in self.as_array()))

    def mirrored(self) -> "CouplingMatrix":
        """Swap right and left rates in both waveguides."""
        return CouplingMatrix(self.gamma_al, self.gamma_ar, self.gamma_bl, self.gamma_br)


@dataclass(frozen=True)
class EmitterParams:
    """Cascade level frequencies; the ground level sits at zero."""

    omega_2: float
    omega_3: float

    def __post_init__(self):
        if not (self.omega_3 > self.omega_2 > 0):
            raise ValidationError(
                "cascade ordering requires omega_3 > omega_2 > 0",
                key="omega_3" if self.omega_2 > 0 else "omega_2",
            )

    @property
    def omega_32(self) -> float:
        return self.omega_3 - self.omega_2


def _check_photon_number(n) -> int:
    if isinstance(n, bool):
        raise ValidationError("photon number must be a non-negative integer", key="n")
    if isinstance(n, float):
        if not n.is_integer():
            raise ValidationError("photon number must be a non-negative integer", key="n")
        n = int(n)
    if not isinstance(n, int):
        try:
            n = int(n)
        except (TypeError, ValueError):
            raise ValidationError("photon number must be a non-negative integer", key="n")
    if n < 0:
        raise ValidationError("photon number must be a non-negative integer", key="n")
    return n


@dataclass(frozen=True)
class CavityParams:
    """Extra cavity: frequency, drive strength on |2> <-> |3>, Fock number.

    ``omega_a`` may be ``None`` when the system is given directly by
    detunings.
    """

    lam: float
    n: int
    omega_a: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "n", _check_photon_number(self.n))
        lam = float(self.lam)
        if not math.isfinite(lam) or lam < 0:
            raise ValidationError("drive strength must be finite and non-negative", key="lambda")
        object.__setattr__(self, "lam", lam)
        if self.omega_a is not None and not self.omega_a > 0:
            raise ValidationError("cavity frequency must be positive", key="omega_a")

    @property
    def effective_coupling(self) -> float:
        """sqrt(n) * lambda, the |2,n> <-> |3,n-1> matrix element."""
        return math.sqrt(self.n) * self.lam

    @property
    def n_lambda_sq(self) -> float:
        return self.n * self.lam * self.lam


@dataclass(frozen=True)
class ScatterPoint:
    """Incident-photon bookkeeping in the detuning frame.

    ``delta_k_n`` is the photon eigenfrequency E_k - n*omega_a (equal to k),
    ``Delta_k_n`` its detuning from omega_2, and ``Delta_a`` the
    cavity-transition detuning omega_a - omega_32. ``delta_k_n`` is NaN when
    the point was built from detunings alone.
    """

    Delta_k_n: float
    Delta_a: float
    delta_k_n: float = math.nan

    @classmethod
    def from_frequencies(
        cls, energy: float, emitter: EmitterParams, cavity: CavityParams
    ) -> "ScatterPoint":
        if cavity.omega_a is None:
            raise ValidationError("absolute construction needs omega_a", key="omega_a")
        delta = energy - cavity.n * cavity.omega_a
        return cls(
            Delta_k_n=delta - emitter.omega_2,
            Delta_a=cavity.omega_a - emitter.omega_32,
            delta_k_n=delta,
        )

    def to_frequencies(self, omega_2: float, omega_a: float, n: int):
        """Invert the detuning map given omega_2, omega_a and n.

        Returns ``(omega_2, omega_3, omega_a, energy)``.
        """
        omega_3 = omega_2 + omega_a - self.Delta_a
        energy = self.Delta_k_n + omega_2 + n * omega_a
        return omega_2, omega_3, omega_a, energy


@dataclass(frozen=True)
class ValidatedSystem:
    """Everything needed to evaluate scattering at a given photon detuning.

    ``emitter`` is ``None`` for detuning-style input, where only ``delta_a``
    is known.
    """

    couplings: CouplingMatrix
    cavity: CavityParams
    delta_a: float
    emitter: EmitterParams | None = None

    @property
    def gamma(self) -> float:
        return self.couplings.gamma

    def point(self, delta_k: float) -> ScatterPoint:
        delta = math.nan if self.emitter is None else delta_k + self.emitter.omega_2
        return ScatterPoint(Delta_k_n=delta_k, Delta_a=self.delta_a, delta_k_n=delta)

    def with_(self, **changes) -> "ValidatedSystem":
        """Copy with ``delta_a``, ``lam`` or ``n`` replaced (detuning frame)."""
        cavity = self.cavity
        cav_changes = {k: changes.pop(k) for k in ("lam", "n") if k in changes}
        if cav_changes:
            cavity = replace(cavity, **cav_changes)
        emitter = self.emitter
        if "delta_a" in changes:
            emitter = None
        return replace(self, cavity=cavity, emitter=emitter, **changes)

    def in_gamma_units(self) -> "ValidatedSystem":
        """Rescale every frequency by the total coupling so that gamma = 1."""
        g = self.gamma
        emitter = None
        if self.emitter is not None:
            emitter = EmitterParams(self.emitter.omega_2 / g, self.emitter.omega_3 / g)
        omega_a = None if self.cavity.omega_a is None else self.cavity.omega_a / g
        return ValidatedSystem(
            couplings=self.couplings.scaled(1.0 / g),
            cavity=CavityParams(lam=self.cavity.lam / g, n=self.cavity.n, omega_a=omega_a),
            delta_a=self.delta_a / g,
            emitter=emitter,
        )

    def as_dict(self) -> dict:
        d = {
            "gamma_ar": self.couplings.gamma_ar,
            "gamma_al": self.couplings.gamma_al,
            "gamma_br": self.couplings.gamma_br,
            "gamma_bl": self.couplings.gamma_bl,
            "lambda": self.cavity.lam,
            "n": self.cavity.n,
            "Delta_a": self.delta_a,
        }
        if self.emitter is not None:
            d.update(omega_2=self.emitter.omega_2, omega_3=self.emitter.omega_3)
        if self.cavity.omega_a is not None:
            d["omega_a"] = self.cavity.omega_a
        return d


def validate_system(
    couplings: CouplingMatrix,
    emitter: EmitterParams | None,
    cavity: CavityParams,
    delta_a: float | None = None,
) -> ValidatedSystem:
    """Bundle the parameter containers and check the regime of validity.

    Hard constraints are enforced by the containers themselves. Here we only
    derive the cavity detuning and warn (``RegimeWarning``) when
    sqrt(n)*lambda or |Delta_a| are not small against the bare frequencies.
    """
    if emitter is not None and cavity.omega_a is not None:
        derived = cavity.omega_a - emitter.omega_32
        if delta_a is not None and not math.isclose(delta_a, derived, rel_tol=1e-12, abs_tol=1e-12):
            raise ValidationError(
                f"Delta_a={delta_a} disagrees with omega_a - omega_32 = {derived}", key="Delta_a"
            )
        delta_a = derived
        ceiling = REGIME_FACTOR * min(cavity.omega_a, emitter.omega_32)
        if cavity.effective_coupling >= ceiling:
            warnings.warn(
                f"sqrt(n)*lambda = {cavity.effective_coupling:g} is not small against "
                f"min(omega_a, omega_32) = {ceiling / REGIME_FACTOR:g}",
                RegimeWarning,
                stacklevel=2,
            )
        if abs(delta_a) >= REGIME_FACTOR * (cavity.omega_a + emitter.omega_32):
            warnings.warn(
                f"|Delta_a| = {abs(delta_a):g} is not small against omega_a + omega_32",
                RegimeWarning,
                stacklevel=2,
            )
    elif delta_a is None:
        raise ValidationError(
            "need either Delta_a or all of omega_2, omega_3, omega_a", key="Delta_a"
        )
    delta_a = float(delta_a)
    if not math.isfinite(delta_a):
        raise ValidationError("detuning must be finite", key="Delta_a")
    return ValidatedSystem(couplings=couplings, cavity=cavity, delta_a=delta_a, emitter=emitter)


# --- config files -----------------------------------------------------------

CONFIG_KEYS = (
    "gamma_ar", "gamma_al", "gamma_br", "gamma_bl",
    "omega_2", "omega_3", "omega_a", "lambda", "n", "Delta_a",
)

# Fig. 2 coupling set: gamma_pg = 0.5, gamma_p gbar = 0.3, others 0.1 (units of gamma)
FIG2_COUPLINGS = {"gamma_ar": 0.5, "gamma_al": 0.3, "gamma_br": 0.1, "gamma_bl": 0.1}

DEFAULTS = {**FIG2_COUPLINGS, "lambda": 1.0, "n": 1, "Delta_a": 0.0}


def _parse_value(key: str, raw: str):
    raw = raw.strip()
    if key == "n":
        try:
            return int(raw)
        except ValueError:
            try:
                value = float(raw)
            except ValueError:
                raise ValidationError(f"cannot parse {raw!r}", key=key)
            if not value.is_integer():
                raise ValidationError("photon number must be a non-negative integer", key=key)
            return int(value)
    try:
        return float(raw)
    except ValueError:
        raise ValidationError(f"cannot parse {raw!r} as a number", key=key)


def parse_assignment(text: str) -> tuple[str, object]:
    """Parse one ``key = value`` item; unknown keys are rejected."""
    if "=" not in text:
        raise ValidationError(f"expected key=value, got {text!r}")
    key, raw = text.split("=", 1)
    key = key.strip()
    if key not in CONFIG_KEYS:
        raise ValidationError(f"unknown parameter (allowed: {', '.join(CONFIG_KEYS)})", key=key)
    return key, _parse_value(key, raw)


def parse_config(text: str) -> dict:
    """Parse the flat ``key = value`` format; ``#`` starts a comment."""
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            key, value = parse_assignment(line)
        except ValidationError as exc:
            raise ValidationError(f"line {lineno}: {exc}", key=exc.key) from None
        values[key] = value
    return values


def load_config(path: str | Path) -> dict:
    return parse_config(Path(path).read_text())


def system_from_mapping(values: dict, defaults: dict | None = DEFAULTS) -> ValidatedSystem:
    """Build a validated system from config-style keys.

    Absolute frequencies win when all three of omega_2, omega_3, omega_a are
    present; otherwise ``Delta_a`` is used directly. Missing keys fall back to
    ``defaults`` (the Fig. 2 parameter set).
    """
    merged = dict(defaults or {})
    absolute = {"omega_2", "omega_3", "omega_a"}
    given = absolute & values.keys()
    if given and given != absolute:
        missing = sorted(absolute - given)
        raise ValidationError("absolute frequencies must be given together", key=missing[0])
    if given and "Delta_a" not in values:
        merged.pop("Delta_a", None)
    merged.update(values)

    for key in ("gamma_ar", "gamma_al", "gamma_br", "gamma_bl", "lambda", "n"):
        if key not in merged:
            raise ValidationError("missing required parameter", key=key)
    couplings = CouplingMatrix(
        merged["gamma_ar"], merged["gamma_al"], merged["gamma_br"], merged["gamma_bl"]
    )
    emitter = None
    omega_a = None
    if given:
        emitter = EmitterParams(merged["omega_2"], merged["omega_3"])
        omega_a = merged["omega_a"]
    cavity = CavityParams(lam=merged["lambda"], n=merged["n"], omega_a=omega_a)
    return validate_system(couplings, emitter, cavity, merged.get("Delta_a"))
