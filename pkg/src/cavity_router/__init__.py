"""Single-photon routing between two chiral waveguides via a cavity-driven cascade emitter."""

__version__ = "0.1.0"

from .model import (  # noqa: E402
    CavityParams,
    CouplingMatrix,
    EmitterParams,
    Port,
    RegimeWarning,
    ScatterPoint,
    ValidatedSystem,
    ValidationError,
    validate_system,
)
from .modes import FourPortResult, build_parity_basis, decompose_input, reconstruct_four_port  # noqa: E402
from .scattering import (  # noqa: E402
    effective_potential,
    emitter_amplitudes,
    even_transmission,
    four_port,
    scattering_factor,
    special_points,
    u_factor,
)
from .dressed import dressed_pair, extract_valley_widths, large_detuning_approx, rabi_splitting  # noqa: E402
