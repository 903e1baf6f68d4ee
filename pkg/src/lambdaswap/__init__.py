"""Single-photon scattering off a lambda system and the gates it implements."""

from .adiabatic import (CavityEstimate, GateMatrix, estimate_cavity, reflection_map,
                        sqrt_swap_gate, swap_gate)
from .composer import (ProtocolReport, QubitRegisterState, apply_gate, partial_trace,
                       run_protocol, state_fidelity)
from .errors import ConfigurationError, IntegrationError, InvariantViolation
from .fidelity import (FidelityPoint, avg_fidelity_sqrt_swap, avg_fidelity_swap,
                       sweep_fidelity)
from .pulse import Grid, PulseSpec, default_grid, envelope_norm, make_gaussian
from .scatter import (AtomParams, CoherenceTrace, ScatteringResult, integrate_coherence,
                      overlap, scatter_pulse)

__version__ = "0.1.0"
