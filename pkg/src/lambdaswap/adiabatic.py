"""
Long-pulse reflection map, the named atom-photon gates, and the cavity-QED
loss estimate.

Basis order for every 4x4 matrix is ``|H,0>, |H,1>, |V,0>, |V,1>``, i.e. the
photon polarization (H=0, V=1) tensored with the atomic ground state.
Columns are inputs, rows are outputs.
"""
from __future__ import annotations

import json
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError
from .scatter import AtomParams

__all__ = [
    "BASIS_LABELS",
    "GateMatrix",
    "reflection_map",
    "swap_gate",
    "sqrt_swap_gate",
    "CavityEstimate",
    "estimate_cavity",
    "SPIN_COHERENCE_NOTE",
]

BASIS_LABELS = ("H,0", "H,1", "V,0", "V,1")

SPIN_COHERENCE_NOTE = (
    "photon time intervals must stay below the homogeneous spin-coherence time "
    "(order of microseconds)")


@dataclass(frozen=True)
class GateMatrix:
    """A 4x4 operator on the photon-atom basis ``BASIS_LABELS``."""

    entries: np.ndarray

    def __post_init__(self):
        m = np.array(self.entries, dtype=complex)
        if m.shape != (4, 4):
            raise ConfigurationError(f"gate must be 4x4, got {m.shape}")
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)

    def __matmul__(self, other):
        if isinstance(other, GateMatrix):
            return GateMatrix(self.entries @ other.entries)
        return self.entries @ other

    def __array__(self, dtype=None, copy=None):
        return self.entries if dtype is None else self.entries.astype(dtype)

    @property
    def block(self) -> np.ndarray:
        """The ``{|H,1>, |V,0>}`` mixing block."""
        return self.entries[1:3, 1:3]

    def unitarity_error(self) -> float:
        m = self.entries
        return float(np.max(np.abs(m.conj().T @ m - np.eye(4))))

    def to_json(self) -> str:
        """Row-major ``[re, im]`` pairs plus the basis order."""
        rows = [[[float(z.real), float(z.imag)] for z in row] for row in self.entries]
        return json.dumps({"basis": list(BASIS_LABELS), "entries": rows})

    @classmethod
    def from_json(cls, text: str) -> "GateMatrix":
        data = json.loads(text)
        if tuple(data.get("basis", BASIS_LABELS)) != BASIS_LABELS:
            raise ConfigurationError(f"unexpected basis order {data['basis']}")
        return cls(np.array([[complex(re, im) for re, im in row] for row in data["entries"]]))


def reflection_map(atom: AtomParams, omega: float) -> GateMatrix:
    """Adiabatic (long-pulse) action of one reflection at detuning ``omega``.

    ``|H,0>`` and ``|V,1>`` pass unchanged; ``|H,1>`` and ``|V,0>`` mix with
    amplitudes set by the two decay rates.
    """
    gh, gv = atom.gamma_h, atom.gamma_v
    den = gh + gv - 2j * omega
    off = -2.0 * np.sqrt(gh * gv) / den
    m = np.eye(4, dtype=complex)
    m[1, 1] = (gv - gh - 2j * omega) / den
    m[2, 2] = (gh - gv - 2j * omega) / den
    m[1, 2] = m[2, 1] = off
    return GateMatrix(m)


def _warn_if_unbalanced(atom: AtomParams, name: str, tol: float = 0.05):
    if abs(atom.gamma_h / atom.gamma_v - 1.0) > tol:
        warnings.warn(f"{name} semantics assume Gamma_H ~ Gamma_V; got ratio "
                      f"{atom.gamma_v / atom.gamma_h:.3g}", stacklevel=3)


def swap_gate(atom: AtomParams = AtomParams()) -> GateMatrix:
    """Resonant reflection (``omega = 0``): atom-photon SWAP for equal rates."""
    _warn_if_unbalanced(atom, "SWAP")
    return reflection_map(atom, 0.0)


def sqrt_swap_gate(atom: AtomParams = AtomParams(), sign: int = 1) -> GateMatrix:
    """Reflection detuned by one linewidth: atom-photon sqrt(SWAP).

    ``sign=+1`` selects ``omega = -Gamma_H``, ``sign=-1`` selects
    ``omega = +Gamma_H`` (the adjoint gate).
    """
    if sign not in (1, -1):
        raise ConfigurationError(f"sign must be +1 or -1, got {sign}")
    _warn_if_unbalanced(atom, "sqrt(SWAP)")
    return reflection_map(atom, -sign * atom.gamma_h)


@dataclass(frozen=True)
class CavityEstimate:
    g: float
    gamma: float
    kappa: float
    gamma_eff: float
    loss_per_gate: float

    @property
    def three_gate_survival(self) -> float:
        """Probability that no photon is lost over the three reflections."""
        return (1.0 - self.loss_per_gate) ** 3


def estimate_cavity(g: float, gamma: float, kappa: float) -> CavityEstimate:
    """Bad-cavity decay rate ``g**2 / kappa`` and loss ``gamma / (Gamma + gamma)``.

    Inputs are angular frequencies in any common unit.
    """
    if g <= 0 or kappa <= 0 or gamma < 0:
        raise ConfigurationError(f"need g, kappa > 0 and gamma >= 0, got {(g, gamma, kappa)}")
    gamma_eff = g * g / kappa
    return CavityEstimate(g, gamma, kappa, gamma_eff, gamma / (gamma_eff + gamma))
