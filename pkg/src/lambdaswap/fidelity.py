"""
Average gate fidelities of the finite-pulse atom-photon gates and the
``(l, Gamma_V/Gamma_H)`` sweeps behind the fidelity landscapes.

Both fidelities compare the scattered wavepackets against the freely
propagated input ``g1``. In the rotating frame ``g1`` already carries the
right phase, so the overlaps are used as they are.
"""
from __future__ import annotations

import csv
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .adiabatic import GateMatrix
from .errors import ConfigurationError, InvariantViolation
from .pulse import PulseSpec, default_grid, make_gaussian
from .scatter import AtomParams, ScatteringResult, overlap, scatter_pulse

__all__ = [
    "GATES",
    "FidelityPoint",
    "avg_fidelity_swap",
    "avg_fidelity_sqrt_swap",
    "gate_detuning",
    "scatter_gaussian",
    "fidelity_at",
    "numeric_gate_matrix",
    "sweep_fidelity",
    "write_sweep_csv",
    "DEFAULT_LENGTHS",
    "DEFAULT_RATIOS",
]

log = logging.getLogger(__name__)

GATES = ("swap", "sqrt_swap")
DEFAULT_LENGTHS = tuple(np.linspace(2.0, 40.0, 20))
DEFAULT_RATIOS = tuple(np.round(np.linspace(0.1, 2.0, 20), 12))


@dataclass(frozen=True)
class FidelityPoint:
    """One sweep point. The fidelity of the gate not evaluated is NaN."""

    pulse_length: float
    gamma_ratio: float
    detuning: float
    f_swap: float = math.nan
    f_sqrt_swap: float = math.nan
    error: str | None = None

    @property
    def fidelity(self) -> float:
        return self.f_sqrt_swap if math.isnan(self.f_swap) else self.f_swap

    @property
    def ok(self) -> bool:
        return self.error is None


def avg_fidelity_swap(res: ScatteringResult) -> float:
    """``(1 + |1 + <g2|g1>|**2) / 5``; meant for resonant (``omega = 0``) runs."""
    amp = 1.0 + overlap(res.g2, res.g1, res.dx)
    return (1.0 + abs(amp) ** 2) / 5.0


def avg_fidelity_sqrt_swap(res: ScatteringResult) -> float:
    """Average fidelity to sqrt(SWAP); meant for runs at ``omega = -Gamma_H``.

    The target's phases correspond to that branch, so runs at
    ``omega = +Gamma_H`` do not reach 1 with this formula.
    """
    mix = (overlap(res.g3, res.g1, res.dx) + overlap(res.g4, res.g1, res.dx)
           - 2j * overlap(res.g2, res.g1, res.dx))
    amp = 1.0 + 0.25 * (1 + 1j) * mix
    return (1.0 + abs(amp) ** 2) / 5.0


def gate_detuning(gate: str, atom: AtomParams) -> float:
    """Operating detuning of ``gate``: 0 for SWAP, ``-Gamma_H`` for sqrt(SWAP)."""
    if gate == "swap":
        return 0.0
    if gate == "sqrt_swap":
        return -atom.gamma_h
    raise ConfigurationError(f"unknown gate {gate!r}; expected one of {GATES}")


def scatter_gaussian(length: float, atom: AtomParams, omega: float, center: float = 0.0,
                     points_per_scale: int | None = None) -> ScatteringResult:
    """Scatter a Gaussian pulse on its default grid."""
    spec = PulseSpec(length, omega, center)
    kw = {} if points_per_scale is None else {"points_per_scale": points_per_scale}
    grid = default_grid(spec, atom.gamma_bar, **kw)
    return scatter_pulse(make_gaussian(spec, grid), atom, grid)


def fidelity_at(length: float, ratio: float, gate: str, **kw) -> float:
    """Average fidelity of ``gate`` for a Gaussian of length ``length``, ``Gamma_H = 1``."""
    atom = AtomParams.from_ratio(ratio)
    res = scatter_gaussian(length, atom, gate_detuning(gate, atom), **kw)
    return avg_fidelity_swap(res) if gate == "swap" else avg_fidelity_sqrt_swap(res)


def numeric_gate_matrix(res: ScatteringResult) -> GateMatrix:
    """Finite-pulse gate read off by projecting the outputs onto ``g1``.

    Not unitary in general: weight outside the ``g1`` mode is dropped.
    """
    m = np.eye(4, dtype=complex)
    m[1, 1] = overlap(res.g1, res.g3, res.dx)
    m[2, 2] = overlap(res.g1, res.g4, res.dx)
    m[1, 2] = m[2, 1] = -overlap(res.g1, res.g2, res.dx)
    return GateMatrix(m)


def _evaluate(args) -> FidelityPoint:
    length, ratio, gate, pps = args
    atom = AtomParams(1.0, ratio)
    omega = gate_detuning(gate, atom)
    try:
        res = scatter_gaussian(length, atom, omega, points_per_scale=pps)
    except (ConfigurationError, InvariantViolation) as exc:
        log.warning("sweep point l=%g ratio=%g failed: %s", length, ratio, exc)
        return FidelityPoint(length, ratio, omega, error=str(exc))
    if gate == "swap":
        return FidelityPoint(length, ratio, omega, f_swap=avg_fidelity_swap(res))
    return FidelityPoint(length, ratio, omega, f_sqrt_swap=avg_fidelity_sqrt_swap(res))


def sweep_fidelity(lengths=DEFAULT_LENGTHS, ratios=DEFAULT_RATIOS, gate: str = "swap",
                   workers: int = 1, points_per_scale: int | None = None) -> list[FidelityPoint]:
    """Evaluate ``gate``'s average fidelity on the ``lengths x ratios`` grid.

    ``Gamma_H = 1`` throughout and ``ratio = Gamma_V / Gamma_H``. Failed points
    are kept with their error message. The result is sorted by
    ``(length, ratio)`` regardless of ``workers``.
    """
    if gate not in GATES:
        raise ConfigurationError(f"unknown gate {gate!r}; expected one of {GATES}")
    lengths = [float(v) for v in lengths]
    ratios = [float(v) for v in ratios]
    if not lengths or not ratios or min(lengths) <= 0 or min(ratios) <= 0:
        raise ConfigurationError("sweep lengths and ratios must be non-empty and positive")
    tasks = sorted({(l, r) for l in lengths for r in ratios})
    tasks = [(l, r, gate, points_per_scale) for l, r in tasks]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            points = list(pool.map(_evaluate, tasks, chunksize=max(1, len(tasks) // (4 * workers))))
    else:
        points = [_evaluate(t) for t in tasks]
    return points


def write_sweep_csv(points, path, params: dict | None = None):
    """Long-form CSV ``l_over_gamma, gamma_ratio, fidelity``."""
    with open(path, "w", newline="") as fh:
        if params:
            fh.write("# " + " ".join(f"{k}={v}" for k, v in params.items()) + "\n")
        writer = csv.writer(fh)
        writer.writerow(["l_over_gamma", "gamma_ratio", "fidelity"])
        for p in points:
            writer.writerow([repr(p.pulse_length), repr(p.gamma_ratio),
                             "nan" if not p.ok else f"{p.fidelity:.12f}"])
