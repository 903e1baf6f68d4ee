"""
Scattering of one photon off a lambda system in reflection geometry.

The atom's response is a single complex coherence ``s(tau)`` obeying

    ds/dtau = -gamma_bar * s + f(-tau),    gamma_bar = (Gamma_H + Gamma_V) / 2,

in the rotating frame. The output wavepackets follow from the input-output
relation and are stored as functions of the retarded coordinate
``x = t - r``:

    g1(x) = f(-x)
    g2(x) = sqrt(Gamma_H Gamma_V) s(x)
    g3(x) = f(-x) - Gamma_H s(x)
    g4(x) = f(-x) - Gamma_V s(x)

``g3`` belongs to the ``|H,1>`` input, ``g4`` to ``|V,0>``; both share ``g2``
as their polarization-flipped component.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.integrate import trapezoid
from scipy.signal import lfilter

from .errors import ConfigurationError, IntegrationError, InvariantViolation
from .pulse import Grid

__all__ = [
    "AtomParams",
    "CoherenceTrace",
    "ScatteringResult",
    "integrate_coherence",
    "scatter_pulse",
    "overlap",
    "write_scattering_csv",
]

#: Relative size of ``|s(t_final)|`` below which the atom counts as de-excited.
EPSILON_DEEXCITE = 1e-6
#: Largest drive sample tolerated at the start of the integration.
TAIL_TOL = 1e-12
SUM_RULE_TOL = 1e-6
G1_NORM_TOL = 1e-8

# interpolation stencils (node offsets in steps, relative to the left end of the step)
_STENCILS = {
    "linear": {"first": (0, 1), "interior": (0, 1), "last": (0, 1)},
    "cubic": {"first": (0, 1, 2, 3), "interior": (-1, 0, 1, 2), "last": (-2, -1, 0, 1)},
}


@dataclass(frozen=True)
class AtomParams:
    """Radiative decay rates of the two lambda-system transitions.

    ``gamma_h`` couples ``|1> <-> |2>`` to H photons, ``gamma_v`` couples
    ``|0> <-> |2>`` to V photons. The transition frequency is absorbed in the
    rotating frame.
    """

    gamma_h: float = 1.0
    gamma_v: float = 1.0

    def __post_init__(self):
        for name in ("gamma_h", "gamma_v"):
            val = getattr(self, name)
            if not np.isfinite(val) or val <= 0:
                raise ConfigurationError(f"{name} must be positive, got {val}")

    @classmethod
    def from_ratio(cls, ratio: float) -> "AtomParams":
        """Atom with ``Gamma_H = 1`` and ``Gamma_V = ratio``."""
        return cls(1.0, ratio)

    @property
    def gamma_bar(self) -> float:
        return 0.5 * (self.gamma_h + self.gamma_v)

    @property
    def ratio(self) -> float:
        return self.gamma_v / self.gamma_h

    def swapped(self) -> "AtomParams":
        return AtomParams(self.gamma_v, self.gamma_h)


@dataclass(frozen=True)
class CoherenceTrace:
    times: np.ndarray
    s_values: np.ndarray


@dataclass(frozen=True)
class ScatteringResult:
    """Output wavepackets sampled on the retarded coordinate ``x``.

    ``p_transition`` is the weight of ``g2``; ``p_no_transition`` and
    ``p_no_transition_v`` are the weights of ``g3`` and ``g4``.
    """

    x: np.ndarray
    dx: float
    g1: np.ndarray
    g2: np.ndarray
    g3: np.ndarray
    g4: np.ndarray
    p_transition: float
    p_no_transition: float
    p_no_transition_v: float
    atom: AtomParams
    t_final: float
    trace: CoherenceTrace = field(repr=False)

    @property
    def r(self) -> np.ndarray:
        """Physical output positions ``r = t_final - x``."""
        return self.t_final - self.x

    @property
    def g1_norm(self) -> float:
        return float(trapezoid(np.abs(self.g1) ** 2, dx=self.dx))


@lru_cache(maxsize=256)
def _step_weights(decay: float, h: float, offsets: tuple) -> np.ndarray:
    """Weights ``w_k`` with ``int_0^h exp(-decay (h-u)) p(u) du = sum_k w_k p(offsets[k] h)``.

    Exact for polynomials ``p`` through the stencil nodes.
    """
    x, w = np.polynomial.legendre.leggauss(24)
    u = 0.5 * h * (x + 1.0)
    w = 0.5 * h * w * np.exp(-decay * (h - u))
    nodes = np.asarray(offsets, dtype=float) * h
    out = np.empty(len(nodes))
    for k, node in enumerate(nodes):
        lagrange = np.ones_like(u)
        for j, other in enumerate(nodes):
            if j != k:
                lagrange *= (u - other) / (node - other)
        out[k] = np.sum(w * lagrange)
    return out


def _drive_increments(drive: np.ndarray, decay: float, h: float, method: str) -> np.ndarray:
    """Forcing term added in each step of the exponential recurrence."""
    try:
        stencil = _STENCILS[method]
    except KeyError:
        raise ConfigurationError(f"unknown integration method {method!r}") from None
    n = drive.size
    width = len(stencil["interior"])
    if n < width + 1:
        raise ConfigurationError(f"need more than {width} samples for the {method} integrator")
    inc = np.zeros(n, dtype=complex)
    lo = -min(stencil["interior"])
    hi = max(stencil["interior"])
    # steps n -> n+1 for n in [lo, n-1-hi]
    w = _step_weights(decay, h, stencil["interior"])
    steps = np.arange(lo, n - hi)
    for wk, off in zip(w, stencil["interior"]):
        inc[steps + 1] += wk * drive[steps + off]
    for edge, idx in (("first", range(0, lo)), ("last", range(n - hi, n - 1))):
        w = _step_weights(decay, h, stencil[edge])
        for step in idx:
            inc[step + 1] = sum(wk * drive[step + off] for wk, off in zip(w, stencil[edge]))
    return inc


def integrate_coherence(f, atom: AtomParams, grid: Grid, method: str = "cubic",
                        epsilon: float = EPSILON_DEEXCITE) -> CoherenceTrace:
    """Integrate the driven coherence from rest up to ``grid.t_final``.

    Each step is propagated exactly through the decay and integrates the
    drive interpolated by a polynomial (``"linear"``: the two step ends,
    ``"cubic"``: four neighbouring samples). The linear scheme is exact for
    piecewise-linear drive; the cubic one is fourth-order accurate for smooth
    envelopes.

    Parameters
    ----------
    f : array_like
        Input envelope sampled on ``grid.r``.
    atom : AtomParams
    grid : Grid
    method : {"cubic", "linear"}
    epsilon : float
        De-excitation threshold relative to ``max |s|``.

    Returns
    -------
    CoherenceTrace
        ``s`` on ``tau = -r`` for all grid points with ``tau <= t_final``.

    Raises
    ------
    ConfigurationError
        If the pulse already overlaps the atom at the start time, or the grid
        does not resolve the decay time.
    IntegrationError
        If the atom is still excited at ``t_final``.
    """
    f = np.asarray(f, dtype=complex)
    if f.shape != (grid.n_points,):
        raise ConfigurationError(f"envelope has {f.size} samples, grid has {grid.n_points}")
    decay = atom.gamma_bar
    h = grid.dr
    if decay * h > 0.25:
        raise ConfigurationError(
            f"grid spacing {h:.3g} does not resolve the decay time {1 / decay:.3g}")

    tau = -grid.r[::-1]
    drive = f[::-1]
    keep = tau <= grid.t_final + 1e-9 * max(1.0, abs(grid.t_final))
    tau, drive = tau[keep], drive[keep]
    if abs(drive[0]) >= TAIL_TOL:
        raise ConfigurationError(
            f"pulse has amplitude {abs(drive[0]):.2e} at the integration start tau={tau[0]:.3g}; "
            "widen the grid on the input side")

    inc = _drive_increments(drive, decay, h, method)
    s = lfilter([1.0], [1.0, -np.exp(-decay * h)], inc)

    peak = np.max(np.abs(s))
    if abs(s[-1]) >= epsilon * peak:
        raise IntegrationError(
            f"atom not de-excited at t_final={tau[-1]:.3g}: |s|={abs(s[-1]):.2e}, "
            f"max|s|={peak:.2e}; extend t_final")
    return CoherenceTrace(tau, s)


def scatter_pulse(f, atom: AtomParams, grid: Grid, method: str = "cubic",
                  epsilon: float = EPSILON_DEEXCITE, check: bool = True) -> ScatteringResult:
    """Output wavepackets and transition probabilities for input envelope ``f``.

    With ``check`` the normalization of ``g1`` and both sector sum rules are
    verified and :class:`InvariantViolation` is raised on failure.
    """
    trace = integrate_coherence(f, atom, grid, method=method, epsilon=epsilon)
    s = trace.s_values
    g1 = np.asarray(f, dtype=complex)[::-1][: s.size].copy()
    g2 = np.sqrt(atom.gamma_h * atom.gamma_v) * s
    g3 = g1 - atom.gamma_h * s
    g4 = g1 - atom.gamma_v * s

    def weight(g):
        return float(trapezoid(np.abs(g) ** 2, dx=grid.dr))

    res = ScatteringResult(
        x=trace.times, dx=grid.dr, g1=g1, g2=g2, g3=g3, g4=g4,
        p_transition=weight(g2), p_no_transition=weight(g3), p_no_transition_v=weight(g4),
        atom=atom, t_final=float(trace.times[-1]), trace=trace,
    )
    if check:
        _check_invariants(res)
    return res


def _check_invariants(res: ScatteringResult):
    if abs(res.g1_norm - 1.0) > G1_NORM_TOL:
        raise InvariantViolation(f"|g1|^2 integrates to {res.g1_norm:.10f}, expected 1")
    for label, p_other in (("g3", res.p_no_transition), ("g4", res.p_no_transition_v)):
        total = res.p_transition + p_other
        if abs(total - 1.0) > SUM_RULE_TOL:
            raise InvariantViolation(f"sum rule broken: P(g2) + P({label}) = {total:.10f}")


def overlap(a, b, grid) -> complex:
    """Trapezoidal inner product ``int conj(a) b dx``.

    ``grid`` is a :class:`Grid` or the sample spacing.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ConfigurationError(f"wavepacket shapes differ: {a.shape} vs {b.shape}")
    dx = grid.dr if isinstance(grid, Grid) else float(grid)
    return complex(trapezoid(np.conj(a) * b, dx=dx))


def write_scattering_csv(res: ScatteringResult, path, params: dict | None = None):
    """Write the wavepackets as CSV, one row per retarded coordinate ``x``.

    The first line is a ``#`` comment carrying ``params``.
    """
    names = ("g1", "g2", "g3", "g4")
    header = ["x"]
    header += [f"{p}_{g}" for g in names for p in ("re", "im")]
    header += [f"abs_{g}" for g in names] + [f"arg_{g}" for g in names]
    waves = [getattr(res, g) for g in names]
    cols = [res.x]
    for g in waves:
        cols += [g.real, g.imag]
    cols += [np.abs(g) for g in waves] + [np.angle(g) for g in waves]
    table = np.column_stack(cols)
    with open(path, "w", newline="") as fh:
        meta = dict(params or {})
        meta.update(gamma_h=res.atom.gamma_h, gamma_v=res.atom.gamma_v,
                    P=round(res.p_transition, 12), P_prime=round(res.p_no_transition, 12))
        fh.write("# " + " ".join(f"{k}={v}" for k, v in meta.items()) + "\n")
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in table:
            writer.writerow([f"{v:.12e}" for v in row])
