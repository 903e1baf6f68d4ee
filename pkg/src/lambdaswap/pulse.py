"""
Single-photon input envelopes and the uniform grids they are sampled on.

All envelopes live in the frame rotating at the atomic transition frequency,
so only the detuning ``omega`` appears in the carrier phase. Units are fixed
by ``Gamma_H = 1`` and ``c = 1``: lengths and times are in ``1/Gamma_H``.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.integrate import trapezoid

from .errors import ConfigurationError

__all__ = [
    "PulseSpec",
    "Grid",
    "default_grid",
    "make_gaussian",
    "make_envelope",
    "envelope_norm",
    "load_envelope_csv",
]

#: Maximum tolerated loss of norm when the window truncates the pulse.
WINDOW_DEFICIT_TOL = 1e-8
#: Default number of samples per resolved length scale.
POINTS_PER_SCALE = 64


@dataclass(frozen=True)
class PulseSpec:
    """Input photon envelope parameters.

    Parameters
    ----------
    length : float
        Pulse length ``l``; the Gaussian is ``exp(-(r - r0)**2 / l**2)``.
    detuning : float
        Carrier detuning ``omega`` from the atomic transition.
    center : float
        Envelope center ``r0`` at ``t = 0``. Negative values sit on the input
        side, ``r0 = 0`` means the peak reaches the atom at ``t = 0``.
    shape : {"gaussian", "custom"}
        ``"custom"`` marks envelopes loaded from samples.
    """

    length: float
    detuning: float = 0.0
    center: float = 0.0
    shape: str = "gaussian"

    def __post_init__(self):
        if not np.isfinite(self.length) or self.length <= 0:
            raise ConfigurationError(f"pulse length must be positive, got {self.length}")
        if self.shape not in ("gaussian", "custom"):
            raise ConfigurationError(f"unknown envelope shape {self.shape!r}")


@dataclass(frozen=True)
class Grid:
    """Uniform spatial grid ``r_min .. r_max`` plus the evolution end time.

    The coherence is integrated on ``tau = -r``, so the window must reach down
    to ``r = -t_final``.
    """

    r_min: float
    r_max: float
    n_points: int
    t_final: float

    def __post_init__(self):
        if self.n_points < 2 or self.r_max <= self.r_min:
            raise ConfigurationError(
                f"invalid grid [{self.r_min}, {self.r_max}] with {self.n_points} points")
        if self.r_min > -self.t_final + 0.5 * self.dr:
            raise ConfigurationError(
                f"grid starts at r={self.r_min} but t_final={self.t_final} "
                f"needs samples down to r={-self.t_final}")

    @property
    def dr(self) -> float:
        return (self.r_max - self.r_min) / (self.n_points - 1)

    @property
    def r(self) -> np.ndarray:
        return np.linspace(self.r_min, self.r_max, self.n_points)

    def refined(self, factor: int = 2) -> "Grid":
        """Same window with the spacing divided by ``factor``."""
        return Grid(self.r_min, self.r_max, factor * (self.n_points - 1) + 1, self.t_final)


def default_grid(spec: PulseSpec, gamma_bar: float = 1.0,
                 points_per_scale: int = POINTS_PER_SCALE) -> Grid:
    """Grid that holds the whole pulse and the atom's full decay afterwards.

    ``gamma_bar`` is the coherence decay rate ``(Gamma_H + Gamma_V) / 2``.
    The evolution runs until ``6 l + 20 / gamma_bar`` after the pulse peak
    reaches the atom.
    """
    l = spec.length
    t_final = -spec.center + 6.0 * l + 20.0 / gamma_bar
    r_min = -t_final
    r_max = spec.center + 6.0 * l
    step = min(l, 1.0, 1.0 / gamma_bar) / points_per_scale
    n = int(np.ceil((r_max - r_min) / step)) + 1
    return Grid(r_min, r_max, n, t_final)


def envelope_norm(f, grid) -> float:
    """Trapezoidal estimate of the integral of ``|f|**2``."""
    f = np.asarray(f)
    dx = grid.dr if isinstance(grid, Grid) else float(grid)
    if isinstance(grid, Grid) and f.shape != (grid.n_points,):
        raise ConfigurationError(f"envelope has {f.size} samples, grid has {grid.n_points}")
    return float(trapezoid(np.abs(f) ** 2, dx=dx))


def _normalize(f: np.ndarray, grid: Grid) -> np.ndarray:
    norm = envelope_norm(f, grid)
    if norm <= 0:
        raise ConfigurationError("envelope vanishes on the grid")
    return f / np.sqrt(norm)


def make_gaussian(spec: PulseSpec, grid: Grid) -> np.ndarray:
    """Sample the normalized Gaussian envelope on ``grid``.

    Returns ``(2 / (pi l**2))**(1/4) exp(-(r - r0)**2 / l**2 + i omega (r - r0))``
    rescaled to unit norm on the grid.

    Raises
    ------
    ConfigurationError
        If the window truncates more than ``1e-8`` of the norm.
    """
    if spec.shape != "gaussian":
        raise ConfigurationError("make_gaussian needs a gaussian PulseSpec")
    l = spec.length
    x = grid.r - spec.center
    f = (2.0 / (np.pi * l**2)) ** 0.25 * np.exp(-(x**2) / l**2 + 1j * spec.detuning * x)
    deficit = 1.0 - envelope_norm(f, grid)
    if deficit > WINDOW_DEFICIT_TOL:
        raise ConfigurationError(
            f"grid window [{grid.r_min:.3g}, {grid.r_max:.3g}] loses {deficit:.2e} of the "
            f"pulse norm (l={l}, r0={spec.center})")
    return _normalize(f, grid)


def make_envelope(spec: PulseSpec, grid: Grid | None = None, gamma_bar: float = 1.0):
    """Convenience wrapper returning ``(f, grid)`` with a default grid if needed."""
    if grid is None:
        grid = default_grid(spec, gamma_bar)
    return make_gaussian(spec, grid), grid


def load_envelope_csv(path, grid: Grid) -> np.ndarray:
    """Load a sampled envelope from a ``r, re_f, im_f`` CSV onto ``grid``.

    Lines starting with ``#`` and a non-numeric header row are skipped. The
    samples are linearly interpolated onto the grid (zero outside their
    range) and normalized.
    """
    rows = []
    with open(Path(path), newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].lstrip().startswith("#"):
                continue
            try:
                rows.append([float(v) for v in row[:3]])
            except ValueError:
                if rows:
                    raise ConfigurationError(f"bad row in {path}: {row}") from None
    if len(rows) < 2 or any(len(r) != 3 for r in rows):
        raise ConfigurationError(f"{path} needs at least two rows of r, re, im")
    data = np.array(rows)
    order = np.argsort(data[:, 0])
    r, re, im = data[order].T
    f = (np.interp(grid.r, r, re, left=0.0, right=0.0)
         + 1j * np.interp(grid.r, r, im, left=0.0, right=0.0))
    return _normalize(f, grid)
