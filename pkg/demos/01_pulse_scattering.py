"""
Scattering a single photon off a lambda atom
============================================

A Gaussian photon in the H polarization hits an atom prepared in |0>.
The reflected field splits into a part that left the atom alone (g3 = g1 - Gamma_H s)
and a part that flipped the atom and came back as V (g2).
The coherence s(t) is the only dynamical variable.
"""
import numpy as np

from lambdaswap import AtomParams, PulseSpec, default_grid, make_gaussian, scatter_pulse

atom = AtomParams(gamma_h=1.0, gamma_v=1.0)

# %%
# A long pulse (l = 10) transfers nearly all of its amplitude into the
# V channel, with the same shape as the input.
spec = PulseSpec(length=10.0)
grid = default_grid(spec, atom.gamma_bar)
res = scatter_pulse(make_gaussian(spec, grid), atom, grid)

mismatch = np.trapezoid(np.abs(res.g2 - res.g1) ** 2, dx=res.dx)
print(f"l = 10:  P = {res.p_transition:.5f}  P' = {res.p_no_transition:.5f}")
print(f"         int |g2 - g1|^2 = {mismatch:.5f}")

# %%
# A short pulse (l = 2.5) is too fast for the atom. The re-emitted photon
# lags the input by roughly one lifetime and part of it stays in H.
spec = PulseSpec(length=2.5)
grid = default_grid(spec, atom.gamma_bar)
res = scatter_pulse(make_gaussian(spec, grid), atom, grid)

peak_in = res.x[np.argmax(np.abs(res.g1))]
peak_out = res.x[np.argmax(np.abs(res.g2))]
print(f"l = 2.5: P = {res.p_transition:.5f}  P' = {res.p_no_transition:.5f}")
print(f"         emission delay ~ {peak_out - peak_in:.2f} / Gamma_H")

# %%
# Probability is conserved whatever the rates, since the atom is driven
# only through the photon it eventually gives back.
for ratio in (0.3, 1.0, 2.5):
    atom = AtomParams.from_ratio(ratio)
    spec = PulseSpec(length=4.0, detuning=0.5)
    grid = default_grid(spec, atom.gamma_bar)
    res = scatter_pulse(make_gaussian(spec, grid), atom, grid)
    total = res.p_transition + res.p_no_transition
    print(f"Gamma_V/Gamma_H = {ratio}: P + P' - 1 = {total - 1:+.1e}")
