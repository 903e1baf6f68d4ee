"""
What would a real device lose?
==============================

A cavity-enhanced emitter decays into the guided mode at g^2/kappa and
into everything else at gamma. The ratio sets the loss per gate.
"""
import math

from lambdaswap import estimate_cavity

two_pi = 2 * math.pi
est = estimate_cavity(g=two_pi * 16, gamma=two_pi * 0.2, kappa=two_pi * 32)
print(f"Gamma / 2pi          = {est.gamma_eff / two_pi:.3f} GHz")
print(f"loss per gate        = {100 * est.loss_per_gate:.2f} %")
print(f"three-gate survival  = {est.three_gate_survival:.4f}")
print(f"lifetime 1/Gamma     = {1e3 / est.gamma_eff:.1f} ps")

# %%
# Stronger coupling pushes the loss down quadratically in g.
for g in (8, 16, 32, 64):
    e = estimate_cavity(two_pi * g, two_pi * 0.2, two_pi * 32)
    print(f"g/2pi = {g:3d} GHz: loss {100 * e.loss_per_gate:6.3f} %")
