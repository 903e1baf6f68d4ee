"""
Gates in the long-pulse limit
=============================

When the pulse is much longer than the atomic lifetime each frequency
component reflects independently, so the scattering is a fixed 4x4 unitary
on (polarization, atom).
"""
import numpy as np

from lambdaswap import AtomParams, reflection_map, sqrt_swap_gate, swap_gate

np.set_printoptions(precision=4, suppress=True)
atom = AtomParams(1.0, 1.0)

# %%
# On resonance the photon and the atom exchange their qubits, with a sign
# on the |V> and |1> components.
print("SWAP (omega = 0), basis", "H0 H1 V0 V1")
print(np.asarray(swap_gate(atom)))

# %%
# Detuned by one linewidth, the exchange is only half done.
m = sqrt_swap_gate(atom, sign=1)
print("\nsqrt(SWAP) (omega = -Gamma_H)")
print(np.asarray(m))
print("|entries| of the middle block:", np.abs(np.asarray(m)[1:3, 1:3]).round(4))

# %%
# The map stays unitary for any rates and detuning.
rng = np.random.default_rng(0)
worst = max(reflection_map(AtomParams(*10 ** rng.uniform(-2, 2, 2)),
                           rng.uniform(-20, 20)).unitarity_error()
            for _ in range(200))
print(f"\nworst unitarity error over 200 random maps: {worst:.1e}")
