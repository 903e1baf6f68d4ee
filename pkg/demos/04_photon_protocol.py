"""
An entangling gate between two photons
======================================

Three photons bounce off the same atom in turn. The first loads its qubit
into the atom, the second interacts with it through sqrt(SWAP), and the
third reads the atom out. The net effect is sqrt(SWAP) between photons
1 and 2, whatever state the atom and photon 3 started in.
"""
import numpy as np

from lambdaswap import composer

np.set_printoptions(precision=4, suppress=True)

# %%
# Recover the two-qubit map from basis inputs and compare it with the
# textbook gate.
m = composer.unitary_from_process(composer.protocol_process_matrix())
print("effective unitary on (p1, p2) -> (p3, p2)")
print(m)
ledger = composer.fit_local_phases(m, composer.SQRT_SWAP)
print("phase ledger:", ledger.as_dict())

square = composer.fit_local_phases(m @ m, composer.SWAP)
print(f"M @ M vs SWAP, residual after phase fit: {square.residual:.1e}")

# %%
# The atom and photon 3 do not matter, even if they start fully mixed.
rng = np.random.default_rng(7)
p1, p2 = composer.random_state(rng), composer.random_state(rng)
outs = []
for atom in (composer.maximally_mixed(), composer.random_state(rng, mixed=True)):
    for p3 in (composer.maximally_mixed(), composer.random_state(rng)):
        outs.append(composer.run_protocol(p1, p2, p3, atom).output_rho)
spread = max(composer.trace_distance(a, b) for a in outs for b in outs)
print(f"\nlargest trace distance between outputs: {spread:.1e}")

report = composer.run_protocol(p1, p2, composer.maximally_mixed(), composer.maximally_mixed())
print(f"fidelity with ideal output: {report.target_fidelity:.12f}")
print("transfer checks:", report.transfer_check)
