"""
Dense multi-qubit algebra for the three-photon photon-photon sqrt(SWAP).

Photons are polarization qubits (H=0, V=1), the atom is a ground-state qubit
(0, 1). Photons 1, 2 and 3 reflect off the atom in turn: photons 1 and 3 on
resonance (SWAP), photon 2 detuned by a linewidth (sqrt(SWAP)). The inputs
are photons 1 and 2, the outputs photons 3 and 2.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from .adiabatic import GateMatrix, sqrt_swap_gate, swap_gate
from .errors import ConfigurationError, InvariantViolation
from .scatter import AtomParams

__all__ = [
    "QubitRegisterState",
    "ProtocolReport",
    "PhaseLedger",
    "SQRT_SWAP",
    "SWAP",
    "PAULI_Z",
    "apply_gate",
    "partial_trace",
    "state_fidelity",
    "trace_distance",
    "pure",
    "maximally_mixed",
    "random_state",
    "protocol_gates",
    "protocol_process_matrix",
    "unitary_from_process",
    "fit_local_phases",
    "run_protocol",
    "composite_fidelity",
    "state_hash",
]

MAX_QUBITS = 6
PROTOCOL_LABELS = ("p1", "p2", "p3", "atom")

SWAP = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex)
SQRT_SWAP = np.array([
    [1, 0, 0, 0],
    [0, (1 + 1j) / 2, (1 - 1j) / 2, 0],
    [0, (1 - 1j) / 2, (1 + 1j) / 2, 0],
    [0, 0, 0, 1],
], dtype=complex)
PAULI_Z = np.diag([1.0, -1.0]).astype(complex)


@dataclass(frozen=True)
class QubitRegisterState:
    """Density matrix over named qubits; the first label is the most significant."""

    labels: tuple
    rho: np.ndarray

    def __post_init__(self):
        labels = tuple(self.labels)
        rho = np.array(self.rho, dtype=complex)
        n = len(labels)
        if not 1 <= n <= MAX_QUBITS:
            raise ConfigurationError(f"register holds 1..{MAX_QUBITS} qubits, got {n}")
        if len(set(labels)) != n:
            raise ConfigurationError(f"duplicate labels in {labels}")
        if rho.shape != (2**n, 2**n):
            raise ConfigurationError(f"rho shape {rho.shape} does not match {n} qubits")
        _validate_density(rho)
        rho.setflags(write=False)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "rho", rho)

    @property
    def n_qubits(self) -> int:
        return len(self.labels)

    @property
    def purity(self) -> float:
        return float(np.real(np.trace(self.rho @ self.rho)))

    @classmethod
    def product(cls, **factors) -> "QubitRegisterState":
        """Tensor product of single-qubit states given as ``label=state``.

        Each state is a 2-vector (pure) or a 2x2 density matrix.
        """
        rho = np.ones((1, 1), dtype=complex)
        for state in factors.values():
            rho = np.kron(rho, _as_density(state))
        return cls(tuple(factors), rho)


def _as_density(state) -> np.ndarray:
    a = np.asarray(state, dtype=complex)
    if a.ndim == 1:
        a = a / np.linalg.norm(a)
        return np.outer(a, a.conj())
    return a


def _validate_density(rho, tol=1e-12):
    if np.max(np.abs(rho - rho.conj().T)) > tol:
        raise InvariantViolation("density matrix is not Hermitian")
    if abs(np.trace(rho) - 1.0) > tol:
        raise InvariantViolation(f"density matrix has trace {np.trace(rho).real:.15f}")
    if np.linalg.eigvalsh(rho).min() < -1e-10:
        raise InvariantViolation("density matrix is not positive semidefinite")


def pure(vec) -> np.ndarray:
    return _as_density(vec)


def maximally_mixed(n_qubits: int = 1) -> np.ndarray:
    d = 2**n_qubits
    return np.eye(d, dtype=complex) / d


def random_state(rng: np.random.Generator, mixed: bool = False, dim: int = 2) -> np.ndarray:
    """Haar-random pure state, or a random full-rank state when ``mixed``."""
    if mixed:
        g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        rho = g @ g.conj().T
        return rho / np.trace(rho)
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return pure(v)


def _apply_operator(rho: np.ndarray, op: np.ndarray, axes: tuple, n: int) -> np.ndarray:
    """``(op on axes) rho (op on axes)^dagger`` for a 2**n density-like matrix."""
    k = len(axes)
    t = rho.reshape((2,) * (2 * n))
    u = op.reshape((2,) * (2 * k))
    # ket side
    t = np.tensordot(u, t, axes=(list(range(k, 2 * k)), list(axes)))
    t = np.moveaxis(t, list(range(k)), list(axes))
    # bra side
    bra_axes = [n + a for a in axes]
    t = np.tensordot(t, u.conj(), axes=(bra_axes, list(range(k, 2 * k))))
    t = np.moveaxis(t, list(range(2 * n - k, 2 * n)), bra_axes)
    return t.reshape(2**n, 2**n)


def apply_gate(state: QubitRegisterState, gate, photon: str, atom: str = "atom",
               channel: bool = False) -> QubitRegisterState:
    """Apply a photon-atom gate to the ``(photon, atom)`` pair.

    Non-unitary matrices are rejected unless ``channel`` is set, in which
    case the matrix is applied as a single Kraus operator and the result
    renormalized.
    """
    u = np.asarray(gate.entries if isinstance(gate, GateMatrix) else gate, dtype=complex)
    if u.shape != (4, 4):
        raise ConfigurationError(f"gate must be 4x4, got {u.shape}")
    for label in (photon, atom):
        if label not in state.labels:
            raise ConfigurationError(f"unknown qubit {label!r}; register has {state.labels}")
    if not channel and np.max(np.abs(u.conj().T @ u - np.eye(4))) > 1e-9:
        raise ConfigurationError("gate is not unitary; pass channel=True to apply it anyway")
    axes = (state.labels.index(photon), state.labels.index(atom))
    rho = _apply_operator(state.rho, u, axes, state.n_qubits)
    if channel:
        rho = rho / np.trace(rho)
    return QubitRegisterState(state.labels, rho)


def _partial_trace_array(rho: np.ndarray, n: int, keep_axes: list) -> np.ndarray:
    t = rho.reshape((2,) * (2 * n))
    traced = [a for a in range(n) if a not in keep_axes]
    letters = "abcdefghijklmnopqrstuvwxyz"
    ket = list(letters[:n])
    bra = list(letters[n:2 * n])
    for a in traced:
        bra[a] = ket[a]
    out = [ket[a] for a in keep_axes] + [bra[a] for a in keep_axes]
    t = np.einsum("".join(ket + bra) + "->" + "".join(out), t)
    d = 2 ** len(keep_axes)
    return t.reshape(d, d)


def partial_trace(state: QubitRegisterState, keep) -> QubitRegisterState:
    """Reduced state on ``keep``, with qubits ordered as listed in ``keep``."""
    keep = list(keep)
    if not keep:
        raise ConfigurationError("keep list is empty")
    missing = [k for k in keep if k not in state.labels]
    if missing:
        raise ConfigurationError(f"unknown qubits {missing}; register has {state.labels}")
    axes = [state.labels.index(k) for k in keep]
    return QubitRegisterState(tuple(keep), _partial_trace_array(state.rho, state.n_qubits, axes))


def _rho(x) -> np.ndarray:
    return x.rho if isinstance(x, QubitRegisterState) else np.asarray(x, dtype=complex)


def state_fidelity(rho, sigma) -> float:
    """Uhlmann fidelity ``(tr sqrt(sqrt(rho) sigma sqrt(rho)))**2``.

    Equals ``|<psi|phi>|**2`` for pure states.
    """
    a, b = _rho(rho), _rho(sigma)
    if a.shape != b.shape:
        raise ConfigurationError(f"dimension mismatch: {a.shape} vs {b.shape}")
    # pure-state shortcut avoids square roots of round-off eigenvalues
    for p, q in ((a, b), (b, a)):
        w, v = np.linalg.eigh(p)
        if w[-1] > 1.0 - 1e-12:
            psi = v[:, -1]
            return float(np.clip(np.real(psi.conj() @ q @ psi), 0.0, 1.0))
    w, v = np.linalg.eigh(a)
    sqrt_a = (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T
    m = sqrt_a @ b @ sqrt_a
    ev = np.clip(np.linalg.eigvalsh(0.5 * (m + m.conj().T)), 0.0, None)
    return float(np.clip(np.sum(np.sqrt(ev)) ** 2, 0.0, 1.0))


def trace_distance(rho, sigma) -> float:
    d = _rho(rho) - _rho(sigma)
    return float(0.5 * np.sum(np.abs(np.linalg.eigvalsh(0.5 * (d + d.conj().T)))))


def state_hash(rho, decimals: int = 10) -> str:
    """SHA-256 of the state rounded to ``decimals``; stable across runs."""
    a = np.round(_rho(rho), decimals) + 0.0  # folds -0.0 into 0.0
    a = a.real + 0.0 + 1j * (a.imag + 0.0)
    return hashlib.sha256(np.ascontiguousarray(a).tobytes()).hexdigest()


def protocol_gates(atom: AtomParams = AtomParams(), branch: int = 1):
    """The three reflections ``(photon, gate)`` in time order."""
    s = swap_gate(atom)
    return [("p1", s), ("p2", sqrt_swap_gate(atom, branch)), ("p3", s)]


def _run_linear(rho_in: np.ndarray, gates) -> np.ndarray:
    """Push a (not necessarily physical) operator on p1,p2,p3,atom through the gates."""
    out = rho_in
    for photon, gate in gates:
        axes = (PROTOCOL_LABELS.index(photon), PROTOCOL_LABELS.index("atom"))
        out = _apply_operator(out, gate.entries, axes, 4)
    return out


def protocol_process_matrix(atom_state=None, p3_state=None, atom: AtomParams = AtomParams(),
                            branch: int = 1) -> np.ndarray:
    """16x16 superoperator of the map ``(p1, p2) -> (p3, p2)``.

    Row-major vectorization: ``vec(rho)[4 i + j] = rho[i, j]`` so that a
    unitary ``M`` gives ``kron(M, M.conj())``.
    """
    atom_rho = pure([1, 0]) if atom_state is None else _as_density(atom_state)
    p3_rho = pure([1, 0]) if p3_state is None else _as_density(p3_state)
    gates = protocol_gates(atom, branch)
    env = np.kron(p3_rho, atom_rho)
    sup = np.empty((16, 16), dtype=complex)
    for i in range(4):
        for j in range(4):
            e = np.zeros((4, 4), dtype=complex)
            e[i, j] = 1.0
            # ordering p1, p2, p3, atom
            full = np.kron(e, env)
            out = _run_linear(full, gates)
            red = _partial_trace_array(out, 4, [2, 1])
            sup[:, 4 * i + j] = red.reshape(16)
    return sup


def unitary_from_process(sup: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Recover ``M`` (up to global phase) from ``kron(M, M.conj())``.

    The phase is fixed so that the largest-magnitude entry of the first
    nonzero column is real and positive.

    Raises
    ------
    InvariantViolation
        If the process is not a single-Kraus map.
    """
    d = int(round(np.sqrt(sup.shape[0])))
    choi = sup.reshape(d, d, d, d).transpose(0, 2, 1, 3).reshape(d * d, d * d)
    w, v = np.linalg.eigh(0.5 * (choi + choi.conj().T))
    if np.sum(np.abs(w[:-1])) > tol * max(1.0, abs(w[-1])):
        raise InvariantViolation(f"process is not unitary (Kraus spectrum {w})")
    m = np.sqrt(w[-1]) * v[:, -1].reshape(d, d)
    col = m[:, np.argmax(np.linalg.norm(m, axis=0) > tol)]
    ref = col[np.argmax(np.abs(col))]
    return m * (abs(ref) / ref)


@dataclass(frozen=True)
class PhaseLedger:
    """Diagonal phase gates relating ``M`` to ``target``.

    ``M = exp(i global_phase) (P(out_a) x P(out_b)) target (P(in_a) x P(in_b))``
    with ``P(phi) = diag(1, exp(i phi))``. ``residual`` is the max entrywise
    mismatch after the fit.
    """

    global_phase: float
    output_phases: tuple
    input_phases: tuple
    residual: float

    def as_dict(self) -> dict:
        return {"global_phase": self.global_phase, "output_phases": list(self.output_phases),
                "input_phases": list(self.input_phases), "residual": self.residual}


def _phase_gate(phi):
    return np.diag([1.0, np.exp(1j * phi)])


def fit_local_phases(m: np.ndarray, target: np.ndarray) -> PhaseLedger:
    """Fit single-qubit Z-phases and a global phase so that ``m`` matches ``target``.

    Phases are solved by least squares on the arguments of the entries where
    both matrices are nonzero; the input phase of the first qubit is
    gauge-fixed to zero. Underdetermined combinations get the minimum-norm
    solution.
    """
    m = np.asarray(m, dtype=complex)
    t = np.asarray(target, dtype=complex)
    rows, rhs = [], []
    for o in range(4):
        for i in range(4):
            if abs(t[o, i]) > 1e-12 and abs(m[o, i]) > 1e-12:
                # unknowns: global, out_a, out_b, in_b
                rows.append([1.0, o >> 1, o & 1, i & 1])
                rhs.append(np.angle(m[o, i] / t[o, i]))
    if not rows:
        raise ConfigurationError("matrices share no nonzero entries")
    sol = np.linalg.lstsq(np.array(rows, dtype=float), np.array(rhs), rcond=None)[0]
    theta, out_a, out_b, in_b = sol
    fitted = (np.exp(1j * theta) * np.kron(_phase_gate(out_a), _phase_gate(out_b)) @ t
              @ np.kron(_phase_gate(0.0), _phase_gate(in_b)))

    def wrap(a):
        return float((a + np.pi) % (2 * np.pi) - np.pi)

    return PhaseLedger(wrap(theta), (wrap(out_a), wrap(out_b)), (0.0, wrap(in_b)),
                       float(np.max(np.abs(fitted - m))))


@dataclass(frozen=True)
class ProtocolReport:
    """Outcome of one three-photon run.

    ``transfer_check`` holds the fidelities of photon 1's final state to the
    Z-flipped initial atom state, and of the final atom state to the
    Z-flipped initial photon-3 state.
    """

    output_rho: QubitRegisterState
    target_fidelity: float
    residual_entanglement: float | None
    transfer_check: dict
    final_state: QubitRegisterState = field(repr=False)

    def to_dict(self) -> dict:
        rho = self.output_rho.rho
        return {
            "output_labels": list(self.output_rho.labels),
            "output_rho": [[[float(z.real), float(z.imag)] for z in row] for row in rho],
            "output_state_hash": state_hash(rho),
            "target_fidelity": self.target_fidelity,
            "residual_entanglement": self.residual_entanglement,
            "transfer_check": dict(self.transfer_check),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def run_protocol(p1_state, p2_state, p3_state, atom_state, branch: int = 1,
                 atom: AtomParams = AtomParams()) -> ProtocolReport:
    """Reflect photons 1, 2, 3 off the atom and analyse the outputs.

    States are 2-vectors or 2x2 density matrices. ``branch=+1`` detunes
    photon 2 by ``-Gamma_H`` and targets :data:`SQRT_SWAP`; ``branch=-1``
    detunes by ``+Gamma_H`` and targets its adjoint.
    """
    initial = QubitRegisterState.product(p1=p1_state, p2=p2_state, p3=p3_state,
                                         atom=atom_state)
    state = initial
    for photon, gate in protocol_gates(atom, branch):
        state = apply_gate(state, gate, photon)

    out = partial_trace(state, ["p3", "p2"])
    target_u = SQRT_SWAP if branch == 1 else SQRT_SWAP.conj().T
    rho_in = partial_trace(initial, ["p1", "p2"]).rho
    target = target_u @ rho_in @ target_u.conj().T
    input_pure = np.real(np.trace(rho_in @ rho_in)) > 1.0 - 1e-12
    transfer = {
        "atom_to_p1": state_fidelity(partial_trace(state, ["p1"]).rho,
                                     PAULI_Z @ _as_density(atom_state) @ PAULI_Z),
        "p3_to_atom": state_fidelity(partial_trace(state, ["atom"]).rho,
                                     PAULI_Z @ _as_density(p3_state) @ PAULI_Z),
    }
    return ProtocolReport(
        output_rho=out,
        target_fidelity=state_fidelity(out.rho, target),
        residual_entanglement=float(1.0 - out.purity) if input_pure else None,
        transfer_check=transfer,
        final_state=state,
    )


def composite_fidelity(f_swap: float, f_sqrt_swap: float, ideal: float = 1.0) -> float:
    """Photon-photon gate estimate from per-reflection fidelities.

    Two resonant reflections and one detuned one: ``ideal * F_swap**2 * F_sqrt``.
    """
    return ideal * f_swap**2 * f_sqrt_swap
