"""Dense state-vector engine over small labeled qubit registers.

Registers are addressed by string labels rather than integer wire numbers so
protocol code can talk about qubits the way the parties do ("a", "m1", ...).
The label at position 0 is the most significant bit of the basis index: for
labels (a, b) the amplitude order is |00>, |01>, |10>, |11> with a as the
left bit.  Everything is exact dense complex128 arithmetic; no sparsity, no
approximation beyond float error.

State values are immutable: every operation returns a new StateVector and the
amplitude buffers are marked read-only.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

ATOL = 1e-10
NORM_TOL = 1e-12
MAX_QUBITS = 12


@dataclass(frozen=True)
class StateVector:
    """Pure state of a labeled register.

    labels: qubit names in position order (position 0 = most significant bit).
    amps:   2**n complex amplitudes, unit norm, read-only.
    """

    labels: tuple[str, ...]
    amps: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        n = len(self.labels)
        if not 1 <= n <= MAX_QUBITS:
            raise ValueError(f"register must have 1..{MAX_QUBITS} qubits, got {n}")
        if len(set(self.labels)) != n:
            raise ValueError(f"duplicate labels in {self.labels}")
        amps = np.asarray(self.amps, dtype=np.complex128)
        if amps.shape != (2**n,):
            raise ValueError(f"expected {2**n} amplitudes for {n} qubits, got {amps.shape}")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state norm {norm!r} deviates from 1 by more than {NORM_TOL}")
        amps.setflags(write=False)
        object.__setattr__(self, "amps", amps)

    @property
    def num_qubits(self) -> int:
        return len(self.labels)

    @property
    def label_map(self) -> dict[str, int]:
        return {lab: i for i, lab in enumerate(self.labels)}

    def position(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(f"no qubit labeled {label!r} in register {self.labels}") from None

    def tensor_view(self) -> np.ndarray:
        """Amplitudes reshaped to one axis per qubit, axis i = position i."""
        return self.amps.reshape((2,) * self.num_qubits)

    def relabeled(self, mapping: dict[str, str]) -> "StateVector":
        """Rename qubits in place (pure bookkeeping, amplitudes untouched)."""
        new = tuple(mapping.get(lab, lab) for lab in self.labels)
        return StateVector(new, self.amps)

    def to_json(self) -> str:
        return json.dumps(
            {
                "labels": list(self.labels),
                "amps": [[float(z.real), float(z.imag)] for z in self.amps],
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "StateVector":
        doc = json.loads(text)
        amps = np.array([complex(re, im) for re, im in doc["amps"]])
        return cls(tuple(doc["labels"]), amps)


def new_register(labels: list[str] | tuple[str, ...]) -> StateVector:
    """All-zeros register |0...0> over the given distinct labels."""
    labels = tuple(labels)
    if not labels:
        raise ValueError("register needs at least one label")
    amps = np.zeros(2 ** len(labels), dtype=np.complex128)
    amps[0] = 1.0
    return StateVector(labels, amps)


def from_amplitudes(labels: list[str] | tuple[str, ...], amps: np.ndarray) -> StateVector:
    return StateVector(tuple(labels), np.asarray(amps, dtype=np.complex128))


def apply_unitary(state: StateVector, matrix: np.ndarray, targets: list[str] | tuple[str, ...]) -> StateVector:
    """Apply a 2^k x 2^k matrix to the named target qubits.

    The first target is the most significant bit of the matrix's index space,
    matching the register convention.  The matrix is trusted here; named-gate
    constructors validate unitarity once at build time.
    """
    k = len(targets)
    if len(set(targets)) != k:
        raise ValueError(f"duplicate targets {targets}")
    axes = [state.position(t) for t in targets]
    m = np.asarray(matrix, dtype=np.complex128)
    if m.shape != (2**k, 2**k):
        raise ValueError(f"matrix shape {m.shape} does not fit {k} targets")
    t = np.tensordot(m.reshape((2,) * (2 * k)), state.tensor_view(), axes=(range(k, 2 * k), axes))
    # tensordot pulls the new target axes to the front, in target order
    t = np.moveaxis(t, range(k), axes)
    return StateVector(state.labels, t.reshape(-1))


def probability_of_one(state: StateVector, label: str) -> float:
    axis = state.position(label)
    t = state.tensor_view()
    slc = [slice(None)] * state.num_qubits
    slc[axis] = 1
    return float(np.sum(np.abs(t[tuple(slc)]) ** 2))


def measure(state: StateVector, target: str, rng: np.random.Generator) -> tuple[int, StateVector]:
    """Projective computational-basis measurement of one qubit.

    Returns (outcome bit, collapsed renormalized state).  Randomness comes
    only from the injected generator, so runs are reproducible per seed.
    """
    p1 = probability_of_one(state, target)
    bit = 1 if rng.random() < p1 else 0
    axis = state.position(target)
    t = state.tensor_view().copy()
    slc = [slice(None)] * state.num_qubits
    slc[axis] = 1 - bit
    t[tuple(slc)] = 0.0
    flat = t.reshape(-1)
    norm = np.linalg.norm(flat)
    if norm == 0.0:
        raise ValueError(f"measurement branch {bit} of {target!r} has zero probability")
    return bit, StateVector(state.labels, flat / norm)


def reduced_density(state: StateVector, keep: list[str] | tuple[str, ...]) -> np.ndarray:
    """Partial trace onto the kept labels, in the order given.

    The result is validated as a density matrix: Hermitian within 1e-12,
    unit trace within 1e-12, eigenvalues above -1e-10.
    """
    if not keep:
        raise ValueError("keep must name at least one qubit")
    keep_axes = [state.position(lab) for lab in keep]
    traced = [i for i in range(state.num_qubits) if i not in keep_axes]
    t = state.tensor_view()
    rho = np.tensordot(t, t.conj(), axes=(traced, traced))
    # tensordot leaves kept axes in position order; permute to requested order
    order = np.argsort(np.argsort(keep_axes))
    k = len(keep_axes)
    rho = np.transpose(rho, list(order) + [o + k for o in order])
    rho = rho.reshape(2**k, 2**k)
    validate_density(rho)
    return rho


def validate_density(rho: np.ndarray, *, herm_tol: float = 1e-12, eig_tol: float = -1e-10) -> None:
    if np.abs(rho - rho.conj().T).max() > herm_tol:
        raise ValueError("density matrix is not Hermitian within tolerance")
    if abs(np.trace(rho).real - 1.0) > 1e-12:
        raise ValueError(f"density matrix trace {np.trace(rho)!r} is not 1")
    if np.linalg.eigvalsh(rho).min() < eig_tol:
        raise ValueError("density matrix has a negative eigenvalue beyond tolerance")


def fidelity(x: StateVector, y: StateVector) -> float:
    """|<x|y>|^2 for two pure states over the same labels in the same order."""
    if x.labels != y.labels:
        raise ValueError(f"label mismatch: {x.labels} vs {y.labels}")
    return float(np.abs(np.vdot(x.amps, y.amps)) ** 2)


def trace_distance(rho: np.ndarray, sigma: np.ndarray) -> float:
    """(1/2) * trace norm of (rho - sigma), via eigenvalues of the difference."""
    if rho.shape != sigma.shape:
        raise ValueError(f"shape mismatch: {rho.shape} vs {sigma.shape}")
    return float(0.5 * np.abs(np.linalg.eigvalsh(rho - sigma)).sum())


def purity(rho: np.ndarray) -> float:
    return float(np.trace(rho @ rho).real)


def unitarity_defect(matrix: np.ndarray) -> float:
    """Max-abs deviation of M^dagger M from the identity."""
    m = np.asarray(matrix, dtype=np.complex128)
    return float(np.abs(m.conj().T @ m - np.eye(m.shape[0])).max())


def validate_unitary(matrix: np.ndarray, *, tol: float = ATOL) -> np.ndarray:
    m = np.asarray(matrix, dtype=np.complex128)
    defect = unitarity_defect(m)
    if defect >= tol:
        raise ValueError(f"matrix is not unitary: defect {defect:.3e} >= {tol}")
    return m
