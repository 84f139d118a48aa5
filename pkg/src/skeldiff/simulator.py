"""Statevector simulation on two independent backends.

Conventions: little-endian basis indexing (qubit 0 is the least-significant
bit of the basis index); rotation gates use half-angle matrices
rx(t) = [[cos t/2, -i sin t/2], [-i sin t/2, cos t/2]], rz(t) = diag(e^{-it/2},
e^{it/2}); controlled gates list control(s) first, then target(s); cp(t) =
diag(1, 1, 1, e^{it}).

`run_dense` updates amplitudes in place per gate (O(2^n) each); `run_unitary`
builds each gate's full 2^n x 2^n embedding by index arithmetic and multiplies
them out, giving an independently-coded cross-check of the dense backend.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatch,
    MissingAngle,
    QubitBudgetExceeded,
    UnexpectedAngle,
)
from .lang import GATES, Circuit

DENSE_MAX_QUBITS = 12
UNITARY_MAX_QUBITS = 10
_UNITARITY_TOL = 1e-12


@dataclass(frozen=True)
class Statevector:
    amplitudes: np.ndarray
    qubit_count: int

    def __post_init__(self):
        assert self.amplitudes.shape == (2 ** self.qubit_count,)

    def fidelity(self, other: "Statevector") -> float:
        return fidelity(self, other)

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def to_json_dict(self) -> dict:
        return {
            "n": self.qubit_count,
            "amplitudes": [[float(a.real), float(a.imag)] for a in self.amplitudes],
            "endianness": "little",
        }

    @staticmethod
    def from_json_dict(d: dict) -> "Statevector":
        if d.get("endianness", "little") != "little":
            raise DimensionMismatch("statevector dumps must be little-endian")
        amps = np.array([complex(re, im) for re, im in d["amplitudes"]])
        return Statevector(amps, int(d["n"]))


@dataclass(frozen=True)
class MeasurementSample:
    counts: dict[str, int]
    shots: int


def _rotation(kind: str, t: float) -> np.ndarray:
    c, s = math.cos(t / 2), math.sin(t / 2)
    if kind == "rx":
        return np.array([[c, -1j * s], [-1j * s, c]])
    if kind == "ry":
        return np.array([[c, -s], [s, c]])
    return np.array([[np.exp(-0.5j * t), 0], [0, np.exp(0.5j * t)]])


def gate_matrix(kind: str, angle: float | None = None) -> np.ndarray:
    """Unitary of the gate in its local little-endian operand basis."""
    info = GATES.get(kind)
    if info is None:
        raise KeyError(f"unknown gate {kind!r}")
    if info.parameterized and angle is None:
        raise MissingAngle(f"gate '{kind}' requires an angle")
    if not info.parameterized and angle is not None:
        raise UnexpectedAngle(f"gate '{kind}' does not take an angle")

    if kind == "x":
        m = np.array([[0, 1], [1, 0]], dtype=complex)
    elif kind == "z":
        m = np.diag([1, -1]).astype(complex)
    elif kind == "h":
        m = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
    elif kind == "s":
        m = np.diag([1, 1j])
    elif kind == "t":
        m = np.diag([1, np.exp(0.25j * math.pi)])
    elif kind in ("rx", "ry", "rz"):
        m = _rotation(kind, angle)
    elif kind in ("cx", "cz", "swap", "cp", "crx", "cry", "crz"):
        m = np.eye(4, dtype=complex)
        if kind == "cx":
            # local index = control + 2*target
            m[np.ix_([1, 3], [1, 3])] = np.array([[0, 1], [1, 0]])
        elif kind == "cz":
            m[3, 3] = -1
        elif kind == "swap":
            m[np.ix_([1, 2], [1, 2])] = np.array([[0, 1], [1, 0]])
        elif kind == "cp":
            m[3, 3] = np.exp(1j * angle)
        else:
            m[np.ix_([1, 3], [1, 3])] = _rotation(kind[1:], angle)
    elif kind == "ccx":
        m = np.eye(8, dtype=complex)
        m[np.ix_([3, 7], [3, 7])] = np.array([[0, 1], [1, 0]])
    else:  # cswap: control is operand 0, swapped targets are operands 1, 2
        m = np.eye(8, dtype=complex)
        m[np.ix_([3, 5], [3, 5])] = np.array([[0, 1], [1, 0]])

    err = np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0])))
    assert err <= _UNITARITY_TOL, f"gate '{kind}' failed unitarity: {err}"
    return m


def apply_gate(state: np.ndarray, mat: np.ndarray, qubits: tuple[int, ...],
               n: int) -> np.ndarray:
    """Apply a k-qubit gate by reshaping the amplitude tensor; O(2^n)."""
    k = len(qubits)
    psi = state.reshape([2] * n)
    # tensor axis for qubit q is n-1-q; front-load operands so that the
    # flattened group index matches the gate's local little-endian basis
    src = [n - 1 - q for q in reversed(qubits)]
    psi = np.moveaxis(psi, src, range(k))
    psi = mat @ psi.reshape(2 ** k, -1)
    psi = np.moveaxis(psi.reshape([2] * n), range(k), src)
    return psi.reshape(-1)


def run_dense(c: Circuit) -> Statevector:
    """Apply gates in order to |0...0> via in-place amplitude updates."""
    if c.qubit_count > DENSE_MAX_QUBITS:
        raise QubitBudgetExceeded(
            f"{c.qubit_count} qubits exceeds dense budget of {DENSE_MAX_QUBITS}")
    state = np.zeros(2 ** c.qubit_count, dtype=complex)
    state[0] = 1.0
    for op in c.ops:
        state = apply_gate(state, gate_matrix(op.gate, op.angle), op.qubits,
                           c.qubit_count)
    return Statevector(state, c.qubit_count)


def embed_gate(mat: np.ndarray, qubits: tuple[int, ...], n: int) -> np.ndarray:
    """Full 2^n x 2^n embedding of a local gate, built by index arithmetic."""
    k = len(qubits)
    dim = 2 ** n
    full = np.zeros((dim, dim), dtype=complex)
    clear_mask = ~sum(1 << q for q in qubits) & (dim - 1)
    spread = []
    for j in range(2 ** k):
        bits = 0
        for s in range(k):
            if (j >> s) & 1:
                bits |= 1 << qubits[s]
        spread.append(bits)
    for x in range(dim):
        j_in = 0
        for s, q in enumerate(qubits):
            if (x >> q) & 1:
                j_in |= 1 << s
        base = x & clear_mask
        for j_out in range(2 ** k):
            v = mat[j_out, j_in]
            if v != 0:
                full[base | spread[j_out], x] = v
    return full


def run_unitary(c: Circuit) -> Statevector:
    """Build the whole circuit unitary, then apply it to |0...0>."""
    if c.qubit_count > UNITARY_MAX_QUBITS:
        raise QubitBudgetExceeded(
            f"{c.qubit_count} qubits exceeds unitary budget of {UNITARY_MAX_QUBITS}")
    dim = 2 ** c.qubit_count
    u = np.eye(dim, dtype=complex)
    for op in c.ops:
        u = embed_gate(gate_matrix(op.gate, op.angle), op.qubits, c.qubit_count) @ u
    return Statevector(u[:, 0].copy(), c.qubit_count)


def fidelity(sv1: Statevector, sv2: Statevector) -> float:
    """Modulus of the inner product; 1 means equal up to global phase."""
    if sv1.qubit_count != sv2.qubit_count:
        raise DimensionMismatch(
            f"{sv1.qubit_count} vs {sv2.qubit_count} qubits")
    return float(abs(np.vdot(sv1.amplitudes, sv2.amplitudes)))


def sample(sv: Statevector, shots: int, rng_seed: int) -> MeasurementSample:
    """Draw i.i.d. measurement outcomes; keys are bitstrings, qubit 0 last."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    rng = np.random.default_rng(rng_seed)
    probs = sv.probabilities()
    probs = probs / probs.sum()
    outcomes = rng.choice(len(probs), size=shots, p=probs)
    values, counts = np.unique(outcomes, return_counts=True)
    fmt = f"0{sv.qubit_count}b"
    return MeasurementSample(
        {format(int(v), fmt): int(k) for v, k in zip(values, counts)}, shots)
