"""Minimal pure-state simulator for registers of up to three qubit wires.

Wire 0 carries the traveling qubit; wires 1 and 2 are eavesdropper probe
ancillae attached on demand.  Amplitudes are stored densely with wire 0 as
the most significant bit of the index.  States are immutable values and
every operation is a pure function; anything that samples takes an
explicit generator, so runs are reproducible bit for bit.

Conventions
-----------
* Global phase is ignored throughout; use :func:`states_close` to compare
  states up to phase.
* ``SpinFlip`` is i*Y = Z@X, the encoding operation that maps each of the
  four protocol states |0>, |1>, |+>, |-> to an orthogonal state.
* ``AncillaRotation(x, control, target)`` writes one of two real probe
  states onto a fresh |0> target, conditioned on the control bit::

      |0>|0>  ->  |0>|e0>,   |e0> at angle pi/4 - x/2 in the (|0>,|1>) plane
      |1>|0>  ->  |1>|e1>,   |e1> at angle pi/4 + x/2

  so <e0|e1> = cos(x).  The pair straddles the diagonal symmetrically,
  which makes the computational basis the minimum-error (Helstrom)
  measurement for every x, with error probability (1 - sin x)/2.  At
  x = pi/2 the gate acts on a fresh ancilla exactly like a CNOT copy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

import numpy as np

MAX_WIRES = 3
NORM_ATOL = 1e-9

_SQRT1_2 = 1.0 / math.sqrt(2.0)


class Basis(Enum):
    Z = "Z"
    X = "X"


@dataclass(frozen=True, eq=False)
class StateVector:
    """Complex amplitudes over a wire register; always unit norm."""

    amps: np.ndarray
    num_wires: int

    def __post_init__(self):
        if not 1 <= self.num_wires <= MAX_WIRES:
            raise ValueError(f"num_wires must be in [1, {MAX_WIRES}], got {self.num_wires}")
        if self.amps.shape != (2 ** self.num_wires,):
            raise ValueError("amplitude vector length must be 2**num_wires")
        n2 = float(np.vdot(self.amps, self.amps).real)
        if abs(n2 - 1.0) > NORM_ATOL:
            raise ValueError(f"state not normalized: |amps|^2 = {n2!r}")


def _sv(amps: np.ndarray, num_wires: int) -> StateVector:
    # trusted constructor for operations that preserve normalization
    state = object.__new__(StateVector)
    object.__setattr__(state, "amps", amps)
    object.__setattr__(state, "num_wires", num_wires)
    return state


class GateKind(Enum):
    IDENTITY = "identity"
    PAULI_X = "pauli_x"
    PAULI_Z = "pauli_z"
    SPIN_FLIP = "spin_flip"
    HADAMARD = "hadamard"
    CNOT = "cnot"
    ANCILLA_ROTATION = "ancilla_rotation"


@dataclass(frozen=True)
class Gate:
    kind: GateKind
    wires: tuple[int, ...]
    angle: float | None = None

    def __post_init__(self):
        two_wire = self.kind in (GateKind.CNOT, GateKind.ANCILLA_ROTATION)
        if len(self.wires) != (2 if two_wire else 1):
            raise ValueError(f"{self.kind.value} takes {2 if two_wire else 1} wire(s)")
        if two_wire and self.wires[0] == self.wires[1]:
            raise ValueError("control and target must differ")
        if self.kind is GateKind.ANCILLA_ROTATION:
            if self.angle is None or not -1e-12 <= self.angle <= math.pi / 2 + 1e-12:
                raise ValueError("probe angle must lie in [0, pi/2]")


def identity(wire: int = 0) -> Gate:
    return Gate(GateKind.IDENTITY, (wire,))


def pauli_x(wire: int = 0) -> Gate:
    return Gate(GateKind.PAULI_X, (wire,))


def pauli_z(wire: int = 0) -> Gate:
    return Gate(GateKind.PAULI_Z, (wire,))


def spin_flip(wire: int = 0) -> Gate:
    return Gate(GateKind.SPIN_FLIP, (wire,))


def hadamard(wire: int = 0) -> Gate:
    return Gate(GateKind.HADAMARD, (wire,))


def cnot(control: int, target: int) -> Gate:
    return Gate(GateKind.CNOT, (control, target))


def ancilla_rotation(angle: float, control: int, target: int) -> Gate:
    return Gate(GateKind.ANCILLA_ROTATION, (control, target), angle)


def _rot2(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]], dtype=complex)


def gate_matrix(gate: Gate) -> np.ndarray:
    """The gate's own unitary (2x2 for one wire, 4x4 for two)."""
    k = gate.kind
    if k is GateKind.IDENTITY:
        return np.eye(2, dtype=complex)
    if k is GateKind.PAULI_X:
        return np.array([[0, 1], [1, 0]], dtype=complex)
    if k is GateKind.PAULI_Z:
        return np.array([[1, 0], [0, -1]], dtype=complex)
    if k is GateKind.SPIN_FLIP:
        # i*Y = Z@X: |0> -> -|1>, |1> -> |0>
        return np.array([[0, 1], [-1, 0]], dtype=complex)
    if k is GateKind.HADAMARD:
        return np.array([[1, 1], [1, -1]], dtype=complex) * _SQRT1_2
    if k is GateKind.CNOT:
        return np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)
    if k is GateKind.ANCILLA_ROTATION:
        u = np.zeros((4, 4), dtype=complex)
        u[:2, :2] = _rot2(math.pi / 4 - gate.angle / 2)
        u[2:, 2:] = _rot2(math.pi / 4 + gate.angle / 2)
        return u
    raise ValueError(f"unknown gate kind {k}")


@lru_cache(maxsize=None)
def _expanded_matrix(gate: Gate, num_wires: int) -> np.ndarray:
    """Gate unitary embedded into the full register (wire 0 = MSB)."""
    local = gate_matrix(gate)
    wires = gate.wires
    dim = 2 ** num_wires
    full = np.zeros((dim, dim), dtype=complex)
    k = len(wires)
    for col in range(dim):
        bits = [(col >> (num_wires - 1 - w)) & 1 for w in range(num_wires)]
        lcol = 0
        for w in wires:
            lcol = (lcol << 1) | bits[w]
        for lrow in range(2 ** k):
            a = local[lrow, lcol]
            if a == 0:
                continue
            newbits = list(bits)
            for i, w in enumerate(wires):
                newbits[w] = (lrow >> (k - 1 - i)) & 1
            row = 0
            for b in newbits:
                row = (row << 1) | b
            full[row, col] = a
    return full


@lru_cache(maxsize=None)
def _wire_indices(num_wires: int, wire: int) -> tuple[np.ndarray, np.ndarray]:
    idx = np.arange(2 ** num_wires)
    bit = (idx >> (num_wires - 1 - wire)) & 1
    return idx[bit == 0], idx[bit == 1]


def _check_wires(state: StateVector, wires: tuple[int, ...]):
    for w in wires:
        if not 0 <= w < state.num_wires:
            raise ValueError(f"wire {w} out of range for {state.num_wires}-wire register")


def _make_prepared() -> dict[tuple[Basis, int], StateVector]:
    table = {
        (Basis.Z, 0): np.array([1.0, 0.0], dtype=complex),
        (Basis.Z, 1): np.array([0.0, 1.0], dtype=complex),
        (Basis.X, 0): np.array([_SQRT1_2, _SQRT1_2], dtype=complex),
        (Basis.X, 1): np.array([_SQRT1_2, -_SQRT1_2], dtype=complex),
    }
    for amps in table.values():
        amps.setflags(write=False)
    return {key: StateVector(amps, 1) for key, amps in table.items()}


_PREPARED = _make_prepared()


def prepare(basis: Basis, bit: int) -> StateVector:
    """One-wire state per (basis, bit): Z -> |0>/|1>, X -> |+>/|->."""
    if bit not in (0, 1):
        raise ValueError("bit must be 0 or 1")
    return _PREPARED[(basis, bit)]


def apply(state: StateVector, gate: Gate) -> StateVector:
    """U|state>; unitary gates keep the norm at machine precision."""
    _check_wires(state, gate.wires)
    return _sv(_expanded_matrix(gate, state.num_wires) @ state.amps, state.num_wires)


def attach_ancilla(state: StateVector) -> StateVector:
    """Tensor a fresh |0> wire onto the register (new wire = highest index)."""
    if state.num_wires >= MAX_WIRES:
        raise ValueError(f"register already at maximum size {MAX_WIRES}")
    amps = np.zeros(2 * state.amps.shape[0], dtype=complex)
    amps[0::2] = state.amps
    return _sv(amps, state.num_wires + 1)


def measure(state: StateVector, wire: int, basis: Basis, rng) -> tuple[int, StateVector]:
    """Projective measurement of one wire; returns (outcome, collapsed state).

    Outcomes follow the Born rule; the returned state is the normalized
    post-measurement collapse (other wires keep their correlations).
    """
    _check_wires(state, (wire,))
    n = state.num_wires
    amps = state.amps
    if basis is Basis.X:
        amps = _expanded_matrix(hadamard(wire), n) @ amps
    idx0, idx1 = _wire_indices(n, wire)
    kept = amps[idx0]
    p0 = float(np.vdot(kept, kept).real)
    p0 = min(max(p0, 0.0), 1.0)
    if rng.random() < p0:
        outcome, keep, p_keep = 0, idx0, p0
    else:
        outcome, keep, p_keep = 1, idx1, 1.0 - p0
        kept = amps[idx1]
    post = np.zeros_like(amps)
    post[keep] = kept / math.sqrt(p_keep)
    if basis is Basis.X:
        post = _expanded_matrix(hadamard(wire), n) @ post
    return outcome, _sv(post, n)


def discriminate(state: StateVector, wire: int, overlap_angle: float, rng) -> tuple[int, StateVector]:
    """Minimum-error readout of an AncillaRotation probe pair with overlap cos(x).

    Under the probe convention above, the two candidate states sit
    symmetrically about the diagonal, so the optimal (Helstrom) measurement
    is the projective computational-basis measurement for every x; the
    outcome is the guess, wrong with probability (1 - sin x)/2 per input.
    Returns (guess, collapsed state) so further ancillae can be read out.
    """
    if not -1e-12 <= overlap_angle <= math.pi / 2 + 1e-12:
        raise ValueError("overlap angle must lie in [0, pi/2]")
    return measure(state, wire, Basis.Z, rng)


def overlap(a: StateVector, b: StateVector) -> complex:
    if a.num_wires != b.num_wires:
        raise ValueError("states live on different registers")
    return complex(np.vdot(a.amps, b.amps))


def states_close(a: StateVector, b: StateVector, atol: float = NORM_ATOL) -> bool:
    """Equality up to global phase: |<a|b>| = 1 within atol."""
    return abs(abs(overlap(a, b)) - 1.0) <= atol
