"""Exact pure-state simulation of small qubit registers.

A state vector is a dense complex numpy array of length ``2**n`` over an
``n``-qubit register (``n <= 8``).  Qubit 0 is the MOST significant bit of
a basis index: on a 3-qubit register the index ``0b011`` has qubit 0 in
|0> and qubits 1 and 2 in |1>.  All operations return fresh arrays or
collapse-and-renormalize, so states stay unit norm to double precision.

X-basis labels follow the Hadamard image of the computational basis:
``PLUS == 0`` encodes |+> = H|0> and ``MINUS == 1`` encodes |-> = H|1>.

Every measurement draws exactly one uniform variate from the caller's
``numpy.random.Generator``, which keeps whole-protocol runs reproducible
from a single seed regardless of what the amplitudes happen to be.
"""

from __future__ import annotations

import enum
import math

import numpy as np

# Dimension at or below which scalar loops beat numpy dispatch overhead.
_SMALL_DIM = 16

MAX_QUBITS = 8

SQRT_HALF = 1.0 / np.sqrt(2.0)

# X-basis outcome labels: the bit measured after a Hadamard.
PLUS = 0
MINUS = 1


class BellState(enum.Enum):
    """The four maximally entangled two-qubit basis states."""

    PHI_PLUS = 0   # (|00> + |11>) / sqrt(2)
    PHI_MINUS = 1  # (|00> - |11>) / sqrt(2)
    PSI_PLUS = 2   # (|01> + |10>) / sqrt(2)
    PSI_MINUS = 3  # (|01> - |10>) / sqrt(2)


# Coefficient of |v1 v2> in each Bell state, v1 = first measured qubit.
_BELL_COEFFS: dict[BellState, dict[tuple[int, int], float]] = {
    BellState.PHI_PLUS: {(0, 0): SQRT_HALF, (1, 1): SQRT_HALF},
    BellState.PHI_MINUS: {(0, 0): SQRT_HALF, (1, 1): -SQRT_HALF},
    BellState.PSI_PLUS: {(0, 1): SQRT_HALF, (1, 0): SQRT_HALF},
    BellState.PSI_MINUS: {(0, 1): SQRT_HALF, (1, 0): -SQRT_HALF},
}


def num_qubits(amps: np.ndarray) -> int:
    """Number of qubits of a state vector, validating the length."""
    size = amps.shape[0]
    n = size.bit_length() - 1
    if size != (1 << n) or n < 1:
        raise ValueError(f"state length {size} is not a power of two >= 2")
    return n


def _check_wire(q: int, n: int) -> None:
    if not 0 <= q < n:
        raise ValueError(f"qubit {q} out of bounds for a {n}-qubit register")


def state_norm(amps: np.ndarray) -> float:
    return float(np.linalg.norm(amps))


def prepare_z(bit: int) -> np.ndarray:
    """Single qubit in |0> or |1>."""
    if bit not in (0, 1):
        raise ValueError(f"bit must be 0 or 1, got {bit!r}")
    amps = np.zeros(2, dtype=complex)
    amps[bit] = 1.0
    return amps


def prepare_x(sign: int) -> np.ndarray:
    """Single qubit in |+> (sign=PLUS) or |-> (sign=MINUS)."""
    if sign not in (PLUS, MINUS):
        raise ValueError(f"sign must be PLUS (0) or MINUS (1), got {sign!r}")
    return np.array([SQRT_HALF, SQRT_HALF if sign == PLUS else -SQRT_HALF], dtype=complex)


def prepare_bell(state: BellState) -> np.ndarray:
    """Two qubits in the requested Bell state."""
    amps = np.zeros(4, dtype=complex)
    for (v1, v2), coeff in _BELL_COEFFS[state].items():
        amps[(v1 << 1) | v2] = coeff
    return amps


def tensor(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product; the qubits of ``a`` precede (are more significant
    than) the qubits of ``b``."""
    n = num_qubits(a) + num_qubits(b)
    if n > MAX_QUBITS:
        raise ValueError(f"register overflow: {n} qubits exceeds the cap of {MAX_QUBITS}")
    return (a[:, None] * b[None, :]).reshape(-1)


def _split(amps: np.ndarray, q: int) -> np.ndarray:
    """View of the state as (labels above q, q, labels below q)."""
    return amps.reshape(1 << q, 2, -1)


def apply_cnot(amps: np.ndarray, control: int, target: int) -> np.ndarray:
    """Flip ``target`` on every basis label whose ``control`` bit is 1."""
    n = num_qubits(amps)
    _check_wire(control, n)
    _check_wire(target, n)
    if control == target:
        raise ValueError("control and target must be distinct qubits")
    if amps.shape[0] <= _SMALL_DIM:
        c_mask = 1 << (n - 1 - control)
        t_mask = 1 << (n - 1 - target)
        out = amps.copy()
        for i in range(amps.shape[0]):
            if i & c_mask:
                out[i] = amps[i ^ t_mask]
        return out
    lo, hi = sorted((control, target))
    arr = amps.reshape(1 << lo, 2, 1 << (hi - lo - 1), 2, -1).copy()
    if control < target:
        tmp = arr[:, 1, :, 0, :].copy()
        arr[:, 1, :, 0, :] = arr[:, 1, :, 1, :]
        arr[:, 1, :, 1, :] = tmp
    else:
        tmp = arr[:, 0, :, 1, :].copy()
        arr[:, 0, :, 1, :] = arr[:, 1, :, 1, :]
        arr[:, 1, :, 1, :] = tmp
    return arr.reshape(-1)


def apply_hadamard(amps: np.ndarray, q: int) -> np.ndarray:
    """Hadamard on one qubit (the basis change used by X measurements)."""
    n = num_qubits(amps)
    _check_wire(q, n)
    if amps.shape[0] <= _SMALL_DIM:
        mask = 1 << (n - 1 - q)
        out = np.empty_like(amps)
        for i in range(amps.shape[0]):
            if i & mask:
                out[i] = (amps[i ^ mask] - amps[i]) * SQRT_HALF
            else:
                out[i] = (amps[i] + amps[i | mask]) * SQRT_HALF
        return out
    arr = _split(amps, q)
    out = np.empty_like(arr)
    a0 = arr[:, 0, :]
    a1 = arr[:, 1, :]
    out[:, 0, :] = (a0 + a1) * SQRT_HALF
    out[:, 1, :] = (a0 - a1) * SQRT_HALF
    return out.reshape(-1)


def measure_z(amps: np.ndarray, q: int, rng: np.random.Generator) -> tuple[int, np.ndarray]:
    """Projective Z measurement of one qubit.

    Parameters
    ----------
    amps : ndarray
        Unit-norm state vector.
    q : int
        Qubit to measure.
    rng : numpy.random.Generator
        Source of the single Born-rule draw.

    Returns
    -------
    (bit, collapsed)
        The sampled outcome and the renormalized post-measurement state.
    """
    n = num_qubits(amps)
    _check_wire(q, n)
    if amps.shape[0] <= _SMALL_DIM:
        mask = 1 << (n - 1 - q)
        p1 = 0.0
        for i in range(amps.shape[0]):
            if i & mask:
                a = amps[i]
                p1 += a.real * a.real + a.imag * a.imag
        bit = 1 if rng.random() < p1 else 0
        scale = 1.0 / math.sqrt(p1 if bit == 1 else 1.0 - p1)
        out = np.zeros_like(amps)
        want = mask if bit else 0
        for i in range(amps.shape[0]):
            if i & mask == want:
                out[i] = amps[i] * scale
        return bit, out
    arr = _split(amps, q)
    branch = arr[:, 1, :]
    p1 = float(np.sum((branch * branch.conj()).real))
    bit = 1 if rng.random() < p1 else 0
    prob = p1 if bit == 1 else 1.0 - p1
    out = np.zeros_like(arr)
    out[:, bit, :] = arr[:, bit, :] / math.sqrt(prob)
    return bit, out.reshape(-1)


def measure_x(amps: np.ndarray, q: int, rng: np.random.Generator) -> tuple[int, np.ndarray]:
    """Projective X measurement of one qubit.

    Implemented as a Hadamard-conjugated Z measurement; returns PLUS (0)
    for |+> and MINUS (1) for |->, with the collapsed state left in the
    corresponding X eigenstate.
    """
    rotated = apply_hadamard(amps, q)
    sign, collapsed = measure_z(rotated, q, rng)
    return sign, apply_hadamard(collapsed, q)


# Row v = BellState(v), column (v1 << 1) | v2 = pair basis label.
_BELL_MATRIX = np.array(
    [
        [SQRT_HALF, 0.0, 0.0, SQRT_HALF],
        [SQRT_HALF, 0.0, 0.0, -SQRT_HALF],
        [0.0, SQRT_HALF, SQRT_HALF, 0.0],
        [0.0, SQRT_HALF, -SQRT_HALF, 0.0],
    ],
    dtype=complex,
)


def _pair_blocks(amps: np.ndarray, q1: int, q2: int, n: int) -> np.ndarray:
    """State reorganized as a (4, rest) matrix: row (v1 << 1) | v2 holds the
    amplitudes with q1 = v1, q2 = v2."""
    arr = np.moveaxis(amps.reshape((2,) * n), (q1, q2), (0, 1))
    return arr.reshape(4, -1)


def _bell_overlaps(amps: np.ndarray, q1: int, q2: int) -> np.ndarray:
    """(4, rest) overlap coefficients: row v is <bell_v| applied to the
    (q1, q2) subsystem."""
    n = num_qubits(amps)
    _check_wire(q1, n)
    _check_wire(q2, n)
    if q1 == q2:
        raise ValueError("Bell measurement needs two distinct qubits")
    return _BELL_MATRIX.conj() @ _pair_blocks(amps, q1, q2, n)


def bell_probabilities(amps: np.ndarray, q1: int, q2: int) -> np.ndarray:
    """Born probabilities of the four Bell outcomes on qubits (q1, q2),
    ordered by ``BellState`` value."""
    overlaps = _bell_overlaps(amps, q1, q2)
    return (overlaps * overlaps.conj()).real.sum(axis=1)


def measure_bell(
    amps: np.ndarray, q1: int, q2: int, rng: np.random.Generator
) -> tuple[BellState, np.ndarray]:
    """Projective measurement of qubits (q1, q2) in the Bell basis.

    The outcome is sampled from the four Bell projector probabilities and
    the returned state is the renormalized collapse, with the pair left in
    the measured Bell state and the rest of the register updated
    accordingly.
    """
    n = num_qubits(amps)
    overlaps = _bell_overlaps(amps, q1, q2)
    probs = (overlaps * overlaps.conj()).real.sum(axis=1)
    u = rng.random() * probs.sum()
    cumulative = 0.0
    outcome = BellState.PSI_MINUS
    for variant in BellState:
        cumulative += probs[variant.value]
        if u < cumulative:
            outcome = variant
            break
    scaled = overlaps[outcome.value] / np.sqrt(probs[outcome.value])
    blocks = _BELL_MATRIX[outcome.value][:, None] * scaled[None, :]
    arr = blocks.reshape((2, 2) + (2,) * (n - 2))
    return outcome, np.moveaxis(arr, (0, 1), (q1, q2)).reshape(-1)


def amplitudes_close(amps: np.ndarray, expected: np.ndarray, tol: float) -> bool:
    """True when the two states agree entrywise within ``tol`` up to one
    global phase factor.

    The phase is read off the largest-magnitude entry of ``expected``, so
    orthogonal states and single-entry sign flips are reported as different
    while an overall phase (unobservable) is forgiven.
    """
    if amps.shape != expected.shape:
        raise ValueError(f"dimension mismatch: {amps.shape} vs {expected.shape}")
    i = int(np.argmax(np.abs(expected)))
    if abs(amps[i]) < 1e-300 or abs(expected[i]) < 1e-300:
        phase = 1.0
    else:
        phase = amps[i] / expected[i]
        phase = phase / abs(phase)
    return bool(np.max(np.abs(amps - phase * expected)) <= tol)


class Register:
    """Mutable qubit register for one protocol position.

    Thin stateful wrapper over the kernel ops: qubits can only be adjoined
    (never removed), so wire indices handed out by :meth:`adjoin` stay
    valid for the life of the register.  Adversary taps are expected to
    act on registers exclusively through these methods, never by reading
    amplitudes, so that every bit an attacker learns comes from a
    measurement outcome.
    """

    def __init__(self, amps: np.ndarray):
        self.amps = np.asarray(amps, dtype=complex)
        num_qubits(self.amps)  # validates the length

    @property
    def n(self) -> int:
        return num_qubits(self.amps)

    def adjoin(self, amps: np.ndarray) -> int:
        """Tensor a fresh (sub)state onto the register; returns the wire
        index of its first qubit."""
        wire = self.n
        self.amps = tensor(self.amps, amps)
        return wire

    def cnot(self, control: int, target: int) -> None:
        self.amps = apply_cnot(self.amps, control, target)

    def hadamard(self, wire: int) -> None:
        self.amps = apply_hadamard(self.amps, wire)

    def measure_z(self, wire: int, rng: np.random.Generator) -> int:
        bit, self.amps = measure_z(self.amps, wire, rng)
        return bit

    def measure_x(self, wire: int, rng: np.random.Generator) -> int:
        sign, self.amps = measure_x(self.amps, wire, rng)
        return sign

    def measure_bell(self, w1: int, w2: int, rng: np.random.Generator) -> BellState:
        outcome, self.amps = measure_bell(self.amps, w1, w2, rng)
        return outcome
