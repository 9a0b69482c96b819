"""Shared test oracles.

These recompute measurement probabilities by explicit projector algebra
(full matrices built with kron, little-endian-free direct bit loops), on
purpose NOT reusing the kernel's reshape tricks, so kernel bugs cannot
cancel out in the assertions.
"""

import numpy as np
import pytest

SQRT_HALF = 1.0 / np.sqrt(2.0)


def bit_of(index: int, qubit: int, n: int) -> int:
    """Bit of ``qubit`` (qubit 0 = most significant) in basis ``index``."""
    return (index >> (n - 1 - qubit)) & 1


def oracle_z_probability(amps: np.ndarray, qubit: int, value: int) -> float:
    """P(measuring ``qubit`` in Z gives ``value``), by direct enumeration."""
    n = amps.shape[0].bit_length() - 1
    return float(
        sum(abs(a) ** 2 for i, a in enumerate(amps) if bit_of(i, qubit, n) == value)
    )


def embed_operator(op: np.ndarray, qubits: list[int], n: int) -> np.ndarray:
    """Expand ``op`` acting on ``qubits`` to the full 2^n space via kron and
    an explicit basis permutation."""
    k = len(qubits)
    dim = 1 << n
    full = np.zeros((dim, dim), dtype=complex)
    rest = [q for q in range(n) if q not in qubits]
    for col in range(dim):
        sub_col = 0
        for pos, q in enumerate(qubits):
            sub_col = (sub_col << 1) | bit_of(col, q, n)
        for sub_row in range(1 << k):
            coeff = op[sub_row, sub_col]
            if coeff == 0:
                continue
            row = 0
            for q in rest:
                row |= bit_of(col, q, n) << (n - 1 - q)
            for pos, q in enumerate(qubits):
                row |= ((sub_row >> (k - 1 - pos)) & 1) << (n - 1 - q)
            full[row, col] += coeff
    return full


def oracle_projector_probability(amps: np.ndarray, basis_vec: np.ndarray, qubits: list[int]) -> float:
    """P of outcome ``basis_vec`` (a state of the measured subsystem) via an
    explicitly embedded projector matrix."""
    n = amps.shape[0].bit_length() - 1
    proj = np.outer(basis_vec, basis_vec.conj())
    full = embed_operator(proj, qubits, n)
    return float(np.real(amps.conj() @ full @ amps))


X_PLUS = np.array([SQRT_HALF, SQRT_HALF], dtype=complex)
X_MINUS = np.array([SQRT_HALF, -SQRT_HALF], dtype=complex)

BELL_VECTORS = {
    "phi+": np.array([SQRT_HALF, 0, 0, SQRT_HALF], dtype=complex),
    "phi-": np.array([SQRT_HALF, 0, 0, -SQRT_HALF], dtype=complex),
    "psi+": np.array([0, SQRT_HALF, SQRT_HALF, 0], dtype=complex),
    "psi-": np.array([0, SQRT_HALF, -SQRT_HALF, 0], dtype=complex),
}


def random_state(n: int, rng: np.random.Generator) -> np.ndarray:
    amps = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    return amps / np.linalg.norm(amps)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
