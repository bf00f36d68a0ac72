"""Independent dense reference implementations used only by tests.

Everything here is built from explicit 2x2 matrices and Kronecker
products, deliberately sharing no code with the package's mask/bit
machinery, so agreement is a real cross-check.

Conventions match the package docs: bit j of the basis index is qubit j
(LSB = qubit 0) and |1> is the +1 eigenstate of Z.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg

I2 = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, 1j], [-1j, 0]], dtype=complex)  # Y|1> = i|0>
PAULI_Z = np.array([[-1, 0], [0, 1]], dtype=complex)    # Z|1> = +|1>
SINGLE = {"I": I2, "X": PAULI_X, "Y": PAULI_Y, "Z": PAULI_Z}


def dense_word(word: str) -> np.ndarray:
    """Dense matrix of a Pauli word; qubit 0 is the least significant bit."""
    mat = np.eye(1, dtype=complex)
    for ch in reversed(word):
        mat = np.kron(mat, SINGLE[ch])
    return mat


def dense_operator(terms, num_qubits: int) -> np.ndarray:
    """Dense matrix of an iterable of (coeff, word) pairs or PauliTerms."""
    dim = 1 << num_qubits
    mat = np.zeros((dim, dim), dtype=complex)
    for t in terms:
        coeff, word = (t.coeff, t.word) if hasattr(t, "word") else t
        mat += coeff * dense_word(word)
    return mat


def embedded(single: np.ndarray, qubit: int, num_qubits: int) -> np.ndarray:
    word_mats = [I2] * num_qubits
    word_mats[qubit] = single
    mat = np.eye(1, dtype=complex)
    for m in reversed(word_mats):
        mat = np.kron(mat, m)
    return mat


def dense_rz(num_qubits: int, qubit: int, theta: float) -> np.ndarray:
    gen = embedded(PAULI_Z, qubit, num_qubits)
    return scipy.linalg.expm(-0.5j * theta * gen)


def dense_xxyy(num_qubits: int, qubit: int, theta: float) -> np.ndarray:
    xx = embedded(PAULI_X, qubit, num_qubits) @ embedded(PAULI_X, qubit + 1, num_qubits)
    yy = embedded(PAULI_Y, qubit, num_qubits) @ embedded(PAULI_Y, qubit + 1, num_qubits)
    return scipy.linalg.expm(-0.5j * theta * (xx + yy))


def dense_layer(num_qubits: int, theta_e: np.ndarray, theta_s: np.ndarray) -> np.ndarray:
    """Unitary of one ansatz layer: even pairs, odd pairs, then Z rotations."""
    u = np.eye(1 << num_qubits, dtype=complex)
    for k in range(0, num_qubits - 1, 2):
        u = dense_xxyy(num_qubits, k, float(theta_e[k])) @ u
    for k in range(1, num_qubits - 1, 2):
        u = dense_xxyy(num_qubits, k, float(theta_e[k])) @ u
    for j in range(num_qubits):
        u = dense_rz(num_qubits, j, float(theta_s[j])) @ u
    return u


def fd_gradient(fun, x: np.ndarray, step: float = 1e-5) -> np.ndarray:
    """Central finite differences."""
    g = np.zeros_like(x, dtype=float)
    for i in range(len(x)):
        xp, xm = x.copy(), x.copy()
        xp[i] += step
        xm[i] -= step
        g[i] = (fun(xp) - fun(xm)) / (2.0 * step)
    return g


def popcount(n: int) -> int:
    return bin(n).count("1")


def basis_index(bitstring: str) -> int:
    """Index of |b0 b1 ...> written with qubit 0 leftmost."""
    return sum(1 << j for j, ch in enumerate(bitstring) if ch == "1")


def delta_n_bits(state_index: int, N: int, F: int, f: int) -> int:
    """Bit-counting particle-number difference on one basis state."""
    total = 0
    for n in range(N):
        total += (state_index >> (n * F + f)) & 1
        total -= (state_index >> (n * F + 1)) & 1
    return total


def neel_diagonal_energy(p) -> float:
    """<Neel|W|Neel> by direct bit arithmetic on the |1010...> pattern."""
    occ = lambda j: 1 if j % 2 == 0 else 0
    energy = 0.0
    for n in range(p.N):
        for f in range(p.F):
            energy += (p.mu[f] * (-1) ** n + p.nu[f]) * occ(n * p.F + f)
    left = 0
    for n in range(p.N - 1):
        q = sum(occ(n * p.F + f) for f in range(p.F)) - (p.F if n % 2 else 0)
        left += q
        energy += left**2
    return energy
