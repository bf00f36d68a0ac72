"""Exact statevector simulation of the layered number-conserving ansatz.

States are dense complex arrays of 2^M amplitudes; bit j of the basis index
(least-significant bit = qubit 0) is the value of qubit j, and |1> is the
+1 eigenstate of Z (see ``pauli``).  No shot noise anywhere: expectation
values are exact quadratic forms.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .pauli import PauliSum, word_masks, word_phases


class NonHermitianError(ValueError):
    """Expectation value of a supposedly Hermitian operator came out complex."""


def num_qubits_of(amplitudes: np.ndarray) -> int:
    m = int(np.log2(len(amplitudes)) + 0.5)
    if 1 << m != len(amplitudes):
        raise ValueError(f"amplitude array length {len(amplitudes)} is not a power of 2")
    return m


def neel_state(num_qubits: int) -> np.ndarray:
    """|1010...>: qubit j occupied for even j."""
    if num_qubits < 1:
        raise ValueError("need at least one qubit")
    psi = np.zeros(1 << num_qubits, dtype=np.complex128)
    index = sum(1 << j for j in range(0, num_qubits, 2))
    psi[index] = 1.0
    return psi


def _rz_inplace(psi: np.ndarray, qubit: int, theta: float) -> None:
    # exp(-i theta Z/2): |1> (Z=+1) gets e^{-i theta/2}, |0> gets e^{+i theta/2}
    view = psi.reshape(-1, 2, 1 << qubit)
    view[:, 1, :] *= np.exp(-0.5j * theta)
    view[:, 0, :] *= np.exp(+0.5j * theta)


def _xxyy_inplace(psi: np.ndarray, qubit: int, theta: float) -> None:
    # exp(-i theta (XX+YY)/2) on qubits (k, k+1): rotation in the span of
    # |01> and |10>; |00> and |11> are untouched, so Hamming weight is
    # conserved.
    view = psi.reshape(-1, 2, 2, 1 << qubit)
    a = view[:, 0, 1, :]  # qubit k = 1, qubit k+1 = 0
    b = view[:, 1, 0, :]  # qubit k = 0, qubit k+1 = 1
    c, s = np.cos(theta), np.sin(theta)
    new_a = c * a - 1j * s * b
    new_b = c * b - 1j * s * a
    view[:, 0, 1, :] = new_a
    view[:, 1, 0, :] = new_b


def apply_rz(psi: np.ndarray, qubit: int, theta: float) -> np.ndarray:
    """Single-qubit Z rotation exp(-i theta Z_j / 2)."""
    m = num_qubits_of(psi)
    if not 0 <= qubit < m:
        raise ValueError(f"qubit {qubit} out of range for {m} qubits")
    out = psi.copy()
    _rz_inplace(out, qubit, theta)
    return out


def apply_xxyy(psi: np.ndarray, qubit: int, theta: float) -> np.ndarray:
    """Two-qubit entangler exp(-i theta (X_k X_{k+1} + Y_k Y_{k+1}) / 2)."""
    m = num_qubits_of(psi)
    if not 0 <= qubit < m - 1:
        raise ValueError(f"pair ({qubit},{qubit + 1}) out of range for {m} qubits")
    out = psi.copy()
    _xxyy_inplace(out, qubit, theta)
    return out


@dataclass(frozen=True)
class LayerAngles:
    """Angles of one ansatz layer: M-1 entangling and M single-qubit angles."""

    theta_e: np.ndarray
    theta_s: np.ndarray

    def validate(self, num_qubits: int) -> None:
        if len(self.theta_e) != num_qubits - 1:
            raise ValueError(
                f"theta_e has {len(self.theta_e)} entries, expected {num_qubits - 1}"
            )
        if len(self.theta_s) != num_qubits:
            raise ValueError(
                f"theta_s has {len(self.theta_s)} entries, expected {num_qubits}"
            )


def _layer_inplace(psi: np.ndarray, m: int, layer: LayerAngles) -> None:
    # entangling brick pattern: even pairs first, then odd pairs, then Z
    # rotations (rightmost factor of the layer unitary acts first)
    for k in range(0, m - 1, 2):
        _xxyy_inplace(psi, k, float(layer.theta_e[k]))
    for k in range(1, m - 1, 2):
        _xxyy_inplace(psi, k, float(layer.theta_e[k]))
    for j in range(m):
        _rz_inplace(psi, j, float(layer.theta_s[j]))


def apply_ansatz(psi0: np.ndarray, layers: Sequence[LayerAngles]) -> np.ndarray:
    """Apply the layered ansatz circuit to ``psi0``."""
    m = num_qubits_of(psi0)
    for layer in layers:
        layer.validate(m)
    psi = psi0.copy()
    for layer in layers:
        _layer_inplace(psi, m, layer)
    return psi


class CompiledOperator:
    """A PauliSum preprocessed for fast repeated application to statevectors.

    Diagonal (I/Z-only) terms are folded into a single diagonal; every
    off-diagonal word keeps its flip mask and a per-state phase table.
    """

    def __init__(self, op: PauliSum, num_qubits: int | None = None):
        m = num_qubits if num_qubits is not None else op.num_qubits
        if m != op.num_qubits:
            raise ValueError("qubit-count mismatch")
        self.num_qubits = m
        self.source = op.simplify()
        dim = 1 << m
        states = np.arange(dim, dtype=np.int64)
        diag = np.zeros(dim, dtype=np.complex128)
        offdiag: list[tuple[complex, np.ndarray, np.ndarray]] = []
        for t in self.source:
            flip, _, _ = word_masks(t.word)
            if flip == 0:
                diag += t.coeff * word_phases(t.word, states)
            else:
                src = states ^ flip
                offdiag.append((t.coeff, src, word_phases(t.word, src)))
        self._diag = diag
        self._offdiag = offdiag

    def apply(self, psi: np.ndarray) -> np.ndarray:
        out = self._diag * psi
        for coeff, src, phases in self._offdiag:
            out += coeff * phases * psi[src]
        return out

    def expectation_raw(self, psi: np.ndarray) -> complex:
        return complex(np.vdot(psi, self.apply(psi)))


def compile_operator(op: PauliSum | CompiledOperator) -> CompiledOperator:
    return op if isinstance(op, CompiledOperator) else CompiledOperator(op)


def expectation(psi: np.ndarray, op: PauliSum | CompiledOperator, imag_tol: float = 1e-10) -> float:
    """<psi|op|psi> for Hermitian ``op``; rejects significant imaginary parts."""
    c = compile_operator(op)
    if 1 << c.num_qubits != len(psi):
        raise ValueError("state and operator dimensions differ")
    val = c.expectation_raw(psi)
    if abs(val.imag) > imag_tol:
        raise NonHermitianError(
            f"expectation has imaginary part {val.imag:.3e} (operator not Hermitian?)"
        )
    return val.real


def overlap(a: np.ndarray, b: np.ndarray) -> float:
    """|<a|b>|^2, insensitive to global phase."""
    if len(a) != len(b):
        raise ValueError("state dimensions differ")
    return float(abs(np.vdot(a, b)) ** 2)


def dump_statevector(psi: np.ndarray, threshold: float = 1e-12) -> list[str]:
    """Text lines ``index re im`` for amplitudes above ``threshold`` (debugging)."""
    lines = []
    for idx in np.nonzero(np.abs(psi) > threshold)[0]:
        amp = psi[idx]
        lines.append(f"{int(idx)} {amp.real:.17g} {amp.imag:.17g}")
    return lines
