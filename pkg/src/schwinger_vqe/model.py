"""Spin Hamiltonian of the multi-flavor lattice Schwinger model.

The gauge field of the staggered-fermion Hamiltonian is eliminated through
the Gauss-law constraint (open boundaries, zero boundary field and zero
static charges), leaving the dimensionless operator

    W = hopping(x) + sum_{n,f} (mu_f (-1)^n + nu_f) n_{n,f}
        + sum_{n<N-1} (sum_{k<=n} Q_k)^2

acting on N*F fermionic modes, with staggered charge
``Q_k = sum_f n_{k,f} - F`` on odd sites and ``sum_f n_{k,f}`` on even
sites.  Modes map to qubits in site-major order, ``j = n*F + f``, and the
Jordan-Wigner transform turns each hopping term into an X/Y string with Z
on the F-1 qubits strictly between the endpoints.

Phase convention: string phases are folded into the coefficients so every
term is Hermitian with a real coefficient; the overall orientation is
fixed so the resulting matrix equals the occupation-basis fermionic matrix
whose hopping element is ``x * (-1)^(number of occupied modes between the
endpoints)`` (see ``eigensolver.oracle_hamiltonian``).  For odd F this is
the familiar ``(x/2) (X Z..Z X + Y Z..Z Y)`` form.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .pauli import PauliSum


@dataclass(frozen=True)
class ModelParams:
    """Lattice and coupling parameters.

    N:  number of lattice sites (positive even integer).
    F:  number of fermion flavors.
    x:  dimensionless hopping strength, x = 1/(a g)^2.
    mu: per-flavor dimensionless masses, length F.
    nu: per-flavor dimensionless chemical potentials, length F.
    """

    N: int
    F: int = 3
    x: float = 1.0
    mu: tuple[float, ...] = field(default=None)  # type: ignore[assignment]
    nu: tuple[float, ...] = field(default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        if self.N < 2 or self.N % 2 != 0:
            raise ValueError(f"N must be an even integer >= 2, got {self.N}")
        if self.F < 1:
            raise ValueError(f"F must be positive, got {self.F}")
        if self.x < 0:
            raise ValueError(f"x must be non-negative, got {self.x}")
        object.__setattr__(
            self, "mu", self._flavor_tuple(self.mu, "mu")
        )
        object.__setattr__(
            self, "nu", self._flavor_tuple(self.nu, "nu")
        )

    def _flavor_tuple(self, values, name: str) -> tuple[float, ...]:
        if values is None:
            return (0.0,) * self.F
        values = tuple(float(v) for v in values)
        if len(values) != self.F:
            raise ValueError(f"{name} must have {self.F} entries, got {len(values)}")
        return values

    @property
    def num_qubits(self) -> int:
        return self.N * self.F

    def qubit(self, site: int, flavor: int) -> int:
        """Site-major qubit index j = n*F + f."""
        return site * self.F + flavor


def _number_op(num_qubits: int, j: int) -> PauliSum:
    """Occupation (Z_j + I)/2 under the |1> = occupied convention."""
    return PauliSum.single(num_qubits, j, "Z", 0.5) + PauliSum.identity(num_qubits, 0.5)


def charge_operator(p: ModelParams, site: int) -> PauliSum:
    """Staggered charge Q_n = sum_f n_{n,f} - F for odd n."""
    M = p.num_qubits
    q = PauliSum.zero(M)
    for f in range(p.F):
        q = q + _number_op(M, p.qubit(site, f))
    if site % 2 == 1:
        q = q - PauliSum.identity(M, p.F)
    return q.simplify()


def build_hamiltonian(p: ModelParams) -> PauliSum:
    """Gauge-eliminated spin Hamiltonian W as a simplified Hermitian PauliSum."""
    M = p.num_qubits
    h = PauliSum.zero(M)

    # hopping: for each link (n, n+1) and flavor f, an X/Y string with Z on
    # the F-1 qubits strictly between; (-1)^(F-1) fixes the orientation to
    # the fermionic oracle convention (+1 for the physical odd-F case).
    sign = (-1.0) ** (p.F - 1)
    for n in range(p.N - 1):
        for f in range(p.F):
            j1, j2 = p.qubit(n, f), p.qubit(n + 1, f)
            for end in "XY":
                chars = ["I"] * M
                chars[j1] = end
                chars[j2] = end
                for k in range(j1 + 1, j2):
                    chars[k] = "Z"
                h = h + PauliSum(M, [(sign * p.x / 2.0, "".join(chars))])

    # mass and chemical potential
    for n in range(p.N):
        for f in range(p.F):
            c = p.mu[f] * (-1.0) ** n + p.nu[f]
            if c != 0.0:
                h = h + c * _number_op(M, p.qubit(n, f))

    # electric energy: sum over links of (sum of charges to the left)^2
    charges = [charge_operator(p, n) for n in range(p.N)]
    left_sum = PauliSum.zero(M)
    for n in range(p.N - 1):
        left_sum = (left_sum + charges[n]).simplify()
        h = h + left_sum @ left_sum

    return h.simplify().real_coeffs()


def total_charge_operator(p: ModelParams) -> PauliSum:
    """Total staggered charge; equals (number of up spins) - M/2 for even N."""
    M = p.num_qubits
    q = PauliSum.zero(M)
    for n in range(p.N):
        q = q + charge_operator(p, n)
    return q.simplify()


def delta_n_operator(p: ModelParams, f: int) -> PauliSum:
    """Particle-number difference between flavor ``f`` and flavor 1.

    Returns (1/2) sum_n (Z_{nF+f} - Z_{nF+1}); the zero operator for f = 1.
    """
    if not 0 <= f < p.F:
        raise ValueError(f"flavor index {f} out of range for F={p.F}")
    if p.F < 2:
        raise ValueError("delta_n_operator requires at least two flavors")
    M = p.num_qubits
    op = PauliSum.zero(M)
    for n in range(p.N):
        op = op + PauliSum.single(M, p.qubit(n, f), "Z", 0.5)
        op = op - PauliSum.single(M, p.qubit(n, 1), "Z", 0.5)
    return op.simplify()


class SymmetryOp:
    """Spin flip on every qubit followed by reflection about the chain center.

    Acts on basis states as the permutation ``s -> reverse_bits(~s)`` and on
    Pauli words by conjugation ``sigma^a_j -> (X sigma^a X)_{M-1-j}``.  It is
    an involution.  The Hamiltonian commutes with it on the zero-total-charge
    sector when ``nu_f = -nu_{F-1-f}`` and ``mu_f = mu_{F-1-f}``; on the full
    space the electric term picks up total-charge cross terms, so the
    commutator must be evaluated within a charge sector.
    """

    def __init__(self, num_qubits: int):
        self.num_qubits = num_qubits
        states = np.arange(1 << num_qubits, dtype=np.int64)
        flipped = states ^ ((1 << num_qubits) - 1)
        perm = np.zeros_like(states)
        for j in range(num_qubits):
            bit = (flipped >> j) & 1
            perm |= bit << (num_qubits - 1 - j)
        self._perm = perm

    @property
    def permutation(self) -> np.ndarray:
        """Index permutation: S|s> = |perm[s]>."""
        return self._perm

    def apply(self, amplitudes: np.ndarray) -> np.ndarray:
        out = np.empty_like(amplitudes)
        out[self._perm] = amplitudes
        return out

    def conjugate(self, op: PauliSum) -> PauliSum:
        """Return S op S^dagger."""
        if op.num_qubits != self.num_qubits:
            raise ValueError("qubit-count mismatch")
        terms = []
        for t in op:
            sign = 1.0
            chars = ["I"] * self.num_qubits
            for j, ch in enumerate(t.word):
                if ch in "YZ":
                    sign = -sign
                chars[self.num_qubits - 1 - j] = ch
            terms.append((sign * t.coeff, "".join(chars)))
        return PauliSum(self.num_qubits, terms).simplify()

    def expectation(self, amplitudes: np.ndarray) -> complex:
        return complex(np.vdot(amplitudes, self.apply(amplitudes)))


def symmetry_operator(p: ModelParams) -> SymmetryOp:
    return SymmetryOp(p.num_qubits)


def is_symmetric_point(mu: Sequence[float], nu: Sequence[float], tol: float = 0.0) -> bool:
    """True when mu_f = mu_{F-1-f} and nu_f = -nu_{F-1-f} for all flavors."""
    F = len(mu)
    if len(nu) != F:
        raise ValueError("mu and nu must have equal length")
    return all(
        abs(mu[f] - mu[F - 1 - f]) <= tol and abs(nu[f] + nu[F - 1 - f]) <= tol
        for f in range(F)
    )
