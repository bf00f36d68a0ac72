"""Exact ground states in fixed-charge sectors.

Two independent routes to the same matrix are kept deliberately separate:

* ``sector_matrix`` restricts the Jordan-Wigner ``PauliSum`` to a
  fixed-Hamming-weight basis (total charge = weight - M/2);
* ``oracle_hamiltonian`` rebuilds the fermionic Hamiltonian directly from
  occupation-number bit arithmetic with explicit anticommutation parities,
  never touching the Pauli representation.

Their agreement validates the spin construction end to end.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np
import scipy.linalg
import scipy.sparse

from .model import ModelParams
from .pauli import PauliSum, word_masks, word_phases

DENSE_CUTOFF = 4096
KRYLOV_CAP = 300
RITZ_TOL = 1e-12
RESIDUAL_TOL = 1e-8
LEAKAGE_TOL = 1e-10
DEGENERACY_TOL = 1e-6


class ConvergenceError(RuntimeError):
    pass


class SectorLeakageError(ValueError):
    """Operator does not preserve the requested charge sector."""


@dataclass(frozen=True)
class SectorBasis:
    """All M-bit states of Hamming weight ``weight``, ascending."""

    num_qubits: int
    weight: int
    states: np.ndarray

    @property
    def size(self) -> int:
        return len(self.states)

    def index_of(self, states: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Positions of ``states`` in the basis plus a membership mask."""
        pos = np.searchsorted(self.states, states)
        pos_c = np.minimum(pos, self.size - 1)
        found = self.states[pos_c] == states
        return pos_c, found

    def embed(self, vec: np.ndarray) -> np.ndarray:
        """Lift a sector vector into the full 2^M space."""
        full = np.zeros(1 << self.num_qubits, dtype=np.complex128)
        full[self.states] = vec
        return full

    def project(self, full: np.ndarray) -> np.ndarray:
        return full[self.states]


def sector_basis(num_qubits: int, weight: int) -> SectorBasis:
    if not 0 <= weight <= num_qubits:
        raise ValueError(f"weight {weight} out of range for {num_qubits} qubits")
    if num_qubits > 24:
        raise ValueError("sector enumeration limited to 24 qubits")
    all_states = np.arange(1 << num_qubits, dtype=np.int64)
    mask = np.bitwise_count(all_states.astype(np.uint64)) == weight
    states = all_states[mask]
    assert len(states) == comb(num_qubits, weight)
    return SectorBasis(num_qubits, weight, states)


def zero_charge_basis(p: ModelParams) -> SectorBasis:
    """The physical sector: total charge 0 means Hamming weight M/2."""
    return sector_basis(p.num_qubits, p.num_qubits // 2)


def sector_matrix(op: PauliSum, basis: SectorBasis) -> scipy.sparse.csr_matrix:
    """P op P on the sector, as a sparse matrix.

    Per-word contributions that leave the sector are dropped; for a
    charge-conserving operator they cancel exactly in the sum, so the
    restriction is the honest sector Hamiltonian.
    """
    if op.num_qubits != basis.num_qubits:
        raise ValueError("qubit-count mismatch")
    states = basis.states
    cols_all: list[np.ndarray] = []
    rows_all: list[np.ndarray] = []
    vals_all: list[np.ndarray] = []
    for t in op.simplify():
        flip, _, _ = word_masks(t.word)
        if flip == 0:
            cols = np.arange(basis.size)
            rows = cols
            vals = t.coeff * word_phases(t.word, states)
        else:
            targets = states ^ flip
            rows, found = basis.index_of(targets)
            cols = np.nonzero(found)[0]
            rows = rows[found]
            vals = t.coeff * word_phases(t.word, states[cols])
        cols_all.append(cols)
        rows_all.append(rows)
        vals_all.append(np.asarray(vals, dtype=np.complex128))
    mat = scipy.sparse.coo_matrix(
        (np.concatenate(vals_all), (np.concatenate(rows_all), np.concatenate(cols_all))),
        shape=(basis.size, basis.size),
    ).tocsr()
    if abs(mat.imag).max() < 1e-14:
        return mat.real
    return mat


def check_sector_invariance(
    op: PauliSum, basis: SectorBasis, seed: int = 7, tol: float = LEAKAGE_TOL
) -> None:
    """Verify ||P_perp op P v|| <= tol for a random sector vector v."""
    rng = np.random.default_rng(seed)
    v = rng.normal(size=basis.size)
    v /= np.linalg.norm(v)
    full = basis.embed(v)
    from .simulator import compile_operator  # local import avoids a cycle

    out = compile_operator(op).apply(full)
    out[basis.states] = 0.0
    leak = float(np.linalg.norm(out))
    if leak > tol:
        raise SectorLeakageError(
            f"operator leaks out of the weight-{basis.weight} sector (norm {leak:.3e})"
        )


@dataclass(frozen=True)
class SpectrumResult:
    """Lowest eigenpairs; vectors live in the full 2^M space."""

    energies: np.ndarray
    vectors: np.ndarray  # shape (k, 2^M)
    sector_weight: int

    @property
    def gap(self) -> float | None:
        if len(self.energies) < 2:
            return None
        return float(self.energies[1] - self.energies[0])

    def ground_energy(self) -> float:
        return float(self.energies[0])


def _fix_phase(vec: np.ndarray) -> np.ndarray:
    pivot = vec[np.argmax(np.abs(vec))]
    if pivot == 0:
        return vec
    return vec * (abs(pivot) / pivot)


def _lanczos_lowest(
    mat: scipy.sparse.spmatrix,
    k: int,
    seed: int = 11,
    cap: int = KRYLOV_CAP,
) -> tuple[np.ndarray, np.ndarray]:
    """Lanczos with full reorthogonalization for the k lowest eigenpairs."""
    dim = mat.shape[0]
    real = not np.iscomplexobj(mat.data)
    dtype = np.float64 if real else np.complex128
    rng = np.random.default_rng(seed)

    def fresh_vector() -> np.ndarray:
        v = rng.normal(size=dim).astype(dtype)
        if not real:
            v = v + 1j * rng.normal(size=dim)
        return v

    def reorthogonalize(w: np.ndarray, basis: list[np.ndarray]) -> np.ndarray:
        for _ in range(2):  # two passes of classical Gram-Schmidt
            for u in basis:
                w = w - np.vdot(u, w) * u
        return w

    v = fresh_vector()
    v /= np.linalg.norm(v)
    V: list[np.ndarray] = [v]
    alphas: list[float] = []
    betas: list[float] = []  # beta[j] couples V[j] and V[j+1]
    prev_ground = np.inf

    while len(V) <= cap:
        v = V[-1]
        w = mat @ v
        if betas:
            w = w - betas[-1] * V[-2]
        a = float(np.vdot(v, w).real)
        alphas.append(a)
        w = w - a * v
        w = reorthogonalize(w, V)
        b = float(np.linalg.norm(w))

        m = len(alphas)
        ev, evec = scipy.linalg.eigh_tridiagonal(
            np.array(alphas), np.array(betas[: m - 1])
        )
        n_have = min(k, m)
        ground = ev[0]
        residuals = b * np.abs(evec[-1, :n_have])
        done_all = m >= k and np.all(residuals < RESIDUAL_TOL)
        ground_settled = abs(ground - prev_ground) < RITZ_TOL
        prev_ground = ground
        if m >= dim or (ground_settled and done_all):
            if m >= dim or done_all:
                vectors = np.stack(V, axis=1) @ evec[:, :n_have]
                return ev[:n_have], vectors.T
        if b < 1e-13:
            # invariant subspace exhausted: deflate with a fresh direction
            w = reorthogonalize(fresh_vector(), V)
            nb = np.linalg.norm(w)
            if nb < 1e-13:
                vectors = np.stack(V, axis=1) @ evec[:, :n_have]
                return ev[:n_have], vectors.T
            w /= nb
            betas.append(0.0)
            V.append(w)
        else:
            betas.append(b)
            V.append(w / b)

    raise ConvergenceError(
        f"Lanczos did not converge within {cap} iterations "
        f"(last residuals {residuals})"
    )


def ground_state(
    h: PauliSum,
    basis: SectorBasis,
    k: int = 4,
    check_invariance: bool = True,
    seed: int = 11,
) -> SpectrumResult:
    """Lowest-k eigenpairs of ``h`` restricted to the charge sector.

    Dense solve below DENSE_CUTOFF states, Lanczos with full
    reorthogonalization above.  Eigenvector phases are fixed by making the
    largest-magnitude amplitude real positive.
    """
    if k < 1:
        raise ValueError("k must be positive")
    if check_invariance:
        check_sector_invariance(h, basis)
    mat = sector_matrix(h, basis)
    k_eff = min(k, basis.size)
    if basis.size <= DENSE_CUTOFF:
        dense = mat.toarray()
        energies, vecs = scipy.linalg.eigh(dense)
        energies = energies[:k_eff]
        vecs = vecs[:, :k_eff].T
    else:
        energies, vecs = _lanczos_lowest(mat, k_eff, seed=seed)

    for i in range(k_eff):
        resid = float(np.linalg.norm(mat @ vecs[i] - energies[i] * vecs[i]))
        if resid > RESIDUAL_TOL:
            raise ConvergenceError(
                f"eigenpair {i} residual {resid:.3e} exceeds {RESIDUAL_TOL}"
            )
    overlaps = vecs.conj() @ vecs.T
    if np.abs(overlaps - np.eye(k_eff)).max() > 1e-10:
        raise ConvergenceError("eigenvectors are not orthonormal")

    full_vecs = np.stack([_fix_phase(basis.embed(vecs[i])) for i in range(k_eff)])
    return SpectrumResult(
        energies=np.asarray(energies, dtype=float),
        vectors=full_vecs,
        sector_weight=basis.weight,
    )


def oracle_hamiltonian(p: ModelParams, basis: SectorBasis) -> scipy.sparse.csr_matrix:
    """Fermionic occupation-basis matrix of W on the sector.

    Independent of the Jordan-Wigner route: hopping elements carry the
    anticommutation sign (-1)^(occupied modes strictly between the
    endpoints) with amplitude x; mass, chemical-potential, and electric
    terms are diagonal bit arithmetic.
    """
    if basis.num_qubits != p.num_qubits:
        raise ValueError("basis does not match model size")
    states = basis.states
    n_states = basis.size
    M, N, F = p.num_qubits, p.N, p.F

    bits = ((states[:, None] >> np.arange(M)[None, :]) & 1).astype(np.int64)

    coeffs = np.array(
        [p.mu[f] * (-1.0) ** n + p.nu[f] for n in range(N) for f in range(F)]
    )
    diag = bits @ coeffs

    site_occ = bits.reshape(n_states, N, F).sum(axis=2)
    stagger = np.where(np.arange(N) % 2 == 1, F, 0)
    charges = site_occ - stagger[None, :]
    left_sums = np.cumsum(charges, axis=1)[:, : N - 1]
    diag = diag + (left_sums.astype(float) ** 2).sum(axis=1)

    rows = [np.arange(n_states)]
    cols = [np.arange(n_states)]
    vals = [diag]

    for n in range(N - 1):
        for f in range(F):
            j1, j2 = p.qubit(n, f), p.qubit(n + 1, f)
            move = (1 << j1) | (1 << j2)
            between = 0
            for kq in range(j1 + 1, j2):
                between |= 1 << kq
            occ1 = bits[:, j1]
            occ2 = bits[:, j2]
            hoppable = occ1 != occ2
            src = np.nonzero(hoppable)[0]
            if len(src) == 0:
                continue
            targets = states[src] ^ move
            pos, found = basis.index_of(targets)
            assert found.all(), "hopping left the fixed-weight sector"
            parity = np.bitwise_count(
                (states[src].astype(np.uint64)) & np.uint64(between)
            ).astype(np.int64)
            amp = p.x * np.where(parity % 2 == 0, 1.0, -1.0)
            rows.append(pos)
            cols.append(src)
            vals.append(amp)

    return scipy.sparse.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(n_states, n_states),
    ).tocsr()


def ground_space_overlap(
    psi: np.ndarray,
    spectrum: SpectrumResult,
    degeneracy_tol: float = DEGENERACY_TOL,
) -> float:
    """Squared projection of ``psi`` onto the (possibly degenerate) ground space."""
    e0 = spectrum.energies[0]
    total = 0.0
    for e, v in zip(spectrum.energies, spectrum.vectors):
        if e - e0 <= degeneracy_tol:
            total += abs(np.vdot(v, psi)) ** 2
    if total > 1.0 + 1e-8:
        raise ValueError(f"projection {total} exceeds 1; non-normalized inputs?")
    return float(min(total, 1.0))
