"""Variational ground-state search for the spin Hamiltonian.

The circuit is the layered number-conserving ansatz: per layer, XX+YY
rotations on even pairs then odd pairs, followed by single-qubit Z
rotations, starting from the Neel state.  Free parameters are either the
full per-layer set (2M-1 angles) or the symmetry-constrained set (M
angles: entangling angles mirrored about the chain center, Z angles tied
antisymmetrically), which keeps the state invariant under the
flip-and-reflect symmetry.

Gradients are exact: reverse (adjoint) accumulation through the circuit
with one forward and one backward sweep.  The parameter-shift rule does
not apply to the XX+YY generator (eigenvalues -2, 0, 2), and finite
differences would waste evaluations; adjoint differentiation is the
natural classical choice.
"""

from __future__ import annotations

from dataclasses import dataclass, field, asdict
from typing import Sequence

import numpy as np

from .eigensolver import SpectrumResult, ground_space_overlap
from .lbfgs import minimize_lbfgs
from .pauli import PauliSum
from .simulator import (
    CompiledOperator,
    LayerAngles,
    compile_operator,
    expectation,
    neel_state,
    _rz_inplace,
    _xxyy_inplace,
)


@dataclass(frozen=True)
class AnsatzConfig:
    """Circuit shape: qubit count, layer count, constrained parameterization."""

    num_qubits: int
    layers: int
    constrained: bool = False

    def __post_init__(self) -> None:
        if self.num_qubits < 2:
            raise ValueError("ansatz needs at least two qubits")
        if self.layers < 1:
            raise ValueError("need at least one layer")
        if self.constrained and self.num_qubits % 2 != 0:
            raise ValueError("constrained parameterization requires an even qubit count")

    @property
    def params_per_layer(self) -> int:
        m = self.num_qubits
        if self.constrained:
            return m // 2 + (m - 1 + 1) // 2  # mirrored entanglers + tied Z angles
        return 2 * m - 1

    @property
    def num_params(self) -> int:
        return self.layers * self.params_per_layer


def _expand_layer(cfg: AnsatzConfig, free: np.ndarray) -> LayerAngles:
    m = cfg.num_qubits
    if not cfg.constrained:
        return LayerAngles(theta_e=free[: m - 1].copy(), theta_s=free[m - 1 :].copy())
    half = m // 2
    free_e, free_s = free[:half], free[half:]
    theta_e = np.empty(m - 1)
    for k in range(m - 1):
        theta_e[k] = free_e[min(k, m - 2 - k)]
    theta_s = np.empty(m)
    theta_s[:half] = free_s
    theta_s[half:] = -free_s[::-1]
    return LayerAngles(theta_e=theta_e, theta_s=theta_s)


def _collapse_layer_grad(cfg: AnsatzConfig, g_e: np.ndarray, g_s: np.ndarray) -> np.ndarray:
    """Transpose of the free->expanded map applied to an expanded gradient."""
    m = cfg.num_qubits
    if not cfg.constrained:
        return np.concatenate([g_e, g_s])
    half = m // 2
    out_e = np.empty(half)
    for a in range(half):
        partner = m - 2 - a
        out_e[a] = g_e[a] if partner == a else g_e[a] + g_e[partner]
    out_s = g_s[:half] - g_s[half:][::-1]
    return np.concatenate([out_e, out_s])


def expand_params(cfg: AnsatzConfig, free: np.ndarray) -> list[LayerAngles]:
    """Unpack a flat free-parameter vector into per-layer angles."""
    free = np.asarray(free, dtype=float)
    if free.shape != (cfg.num_params,):
        raise ValueError(
            f"expected {cfg.num_params} parameters, got shape {free.shape}"
        )
    p = cfg.params_per_layer
    return [_expand_layer(cfg, free[l * p : (l + 1) * p]) for l in range(cfg.layers)]


def ansatz_state(cfg: AnsatzConfig, free: np.ndarray) -> np.ndarray:
    """The circuit state |psi(theta)> from the Neel initial state."""
    psi = neel_state(cfg.num_qubits)
    m = cfg.num_qubits
    for layer in expand_params(cfg, free):
        for k in range(0, m - 1, 2):
            _xxyy_inplace(psi, k, float(layer.theta_e[k]))
        for k in range(1, m - 1, 2):
            _xxyy_inplace(psi, k, float(layer.theta_e[k]))
        for j in range(m):
            _rz_inplace(psi, j, float(layer.theta_s[j]))
    return psi


def cost(h: PauliSum | CompiledOperator, cfg: AnsatzConfig, free: np.ndarray) -> float:
    """C(theta) = <psi(theta)| h |psi(theta)>."""
    return expectation(ansatz_state(cfg, free), h)


def _gate_sequence(cfg: AnsatzConfig) -> list[tuple[str, int, int, int]]:
    """Flat gate list: (kind, qubit, layer, index-within-expanded-layer)."""
    m = cfg.num_qubits
    gates = []
    for l in range(cfg.layers):
        for k in range(0, m - 1, 2):
            gates.append(("e", k, l, k))
        for k in range(1, m - 1, 2):
            gates.append(("e", k, l, k))
        for j in range(m):
            gates.append(("s", j, l, (m - 1) + j))
    return gates


def _generator_braket(kind: str, qubit: int, lam: np.ndarray, phi: np.ndarray) -> complex:
    """<lam| A |phi> for the gate generator A (Z_j, or XX+YY on a pair)."""
    if kind == "s":
        lv = lam.reshape(-1, 2, 1 << qubit)
        pv = phi.reshape(-1, 2, 1 << qubit)
        return np.vdot(lv[:, 1, :], pv[:, 1, :]) - np.vdot(lv[:, 0, :], pv[:, 0, :])
    lv = lam.reshape(-1, 2, 2, 1 << qubit)
    pv = phi.reshape(-1, 2, 2, 1 << qubit)
    return 2.0 * (
        np.vdot(lv[:, 0, 1, :], pv[:, 1, 0, :]) + np.vdot(lv[:, 1, 0, :], pv[:, 0, 1, :])
    )


def cost_and_gradient(
    h: PauliSum | CompiledOperator, cfg: AnsatzConfig, free: np.ndarray
) -> tuple[float, np.ndarray]:
    """Cost and its exact gradient with respect to the free parameters."""
    op = compile_operator(h)
    free = np.asarray(free, dtype=float)
    layers = expand_params(cfg, free)
    m = cfg.num_qubits
    gates = _gate_sequence(cfg)
    angle = {
        "e": lambda l, idx: float(layers[l].theta_e[idx]),
        "s": lambda l, idx: float(layers[l].theta_s[idx - (m - 1)]),
    }

    phi = neel_state(m)
    for kind, q, l, idx in gates:
        (_xxyy_inplace if kind == "e" else _rz_inplace)(phi, q, angle[kind](l, idx))

    lam = op.apply(phi)
    energy = float(np.vdot(phi, lam).real)

    grad_expanded = np.zeros((cfg.layers, 2 * m - 1))
    for kind, q, l, idx in reversed(gates):
        # d/dtheta <psi|H|psi> with gate exp(-i theta A / 2):
        # Im of <lambda| A |phi> at the state just after this gate
        grad_expanded[l, idx] += (_generator_braket(kind, q, lam, phi)).imag
        th = angle[kind](l, idx)
        apply = _xxyy_inplace if kind == "e" else _rz_inplace
        apply(phi, q, -th)
        apply(lam, q, -th)

    parts = [
        _collapse_layer_grad(cfg, grad_expanded[l, : m - 1], grad_expanded[l, m - 1 :])
        for l in range(cfg.layers)
    ]
    return energy, np.concatenate(parts)


def gradient(h: PauliSum | CompiledOperator, cfg: AnsatzConfig, free: np.ndarray) -> np.ndarray:
    return cost_and_gradient(h, cfg, free)[1]


@dataclass
class OptimizerSettings:
    max_iters: int = 5000
    grad_tol: float = 1e-8
    history: int = 10
    c1: float = 1e-4
    c2: float = 0.9


@dataclass
class VqeRunRecord:
    """Result of one optimization restart."""

    energy: float
    params: np.ndarray
    delta_n: tuple[float, ...]
    overlap: float | None
    converged: bool
    outlier: bool
    iterations: int
    seed: tuple[int, ...]
    status: str = ""

    def to_dict(self) -> dict:
        d = asdict(self)
        d["params"] = [float(v) for v in self.params]
        d["delta_n"] = [float(v) for v in self.delta_n]
        d["seed"] = list(self.seed)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "VqeRunRecord":
        return cls(
            energy=float(d["energy"]),
            params=np.asarray(d["params"], dtype=float),
            delta_n=tuple(float(v) for v in d["delta_n"]),
            overlap=None if d["overlap"] is None else float(d["overlap"]),
            converged=bool(d["converged"]),
            outlier=bool(d["outlier"]),
            iterations=int(d["iterations"]),
            seed=tuple(int(s) for s in d["seed"]),
            status=str(d.get("status", "")),
        )


def optimize(
    h: PauliSum | CompiledOperator,
    cfg: AnsatzConfig,
    init: np.ndarray,
    settings: OptimizerSettings | None = None,
    delta_ops: Sequence[PauliSum | CompiledOperator] = (),
    baseline: SpectrumResult | None = None,
    degeneracy_tol: float = 1e-6,
    seed: tuple[int, ...] = (),
) -> VqeRunRecord:
    """Run L-BFGS from ``init`` and evaluate observables of the final state."""
    settings = settings or OptimizerSettings()
    op = compile_operator(h)
    delta_compiled = [compile_operator(o) for o in delta_ops]

    result = minimize_lbfgs(
        lambda x: cost_and_gradient(op, cfg, x),
        np.asarray(init, dtype=float),
        max_iters=settings.max_iters,
        grad_tol=settings.grad_tol,
        history=settings.history,
        c1=settings.c1,
        c2=settings.c2,
    )
    psi = ansatz_state(cfg, result.x)
    deltas = tuple(expectation(psi, o) for o in delta_compiled)
    ov = ground_space_overlap(psi, baseline, degeneracy_tol) if baseline else None
    return VqeRunRecord(
        energy=result.fun,
        params=result.x,
        delta_n=deltas,
        overlap=ov,
        converged=result.converged,
        outlier=False,
        iterations=result.iterations,
        seed=tuple(seed),
        status=result.status,
    )


def random_initial_params(cfg: AnsatzConfig, seed_parts: Sequence[int]) -> np.ndarray:
    """Uniform draw from [-pi, pi), deterministic in the seed parts."""
    rng = np.random.default_rng(list(seed_parts))
    return rng.uniform(-np.pi, np.pi, size=cfg.num_params)


def multi_start(
    h: PauliSum | CompiledOperator,
    cfg: AnsatzConfig,
    restarts: int,
    seed: int | Sequence[int],
    baseline: SpectrumResult | None = None,
    delta_ops: Sequence[PauliSum | CompiledOperator] = (),
    settings: OptimizerSettings | None = None,
    degeneracy_tol: float = 1e-6,
    energy_factor: float = 0.3,
    int_tol: float = 0.05,
) -> list[VqeRunRecord]:
    """Independent restarts with per-restart derived seeds, then outlier flags.

    Seeds depend only on (seed, restart index), so any execution order or
    parallel schedule produces identical records.
    """
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    base = (seed,) if isinstance(seed, (int, np.integer)) else tuple(seed)
    op = compile_operator(h)
    delta_compiled = [compile_operator(o) for o in delta_ops]
    records = []
    for r in range(restarts):
        seed_parts = base + (r,)
        init = random_initial_params(cfg, seed_parts)
        records.append(
            optimize(
                op,
                cfg,
                init,
                settings=settings,
                delta_ops=delta_compiled,
                baseline=baseline,
                degeneracy_tol=degeneracy_tol,
                seed=seed_parts,
            )
        )
    return classify_outliers(records, energy_factor=energy_factor, int_tol=int_tol)


def classify_outliers(
    records: list[VqeRunRecord],
    energy_factor: float = 0.3,
    int_tol: float = 0.05,
) -> list[VqeRunRecord]:
    """Flag runs with energy above ``E_min + energy_factor * |E_min|`` or a
    particle-number expectation farther than ``int_tol`` from an integer."""
    if not records:
        raise ValueError("no records to classify")
    e_min = min(r.energy for r in records)
    threshold = e_min + energy_factor * abs(e_min)
    for r in records:
        non_integer = any(abs(d - round(d)) > int_tol for d in r.delta_n)
        r.outlier = (r.energy > threshold) or non_integer
    return records


def best_record(records: Sequence[VqeRunRecord]) -> VqeRunRecord | None:
    """Minimum-energy non-outlier (ties: first in restart order); None if all fail."""
    candidates = [r for r in records if not r.outlier]
    if not candidates:
        return None
    best = candidates[0]
    for r in candidates[1:]:
        if r.energy < best.energy:
            best = r
    return best
