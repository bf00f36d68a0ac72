"""Chemical-potential sweeps with exact-diagonalization baselines.

A scan walks a grid of nu_0 values with nu_2 = -nu_0 (optionally untied)
and fixed nu_1, runs the multi-restart VQE against the sector ED baseline
at every point, classifies outliers, and persists per-point JSON records
plus summary CSVs.  Per-point seeds derive from (scan seed, point index)
only, so interrupted scans resume to byte-identical outputs and parallel
execution cannot change results.
"""

from __future__ import annotations

import concurrent.futures
import dataclasses
import hashlib
import json
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .eigensolver import ConvergenceError, ground_state, zero_charge_basis
from .model import ModelParams, build_hamiltonian, delta_n_operator, is_symmetric_point
from .simulator import expectation
from .vqe import (
    AnsatzConfig,
    OptimizerSettings,
    VqeRunRecord,
    best_record,
    classify_outliers,
    multi_start,
)

log = logging.getLogger(__name__)

POINTS_CSV_HEADER = (
    "nu0,nu1,nu2,ed_energy,ed_dN0,ed_dN2,gap,"
    "best_energy,best_dN0,best_dN2,best_overlap,n_outliers,n_runs"
)
TRANSITIONS_CSV_HEADER = (
    "source,nu0_left,nu0_right,dN0_left,dN2_left,dN0_right,dN2_right"
)

WORKERS_ENV_VAR = "SCHWINGER_VQE_WORKERS"


class ConfigError(ValueError):
    pass


@dataclass
class ScanConfig:
    """Sweep definition; everything needed to reproduce a scan bit-for-bit."""

    N: int = 2
    F: int = 3
    x: float = 1.0
    mu: tuple[float, ...] = (0.0, 0.0, 0.0)
    nu1: float = 0.0
    tie_nu2: bool = True        # nu2 = -nu0; if False, nu2 stays fixed at nu2_fixed
    nu2_fixed: float = 0.0
    lo: float = -2.0
    hi: float = 2.0
    points: int = 41
    layers: int = 5
    restarts: int = 10
    seed: int = 2024
    constrained: bool = True
    k: int = 4
    degeneracy_tol: float = 1e-6
    energy_factor: float = 0.3
    int_tol: float = 0.05
    max_iters: int = 5000
    grad_tol: float = 1e-8
    history: int = 10
    output_dir: str = "scan_output"
    workers: int = 1

    def __post_init__(self) -> None:
        self.mu = tuple(float(v) for v in self.mu)

    # -- derived ---------------------------------------------------------------

    def grid(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.points)

    def nu_at(self, nu0: float) -> tuple[float, ...]:
        nu2 = -nu0 if self.tie_nu2 else self.nu2_fixed
        return (float(nu0), float(self.nu1), float(nu2))

    def model_at(self, nu0: float) -> ModelParams:
        return ModelParams(N=self.N, F=self.F, x=self.x, mu=self.mu, nu=self.nu_at(nu0))

    def ansatz(self) -> AnsatzConfig:
        return AnsatzConfig(
            num_qubits=self.N * self.F, layers=self.layers, constrained=self.constrained
        )

    def optimizer_settings(self) -> OptimizerSettings:
        return OptimizerSettings(
            max_iters=self.max_iters, grad_tol=self.grad_tol, history=self.history
        )

    def validate(self) -> None:
        if self.F != 3:
            raise ConfigError("scans are defined for the three-flavor model (F=3)")
        if self.points < 2:
            raise ConfigError("need at least 2 sweep points")
        if not self.lo < self.hi:
            raise ConfigError("sweep range must satisfy lo < hi")
        if self.restarts < 1:
            raise ConfigError("restarts must be >= 1")
        try:
            ModelParams(N=self.N, F=self.F, x=self.x, mu=self.mu, nu=self.nu_at(self.lo))
            self.ansatz()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        if self.constrained:
            for nu0 in self.grid():
                if not is_symmetric_point(self.mu, self.nu_at(float(nu0)), tol=0.0):
                    raise ConfigError(
                        "constrained ansatz requires mu_f = mu_{F-1-f} and "
                        f"nu_f = -nu_{{F-1-f}} at every sweep point (violated at nu0={nu0})"
                    )

    # -- serialization ---------------------------------------------------------

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["mu"] = list(self.mu)
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "ScanConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def from_json_file(cls, path: str | Path) -> "ScanConfig":
        try:
            data = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config file must contain a JSON object")
        return cls.from_dict(data)

    def fingerprint(self) -> str:
        """Hash of everything that affects computed numbers (not paths/workers)."""
        d = self.to_dict()
        d.pop("output_dir")
        d.pop("workers")
        blob = json.dumps(d, sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


@dataclass
class ScanPointResult:
    index: int
    nu: tuple[float, float, float]
    ed_energies: list[float] = field(default_factory=list)
    ed_delta_n: list[list[float]] = field(default_factory=list)  # [level][flavor]
    gap: float | None = None
    records: list[VqeRunRecord] = field(default_factory=list)
    failed: bool = False
    error: str | None = None

    @property
    def ed_energy(self) -> float | None:
        return self.ed_energies[0] if self.ed_energies else None

    def best(self) -> VqeRunRecord | None:
        if self.failed or not self.records:
            return None
        return best_record(self.records)

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "nu": list(self.nu),
            "ed_energies": self.ed_energies,
            "ed_delta_n": self.ed_delta_n,
            "gap": self.gap,
            "records": [r.to_dict() for r in self.records],
            "failed": self.failed,
            "error": self.error,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ScanPointResult":
        return cls(
            index=int(d["index"]),
            nu=tuple(d["nu"]),
            ed_energies=[float(v) for v in d["ed_energies"]],
            ed_delta_n=[[float(v) for v in level] for level in d["ed_delta_n"]],
            gap=None if d["gap"] is None else float(d["gap"]),
            records=[VqeRunRecord.from_dict(r) for r in d["records"]],
            failed=bool(d["failed"]),
            error=d.get("error"),
        )


def compute_point(cfg: ScanConfig, index: int) -> ScanPointResult:
    """Full ED + multi-start VQE at one sweep point; failures are recorded."""
    nu0 = float(cfg.grid()[index])
    result = ScanPointResult(index=index, nu=cfg.nu_at(nu0))
    try:
        p = cfg.model_at(nu0)
        w = build_hamiltonian(p)
        basis = zero_charge_basis(p)
        spectrum = ground_state(w, basis, k=cfg.k, check_invariance=False)
        delta_ops = [delta_n_operator(p, f) for f in range(p.F)]
        result.ed_energies = [float(e) for e in spectrum.energies]
        result.ed_delta_n = [
            [expectation(vec, op) for op in delta_ops] for vec in spectrum.vectors
        ]
        result.gap = spectrum.gap
        result.records = multi_start(
            w,
            cfg.ansatz(),
            restarts=cfg.restarts,
            seed=(cfg.seed, index),
            baseline=spectrum,
            delta_ops=delta_ops,
            settings=cfg.optimizer_settings(),
            degeneracy_tol=cfg.degeneracy_tol,
            energy_factor=cfg.energy_factor,
            int_tol=cfg.int_tol,
        )
        result.failed = all(r.outlier for r in result.records)
        if result.failed:
            result.error = "all restarts classified as outliers"
    except (ConvergenceError, ValueError) as exc:
        result.failed = True
        result.error = f"{type(exc).__name__}: {exc}"
        log.warning("point %d (nu0=%g) failed: %s", index, nu0, exc)
    return result


def _point_path(cfg: ScanConfig, index: int) -> Path:
    return Path(cfg.output_dir) / "points" / f"point_{index:04d}.json"


def _load_point(cfg: ScanConfig, index: int) -> ScanPointResult | None:
    path = _point_path(cfg, index)
    if not path.exists():
        return None
    try:
        data = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError):
        return None
    if data.get("fingerprint") != cfg.fingerprint():
        raise ConfigError(
            f"{path} was produced by a different configuration; "
            "use a fresh output directory"
        )
    return ScanPointResult.from_dict(data["point"])


def _store_point(cfg: ScanConfig, result: ScanPointResult) -> None:
    path = _point_path(cfg, result.index)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = {"fingerprint": cfg.fingerprint(), "point": result.to_dict()}
    tmp = path.with_suffix(".tmp")
    tmp.write_text(json.dumps(payload))
    tmp.replace(path)


def _worker(args: tuple[dict, int]) -> dict:
    cfg_dict, index = args
    cfg = ScanConfig.from_dict(cfg_dict)
    return compute_point(cfg, index).to_dict()


def run_scan(cfg: ScanConfig, persist: bool = True) -> list[ScanPointResult]:
    """Run (or resume) the sweep; points are independent tasks keyed by index."""
    cfg.validate()
    results: dict[int, ScanPointResult] = {}
    pending: list[int] = []
    for i in range(cfg.points):
        cached = _load_point(cfg, i) if persist else None
        if cached is not None:
            results[i] = cached
        else:
            pending.append(i)

    workers = int(os.environ.get(WORKERS_ENV_VAR, cfg.workers))
    if workers > 1 and len(pending) > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
            for i, d in zip(
                pending, pool.map(_worker, [(cfg.to_dict(), i) for i in pending])
            ):
                results[i] = ScanPointResult.from_dict(d)
                if persist:
                    _store_point(cfg, results[i])
    else:
        for i in pending:
            results[i] = compute_point(cfg, i)
            if persist:
                _store_point(cfg, results[i])
    return [results[i] for i in range(cfg.points)]


@dataclass(frozen=True)
class TransitionRecord:
    """A jump of the rounded (dN0, dN2) pair between neighboring sweep points."""

    source: str
    nu0_left: float
    nu0_right: float
    labels_left: tuple[int, int]
    labels_right: tuple[int, int]


def _point_labels(point: ScanPointResult, source: str) -> tuple[int, int] | None:
    if source == "ed":
        if not point.ed_delta_n:
            return None
        d = point.ed_delta_n[0]
        return (round(d[0]), round(d[2]))
    if source == "vqe":
        best = point.best()
        if best is None:
            return None
        return (round(best.delta_n[0]), round(best.delta_n[2]))
    raise ValueError(f"unknown transition source {source!r}")


def detect_transitions(
    results: Sequence[ScanPointResult], source: str = "ed"
) -> list[TransitionRecord]:
    """Transitions between consecutive usable points whose labels differ."""
    transitions = []
    prev: tuple[float, tuple[int, int]] | None = None
    for point in results:
        if point.failed:
            log.warning("skipping failed point %d in transition detection", point.index)
            continue
        labels = _point_labels(point, source)
        if labels is None:
            log.warning("point %d has no %s labels; skipped", point.index, source)
            continue
        nu0 = point.nu[0]
        if prev is not None and labels != prev[1]:
            transitions.append(
                TransitionRecord(
                    source=source,
                    nu0_left=prev[0],
                    nu0_right=nu0,
                    labels_left=prev[1],
                    labels_right=labels,
                )
            )
        prev = (nu0, labels)
    return transitions


def _fmt(value: float | None) -> str:
    return "" if value is None else f"{value:.17g}"


def points_csv_lines(results: Sequence[ScanPointResult]) -> list[str]:
    lines = [POINTS_CSV_HEADER]
    for point in results:
        best = point.best()
        ed_d = point.ed_delta_n[0] if point.ed_delta_n else None
        n_outliers = sum(r.outlier for r in point.records)
        row = [
            _fmt(point.nu[0]),
            _fmt(point.nu[1]),
            _fmt(point.nu[2]),
            _fmt(point.ed_energy),
            _fmt(ed_d[0] if ed_d else None),
            _fmt(ed_d[2] if ed_d else None),
            _fmt(point.gap),
            _fmt(best.energy if best else None),
            _fmt(best.delta_n[0] if best else None),
            _fmt(best.delta_n[2] if best else None),
            _fmt(best.overlap if best else None),
            str(n_outliers),
            str(len(point.records)),
        ]
        lines.append(",".join(row))
    return lines


def transitions_csv_lines(transitions: Sequence[TransitionRecord]) -> list[str]:
    lines = [TRANSITIONS_CSV_HEADER]
    for t in transitions:
        lines.append(
            ",".join(
                [
                    t.source,
                    f"{t.nu0_left:.17g}",
                    f"{t.nu0_right:.17g}",
                    str(t.labels_left[0]),
                    str(t.labels_left[1]),
                    str(t.labels_right[0]),
                    str(t.labels_right[1]),
                ]
            )
        )
    return lines


def emit_outputs(results: Sequence[ScanPointResult], cfg: ScanConfig) -> dict[str, Path]:
    """Write points CSV, transitions CSV, and the full JSON record."""
    out = Path(cfg.output_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        points_path = out / "points.csv"
        points_path.write_text("\n".join(points_csv_lines(results)) + "\n")

        transitions = detect_transitions(results, "ed") + detect_transitions(
            results, "vqe"
        )
        trans_path = out / "transitions.csv"
        trans_path.write_text("\n".join(transitions_csv_lines(transitions)) + "\n")

        records_path = out / "scan_records.json"
        payload = {
            "config": cfg.to_dict(),
            "fingerprint": cfg.fingerprint(),
            "points": [p.to_dict() for p in results],
        }
        records_path.write_text(json.dumps(payload, indent=1))
    except OSError as exc:
        raise IOError(f"failed to write scan outputs under {out}: {exc}") from exc
    return {"points": points_path, "transitions": trans_path, "records": records_path}


def reclassify(results: Sequence[ScanPointResult], cfg: ScanConfig) -> None:
    """Recompute outlier flags in place (used to verify idempotence)."""
    for point in results:
        if point.records:
            classify_outliers(
                point.records, energy_factor=cfg.energy_factor, int_tol=cfg.int_tol
            )
