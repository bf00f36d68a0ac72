"""Command-line driver.

Subcommands:
  scan              chemical-potential sweep with ED baseline and VQE restarts
  ed                exact diagonalization of one parameter point
  vqe-single        multi-restart VQE at one parameter point
  dump-hamiltonian  print the spin Hamiltonian, one term per line

Exit codes: 0 success, 1 configuration error, 2 solver failure on all
points, 3 I/O error.  The environment variable SCHWINGER_VQE_WORKERS
overrides the scan worker count.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .eigensolver import ConvergenceError, ground_state, sector_basis, zero_charge_basis
from .model import ModelParams, build_hamiltonian, delta_n_operator
from .scan import ConfigError, ScanConfig, detect_transitions, emit_outputs, run_scan
from .simulator import dump_statevector, expectation
from .vqe import AnsatzConfig, OptimizerSettings, best_record, multi_start
from .vqe import ansatz_state


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse would sys.exit(2); we want code 1
        raise ConfigError(message)


def _parse_floats(text: str, count: int, name: str) -> tuple[float, ...]:
    parts = [p for p in text.split(",") if p != ""]
    try:
        values = [float(p) for p in parts]
    except ValueError as exc:
        raise ConfigError(f"cannot parse {name}={text!r}: {exc}") from exc
    if len(values) == 1:
        values = values * count
    if len(values) != count:
        raise ConfigError(f"{name} needs 1 or {count} comma-separated values")
    return tuple(values)


def _add_model_args(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--n", type=int, default=2, help="number of lattice sites (even)")
    sub.add_argument("--f", type=int, default=3, help="number of flavors")
    sub.add_argument("--x", type=float, default=1.0, help="dimensionless hopping 1/(ag)^2")
    sub.add_argument("--mu", default="0", help="flavor masses, e.g. 0.1 or 0.1,0.1,0.1")
    sub.add_argument("--nu", default="0", help="flavor chemical potentials")


def _model_from_args(args) -> ModelParams:
    try:
        return ModelParams(
            N=args.n,
            F=args.f,
            x=args.x,
            mu=_parse_floats(args.mu, args.f, "mu"),
            nu=_parse_floats(args.nu, args.f, "nu"),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _write_or_print(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _cmd_dump_hamiltonian(args) -> int:
    p = _model_from_args(args)
    lines = build_hamiltonian(p).to_lines()
    _write_or_print("\n".join(lines) + "\n", args.out)
    return 0


def _cmd_ed(args) -> int:
    p = _model_from_args(args)
    weight = args.weight if args.weight is not None else p.num_qubits // 2
    basis = sector_basis(p.num_qubits, weight)
    w = build_hamiltonian(p)
    try:
        spectrum = ground_state(w, basis, k=args.k)
    except ConvergenceError as exc:
        logging.error("diagonalization failed: %s", exc)
        return 2
    delta_ops = [delta_n_operator(p, f) for f in range(p.F)] if p.F >= 2 else []
    payload = {
        "params": {"N": p.N, "F": p.F, "x": p.x, "mu": list(p.mu), "nu": list(p.nu)},
        "sector_weight": weight,
        "energies": [float(e) for e in spectrum.energies],
        "delta_n": [
            [expectation(vec, op) for op in delta_ops] for vec in spectrum.vectors
        ],
        "gap": spectrum.gap,
    }
    _write_or_print(json.dumps(payload, indent=1) + "\n", args.out)
    return 0


def _cmd_vqe_single(args) -> int:
    p = _model_from_args(args)
    w = build_hamiltonian(p)
    spectrum = ground_state(w, zero_charge_basis(p), k=args.k)
    cfg = AnsatzConfig(
        num_qubits=p.num_qubits, layers=args.layers, constrained=args.constrained
    )
    settings = OptimizerSettings(max_iters=args.max_iters, grad_tol=args.grad_tol)
    delta_ops = [delta_n_operator(p, f) for f in range(p.F)] if p.F >= 2 else []
    records = multi_start(
        w,
        cfg,
        restarts=args.restarts,
        seed=args.seed,
        baseline=spectrum,
        delta_ops=delta_ops,
        settings=settings,
    )
    best = best_record(records)
    if args.dump_state and best is not None:
        psi = ansatz_state(cfg, best.params)
        Path(args.dump_state).write_text("\n".join(dump_statevector(psi)) + "\n")
    payload = {
        "params": {"N": p.N, "F": p.F, "x": p.x, "mu": list(p.mu), "nu": list(p.nu)},
        "layers": args.layers,
        "constrained": args.constrained,
        "ed_energy": spectrum.ground_energy(),
        "records": [r.to_dict() for r in records],
        "best": None if best is None else best.to_dict(),
    }
    _write_or_print(json.dumps(payload, indent=1) + "\n", args.out)
    return 0 if best is not None else 2


def _scan_config_from_args(args) -> ScanConfig:
    if args.config:
        cfg = ScanConfig.from_json_file(args.config)
    else:
        cfg = ScanConfig()
    overrides = {
        "N": args.n,
        "x": args.x,
        "nu1": args.nu1,
        "lo": args.lo,
        "hi": args.hi,
        "points": args.points,
        "layers": args.layers,
        "restarts": args.restarts,
        "seed": args.seed,
        "output_dir": args.out_dir,
        "workers": args.workers,
    }
    for name, value in overrides.items():
        if value is not None:
            setattr(cfg, name, value)
    if args.mu is not None:
        cfg.mu = _parse_floats(args.mu, cfg.F, "mu")
    if args.constrained is not None:
        cfg.constrained = args.constrained
    for item in args.set or []:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        key, raw = item.split("=", 1)
        if not hasattr(cfg, key):
            raise ConfigError(f"unknown config field {key!r}")
        current = getattr(cfg, key)
        try:
            if key == "mu":
                value = _parse_floats(raw, cfg.F, "mu")
            elif isinstance(current, bool):
                value = raw.lower() in ("1", "true", "yes")
            elif isinstance(current, int):
                value = int(raw)
            elif isinstance(current, float):
                value = float(raw)
            else:
                value = raw
        except ValueError as exc:
            raise ConfigError(f"cannot parse --set {item!r}: {exc}") from exc
        setattr(cfg, key, value)
    return cfg


def _cmd_scan(args) -> int:
    cfg = _scan_config_from_args(args)
    cfg.validate()
    results = run_scan(cfg)
    paths = emit_outputs(results, cfg)
    n_failed = sum(p.failed for p in results)
    transitions = detect_transitions(results, "ed")
    logging.info(
        "scan finished: %d points (%d failed), %d ED transitions, outputs in %s",
        len(results),
        n_failed,
        len(transitions),
        paths["points"].parent,
    )
    if n_failed == len(results):
        logging.error("every sweep point failed")
        return 2
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="schwinger-vqe", description=__doc__.split("\n\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    s = sub.add_parser("dump-hamiltonian", help="print the spin Hamiltonian")
    _add_model_args(s)
    s.add_argument("--out", default=None)
    s.set_defaults(func=_cmd_dump_hamiltonian)

    s = sub.add_parser("ed", help="exact diagonalization of a charge sector")
    _add_model_args(s)
    s.add_argument("--weight", type=int, default=None, help="sector Hamming weight (default M/2)")
    s.add_argument("--k", type=int, default=4, help="number of eigenpairs")
    s.add_argument("--out", default=None)
    s.set_defaults(func=_cmd_ed)

    s = sub.add_parser("vqe-single", help="multi-restart VQE at one point")
    _add_model_args(s)
    s.add_argument("--layers", type=int, default=5)
    s.add_argument("--restarts", type=int, default=10)
    s.add_argument("--seed", type=int, default=2024)
    s.add_argument("--constrained", action="store_true")
    s.add_argument("--k", type=int, default=4)
    s.add_argument("--max-iters", type=int, default=5000)
    s.add_argument("--grad-tol", type=float, default=1e-8)
    s.add_argument("--dump-state", default=None, help="write best statevector here")
    s.add_argument("--out", default=None)
    s.set_defaults(func=_cmd_vqe_single)

    s = sub.add_parser("scan", help="sweep nu0 with ED baseline and VQE restarts")
    s.add_argument("--config", default=None, help="JSON config file")
    s.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a config field")
    s.add_argument("--n", type=int, default=None)
    s.add_argument("--x", type=float, default=None)
    s.add_argument("--mu", default=None)
    s.add_argument("--nu1", type=float, default=None)
    s.add_argument("--lo", type=float, default=None)
    s.add_argument("--hi", type=float, default=None)
    s.add_argument("--points", type=int, default=None)
    s.add_argument("--layers", type=int, default=None)
    s.add_argument("--restarts", type=int, default=None)
    s.add_argument("--seed", type=int, default=None)
    s.add_argument("--out-dir", default=None)
    s.add_argument("--workers", type=int, default=None)
    group = s.add_mutually_exclusive_group()
    group.add_argument("--constrained", dest="constrained", action="store_true", default=None)
    group.add_argument("--unconstrained", dest="constrained", action="store_false")
    s.set_defaults(func=_cmd_scan)

    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(format="%(levelname)s %(message)s")
    try:
        parser = build_parser()
        args = parser.parse_args(argv)
        if args.verbose:
            logging.getLogger().setLevel(logging.INFO)
        return args.func(args)
    except ConfigError as exc:
        logging.error("configuration error: %s", exc)
        return 1
    except ConvergenceError as exc:
        logging.error("solver failure: %s", exc)
        return 2
    except OSError as exc:
        logging.error("I/O error: %s", exc)
        return 3


if __name__ == "__main__":
    sys.exit(main())
