"""Command-line interface.

Exit status: 0 on success, 1 on domain or parse errors, 2 when a check
(verification, experiment acceptance) fails.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import asdict

from . import io as fio
from .ansatz import AnsatzShape
from .compiler import CompiledAnsatz, compile_to_ansatz, verify_compilation
from .errors import CapacityError, UqcpacError
from .experiments import ExperimentConfig, run_experiment, write_record
from .learning import (
    ConceptClassParams,
    ERMConfig,
    generate_dataset,
    sample_complexity,
    train_erm,
)

log = logging.getLogger("uqcpac")

EXIT_OK, EXIT_ERROR, EXIT_CHECK_FAILED = 0, 1, 2


def _emit(doc, out=None):
    text = json.dumps(doc, indent=1)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def cmd_compile(args):
    circuit = fio.read_circuit(args.circuit)
    try:
        compiled = compile_to_ansatz(circuit, args.depth)
    except CapacityError as exc:
        print(f"error: {exc} (required layers: {exc.required_layers})", file=sys.stderr)
        return EXIT_ERROR
    _emit(fio.params_to_dict(compiled), args.out)
    log.info("layers used %d of depth %d, global phase %.12g",
             compiled.layers_used, compiled.shape.depth, compiled.global_phase)
    return EXIT_OK


def cmd_verify(args):
    compiled = fio.read_params(args.params)
    circuit = fio.read_circuit(args.circuit)
    check = verify_compilation(compiled, circuit, args.tol)
    print(json.dumps(asdict(check)))
    return EXIT_OK if check.ok else EXIT_CHECK_FAILED


def cmd_gen_data(args):
    circuit = fio.read_circuit(args.circuit)
    data = generate_dataset(circuit, args.m, args.seed)
    fio.write_dataset(data, args.out)
    log.info("wrote %d pairs on %d qubits to %s", data.m, data.n, args.out)
    return EXIT_OK


def _shape(text):
    try:
        n, depth = (int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError("--shape expects 'n,D'")
    return n, depth


def cmd_train(args):
    data = fio.read_dataset(args.data)
    shape = AnsatzShape(*args.shape)
    cfg = ERMConfig(sweeps=args.iters, restarts=args.restarts, seed=args.seed)
    res = train_erm(shape, data, cfg)
    compiled = CompiledAnsatz(shape, res.theta, shape.depth, None)
    doc = fio.params_to_dict(
        compiled, empirical_risk=res.risk, history=res.history,
        improving_steps=res.improving_steps, restart=res.restart,
    )
    doc.pop("global_phase")
    _emit(doc, args.out)
    return EXIT_OK


def cmd_complexity(args):
    rep = sample_complexity(args.eps, args.delta, ConceptClassParams(args.n, args.c, args.K, args.M))
    print(json.dumps(asdict(rep), indent=1))
    return EXIT_OK


def cmd_experiment(args):
    cfg = ExperimentConfig.from_file(args.config)
    cfg.kind = args.kind
    if args.workers is not None:
        cfg.workers = args.workers
    cfg.validate()
    rec = run_experiment(cfg)
    out = args.out or cfg.out or f"{args.kind}.csv"
    for path in write_record(rec, out, timestamp=not args.no_timestamp):
        print(path)
    for note in rec.notes:
        print(note)
    if rec.failed:
        print("experiment FAILED", file=sys.stderr)
        return EXIT_CHECK_FAILED
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    """Usage errors count as parse errors (exit 1)."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="uqcpac", description=__doc__.splitlines()[0])
    p.add_argument("--workers", type=int, default=None,
                   help="parallel trial workers (env UQCPAC_WORKERS overrides)")
    p.add_argument("--no-timestamp", action="store_true",
                   help="omit the timestamp line and wall times from CSV output")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("compile", help="compile a circuit into ansatz parameters")
    s.add_argument("circuit")
    s.add_argument("--depth", type=int, default=None)
    s.add_argument("--out")
    s.set_defaults(func=cmd_compile)

    s = sub.add_parser("verify", help="check parameters against a circuit")
    s.add_argument("params")
    s.add_argument("circuit")
    s.add_argument("--tol", type=float, default=1e-9)
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("gen-data", help="sample a labelled dataset from a circuit")
    s.add_argument("circuit")
    s.add_argument("-m", type=int, required=True)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_gen_data)

    s = sub.add_parser("train", help="empirical risk minimization on a dataset")
    s.add_argument("data")
    s.add_argument("--shape", type=_shape, required=True)
    s.add_argument("--restarts", type=int, default=0)
    s.add_argument("--iters", type=int, default=60, help="coordinate-descent sweeps")
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--out")
    s.set_defaults(func=cmd_train)

    s = sub.add_parser("complexity", help="sample-complexity calculator")
    s.add_argument("--eps", type=float, required=True)
    s.add_argument("--delta", type=float, required=True)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--c", type=int, required=True)
    s.add_argument("--K", type=float, default=12.0)
    s.add_argument("--M", type=int, default=2)
    s.set_defaults(func=cmd_complexity)

    s = sub.add_parser("experiment", help="run a seeded experiment and write CSV")
    s.add_argument("kind", choices=["compile-sweep", "gen-gap"])
    s.add_argument("--config", required=True)
    s.add_argument("--out")
    s.set_defaults(func=cmd_experiment)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    env_workers = os.environ.get("UQCPAC_WORKERS")
    if env_workers:
        args.workers = int(env_workers)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (UqcpacError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
