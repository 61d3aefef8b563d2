"""Command-line entry point: mint/verify flows, the attack suite, and the
seeded experiment catalog.

Exit codes: 0 success, 1 experiment assertion failed, 2 usage error.
Reports are JSON lines (one record per line) plus a rendered summary table;
the same (config, seed) always produces an identical report.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from typing import List, Optional

import numpy as np

from dataclasses import asdict

from . import f2lin, polyhide, privkey
from .experiments import CATALOG, ExperimentConfig, run_experiment
from .qsim import StateVector

EXIT_OK = 0
EXIT_ASSERTION = 1
EXIT_USAGE = 2


def _emit_records(records, out: Optional[str]) -> None:
    text = "\n".join(json.dumps(r, sort_keys=True) for r in records)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _emit_report(cfg: ExperimentConfig, outcome, out: Optional[str]) -> None:
    resolved = cfg.resolved(CATALOG[cfg.experiment].defaults)
    params = {
        k: v
        for k, v in asdict(resolved).items()
        if k not in ("experiment", "seed", "out", "workers") and v is not None
    }
    header = {"experiment": cfg.experiment, "seed": cfg.seed, "params": params}
    _emit_records([header] + outcome.records, out)


def _print_summary(summary: dict, ok: bool) -> None:
    width = max((len(k) for k in summary), default=0)
    print("-" * 46)
    for key, val in summary.items():
        print(f"  {key:<{width}}  {val}")
    print("-" * 46)
    print(f"  result: {'PASS' if ok else 'FAIL'}")


def _add_experiment_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--d", type=int, default=None)
    p.add_argument("--eps", type=float, default=None)
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--delta", type=float, default=None)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--eta", type=float, default=None)
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--scheme", default=None, choices=["hsmini", "explicit", "keyed", "wiesner"])
    p.add_argument("--target", default=None, choices=["haar", "subspace"])
    p.add_argument("--out", default=None)
    p.add_argument("--workers", type=int, default=0,
                   help="trial worker processes; 0 = available parallelism")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hsmoney",
        description="hidden-subspace quantum money: schemes, attacks, experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("catalog", help="list the experiment catalog")

    run_p = sub.add_parser("run", help="run a catalog experiment")
    run_p.add_argument("experiment", choices=sorted(CATALOG))
    _add_experiment_flags(run_p)

    mint_p = sub.add_parser("mint-explicit", help="mint a polynomial-serial banknote")
    mint_p.add_argument("--n", type=int, default=12)
    mint_p.add_argument("--d", type=int, default=4)
    mint_p.add_argument("--eps", type=float, default=0.25)
    mint_p.add_argument("--beta", type=float, default=12.0)
    mint_p.add_argument("--seed", type=int, default=0)
    mint_p.add_argument("--out", required=True, help="output file prefix")

    ver_p = sub.add_parser("verify-explicit", help="verify a minted banknote")
    ver_p.add_argument("--note", required=True, help="file prefix written by mint-explicit")
    ver_p.add_argument("--seed", type=int, default=0)

    d1_p = sub.add_parser("attack-d1", help="recover the subspace from degree-1 serials")
    d1_p.add_argument("--n", type=int, default=12)
    d1_p.add_argument("--eps", type=float, default=0.1)
    d1_p.add_argument("--beta", type=float, default=6.0)
    d1_p.add_argument("--seed", type=int, default=0)

    wiesner = sub.add_parser("wiesner", help="four-state private-key scheme")
    wsub = wiesner.add_subparsers(dest="subcommand", required=True)
    for name in ("mint", "verify", "attack-adaptive", "attack-clone"):
        wp = wsub.add_parser(name)
        wp.add_argument("--n", type=int, default=16)
        wp.add_argument("--seed", type=int, default=0)
        wp.add_argument("--trials", type=int, default=100)
        wp.add_argument("--out", default=None)

    keyed = sub.add_parser("keyed", help="keyed hidden-subspace private scheme")
    ksub = keyed.add_subparsers(dest="subcommand", required=True)
    for name in ("mint", "verify"):
        kp = ksub.add_parser(name)
        kp.add_argument("--n", type=int, default=10)
        kp.add_argument("--seed", type=int, default=0)
        kp.add_argument("--trials", type=int, default=100)
        kp.add_argument("--out", default=None)

    bundle = sub.add_parser("bundle", help="oracle bundle snapshots")
    bsub = bundle.add_subparsers(dest="subcommand", required=True)
    bexp = bsub.add_parser("export")
    bexp.add_argument("--n", type=int, default=8)
    bexp.add_argument("--seed", type=int, default=0)
    bexp.add_argument("--touch", type=int, default=4, help="entries to materialize")
    bexp.add_argument("--out", required=True)
    bimp = bsub.add_parser("import")
    bimp.add_argument("--snapshot", required=True)

    return parser


def _cmd_catalog() -> int:
    width = max(len(k) for k in CATALOG)
    for key in sorted(CATALOG):
        spec = CATALOG[key]
        defaults = " ".join(f"{k}={v}" for k, v in sorted(spec.defaults.items(), key=str))
        print(f"{key:<{width}}  {spec.claim}")
        print(f"{'':<{width}}  defaults: {defaults}")
    return EXIT_OK


def _cmd_run(args) -> int:
    workers = args.workers if args.workers > 0 else (os.cpu_count() or 1)
    cfg = ExperimentConfig(
        experiment=args.experiment,
        n=args.n,
        d=args.d if args.d is not None else 4,
        eps=args.eps,
        beta=args.beta,
        delta=args.delta,
        k=args.k,
        eta=args.eta,
        trials=args.trials,
        seed=args.seed,
        scheme=args.scheme or "hsmini",
        target=args.target or "haar",
        out=args.out,
        workers=workers,
    )
    try:
        outcome = run_experiment(cfg)
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        _emit_report(cfg, outcome, args.out)
    except OSError as exc:
        print(f"error: cannot write report: {exc}", file=sys.stderr)
        return EXIT_USAGE
    _print_summary(outcome.summary, outcome.ok)
    return EXIT_OK if outcome.ok else EXIT_ASSERTION


def _cmd_mint_explicit(args) -> int:
    if args.d < 2:
        print(
            "error: degree 1 serials are insecure (linear systems surrender the "
            "subspace); choose d >= 2",
            file=sys.stderr,
        )
        return EXIT_USAGE
    rng = np.random.default_rng(np.random.SeedSequence(args.seed))
    try:
        note = polyhide.bank_explicit(args.n, args.d, args.eps, args.beta, rng)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    with open(args.out + ".primal", "w") as fh:
        fh.write(note.primal_system.serialize())
    with open(args.out + ".dual", "w") as fh:
        fh.write(note.dual_system.serialize())
    with open(args.out + ".state", "w") as fh:
        fh.write(note.state.dump())
    print(f"minted n={args.n} d={args.d} note into {args.out}.{{primal,dual,state}}")
    return EXIT_OK


def _cmd_verify_explicit(args) -> int:
    rng = np.random.default_rng(np.random.SeedSequence(args.seed))
    try:
        with open(args.note + ".primal") as fh:
            primal = polyhide.PolySystem.deserialize(fh.read())
        with open(args.note + ".dual") as fh:
            dual = polyhide.PolySystem.deserialize(fh.read())
        with open(args.note + ".state") as fh:
            state = StateVector.load(fh.read())
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    note = polyhide.ExplicitNote(primal, dual, state)
    ok = polyhide.verify_explicit(note, rng)
    print("ACCEPT" if ok else "REJECT")
    return EXIT_OK if ok else EXIT_ASSERTION


def _cmd_attack_d1(args) -> int:
    rng = np.random.default_rng(np.random.SeedSequence(args.seed))
    a = f2lin.random_subspace(args.n, args.n // 2, rng)
    m = math.ceil(args.beta * args.n)
    primal = polyhide.sample_noisy_system(a, 1, m, args.eps, rng)
    dual = polyhide.sample_noisy_system(a.dual(), 1, m, args.eps, rng)
    try:
        recovered = polyhide.degree1_attack(primal, dual)
    except polyhide.DegreeOneAttackError as exc:
        print(f"attack failed: {exc}")
        return EXIT_ASSERTION
    match = recovered == a
    print(f"recovered == planted: {match}")
    print(recovered.serialize(), end="")
    return EXIT_OK if match else EXIT_ASSERTION


def _cmd_wiesner(args) -> int:
    rng = np.random.default_rng(np.random.SeedSequence(args.seed))
    if args.subcommand == "mint":
        bank, note = privkey.wiesner_bank(args.n, rng)
        print(json.dumps({"serial": note.serial.hex(), "qubits": note.qubits}))
        return EXIT_OK
    if args.subcommand == "verify":
        bank, note = privkey.wiesner_bank(args.n, rng)
        accepts = sum(bank.verify(note.serial, note.qubits, rng)[0] for _ in range(args.trials))
        print(f"accepted {accepts}/{args.trials}")
        return EXIT_OK if accepts == args.trials else EXIT_ASSERTION
    if args.subcommand == "attack-adaptive":
        cfg = ExperimentConfig(experiment="attack-adaptive", n=args.n,
                               trials=args.trials, seed=args.seed, out=args.out)
        outcome = run_experiment(cfg)
        _emit_report(cfg, outcome, args.out)
        _print_summary(outcome.summary, outcome.ok)
        return EXIT_OK if outcome.ok else EXIT_ASSERTION
    cfg = ExperimentConfig(experiment="attack-clone", n=args.n,
                           trials=args.trials, seed=args.seed, out=args.out)
    outcome = run_experiment(cfg)
    _emit_report(cfg, outcome, args.out)
    _print_summary(outcome.summary, outcome.ok)
    return EXIT_OK if outcome.ok else EXIT_ASSERTION


def _cmd_keyed(args) -> int:
    rng = np.random.default_rng(np.random.SeedSequence(args.seed))
    bank = privkey.KeyedSubspaceBank(args.n, rng.bytes(16))
    serial, state = bank.mint(rng)
    if args.subcommand == "mint":
        print(json.dumps({"serial": serial.hex(), "state": state.dump().splitlines()[0]}))
        return EXIT_OK
    accepts = 0
    for _ in range(args.trials):
        ok, state = bank.verify(serial, state, rng)
        accepts += ok
    print(f"accepted {accepts}/{args.trials}")
    return EXIT_OK if accepts == args.trials else EXIT_ASSERTION


def _cmd_bundle(args) -> int:
    from . import hsmini

    if args.subcommand == "export":
        rng = np.random.default_rng(np.random.SeedSequence(args.seed))
        bundle = hsmini.make_bundle(args.n, rng)
        for r in range(args.touch):
            bundle.generator(r)
        with open(args.out, "w") as fh:
            fh.write(bundle.export_json() + "\n")
        print(f"exported {args.touch} entries at n={args.n} to {args.out}")
        return EXIT_OK
    try:
        with open(args.snapshot) as fh:
            text = fh.read()
        bundle = hsmini.OracleBundle.import_json(text, np.random.default_rng(0))
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    entries = len(bundle.snapshot()["entries"])
    print(f"imported bundle: n={bundle.n}, {entries} entries")
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    if args.command == "catalog":
        return _cmd_catalog()
    if args.command == "run":
        return _cmd_run(args)
    if args.command == "mint-explicit":
        return _cmd_mint_explicit(args)
    if args.command == "verify-explicit":
        return _cmd_verify_explicit(args)
    if args.command == "attack-d1":
        return _cmd_attack_d1(args)
    if args.command == "wiesner":
        return _cmd_wiesner(args)
    if args.command == "keyed":
        return _cmd_keyed(args)
    if args.command == "bundle":
        return _cmd_bundle(args)
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
