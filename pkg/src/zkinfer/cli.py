"""Command-line pipeline: compile, setup, prove, verify, report, chunk-opt.

Exit codes: 0 success / accept, 1 reject, 2 malformed, missing or stale input.
Machine-readable JSON goes to stdout (or ``--report``); human tables go to stderr.
The engine is ``--engine`` or the ZKINFER_ENGINE environment variable (default bn254).
"""
from __future__ import annotations

import argparse
import json
import os
import random
import resource
import sys
import time
from pathlib import Path

from .algebra.engine import get_engine
from .circuit import WitnessError
from .layers.chunks import optimal_chunk_width
from .layers.compiler import ScheduleError, compile_from_meta, compile_model
from .layers.model import ModelError, load_model
from .proving import (
    KeyFormatError,
    Proof,
    ProvingError,
    ProvingKey,
    Statement,
    VerifyingKey,
    prove,
    setup,
    verify,
)
from .r1cs import ConstraintSystem, R1CSError

EXIT_OK = 0
EXIT_REJECT = 1
EXIT_BAD_INPUT = 2
ENGINE_ENV = "ZKINFER_ENGINE"


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_BAD_INPUT):
        super().__init__(message)
        self.code = code


def _err(msg: str) -> None:
    print(f"zkinfer: {msg}", file=sys.stderr)


def _read(path: str) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror}") from None


def _write(path: str, data: bytes | str) -> None:
    p = Path(path)
    if isinstance(data, str):
        p.write_text(data)
    else:
        p.write_bytes(data)


def _emit(obj: dict, report_path: str | None) -> None:
    text = json.dumps(obj, indent=1, default=str)
    if report_path:
        _write(report_path, text + "\n")
    else:
        print(text)


def _engine(args):
    name = args.engine or os.environ.get(ENGINE_ENV, "bn254")
    try:
        return get_engine(name)
    except ValueError as exc:
        raise CliError(str(exc)) from None


def _rng(args, engine):
    if args.seed is None:
        return None
    if engine.engine_id.startswith("mock") or args.insecure:
        return random.Random(args.seed)
    _err("--seed ignored: a fixed seed is only honored with the mock engine or --insecure")
    return None


def _load_circuit(path: str):
    data = _read(path)
    try:
        cs = ConstraintSystem.from_bytes(data)
    except (R1CSError, ValueError) as exc:
        raise CliError(f"{path}: not a circuit file ({exc})") from None
    if not cs.meta or "model" not in cs.meta:
        raise CliError(f"{path}: circuit file carries no model metadata")
    try:
        cc = compile_from_meta(cs.meta)
    except (ModelError, ScheduleError, ValueError, KeyError) as exc:
        raise CliError(f"{path}: cannot rebuild the circuit: {exc}") from None
    if cc.digest() != cs.digest():
        raise CliError(f"{path}: circuit bytes do not match their metadata")
    return cc


def _max_rss_kb() -> int:
    return resource.getrusage(resource.RUSAGE_SELF).ru_maxrss


def _load(cls, path: str):
    try:
        return cls.from_bytes(_read(path))
    except KeyFormatError as exc:
        raise CliError(f"{path}: {exc}") from None


def _table(report: dict) -> None:
    rows = [("layer", "type", "constraints", "predicted", "bits")]
    for r in report["layers"]:
        pred = "" if r.get("predicted") is None else f"{r['predicted']:.0f}"
        rows.append((r["label"], r["type"], str(r["total"]), pred, ",".join(map(str, r["bits"]))))
    lk = report.get("lookup")
    if lk:
        # the per-tag constraints are already charged to the layers above
        rows.append(("lookup", "table", str(lk["constraints"] - lk["tags"]), "", ""))
    widths = [max(len(row[i]) for row in rows) for i in range(5)]
    for row in rows:
        print("  ".join(c.ljust(w) for c, w in zip(row, widths)), file=sys.stderr)
    print(f"total constraints: {report['constraints']}  witness: {report['witness_size']}", file=sys.stderr)
    if lk:
        pred = lk["predicted_lookup_cost"]
        print(f"lookup: w={lk['chunk_width']}, {lk['tags']} tags, {lk['constraints']} constraints"
              + ("" if pred is None else f" (predicted {pred:.0f})"), file=sys.stderr)


# -- commands -------------------------------------------------------------------------------


def cmd_compile(args) -> int:
    text = _read(args.model).decode("utf-8", errors="replace")
    chunk = args.chunk_width
    if chunk not in (None, "auto"):
        try:
            chunk = int(chunk)
        except ValueError:
            raise CliError(f"--chunk-width must be an integer or 'auto', not {chunk!r}") from None
    try:
        graph = load_model(text)
        if args.mode == "groth16" and chunk == "auto":
            chunk = None
        cc = compile_model(graph, args.mode, args.rho, chunk, bits=args.bits)
    except (ModelError, ScheduleError, ValueError) as exc:
        raise CliError(f"{args.model}: {exc}") from None
    _write(args.output, cc.to_bytes())
    report = cc.report()
    report["circuit"] = args.output
    report["digest"] = cc.digest().hex()
    _table(report)
    _emit(report, args.report)
    return EXIT_OK


def cmd_setup(args) -> int:
    outs = args.output.split(",")
    if len(outs) != 2 or not all(outs):
        raise CliError("-o expects two paths: pk.bin,vk.bin")
    if len(set(outs + [args.circuit])) != 3:
        raise CliError("key paths must differ from each other and from the circuit")
    cc = _load_circuit(args.circuit)
    engine = _engine(args)
    t0 = time.perf_counter()
    pk, vk, td = setup(cc, engine, _rng(args, engine), keep_trapdoor=bool(args.test_trapdoor))
    _write(outs[0], pk.to_bytes())
    _write(outs[1], vk.to_bytes())
    if args.test_trapdoor:
        _write(args.test_trapdoor, td.to_json(vk.digest))
        _err(f"trapdoor written to {args.test_trapdoor}: these keys are NOT secure")
    _emit({"engine": engine.engine_id, "digest": vk.digest.hex(), "seconds": time.perf_counter() - t0,
           "rounds": vk.rounds, "ic_size": len(vk.ic)}, args.report)
    return EXIT_OK


def _read_input(path: str):
    try:
        data = json.loads(_read(path))
    except json.JSONDecodeError as exc:
        raise CliError(f"{path}: bad JSON ({exc})") from None
    if isinstance(data, dict):
        if "input" not in data:
            raise CliError(f"{path}: expected an 'input' array")
        data = data["input"]
    return data


def cmd_prove(args) -> int:
    cc = _load_circuit(args.circuit)
    pk = _load(ProvingKey, args.pk)
    if pk.digest != cc.digest():
        raise CliError("stale keys: the proving key was made for a different circuit")
    engine = pk.engine
    x = _read_input(args.input)
    rss_before = _max_rss_kb()
    t0 = time.perf_counter()
    try:
        proof, statement = prove(pk, cc, x, rng=_rng(args, engine))
    except (WitnessError, ProvingError, ValueError) as exc:
        raise CliError(f"cannot prove: {exc}") from None
    elapsed = time.perf_counter() - t0
    _write(args.output, proof.to_bytes())
    _write(args.public, statement.to_json(engine.scalar_field.byte_size) + "\n")
    if args.json:
        _write(args.json, proof.to_json() + "\n")
    _emit({
        "engine": engine.engine_id,
        "prove_seconds": elapsed,
        # peak resident set size of the process, before and after proving
        "max_rss_kb_before": rss_before,
        "max_rss_kb": _max_rss_kb(),
        "constraints": cc.cs.num_constraints,
        "proof_shape": proof.shape(),
        "outputs": [float(v) for v in cc.decode_outputs(statement.outputs)],
    }, args.report)
    return EXIT_OK


def cmd_verify(args) -> int:
    vk = _load(VerifyingKey, args.vk)
    try:
        statement = Statement.from_json(_read(args.public).decode("utf-8", errors="replace"))
    except KeyFormatError as exc:
        raise CliError(f"{args.public}: {exc}") from None
    proof = _load(Proof, args.proof)
    if proof.digest != vk.digest or proof.engine.engine_id != vk.engine.engine_id:
        raise CliError("stale keys: the proof and the verifying key belong to different circuits")
    verdict = verify(vk, statement, proof)
    out = {"accepted": verdict.accepted, "reason": verdict.reason, "pairings": verdict.pairings,
           "hashes": verdict.hashes}
    if verdict.reason == "public-input":
        _emit(out, args.report)
        raise CliError("public io does not match the verifying key")
    _emit(out, args.report)
    _err("proof accepted" if verdict else f"proof rejected ({verdict.reason})")
    return EXIT_OK if verdict else EXIT_REJECT


def cmd_chunk_opt(args) -> int:
    if args.chunks < 1 or args.bits < 1:
        raise CliError("--chunks and --bits must be positive")
    _emit(optimal_chunk_width(args.chunks, args.bits).to_dict(), args.report)
    return EXIT_OK


def cmd_report(args) -> int:
    cc = _load_circuit(args.circuit)
    report = cc.report()
    report["digest"] = cc.digest().hex()
    _table(report)
    _emit(report, args.report)
    return EXIT_OK


# -- entry point ----------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="zkinfer", description="Prove neural-network inference with Groth16-style SNARKs.")
    ap.add_argument("--engine", choices=["mock", "bn254", "real"], help=f"pairing engine (default: ${ENGINE_ENV} or bn254)")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, seed: bool = False):
        p.add_argument("--report", help="write the JSON report here instead of stdout")
        if seed:
            p.add_argument("--seed", type=int, help="fixed randomness (mock engine or --insecure only)")
            p.add_argument("--insecure", action="store_true", help="honor --seed on a real engine")

    p = sub.add_parser("compile", help="model JSON -> circuit file")
    p.add_argument("--model", required=True)
    p.add_argument("--mode", choices=["groth16", "ultragroth"], default="groth16")
    p.add_argument("--rho", type=int)
    p.add_argument("--chunk-width", default=None, help="integer or 'auto'")
    p.add_argument("--bits", type=int, help="override the activation bit width")
    p.add_argument("-o", "--output", required=True)
    common(p)
    p.set_defaults(fn=cmd_compile)

    p = sub.add_parser("setup", help="circuit -> proving and verifying keys")
    p.add_argument("-c", "--circuit", required=True)
    p.add_argument("-o", "--output", required=True, help="pk.bin,vk.bin")
    p.add_argument("--test-trapdoor", help="keep the setup secrets in this file (tests only)")
    common(p, seed=True)
    p.set_defaults(fn=cmd_setup)

    p = sub.add_parser("prove", help="produce a proof for one input")
    p.add_argument("-c", "--circuit", required=True)
    p.add_argument("--pk", required=True)
    p.add_argument("--input", required=True, help='JSON: {"input": [...]} or a bare array')
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--public", required=True, help="public io JSON to write")
    p.add_argument("--json", help="also export the proof as JSON")
    common(p, seed=True)
    p.set_defaults(fn=cmd_prove)

    p = sub.add_parser("verify", help="check a proof; exit 0 accept, 1 reject, 2 bad input")
    p.add_argument("--vk", required=True)
    p.add_argument("--public", required=True)
    p.add_argument("--proof", required=True)
    common(p)
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("chunk-opt", help="best lookup chunk width for L values of b bits")
    p.add_argument("--chunks", type=int, required=True, help="number of looked-up values L")
    p.add_argument("--bits", type=int, default=254)
    common(p)
    p.set_defaults(fn=cmd_chunk_opt)

    p = sub.add_parser("report", help="constraint report of a circuit file")
    p.add_argument("-c", "--circuit", required=True)
    common(p)
    p.set_defaults(fn=cmd_report)
    return ap


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_BAD_INPUT if exc.code else EXIT_OK
    try:
        return args.fn(args)
    except CliError as exc:
        _err(str(exc))
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
