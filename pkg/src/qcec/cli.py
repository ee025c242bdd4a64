"""Command line interface.

Exit codes for `verify`: 0 equivalent, 1 not equivalent, 2 unknown or any
error. `compile` and `bench` use 0 on success and 2 on error; `bench` uses
1 when a decided verdict contradicts the expected one.

QCEC_SEED in the environment seeds anything random when --seed is absent.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys
from pathlib import Path

from .checker import (STRATEGIES, EcOptions, check_all,
                      check_equivalence)
from .circuit import Circuit, UnsupportedGateError
from .compiler import (CompileError, CompileRecord, RecordError,
                       compile_circuit)
from .corpus import random_circuit, random_layout, replace_gate_defect
from .coupling import PRESETS, CouplingMap
from .qasm import QasmError, emit_qasm, parse_qasm

EXIT_EQUIVALENT = 0
EXIT_NOT_EQUIVALENT = 1
EXIT_UNKNOWN = 2

_VERDICT_EXIT = {
    "equivalent": EXIT_EQUIVALENT,
    "not_equivalent": EXIT_NOT_EQUIVALENT,
    "unknown": EXIT_UNKNOWN,
}


def _load_circuit(path: str) -> Circuit:
    return parse_qasm(Path(path).read_text())


def _load_coupling(name: str) -> CouplingMap:
    if name in PRESETS:
        return CouplingMap.preset(name)
    return CouplingMap.from_json(Path(name).read_text())


def _seed(args) -> int:
    if getattr(args, "seed", None) is not None:
        return args.seed
    env = os.environ.get("QCEC_SEED")
    return int(env) if env else 0


def _options(args) -> EcOptions:
    return EcOptions(
        tolerance=args.tolerance,
        up_to_global_phase=args.up_to_global_phase,
        watermark=args.watermark,
        deadline=args.timeout,
        assumed_opt_level=args.opt_level_hint,
    )


def cmd_verify(args) -> int:
    g = _load_circuit(args.circuit)
    gp = _load_circuit(args.compiled)
    record = None
    if args.record:
        record = CompileRecord.from_json(Path(args.record).read_text())
    opts = _options(args)
    if args.strategy == "all":
        results = check_all(g, gp, record, opts)
        decided = {r.verdict for r in results.values()
                   if r.verdict != "unknown"}
        verdict = decided.pop() if decided else "unknown"
        report = {
            "version": 1,
            "verdict": verdict,
            "strategies": {s: r.to_dict() for s, r in results.items()},
        }
    else:
        res = check_equivalence(g, gp, record, args.strategy, opts)
        verdict = res.verdict
        report = res.to_dict()
    print(json.dumps(report, indent=2))
    return _VERDICT_EXIT[verdict]


def cmd_compile(args) -> int:
    g = _load_circuit(args.circuit)
    cmap = _load_coupling(args.coupling)
    layout = None
    if args.layout:
        layout = [int(x) for x in args.layout.replace(",", " ").split()]
    elif args.random_layout:
        rng = random.Random(_seed(args))
        layout = random_layout(g.num_qubits, cmap.num_qubits, rng)
    compiled, record = compile_circuit(g, cmap, args.opt_level, layout)
    Path(args.out).write_text(emit_qasm(compiled))
    Path(args.record_out).write_text(record.to_json())
    print(json.dumps({
        "gates_in": len(g.gates),
        "gates_out": len(compiled.gates),
        "swaps": len(record.swap_events),
        "opt_level": args.opt_level,
        "coupling": cmap.name,
        "out": args.out,
        "record": args.record_out,
    }, indent=2))
    return 0


def _bench_generate(args, rng: random.Random) -> list[str]:
    cmap = _load_coupling(args.coupling)
    out = Path(args.dir)
    out.mkdir(parents=True, exist_ok=True)
    names = []
    for i in range(args.count):
        g = random_circuit(args.qubits, args.gates, rng,
                           max_mcx=args.max_mcx)
        layout = random_layout(g.num_qubits, cmap.num_qubits, rng)
        compiled, record = compile_circuit(g, cmap, args.opt_level, layout)
        broken = rng.random() < 0.5
        if broken:
            g, _ = replace_gate_defect(g, rng)
        name = f"{'neq' if broken else 'eq'}{i:03d}"
        (out / f"{name}.qasm").write_text(emit_qasm(g))
        (out / f"{name}.compiled.qasm").write_text(emit_qasm(compiled))
        (out / f"{name}.record.json").write_text(record.to_json())
        names.append(name)
    return names


def cmd_bench(args) -> int:
    rng = random.Random(_seed(args))
    if args.generate:
        _bench_generate(args, rng)
    bench_dir = Path(args.dir)
    sources = sorted(bench_dir.glob("*.qasm"))
    names = [p.stem for p in sources if not p.stem.endswith(".compiled")]
    if not names:
        print(f"no benchmark triples under {bench_dir}", file=sys.stderr)
        return 2
    strategies = (list(STRATEGIES) if args.strategy == "all"
                  else [args.strategy])
    opts = _options(args)
    rows = []
    mismatches = 0
    for name in names:
        g = _load_circuit(str(bench_dir / f"{name}.qasm"))
        gp = _load_circuit(str(bench_dir / f"{name}.compiled.qasm"))
        rec_path = bench_dir / f"{name}.record.json"
        record = (CompileRecord.from_json(rec_path.read_text())
                  if rec_path.exists() else None)
        expected = ("not_equivalent" if name.startswith("neq")
                    else "equivalent" if name.startswith("eq") else None)
        for strat in strategies:
            res = check_equivalence(g, gp, record, strat, opts)
            ok = (expected is None or res.verdict == "unknown"
                  or res.verdict == expected)
            if not ok:
                mismatches += 1
            rows.append({"name": name, "expected": expected,
                         **res.to_dict(), "ok": ok})
            print(f"{name:>10} {strat:>12} {res.verdict:>15} "
                  f"{res.seconds:8.3f}s peak={res.peak_nodes:<8d}"
                  f"{' fallback' if res.fallback else ''}"
                  f"{' MISMATCH' if not ok else ''}")
    if args.json:
        Path(args.json).write_text(json.dumps(rows, indent=2))
    decided = sum(1 for r in rows if r["verdict"] != "unknown")
    print(f"{len(rows)} runs, {decided} decided, {mismatches} mismatches")
    return 1 if mismatches else 0


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="qcec",
        description="equivalence checking of quantum circuits against"
                    " compiled output")
    sub = p.add_subparsers(dest="command", required=True)

    def add_check_opts(sp):
        sp.add_argument("--tolerance", type=float, default=1e-9)
        sp.add_argument("--up-to-global-phase", action="store_true",
                        help="ignore a global phase difference")
        sp.add_argument("--timeout", type=float, default=None,
                        help="wall clock budget per check, in seconds")
        sp.add_argument("--watermark", type=int, default=100_000,
                        help="product size that triggers the flow fallback")
        sp.add_argument("--opt-level-hint", type=int, default=0,
                        choices=(0, 1),
                        help="cost table used when no record is given")

    v = sub.add_parser("verify", help="check a circuit against its"
                                      " compiled form")
    v.add_argument("circuit")
    v.add_argument("compiled")
    v.add_argument("--record", help="compile record JSON")
    v.add_argument("--strategy", default="flow",
                   choices=(*STRATEGIES, "all"))
    add_check_opts(v)
    v.set_defaults(func=cmd_verify)

    c = sub.add_parser("compile", help="compile a circuit onto a device")
    c.add_argument("circuit")
    c.add_argument("--coupling", required=True,
                   help=f"one of {', '.join(PRESETS)} or a JSON file")
    c.add_argument("--opt-level", type=int, default=0, choices=(0, 1))
    c.add_argument("--layout", help="initial layout, e.g. '2,0,1'")
    c.add_argument("--random-layout", action="store_true")
    c.add_argument("--seed", type=int, default=None)
    c.add_argument("--out", required=True)
    c.add_argument("--record-out", required=True)
    c.set_defaults(func=cmd_compile)

    b = sub.add_parser("bench", help="run (and optionally generate)"
                                     " benchmark triples")
    b.add_argument("dir")
    b.add_argument("--generate", action="store_true")
    b.add_argument("--count", type=int, default=10)
    b.add_argument("--qubits", type=int, default=5)
    b.add_argument("--gates", type=int, default=60)
    b.add_argument("--max-mcx", type=int, default=2)
    b.add_argument("--coupling", default="london")
    b.add_argument("--opt-level", type=int, default=0, choices=(0, 1))
    b.add_argument("--seed", type=int, default=None)
    b.add_argument("--strategy", default="all",
                   choices=(*STRATEGIES, "all"))
    b.add_argument("--json", help="also write results to this JSON file")
    add_check_opts(b)
    b.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (QasmError, RecordError, CompileError, UnsupportedGateError,
            ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_UNKNOWN


if __name__ == "__main__":
    sys.exit(main())
