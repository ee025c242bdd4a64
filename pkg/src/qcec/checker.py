"""Equivalence checking of a circuit against a compiled implementation.

The checker keeps one running product D = (gates of G applied from the
left) . (inverse gates of G' applied from the right), starting from the
identity. If the two circuits agree, D returns to the identity diagram,
and interleaving the two sides well keeps D small the whole way. Three
interleavings are offered:

  naive         build both diagrams fully, compare the roots
  proportional  fixed gate ratio per side
  flow          per-gate output budgets taken from the compile record
                (or from static per-kind cost estimates without one)

Compiled circuits live on device wires. The record's initial layout plus
its routing-swap events let every G' gate be translated back to the wire
numbering of G on the fly: a routing swap only permutes the tracked
wire map and costs nothing, which both keeps D small and makes the final
comparison independent of where the compiler left the qubits.
"""

from __future__ import annotations

import cmath
import math
import time
from dataclasses import dataclass
from typing import NamedTuple

from .circuit import (Circuit, FusedBlock, Gate, fuse_runs_with_origins,
                      fuse_single_qubit_runs)
from .compiler import CompileRecord, RecordError
from .dd import DDPackage, UnitaryDD

STRATEGIES = ("naive", "proportional", "flow")

RESULT_VERSION = 1


@dataclass(frozen=True)
class EcOptions:
    tolerance: float = 1e-9
    up_to_global_phase: bool = False
    watermark: int = 100_000      # running-product size that triggers fallback
    node_limit: int = 2_000_000   # live nodes at which the check gives up
    gc_threshold: int = 1_000_000  # allocations between mark-sweep passes
    deadline: float | None = None  # wall-clock budget in seconds
    assumed_opt_level: int = 0     # cost table used without a record


@dataclass
class EcResult:
    verdict: str                  # equivalent | not_equivalent | unknown
    strategy: str
    seconds: float
    peak_nodes: int
    gates_g: int
    gates_g_prime: int
    fallback: bool = False
    reason: str | None = None

    def to_dict(self) -> dict:
        out = {
            "version": RESULT_VERSION,
            "verdict": self.verdict,
            "strategy": self.strategy,
            "seconds": self.seconds,
            "peak_nodes": self.peak_nodes,
            "gates_g": self.gates_g,
            "gates_g_prime": self.gates_g_prime,
            "fallback": self.fallback,
        }
        if self.reason is not None:
            out["reason"] = self.reason
        return out


class Marker(NamedTuple):
    """A routing swap of two device wires: updates the wire map, applies
    no gate."""
    a: int
    b: int


class QubitMap:
    """Live wire assignment: which source qubit each device wire carries.

    Both directions are kept so lookups stay O(1); swap_update keeps them
    consistent and is its own inverse.
    """

    __slots__ = ("log_at", "phys_at")

    def __init__(self, layout):
        n = len(layout)
        self.log_at = [0] * n       # device wire -> source qubit
        self.phys_at = list(layout)  # source qubit -> device wire
        for logical, phys in enumerate(layout):
            self.log_at[phys] = logical

    def logical_at(self, phys: int) -> int:
        return self.log_at[phys]

    def physical_of(self, logical: int) -> int:
        return self.phys_at[logical]

    def swap_update(self, a: int, b: int):
        """The wires a and b exchange their qubits."""
        la, lb = self.log_at[a], self.log_at[b]
        self.log_at[a], self.log_at[b] = lb, la
        self.phys_at[la], self.phys_at[lb] = b, a

    def copy(self) -> "QubitMap":
        return QubitMap(self.phys_at)

    def __eq__(self, other):
        return (isinstance(other, QubitMap)
                and self.log_at == other.log_at)

    def __repr__(self):
        return f"QubitMap({self.phys_at})"


@dataclass(frozen=True)
class OracleTable:
    """Expected number of compiled gates per source gate.

    Record-sourced counts are exact except where optimization crossed a
    source-gate boundary; static counts come from the synthesis shapes
    alone. Either way the table only paces the checker, it never affects
    a verdict.
    """
    counts: tuple[int, ...]
    approximate: tuple[bool, ...]
    source: str                   # "record" or "static"


def build_oracle(g: Circuit, record: CompileRecord | None = None,
                 opt_level: int = 0) -> OracleTable:
    if record is not None:
        if record.num_source_gates != len(g.gates):
            raise RecordError(
                f"record covers {record.num_source_gates} source gates,"
                f" circuit has {len(g.gates)}")
        return OracleTable(tuple(c for _, c, _ in record.ranges),
                           tuple(x for _, _, x in record.ranges),
                           "record")
    counts = tuple(static_gate_cost(gate, opt_level) for gate in g.gates)
    return OracleTable(counts, (False,) * len(counts), "static")


def preprocess(g: Circuit, gp: Circuit) -> tuple[Circuit, list]:
    """Fuse G's single-qubit runs and rewrite swap-shaped content of G'
    into Markers; both unitaries are unchanged (G up to tallied phase)."""
    return fuse_single_qubit_runs(g), build_right_stream(gp, None)


class _Abort(Exception):
    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


def _is_cx(g: Gate, pair: tuple[int, int]) -> bool:
    return g.kind == "cx" and set(g.qubits) == set(pair)


def _alternating(a: Gate, b: Gate) -> bool:
    return a.controls == b.targets and a.targets == b.controls


def build_right_stream(gp: Circuit, record: CompileRecord | None) -> list:
    """Turn G' into a list of Gate and Marker items.

    With a record, every swap event is located and verified in place: three
    alternating CNOTs become one Marker; a pair left over from optimization
    becomes a Marker plus a replay of its first CNOT (algebraically equal).
    Without a record, swap-shaped content is pattern-matched instead:
    literal swap gates and alternating CNOT triples become Markers, and a
    two-CNOT alternating remnant becomes a Marker plus a replay of its
    first CNOT.  Both rewrites leave the represented product unchanged.
    """
    gates = gp.gates
    total = len(gates)
    if record is None:
        items: list = []
        i = 0
        while i < total:
            g = gates[i]
            if g.kind == "swap":
                items.append(Marker(*sorted(g.qubits)))
                i += 1
            elif (g.kind == "cx" and i + 1 < total
                    and _alternating(g, gates[i + 1])
                    and _is_cx(gates[i + 1], tuple(g.qubits))):
                items.append(Marker(*sorted(g.qubits)))
                if i + 2 < total and gates[i + 2] == g:
                    i += 3
                else:
                    items.append(g)
                    i += 2
            else:
                items.append(g)
                i += 1
        return items

    # Ranges with gates are contiguous spans of G'; routing-swap segments sit
    # between and inside those spans. Split at span starts, then fit each
    # span's events against its ordinary-gate budget.
    starts: dict[int, int] = {}
    for s, c, _ in record.ranges:
        if c:
            if s in starts:
                raise RecordError(f"two ranges claim gate {s}")
            starts[s] = c
    boundaries = sorted({0, total, *starts})
    events = list(record.swap_events)
    items = []
    ei = 0
    for lo, hi in zip(boundaries, boundaries[1:]):
        evs = []
        while ei < len(events) and events[ei][0] < hi:
            if events[ei][0] < lo:
                raise RecordError(
                    f"swap event at gate {events[ei][0]} overlaps a range")
            evs.append(events[ei])
            ei += 1
        lens = _fit_span(gates, lo, hi, starts.get(lo, 0), evs)
        if lens is None:
            raise RecordError(
                f"record does not fit compiled gates {lo}..{hi}")
        cursor = lo
        for (pos, pair), length in zip(evs, lens):
            items.extend(gates[cursor:pos])
            items.append(Marker(*pair))
            if length == 2:
                # cx(a,b) cx(b,a) == swap then cx(a,b) on the swapped wires
                items.append(gates[pos])
            cursor = pos + length
        items.extend(gates[cursor:hi])
    if ei != len(events):
        raise RecordError("swap event beyond the compiled circuit")
    return items


def _swap_pattern_at(gates, pos: int, pair, length: int) -> bool:
    if pos + length > len(gates):
        return False
    g0, g1 = gates[pos], gates[pos + 1]
    if not (_is_cx(g0, pair) and _is_cx(g1, pair) and _alternating(g0, g1)):
        return False
    return length == 2 or gates[pos + 2] == g0


def _fit_span(gates, lo: int, hi: int, budget: int,
              evs: list) -> list[int] | None:
    """Assign each event in [lo, hi) a length of 3 or 2 such that patterns
    match and exactly `budget` ordinary gates remain. Returns the lengths
    in event order, preferring full triples."""

    def fit(cursor: int, k: int, left: int) -> list[int] | None:
        if k == len(evs):
            return [] if hi - cursor == left else None
        pos = evs[k][0]
        gap = pos - cursor
        if gap < 0 or gap > left:
            return None
        for length in (3, 2):
            if _swap_pattern_at(gates, pos, evs[k][1], length):
                rest = fit(pos + length, k + 1, left - gap)
                if rest is not None:
                    return [length, *rest]
        return None

    return fit(lo, 0, budget)


def static_gate_cost(g: Gate, opt_level: int) -> int:
    """Expected compiled gate count for one source gate, ignoring routing."""
    per_toffoli = 14 if opt_level >= 1 else 15
    if g.kind == "cz":
        return 3
    if g.kind == "swap":
        return 3
    if g.kind == "cx":
        return 1
    if g.kind == "mcx":
        k = len(g.controls)
        if k == 1:
            return 1
        return (2 * k - 3) * per_toffoli
    return 1


def _extend_layout(layout, n: int) -> list[int]:
    out = list(layout)
    used = set(out)
    if len(used) != len(out) or any(p < 0 or p >= n for p in out):
        raise RecordError(f"bad layout {layout} for {n} wires")
    out.extend(p for p in range(n) if p not in used)
    return out


class _Engine:
    """Shared mechanics: the running product, wire map, resource guards
    and peak sampling."""

    def __init__(self, n: int, layout_ext: list[int], opts: EcOptions):
        self.pkg = DDPackage()
        self.n = n
        self.opts = opts
        self.d = self.pkg.make_identity(n)
        self.map = QubitMap(layout_ext)
        self.peak = max(1, n)
        self.size = n
        self.coarse = False
        self.muls = 0
        self.extra_roots: list[UnitaryDD] = []
        self.t0 = time.perf_counter()
        self.deadline = (self.t0 + opts.deadline
                         if opts.deadline is not None else None)

    def elapsed(self) -> float:
        return time.perf_counter() - self.t0

    def _tick(self):
        if self.deadline is not None and time.perf_counter() > self.deadline:
            raise _Abort("deadline exceeded")
        pkg = self.pkg
        if pkg.unique_size > self.opts.gc_threshold:
            pkg.gc([self.d, *self.extra_roots])
            if pkg.unique_size > self.opts.node_limit:
                raise _Abort("node limit exceeded")
        self.muls += 1
        if not self.coarse or (self.muls & 63) == 0:
            sz = pkg.node_count(self.d)
            self.size = sz
            if sz > self.peak:
                self.peak = sz
            self.coarse = sz > 4 * self.opts.watermark

    def apply_left(self, g: Gate):
        self.d = self.pkg.apply_left(self.d, g)
        self._tick()

    def apply_right(self, item) -> bool:
        """Consume one right-stream item; returns True when it cost budget."""
        if isinstance(item, Marker):
            self.map.swap_update(item.a, item.b)
            return False
        g = item.relabeled(self.map.log_at)
        self.d = self.pkg.apply_right_inverse(self.d, g)
        self._tick()
        return True


def _prepare(g: Circuit, gp: Circuit, record: CompileRecord | None,
             opts: EcOptions):
    if g.num_qubits > gp.num_qubits:
        raise ValueError(
            f"G has {g.num_qubits} qubits but G' only {gp.num_qubits};"
            " the compiled circuit cannot be narrower")
    n = gp.num_qubits
    if record is not None:
        if record.num_source_gates != len(g.gates):
            raise RecordError(
                f"record covers {record.num_source_gates} source gates,"
                f" circuit has {len(g.gates)}")
        if record.num_logical < g.num_qubits or record.num_logical > n:
            raise RecordError("record layout width out of range")
        layout_ext = _extend_layout(record.initial_layout, n)
    else:
        layout_ext = list(range(n))

    gw = g.widened(n)
    ancillas = set(gw.ancillas)
    inv0 = {p: l for l, p in enumerate(layout_ext)}
    for p, flagged in enumerate(gp.ancilla_flags):
        if flagged:
            ancillas.add(inv0[p])
    blocks = fuse_runs_with_origins(g.gates)
    items = build_right_stream(gp, record)
    return n, layout_ext, ancillas, blocks, items


def _block_budgets(blocks: list[FusedBlock], table: OracleTable) -> list[int]:
    return [sum(table.counts[i] for i in b.origins) for b in blocks]


def _final_weight(pkg: DDPackage, u: UnitaryDD, ancillas) -> tuple:
    """(node, complex weight) of the ancilla-reduced diagram."""
    m = pkg.modify_ancillaries(u, ancillas) if ancillas else u
    return m.root.node, m.root.weight.value


def _verdict(pkg: DDPackage, d: UnitaryDD, ancillas, phase: float,
             opts: EcOptions) -> str:
    node, w = _final_weight(pkg, d, ancillas)
    ref_node, ref_w = _final_weight(pkg, pkg.make_identity(d.n), ancillas)
    if node is not ref_node:
        return "not_equivalent"
    w *= cmath.exp(1j * phase)
    if opts.up_to_global_phase:
        ok = abs(abs(w) - abs(ref_w)) <= opts.tolerance
    else:
        ok = abs(w - ref_w) <= opts.tolerance
    return "equivalent" if ok else "not_equivalent"


def _compare_roots(pkg: DDPackage, a: UnitaryDD, b: UnitaryDD, ancillas,
                   phase_a: float, phase_b: float, opts: EcOptions) -> str:
    node_a, wa = _final_weight(pkg, a, ancillas)
    node_b, wb = _final_weight(pkg, b, ancillas)
    if node_a is not node_b:
        return "not_equivalent"
    wa *= cmath.exp(1j * phase_a)
    wb *= cmath.exp(1j * phase_b)
    if opts.up_to_global_phase:
        ok = abs(abs(wa) - abs(wb)) <= opts.tolerance
    else:
        ok = abs(wa - wb) <= opts.tolerance
    return "equivalent" if ok else "not_equivalent"


def check_equivalence(g: Circuit, gp: Circuit,
                      record: CompileRecord | None = None,
                      strategy: str = "flow",
                      options: EcOptions | None = None,
                      oracle: OracleTable | None = None) -> EcResult:
    """Decide whether G' implements G.

    G' may be wider (device width); extra wires, mcx scratch qubits and
    wires flagged ancillary must start and end in |0> for inputs where
    every ancilla starts in |0>. Verdict `unknown` means a resource or
    time budget ran out, never a silent guess. A caller-supplied oracle
    table overrides the pacing counts; it cannot change any verdict.
    """
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}; have {STRATEGIES}")
    opts = options or EcOptions()
    n, layout_ext, ancillas, blocks, items = _prepare(g, gp, record, opts)
    eng = _Engine(n, layout_ext, opts)
    phase_left = g.global_phase
    phase_right = gp.global_phase
    fallback = False

    def result(verdict: str, reason: str | None = None) -> EcResult:
        return EcResult(verdict, strategy, eng.elapsed(), eng.peak,
                        len(g.gates), len(gp.gates), fallback, reason)

    try:
        if strategy == "naive":
            for b in blocks:
                phase_left += b.phase
                for gate in b.gates:
                    eng.apply_left(gate)
            d_left = eng.d
            eng.extra_roots = [d_left]
            eng.d = eng.pkg.make_identity(n)
            eng.coarse = False
            for item in items:
                if isinstance(item, Marker):
                    eng.apply_right(item)
                else:
                    eng.d = eng.pkg.apply_left(
                        eng.d, item.relabeled(eng.map.log_at))
                    eng._tick()
            verdict = _compare_roots(eng.pkg, d_left, eng.d, ancillas,
                                     phase_left, phase_right, opts)
            return result(verdict)

        n_right_gates = sum(1 for it in items if not isinstance(it, Marker))
        table = oracle or build_oracle(g, record, opts.assumed_opt_level)
        if len(table.counts) != len(g.gates):
            raise ValueError(f"oracle table covers {len(table.counts)}"
                             f" gates, circuit has {len(g.gates)}")
        budgets = _block_budgets(blocks, table)
        rate = math.ceil(n_right_gates / len(blocks)) if blocks else 0
        ri = 0

        def consume(k: int):
            nonlocal ri
            while k > 0 and ri < len(items):
                if eng.apply_right(items[ri]):
                    k -= 1
                ri += 1

        for bi, b in enumerate(blocks):
            phase_left += b.phase
            for gate in b.gates:
                eng.apply_left(gate)
            if strategy == "flow" and not fallback:
                consume(budgets[bi])
                if eng.size > opts.watermark:
                    fallback = True
                    left_blocks = len(blocks) - bi - 1
                    remaining = sum(
                        1 for it in items[ri:] if not isinstance(it, Marker))
                    rate = (math.ceil(remaining / left_blocks)
                            if left_blocks else remaining)
            else:
                consume(rate)
        consume(len(items))  # drain
        return result(_verdict(eng.pkg, eng.d, ancillas,
                               phase_left - phase_right, opts))
    except _Abort as a:
        return result("unknown", a.reason)


def check_all(g: Circuit, gp: Circuit, record: CompileRecord | None = None,
              options: EcOptions | None = None) -> dict[str, EcResult]:
    """Run every strategy; decided verdicts must agree with each other."""
    results = {s: check_equivalence(g, gp, record, s, options)
               for s in STRATEGIES}
    decided = {r.verdict for r in results.values() if r.verdict != "unknown"}
    if len(decided) > 1:
        raise RuntimeError(f"strategies disagree: "
                           f"{ {s: r.verdict for s, r in results.items()} }")
    return results
