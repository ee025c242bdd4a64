"""A small deterministic transpiler that keeps an account of its work.

Pipeline: expand gates outside the device's native set (cz, ccx, mcx), route
two-qubit gates onto the coupling map with swap insertions, then optionally
run a light peephole pass (opt level 1). Besides the compiled circuit it
returns a CompileRecord that maps every source gate to its surviving output
range and lists every routing swap, which is what lets a checker replay the
compilation instead of guessing.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .circuit import Circuit, Gate, gate_for_matrix, gate_matrix_2x2, mod_tau
from .coupling import CouplingMap


class CompileError(ValueError):
    pass


class RecordError(ValueError):
    pass


@dataclass
class CompileRecord:
    """What the compiler did, gate by gate.

    ranges[i] = (start, count, crossed): source gate i owns `count` output
    gates beginning at index `start` of the compiled gate list; `crossed`
    marks gates that lost or gained material across a range boundary during
    optimization. Counts exclude routing swaps, which appear one per entry
    in swap_events as (index of their first CNOT, physical pair).
    """
    initial_layout: list[int]
    ranges: list[tuple[int, int, bool]]
    swap_events: list[tuple[int, tuple[int, int]]]
    opt_level: int
    num_logical: int
    num_source_gates: int
    version: int = 1

    def to_json(self) -> str:
        return json.dumps({
            "version": self.version,
            "initial_layout": list(self.initial_layout),
            "ranges": [[s, c, bool(x)] for s, c, x in self.ranges],
            "swap_events": [[p, list(pair)] for p, pair in self.swap_events],
            "opt_level": self.opt_level,
            "num_logical": self.num_logical,
            "num_source_gates": self.num_source_gates,
        }, indent=2)

    @staticmethod
    def from_json(text: str) -> "CompileRecord":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise RecordError(f"record is not valid JSON: {e}") from None
        try:
            rec = CompileRecord(
                initial_layout=[int(p) for p in data["initial_layout"]],
                ranges=[(int(s), int(c), bool(x)) for s, c, x in data["ranges"]],
                swap_events=[(int(p), (int(a), int(b)))
                             for p, (a, b) in data["swap_events"]],
                opt_level=int(data["opt_level"]),
                num_logical=int(data["num_logical"]),
                num_source_gates=int(data["num_source_gates"]),
                version=int(data.get("version", 1)),
            )
        except (KeyError, TypeError, ValueError) as e:
            raise RecordError(f"malformed record: {e}") from None
        rec.check_shape()
        return rec

    def check_shape(self):
        if self.num_source_gates != len(self.ranges):
            raise RecordError("one range per source gate required")
        if len(self.initial_layout) != self.num_logical:
            raise RecordError("initial_layout must cover every logical qubit")
        if len(set(self.initial_layout)) != len(self.initial_layout):
            raise RecordError("initial_layout repeats a physical qubit")
        prev = 0
        for s, c, _ in self.ranges:
            if c < 0 or s < prev:
                raise RecordError("ranges must be sorted with non-negative counts")
            prev = s
        prev_pos = -1
        for p, (a, b) in self.swap_events:
            if p <= prev_pos:
                raise RecordError("swap events must be sorted by position")
            if a == b:
                raise RecordError(f"degenerate swap event on qubit {a}")
            prev_pos = p


# gate expansion -----------------------------------------------------------

def _toffoli(c1: int, c2: int, t: int) -> list[Gate]:
    """CCX over {h, t, tdg, cx}, exact including phase."""
    T, Tdg, H = "t", "tdg", "h"

    def cx(c, tt):
        return Gate("cx", (tt,), (c,))

    return [
        Gate(H, (t,)),
        cx(c2, t), Gate(Tdg, (t,)),
        cx(c1, t), Gate(T, (t,)),
        cx(c2, t), Gate(Tdg, (t,)),
        cx(c1, t), Gate(T, (c2,)), Gate(T, (t,)), Gate(H, (t,)),
        cx(c1, c2), Gate(T, (c1,)), Gate(Tdg, (c2,)),
        cx(c1, c2),
    ]


def _mcx_chain(controls: tuple[int, ...], target: int,
               ancillas: list[int]) -> list[Gate]:
    """k-control X as 2k-3 Toffolis over k-2 borrowed clean ancillas."""
    k = len(controls)
    need = k - 2
    if len(ancillas) < need:
        raise CompileError(f"mcx with {k} controls needs {need} ancillas")
    out: list[Gate] = []
    compute: list[tuple[int, int, int]] = []
    prev = None
    for j in range(need):
        c1 = controls[j] if j == 0 else prev
        c2 = controls[j + 1]
        compute.append((c1, c2, ancillas[j]))
        prev = ancillas[j]
    for c1, c2, a in compute:
        out.extend(_toffoli(c1, c2, a))
    out.extend(_toffoli(controls[-1], prev, target))
    for c1, c2, a in reversed(compute):
        out.extend(_toffoli(c1, c2, a))
    return out


def ancilla_demand(c: Circuit) -> int:
    """Scratch qubits needed to expand every mcx in the circuit."""
    need = 0
    for g in c.gates:
        if g.kind == "mcx" and len(g.controls) >= 3:
            need = max(need, len(g.controls) - 2)
    return need


def _synthesize(c: Circuit) -> tuple[list[tuple[Gate, int]], int]:
    """Expand to {1q, cx, swap}; returns (gate, source index) pairs and the
    total logical width including scratch ancillas."""
    pool = ancilla_demand(c)
    base = c.num_qubits
    scratch = list(range(base, base + pool))
    out: list[tuple[Gate, int]] = []
    for i, g in enumerate(c.gates):
        if g.kind == "cz":
            t = g.targets[0]
            cc = g.controls[0]
            out.append((Gate("h", (t,)), i))
            out.append((Gate("cx", (t,), (cc,)), i))
            out.append((Gate("h", (t,)), i))
        elif g.kind == "mcx":
            ctl = g.controls
            if len(ctl) == 1:
                out.append((Gate("cx", g.targets, ctl), i))
            elif len(ctl) == 2:
                out.extend((x, i) for x in _toffoli(ctl[0], ctl[1], g.targets[0]))
            else:
                out.extend((x, i)
                           for x in _mcx_chain(ctl, g.targets[0], scratch))
        else:
            out.append((g, i))
    return out, base + pool


def synthesize(c: Circuit) -> Circuit:
    """Expand every gate over {single-qubit, cx, swap}; multi-controlled
    gates use the standard 15-gate network per Toffoli, chained over
    freshly appended scratch wires for 3 or more controls."""
    gates, width = _synthesize(c)
    flags = tuple(c.ancilla_flags) + (True,) * (width - c.num_qubits)
    return Circuit(width, tuple(g for g, _ in gates), ancilla_flags=flags,
                   global_phase=c.global_phase)


# routing -------------------------------------------------------------------

@dataclass
class _PGate:
    gate: Gate
    origin: int | None
    event: int | None = None
    slot: int = 0


def _route(items: list[tuple[Gate, int]], cmap: CouplingMap,
           layout: list[int]) -> tuple[list[_PGate], int]:
    """Relabel logical gates onto physical wires, inserting routing swaps
    (3 alternating CNOTs, tagged with an event id). Returns the gate list
    and the number of swap events."""
    phys_of = list(layout)
    out: list[_PGate] = []
    n_events = 0

    def emit_route_swap(a: int, b: int):
        nonlocal n_events
        eid = n_events
        n_events += 1
        out.append(_PGate(Gate("cx", (b,), (a,)), None, eid, 0))
        out.append(_PGate(Gate("cx", (a,), (b,)), None, eid, 1))
        out.append(_PGate(Gate("cx", (b,), (a,)), None, eid, 2))
        la = phys_of.index(a) if a in phys_of else None
        lb = phys_of.index(b) if b in phys_of else None
        if la is not None:
            phys_of[la] = b
        if lb is not None:
            phys_of[lb] = a

    def bring_adjacent(pa: int, pb: int) -> int:
        """Swap pa along the shortest path until adjacent to pb; returns
        pa's new wire."""
        path = cmap.shortest_path(pa, pb)
        for k in range(len(path) - 2):
            emit_route_swap(path[k], path[k + 1])
        return path[-2] if len(path) > 1 else pa

    for g, origin in items:
        if len(g.qubits) == 1:
            q = phys_of[g.qubits[0]]
            out.append(_PGate(g.relabeled({g.qubits[0]: q}), origin))
        elif g.kind == "cx":
            c, t = g.controls[0], g.targets[0]
            pc, pt = phys_of[c], phys_of[t]
            if not cmap.connected(pc, pt):
                pc = bring_adjacent(pc, pt)
            out.append(_PGate(Gate("cx", (pt,), (pc,)), origin))
        elif g.kind == "swap":
            a, b = g.targets
            pa, pb = phys_of[a], phys_of[b]
            if not cmap.connected(pa, pb):
                pa = bring_adjacent(pa, pb)
            out.append(_PGate(Gate("cx", (pb,), (pa,)), origin))
            out.append(_PGate(Gate("cx", (pa,), (pb,)), origin))
            out.append(_PGate(Gate("cx", (pb,), (pa,)), origin))
        else:
            raise CompileError(f"cannot route {g.kind}")
    return out, n_events


# peephole optimization ------------------------------------------------------

class _Events:
    def __init__(self, pg: list[_PGate]):
        self.members: dict[int, list[int]] = {}
        self.locked: set[int] = set()
        for i, it in enumerate(pg):
            if it.event is not None:
                self.members.setdefault(it.event, []).append(i)

    def may_drop(self, pg: list[_PGate], idx: int, outer_slot: int) -> bool:
        eid = pg[idx].event
        return (eid not in self.locked
                and len(self.members[eid]) == 3
                and pg[idx].slot == outer_slot)

    def drop(self, pg: list[_PGate], idx: int):
        eid = pg[idx].event
        self.members[eid].remove(idx)
        self.locked.add(eid)


def _cancel_pass(pg: list[_PGate], removed: list[bool],
                 events: _Events, crossed: set[int]) -> bool:
    """One stack sweep cancelling adjacent self-inverse cx/cz pairs.
    Routing-swap CNOTs only take part through their outer slots, once."""
    stacks: dict[int, list[int]] = {}
    changed = False
    for i, it in enumerate(pg):
        if removed[i]:
            continue
        g = it.gate
        qs = g.qubits
        if g.kind in ("cx", "cz"):
            tops = {stacks[q][-1] if stacks.get(q) else None for q in qs}
            j = tops.pop() if len(tops) == 1 else None
            if j is not None and _same_pair(pg[j].gate, g):
                ok = False
                if pg[j].event is None and it.event is None:
                    ok = True
                elif pg[j].event is None and it.event is not None:
                    ok = events.may_drop(pg, i, 0)  # triple loses its head
                elif pg[j].event is not None and it.event is None:
                    ok = events.may_drop(pg, j, 2)  # triple loses its tail
                if ok:
                    if it.event is not None:
                        events.drop(pg, i)
                    if pg[j].event is not None:
                        events.drop(pg, j)
                    if (pg[j].origin is not None and it.origin is not None
                            and pg[j].origin != it.origin):
                        crossed.add(pg[j].origin)
                        crossed.add(it.origin)
                    removed[i] = removed[j] = True
                    for q in qs:
                        stacks[q].pop()
                    changed = True
                    continue
        for q in qs:
            stacks.setdefault(q, []).append(i)
    return changed


def _same_pair(a: Gate, b: Gate) -> bool:
    if a.kind != b.kind:
        return False
    if a.kind == "cx":
        return a.controls == b.controls and a.targets == b.targets
    if a.kind == "cz":
        return set(a.qubits) == set(b.qubits)
    return False


def _fuse_pass(pg: list[_PGate], removed: list[bool],
               crossed: set[int]) -> tuple[bool, float]:
    """Fuse maximal single-qubit runs per wire into one gate (or none)."""
    runs: dict[int, list[int]] = {}
    changed = False
    phase = 0.0

    def flush(q: int):
        nonlocal changed, phase
        run = runs.pop(q, [])
        if len(run) < 2:
            return
        u = ((1.0, 0.0), (0.0, 1.0))
        for idx in run:
            m = gate_matrix_2x2(pg[idx].gate.kind, pg[idx].gate.params)
            u = ((m[0][0] * u[0][0] + m[0][1] * u[1][0],
                  m[0][0] * u[0][1] + m[0][1] * u[1][1]),
                 (m[1][0] * u[0][0] + m[1][1] * u[1][0],
                  m[1][0] * u[0][1] + m[1][1] * u[1][1]))
        g, extra = gate_for_matrix(u, q)
        origins = {pg[idx].origin for idx in run if pg[idx].origin is not None}
        if len(origins) > 1:
            crossed.update(origins)
        keep = run[0]
        for idx in run[1:]:
            removed[idx] = True
        if g is None:
            removed[keep] = True
        else:
            pg[keep] = _PGate(g, pg[keep].origin)
        phase += extra
        changed = True

    for i, it in enumerate(pg):
        if removed[i]:
            continue
        qs = it.gate.qubits
        if len(qs) == 1 and it.event is None:
            runs.setdefault(qs[0], []).append(i)
        else:
            for q in qs:
                flush(q)
    for q in list(runs):
        flush(q)
    return changed, phase


def _optimize(pg: list[_PGate], crossed: set[int]) -> tuple[list[_PGate], float]:
    removed = [False] * len(pg)
    events = _Events(pg)
    phase = 0.0
    while True:
        c1 = _cancel_pass(pg, removed, events, crossed)
        c2, dp = _fuse_pass(pg, removed, crossed)
        phase += dp
        if not (c1 or c2):
            break
    return [it for i, it in enumerate(pg) if not removed[i]], phase


# top level -------------------------------------------------------------------

def _build_record(pg: list[_PGate], layout: list[int], opt_level: int,
                  num_logical: int, num_source: int,
                  crossed: set[int]) -> CompileRecord:
    counts = [0] * num_source
    first: list[int | None] = [None] * num_source
    event_first: dict[int, int] = {}
    event_pair: dict[int, tuple[int, int]] = {}
    for idx, it in enumerate(pg):
        if it.origin is not None:
            counts[it.origin] += 1
            if first[it.origin] is None:
                first[it.origin] = idx
        if it.event is not None and it.event not in event_first:
            event_first[it.event] = idx
            a = it.gate.controls[0]
            b = it.gate.targets[0]
            event_pair[it.event] = (min(a, b), max(a, b))
    starts = [0] * num_source
    nxt = len(pg)
    for i in reversed(range(num_source)):
        starts[i] = first[i] if first[i] is not None else nxt
        nxt = starts[i]
    ranges = [(starts[i], counts[i], i in crossed) for i in range(num_source)]
    evs = sorted((pos, event_pair[eid]) for eid, pos in event_first.items())
    return CompileRecord(list(layout), ranges, evs, opt_level,
                         num_logical, num_source)


def compile_circuit(c: Circuit, cmap: CouplingMap, opt_level: int = 0,
                    initial_layout: list[int] | None = None,
                    ) -> tuple[Circuit, CompileRecord]:
    """Compile onto the coupling map; returns the device-width circuit and
    the record of ranges, swap insertions and the layout used.

    `initial_layout` may cover just the source qubits or also the mcx
    scratch qubits; unlisted logicals take the free wires in order.
    """
    if opt_level not in (0, 1):
        raise CompileError(f"unsupported opt level {opt_level}")
    items, num_logical = _synthesize(c)
    n_dev = cmap.num_qubits
    if num_logical > n_dev:
        raise CompileError(
            f"{num_logical} logical qubits (incl. scratch) exceed"
            f" {cmap.name}'s {n_dev}")
    if initial_layout is None:
        layout = list(range(num_logical))
    else:
        layout = list(initial_layout)
        if len(layout) > num_logical or len(set(layout)) != len(layout):
            raise CompileError(f"bad initial layout {initial_layout}")
        if any(p < 0 or p >= n_dev for p in layout):
            raise CompileError("layout outside the device")
        free = [p for p in range(n_dev) if p not in set(layout)]
        layout += free[:num_logical - len(layout)]

    pg, _ = _route(items, cmap, layout)
    crossed: set[int] = set()
    phase = 0.0
    if opt_level == 1:
        pg, phase = _optimize(pg, crossed)

    record = _build_record(pg, layout, opt_level, num_logical, len(c.gates),
                           crossed)
    inv = {p: l for l, p in enumerate(layout)}
    flags = tuple(inv.get(p, num_logical) >= c.num_qubits for p in range(n_dev))
    out = Circuit(n_dev, tuple(it.gate for it in pg), (("q", n_dev),),
                  flags, mod_tau(c.global_phase + phase))
    return out, record
