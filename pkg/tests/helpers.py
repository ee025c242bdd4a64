"""Shared utilities for the test suite.

Everything here leans on the dense-matrix reference in qcec.dense, which is
implemented independently of the decision-diagram layer, so the two sides
can vouch for each other.
"""

import random

from qcec.circuit import Circuit, Gate
from qcec.compiler import compile_circuit
from qcec.corpus import random_circuit, random_layout
from qcec.coupling import CouplingMap, line_map
from qcec.dense import dense_equivalent, extend_layout


def swap_shaped(c: Circuit) -> bool:
    """True when the circuit contains literal swaps or adjacent
    opposite-direction CNOT pairs, the shapes a record-free scan reads
    as routing."""
    gs = c.gates
    if any(g.kind == "swap" for g in gs):
        return True
    for i in range(len(gs) - 1):
        a, b = gs[i], gs[i + 1]
        if (a.kind == "cx" and b.kind == "cx"
                and set(a.qubits) == set(b.qubits)
                and a.targets != b.targets):
            return True
    return False


def final_layout(record, n: int) -> list[int]:
    """Physical wire of each logical qubit after every recorded swap."""
    ext = extend_layout(record.initial_layout, n)
    log_at = {p: l for l, p in enumerate(ext)}
    for _, (a, b) in record.swap_events:
        log_at[a], log_at[b] = log_at[b], log_at[a]
    out = [0] * n
    for p, l in log_at.items():
        out[l] = p
    return out


def dense_pair_agrees(g: Circuit, compiled: Circuit, record,
                      tol: float = 1e-9,
                      up_to_global_phase: bool = False) -> bool:
    """Dense-matrix verdict on a (source, compiled, record) triple."""
    n = compiled.num_qubits
    return dense_equivalent(
        g, compiled,
        initial_layout=record.initial_layout,
        final_layout=final_layout(record, n),
        ancillas=range(g.num_qubits, n),
        tol=tol,
        up_to_global_phase=up_to_global_phase)


def random_pair(rng: random.Random, cmap: CouplingMap, n=None, m=None, *,
                opt_level=None, use_layout=None, elementary=False,
                max_mcx=None):
    """One (source, compiled, record) triple sized to fit cmap's wires."""
    if n is None:
        n = rng.randint(2, min(4, cmap.num_qubits))
    if m is None:
        m = rng.randint(5, 35)
    if max_mcx is None:
        # an mcx with k controls needs k - 2 scratch wires on the device
        max_mcx = min(4, n - 1, cmap.num_qubits - n + 2)
    if opt_level is None:
        opt_level = rng.randint(0, 1)
    if use_layout is None:
        use_layout = rng.random() < 0.5
    c = random_circuit(n, m, rng, elementary=elementary,
                       max_mcx=max(1, max_mcx))
    lay = random_layout(n, cmap.num_qubits, rng) if use_layout else None
    compiled, record = compile_circuit(c, cmap, opt_level, lay)
    return c, compiled, record


def snug_line_pair(rng: random.Random, n: int, m: int, *, opt_level=0,
                   elementary=False, max_mcx=3, use_layout=True):
    """A pair compiled onto the smallest line that fits, so the dense
    reference stays tractable."""
    from qcec.compiler import ancilla_demand
    c = random_circuit(n, m, rng, elementary=elementary,
                       max_mcx=max(1, min(max_mcx, n - 1)))
    width = n + ancilla_demand(c)
    cmap = line_map(max(2, width))
    lay = (random_layout(n, cmap.num_qubits, rng) if use_layout else None)
    compiled, record = compile_circuit(c, cmap, opt_level, lay)
    return c, compiled, record


def cx(c: int, t: int) -> Gate:
    return Gate("cx", (t,), (c,))


def circ(n: int, *gates: Gate, phase: float = 0.0) -> Circuit:
    return Circuit(n, tuple(gates), global_phase=phase)
