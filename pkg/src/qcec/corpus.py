"""Random circuits and controlled defects for testing and benchmarks.

Everything takes an explicit random.Random so corpora are reproducible.
Defect helpers come in two strengths: `replace_gate_defect` swaps one gate
for a provably non-proportional one (sound at any width, since the rest of
the circuit cancels in the comparison), while `mutate` produces a free-form
edit that callers must screen against the dense reference on small widths.
"""

from __future__ import annotations

import math
import random

from .circuit import TAU, Circuit, Gate, gate_matrix_2x2, u3_on

NAMED_1Q = ("x", "y", "z", "h", "s", "sdg", "t", "tdg")


def _random_1q(q: int, rng: random.Random) -> tuple[Gate, float]:
    roll = rng.random()
    if roll < 0.5:
        return Gate(rng.choice(NAMED_1Q), (q,)), 0.0
    if roll < 0.7:
        return Gate("u1", (q,), (), (rng.uniform(0.0, TAU),)), 0.0
    if roll < 0.85:
        return Gate("u2", (q,), (),
                    (rng.uniform(0.0, TAU), rng.uniform(0.0, TAU))), 0.0
    return u3_on(q, rng.uniform(0.0, math.pi), rng.uniform(0.0, TAU),
                 rng.uniform(0.0, TAU))


def random_circuit(n: int, m: int, rng: random.Random, *,
                   elementary: bool = False, max_mcx: int = 2,
                   allow_swap: bool = False, p_multi: float = 0.4) -> Circuit:
    """m random gates on n qubits.

    elementary restricts to single-qubit gates, cx and cz. max_mcx caps the
    control count of mcx draws (2 = Toffoli); swap gates appear only when
    allow_swap is set, since literal swaps in a source circuit are easy to
    confuse with routing when no compile record is available.
    """
    if n < 1:
        raise ValueError("need at least one qubit")
    gates: list[Gate] = []
    phase = 0.0
    multi: list[str] = []
    if n >= 2:
        multi = ["cx", "cx", "cz"]
        if allow_swap:
            multi.append("swap")
        if not elementary and n >= 3 and max_mcx >= 2:
            multi.append("mcx")
    for _ in range(m):
        if not multi or rng.random() > p_multi:
            q = rng.randrange(n)
            g, ph = _random_1q(q, rng)
            gates.append(g)
            phase += ph
            continue
        kind = rng.choice(multi)
        if kind == "cx":
            c, t = rng.sample(range(n), 2)
            gates.append(Gate("cx", (t,), (c,)))
        elif kind == "cz":
            c, t = rng.sample(range(n), 2)
            gates.append(Gate("cz", (t,), (c,)))
        elif kind == "swap":
            a, b = rng.sample(range(n), 2)
            gates.append(Gate("swap", (a, b)))
        else:
            k = rng.randint(2, min(max_mcx, n - 1))
            qs = rng.sample(range(n), k + 1)
            gates.append(Gate("mcx", (qs[-1],), tuple(qs[:-1])))
    return Circuit(n, tuple(gates), global_phase=phase)


def _proportional(a, b, tol: float = 1e-9) -> bool:
    """Is b a scalar multiple of a, as 2x2 matrices?"""
    best = max(((r, c) for r in (0, 1) for c in (0, 1)),
               key=lambda rc: abs(a[rc[0]][rc[1]]))
    ref = a[best[0]][best[1]]
    if abs(b[best[0]][best[1]]) < tol:
        return False
    scale = b[best[0]][best[1]] / ref
    return all(abs(b[r][c] - scale * a[r][c]) <= tol
               for r in (0, 1) for c in (0, 1))


def replace_gate_defect(c: Circuit, rng: random.Random) -> tuple[Circuit, int]:
    """Replace one gate so the circuits provably differ (even up to global
    phase), without changing the gate count. Returns (circuit, index)."""
    if not c.gates:
        raise ValueError("cannot mutate an empty circuit")
    idx = rng.randrange(len(c.gates))
    g = c.gates[idx]
    if len(g.qubits) == 1:
        old = gate_matrix_2x2(g.kind, g.params)
        for _ in range(64):
            new, _ph = _random_1q(g.targets[0], rng)
            if not _proportional(old, gate_matrix_2x2(new.kind, new.params)):
                break
        else:
            raise RuntimeError("could not find a distinct replacement")
    elif g.kind == "cx":
        new = Gate("cx", (g.controls[0],), (g.targets[0],))
    elif g.kind == "cz":
        new = Gate("cx", (g.targets[0],), (g.controls[0],))
    elif g.kind == "swap":
        new = Gate("cx", (g.targets[1],), (g.targets[0],))
    else:  # mcx: flip one control off the set
        new = Gate("x", (g.targets[0],))
    gates = list(c.gates)
    gates[idx] = new
    return c.with_gates(gates), idx


def mutate(c: Circuit, rng: random.Random) -> Circuit:
    """One free-form edit: drop, insert, nudge a parameter, or reorder.
    May produce an equivalent circuit by luck; screen before use."""
    roll = rng.random()
    gates = list(c.gates)
    if roll < 0.3 and gates:
        del gates[rng.randrange(len(gates))]
    elif roll < 0.55:
        g, _ = _random_1q(rng.randrange(c.num_qubits), rng)
        gates.insert(rng.randint(0, len(gates)), g)
    elif roll < 0.8 and any(g.params for g in gates):
        idxs = [i for i, g in enumerate(gates) if g.params]
        i = rng.choice(idxs)
        g = gates[i]
        k = rng.randrange(len(g.params))
        params = list(g.params)
        params[k] += rng.uniform(0.05, 0.6)
        if g.kind == "u3" and k == 0:
            params[0] = min(max(params[0], 0.0), math.pi)
        gates[i] = Gate(g.kind, g.targets, g.controls, tuple(params))
    elif len(gates) >= 2:
        i = rng.randrange(len(gates) - 1)
        gates[i], gates[i + 1] = gates[i + 1], gates[i]
    else:
        gates.append(Gate("x", (rng.randrange(c.num_qubits),)))
    return c.with_gates(gates)


def random_layout(k: int, n: int, rng: random.Random) -> list[int]:
    """k distinct physical wires out of n, in random order."""
    if k > n:
        raise ValueError(f"cannot place {k} logicals on {n} wires")
    return rng.sample(range(n), k)
