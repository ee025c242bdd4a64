"""Canonical decision diagrams for 2^n x 2^n unitaries.

A diagram node at level k splits the matrix on qubit k's (output bit,
input bit) pair; children sit at exactly level k-1, so every path touches
every level and the all-zero submatrix is the only early exit (the
canonical zero edge straight to the terminal). Child order is
(out0 in0, out0 in1, out1 in0, out1 in1), i.e. index = 2*out + in.

Node weights are normalized by the largest-magnitude child (ties to the
lowest index) and interned, so structurally equal unitaries share one root
node and equality is a pointer comparison.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from .circuit import Gate, gate_matrix_2x2, invert
from .numerics import ComplexTable, CVal

DENSE_QUBIT_LIMIT = 10

_MUL, _ADD = 1, 2


class TooLargeError(ValueError):
    """Raised when a dense expansion would exceed the supported width."""


class DDNode:
    __slots__ = ("level", "children")

    def __init__(self, level: int, children: tuple):
        self.level = level
        self.children = children


class Edge(NamedTuple):
    weight: CVal
    node: DDNode | None  # None is the terminal


class UnitaryDD(NamedTuple):
    root: Edge
    n: int


class DDPackage:
    """Owns the unique table, the compute table and the weight table.

    Diagrams from different packages must never be mixed; canonicity is a
    per-package property.
    """

    def __init__(self, eps: float | None = None):
        self.vals = ComplexTable() if eps is None else ComplexTable(eps)
        self.zero_edge = Edge(self.vals.zero, None)
        self.one_edge = Edge(self.vals.one, None)
        self._unique: dict[tuple, DDNode] = {}
        self._computed: dict[tuple, Edge] = {}
        self._ident: list[Edge] = []  # ident[l] covers levels 0..l
        self._gates: dict[tuple[Gate, int], Edge] = {}

    # construction -----------------------------------------------------

    def _make_node(self, level: int, children: list[Edge]) -> Edge:
        zero = self.vals.zero
        mags = [0.0 if children[i].weight is zero else children[i].weight.mag2()
                for i in range(4)]
        top = max(mags)
        if top == 0.0:
            return self.zero_edge
        # Near-ties in magnitude must resolve by index, not by float noise,
        # or two builds of the same matrix can normalise differently.
        slack = self.vals.eps * (1.0 + top)
        best = next(i for i in range(4)
                    if children[i].weight is not zero and mags[i] >= top - slack)
        div = children[best].weight
        one = self.vals.one
        norm = []
        for i in range(4):
            e = children[i]
            if e.weight is zero:
                norm.append(self.zero_edge)
            elif i == best:
                norm.append(Edge(one, e.node))
            else:
                norm.append(Edge(self.vals.div(e.weight, div), e.node))
        c0, c1, c2, c3 = norm
        key = (level, c0.weight, c0.node, c1.weight, c1.node,
               c2.weight, c2.node, c3.weight, c3.node)
        node = self._unique.get(key)
        if node is None:
            node = DDNode(level, (c0, c1, c2, c3))
            self._unique[key] = node
        return Edge(div, node)

    def _ident_edge(self, level: int) -> Edge:
        if level < 0:
            return self.one_edge
        while len(self._ident) <= level:
            below = self._ident[-1] if self._ident else self.one_edge
            self._ident.append(self._make_node(
                len(self._ident), [below, self.zero_edge, self.zero_edge, below]))
        return self._ident[level]

    def make_identity(self, n: int) -> UnitaryDD:
        return UnitaryDD(self._ident_edge(n - 1), n)

    def _scaled(self, w: CVal, e: Edge) -> Edge:
        if e.weight is self.vals.zero or w is self.vals.zero:
            return self.zero_edge
        return Edge(self.vals.mul(w, e.weight), e.node)

    def _build_controlled(self, controls: frozenset[int], target: int,
                          m: tuple, n: int) -> Edge:
        """Diagram of a single-target gate with arbitrary control set."""
        zero = self.vals.zero
        mw = [self.vals.intern_value(m[r][c]) for r in (0, 1) for c in (0, 1)]
        low_ctl = min(controls) if controls else n  # below this: no controls left

        mix_memo: dict[tuple, Edge] = {}

        def mix(level: int, a: CVal, b: CVal) -> Edge:
            # a * P + b * (I - P), P projecting remaining controls onto |1..1>
            if level < low_ctl:
                return self._scaled(a, self._ident_edge(level))
            key = (level, a, b)
            e = mix_memo.get(key)
            if e is not None:
                return e
            if level in controls:
                e = self._make_node(level, [
                    self._scaled(b, self._ident_edge(level - 1)),
                    self.zero_edge, self.zero_edge, mix(level - 1, a, b)])
            else:
                d = mix(level - 1, a, b)
                e = self._make_node(level, [d, self.zero_edge, self.zero_edge, d])
            mix_memo[key] = e
            return e

        def op(level: int) -> Edge:
            if level == target:
                kids = [mix(level - 1, mw[0], self.vals.one),
                        mix(level - 1, mw[1], zero),
                        mix(level - 1, mw[2], zero),
                        mix(level - 1, mw[3], self.vals.one)]
                return self._make_node(level, kids)
            if level in controls:
                return self._make_node(level, [
                    self._ident_edge(level - 1), self.zero_edge,
                    self.zero_edge, op(level - 1)])
            d = op(level - 1)
            return self._make_node(level, [d, self.zero_edge, self.zero_edge, d])

        return op(n - 1)

    def gate_dd(self, g: Gate, n: int, relabel=None) -> UnitaryDD:
        """Diagram of gate g acting on an n-qubit register, optionally with
        qubit indices sent through `relabel` first."""
        if relabel is not None:
            g = g.relabeled(relabel)
        if any(q >= n for q in g.qubits):
            raise ValueError(f"gate {g} does not fit in {n} qubits")
        key = (g, n)
        e = self._gates.get(key)
        if e is None:
            if g.kind == "swap":
                a, b = g.targets
                ab = self.gate_dd(Gate("cx", (b,), (a,)), n).root
                ba = self.gate_dd(Gate("cx", (a,), (b,)), n).root
                e = self._mul(ab, self._mul(ba, ab, n - 1), n - 1)
            else:
                m = gate_matrix_2x2(g.kind, g.params)
                e = self._build_controlled(frozenset(g.controls),
                                           g.targets[0], m, n)
            self._gates[key] = e
        return UnitaryDD(e, n)

    # algebra ------------------------------------------------------------

    def _add(self, a: Edge, b: Edge, level: int) -> Edge:
        zero = self.vals.zero
        if a.weight is zero:
            return b
        if b.weight is zero:
            return a
        if level < 0:
            w = self.vals.add(a.weight, b.weight)
            return self.zero_edge if w is zero else Edge(w, None)
        if a.node is b.node:
            w = self.vals.add(a.weight, b.weight)
            return self.zero_edge if w is zero else Edge(w, a.node)
        key = (_ADD, a, b)
        cached = self._computed.get(key)
        if cached is not None:
            return cached
        aw, bw = a.weight, b.weight
        ac, bc = a.node.children, b.node.children
        lm1 = level - 1
        kids = [self._add(self._scaled(aw, ac[i]), self._scaled(bw, bc[i]), lm1)
                for i in range(4)]
        res = self._make_node(level, kids)
        self._computed[key] = res
        return res

    def _mul(self, a: Edge, b: Edge, level: int) -> Edge:
        zero = self.vals.zero
        if a.weight is zero or b.weight is zero:
            return self.zero_edge
        if level < 0:
            return Edge(self.vals.mul(a.weight, b.weight), None)
        key = (_MUL, a, b)
        cached = self._computed.get(key)
        if cached is not None:
            return cached
        a0, a1, a2, a3 = a.node.children
        b0, b1, b2, b3 = b.node.children
        lm1 = level - 1
        kids = [
            self._add(self._mul(a0, b0, lm1), self._mul(a1, b2, lm1), lm1),
            self._add(self._mul(a0, b1, lm1), self._mul(a1, b3, lm1), lm1),
            self._add(self._mul(a2, b0, lm1), self._mul(a3, b2, lm1), lm1),
            self._add(self._mul(a2, b1, lm1), self._mul(a3, b3, lm1), lm1),
        ]
        e = self._make_node(level, kids)
        if e.weight is zero:
            res = self.zero_edge
        else:
            res = Edge(self.vals.mul(self.vals.mul(a.weight, b.weight), e.weight),
                       e.node)
        self._computed[key] = res
        return res

    def multiply(self, a: UnitaryDD, b: UnitaryDD) -> UnitaryDD:
        """Matrix product a . b (b acts first)."""
        if a.n != b.n:
            raise ValueError(f"width mismatch: {a.n} vs {b.n}")
        return UnitaryDD(self._mul(a.root, b.root, a.n - 1), a.n)

    def apply_left(self, u: UnitaryDD, g: Gate) -> UnitaryDD:
        return self.multiply(self.gate_dd(g, u.n), u)

    def apply_right_inverse(self, u: UnitaryDD, g: Gate) -> UnitaryDD:
        return self.multiply(u, self.gate_dd(invert(g), u.n))

    # predicates and views -------------------------------------------------

    def is_identity(self, u: UnitaryDD, tol: float = 0.0,
                    up_to_global_phase: bool = False) -> bool:
        ident = self.make_identity(u.n)
        if u.root.node is not ident.root.node:
            return False
        w = u.root.weight
        if w is self.vals.zero:
            return False
        if up_to_global_phase:
            return abs(math.sqrt(w.mag2()) - 1.0) <= tol
        return abs(w.value - 1.0) <= tol

    def modify_ancillaries(self, u: UnitaryDD, ancillas) -> UnitaryDD:
        """Zero every matrix column in which some ancilla input bit is 1.

        The result is no longer unitary; it isolates the behaviour on the
        ancillas-start-in-|0> subspace while keeping all output rows, so a
        later identity test also demands the ancillas end in |0>.
        """
        anc = frozenset(ancillas)
        if any(a >= u.n or a < 0 for a in anc):
            raise ValueError(f"ancilla index out of range: {sorted(anc)}")
        if not anc:
            return u
        memo: dict[DDNode, Edge] = {}

        def walk(e: Edge, level: int) -> Edge:
            if e.weight is self.vals.zero or level < 0:
                return e
            node = e.node
            r = memo.get(node)
            if r is None:
                kids = list(node.children)
                if level in anc:
                    kids[1] = self.zero_edge
                    kids[3] = self.zero_edge
                kids = [walk(k, level - 1) for k in kids]
                r = self._make_node(level, kids)
                memo[node] = r
            return self._scaled(e.weight, r)

        return UnitaryDD(walk(u.root, u.n - 1), u.n)

    def is_identity_modified(self, u: UnitaryDD, ancillas,
                             tol: float = 0.0,
                             up_to_global_phase: bool = False) -> bool:
        """Identity test on the ancilla-reduced matrix: U00 = I and U01 = 0
        in the block decomposition over ancilla input/output values."""
        mu = self.modify_ancillaries(u, ancillas)
        mi = self.modify_ancillaries(self.make_identity(u.n), ancillas)
        if mu.root.node is not mi.root.node:
            return False
        wa, wb = mu.root.weight, mi.root.weight
        if wa is self.vals.zero:
            return wb is self.vals.zero
        if up_to_global_phase:
            return abs(math.sqrt(wa.mag2()) - math.sqrt(wb.mag2())) <= tol
        return abs(wa.value - wb.value) <= tol

    def node_count(self, u: UnitaryDD) -> int:
        """Number of reachable non-terminal nodes."""
        root = u.root if isinstance(u, UnitaryDD) else u
        if root.node is None:
            return 0
        seen = {root.node}
        stack = [root.node]
        while stack:
            for ch in stack.pop().children:
                if ch.node is not None and ch.node not in seen:
                    seen.add(ch.node)
                    stack.append(ch.node)
        return len(seen)

    def to_dense(self, u: UnitaryDD) -> np.ndarray:
        if u.n > DENSE_QUBIT_LIMIT:
            raise TooLargeError(
                f"dense expansion limited to {DENSE_QUBIT_LIMIT} qubits, got {u.n}")
        memo: dict[DDNode, np.ndarray] = {}

        def mat(e: Edge, level: int) -> np.ndarray:
            dim = 1 << (level + 1)
            if e.weight is self.vals.zero:
                return np.zeros((max(dim, 1), max(dim, 1)), dtype=complex)
            if level < 0:
                return np.array([[e.weight.value]], dtype=complex)
            m = memo.get(e.node)
            if m is None:
                ch = e.node.children
                m = np.block([[mat(ch[0], level - 1), mat(ch[1], level - 1)],
                              [mat(ch[2], level - 1), mat(ch[3], level - 1)]])
                memo[e.node] = m
            return e.weight.value * m

        return mat(u.root, u.n - 1)

    # bookkeeping ----------------------------------------------------------

    @property
    def unique_size(self) -> int:
        return len(self._unique)

    def gc(self, roots) -> int:
        """Drop every node not reachable from `roots` (plus the cached
        identity chain); clears the compute and gate caches. Returns the
        number of nodes freed. Edges not covered by roots become stale:
        they stay usable but lose canonicity against newer diagrams."""
        live: set[DDNode] = set()
        stack: list[DDNode] = []
        for r in roots:
            e = r.root if isinstance(r, UnitaryDD) else r
            if e.node is not None and e.node not in live:
                live.add(e.node)
                stack.append(e.node)
        for e in self._ident:
            if e.node is not None and e.node not in live:
                live.add(e.node)
                stack.append(e.node)
        while stack:
            for ch in stack.pop().children:
                if ch.node is not None and ch.node not in live:
                    live.add(ch.node)
                    stack.append(ch.node)
        before = len(self._unique)
        self._unique = {k: v for k, v in self._unique.items() if v in live}
        self._computed.clear()
        self._gates.clear()
        return before - len(self._unique)
