"""Gate-level circuit representation.

Gates carry a kind, parameters, controls and targets over integer qubit
indices (qubit 0 is the least significant bit of a basis-state index).
Circuits are immutable value objects; every transformation returns a new
one. A circuit-level phase tally keeps transformations that are only
phase-exact up to a scalar honest for strict comparisons.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, replace

TAU = 2.0 * math.pi

SINGLE_QUBIT_KINDS = frozenset(
    {"u3", "u2", "u1", "x", "y", "z", "h", "s", "sdg", "t", "tdg"})
TWO_QUBIT_KINDS = frozenset({"cx", "cz", "swap"})
GATE_KINDS = SINGLE_QUBIT_KINDS | TWO_QUBIT_KINDS | {"mcx"}

_PARAM_COUNT = {"u3": 3, "u2": 2, "u1": 1}


class UnsupportedGateError(ValueError):
    """Raised for gate kinds or shapes outside the supported set."""


def mod_tau(x: float) -> float:
    x = math.fmod(x, TAU)
    if x < 0.0:
        x += TAU
    # adding TAU to a tiny negative can round to TAU itself
    return 0.0 if x >= TAU else x


@dataclass(frozen=True)
class Gate:
    """One gate application. controls and targets are disjoint qubit tuples."""

    kind: str
    targets: tuple[int, ...]
    controls: tuple[int, ...] = ()
    params: tuple[float, ...] = ()

    def __post_init__(self):
        if self.kind not in GATE_KINDS:
            raise UnsupportedGateError(f"unknown gate kind {self.kind!r}")
        want = _PARAM_COUNT.get(self.kind, 0)
        if len(self.params) != want:
            raise UnsupportedGateError(
                f"{self.kind} takes {want} parameter(s), got {len(self.params)}")
        n_t, n_c = len(self.targets), len(self.controls)
        if self.kind in SINGLE_QUBIT_KINDS and (n_t, n_c) != (1, 0):
            raise UnsupportedGateError(f"{self.kind} acts on one target qubit")
        if self.kind in ("cx", "cz") and (n_t, n_c) != (1, 1):
            raise UnsupportedGateError(f"{self.kind} takes one control, one target")
        if self.kind == "swap" and (n_t, n_c) != (2, 0):
            raise UnsupportedGateError("swap takes two targets")
        if self.kind == "mcx" and (n_t < 1 or n_c < 1 or n_t != 1):
            raise UnsupportedGateError("mcx takes >= 1 controls and one target")
        qubits = self.controls + self.targets
        if len(set(qubits)) != len(qubits) or any(q < 0 for q in qubits):
            raise UnsupportedGateError(f"bad qubit operands {qubits}")
        if self.kind == "u3" and not (-1e-12 <= self.params[0] <= math.pi + 1e-12):
            raise UnsupportedGateError(
                "u3 theta must lie in [0, pi]; build via make_u3 to canonicalize")

    @property
    def qubits(self) -> tuple[int, ...]:
        return self.controls + self.targets

    def relabeled(self, mapping) -> "Gate":
        """Return the same gate with every qubit index sent through mapping."""
        return Gate(self.kind,
                    tuple(mapping[q] for q in self.targets),
                    tuple(mapping[q] for q in self.controls),
                    self.params)


def make_u3(theta: float, phi: float, lam: float) -> tuple[Gate, float]:
    """Build a canonical u3 gate plus the global phase the canonicalization
    cost (0 or pi; exp(i*phase) times the returned gate equals the input)."""
    theta = math.fmod(theta, 2.0 * TAU)  # entries are 4pi-periodic
    phase = 0.0
    if theta > TAU:
        theta -= 2.0 * TAU
    elif theta < -TAU:
        theta += 2.0 * TAU
    if theta < 0.0:  # U3(-t, p, l) == U3(t, p+pi, l+pi) exactly
        theta, phi, lam = -theta, phi + math.pi, lam + math.pi
    if theta > math.pi:  # U3(t, p, l) == -U3(2pi-t, p+pi, l+pi)
        theta, phi, lam = TAU - theta, phi + math.pi, lam + math.pi
        phase = math.pi
    return Gate("u3", (0,), (), (theta, mod_tau(phi), mod_tau(lam))), phase


def u3_on(q: int, theta: float, phi: float, lam: float) -> tuple[Gate, float]:
    g, phase = make_u3(theta, phi, lam)
    return replace(g, targets=(q,)), phase


_SQRT_HALF = math.sqrt(0.5)


def gate_matrix_2x2(kind: str, params: tuple[float, ...]) -> tuple[tuple[complex, complex], tuple[complex, complex]]:
    """Exact 2x2 matrix of a single-qubit kind, or of the target action of a
    controlled kind (x for cx/mcx, z for cz). Row index is the output bit."""
    if kind == "u3":
        th, ph, lm = params
        c, s = math.cos(th / 2.0), math.sin(th / 2.0)
        return ((complex(c), -cmath.exp(1j * lm) * s),
                (cmath.exp(1j * ph) * s, cmath.exp(1j * (ph + lm)) * c))
    if kind == "u2":
        return gate_matrix_2x2("u3", (math.pi / 2.0, params[0], params[1]))
    if kind == "u1":
        return ((1 + 0j, 0j), (0j, cmath.exp(1j * params[0])))
    if kind in ("x", "cx", "mcx"):
        return ((0j, 1 + 0j), (1 + 0j, 0j))
    if kind == "y":
        return ((0j, -1j), (1j, 0j))
    if kind in ("z", "cz"):
        return ((1 + 0j, 0j), (0j, -1 + 0j))
    if kind == "h":
        return ((complex(_SQRT_HALF), complex(_SQRT_HALF)),
                (complex(_SQRT_HALF), complex(-_SQRT_HALF)))
    if kind == "s":
        return ((1 + 0j, 0j), (0j, 1j))
    if kind == "sdg":
        return ((1 + 0j, 0j), (0j, -1j))
    if kind == "t":
        return ((1 + 0j, 0j), (0j, cmath.exp(1j * math.pi / 4.0)))
    if kind == "tdg":
        return ((1 + 0j, 0j), (0j, cmath.exp(-1j * math.pi / 4.0)))
    raise UnsupportedGateError(f"no 2x2 matrix for kind {kind!r}")


_SELF_INVERSE = frozenset({"x", "y", "z", "h", "cx", "cz", "swap", "mcx"})
_KIND_INVERSE = {"s": "sdg", "sdg": "s", "t": "tdg", "tdg": "t"}


def invert(g: Gate) -> Gate:
    """Exact inverse gate (adjoint unitary, no phase slack)."""
    if g.kind in _SELF_INVERSE:
        return g
    if g.kind in _KIND_INVERSE:
        return replace(g, kind=_KIND_INVERSE[g.kind])
    if g.kind == "u1":
        return replace(g, params=(mod_tau(-g.params[0]),))
    if g.kind == "u2":
        ph, lm = g.params
        return replace(g, params=(mod_tau(math.pi - lm), mod_tau(math.pi - ph)))
    if g.kind == "u3":
        th, ph, lm = g.params
        inv, phase = make_u3(-th, -lm, -ph)
        assert phase == 0.0  # -theta in [-pi, 0] flips exactly
        return replace(inv, targets=g.targets)
    raise UnsupportedGateError(f"cannot invert kind {g.kind!r}")


@dataclass(frozen=True)
class Circuit:
    """An ordered gate list over num_qubits wires.

    registers preserve declared QASM register structure; ancilla_flags marks
    wires that start and must end in |0>; global_phase is a tally (radians)
    of scalar factors peeled off by transformations.
    """

    num_qubits: int
    gates: tuple[Gate, ...] = ()
    registers: tuple[tuple[str, int], ...] = ()
    ancilla_flags: tuple[bool, ...] = ()
    global_phase: float = 0.0

    def __post_init__(self):
        if self.num_qubits < 0:
            raise ValueError("negative qubit count")
        if not self.registers:
            object.__setattr__(self, "registers", (("q", self.num_qubits),))
        if sum(sz for _, sz in self.registers) != self.num_qubits:
            raise ValueError("registers do not cover the circuit width")
        if not self.ancilla_flags:
            object.__setattr__(self, "ancilla_flags", (False,) * self.num_qubits)
        if len(self.ancilla_flags) != self.num_qubits:
            raise ValueError("ancilla_flags length mismatch")
        for g in self.gates:
            if any(q >= self.num_qubits for q in g.qubits):
                raise ValueError(f"gate {g} exceeds circuit width {self.num_qubits}")

    def __len__(self) -> int:
        return len(self.gates)

    @property
    def ancillas(self) -> tuple[int, ...]:
        return tuple(i for i, f in enumerate(self.ancilla_flags) if f)

    def with_gates(self, gates, extra_phase: float = 0.0) -> "Circuit":
        return replace(self, gates=tuple(gates),
                       global_phase=self.global_phase + extra_phase)

    def widened(self, num_qubits: int, ancilla: bool = True) -> "Circuit":
        """Pad with fresh trailing wires, flagged ancillary by default."""
        if num_qubits < self.num_qubits:
            raise ValueError("cannot shrink a circuit")
        if num_qubits == self.num_qubits:
            return self
        extra = num_qubits - self.num_qubits
        return replace(
            self, num_qubits=num_qubits,
            registers=self.registers + (("anc", extra),),
            ancilla_flags=self.ancilla_flags + (ancilla,) * extra)

    def inverted(self) -> "Circuit":
        return replace(self, gates=tuple(invert(g) for g in reversed(self.gates)),
                       global_phase=-self.global_phase)


# single-qubit run fusion ----------------------------------------------------

def _mat_mul(a, b):
    return ((a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]),
            (a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]))


def zyz_angles(u) -> tuple[float, float, float, float]:
    """Decompose a 2x2 unitary as exp(i*alpha) * U3(theta, phi, lam)."""
    theta = 2.0 * math.atan2(abs(u[1][0]), abs(u[0][0]))
    if abs(u[1][0]) < 1e-12:  # diagonal
        alpha = cmath.phase(u[0][0])
        lam = mod_tau(cmath.phase(u[1][1]) - alpha)
        return 0.0, 0.0, lam, alpha
    if abs(u[0][0]) < 1e-12:  # anti-diagonal
        alpha = cmath.phase(-u[0][1])
        phi = mod_tau(cmath.phase(u[1][0]) - alpha)
        return math.pi, phi, 0.0, alpha
    alpha = cmath.phase(u[0][0])
    phi = mod_tau(cmath.phase(u[1][0]) - alpha)
    lam = mod_tau(cmath.phase(-u[0][1]) - alpha)
    return theta, phi, lam, alpha


_NAMED_1Q = ("x", "y", "z", "h", "s", "sdg", "t", "tdg")


def _close(a, b, tol=1e-12) -> bool:
    return all(abs(a[r][c] - b[r][c]) <= tol for r in (0, 1) for c in (0, 1))


def gate_for_matrix(u, qubit: int) -> tuple[Gate | None, float]:
    """Pick the tersest gate realizing u; returns (gate, phase) with
    u == exp(i*phase) * gate, or (None, phase) when u is a phase alone."""
    for kind in _NAMED_1Q:  # exact named match first, no phase slack
        if _close(u, gate_matrix_2x2(kind, ())):
            return Gate(kind, (qubit,)), 0.0
    theta, phi, lam, alpha = zyz_angles(u)
    if theta < 1e-12:
        if abs(cmath.exp(1j * lam) - 1.0) < 1e-12:
            return None, alpha  # scalar
        return Gate("u1", (qubit,), (), (lam,)), alpha
    if abs(theta - math.pi / 2.0) < 1e-12:
        return Gate("u2", (qubit,), (), (phi, lam)), alpha
    return Gate("u3", (qubit,), (), (theta, phi, lam)), alpha


@dataclass
class FusedBlock:
    """One unit of a fused gate stream: zero or one gates plus the indices
    of the source gates they replace."""

    gates: list[Gate]
    origins: list[int]
    phase: float = 0.0


def fuse_runs_with_origins(gates) -> list[FusedBlock]:
    """Fuse single-qubit runs, keeping per-block source indices.

    Runs of length 1 pass through untouched. Longer runs become one named
    gate, u1/u2/u3, or nothing (identity), with the run's global phase in
    the block. Multi-qubit gates pass through as their own block and end
    every open run, so block order equals source order and an alternating
    replay (block by block against its own compiled gates) returns to the
    identity at each boundary instead of carrying entangled leftovers.
    """
    blocks: list[FusedBlock] = []
    runs: dict[int, list[tuple[int, Gate]]] = {}

    def flush(q: int):
        run = runs.pop(q, None)
        if not run:
            return
        idx = [i for i, _ in run]
        if len(run) == 1:
            blocks.append(FusedBlock([run[0][1]], idx))
            return
        u = ((1 + 0j, 0j), (0j, 1 + 0j))
        for _, g in run:
            u = _mat_mul(gate_matrix_2x2(g.kind, g.params), u)
        fused, phase = gate_for_matrix(u, run[0][1].targets[0])
        blocks.append(FusedBlock([fused] if fused else [], idx, phase))

    for i, g in enumerate(gates):
        if g.kind in SINGLE_QUBIT_KINDS:
            runs.setdefault(g.targets[0], []).append((i, g))
        else:
            for q in sorted(runs):
                flush(q)
            blocks.append(FusedBlock([g], [i]))
    for q in sorted(runs):
        flush(q)
    blocks.sort(key=lambda b: b.origins[0])
    return blocks


def fuse_single_qubit_runs(c: Circuit) -> Circuit:
    """Replace maximal single-qubit runs by single gates; the unitary is
    unchanged up to the phase tallied into global_phase."""
    blocks = fuse_runs_with_origins(c.gates)
    gates: list[Gate] = []
    phase = 0.0
    for b in blocks:
        gates.extend(b.gates)
        phase += b.phase
    return c.with_gates(gates, extra_phase=phase)
