"""Dense-matrix reference semantics, kept deliberately separate from the
decision-diagram code so the two implementations can check each other.

Everything here is plain numpy on full 2^n matrices and is only meant for
small widths (tests, cross-checks, mutation screening).
"""

from __future__ import annotations

import cmath
import math

import numpy as np

from .circuit import Circuit, Gate

MAX_QUBITS = 10


def _m1q(kind: str, params: tuple) -> np.ndarray:
    if kind == "u3" or kind == "u2" or kind == "u1":
        if kind == "u3":
            theta, phi, lam = params
        elif kind == "u2":
            phi, lam = params
            theta = math.pi / 2
        else:
            (lam,) = params
            theta = 0.0
            phi = 0.0
        c = math.cos(theta / 2)
        s = math.sin(theta / 2)
        return np.array([
            [c, -cmath.exp(1j * lam) * s],
            [cmath.exp(1j * phi) * s, cmath.exp(1j * (phi + lam)) * c],
        ])
    if kind == "x" or kind == "cx" or kind == "mcx":
        return np.array([[0, 1], [1, 0]], dtype=complex)
    if kind == "y":
        return np.array([[0, -1j], [1j, 0]])
    if kind == "z" or kind == "cz":
        return np.array([[1, 0], [0, -1]], dtype=complex)
    if kind == "h":
        return np.array([[1, 1], [1, -1]]) / math.sqrt(2)
    if kind == "s":
        return np.diag([1, 1j])
    if kind == "sdg":
        return np.diag([1, -1j])
    if kind == "t":
        return np.diag([1, cmath.exp(1j * math.pi / 4)])
    if kind == "tdg":
        return np.diag([1, cmath.exp(-1j * math.pi / 4)])
    raise ValueError(f"no single-qubit matrix for {kind!r}")


def gate_unitary(g: Gate, n: int) -> np.ndarray:
    """Full 2^n x 2^n matrix of one gate; qubit k is bit k of the index."""
    if n > MAX_QUBITS:
        raise ValueError(f"dense reference limited to {MAX_QUBITS} qubits")
    dim = 1 << n
    u = np.zeros((dim, dim), dtype=complex)
    if g.kind == "swap":
        a, b = g.targets
        for j in range(dim):
            ba = (j >> a) & 1
            bb = (j >> b) & 1
            out = (j & ~(1 << a) & ~(1 << b)) | (bb << a) | (ba << b)
            u[out, j] = 1.0
        return u
    m = _m1q(g.kind, g.params)
    t = g.targets[0]
    cmask = 0
    for c in g.controls:
        cmask |= 1 << c
    for j in range(dim):
        if j & cmask != cmask:
            u[j, j] = 1.0
            continue
        b = (j >> t) & 1
        j0 = j & ~(1 << t)
        u[j0, j] = m[0, b]
        u[j0 | (1 << t), j] = m[1, b]
    return u


def circuit_unitary(c: Circuit) -> np.ndarray:
    u = np.eye(1 << c.num_qubits, dtype=complex)
    for g in c.gates:
        u = gate_unitary(g, c.num_qubits) @ u
    if c.global_phase != 0.0:
        u = cmath.exp(1j * c.global_phase) * u
    return u


def extend_layout(layout, n: int) -> list[int]:
    """Complete a partial logical->physical assignment to a bijection on n
    qubits: leftover logicals take the leftover physicals in ascending order."""
    out = list(layout)
    if len(out) > n or len(set(out)) != len(out) or any(
            p < 0 or p >= n for p in out):
        raise ValueError(f"bad layout {layout} for {n} qubits")
    free = [p for p in range(n) if p not in set(out)]
    out.extend(free)
    return out


def layout_unitary(layout, n: int) -> np.ndarray:
    """Permutation matrix P with P|x> = |y>, bit layout[l] of y = bit l of x."""
    full = extend_layout(layout, n)
    dim = 1 << n
    p = np.zeros((dim, dim), dtype=complex)
    for x in range(dim):
        y = 0
        for l in range(n):
            if (x >> l) & 1:
                y |= 1 << full[l]
        p[y, x] = 1.0
    return p


def _zero_ancilla_columns(u: np.ndarray, ancillas, n: int) -> np.ndarray:
    amask = 0
    for a in ancillas:
        amask |= 1 << a
    if amask == 0:
        return u
    out = u.copy()
    for j in range(u.shape[1]):
        if j & amask:
            out[:, j] = 0.0
    return out


def dense_equivalent(a: Circuit, b: Circuit,
                     initial_layout=None, final_layout=None,
                     ancillas=(), tol: float = 1e-9,
                     up_to_global_phase: bool = False) -> bool:
    """Reference equivalence decision.

    `b` may be wider than `a`; the extra qubits of `a`'s side are padded as
    identity wires. Layouts map `a`'s qubits onto `b`'s, so the compared
    quantity is P_final^T . U_b . P_initial against the padded U_a. Qubits
    listed in `ancillas` (indices on `a`'s padded register) are compared
    only on the columns where they start in |0>.
    """
    n = b.num_qubits
    if a.num_qubits > n:
        raise ValueError("first circuit is wider than the second")
    ua = circuit_unitary(a)
    if a.num_qubits < n:
        ua = np.kron(np.eye(1 << (n - a.num_qubits), dtype=complex), ua)
    ub = circuit_unitary(b)
    if initial_layout is not None:
        ub = ub @ layout_unitary(initial_layout, n)
    if final_layout is not None:
        ub = layout_unitary(final_layout, n).conj().T @ ub
    ua = _zero_ancilla_columns(ua, ancillas, n)
    ub = _zero_ancilla_columns(ub, ancillas, n)
    if up_to_global_phase:
        idx = np.unravel_index(np.argmax(np.abs(ua)), ua.shape)
        ref = ua[idx]
        got = ub[idx]
        if abs(got) < 1e-12:
            return False
        alpha = ref / got
        if abs(abs(alpha) - 1.0) > tol:
            return False
        ub = alpha * ub
    return bool(np.max(np.abs(ua - ub)) <= tol)
