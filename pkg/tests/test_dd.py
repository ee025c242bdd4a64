"""Decision-diagram package: canonical builds, algebra, ancilla views."""

import math
import random

import numpy as np
import pytest

from qcec.circuit import Gate
from qcec.corpus import random_circuit
from qcec.dd import DDPackage, TooLargeError
from qcec.dense import circuit_unitary, gate_unitary

from helpers import circ, cx


def _dd_of(pkg, c):
    u = pkg.make_identity(c.num_qubits)
    for g in c.gates:
        u = pkg.apply_left(u, g)
    return u


def test_make_identity_node_counts():
    pkg = DDPackage()
    for n in range(1, 21):
        assert pkg.node_count(pkg.make_identity(n)) == n


def test_identity_round_trip_dense():
    pkg = DDPackage()
    u = pkg.make_identity(3)
    assert np.array_equal(pkg.to_dense(u), np.eye(8))


def test_gate_dd_matches_dense_every_kind():
    pkg = DDPackage()
    gates = [Gate(k, (1,)) for k in
             ("x", "y", "z", "h", "s", "sdg", "t", "tdg")]
    gates += [Gate("u1", (0,), (), (0.7,)),
              Gate("u2", (2,), (), (0.3, 1.1)),
              Gate("u3", (1,), (), (1.0, 2.0, 3.0)),
              cx(0, 2), cx(2, 0), Gate("cz", (1,), (2,)),
              Gate("swap", (0, 2)), Gate("swap", (2, 1)),
              Gate("mcx", (1,), (0, 2)), Gate("mcx", (0,), (1, 2))]
    for g in gates:
        got = pkg.to_dense(pkg.gate_dd(g, 3))
        assert np.max(np.abs(got - gate_unitary(g, 3))) < 1e-12, g


def test_gate_dd_relabel():
    pkg = DDPackage()
    moved = pkg.gate_dd(cx(0, 1), 3, relabel=[2, 0, 1])
    direct = pkg.gate_dd(cx(2, 0), 3)
    assert moved.root.node is direct.root.node
    assert moved.root.weight is direct.root.weight


def test_multiply_matches_dense():
    pkg = DDPackage()
    rng = random.Random(17)
    for _ in range(10):
        a = random_circuit(3, 8, rng)
        b = random_circuit(3, 8, rng)
        da, db = _dd_of(pkg, a), _dd_of(pkg, b)
        got = pkg.to_dense(pkg.multiply(da, db))
        want = circuit_unitary(a.with_gates(a.gates, -a.global_phase)) \
            @ circuit_unitary(b.with_gates(b.gates, -b.global_phase))
        assert np.max(np.abs(got - want)) < 1e-9


def test_apply_right_inverse_undoes_apply_left():
    pkg = DDPackage()
    rng = random.Random(23)
    c = random_circuit(4, 30, rng)
    u = pkg.make_identity(4)
    for g in c.gates:
        u = pkg.apply_left(u, g)
    for g in reversed(c.gates):
        u = pkg.multiply(pkg.gate_dd(g, 4), u)  # rebuild left product
    ident = pkg.make_identity(4)
    v = pkg.make_identity(4)
    for g in c.gates:
        v = pkg.apply_left(v, g)
    for g in c.gates:
        v = pkg.apply_right_inverse(v, g)
    assert v.root.node is ident.root.node
    assert abs(v.root.weight.value - 1.0) < 1e-9


def test_association_order_gives_identical_roots():
    pkg = DDPackage()
    rng = random.Random(29)
    for _ in range(50):
        c = random_circuit(4, 12, rng)
        left = _dd_of(pkg, c)
        # balanced tree over the same gate list
        dds = [pkg.gate_dd(g, 4) for g in c.gates]
        while len(dds) > 1:
            nxt = []
            for i in range(0, len(dds) - 1, 2):
                nxt.append(pkg.multiply(dds[i + 1], dds[i]))
            if len(dds) % 2:
                nxt.append(dds[-1])
            dds = nxt
        tree = dds[0]
        assert tree.root.node is left.root.node
        assert tree.root.weight is left.root.weight


def test_two_packages_build_equal_structures():
    # canonicity is per package: same circuit, same shape, same values
    c = circ(2, Gate("h", (0,)), cx(0, 1), Gate("t", (1,)))
    a = _dd_of(DDPackage(), c)
    b = _dd_of(DDPackage(), c)
    assert a.root.node is not b.root.node   # different tables
    pkg = DDPackage()
    assert np.max(np.abs(DDPackage().to_dense(a) - pkg.to_dense(b))) < 1e-12


def test_is_identity_modes():
    pkg = DDPackage()
    ident = pkg.make_identity(3)
    assert pkg.is_identity(ident)
    u = pkg.apply_left(ident, Gate("t", (1,)))
    assert not pkg.is_identity(u, tol=1e-9)
    # identity times a phase: same node, non-unit weight (zxzx = -1)
    v = _dd_of(pkg, circ(1, Gate("z", (0,)), Gate("x", (0,)),
                         Gate("z", (0,)), Gate("x", (0,))))
    assert not pkg.is_identity(v, tol=1e-9)
    assert pkg.is_identity(v, tol=1e-9, up_to_global_phase=True)


def test_far_cx_stays_linear():
    pkg = DDPackage()
    for n in (4, 8, 12, 16):
        u = pkg.gate_dd(cx(0, n - 1), n)
        assert pkg.node_count(u) <= 3 * n - 2


def test_modify_ancillaries_matches_dense_column_zeroing():
    pkg = DDPackage()
    rng = random.Random(41)
    for _ in range(20):
        n = rng.randint(2, 5)
        c = random_circuit(n, 12, rng)
        anc = [q for q in range(n) if rng.random() < 0.4]
        u = _dd_of(pkg, c)
        got = pkg.to_dense(pkg.modify_ancillaries(u, anc))
        want = pkg.to_dense(u).copy()
        for j in range(1 << n):
            if any((j >> a) & 1 for a in anc):
                want[:, j] = 0.0
        assert np.max(np.abs(got - want)) < 1e-9


def test_modify_ancillaries_validates_indices():
    pkg = DDPackage()
    u = pkg.make_identity(2)
    with pytest.raises(ValueError):
        pkg.modify_ancillaries(u, [2])
    assert pkg.modify_ancillaries(u, []) is u


def test_is_identity_modified():
    pkg = DDPackage()
    # cz against a clean ancilla is inert; x on it is not
    inert = _dd_of(pkg, circ(2, Gate("cz", (0,), (1,))))
    assert not pkg.is_identity(inert, tol=1e-9)
    assert pkg.is_identity_modified(inert, [1], tol=1e-9)
    flip = _dd_of(pkg, circ(2, Gate("x", (1,))))
    assert not pkg.is_identity_modified(flip, [1], tol=1e-9)


def test_node_count_and_unique_size():
    pkg = DDPackage()
    u = _dd_of(pkg, circ(3, Gate("h", (0,)), cx(0, 1), cx(1, 2)))
    assert pkg.node_count(u) >= 3
    assert pkg.unique_size >= pkg.node_count(u)


def test_gc_preserves_roots_and_their_semantics():
    pkg = DDPackage()
    rng = random.Random(43)
    keep = _dd_of(pkg, random_circuit(3, 15, rng))
    before = pkg.to_dense(keep)
    for _ in range(5):
        _dd_of(pkg, random_circuit(3, 15, rng))   # garbage
    big = pkg.unique_size
    freed = pkg.gc([keep])
    assert freed > 0
    assert pkg.unique_size == big - freed
    assert np.max(np.abs(pkg.to_dense(keep) - before)) == 0.0
    # the kept root still composes correctly after collection
    again = pkg.apply_left(keep, Gate("h", (0,)))
    want = gate_unitary(Gate("h", (0,)), 3) @ before
    assert np.max(np.abs(pkg.to_dense(again) - want)) < 1e-9


def test_gc_keeps_identity_chain():
    pkg = DDPackage()
    ident = pkg.make_identity(4)
    pkg.gc([])
    assert pkg.make_identity(4).root.node is ident.root.node


def test_to_dense_width_limit():
    pkg = DDPackage()
    with pytest.raises(TooLargeError):
        pkg.to_dense(pkg.make_identity(11))


def test_normalization_insensitive_to_tiny_drift():
    # two builds of the same unitary through different float paths must
    # normalise identically; equal-magnitude children are a common case
    pkg = DDPackage()
    a = _dd_of(pkg, circ(2, Gate("h", (0,)), Gate("h", (1,)), cx(0, 1),
                         Gate("h", (0,)), Gate("h", (1,))))
    b_gates = [Gate("h", (1,)), Gate("h", (0,)), cx(0, 1),
               Gate("h", (1,)), Gate("h", (0,))]
    b = _dd_of(pkg, circ(2, *b_gates))
    assert a.root.node is b.root.node
    assert a.root.weight is b.root.weight
