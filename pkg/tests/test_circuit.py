"""Circuit IR: gates, canonical u3, inversion, single-qubit fusion."""

import cmath
import math
import random

import numpy as np
import pytest

from qcec.circuit import (TAU, Circuit, FusedBlock, Gate,
                          UnsupportedGateError, fuse_runs_with_origins,
                          fuse_single_qubit_runs, gate_for_matrix,
                          gate_matrix_2x2, invert, make_u3, mod_tau, u3_on,
                          zyz_angles)
from qcec.corpus import random_circuit
from qcec.dense import circuit_unitary, gate_unitary

from helpers import circ, cx


def test_mod_tau_range():
    for x in (-10.0, -math.pi, 0.0, 1.0, 7.0, 100.0):
        y = mod_tau(x)
        assert 0.0 <= y < TAU
        assert cmath.isclose(cmath.exp(1j * y), cmath.exp(1j * x),
                             abs_tol=1e-9)


def test_gate_rejects_unknown_kind():
    with pytest.raises(UnsupportedGateError):
        Gate("rx", (0,), (), (0.5,))


def test_gate_rejects_bad_param_counts():
    with pytest.raises(UnsupportedGateError):
        Gate("u3", (0,), (), (0.1, 0.2))
    with pytest.raises(UnsupportedGateError):
        Gate("x", (0,), (), (0.1,))
    with pytest.raises(UnsupportedGateError):
        Gate("u1", (0,))


def test_gate_rejects_bad_operand_shapes():
    with pytest.raises(UnsupportedGateError):
        Gate("h", (0, 1))
    with pytest.raises(UnsupportedGateError):
        Gate("cx", (0,))
    with pytest.raises(UnsupportedGateError):
        Gate("swap", (0,))
    with pytest.raises(UnsupportedGateError):
        Gate("mcx", (0,))
    with pytest.raises(UnsupportedGateError):
        Gate("cx", (1,), (1,))     # overlapping operands
    with pytest.raises(UnsupportedGateError):
        Gate("h", (-1,))


def test_gate_rejects_out_of_range_theta():
    with pytest.raises(UnsupportedGateError):
        Gate("u3", (0,), (), (4.0, 0.0, 0.0))
    with pytest.raises(UnsupportedGateError):
        Gate("u3", (0,), (), (-0.5, 0.0, 0.0))


def test_gate_qubits_and_relabel():
    g = Gate("mcx", (4,), (1, 2))
    assert g.qubits == (1, 2, 4)
    h = g.relabeled({1: 10, 2: 20, 4: 40})
    assert h.controls == (10, 20)
    assert h.targets == (40,)
    assert h.kind == "mcx"


def _u3_matrix(theta, phi, lam):
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([
        [c, -cmath.exp(1j * lam) * s],
        [cmath.exp(1j * phi) * s, cmath.exp(1j * (phi + lam)) * c]])


def test_make_u3_canonicalizes_with_exact_phase():
    rng = random.Random(3)
    for _ in range(300):
        theta = rng.uniform(-12.0, 12.0)
        phi = rng.uniform(-12.0, 12.0)
        lam = rng.uniform(-12.0, 12.0)
        g, phase = make_u3(theta, phi, lam)
        assert 0.0 <= g.params[0] <= math.pi + 1e-12
        assert 0.0 <= g.params[1] < TAU
        assert 0.0 <= g.params[2] < TAU
        assert phase in (0.0, math.pi)
        want = _u3_matrix(theta, phi, lam)
        got = cmath.exp(1j * phase) * _u3_matrix(*g.params)
        assert np.max(np.abs(want - got)) < 1e-9


def test_u3_on_places_target():
    g, _ = u3_on(3, 0.4, 0.5, 0.6)
    assert g.targets == (3,)


def test_gate_matrix_2x2_matches_dense():
    cases = [("x", ()), ("y", ()), ("z", ()), ("h", ()), ("s", ()),
             ("sdg", ()), ("t", ()), ("tdg", ()),
             ("u1", (0.7,)), ("u2", (0.3, 1.1)), ("u3", (1.0, 2.0, 3.0))]
    for kind, params in cases:
        m = np.array(gate_matrix_2x2(kind, params))
        d = gate_unitary(Gate(kind, (0,), (), params), 1)
        assert np.max(np.abs(m - d)) < 1e-12


def test_invert_every_kind_round_trips():
    gates = [Gate(k, (0,)) for k in
             ("x", "y", "z", "h", "s", "sdg", "t", "tdg")]
    gates += [Gate("u1", (0,), (), (0.7,)),
              Gate("u2", (0,), (), (0.3, 1.1)),
              Gate("u3", (0,), (), (1.0, 2.0, 3.0)),
              cx(0, 1), Gate("cz", (1,), (0,)), Gate("swap", (0, 1)),
              Gate("mcx", (2,), (0, 1))]
    for g in gates:
        n = max(g.qubits) + 1
        u = gate_unitary(g, n)
        v = gate_unitary(invert(g), n)
        assert np.max(np.abs(v @ u - np.eye(1 << n))) < 1e-12, g


def test_circuit_defaults_and_validation():
    c = Circuit(3)
    assert c.registers == (("q", 3),)
    assert c.ancilla_flags == (False, False, False)
    assert len(c) == 0
    with pytest.raises(ValueError):
        Circuit(2, (Gate("h", (5,)),))
    with pytest.raises(ValueError):
        Circuit(2, ancilla_flags=(True,))
    with pytest.raises(ValueError):
        Circuit(3, registers=(("q", 2),))


def test_circuit_ancillas_property():
    c = Circuit(4, ancilla_flags=(False, True, False, True))
    assert c.ancillas == (1, 3)


def test_with_gates_accumulates_phase():
    c = Circuit(1, (Gate("h", (0,)),), global_phase=0.5)
    d = c.with_gates([Gate("x", (0,))], extra_phase=0.25)
    assert d.global_phase == 0.75
    assert d.gates == (Gate("x", (0,)),)


def test_widened_pads_with_ancilla_wires():
    c = Circuit(2, (cx(0, 1),))
    w = c.widened(4)
    assert w.num_qubits == 4
    assert w.ancillas == (2, 3)
    assert w.registers == (("q", 2), ("anc", 2))
    assert c.widened(2) is c
    with pytest.raises(ValueError):
        c.widened(1)


def test_inverted_circuit_is_dense_inverse():
    rng = random.Random(11)
    for _ in range(10):
        c = random_circuit(3, 12, rng)
        u = circuit_unitary(c)
        v = circuit_unitary(c.inverted())
        assert np.max(np.abs(v @ u - np.eye(8))) < 1e-9


def test_zyz_angles_reconstruct():
    rng = random.Random(5)
    for _ in range(100):
        g, _ = make_u3(rng.uniform(0, math.pi), rng.uniform(0, TAU),
                       rng.uniform(0, TAU))
        scale = cmath.exp(1j * rng.uniform(0, TAU))
        u = tuple(tuple(scale * x for x in row)
                  for row in gate_matrix_2x2("u3", g.params))
        theta, phi, lam, alpha = zyz_angles(u)
        got = cmath.exp(1j * alpha) * np.array(
            gate_matrix_2x2("u3", (theta, phi, lam)))
        assert np.max(np.abs(np.array(u) - got)) < 1e-9


def test_gate_for_matrix_prefers_named_gates():
    for kind in ("x", "y", "z", "h", "s", "sdg", "t", "tdg"):
        g, phase = gate_for_matrix(gate_matrix_2x2(kind, ()), 2)
        assert g == Gate(kind, (2,))
        assert phase == 0.0


def test_gate_for_matrix_scalar_and_u1():
    ident = ((1 + 0j, 0j), (0j, 1 + 0j))
    g, phase = gate_for_matrix(ident, 0)
    assert g is None and phase == 0.0
    phased = ((1j, 0j), (0j, 1j))
    g, phase = gate_for_matrix(phased, 0)
    assert g is None
    assert cmath.isclose(cmath.exp(1j * phase), 1j, abs_tol=1e-12)
    diag = ((1 + 0j, 0j), (0j, cmath.exp(0.3j)))
    g, phase = gate_for_matrix(diag, 0)
    assert g.kind == "u1" and phase == 0.0


def test_fuse_runs_origins_partition():
    rng = random.Random(9)
    for _ in range(20):
        c = random_circuit(4, 30, rng)
        blocks = fuse_runs_with_origins(c.gates)
        seen = sorted(i for b in blocks for i in b.origins)
        assert seen == list(range(len(c.gates)))
        starts = [b.origins[0] for b in blocks]
        assert starts == sorted(starts)


def test_fuse_runs_collapses_adjacent_singles():
    c = circ(2,
             Gate("h", (0,)), Gate("t", (0,)), Gate("h", (0,)),
             cx(0, 1),
             Gate("s", (1,)), Gate("sdg", (1,)))
    blocks = fuse_runs_with_origins(c.gates)
    # run of 3 on wire 0, the cx, and an identity run on wire 1
    assert [b.origins for b in blocks] == [[0, 1, 2], [3], [4, 5]]
    assert len(blocks[0].gates) == 1
    assert blocks[1].gates == [cx(0, 1)]
    assert blocks[2].gates == []       # s then sdg cancels


def test_fuse_preserves_dense_semantics():
    rng = random.Random(13)
    for _ in range(20):
        c = random_circuit(3, 25, rng)
        f = fuse_single_qubit_runs(c)
        assert len(f.gates) <= len(c.gates)
        assert np.max(np.abs(circuit_unitary(c) - circuit_unitary(f))) < 1e-9


def test_fused_block_fields():
    b = FusedBlock([Gate("h", (0,))], [4], 0.5)
    assert b.gates[0].kind == "h"
    assert b.origins == [4]
    assert b.phase == 0.5
