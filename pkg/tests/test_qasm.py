"""OpenQASM 2.0 reading and writing."""

import math
import random
import warnings

import numpy as np
import pytest

from qcec.circuit import Circuit, Gate, UnsupportedGateError
from qcec.corpus import random_circuit
from qcec.dense import circuit_unitary
from qcec.qasm import QasmError, QasmWarning, emit_qasm, parse_qasm

from helpers import circ, cx

HEADER = 'OPENQASM 2.0;\ninclude "qelib1.inc";\n'


def test_parse_minimal_program():
    c = parse_qasm(HEADER + "qreg q[2];\nh q[0];\ncx q[0],q[1];\n")
    assert c.num_qubits == 2
    assert c.gates == (Gate("h", (0,)), cx(0, 1))
    assert c.registers == (("q", 2),)
    assert c.global_phase == 0.0


def test_parse_multiple_registers_concatenate():
    c = parse_qasm(HEADER + "qreg a[1];\nqreg b[2];\nx b[1];\ncx a[0],b[0];\n")
    assert c.num_qubits == 3
    assert c.registers == (("a", 1), ("b", 2))
    assert c.gates == (Gate("x", (2,)), cx(0, 1))


def test_parse_parameter_arithmetic():
    c = parse_qasm(HEADER + "qreg q[1];\nu1(pi/2) q[0];\nu1(2*pi-0.5) q[0];\n")
    assert c.gates[0].params[0] == pytest.approx(math.pi / 2)
    assert c.gates[1].params[0] == pytest.approx(2 * math.pi - 0.5)


def test_parse_u3_canonicalizes():
    c = parse_qasm(HEADER + "qreg q[1];\nu3(-0.5,0,0) q[0];\n")
    g = c.gates[0]
    assert g.kind == "u3"
    assert 0.0 <= g.params[0] <= math.pi


def test_rz_becomes_u1_with_phase():
    rz = parse_qasm(HEADER + "qreg q[1];\nrz(0.8) q[0];\n")
    u1 = parse_qasm(HEADER + "qreg q[1];\nu1(0.8) q[0];\n")
    assert rz.gates == u1.gates
    assert rz.gates[0].kind == "u1"
    # rz(l) = exp(-i l/2) u1(l): same unitary only with the phase tally
    got = circuit_unitary(rz)
    want = np.diag([np.exp(-0.4j), np.exp(0.4j)])
    assert np.max(np.abs(got - want)) < 1e-12
    assert circuit_unitary(u1)[0, 0] == 1.0


def test_ccx_and_wider_controls():
    c = parse_qasm(HEADER + "qreg q[5];\n"
                   "ccx q[0],q[1],q[2];\n"
                   "c3x q[0],q[1],q[2],q[3];\n"
                   "c4x q[0],q[1],q[2],q[3],q[4];\n"
                   "mcx q[4],q[3],q[0];\n")
    kinds = [(g.kind, len(g.controls)) for g in c.gates]
    assert kinds == [("mcx", 2), ("mcx", 3), ("mcx", 4), ("mcx", 2)]
    assert c.gates[0].targets == (2,)
    assert c.gates[3].controls == (4, 3)


def test_id_gate_dropped():
    c = parse_qasm(HEADER + "qreg q[1];\nid q[0];\nx q[0];\n")
    assert c.gates == (Gate("x", (0,)),)


def test_barrier_ignored():
    c = parse_qasm(HEADER + "qreg q[2];\nh q[0];\nbarrier q[0],q[1];\nh q[1];\n")
    assert len(c.gates) == 2


def test_trailing_full_measurement_stripped_with_warning():
    text = (HEADER + "qreg q[2];\ncreg m[2];\nh q[0];\n"
            "measure q[0] -> m[0];\nmeasure q[1] -> m[1];\n")
    with pytest.warns(QasmWarning):
        c = parse_qasm(text)
    assert c.gates == (Gate("h", (0,)),)


def test_whole_register_measurement():
    text = HEADER + "qreg q[2];\ncreg m[2];\nmeasure q -> m;\n"
    with pytest.warns(QasmWarning):
        c = parse_qasm(text)
    assert c.num_qubits == 2


def test_partial_measurement_rejected():
    text = (HEADER + "qreg q[2];\ncreg m[2];\n"
            "measure q[0] -> m[0];\n")
    with pytest.raises(QasmError):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            parse_qasm(text)


def test_mid_circuit_measurement_rejected():
    text = (HEADER + "qreg q[1];\ncreg m[1];\n"
            "measure q[0] -> m[0];\nx q[0];\n")
    with pytest.raises(QasmError):
        parse_qasm(text)


def test_error_carries_position():
    with pytest.raises(QasmError) as e:
        parse_qasm(HEADER + "qreg q[1];\nbork q[0];\n")
    assert e.value.line == 4
    assert e.value.col >= 1
    assert "line 4" in str(e.value)


def test_parse_errors():
    with pytest.raises(QasmError):
        parse_qasm("qreg q[1];\n")                      # no header
    with pytest.raises(QasmError):
        parse_qasm("OPENQASM 3.0;\nqreg q[1];\n")       # wrong version
    with pytest.raises(QasmError):
        parse_qasm(HEADER + "x q[0];\n")                # undeclared register
    with pytest.raises(QasmError):
        parse_qasm(HEADER + "qreg q[1];\nx q[3];\n")    # index out of range
    with pytest.raises(QasmError):
        parse_qasm(HEADER + "qreg q[1];\nqreg q[1];\n")  # redeclared
    with pytest.raises(QasmError):
        parse_qasm(HEADER + "qreg q[2];\ncx q[0],q[0];\n")  # duplicate qubit
    with pytest.raises(QasmError):
        parse_qasm(HEADER + "qreg q[1];\nu1(0.1,0.2) q[0];\n")  # arity
    with pytest.raises(QasmError):
        parse_qasm(HEADER + "qreg q[2];\nh q;\n")       # full-register operand
    with pytest.raises(QasmError):
        parse_qasm(HEADER)                               # no qreg at all


def test_structured_comments_round_trip():
    c = Circuit(3, (Gate("h", (0,)), cx(0, 2)),
                ancilla_flags=(False, True, True),
                global_phase=1.25)
    text = emit_qasm(c)
    assert "// global_phase: 1.25" in text
    assert "// ancillas: 1 2" in text
    again = parse_qasm(text)
    assert again.global_phase == 1.25
    assert again.ancillas == (1, 2)
    assert again.gates == c.gates


def test_emit_parse_round_trip_structural():
    rng = random.Random(37)
    for _ in range(15):
        c = random_circuit(4, 25, rng, allow_swap=True, max_mcx=3)
        again = parse_qasm(emit_qasm(c))
        assert again.num_qubits == c.num_qubits
        assert again.gates == c.gates
        assert again.global_phase == pytest.approx(c.global_phase % (2 * math.pi))


def test_emit_parse_round_trip_dense():
    rng = random.Random(41)
    for _ in range(10):
        c = random_circuit(3, 20, rng)
        again = parse_qasm(emit_qasm(c))
        assert np.max(np.abs(circuit_unitary(c) - circuit_unitary(again))) < 1e-9


def test_emit_mcx_spellings():
    c = circ(5, Gate("mcx", (4,), (0, 1, 2, 3)))
    assert "c4x q[0],q[1],q[2],q[3],q[4];" in emit_qasm(c)
    c = circ(2, Gate("mcx", (1,), (0,)))
    assert "cx q[0],q[1];" in emit_qasm(c)


def test_emit_rejects_unnameable_mcx():
    c = circ(6, Gate("mcx", (5,), (0, 1, 2, 3, 4)))
    with pytest.raises(UnsupportedGateError):
        emit_qasm(c)


def test_emit_respects_registers():
    c = Circuit(3, (cx(0, 2),), registers=(("a", 1), ("b", 2)))
    assert "cx a[0],b[1];" in emit_qasm(c)
