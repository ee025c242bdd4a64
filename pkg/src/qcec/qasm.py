"""OpenQASM 2.0 reader and writer for the supported gate set.

The reader accepts the common flat subset: a version header, qreg/creg
declarations, calls to qelib1-style gates, barriers (ignored) and trailing
full-register measurements (stripped with a warning). Parameters are
constant arithmetic over numbers and pi.

Two structured comments survive a round trip losslessly:

    // global_phase: <float>
    // ancillas: <index> <index> ...
"""

from __future__ import annotations

import math
import re
import warnings

from .circuit import Circuit, Gate, UnsupportedGateError, make_u3, mod_tau


class QasmError(ValueError):
    def __init__(self, msg: str, line: int, col: int):
        super().__init__(f"line {line}, column {col}: {msg}")
        self.line = line
        self.col = col


class QasmWarning(UserWarning):
    pass


_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r]+)
  | (?P<comment>//[^\n]*)
  | (?P<nl>\n)
  | (?P<number>(\d+\.\d*|\.\d+|\d+)([eE][+-]?\d+)?)
  | (?P<id>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<string>"[^"\n]*")
  | (?P<arrow>->)
  | (?P<sym>[;,()\[\]{}+\-*/])
""", re.VERBOSE)

# name -> (param count, qubit count, builder)
_SIMPLE = {
    "x": 1, "y": 1, "z": 1, "h": 1, "s": 1, "sdg": 1, "t": 1, "tdg": 1,
}
_MCX_NAMES = {"ccx": 2, "c3x": 3, "c4x": 4}


class _Scanner:
    def __init__(self, text: str):
        self.tokens: list[tuple[str, str, int, int]] = []
        line, col = 1, 1
        pos = 0
        while pos < len(text):
            m = _TOKEN_RE.match(text, pos)
            if m is None:
                raise QasmError(f"unexpected character {text[pos]!r}", line, col)
            kind = m.lastgroup
            val = m.group()
            if kind == "nl":
                line += 1
                col = 1
            else:
                if kind not in ("ws", "comment"):
                    self.tokens.append((kind, val, line, col))
                col += len(val)
            pos = m.end()
        self.tokens.append(("eof", "", line, col))
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def next(self):
        tok = self.tokens[self.i]
        if tok[0] != "eof":
            self.i += 1
        return tok

    def expect(self, kind: str, val: str | None = None):
        tok = self.next()
        if tok[0] != kind or (val is not None and tok[1] != val):
            want = val if val is not None else kind
            raise QasmError(f"expected {want!r}, got {tok[1]!r}", tok[2], tok[3])
        return tok


def _parse_expr(sc: _Scanner) -> float:
    def factor() -> float:
        kind, val, line, col = sc.next()
        if kind == "sym" and val == "-":
            return -factor()
        if kind == "sym" and val == "+":
            return factor()
        if kind == "number":
            return float(val)
        if kind == "id" and val == "pi":
            return math.pi
        if kind == "sym" and val == "(":
            v = expr()
            sc.expect("sym", ")")
            return v
        raise QasmError(f"expected a number, 'pi' or '(', got {val!r}", line, col)

    def term() -> float:
        v = factor()
        while True:
            kind, val, line, col = sc.peek()
            if kind == "sym" and val in "*/":
                sc.next()
                rhs = factor()
                if val == "*":
                    v *= rhs
                else:
                    if rhs == 0.0:
                        raise QasmError("division by zero", line, col)
                    v /= rhs
            else:
                return v

    def expr() -> float:
        v = term()
        while True:
            kind, val, _, _ = sc.peek()
            if kind == "sym" and val in "+-":
                sc.next()
                rhs = term()
                v = v + rhs if val == "+" else v - rhs
            else:
                return v

    return expr()


def _scan_structured_comments(text: str) -> tuple[float, list[int]]:
    phase = 0.0
    ancillas: list[int] = []
    for raw in text.splitlines():
        s = raw.strip()
        if s.startswith("// global_phase:"):
            phase = float(s.split(":", 1)[1].strip())
        elif s.startswith("// ancillas:"):
            body = s.split(":", 1)[1].split()
            ancillas = [int(x) for x in body]
    return phase, ancillas


def parse_qasm(text: str) -> Circuit:
    phase, ancilla_list = _scan_structured_comments(text)
    sc = _Scanner(text)
    sc.expect("id", "OPENQASM")
    ver = sc.expect("number")
    if ver[1] not in ("2.0", "2"):
        raise QasmError(f"unsupported version {ver[1]}", ver[2], ver[3])
    sc.expect("sym", ";")

    qregs: list[tuple[str, int]] = []
    offsets: dict[str, int] = {}
    cregs: dict[str, int] = {}
    total = 0
    gates: list[Gate] = []
    # (kind, qubit/creg pairs) per measure, to validate the trailing block
    measures: list[tuple[int, int]] = []

    def qubit_of(name: str, idx: int, line: int, col: int) -> int:
        if name not in offsets:
            raise QasmError(f"unknown quantum register {name!r}", line, col)
        size = dict(qregs)[name]
        if not 0 <= idx < size:
            raise QasmError(f"index {idx} out of range for {name}[{size}]",
                            line, col)
        return offsets[name] + idx

    def operand() -> tuple[str, int | None, int, int]:
        kind, val, line, col = sc.next()
        if kind != "id":
            raise QasmError(f"expected a register name, got {val!r}", line, col)
        if sc.peek()[0] == "sym" and sc.peek()[1] == "[":
            sc.next()
            num = sc.expect("number")
            if "." in num[1] or "e" in num[1] or "E" in num[1]:
                raise QasmError(f"index must be an integer, got {num[1]}",
                                num[2], num[3])
            sc.expect("sym", "]")
            return val, int(num[1]), line, col
        return val, None, line, col

    while True:
        kind, val, line, col = sc.peek()
        if kind == "eof":
            break
        if kind != "id":
            raise QasmError(f"expected a statement, got {val!r}", line, col)
        sc.next()

        if measures and val != "measure":
            raise QasmError("only trailing measurements are supported",
                            line, col)

        if val == "include":
            sc.expect("string")
            sc.expect("sym", ";")
            continue
        if val == "qreg":
            name = sc.expect("id")[1]
            sc.expect("sym", "[")
            size = int(sc.expect("number")[1])
            sc.expect("sym", "]")
            sc.expect("sym", ";")
            if name in offsets or name in cregs:
                raise QasmError(f"register {name!r} already declared", line, col)
            offsets[name] = total
            qregs.append((name, size))
            total += size
            continue
        if val == "creg":
            name = sc.expect("id")[1]
            sc.expect("sym", "[")
            size = int(sc.expect("number")[1])
            sc.expect("sym", "]")
            sc.expect("sym", ";")
            if name in offsets or name in cregs:
                raise QasmError(f"register {name!r} already declared", line, col)
            cregs[name] = size
            continue
        if val == "barrier":
            while True:
                tok = sc.next()
                if tok[0] == "sym" and tok[1] == ";":
                    break
                if tok[0] == "eof":
                    raise QasmError("unterminated barrier", line, col)
            continue
        if val == "measure":
            name, idx, ln, cl = operand()
            sc.expect("arrow")
            operand()
            sc.expect("sym", ";")
            if name not in offsets:
                raise QasmError(f"unknown quantum register {name!r}", ln, cl)
            size = dict(qregs)[name]
            if idx is None:
                for k in range(size):
                    measures.append((offsets[name] + k, 0))
            else:
                measures.append((qubit_of(name, idx, ln, cl), 0))
            continue

        # gate call
        gname = val
        params: list[float] = []
        if sc.peek()[0] == "sym" and sc.peek()[1] == "(":
            sc.next()
            if not (sc.peek()[0] == "sym" and sc.peek()[1] == ")"):
                params.append(_parse_expr(sc))
                while sc.peek()[0] == "sym" and sc.peek()[1] == ",":
                    sc.next()
                    params.append(_parse_expr(sc))
            sc.expect("sym", ")")
        qubits: list[int] = []
        while True:
            name, idx, ln, cl = operand()
            if idx is None:
                raise QasmError("full-register gate operands are not supported",
                                ln, cl)
            qubits.append(qubit_of(name, idx, ln, cl))
            if sc.peek()[0] == "sym" and sc.peek()[1] == ",":
                sc.next()
                continue
            break
        sc.expect("sym", ";")

        g, extra = _build_gate(gname, params, qubits, line, col)
        phase += extra
        if g is not None:
            gates.append(g)

    if not qregs:
        raise QasmError("no quantum register declared", 1, 1)
    if measures:
        measured = {q for q, _ in measures}
        if measured != set(range(total)):
            missing = sorted(set(range(total)) - measured)
            raise QasmError(
                f"partial measurement (qubits {missing} unmeasured) is not"
                " supported", 1, 1)
        warnings.warn("trailing measurements stripped; comparing the unitary"
                      " part only", QasmWarning)

    flags = tuple(i in set(ancilla_list) for i in range(total))
    return Circuit(total, tuple(gates), tuple(qregs), flags, mod_tau(phase))


def _build_gate(name: str, params: list[float], qubits: list[int],
                line: int, col: int) -> tuple[Gate | None, float]:
    def want(np_: int, nq: int):
        if len(params) != np_:
            raise QasmError(f"{name} takes {np_} parameter(s), got {len(params)}",
                            line, col)
        if len(qubits) != nq:
            raise QasmError(f"{name} acts on {nq} qubit(s), got {len(qubits)}",
                            line, col)
        if len(set(qubits)) != nq:
            raise QasmError(f"duplicate qubit in {name}", line, col)

    if name == "id":
        want(0, 1)
        return None, 0.0
    if name in _SIMPLE:
        want(0, 1)
        return Gate(name, (qubits[0],)), 0.0
    if name in ("u3", "u", "U"):
        want(3, 1)
        g, extra = make_u3(*params)
        return g.relabeled({0: qubits[0]}), extra
    if name == "u2":
        want(2, 1)
        return Gate("u2", (qubits[0],), (),
                    (mod_tau(params[0]), mod_tau(params[1]))), 0.0
    if name in ("u1", "p", "rz"):
        # rz(l) differs from u1(l) by a global phase of -l/2
        want(1, 1)
        extra = -params[0] / 2 if name == "rz" else 0.0
        return Gate("u1", (qubits[0],), (), (mod_tau(params[0]),)), extra
    if name in ("cx", "CX"):
        want(0, 2)
        return Gate("cx", (qubits[1],), (qubits[0],)), 0.0
    if name == "cz":
        want(0, 2)
        return Gate("cz", (qubits[1],), (qubits[0],)), 0.0
    if name == "swap":
        want(0, 2)
        return Gate("swap", (qubits[0], qubits[1])), 0.0
    if name in _MCX_NAMES:
        k = _MCX_NAMES[name]
        want(0, k + 1)
        return Gate("mcx", (qubits[-1],), tuple(qubits[:-1])), 0.0
    if name == "mcx":
        if params:
            raise QasmError("mcx takes no parameters", line, col)
        if len(qubits) < 2 or len(set(qubits)) != len(qubits):
            raise QasmError("mcx needs at least two distinct qubits", line, col)
        return Gate("mcx", (qubits[-1],), tuple(qubits[:-1])), 0.0
    raise QasmError(f"unsupported gate {name!r}", line, col)


def _operand_str(q: int, qregs) -> str:
    off = 0
    for name, size in qregs:
        if q < off + size:
            return f"{name}[{q - off}]"
        off += size
    raise ValueError(f"qubit {q} outside declared registers")


def emit_qasm(c: Circuit) -> str:
    lines = ["OPENQASM 2.0;", 'include "qelib1.inc";']
    if c.global_phase != 0.0:
        lines.append(f"// global_phase: {c.global_phase!r}")
    anc = c.ancillas
    if anc:
        lines.append("// ancillas: " + " ".join(str(a) for a in sorted(anc)))
    for name, size in c.registers:
        lines.append(f"qreg {name}[{size}];")
    for g in c.gates:
        ops = [_operand_str(q, c.registers) for q in (*g.controls, *g.targets)]
        if g.kind == "mcx":
            k = len(g.controls)
            name = {1: "cx", 2: "ccx", 3: "c3x", 4: "c4x"}.get(k)
            if name is None:
                raise UnsupportedGateError(
                    f"no standard spelling for mcx with {k} controls")
        else:
            name = g.kind
        if g.params:
            name += "(" + ",".join(repr(p) for p in g.params) + ")"
        lines.append(f"{name} {','.join(ops)};")
    return "\n".join(lines) + "\n"
