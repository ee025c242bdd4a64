"""qcec: equivalence checking of quantum circuits against compiled output.

The checker builds canonical decision diagrams for both circuits and keeps
a running product G . D . G'^-1 close to the identity by alternating gate
applications from the two sides, guided by a per-gate cost oracle and, when
available, by the compiler's own record of what it did.
"""

from .checker import (EcOptions, EcResult, Marker, OracleTable, QubitMap,
                      build_oracle, check_all, check_equivalence, preprocess)
from .circuit import Circuit, Gate, UnsupportedGateError, make_u3
from .compiler import CompileError, CompileRecord, RecordError, compile_circuit
from .coupling import CouplingMap
from .dd import DDPackage, TooLargeError, UnitaryDD
from .numerics import ComplexTable, InvalidNumberError, SingularValueError
from .qasm import QasmError, QasmWarning, emit_qasm, parse_qasm

__all__ = [
    "Circuit",
    "CompileError",
    "CompileRecord",
    "ComplexTable",
    "CouplingMap",
    "DDPackage",
    "EcOptions",
    "EcResult",
    "Gate",
    "InvalidNumberError",
    "Marker",
    "OracleTable",
    "QasmError",
    "QasmWarning",
    "QubitMap",
    "RecordError",
    "SingularValueError",
    "TooLargeError",
    "UnitaryDD",
    "UnsupportedGateError",
    "build_oracle",
    "check_all",
    "check_equivalence",
    "compile_circuit",
    "emit_qasm",
    "make_u3",
    "parse_qasm",
    "preprocess",
]

__version__ = "0.1.0"
