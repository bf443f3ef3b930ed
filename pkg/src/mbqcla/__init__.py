"""Compile, optimise, count and simulate measurement-based quantum adders."""

from .circuit import Circuit, Gate, GateKind, build_adder, build_qcla_adder, build_ripple_adder, eval_circuit

__all__ = [
    "Circuit",
    "Gate",
    "GateKind",
    "build_adder",
    "build_qcla_adder",
    "build_ripple_adder",
    "eval_circuit",
]
__version__ = "0.1.0"
