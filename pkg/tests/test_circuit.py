import itertools
import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mbqcla.circuit import (
    Circuit,
    CircuitError,
    DomainError,
    Gate,
    GateKind,
    InvalidWidthError,
    apply_gates,
    build_adder,
    build_qcla_adder,
    build_ripple_adder,
    eval_circuit,
    floor_log2,
    hamming_weight,
    run_classical,
    toffoli_layer_count,
)

KINDS = ("ripple", "qcla")


# -- oracle: plain integer addition ------------------------------------------


def oracle_sum(a: int, b: int, n: int) -> int:
    return (a + b) % (1 << (n + 1))


@pytest.mark.parametrize("kind", KINDS)
@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_exhaustive_small(kind, n):
    c = build_adder(kind, n)
    for a, b in itertools.product(range(1 << n), repeat=2):
        bits = run_classical(c, a, b)
        assert eval_circuit(c, a, b) == oracle_sum(a, b, n)
        assert all(bits[q] == 0 for q in c.ancillae), "ancilla left dirty"
        assert sum(bits[q] << i for i, q in enumerate(c.a_reg)) == a, "a register changed"


def test_qcla_n8_exhaustive():
    c = build_qcla_adder(8)
    for a in range(256):
        for b in range(256):
            assert eval_circuit(c, a, b) == a + b


@pytest.mark.parametrize("n", [3])
def test_adders_agree(n):
    r, q = build_ripple_adder(n), build_qcla_adder(n)
    for a, b in itertools.product(range(1 << n), repeat=2):
        assert eval_circuit(r, a, b) == eval_circuit(q, a, b)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 40).flatmap(lambda n: st.tuples(st.just(n), st.integers(0, 2**n - 1), st.integers(0, 2**n - 1))),
       st.sampled_from(KINDS))
def test_random_wide_additions(nab, kind):
    n, a, b = nab
    c = build_adder(kind, n)
    assert eval_circuit(c, a, b) == a + b
    bits = run_classical(c, a, b)
    assert not any(bits[q] for q in c.ancillae)


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(KINDS), st.integers(1, 9), st.data())
def test_inverse_restores_any_basis_state(kind, n, data):
    c = build_adder(kind, n)
    bits = data.draw(st.lists(st.integers(0, 1), min_size=c.n_qubits, max_size=c.n_qubits))
    forward = apply_gates(list(bits), c.gates)
    assert apply_gates(forward, c.inverse().gates) == bits


# -- spec examples ---------------------------------------------------------------


@pytest.mark.parametrize("kind", KINDS)
def test_examples(kind):
    assert eval_circuit(build_adder(kind, 4), 3, 5) == 8
    assert eval_circuit(build_adder(kind, 4), 15, 1) == 16
    assert eval_circuit(build_adder(kind, 3), 0, 0) == 0
    assert eval_circuit(build_adder(kind, 2), 1, 1) == 2


@pytest.mark.parametrize("kind", KINDS)
def test_zero_width_rejected(kind):
    with pytest.raises(InvalidWidthError):
        build_adder(kind, 0)


@pytest.mark.parametrize("a,b", [(-1, 0), (0, 16), (16, 16)])
def test_operand_domain(a, b):
    with pytest.raises(DomainError):
        eval_circuit(build_qcla_adder(4), a, b)


def test_gate_invariants():
    with pytest.raises(CircuitError):
        Gate(GateKind.CNOT, (1, 1))
    with pytest.raises(CircuitError):
        Gate(GateKind.TOFFOLI, (0, 1))
    with pytest.raises(CircuitError):
        Circuit(2, (Gate(GateKind.CNOT, (0, 2)),))


def test_register_roles_disjoint():
    with pytest.raises(CircuitError):
        Circuit(3, (), {"a": (0, 1), "b": (1, 2)})


# -- layering ----------------------------------------------------------------------


def test_layer_count_examples():
    assert toffoli_layer_count(Circuit(3, ())) == 0
    assert toffoli_layer_count(Circuit(3, (Gate(GateKind.TOFFOLI, (0, 1, 2)),))) == 1
    two = (Gate(GateKind.TOFFOLI, (0, 1, 2)), Gate(GateKind.TOFFOLI, (3, 4, 5)))
    assert toffoli_layer_count(Circuit(6, two)) == 1
    chained = (Gate(GateKind.TOFFOLI, (0, 1, 2)), Gate(GateKind.TOFFOLI, (2, 3, 4)))
    assert toffoli_layer_count(Circuit(5, chained)) == 2
    # a Clifford gate orders but does not lengthen
    cliff = (Gate(GateKind.TOFFOLI, (0, 1, 2)), Gate(GateKind.CNOT, (2, 3)), Gate(GateKind.TOFFOLI, (3, 4, 5)))
    assert toffoli_layer_count(Circuit(6, cliff)) == 2


def test_ripple_layers_linear():
    counts = [toffoli_layer_count(build_ripple_adder(n)) for n in (4, 8, 16, 32)]
    for lo, hi in zip(counts, counts[1:]):
        assert abs(hi / lo - 2) <= 0.25


def test_qcla_layers_logarithmic():
    assert toffoli_layer_count(build_qcla_adder(128)) / toffoli_layer_count(build_qcla_adder(8)) <= 4
    for n in (8, 16, 32, 64, 128):
        assert toffoli_layer_count(build_qcla_adder(n)) <= 4 * floor_log2(n) + 3
    for n in (8, 16, 32):
        assert toffoli_layer_count(build_ripple_adder(n)) >= 2 * n


# -- helpers -----------------------------------------------------------------------


@pytest.mark.parametrize("n,w", [(8, 1), (7, 3), (0, 0), (255, 8)])
def test_hamming_weight(n, w):
    assert hamming_weight(n) == w


@given(st.integers(0, 2**64))
def test_hamming_weight_matches_binary_string(n):
    assert hamming_weight(n) == bin(n).count("1")


@given(st.integers(1, 2**40))
def test_floor_log2(x):
    k = floor_log2(x)
    assert 2**k <= x < 2 ** (k + 1)


@pytest.mark.parametrize("kind", KINDS)
def test_json_round_trip(kind):
    c = build_adder(kind, 5)
    d = json.loads(c.to_json())
    assert set(d) == {"n_bits", "n_qubits", "register_map", "gates"}
    back = Circuit.from_json(c.to_json())
    assert back.gates == c.gates and back.register_map == c.register_map and back.n_bits == 5
