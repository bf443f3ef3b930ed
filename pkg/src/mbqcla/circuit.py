"""Gate-level IR for reversible adders and its classical oracle.

Two constructions are provided: a MAJ/UMA ripple-carry adder with a linear
Toffoli chain, and an in-place carry-lookahead adder whose carries are built
from propagate/generate trees in logarithmic Toffoli depth. Both map
``|a>|b>|0...>`` to ``|a>|a+b>`` with the sum spread over the b register
plus one carry-out qubit.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence


class GateKind(str, enum.Enum):
    NOT = "NOT"
    CNOT = "CNOT"
    TOFFOLI = "TOFFOLI"
    TOFFOLI_PHASE = "TOFFOLI_PHASE"
    SWAP = "SWAP"
    WIRE = "WIRE"

    @property
    def arity(self) -> int:
        return _ARITY[self]

    @property
    def is_toffoli(self) -> bool:
        return self in (GateKind.TOFFOLI, GateKind.TOFFOLI_PHASE)


_ARITY = {
    GateKind.NOT: 1,
    GateKind.WIRE: 1,
    GateKind.CNOT: 2,
    GateKind.SWAP: 2,
    GateKind.TOFFOLI: 3,
    GateKind.TOFFOLI_PHASE: 3,
}


class CircuitError(ValueError):
    pass


class InvalidWidthError(CircuitError):
    pass


class DomainError(CircuitError):
    pass


@dataclass(frozen=True)
class Gate:
    kind: GateKind
    operands: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", GateKind(self.kind))
        object.__setattr__(self, "operands", tuple(int(q) for q in self.operands))
        if len(self.operands) != self.kind.arity:
            raise CircuitError(
                f"{self.kind.value} takes {self.kind.arity} operands, got {len(self.operands)}"
            )
        if len(set(self.operands)) != len(self.operands):
            raise CircuitError(f"repeated operand in {self.kind.value}{self.operands}")

    # Reads are controls; writes are the XOR target (both qubits for SWAP).
    @property
    def reads(self) -> frozenset[int]:
        if self.kind in (GateKind.CNOT, GateKind.TOFFOLI):
            return frozenset(self.operands[:-1])
        if self.kind is GateKind.TOFFOLI_PHASE:
            return frozenset(self.operands)
        return frozenset()

    @property
    def writes(self) -> frozenset[int]:
        if self.kind in (GateKind.NOT, GateKind.CNOT, GateKind.TOFFOLI):
            return frozenset(self.operands[-1:])
        if self.kind is GateKind.SWAP:
            return frozenset(self.operands)
        return frozenset()

    @property
    def is_xor(self) -> bool:
        return self.kind in (GateKind.NOT, GateKind.CNOT, GateKind.TOFFOLI)

    def commutes_with(self, other: "Gate") -> bool:
        """Classical-reversible commutation test on shared qubits."""
        if self.writes & other.reads or other.writes & self.reads:
            return False
        if self.writes & other.writes and not (self.is_xor and other.is_xor):
            return False
        return True

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "operands": list(self.operands)}


@dataclass(frozen=True)
class Circuit:
    n_qubits: int
    gates: tuple[Gate, ...]
    register_map: dict[str, tuple[int, ...]] = field(default_factory=dict)
    n_bits: int = 0
    name: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "gates", tuple(self.gates))
        object.__setattr__(
            self,
            "register_map",
            {role: tuple(qs) for role, qs in self.register_map.items()},
        )
        for g in self.gates:
            for q in g.operands:
                if not 0 <= q < self.n_qubits:
                    raise CircuitError(f"operand {q} outside 0..{self.n_qubits - 1}")
        seen: set[int] = set()
        for role, qs in self.register_map.items():
            for q in qs:
                if not 0 <= q < self.n_qubits:
                    raise CircuitError(f"register {role!r} names qubit {q} out of range")
                if q in seen:
                    raise CircuitError(f"qubit {q} appears in more than one register")
                seen.add(q)

    # -- registers -----------------------------------------------------------

    @property
    def a_reg(self) -> tuple[int, ...]:
        return self.register_map["a"]

    @property
    def b_reg(self) -> tuple[int, ...]:
        return self.register_map["b"]

    @property
    def sum_reg(self) -> tuple[int, ...]:
        """Sum bits, least significant first; the last entry is the carry-out."""
        return self.register_map["b"] + self.register_map["carry_out"]

    @property
    def ancillae(self) -> tuple[int, ...]:
        return self.register_map.get("ancilla", ())

    def inverse(self) -> "Circuit":
        # every gate in the IR is self-inverse
        return Circuit(self.n_qubits, self.gates[::-1], self.register_map, self.n_bits, self.name)

    def gate_counts(self) -> dict[GateKind, int]:
        counts: dict[GateKind, int] = {}
        for g in self.gates:
            counts[g.kind] = counts.get(g.kind, 0) + 1
        return counts

    # -- serialization -------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "n_bits": self.n_bits,
            "n_qubits": self.n_qubits,
            "register_map": {k: list(v) for k, v in self.register_map.items()},
            "gates": [g.to_dict() for g in self.gates],
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, d: dict) -> "Circuit":
        gates = [Gate(GateKind(g["kind"]), tuple(g["operands"])) for g in d["gates"]]
        return cls(
            n_qubits=int(d["n_qubits"]),
            gates=tuple(gates),
            register_map={k: tuple(v) for k, v in d["register_map"].items()},
            n_bits=int(d["n_bits"]),
        )

    @classmethod
    def from_json(cls, text: str) -> "Circuit":
        return cls.from_dict(json.loads(text))


# ---------------------------------------------------------------------------
# classical semantics


def apply_gates(bits: list[int], gates: Iterable[Gate]) -> list[int]:
    """Run gates on a basis state in place and return it.

    TOFFOLI_PHASE is diagonal, so on basis states it only contributes a phase
    and leaves the bits untouched. WIRE is the identity.
    """
    for g in gates:
        ops = g.operands
        k = g.kind
        if k is GateKind.NOT:
            bits[ops[0]] ^= 1
        elif k is GateKind.CNOT:
            bits[ops[1]] ^= bits[ops[0]]
        elif k is GateKind.TOFFOLI:
            bits[ops[2]] ^= bits[ops[0]] & bits[ops[1]]
        elif k is GateKind.SWAP:
            bits[ops[0]], bits[ops[1]] = bits[ops[1]], bits[ops[0]]
    return bits


def initial_bits(c: Circuit, a: int, b: int) -> list[int]:
    n = c.n_bits
    if not (0 <= a < 1 << n and 0 <= b < 1 << n):
        raise DomainError(f"operands must lie in [0, 2^{n}); got a={a}, b={b}")
    bits = [0] * c.n_qubits
    for i, q in enumerate(c.a_reg):
        bits[q] = (a >> i) & 1
    for i, q in enumerate(c.b_reg):
        bits[q] = (b >> i) & 1
    return bits


def read_register(bits: Sequence[int], qubits: Sequence[int]) -> int:
    return sum(bits[q] << i for i, q in enumerate(qubits))


def run_classical(c: Circuit, a: int, b: int) -> list[int]:
    return apply_gates(initial_bits(c, a, b), c.gates)


def eval_circuit(c: Circuit, a: int, b: int) -> int:
    """Integer on the sum register (carry-out included) after running ``c``."""
    return read_register(run_classical(c, a, b), c.sum_reg)


# ---------------------------------------------------------------------------
# scheduling


def toffoli_layers(c: Circuit | Sequence[Gate]) -> list[int]:
    """Greedy layer index of every gate.

    A gate waits for every earlier gate it does not commute with. Toffoli-type
    gates cost one layer; Clifford gates inherit their predecessors' layer, so
    they order the circuit without lengthening it.
    """
    gates = c.gates if isinstance(c, Circuit) else tuple(c)
    # per qubit: (max layer of gates that wrote it, max layer of gates that read it)
    last_write: dict[int, int] = {}
    last_read: dict[int, int] = {}
    last_nonxor_write: dict[int, int] = {}
    last_xor_write: dict[int, int] = {}
    out = []
    for g in gates:
        start = 0
        for q in g.reads:
            start = max(start, last_write.get(q, 0))
        for q in g.writes:
            start = max(start, last_read.get(q, 0), last_nonxor_write.get(q, 0))
            if not g.is_xor:
                start = max(start, last_xor_write.get(q, 0))
        layer = start + (1 if g.kind.is_toffoli else 0)
        out.append(layer)
        for q in g.reads:
            last_read[q] = max(last_read.get(q, 0), layer)
        for q in g.writes:
            last_write[q] = max(last_write.get(q, 0), layer)
            table = last_xor_write if g.is_xor else last_nonxor_write
            table[q] = max(table.get(q, 0), layer)
    return out


def toffoli_layer_count(c: Circuit | Sequence[Gate]) -> int:
    return max(toffoli_layers(c), default=0)


def hamming_weight(n: int) -> int:
    if n < 0:
        raise DomainError("hamming_weight needs n >= 0")
    return bin(n).count("1")


def floor_log2(x: float) -> int:
    """Largest t with 2**t <= x, for x >= 1."""
    t = 0
    while 2 ** (t + 1) <= x:
        t += 1
    return t


# ---------------------------------------------------------------------------
# constructions


def _check_width(n: int) -> None:
    if not isinstance(n, int) or n < 1:
        raise InvalidWidthError(f"adder width must be an integer >= 1, got {n!r}")


def build_ripple_adder(n: int) -> Circuit:
    """MAJ/UMA ripple-carry adder with a single carry-in ancilla.

    Track order is ``c0, b0, a0, b1, a1, ..., b_{n-1}, a_{n-1}, z`` so that each
    MAJ/UMA block touches three consecutive qubits.
    """
    _check_width(n)
    c0 = 0
    b = [1 + 2 * i for i in range(n)]
    a = [2 + 2 * i for i in range(n)]
    z = 2 * n + 1
    gates: list[Gate] = []

    def maj(x: int, y: int, w: int) -> None:
        gates.append(Gate(GateKind.CNOT, (w, y)))
        gates.append(Gate(GateKind.CNOT, (w, x)))
        gates.append(Gate(GateKind.TOFFOLI, (x, y, w)))

    def uma(x: int, y: int, w: int) -> None:
        gates.append(Gate(GateKind.TOFFOLI, (x, y, w)))
        gates.append(Gate(GateKind.CNOT, (w, x)))
        gates.append(Gate(GateKind.CNOT, (x, y)))

    prev = [c0] + a[:-1]
    for i in range(n):
        maj(prev[i], b[i], a[i])
    gates.append(Gate(GateKind.CNOT, (a[n - 1], z)))
    for i in reversed(range(n)):
        uma(prev[i], b[i], a[i])

    return Circuit(
        n_qubits=2 * n + 2,
        gates=tuple(gates),
        register_map={"a": tuple(a), "b": tuple(b), "carry_out": (z,), "ancilla": (c0,)},
        n_bits=n,
        name=f"ripple{n}",
    )


def _carry_network(n: int, p, g, anc) -> list[Gate]:
    """Propagate/generate tree that turns g[j] into the carry into bit j.

    ``p(t, m)`` is the qubit holding the propagate bit of block m at level t
    (level 0 is the per-bit propagate), ``g(j)`` the qubit holding the
    generate/carry bit for position j, ``anc(t, m)`` allocates level t >= 1.
    Gate lists are emitted round by round; P-round t+1 follows G-round t so the
    two can share a layer.
    """
    T = lambda *qs: Gate(GateKind.TOFFOLI, qs)  # noqa: E731
    logn = floor_log2(n)
    gates: list[Gate] = []

    def p_round(t: int) -> list[Gate]:
        return [T(p(t - 1, 2 * m), p(t - 1, 2 * m + 1), p(t, m)) for m in range(1, n // 2**t)]

    def g_round(t: int) -> list[Gate]:
        return [
            T(g(2**t * m + 2 ** (t - 1)), p(t - 1, 2 * m + 1), g(2**t * m + 2**t))
            for m in range(n // 2**t)
        ]

    def c_round(t: int) -> list[Gate]:
        return [
            T(g(2**t * m), p(t - 1, 2 * m), g(2**t * m + 2 ** (t - 1)))
            for m in range(1, (n - 2 ** (t - 1)) // 2**t + 1)
        ]

    for t in range(1, logn + 1):
        if t <= logn - 1:
            gates += p_round(t)
        gates += g_round(t)
    for t in range(floor_log2(2 * n / 3) if 3 <= 2 * n else 0, 0, -1):
        gates += c_round(t)
    for t in range(logn - 1, 0, -1):
        gates += p_round(t)
    return gates


def build_qcla_adder(n: int) -> Circuit:
    """In-place carry-lookahead adder.

    Carries are computed into z[1..n] by a logarithmic-depth tree, written into
    b as sum bits, and then the low carries are uncomputed by running the tree
    backwards on (a, not s), whose carries coincide with those of (a, b).
    Track order interleaves ``z_i, a_i, b_i`` per bit with tree ancillae placed
    next to the midpoint of the block they summarise.
    """
    _check_width(n)
    logn = floor_log2(n)
    anc_keys = [(t, m) for t in range(1, logn) for m in range(1, n // 2**t)]

    # track ordering: per bit group [z_i, a_i, b_i]; z_0 is unused so group 0 is [a_0, b_0]
    order: list[tuple] = []
    anc_at: dict[int, list[tuple]] = {}
    for t, m in anc_keys:
        anc_at.setdefault(2**t * m + 2 ** (t - 1) - 1, []).append(("P", t, m))
    for i in range(n):
        if i > 0:
            order.append(("z", i))
        order += [("a", i), ("b", i)]
        order += sorted(anc_at.get(i, []))
    order.append(("z", n))
    idx = {key: q for q, key in enumerate(order)}
    a = [idx["a", i] for i in range(n)]
    b = [idx["b", i] for i in range(n)]
    z = {i: idx["z", i] for i in range(1, n + 1)}

    def p(t: int, m: int) -> int:
        return b[m] if t == 0 else idx["P", t, m]

    def g(j: int) -> int:
        return z[j]

    def anc(t: int, m: int) -> int:
        return idx["P", t, m]

    C = lambda c, t: Gate(GateKind.CNOT, (c, t))  # noqa: E731
    X = lambda q: Gate(GateKind.NOT, (q,))  # noqa: E731
    T = lambda *qs: Gate(GateKind.TOFFOLI, qs)  # noqa: E731

    gates: list[Gate] = []
    gates += [T(a[i], b[i], z[i + 1]) for i in range(n)]
    gates += [C(a[i], b[i]) for i in range(n)]
    gates += _carry_network(n, p, g, anc)
    gates += [C(z[i], b[i]) for i in range(1, n)]
    gates += [X(b[i]) for i in range(n - 1)]
    gates += [C(a[i], b[i]) for i in range(1, n - 1)]
    if n - 1 >= 1:
        gates += _carry_network(n - 1, p, g, anc)[::-1]
    gates += [C(a[i], b[i]) for i in range(1, n - 1)]
    gates += [T(a[i], b[i], z[i + 1]) for i in range(n - 1)]
    gates += [X(b[i]) for i in range(n - 1)]

    ancilla = tuple(z[i] for i in range(1, n)) + tuple(idx["P", t, m] for t, m in anc_keys)
    return Circuit(
        n_qubits=len(order),
        gates=tuple(gates),
        register_map={"a": tuple(a), "b": tuple(b), "carry_out": (z[n],), "ancilla": ancilla},
        n_bits=n,
        name=f"qcla{n}",
    )


def build_adder(kind: str, n: int) -> Circuit:
    kind = kind.lower()
    if kind == "ripple":
        return build_ripple_adder(n)
    if kind == "qcla":
        return build_qcla_adder(n)
    raise ValueError(f"unknown adder kind {kind!r}")
