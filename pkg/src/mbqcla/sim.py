"""Dense state-vector simulation of measurement patterns.

Sites are allocated lazily: a site joins the state vector when it or one of
its neighbours is about to be measured, and leaves it once measured. Pauli
byproducts are never applied as gates; they are kept in a frame and folded into
later measurement angles and the final readout.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Sequence

import numpy as np

from .circuit import Gate, GateKind
from .pattern import Coord, FragmentSpec, Plane

Label = Hashable

_H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
_PLUS = np.array([1, 1], dtype=complex) / math.sqrt(2)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)

NORM_TOL = 1e-9


class SimulationError(RuntimeError):
    pass


class DimensionError(SimulationError, ValueError):
    pass


class CapacityError(SimulationError):
    pass


# ---------------------------------------------------------------------------
# state vector


@dataclass
class StateVector:
    """Amplitudes as a tensor with one axis per labelled qubit."""

    amplitudes: np.ndarray
    labels: list[Label] = field(default_factory=list)

    def __post_init__(self) -> None:
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex).reshape((2,) * len(self.labels))

    @classmethod
    def empty(cls) -> "StateVector":
        return cls(np.ones((), dtype=complex), [])

    @classmethod
    def basis(cls, bits: Sequence[int], labels: Sequence[Label] | None = None) -> "StateVector":
        labels = list(labels) if labels is not None else list(range(len(bits)))
        amp = np.zeros((2,) * len(bits), dtype=complex)
        amp[tuple(bits)] = 1.0
        return cls(amp, labels)

    @classmethod
    def from_vector(cls, vec: Sequence[complex], labels: Sequence[Label] | None = None) -> "StateVector":
        vec = np.asarray(vec, dtype=complex)
        k = int(round(math.log2(vec.size)))
        if 2**k != vec.size:
            raise DimensionError(f"length {vec.size} is not a power of two")
        return cls(vec.reshape((2,) * k), list(labels) if labels is not None else list(range(k)))

    @property
    def n_qubits(self) -> int:
        return len(self.labels)

    def vector(self, order: Sequence[Label] | None = None) -> np.ndarray:
        """Flattened amplitudes, first label most significant."""
        if order is None:
            return self.amplitudes.reshape(-1).copy()
        axes = [self.labels.index(l) for l in order]
        return np.transpose(self.amplitudes, axes).reshape(-1).copy()

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def axis(self, label: Label) -> int:
        return self.labels.index(label)

    def add(self, label: Label, single: np.ndarray = _PLUS) -> None:
        if label in self.labels:
            raise SimulationError(f"qubit {label} already present")
        self.amplitudes = np.multiply.outer(self.amplitudes, np.asarray(single, dtype=complex))
        self.labels.append(label)

    def apply_1q(self, label: Label, u: np.ndarray) -> None:
        ax = self.axis(label)
        self.amplitudes = np.moveaxis(np.tensordot(u, self.amplitudes, axes=([1], [ax])), 0, ax)

    def cz(self, a: Label, b: Label) -> None:
        ia, ib = self.axis(a), self.axis(b)
        idx: list[slice | int] = [slice(None)] * self.n_qubits
        idx[ia] = 1
        idx[ib] = 1
        self.amplitudes[tuple(idx)] *= -1

    def measure(self, label: Label, vectors: tuple[np.ndarray, np.ndarray], rng: np.random.Generator) -> int:
        """Project ``label`` onto one of two orthonormal vectors, drop it, renormalise."""
        ax = self.axis(label)
        moved = np.moveaxis(self.amplitudes, ax, 0)
        branches = [np.tensordot(v.conj(), moved, axes=([0], [0])) for v in vectors]
        p0 = float(np.vdot(branches[0], branches[0]).real)
        p1 = float(np.vdot(branches[1], branches[1]).real)
        total = p0 + p1
        outcome = int(rng.random() * total >= p0)
        post = branches[outcome]
        norm = math.sqrt(p1 if outcome else p0)
        if norm < 1e-12:
            raise SimulationError(f"zero-probability branch on {label}")
        self.amplitudes = post / norm
        del self.labels[ax]
        if abs(self.norm() - 1.0) > NORM_TOL:
            raise SimulationError("norm drifted after measurement")
        return outcome


def basis_vectors(plane: Plane, angle: float) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvectors for outcome 0 and 1."""
    if plane is Plane.X:
        plane, angle = Plane.XY, 0.0
    elif plane is Plane.Y:
        plane, angle = Plane.XY, math.pi / 2
    if plane is Plane.XY:
        ph = np.exp(1j * angle)
        return (np.array([1, ph]) / math.sqrt(2), np.array([1, -ph]) / math.sqrt(2))
    if plane is Plane.YZ:
        c, s = math.cos(angle / 2), math.sin(angle / 2)
        return (np.array([c, 1j * s]), np.array([s, -1j * c]))
    return (np.array([1, 0], dtype=complex), np.array([0, 1], dtype=complex))


# ---------------------------------------------------------------------------
# Pauli frame


@dataclass
class PauliFrame:
    """X and Z correction bits per qubit; missing entries are 0."""

    x: dict[Label, int] = field(default_factory=dict)
    z: dict[Label, int] = field(default_factory=dict)

    def flip(self, label: Label, kind: str, bit: int = 1) -> None:
        table = self.x if kind == "x" else self.z
        table[label] = table.get(label, 0) ^ (bit & 1)

    def get(self, label: Label) -> tuple[int, int]:
        return self.x.get(label, 0), self.z.get(label, 0)

    def apply(self, state: StateVector, labels: Iterable[Label]) -> None:
        """Undo the byproduct X^x Z^z on ``labels`` (X applied last by the pattern)."""
        for l in labels:
            x, z = self.get(l)
            if x:
                state.apply_1q(l, _X)
            if z:
                state.apply_1q(l, _Z)


# ---------------------------------------------------------------------------
# fragments


@dataclass
class FragmentRun:
    output: StateVector
    frame: PauliFrame
    outcomes: dict[Coord, int]
    # effective angle actually used at every adaptive site
    angles: dict[Coord, float]
    # longest chain of adaptive measurements, plus the Pauli round
    rounds: int


def _effective(plane: Plane, xz: tuple[int, int], raw: int) -> int:
    x, z = xz
    if plane in (Plane.XY, Plane.X, Plane.Y):
        return raw ^ z
    return raw ^ x


def _sign_bit(plane: Plane, xz: tuple[int, int]) -> int:
    x, z = xz
    return x if plane in (Plane.XY, Plane.X, Plane.Y) else z


def simulate_fragment(
    f: FragmentSpec,
    state: StateVector,
    seed: int | np.random.Generator = 0,
    frame_in: PauliFrame | None = None,
    ports: Sequence[Label] | None = None,
    angle_override: dict[Coord, float] | None = None,
) -> tuple[StateVector, PauliFrame, FragmentRun]:
    """Run fragment ``f`` on the qubits ``ports`` of ``state``.

    ``ports`` name the qubits of ``state`` entering the operand ports, in port
    order (default: the first ``arity`` labels). The returned state has those
    labels replaced by the fragment's output qubits, under the same names;
    the returned frame holds their byproducts. ``frame_in`` is the incoming
    byproduct on the port qubits.
    """
    ports = list(ports) if ports is not None else list(state.labels[: f.arity])
    if len(ports) != f.arity or any(p not in state.labels for p in ports):
        raise DimensionError(f"{f.gate_kind.value} fragment needs {f.arity} input qubits, got {ports}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    frame_in = frame_in or PauliFrame()
    angle_override = angle_override or {}

    # relabel the port qubits to fragment coordinates
    rename = {p: ("site", c) for p, c in zip(ports, f.input_ports)}
    state.labels = [rename.get(l, l) for l in state.labels]
    nb = f.neighbours
    alive: set[Coord] = set(f.input_ports)
    applied: set[frozenset] = set()

    def ensure(site: Coord) -> None:
        for v in (site, *nb[site]):
            if v not in alive:
                state.add(("site", v))
                alive.add(v)
        for v in nb[site]:
            e = frozenset((site, v))
            if e not in applied:
                state.cz(("site", site), ("site", v))
                applied.add(e)

    # frame of every fragment site, seeded with the incoming byproducts
    fx: dict[Coord, int] = {}
    fz: dict[Coord, int] = {}
    for p, c in zip(ports, f.input_ports):
        x, z = frame_in.get(p)
        fx[c] = x
        fz[c] = z
        # the byproduct was produced before the port was entangled with its neighbours
        for v in nb[c]:
            fz[v] = fz.get(v, 0) ^ x

    raw: dict[Coord, int] = {}
    eff: dict[Coord, int] = {}
    angles: dict[Coord, float] = {}
    chain: dict[Coord, int] = {}

    # symbolic dependency depth: every frame bit carries the max chain length of
    # the adaptive outcomes it depends on
    dx: dict[Coord, int] = {}
    dz: dict[Coord, int] = {}

    def measure(site: Coord, angle: float) -> int:
        ensure(site)
        spec = f.sites[site]
        plane, _ = spec.basis.canonical
        return state.measure(("site", site), basis_vectors(plane, angle), rng)

    order = f.order
    # round 1: every non-adaptive site, basis fixed in advance
    for s in order:
        b = f.sites[s].basis
        if not b.adaptive:
            plane, a = b.canonical
            raw[s] = measure(s, angle_override.get(s, a))
    # then walk the flow, measuring adaptive sites as their frames become known
    for s in order:
        b = f.sites[s].basis
        plane, a = b.canonical
        a = angle_override.get(s, a)
        xz = (fx.get(s, 0), fz.get(s, 0))
        dep = (dx.get(s, 0), dz.get(s, 0))
        if b.adaptive:
            sign = _sign_bit(plane, xz)
            used = -a if sign else a
            angles[s] = used
            raw[s] = measure(s, used)
            chain[s] = 1 + _sign_bit(plane, dep)
        else:
            chain[s] = 0
        eff[s] = _effective(plane, xz, raw[s])
        depth = max(chain[s], _effective_dep(plane, dep))
        if not b.adaptive and _is_odd_quarter(a):
            # a Y-type basis measured at +a where -a was due: same basis, swapped outcome
            eff[s] ^= _sign_bit(plane, xz)
            depth = max(depth, _sign_bit(plane, dep))
        corr = f.byproduct_rule.get(s)
        if corr is None:
            continue
        for t in corr.x:
            fx[t] = fx.get(t, 0) ^ eff[s]
            dx[t] = max(dx.get(t, 0), depth)
        for t in corr.z:
            fz[t] = fz.get(t, 0) ^ eff[s]
            dz[t] = max(dz.get(t, 0), depth)

    # every ghost must be alive (it may have no measured neighbour in a degenerate fragment)
    for g in f.ghosts:
        if g not in alive:
            state.add(("site", g))
            alive.add(g)
    back = {("site", g): p for g, p in zip(f.ghosts, ports)}
    state.labels = [back.get(l, l) for l in state.labels]
    frame_out = PauliFrame()
    for g, p in zip(f.ghosts, ports):
        frame_out.x[p] = fx.get(g, 0)
        frame_out.z[p] = fz.get(g, 0)
    rounds = 1 + max(chain.values(), default=0)
    run = FragmentRun(state, frame_out, raw, angles, rounds)
    return state, frame_out, run


def _is_odd_quarter(angle: float) -> bool:
    q = angle / (math.pi / 2)
    return abs(q - round(q)) < 1e-12 and round(q) % 2 == 1


def _effective_dep(plane: Plane, dep: tuple[int, int]) -> int:
    dxv, dzv = dep
    return dzv if plane in (Plane.XY, Plane.X, Plane.Y) else dxv


# ---------------------------------------------------------------------------
# reference unitaries


def gate_unitary(kind: GateKind) -> np.ndarray:
    """Unitary of a gate on its operands; operand 0 is the most significant bit."""
    kind = GateKind(kind)
    if kind is GateKind.WIRE:
        return np.eye(2, dtype=complex)
    if kind is GateKind.NOT:
        return _X.copy()
    if kind is GateKind.CNOT:
        u = np.eye(4, dtype=complex)
        u[[2, 3]] = u[[3, 2]]
        return u
    if kind is GateKind.SWAP:
        u = np.eye(4, dtype=complex)
        u[[1, 2]] = u[[2, 1]]
        return u
    if kind is GateKind.TOFFOLI:
        u = np.eye(8, dtype=complex)
        u[[6, 7]] = u[[7, 6]]
        return u
    u = np.eye(8, dtype=complex)
    u[7, 7] = -1
    return u


@dataclass(frozen=True)
class EquivalenceResult:
    passed: bool
    max_deviation: float
    rounds: int
    expected_rounds: int
    detail: str = ""


def _phase_aligned_deviation(actual: np.ndarray, expected: np.ndarray) -> float:
    overlap = np.vdot(expected, actual)
    if abs(overlap) < 1e-12:
        return float(np.max(np.abs(actual - expected)) + 1.0)
    phase = overlap / abs(overlap)
    return float(np.max(np.abs(actual - phase * expected)))


def fragment_equivalence(
    f: FragmentSpec,
    gate: Gate,
    tol: float = 1e-9,
    seeds: Iterable[int] = range(8),
) -> EquivalenceResult:
    """Compare a fragment with its gate on the Choi state, i.e. on all inputs at once.

    Each operand is maximally entangled with a reference qubit, which covers the
    computational and the diagonal bases simultaneously. After the frame is
    undone the output must equal (gate x I)|Choi> up to a global phase, for
    every seed. Clifford fragments must finish in one round and Toffoli-type
    fragments in exactly two.
    """
    k = gate.kind.arity
    if f.arity != k:
        return EquivalenceResult(False, math.inf, 0, 0, f"arity {f.arity} != {k}")
    u = gate_unitary(gate.kind)
    dim = 2**k
    choi = np.eye(dim, dtype=complex).reshape(-1) / math.sqrt(dim)  # |i>_ref |i>_op
    expected = np.kron(np.eye(dim), u) @ choi
    refs = [("ref", i) for i in range(k)]
    ops = [("op", i) for i in range(k)]
    expected_rounds = 2 if gate.kind.is_toffoli else 1
    worst = 0.0
    rounds = 0
    for seed in seeds:
        state = StateVector.from_vector(choi, refs + ops)
        try:
            state, frame, run = simulate_fragment(f, state, seed, ports=ops)
        except SimulationError as exc:
            return EquivalenceResult(False, math.inf, 0, expected_rounds, str(exc))
        frame.apply(state, ops)
        worst = max(worst, _phase_aligned_deviation(state.vector(refs + ops), expected))
        rounds = max(rounds, run.rounds)
    ok = worst < tol and rounds == expected_rounds
    detail = "" if ok else f"deviation {worst:.3g}, rounds {rounds} (expected {expected_rounds})"
    return EquivalenceResult(ok, worst, rounds, expected_rounds, detail)


# ---------------------------------------------------------------------------
# whole layouts


MAX_SIM_BITS = 8  # about 3 s per run for the unoptimised n=8 QCLA


@dataclass(frozen=True)
class SiteRecord:
    coord: Coord
    round: int
    plane: str
    angle: float
    outcome: int


@dataclass(frozen=True)
class SimOutcome:
    sum: int
    a: int
    b: int
    seed: int
    rounds_executed: int
    outcomes: tuple[SiteRecord, ...] = ()
    # logical value of every circuit qubit at readout
    final_bits: tuple[int, ...] = ()

    def outcome_bits(self) -> tuple[int, ...]:
        return tuple(r.outcome for r in self.outcomes)

    def to_dict(self) -> dict:
        return {
            "sum": self.sum,
            "a": self.a,
            "b": self.b,
            "seed": self.seed,
            "rounds_executed": self.rounds_executed,
            "final_bits": list(self.final_bits),
            "outcomes": [
                {"coord": list(r.coord), "round": r.round, "plane": r.plane, "angle": r.angle, "outcome": r.outcome}
                for r in self.outcomes
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)

    @classmethod
    def from_dict(cls, d: dict) -> "SimOutcome":
        recs = tuple(
            SiteRecord(tuple(r["coord"]), r["round"], r["plane"], r["angle"], r["outcome"]) for r in d["outcomes"]
        )
        return cls(d["sum"], d["a"], d["b"], d["seed"], d["rounds_executed"], recs, tuple(d.get("final_bits", ())))

    @classmethod
    def from_json(cls, text: str) -> "SimOutcome":
        return cls.from_dict(json.loads(text))


def simulate_pattern(layout, a: int, b: int, seed: int = 0) -> SimOutcome:
    """Execute a placed layout fragment by fragment on basis-state inputs.

    Logical qubits stay in product basis states throughout (all gates are
    classical permutations up to the tracked frame), so only the operands of
    the fragment being executed are ever simulated together. Every fragment
    input must sit on the ghost site of the previous fragment on its track;
    a broken teleportation chain is a :class:`SimulationError`.
    """
    from .circuit import initial_bits

    circuit = layout.circuit
    if circuit.n_bits > MAX_SIM_BITS:
        raise CapacityError(
            f"simulate_pattern supports adders up to n={MAX_SIM_BITS}; got n={circuit.n_bits}"
        )
    bits = list(initial_bits(circuit, a, b))
    frame = PauliFrame()
    rng = np.random.default_rng(seed)
    # per logical qubit: global coordinate where its state currently lives
    at: dict[int, Coord] = {q: layout.entry_site(q) for q in range(circuit.n_qubits)}
    records: list[SiteRecord] = []
    max_round = 1 if layout.placed else 0
    for inst in layout.execution_order():
        qubits = inst.qubits
        for q, port in zip(qubits, inst.spec.input_ports):
            site = layout.to_global(inst, port)
            if at[q] != site:
                raise SimulationError(
                    f"fragment {inst.id} expects qubit {q} at {site}, but it was teleported to {at[q]}"
                )
        labels = list(range(len(qubits)))
        state = StateVector.basis([bits[q] for q in qubits], labels)
        fin = PauliFrame({i: frame.x.get(q, 0) for i, q in enumerate(qubits)},
                         {i: frame.z.get(q, 0) for i, q in enumerate(qubits)})
        # the physical input carries the incoming byproduct
        fin.apply(state, labels)
        state, fout, run = simulate_fragment(inst.spec, state, rng, frame_in=fin, ports=labels)
        # undo X on a copy to read the logical basis state; Z only adds a phase
        probe = StateVector(state.amplitudes.copy(), list(state.labels))
        for i in labels:
            if fout.x.get(i, 0):
                probe.apply_1q(i, _X)
        vec = probe.vector(labels)
        idx = int(np.argmax(np.abs(vec)))
        if abs(abs(vec[idx]) - 1.0) > 1e-6:
            raise SimulationError(f"fragment {inst.id} left its operands in a superposition")
        out_bits = [(idx >> (len(labels) - 1 - i)) & 1 for i in labels]
        for i, (q, g) in enumerate(zip(inst.output_qubits, inst.spec.ghosts)):
            bits[q] = out_bits[i]
            frame.x[q] = fout.x.get(i, 0)
            frame.z[q] = fout.z.get(i, 0)
            at[q] = layout.to_global(inst, g)
        base_round = layout.round_offset(inst)
        for s in inst.spec.order:
            site = inst.spec.sites[s]
            rnd = base_round + site.round
            max_round = max(max_round, rnd)
            records.append(
                SiteRecord(
                    layout.to_global(inst, s),
                    rnd,
                    site.basis.plane.value,
                    run.angles.get(s, site.basis.angle),
                    run.outcomes[s],
                )
            )
    for q in range(circuit.n_qubits):
        if at[q] != layout.exit_site(q):
            raise SimulationError(f"qubit {q} ends at {at[q]}, not at its readout site {layout.exit_site(q)}")
    from .circuit import read_register

    total = read_register(bits, circuit.sum_reg)
    return SimOutcome(total, a, b, seed, max_round, tuple(records), tuple(bits))
