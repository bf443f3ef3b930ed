"""Measurement-pattern fragments, the gate catalog, and circuit compilation.

A fragment is a small open graph state laid out on the square lattice. Every
logical operand enters on the left edge (column 0) and leaves through the
right edge: the last measured site of its path teleports the state onto the
site just beyond the fragment, which is the input site of whatever comes next.
That site is called the *ghost* of the output port and is addressed as
``(row, width)`` in byproduct rules.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping

from .circuit import Circuit, Gate, GateKind, toffoli_layers

Coord = tuple[int, int]


class Plane(str, enum.Enum):
    XY = "XY"
    YZ = "YZ"
    X = "X"
    Y = "Y"
    Z = "Z"


class Classification(str, enum.Enum):
    COMPUTATIONAL = "computational"
    COMMUNICATION = "communication"


TAXONOMY = {
    GateKind.NOT: Classification.COMPUTATIONAL,
    GateKind.CNOT: Classification.COMPUTATIONAL,
    GateKind.TOFFOLI: Classification.COMPUTATIONAL,
    GateKind.TOFFOLI_PHASE: Classification.COMPUTATIONAL,
    GateKind.SWAP: Classification.COMMUNICATION,
    GateKind.WIRE: Classification.COMMUNICATION,
}


class CatalogError(ValueError):
    pass


class CatalogParseError(CatalogError):
    pass


class MissingEntryError(CatalogError):
    pass


class PortBoundaryError(CatalogError):
    pass


class AdjacencyError(CatalogError):
    pass


class UnverifiedCatalogError(CatalogError):
    pass


class RoutingError(RuntimeError):
    pass


def is_pauli_angle(angle: float) -> bool:
    """True when the angle is a multiple of pi/2, i.e. the basis is X or Y (or Z/Y for YZ)."""
    q = angle / (math.pi / 2)
    return abs(q - round(q)) < 1e-12


@dataclass(frozen=True)
class MeasurementBasis:
    plane: Plane
    angle: float = 0.0
    adaptive: bool = False
    # earlier sites whose outcome parity flips the sign of the angle
    dependency: tuple[Coord, ...] = ()
    # incoming frame bits (operand index, "x"/"z") that also flip it
    input_dependency: tuple[tuple[int, str], ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "plane", Plane(self.plane))
        if not math.isfinite(self.angle):
            raise CatalogError("measurement angle must be finite")
        if self.adaptive and not (self.dependency or self.input_dependency):
            raise CatalogError("adaptive basis without a dependency")

    @property
    def canonical(self) -> tuple[Plane, float]:
        """Reduce the aliases X and Y to the XY plane."""
        if self.plane is Plane.X:
            return Plane.XY, 0.0
        if self.plane is Plane.Y:
            return Plane.XY, math.pi / 2
        return self.plane, self.angle


@dataclass(frozen=True)
class SiteSpec:
    basis: MeasurementBasis
    round: int = 1


@dataclass(frozen=True)
class Correction:
    x: tuple[Coord, ...] = ()
    z: tuple[Coord, ...] = ()


@dataclass(frozen=True, eq=False)
class FragmentSpec:
    gate_kind: GateKind
    height: int
    width: int
    sites: Mapping[Coord, SiteSpec]
    input_ports: tuple[Coord, ...]
    output_ports: tuple[Coord, ...]
    edges: tuple[tuple[Coord, Coord], ...]
    classification: Classification
    byproduct_rule: Mapping[Coord, Correction]
    reflected: bool = False

    @property
    def arity(self) -> int:
        return len(self.input_ports)

    @property
    def n_sites(self) -> int:
        return len(self.sites)

    @cached_property
    def ghosts(self) -> tuple[Coord, ...]:
        return tuple((r, self.width) for r, _ in self.output_ports)

    @cached_property
    def neighbours(self) -> dict[Coord, tuple[Coord, ...]]:
        nb: dict[Coord, list[Coord]] = {s: [] for s in self.sites}
        for g in self.ghosts:
            nb[g] = []
        for u, v in self.all_edges:
            nb[u].append(v)
            nb[v].append(u)
        return {k: tuple(sorted(v)) for k, v in nb.items()}

    @cached_property
    def all_edges(self) -> tuple[tuple[Coord, Coord], ...]:
        """Internal edges plus the links from output ports to their ghosts."""
        links = tuple((p, g) for p, g in zip(self.output_ports, self.ghosts))
        return self.edges + links

    @cached_property
    def order(self) -> tuple[Coord, ...]:
        """Measurement order: every site before the sites its outcome corrects."""
        succ: dict[Coord, set[Coord]] = {s: set() for s in self.sites}
        indeg = {s: 0 for s in self.sites}
        for s, corr in self.byproduct_rule.items():
            for t in set(corr.x) | set(corr.z):
                if t in self.sites and t not in succ[s]:
                    succ[s].add(t)
                    indeg[t] += 1
        ready = sorted((s for s in self.sites if indeg[s] == 0), key=lambda s: (s[1], s[0]))
        out: list[Coord] = []
        while ready:
            s = ready.pop(0)
            out.append(s)
            for t in succ[s]:
                indeg[t] -= 1
                if indeg[t] == 0:
                    ready.append(t)
            ready.sort(key=lambda s: (s[1], s[0]))
        if len(out) != len(self.sites):
            raise CatalogError(f"{self.gate_kind.value}: byproduct rules are cyclic")
        return tuple(out)

    @property
    def rounds(self) -> int:
        return max((s.round for s in self.sites.values()), default=1)

    def port_tracks(self) -> tuple[int, ...]:
        """Track offset (0 = top track of the fragment) of each operand."""
        return tuple(r // 2 for r, _ in self.input_ports)

    @property
    def n_tracks(self) -> int:
        return (self.height + 1) // 2

    def reflect(self) -> "FragmentSpec":
        """Mirror top-to-bottom. Operand order is kept, so ports swap tracks."""
        h = self.height
        f = lambda c: (h - 1 - c[0], c[1])  # noqa: E731
        sites = {
            f(k): SiteSpec(
                MeasurementBasis(
                    v.basis.plane,
                    v.basis.angle,
                    v.basis.adaptive,
                    tuple(f(d) for d in v.basis.dependency),
                    v.basis.input_dependency,
                ),
                v.round,
            )
            for k, v in self.sites.items()
        }
        rule = {f(k): Correction(tuple(map(f, c.x)), tuple(map(f, c.z))) for k, c in self.byproduct_rule.items()}
        return FragmentSpec(
            self.gate_kind,
            h,
            self.width,
            sites,
            tuple(map(f, self.input_ports)),
            tuple(map(f, self.output_ports)),
            tuple((f(u), f(v)) for u, v in self.edges),
            self.classification,
            rule,
            reflected=not self.reflected,
        )

    # -- structural validation -------------------------------------------------

    def validate(self) -> None:
        kind = self.gate_kind.value
        if len(self.input_ports) != self.gate_kind.arity or len(self.output_ports) != self.gate_kind.arity:
            raise PortBoundaryError(f"{kind}: needs one input and one output port per operand")
        for r, c in self.input_ports:
            if c != 0 or not 0 <= r < self.height or (r, c) not in self.sites:
                raise PortBoundaryError(f"{kind}: input port {(r, c)} is not an occupied left-edge site")
        for r, c in self.output_ports:
            if c != self.width - 1 or not 0 <= r < self.height or (r, c) not in self.sites:
                raise PortBoundaryError(f"{kind}: output port {(r, c)} is not an occupied right-edge site")
        for (r, c) in self.sites:
            if not (0 <= r < self.height and 0 <= c < self.width):
                raise CatalogError(f"{kind}: site {(r, c)} outside {self.height}x{self.width}")
        seen = set()
        for u, v in self.edges:
            if u not in self.sites or v not in self.sites:
                raise AdjacencyError(f"{kind}: edge {u}-{v} touches an unoccupied site")
            if abs(u[0] - v[0]) + abs(u[1] - v[1]) != 1:
                raise AdjacencyError(f"{kind}: edge {u}-{v} joins non-adjacent sites")
            key = frozenset((u, v))
            if key in seen:
                raise AdjacencyError(f"{kind}: duplicate edge {u}-{v}")
            seen.add(key)
        if self.classification is not TAXONOMY[self.gate_kind]:
            raise CatalogError(f"{kind}: classification must be {TAXONOMY[self.gate_kind].value}")
        if not self.gate_kind.is_toffoli and any(s.round != 1 for s in self.sites.values()):
            raise CatalogError(f"{kind}: round-2 sites are only allowed in Toffoli-type fragments")
        for s, spec in self.sites.items():
            if spec.round not in (1, 2):
                raise CatalogError(f"{kind}: site {s} has round {spec.round}")
            if not spec.basis.adaptive and spec.round != 1:
                raise CatalogError(f"{kind}: non-adaptive site {s} must be in round 1")
        valid_targets = set(self.sites) | set(self.ghosts)
        for s, corr in self.byproduct_rule.items():
            if s not in self.sites:
                raise CatalogError(f"{kind}: byproduct rule for unoccupied site {s}")
            for t in corr.x + corr.z:
                if t not in valid_targets:
                    raise CatalogError(f"{kind}: byproduct of {s} targets {t}, which is not a site or ghost")
        _ = self.order

    # -- JSON ------------------------------------------------------------------

    def to_dict(self) -> dict:
        grid = []
        for r in range(self.height):
            row = []
            for c in range(self.width):
                site = self.sites.get((r, c))
                if site is None:
                    row.append({"occupied": False})
                    continue
                b = site.basis
                cell = {"occupied": True, "plane": b.plane.value, "angle": b.angle, "round": site.round}
                if b.adaptive:
                    cell["adaptive"] = True
                    cell["dependency"] = [list(d) for d in b.dependency]
                    if b.input_dependency:
                        cell["input_dependency"] = [list(d) for d in b.input_dependency]
                row.append(cell)
            grid.append(row)
        return {
            "gate_kind": self.gate_kind.value,
            "height": self.height,
            "width": self.width,
            "classification": self.classification.value,
            "input_ports": [list(p) for p in self.input_ports],
            "output_ports": [list(p) for p in self.output_ports],
            "sites": grid,
            "edges": [[list(u), list(v)] for u, v in self.edges],
            "byproduct_rule": [
                {"site": list(s), "x": [list(t) for t in c.x], "z": [list(t) for t in c.z]}
                for s, c in sorted(self.byproduct_rule.items())
            ],
        }

    @classmethod
    def from_dict(cls, d: dict, where: str = "fragment") -> "FragmentSpec":
        try:
            kind = GateKind(d["gate_kind"])
            height, width = int(d["height"]), int(d["width"])
            grid = d["sites"]
            if len(grid) != height or any(len(row) != width for row in grid):
                raise CatalogParseError(f"{where}.sites: grid is not {height}x{width}")
            sites = {}
            for r, row in enumerate(grid):
                for c, cell in enumerate(row):
                    if not cell.get("occupied", False):
                        continue
                    basis = MeasurementBasis(
                        Plane(cell["plane"]),
                        float(cell.get("angle", 0.0)),
                        bool(cell.get("adaptive", False)),
                        tuple(tuple(x) for x in cell.get("dependency", [])),
                        tuple((int(k), str(p)) for k, p in cell.get("input_dependency", [])),
                    )
                    sites[(r, c)] = SiteSpec(basis, int(cell.get("round", 1)))
            rule = {
                tuple(e["site"]): Correction(tuple(tuple(t) for t in e["x"]), tuple(tuple(t) for t in e["z"]))
                for e in d.get("byproduct_rule", [])
            }
            return cls(
                gate_kind=kind,
                height=height,
                width=width,
                sites=sites,
                input_ports=tuple(tuple(p) for p in d["input_ports"]),
                output_ports=tuple(tuple(p) for p in d["output_ports"]),
                edges=tuple((tuple(u), tuple(v)) for u, v in d["edges"]),
                classification=Classification(d["classification"]),
                byproduct_rule=rule,
            )
        except KeyError as exc:
            raise CatalogParseError(f"{where}: missing field {exc.args[0]!r}") from None
        except (TypeError, ValueError) as exc:
            if isinstance(exc, CatalogError):
                raise
            raise CatalogParseError(f"{where}: {exc}") from None


@dataclass(frozen=True, eq=False)
class GateCatalog:
    entries: Mapping[GateKind, FragmentSpec]
    wire_unit: FragmentSpec
    name: str = ""
    note: str = ""
    verified: bool = False

    def __getitem__(self, kind: GateKind) -> FragmentSpec:
        return self.entries[GateKind(kind)]

    @cached_property
    def reflected(self) -> dict[GateKind, FragmentSpec]:
        return {k: f.reflect() for k, f in self.entries.items()}

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "note": self.note,
            "wire_unit": self.wire_unit.to_dict(),
            "entries": {k.value: f.to_dict() for k, f in self.entries.items()},
        }

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=1)


def _parse_catalog(data: dict) -> GateCatalog:
    if not isinstance(data, dict) or "entries" not in data:
        raise CatalogParseError("catalog: top-level object with an 'entries' field expected")
    entries = {}
    for key, d in data["entries"].items():
        try:
            kind = GateKind(key)
        except ValueError:
            raise CatalogParseError(f"catalog.entries: unknown gate kind {key!r}") from None
        frag = FragmentSpec.from_dict(d, where=f"entries.{key}")
        if frag.gate_kind is not kind:
            raise CatalogParseError(f"entries.{key}: gate_kind says {frag.gate_kind.value}")
        frag.validate()
        entries[kind] = frag
    missing = [k.value for k in GateKind if k not in entries]
    if missing:
        raise MissingEntryError(f"catalog has no entry for {', '.join(missing)}")
    if "wire_unit" not in data:
        raise MissingEntryError("catalog has no wire_unit")
    wire = FragmentSpec.from_dict(data["wire_unit"], where="wire_unit")
    wire.validate()
    if wire.gate_kind is not GateKind.WIRE:
        raise CatalogParseError("wire_unit must be a WIRE fragment")
    return GateCatalog(entries, wire, data.get("name", ""), data.get("note", ""))


def load_catalog(source: str | Path = "default") -> GateCatalog:
    """Load a catalog from ``"default"``, a file path, or inline JSON text."""
    if isinstance(source, Path):
        text = source.read_text()
    elif source == "default":
        text = resources.files("mbqcla.data").joinpath("default_catalog.json").read_text()
    elif source.lstrip().startswith("{"):
        text = source
    else:
        text = Path(source).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CatalogParseError(f"line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return _parse_catalog(data)


# ---------------------------------------------------------------------------
# semantic verification


@dataclass(frozen=True)
class EntryVerification:
    kind: GateKind
    passed: bool
    max_deviation: float
    rounds: int
    expected_rounds: int
    detail: str = ""

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "passed": self.passed,
            "max_deviation": self.max_deviation,
            "rounds": self.rounds,
            "expected_rounds": self.expected_rounds,
            "detail": self.detail,
        }


@dataclass(frozen=True)
class VerificationReport:
    entries: tuple[EntryVerification, ...]
    wire_unit: EntryVerification | None = None

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.entries) and (self.wire_unit is None or self.wire_unit.passed)

    def __getitem__(self, kind: GateKind) -> EntryVerification:
        for e in self.entries:
            if e.kind is GateKind(kind):
                return e
        raise KeyError(kind)

    @property
    def max_deviation(self) -> float:
        return max((e.max_deviation for e in self.entries), default=0.0)

    def to_dict(self) -> dict:
        out = {"passed": self.passed, "entries": [e.to_dict() for e in self.entries]}
        if self.wire_unit is not None:
            out["wire_unit"] = self.wire_unit.to_dict()
        return out


def verify_catalog(cat: GateCatalog, tol: float = 1e-9, seeds: Iterable[int] = range(8)) -> VerificationReport:
    """Check every entry (and its mirror image, which compile also uses) by simulation."""
    from .sim import fragment_equivalence

    seeds = tuple(seeds)

    def check(kind: GateKind, frags: Iterable[FragmentSpec]) -> EntryVerification:
        gate = Gate(kind, tuple(range(kind.arity)))
        res = [fragment_equivalence(f, gate, tol=tol, seeds=seeds) for f in frags]
        worst = max(res, key=lambda r: (not r.passed, r.max_deviation))
        return EntryVerification(
            kind, all(r.passed for r in res), worst.max_deviation, worst.rounds, worst.expected_rounds, worst.detail
        )

    entries = tuple(check(k, (cat.entries[k], cat.reflected[k])) for k in GateKind)
    wire = check(GateKind.WIRE, (cat.wire_unit,))
    report = VerificationReport(entries, wire)
    if report.passed:
        object.__setattr__(cat, "verified", True)
    return report


# ---------------------------------------------------------------------------
# compilation


@dataclass(frozen=True)
class FragmentInstance:
    """One fragment placed on consecutive tracks starting at ``track``."""

    id: int
    spec: FragmentSpec
    track: int
    column: int
    # logical qubit carried by each operand port, in port order
    qubits: tuple[int, ...]
    gate_index: int | None = None  # source gate; None for routing SWAPs and wires
    toffoli_level: int = 0

    @property
    def kind(self) -> GateKind:
        return self.spec.gate_kind

    @property
    def tracks(self) -> range:
        return range(self.track, self.track + self.spec.n_tracks)

    @property
    def end(self) -> int:
        return self.column + self.spec.width

    @property
    def is_routing(self) -> bool:
        return self.gate_index is None and self.kind is GateKind.SWAP

    @property
    def output_qubits(self) -> tuple[int, ...]:
        """Logical qubit leaving through each output port.

        A routing SWAP moves the qubits themselves to the other track; every
        other fragment (including a circuit SWAP, which exchanges values)
        keeps each qubit on its own port.
        """
        return self.qubits[::-1] if self.is_routing else self.qubits

    def port_track(self, operand: int) -> int:
        return self.track + self.spec.input_ports[operand][0] // 2

    def moved(self, column: int) -> "FragmentInstance":
        return FragmentInstance(
            self.id, self.spec, self.track, column, self.qubits, self.gate_index, self.toffoli_level
        )


@dataclass(frozen=True)
class WireRun:
    """``units`` consecutive wire units on one track, starting at ``column``."""

    track: int
    column: int
    units: int

    def end(self, unit_width: int) -> int:
        return self.column + self.units * unit_width


@dataclass(frozen=True)
class PatternProgram:
    circuit: Circuit
    catalog: GateCatalog
    # gate fragments and routing SWAPs in execution order
    instances: tuple[FragmentInstance, ...]
    wire_runs: tuple[WireRun, ...]
    n_tracks: int
    width: int
    # logical qubit -> track before the first and after the last instance
    initial_tracks: tuple[int, ...]
    final_tracks: tuple[int, ...]

    @property
    def gate_fragments(self) -> tuple[FragmentInstance, ...]:
        return tuple(i for i in self.instances if i.gate_index is not None)

    @property
    def wire_units(self) -> int:
        return sum(r.units for r in self.wire_runs)

    @property
    def routing_swaps(self) -> int:
        return sum(1 for i in self.instances if i.kind is GateKind.SWAP and i.gate_index is None)

    def fragment_multiset(self) -> dict[GateKind, int]:
        out: dict[GateKind, int] = {}
        for i in self.gate_fragments:
            out[i.kind] = out.get(i.kind, 0) + 1
        return out

    def adaptive_dependencies(self) -> list[tuple[int, int]]:
        """Pairs (earlier, later) of Toffoli-type instance ids on consecutive levels."""
        by_level: dict[int, list[int]] = {}
        for i in self.instances:
            if i.kind.is_toffoli:
                by_level.setdefault(i.toffoli_level, []).append(i.id)
        levels = sorted(by_level)
        return [(a, b) for lo, hi in zip(levels, levels[1:]) for a in by_level[lo] for b in by_level[hi]]


def _route(gate: Gate, pos: list[int], where: list[int]) -> tuple[list[int], tuple[int, ...], bool]:
    """Plan adjacent SWAPs that bring the operands of ``gate`` onto consecutive tracks.

    Returns the upper track of each SWAP in execution order, the operands in
    fragment port order, and whether the mirrored fragment is needed.
    ``pos`` (qubit -> track) and ``where`` (track -> qubit) are updated in place.
    """
    swaps: list[int] = []

    def swap(t: int) -> None:
        qa, qb = where[t], where[t + 1]
        where[t], where[t + 1] = qb, qa
        pos[qa], pos[qb] = t + 1, t
        swaps.append(t)

    ops = gate.operands
    if len(ops) == 1:
        return swaps, ops, False
    ordered = sorted(ops, key=lambda q: pos[q])
    if len(ordered) == 2:
        top, bot = ordered
        while pos[bot] > pos[top] + 1:
            swap(pos[bot] - 1)
    else:
        top, mid, bot = ordered
        while pos[top] < pos[mid] - 1:
            swap(pos[top])
        while pos[bot] > pos[mid] + 1:
            swap(pos[bot] - 1)
    stack = tuple(sorted(ops, key=lambda q: pos[q]))
    if gate.kind in (GateKind.SWAP, GateKind.TOFFOLI_PHASE):
        return swaps, stack, False
    if gate.kind is GateKind.CNOT:
        return swaps, ops, stack != ops
    # Toffoli: controls are interchangeable, the target must sit on an outer track
    tgt = ops[-1]
    if stack[1] == tgt:
        swap(pos[tgt])
        stack = tuple(sorted(ops, key=lambda q: pos[q]))
    if stack[-1] == tgt:
        return swaps, stack, False
    return swaps, stack[::-1], True


def _undo(swaps: list[int], pos: list[int], where: list[int]) -> None:
    for t in reversed(swaps):
        qa, qb = where[t], where[t + 1]
        where[t], where[t + 1] = qb, qa
        pos[qa], pos[qb] = t + 1, t


def compile(c: Circuit, cat: GateCatalog, *, require_verified: bool = True) -> PatternProgram:
    """Map every gate to a fragment and lay the program out column by column.

    Operands that are not on consecutive tracks are brought together with
    adjacent SWAP fragments, which are undone right after the gate. Fragments
    are grouped into time slices (one slice after the last slice that used any
    of their tracks); a slice is as wide as its widest fragment and every idle
    stretch of every track is filled with wire units. This is the unoptimised
    direct mapping.
    """
    if require_verified and not cat.verified:
        raise UnverifiedCatalogError("catalog has not passed verify_catalog")
    n = c.n_qubits
    pos = list(range(n))
    where = list(range(n))
    levels = toffoli_layers(c)

    # (spec, top track, qubits in port order, gate index, toffoli level)
    steps: list[tuple[FragmentSpec, int, tuple[int, ...], int | None, int]] = []
    for gi, g in enumerate(c.gates):
        swaps, qubits, mirror = _route(g, pos, where)
        for t in swaps:
            steps.append((cat[GateKind.SWAP], t, (), None, 0))
        spec = cat.reflected[g.kind] if mirror else cat[g.kind]
        top = min(pos[q] for q in g.operands)
        steps.append((spec, top, qubits, gi, levels[gi] if g.kind.is_toffoli else 0))
        for t in reversed(swaps):
            steps.append((cat[GateKind.SWAP], t, (), None, 0))
        _undo(swaps, pos, where)

    busy = [0] * n  # first free slice on each track
    slice_of: list[int] = []
    widths: list[int] = []
    for spec, top, *_ in steps:
        tr = range(top, top + spec.n_tracks)
        s = max(busy[t] for t in tr)
        if s == len(widths):
            widths.append(0)
        widths[s] = max(widths[s], spec.width)
        slice_of.append(s)
        for t in tr:
            busy[t] = s + 1
    starts = [0]
    for w in widths:
        starts.append(starts[-1] + w)

    instances: list[FragmentInstance] = []
    where = list(range(n))
    for si, (spec, top, qubits, gi, lvl) in enumerate(steps):
        if spec.gate_kind is GateKind.SWAP and gi is None:
            qubits = (where[top], where[top + 1])
            where[top], where[top + 1] = where[top + 1], where[top]
        instances.append(FragmentInstance(si, spec, top, starts[slice_of[si]], tuple(qubits), gi, lvl))
    runs = fill_wires(instances, cat.wire_unit.width, n, starts[-1])
    return PatternProgram(
        circuit=c,
        catalog=cat,
        instances=tuple(instances),
        wire_runs=tuple(runs),
        n_tracks=n,
        width=starts[-1],
        initial_tracks=tuple(range(n)),
        final_tracks=tuple(pos),
    )


def fill_wires(
    instances: Iterable[FragmentInstance],
    unit_width: int,
    n_tracks: int,
    total_width: int | None,
) -> list[WireRun]:
    """Wire runs covering every idle stretch of every track.

    With ``total_width`` the stretches before the first and after the last
    fragment on a track are filled out to columns 0 and ``total_width``;
    otherwise only the gaps between fragments are filled.
    """
    per_track: list[list[tuple[int, int]]] = [[] for _ in range(n_tracks)]
    for inst in instances:
        for t in inst.tracks:
            per_track[t].append((inst.column, inst.end))
    runs: list[WireRun] = []
    for t, spans in enumerate(per_track):
        spans.sort()
        if total_width is None:
            if not spans:
                continue
            cursor = spans[0][0]
        else:
            cursor = 0
            spans.append((total_width, total_width))
        for lo, hi in spans:
            gap = lo - cursor
            if gap < 0:
                raise RoutingError(f"overlapping fragments on track {t} at column {lo}")
            if gap % unit_width:
                raise RoutingError(f"gap of {gap} sites on track {t} is not a whole number of wire units")
            if gap:
                runs.append(WireRun(t, cursor, gap // unit_width))
            cursor = max(cursor, hi)
    return runs
