"""Placement of compiled programs on the cluster lattice and resource counting.

Layouts are stored sparsely (fragment placements plus wire runs) because a
direct-mapped 128-bit adder covers tens of millions of lattice sites; the site
grid is materialised on demand for small layouts and for cross-checks.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterator

from .circuit import Circuit, GateKind
from .pattern import (
    Classification,
    Coord,
    FragmentInstance,
    FragmentSpec,
    GateCatalog,
    PatternProgram,
    Plane,
    WireRun,
    fill_wires,
)


class LayoutError(RuntimeError):
    """Overlapping fragments or a broken teleportation chain (always a bug)."""


class ScheduleError(LayoutError):
    pass


@dataclass(frozen=True)
class SiteInfo:
    plane: Plane
    angle: float
    round: int
    classification: Classification
    owner: int  # fragment id; wire units get negative ids
    kind: GateKind
    adaptive: bool = False


@dataclass(frozen=True, eq=False)
class ClusterLayout:
    circuit: Circuit
    catalog: GateCatalog
    placements: tuple[FragmentInstance, ...]
    wire_runs: tuple[WireRun, ...]
    n_tracks: int
    width: int
    # logical qubit on every track before the first and after the last fragment
    initial_tracks: tuple[int, ...] = ()
    final_tracks: tuple[int, ...] = ()
    # whether the idle stretches before the first / after the last fragment are wired
    boundary_wires: bool = True
    name: str = ""

    def __post_init__(self) -> None:
        self._check_overlap()

    # -- geometry ----------------------------------------------------------------

    @property
    def wire(self) -> FragmentSpec:
        return self.catalog.wire_unit

    @cached_property
    def band_heights(self) -> tuple[int, ...]:
        """Rows per track: 2 where a fragment needs the spare row below the track, else 1."""
        bands = [1] * self.n_tracks
        for p in self.placements:
            for t in range(p.track, p.track + p.spec.n_tracks - 1):
                bands[t] = 2
        return tuple(bands)

    @cached_property
    def row_offsets(self) -> tuple[int, ...]:
        out, acc = [], 0
        for h in self.band_heights:
            out.append(acc)
            acc += h
        return tuple(out)

    @property
    def height(self) -> int:
        return sum(self.band_heights)

    @property
    def area(self) -> int:
        return self.height * self.width

    def row(self, track: int) -> int:
        return self.row_offsets[track]

    def to_global(self, inst: FragmentInstance, coord: Coord) -> Coord:
        r, c = coord
        return (self.row_offsets[inst.track + r // 2] + r % 2, inst.column + c)

    def round_offset(self, inst: FragmentInstance) -> int:
        """Each Toffoli level takes two rounds; everything else runs in round 1."""
        if inst.kind.is_toffoli and inst.toffoli_level > 0:
            return 2 * (inst.toffoli_level - 1)
        return 0

    @property
    def placed(self) -> bool:
        return bool(self.placements or self.wire_runs)

    # -- per-track chains ----------------------------------------------------------

    @cached_property
    def _track_items(self) -> list[list[tuple[int, int]]]:
        """(start, end) of every placement and wire run on each track, sorted."""
        items: list[list[tuple[int, int]]] = [[] for _ in range(self.n_tracks)]
        for p in self.placements:
            for t in p.tracks:
                items[t].append((p.column, p.end))
        uw = self.wire.width
        for w in self.wire_runs:
            items[w.track].append((w.column, w.end(uw)))
        for lst in items:
            lst.sort()
        return items

    def _check_overlap(self) -> None:
        for t, lst in enumerate(self._track_items):
            for (a0, a1), (b0, b1) in zip(lst, lst[1:]):
                if b0 < a1:
                    raise LayoutError(f"fragments overlap on track {t} at column {b0}")
                if b0 != a1:
                    raise LayoutError(f"teleportation chain broken on track {t} between columns {a1} and {b0}")
            if lst and self.boundary_wires and (lst[0][0] != 0 or lst[-1][1] != self.width):
                raise LayoutError(f"track {t} is not wired out to the layout boundary")
            if lst and lst[-1][1] > self.width:
                raise LayoutError(f"track {t} runs past the layout width")

    def entry_site(self, qubit: int) -> Coord:
        t = self.initial_tracks.index(qubit)
        lst = self._track_items[t]
        return (self.row(t), lst[0][0] if lst else 0)

    def exit_site(self, qubit: int) -> Coord:
        t = self.final_tracks.index(qubit)
        lst = self._track_items[t]
        return (self.row(t), lst[-1][1] if lst else 0)

    def wire_instances(self) -> Iterator[FragmentInstance]:
        uw = self.wire.width
        k = -1
        for w in self.wire_runs:
            for u in range(w.units):
                yield FragmentInstance(k, self.wire, w.track, w.column + u * uw, (), None, 0)
                k -= 1

    def execution_order(self) -> list[FragmentInstance]:
        """Every fragment and wire unit in a valid order, with its logical qubits filled in."""
        items = sorted(
            list(self.placements) + list(self.wire_instances()),
            key=lambda i: (i.column, i.track, i.id < 0, i.id),
        )
        where = list(self.initial_tracks)
        out = []
        for i in items:
            if i.gate_index is None and i.kind is GateKind.WIRE:
                i = FragmentInstance(i.id, i.spec, i.track, i.column, (where[i.track],), None, 0)
            elif i.is_routing:
                i = FragmentInstance(
                    i.id, i.spec, i.track, i.column, (where[i.track], where[i.track + 1]), None, 0
                )
                where[i.track], where[i.track + 1] = where[i.track + 1], where[i.track]
            out.append(i)
        if tuple(where) != tuple(self.final_tracks):
            raise LayoutError("SWAP fragments do not reproduce the recorded final track assignment")
        return out

    # -- counting ----------------------------------------------------------------

    @cached_property
    def link_count(self) -> int:
        """Edges joining consecutive fragments on a track (output port to next input port)."""
        runs = sum(w.units - 1 for w in self.wire_runs)
        return sum(max(0, len(lst) - 1) for lst in self._track_items) + runs

    @cached_property
    def depth(self) -> int:
        if not self.placed:
            return 0
        d = 1
        for p in self.placements:
            d = max(d, self.round_offset(p) + p.spec.rounds)
        return d

    def site_grid(self) -> dict[Coord, SiteInfo]:
        """Materialise every occupied site. Only sensible for small layouts."""
        grid: dict[Coord, SiteInfo] = {}
        for inst in list(self.placements) + list(self.wire_instances()):
            off = self.round_offset(inst)
            for c, s in inst.spec.sites.items():
                g = self.to_global(inst, c)
                if g in grid:
                    raise LayoutError(f"site {g} claimed twice")
                grid[g] = SiteInfo(
                    s.basis.plane,
                    s.basis.angle,
                    off + s.round,
                    inst.spec.classification,
                    inst.id,
                    inst.kind,
                    s.basis.adaptive,
                )
        return grid

    def edge_set(self) -> set[frozenset[Coord]]:
        """Every entangling edge, including links between abutting fragments."""
        edges: set[frozenset[Coord]] = set()
        items = list(self.placements) + list(self.wire_instances())
        inputs = {self.to_global(i, p) for i in items for p in i.spec.input_ports}
        for inst in items:
            for u, v in inst.spec.all_edges:
                gu, gv = self.to_global(inst, u), self.to_global(inst, v)
                if v in inst.spec.ghosts and gv not in inputs:
                    continue
                e = frozenset((gu, gv))
                if e in edges:
                    raise LayoutError(f"duplicate edge {gu}-{gv}")
                edges.add(e)
        return edges

    def depth_schedule(self) -> dict[Coord, int]:
        return {c: s.round for c, s in self.site_grid().items()}

    # -- export ------------------------------------------------------------------

    _CHARS = {
        GateKind.NOT: "N",
        GateKind.CNOT: "C",
        GateKind.TOFFOLI: "T",
        GateKind.TOFFOLI_PHASE: "P",
        GateKind.SWAP: "S",
        GateKind.WIRE: "W",
    }

    def to_ascii(self) -> str:
        """One character per site; '.' is empty, lower case marks adaptive (round-2) sites."""
        rows = [["."] * self.width for _ in range(self.height)]
        for (r, c), s in self.site_grid().items():
            ch = self._CHARS[s.kind]
            rows[r][c] = ch.lower() if s.adaptive else ch
        return "\n".join("".join(r) for r in rows)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "height": self.height,
            "width": self.width,
            "n_tracks": self.n_tracks,
            "band_heights": list(self.band_heights),
            "boundary_wires": self.boundary_wires,
            "initial_tracks": list(self.initial_tracks),
            "final_tracks": list(self.final_tracks),
            "fragments": [
                {
                    "id": p.id,
                    "kind": p.kind.value,
                    "mirrored": p.spec.reflected,
                    "track": p.track,
                    "column": p.column,
                    "qubits": list(p.qubits),
                    "gate_index": p.gate_index,
                    "toffoli_level": p.toffoli_level,
                }
                for p in self.placements
            ],
            "wire_runs": [{"track": w.track, "column": w.column, "units": w.units} for w in self.wire_runs],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)

    @classmethod
    def from_dict(cls, d: dict, circuit: Circuit, catalog: GateCatalog) -> "ClusterLayout":
        placements = []
        for f in d["fragments"]:
            kind = GateKind(f["kind"])
            spec = catalog.reflected[kind] if f["mirrored"] else catalog[kind]
            placements.append(
                FragmentInstance(
                    f["id"], spec, f["track"], f["column"], tuple(f["qubits"]), f["gate_index"], f["toffoli_level"]
                )
            )
        return cls(
            circuit,
            catalog,
            tuple(placements),
            tuple(WireRun(w["track"], w["column"], w["units"]) for w in d["wire_runs"]),
            d["n_tracks"],
            d["width"],
            tuple(d["initial_tracks"]),
            tuple(d["final_tracks"]),
            d["boundary_wires"],
            d.get("name", ""),
        )

    def replace(self, **kw) -> "ClusterLayout":
        fields = dict(
            circuit=self.circuit,
            catalog=self.catalog,
            placements=self.placements,
            wire_runs=self.wire_runs,
            n_tracks=self.n_tracks,
            width=self.width,
            initial_tracks=self.initial_tracks,
            final_tracks=self.final_tracks,
            boundary_wires=self.boundary_wires,
            name=self.name,
        )
        fields.update(kw)
        return ClusterLayout(**fields)


def place(p: PatternProgram) -> ClusterLayout:
    """Put a compiled program on the lattice exactly as compiled (direct mapping)."""
    return ClusterLayout(
        circuit=p.circuit,
        catalog=p.catalog,
        placements=p.instances,
        wire_runs=p.wire_runs,
        n_tracks=p.n_tracks,
        width=p.width,
        initial_tracks=tuple(p.initial_tracks.index(t) for t in range(p.n_tracks)),
        final_tracks=tuple(p.final_tracks.index(t) for t in range(p.n_tracks)),
        boundary_wires=True,
        name=p.circuit.name,
    )


def relayout(l: ClusterLayout, placements: tuple[FragmentInstance, ...], boundary_wires: bool) -> ClusterLayout:
    """Rebuild wire runs for new fragment positions."""
    width = max((p.end for p in placements), default=0)
    runs = fill_wires(placements, l.wire.width, l.n_tracks, width if boundary_wires else None)
    return l.replace(placements=placements, wire_runs=tuple(runs), width=width, boundary_wires=boundary_wires)


# ---------------------------------------------------------------------------
# resources


@dataclass(frozen=True)
class ResourceReport:
    depth: int
    area: int
    qubits: int
    clustering_ops: int
    computational_sites: int
    communication_sites: int
    height: int = 0
    width: int = 0
    per_kind: dict[str, dict[str, int]] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "depth": self.depth,
            "area": self.area,
            "qubits": self.qubits,
            "clustering_ops": self.clustering_ops,
            "computational_sites": self.computational_sites,
            "communication_sites": self.communication_sites,
            "height": self.height,
            "width": self.width,
            "per_kind": self.per_kind,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "ResourceReport":
        return cls(**d)


def classify_sites(l: ClusterLayout) -> tuple[int, int]:
    """(computational, communication) occupied-site counts."""
    comp = comm = 0
    for p in l.placements:
        if p.spec.classification is Classification.COMPUTATIONAL:
            comp += p.spec.n_sites
        else:
            comm += p.spec.n_sites
    comm += sum(w.units for w in l.wire_runs) * l.wire.n_sites
    return comp, comm


def count_resources(l: ClusterLayout) -> ResourceReport:
    per_kind: dict[str, dict[str, int]] = {}

    def add(kind: GateKind, n: int, spec: FragmentSpec) -> None:
        e = per_kind.setdefault(kind.value, {"fragments": 0, "sites": 0, "edges": 0})
        e["fragments"] += n
        e["sites"] += n * spec.n_sites
        e["edges"] += n * len(spec.edges)

    for p in l.placements:
        add(p.kind, 1, p.spec)
    units = sum(w.units for w in l.wire_runs)
    if units:
        add(GateKind.WIRE, units, l.wire)
    comp, comm = classify_sites(l)
    internal = sum(e["edges"] for e in per_kind.values())
    return ResourceReport(
        depth=l.depth,
        area=l.area,
        qubits=comp + comm,
        clustering_ops=internal + l.link_count,
        computational_sites=comp,
        communication_sites=comm,
        height=l.height,
        width=l.width,
        per_kind=dict(sorted(per_kind.items())),
    )


def count_from_grid(l: ClusterLayout) -> ResourceReport:
    """Recount everything from the materialised grid (independent of count_resources)."""
    grid = l.site_grid()
    edges = l.edge_set()
    for e in edges:
        u, v = tuple(e)
        if u not in grid or v not in grid or abs(u[0] - v[0]) + abs(u[1] - v[1]) != 1:
            raise LayoutError(f"edge {u}-{v} is not between adjacent occupied sites")
    comp = sum(1 for s in grid.values() if s.classification is Classification.COMPUTATIONAL)
    depth = max((s.round for s in grid.values()), default=0)
    return ResourceReport(
        depth=depth,
        area=l.height * l.width,
        qubits=len(grid),
        clustering_ops=len(edges),
        computational_sites=comp,
        communication_sites=len(grid) - comp,
        height=l.height,
        width=l.width,
    )


# ---------------------------------------------------------------------------
# schedule validation


def validate_schedule(l: ClusterLayout) -> int:
    """Check that every adaptive site is scheduled after all outcomes its basis depends on.

    Byproducts are propagated symbolically through the whole layout: every
    frame bit is an XOR of raw outcomes, kept as a bit set so that dependencies
    that cancel are recognised as such. Returns the number of adaptive sites
    checked; raises :class:`ScheduleError` on the first violation.
    """
    rounds: list[int] = []
    where: list[Coord] = []
    # frame of each logical qubit at its current ghost site
    fx: dict[int, int] = {}
    fz: dict[int, int] = {}
    checked = 0
    for inst in l.execution_order():
        spec = inst.spec
        off = l.round_offset(inst)
        nb = spec.neighbours
        sx: dict[Coord, int] = {}
        sz: dict[Coord, int] = {}
        for q, port in zip(inst.qubits, spec.input_ports):
            x, z = fx.get(q, 0), fz.get(q, 0)
            sx[port] = x
            sz[port] = sz.get(port, 0) ^ z
            for v in nb[port]:
                sz[v] = sz.get(v, 0) ^ x
        for s in spec.order:
            site = spec.sites[s]
            plane, a = site.basis.canonical
            sign = sx.get(s, 0) if plane is Plane.XY else sz.get(s, 0)
            flip = sz.get(s, 0) if plane is Plane.XY else sx.get(s, 0)
            rid = len(rounds)
            rnd = off + site.round
            rounds.append(rnd)
            where.append(l.to_global(inst, s))
            if site.basis.adaptive:
                checked += 1
                m = sign
                while m:
                    low = m & -m
                    dep = low.bit_length() - 1
                    if rounds[dep] >= rnd:
                        raise ScheduleError(
                            f"adaptive site {where[-1]} (round {rnd}) depends on {where[dep]} (round {rounds[dep]})"
                        )
                    m ^= low
                eff = (1 << rid) ^ flip
            else:
                eff = (1 << rid) ^ flip
                if _odd_quarter(a):
                    eff ^= sign
            corr = spec.byproduct_rule.get(s)
            if corr is None:
                continue
            for t in corr.x:
                sx[t] = sx.get(t, 0) ^ eff
            for t in corr.z:
                sz[t] = sz.get(t, 0) ^ eff
        for q, g in zip(inst.output_qubits, spec.ghosts):
            fx[q] = sx.get(g, 0)
            fz[q] = sz.get(g, 0)
    return checked


def _odd_quarter(angle: float) -> bool:
    q = angle / (math.pi / 2)
    return abs(q - round(q)) < 1e-12 and round(q) % 2 == 1
