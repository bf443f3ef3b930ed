"""Geometric construction of the default fragment catalog.

Only ``scripts/build_catalog.py`` uses this module; the package itself reads the
generated JSON. Conventions:

* Track k of a fragment has its data row at ``2k``; row ``2k+1`` is spare room
  used for CNOT detours and phase gadgets.
* Measuring a path site at XY angle ``a`` sends ``H diag(1, e^{-ia})`` of its
  state to the next site on the path, up to a Pauli byproduct. Two sites at
  angle 0 are the identity, so every block keeps each path at even length.
* A gadget is a dangling site joined to data sites. Measured in the YZ plane
  at angle ``t`` it multiplies the state by ``exp(i t * parity)`` of the data
  bits it touches.
"""

from __future__ import annotations

import math

from .circuit import GateKind
from .pattern import (
    TAXONOMY,
    Coord,
    Correction,
    FragmentSpec,
    GateCatalog,
    MeasurementBasis,
    Plane,
    SiteSpec,
    is_pauli_angle,
)

HALF_PI = math.pi / 2
QUARTER_PI = math.pi / 4


class Builder:
    def __init__(self, n_tracks: int):
        self.n_tracks = n_tracks
        self.paths: list[list[tuple[Coord, float]]] = [[] for _ in range(n_tracks)]
        self.links: list[tuple[Coord, Coord]] = []
        self.gadgets: list[tuple[Coord, tuple[Coord, ...], float]] = []
        self.column = 0

    def row(self, track: int) -> int:
        return 2 * track

    def _step(self, track: int, cells: list[Coord], angles: list[float]) -> None:
        self.paths[track] += list(zip(cells, angles))

    def wire(self, track: int, width: int = 2) -> None:
        r, c = self.row(track), self.column
        self._step(track, [(r, c + i) for i in range(width)], [0.0] * width)

    def not_(self, track: int) -> None:
        r, c = self.row(track), self.column
        self._step(track, [(r, c), (r, c + 1)], [0.0, math.pi])

    def hadamard(self, track: int) -> None:
        r, c = self.row(track), self.column
        self._step(track, [(r, c + i) for i in range(4)], [HALF_PI, HALF_PI, HALF_PI, 0.0])

    def cnot(self, control: int, target: int) -> None:
        """Two columns wide; the target path detours into the spare row next to the control."""
        c = self.column
        rc, rt = self.row(control), self.row(target)
        side = rt - 1 if target > control else rt + 1
        self._step(control, [(rc, c), (rc, c + 1)], [0.0, 0.0])
        self._step(target, [(rt, c), (side, c), (side, c + 1), (rt, c + 1)], [0.0] * 4)
        self.links.append(((rc, c), (side, c)))

    def gadget(self, site: Coord, attached: tuple[Coord, ...], theta: float) -> None:
        self.gadgets.append((site, attached, theta))

    def advance(self, width: int) -> None:
        self.column += width

    def build(self, kind: GateKind, operand_tracks: tuple[int, ...] | None = None) -> FragmentSpec:
        width = self.column
        height = 2 * self.n_tracks - 1
        operand_tracks = operand_tracks or tuple(range(self.n_tracks))
        angle: dict[Coord, float] = {}
        flow: dict[Coord, Coord] = {}
        edges: list[tuple[Coord, Coord]] = []
        for path in self.paths:
            cells = [c for c, _ in path]
            for (cell, a), nxt in zip(path, cells[1:] + [(cells[-1][0], width)]):
                if cell in angle:
                    raise ValueError(f"site {cell} used twice")
                angle[cell] = a
                flow[cell] = nxt
            edges += list(zip(cells, cells[1:]))
        edges += self.links
        gadget_theta = {}
        for site, attached, theta in self.gadgets:
            if site in angle or site in gadget_theta:
                raise ValueError(f"gadget site {site} is taken")
            gadget_theta[site] = theta
            edges += [(site, a) for a in attached]

        ins = tuple(self.paths[t][0][0] for t in operand_tracks)
        outs = tuple(self.paths[t][-1][0] for t in operand_tracks)
        ghosts = [(r, width) for r, _ in outs]
        nb: dict[Coord, set[Coord]] = {}
        for u, v in edges + list(zip(outs, ghosts)):
            nb.setdefault(u, set()).add(v)
            nb.setdefault(v, set()).add(u)

        rule: dict[Coord, Correction] = {}
        for s, f in flow.items():
            rule[s] = Correction((f,), tuple(sorted(nb[f] - {s})))
        for g in gadget_theta:
            rule[g] = Correction((), tuple(sorted(nb[g])))

        sites_plane = {s: (Plane.XY, a) for s, a in angle.items()}
        sites_plane.update({g: (Plane.YZ, t) for g, t in gadget_theta.items()})
        draft = FragmentSpec(
            kind,
            height,
            width,
            {s: SiteSpec(MeasurementBasis(p, a)) for s, (p, a) in sites_plane.items()},
            ins,
            outs,
            tuple(tuple(sorted(e)) for e in edges),
            TAXONOMY[kind],
            rule,
        )
        sites = _annotate(draft, sites_plane)
        spec = FragmentSpec(kind, height, width, sites, ins, outs, draft.edges, TAXONOMY[kind], rule)
        spec.validate()
        return spec


def _annotate(frag: FragmentSpec, planes: dict[Coord, tuple[Plane, float]]) -> dict[Coord, SiteSpec]:
    """Work out which sites are adaptive, what they depend on, and their round."""
    x: dict[Coord, set] = {s: set() for s in frag.neighbours}
    z: dict[Coord, set] = {s: set() for s in frag.neighbours}
    for k, port in enumerate(frag.input_ports):
        x[port] ^= {("in", k, "x")}
        z[port] ^= {("in", k, "z")}
        for v in frag.neighbours[port]:
            z[v] ^= {("in", k, "x")}
    out: dict[Coord, SiteSpec] = {}
    adaptive_sites = set()
    for s in frag.order:
        plane, a = planes[s]
        sign_domain = x[s] if plane is Plane.XY else z[s]
        adaptive = not is_pauli_angle(a)
        if adaptive:
            adaptive_sites.add(s)
            deps = tuple(sorted(d[1] for d in sign_domain if d[0] == "site"))
            in_deps = tuple(sorted((d[1], d[2]) for d in sign_domain if d[0] == "in"))
            if any(d in adaptive_sites for d in deps):
                raise ValueError(f"adaptive site {s} depends on another adaptive site")
            basis = MeasurementBasis(plane, a, True, deps, in_deps)
            out[s] = SiteSpec(basis, 2)
        else:
            if plane is Plane.XY and abs(a) < 1e-12:
                basis = MeasurementBasis(Plane.X, 0.0)
            elif plane is Plane.XY and abs(a - HALF_PI) < 1e-12:
                basis = MeasurementBasis(Plane.Y, HALF_PI)
            else:
                basis = MeasurementBasis(plane, a)
            out[s] = SiteSpec(basis, 1)
        corr = frag.byproduct_rule[s]
        for t in corr.x:
            x[t] ^= {("site", s)}
        for t in corr.z:
            z[t] ^= {("site", s)}
    return out


# ---------------------------------------------------------------------------


def wire_fragment() -> FragmentSpec:
    b = Builder(1)
    b.wire(0)
    b.advance(2)
    return b.build(GateKind.WIRE)


def not_fragment() -> FragmentSpec:
    b = Builder(1)
    b.not_(0)
    b.advance(2)
    return b.build(GateKind.NOT)


def cnot_fragment() -> FragmentSpec:
    b = Builder(2)
    b.cnot(0, 1)
    b.advance(2)
    return b.build(GateKind.CNOT)


def swap_fragment() -> FragmentSpec:
    b = Builder(2)
    for control, target in ((0, 1), (1, 0), (0, 1)):
        b.cnot(control, target)
        b.advance(2)
    return b.build(GateKind.SWAP)


def _ccz_blocks(b: Builder) -> None:
    """Doubly controlled Z on tracks 0, 1, 2 from seven parity gadgets and six CNOTs.

    pi*x1*x2*x3 = pi/4 (x1 + x2 + x3 - x1^x2 - x2^x3 - x1^x3 + x1^x2^x3); the CNOTs
    expose each parity on a single track or on two neighbouring tracks.
    """
    d = b.row
    q = QUARTER_PI
    # block 0: x1^x2, x2^x3
    c = b.column
    b.gadget((1, c), ((d(0), c), (d(1), c)), -q)
    b.gadget((3, c), ((d(1), c), (d(2), c)), -q)
    for t in range(3):
        b.wire(t)
    b.advance(2)
    # block 1: x2, then t1 ^= t0
    c = b.column
    b.gadget((3, c), ((d(1), c),), q)
    b.cnot(0, 1)
    b.wire(2)
    b.advance(2)
    # block 2: x1, then t2 ^= t1  -> t2 = x1^x2^x3
    c = b.column
    b.gadget((1, c), ((d(0), c),), q)
    b.wire(0)
    b.cnot(1, 2)
    b.advance(2)
    # block 3: x1^x2^x3, then t1 ^= t0 -> t1 = x2
    c = b.column
    b.gadget((3, c), ((d(2), c),), q)
    b.cnot(0, 1)
    b.wire(2)
    b.advance(2)
    # block 4: t1^t2 = x1^x3, then t1 ^= t0
    c = b.column
    b.gadget((3, c), ((d(1), c), (d(2), c)), -q)
    b.cnot(0, 1)
    b.wire(2)
    b.advance(2)
    # block 5: t2 ^= t1 -> t2 = x3
    b.wire(0)
    b.cnot(1, 2)
    b.advance(2)
    # block 6: x3, then t1 ^= t0 -> t1 = x2
    c = b.column
    b.gadget((3, c), ((d(2), c),), q)
    b.cnot(0, 1)
    b.wire(2)
    b.advance(2)


def toffoli_phase_fragment() -> FragmentSpec:
    b = Builder(3)
    _ccz_blocks(b)
    return b.build(GateKind.TOFFOLI_PHASE)


def toffoli_fragment() -> FragmentSpec:
    b = Builder(3)
    b.wire(0, 4)
    b.wire(1, 4)
    b.hadamard(2)
    b.advance(4)
    _ccz_blocks(b)
    b.wire(0, 4)
    b.wire(1, 4)
    b.hadamard(2)
    b.advance(4)
    return b.build(GateKind.TOFFOLI)


def default_catalog() -> GateCatalog:
    entries = {
        GateKind.NOT: not_fragment(),
        GateKind.CNOT: cnot_fragment(),
        GateKind.TOFFOLI: toffoli_fragment(),
        GateKind.TOFFOLI_PHASE: toffoli_phase_fragment(),
        GateKind.SWAP: swap_fragment(),
        GateKind.WIRE: wire_fragment(),
    }
    return GateCatalog(
        entries,
        wire_fragment(),
        name="default",
        note=(
            "Square-lattice patterns: X/Y-measured teleportation paths for Clifford gates, "
            "YZ-plane parity gadgets for the doubly controlled phase. Generated by "
            "scripts/build_catalog.py; correctness is checked by verify_catalog."
        ),
    )
