"""Spatial optimisation: drop unnecessary wires, then close up empty space.

Fragment order on every track is kept, so each logical qubit passes through
the same fragments in the same order and measurement rounds are untouched.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .layout import ClusterLayout, ResourceReport, count_resources, relayout
from .pattern import FragmentInstance


@dataclass(frozen=True)
class OptimizationReport:
    before: ResourceReport
    after: ResourceReport
    removed_wire_sites: int
    removed_swap_sites: int
    area_reduction_fraction: float
    iterations: int = 1

    def to_dict(self) -> dict:
        return {
            "before": self.before.to_dict(),
            "after": self.after.to_dict(),
            "removed_wire_sites": self.removed_wire_sites,
            "removed_swap_sites": self.removed_swap_sites,
            "area_reduction_fraction": self.area_reduction_fraction,
            "iterations": self.iterations,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "OptimizationReport":
        return cls(
            ResourceReport.from_dict(d["before"]),
            ResourceReport.from_dict(d["after"]),
            d["removed_wire_sites"],
            d["removed_swap_sites"],
            d["area_reduction_fraction"],
            d.get("iterations", 1),
        )


def _in_order(l: ClusterLayout) -> list[FragmentInstance]:
    return sorted(l.placements, key=lambda p: (p.column, p.track, p.id))


def remove_wires(l: ClusterLayout) -> ClusterLayout:
    """Contract every wire run to the shortest length that keeps the ports connected.

    Each fragment moves left until it abuts the previous fragment on one of
    its tracks; a run survives only where another track of the same fragment
    forces a gap. Idle stretches before the first and after the last fragment
    of a track are dropped: the qubit enters at its first fragment and is
    read out at its last.
    """
    end = [0] * l.n_tracks
    moved = []
    for p in _in_order(l):
        col = max(end[t] for t in p.tracks)
        moved.append(p.moved(col))
        for t in p.tracks:
            end[t] = col + p.spec.width
    return relayout(l, tuple(sorted(moved, key=lambda p: p.id)), boundary_wires=False)


def compact(l: ClusterLayout) -> ClusterLayout:
    """Delete lattice columns that hold no site at all, shifting everything after them left.

    Tracks are already packed as tightly as their bands allow, so nothing
    moves up. Never increases width or height; a layout without empty
    columns is returned unchanged.
    """
    if not l.placements:
        return l
    covered = bytearray(l.width)
    spans = [(p.column, p.end) for p in l.placements]
    uw = l.wire.width
    spans += [(w.column, w.end(uw)) for w in l.wire_runs]
    for lo, hi in spans:
        covered[lo:hi] = b"\x01" * (hi - lo)
    if all(covered):
        return l
    shift = [0] * (l.width + 1)
    acc = 0
    for c in range(l.width):
        shift[c] = acc
        if not covered[c]:
            acc += 1
    shift[l.width] = acc
    moved = tuple(p.moved(p.column - shift[p.column]) for p in l.placements)
    return relayout(l, moved, boundary_wires=l.boundary_wires)


def cancel_swaps(l: ClusterLayout) -> ClusterLayout:
    """Remove pairs of routing SWAPs on the same two tracks with nothing between them.

    Not part of the default optimisation (see :func:`optimize`).
    """
    order = _in_order(l)
    keep = [True] * len(order)
    last: list[int | None] = [None] * l.n_tracks
    for k, p in enumerate(order):
        if p.is_routing:
            a, b = last[p.track], last[p.track + 1]
            if a is not None and a == b and order[a].is_routing and order[a].track == p.track:
                keep[a] = keep[k] = False
                for t in (p.track, p.track + 1):
                    j = k - 1
                    while j >= 0 and not (keep[j] and t in order[j].tracks):
                        j -= 1
                    last[t] = j if j >= 0 else None
                continue
        for t in p.tracks:
            last[t] = k
    kept = tuple(p for p, k in zip(order, keep) if k)
    if len(kept) == len(order):
        return l
    return relayout(l, tuple(sorted(kept, key=lambda p: p.id)), boundary_wires=l.boundary_wires)


def _signature(l: ClusterLayout) -> tuple:
    return (l.width, l.boundary_wires, tuple((p.id, p.column) for p in l.placements), l.wire_runs)


def optimize(l: ClusterLayout, *, cancel_routing_swaps: bool = False) -> tuple[ClusterLayout, OptimizationReport]:
    """remove_wires then compact, repeated until nothing changes.

    With ``cancel_routing_swaps`` back-to-back routing SWAP pairs are removed
    as well; this goes beyond wire removal and is off by default.
    """
    before = count_resources(l)
    cur = l
    iterations = 0
    limit = max(1, l.area) + 1
    while iterations < limit:
        iterations += 1
        nxt = remove_wires(cur)
        if cancel_routing_swaps:
            nxt = cancel_swaps(nxt)
        nxt = compact(nxt)
        if _signature(nxt) == _signature(cur):
            break
        cur = nxt
    after = count_resources(cur)
    wire_sites = lambda r: r.per_kind.get("WIRE", {}).get("sites", 0)  # noqa: E731
    swap_sites = lambda r: r.per_kind.get("SWAP", {}).get("sites", 0)  # noqa: E731
    frac = 1.0 - after.area / before.area if before.area else 0.0
    report = OptimizationReport(
        before,
        after,
        wire_sites(before) - wire_sites(after),
        swap_sites(before) - swap_sites(after),
        frac,
        iterations,
    )
    return cur, report
