import copy
import json
import math

import pytest

from mbqcla.circuit import Circuit, Gate, GateKind, build_adder, build_qcla_adder
from mbqcla.pattern import (
    AdjacencyError,
    CatalogParseError,
    Classification,
    FragmentInstance,
    MissingEntryError,
    PortBoundaryError,
    UnverifiedCatalogError,
    compile,
    fill_wires,
    load_catalog,
    verify_catalog,
)


@pytest.fixture()
def raw():
    return json.loads(load_catalog("default").dumps())


def _first_cell(grid, pred):
    for r, row in enumerate(grid):
        for c, cell in enumerate(row):
            if cell.get("occupied") and pred(cell):
                return r, c
    raise AssertionError("no matching cell")


# -- loading -------------------------------------------------------------------


def test_default_catalog_has_six_entries(catalog):
    assert set(catalog.entries) == set(GateKind)
    assert len(catalog.entries) == 6
    for kind, spec in catalog.entries.items():
        assert spec.gate_kind is kind


def test_classification_taxonomy(catalog):
    comp = {GateKind.NOT, GateKind.CNOT, GateKind.TOFFOLI, GateKind.TOFFOLI_PHASE}
    for kind, spec in catalog.entries.items():
        want = Classification.COMPUTATIONAL if kind in comp else Classification.COMMUNICATION
        assert spec.classification is want


def test_round_two_only_in_toffoli_kinds(catalog):
    for kind, spec in catalog.entries.items():
        rounds = {s.round for s in spec.sites.values()}
        if kind.is_toffoli:
            assert rounds == {1, 2}
        else:
            assert rounds == {1}
            assert not any(s.basis.adaptive for s in spec.sites.values())


def test_dumps_round_trip(catalog):
    again = load_catalog(catalog.dumps())
    assert again.dumps() == catalog.dumps()


def test_missing_swap(raw):
    del raw["entries"]["SWAP"]
    with pytest.raises(MissingEntryError, match="SWAP"):
        load_catalog(json.dumps(raw))


def test_diagonal_edge(raw):
    cnot = raw["entries"]["CNOT"]
    u = _first_cell(cnot["sites"], lambda c: True)
    cnot["sites"][u[0] + 1][u[1] + 1] = {"occupied": True, "plane": "X", "angle": 0.0, "round": 1}
    cnot["edges"].append([list(u), [u[0] + 1, u[1] + 1]])
    with pytest.raises(AdjacencyError):
        load_catalog(json.dumps(raw))


def test_port_off_boundary(raw):
    cnot = raw["entries"]["CNOT"]
    cnot["input_ports"][0] = [cnot["input_ports"][0][0], 1]
    with pytest.raises(PortBoundaryError):
        load_catalog(json.dumps(raw))


def test_parse_error_reports_position():
    with pytest.raises(CatalogParseError, match=r"line 2 column"):
        load_catalog('{"entries":\n  [,]}')


def test_missing_field_named(raw):
    del raw["entries"]["NOT"]["edges"]
    with pytest.raises(CatalogParseError, match="entries.NOT.*edges"):
        load_catalog(json.dumps(raw))


def test_load_from_path(tmp_path, catalog):
    p = tmp_path / "cat.json"
    p.write_text(catalog.dumps())
    assert load_catalog(str(p)).dumps() == catalog.dumps()


# -- verification ----------------------------------------------------------------


def test_default_catalog_verifies():
    cat = load_catalog("default")
    assert not cat.verified
    rep = verify_catalog(cat)
    assert rep.passed and cat.verified
    assert rep.max_deviation < 1e-9
    assert rep.wire_unit.passed  # identity wire against I
    for e in rep.entries:
        assert e.rounds == (2 if e.kind.is_toffoli else 1)


def test_perturbed_cnot_fails_alone(raw):
    cnot = raw["entries"]["CNOT"]
    r, c = _first_cell(cnot["sites"], lambda cell: cell["plane"] in ("X", "XY") and not cell.get("adaptive"))
    cell = cnot["sites"][r][c]
    angle = 0.0 if cell["plane"] == "X" else cell["angle"]
    cnot["sites"][r][c] = dict(cell, plane="XY", angle=angle + 0.1)
    cat = load_catalog(json.dumps(raw))
    rep = verify_catalog(cat)
    assert not rep.passed and not cat.verified
    assert not rep[GateKind.CNOT].passed
    for e in rep.entries:
        if e.kind is not GateKind.CNOT:
            assert e.passed, e.kind


def test_corrupted_toffoli_phase_angle(raw):
    tp = raw["entries"]["TOFFOLI_PHASE"]
    r, c = _first_cell(
        tp["sites"], lambda cell: cell["plane"] in ("XY", "YZ") and abs(abs(cell["angle"]) - math.pi / 4) < 1e-9
    )
    tp["sites"][r][c]["angle"] *= -1  # wrong-sign phase gadget
    rep = verify_catalog(load_catalog(json.dumps(raw)))
    e = rep[GateKind.TOFFOLI_PHASE]
    assert not e.passed and e.max_deviation > 0.1


def test_report_serialises(catalog):
    rep = verify_catalog(copy.copy(catalog))
    d = json.loads(json.dumps(rep.to_dict()))
    assert d["passed"] and len(d["entries"]) == 6


# -- compilation -------------------------------------------------------------------


def test_single_cnot_program(catalog):
    p = compile(Circuit(2, (Gate(GateKind.CNOT, (0, 1)),)), catalog)
    assert len(p.instances) == 1 and p.wire_units == 0
    assert p.width == catalog[GateKind.CNOT].width


def test_gap_between_cnots_becomes_wire_units(catalog):
    spec = catalog[GateKind.CNOT]
    uw = catalog.wire_unit.width
    first = FragmentInstance(0, spec, 0, 0, (0, 1), 0)
    second = FragmentInstance(1, spec, 0, spec.width + 3 * uw, (0, 1), 1)
    runs = fill_wires([first, second], uw, 2, None)
    assert sorted((r.track, r.column, r.units) for r in runs) == [(0, spec.width, 3), (1, spec.width, 3)]


def test_overlap_is_a_routing_error(catalog):
    from mbqcla.pattern import RoutingError

    spec = catalog[GateKind.CNOT]
    a = FragmentInstance(0, spec, 0, 0, (0, 1), 0)
    b = FragmentInstance(1, spec, 0, 1, (0, 1), 1)
    with pytest.raises(RoutingError):
        fill_wires([a, b], catalog.wire_unit.width, 2, None)


@pytest.mark.parametrize("kind,n", [("qcla", 4), ("qcla", 9), ("ripple", 5)])
def test_fragment_multiset_matches_gates(catalog, kind, n):
    c = build_adder(kind, n)
    p = compile(c, catalog)
    gates: dict = {}
    for g in c.gates:
        gates[g.kind] = gates.get(g.kind, 0) + 1
    assert p.fragment_multiset() == gates
    assert sorted(i.gate_index for i in p.gate_fragments) == list(range(len(c.gates)))


def test_routing_swaps_are_paired(catalog):
    p = compile(build_qcla_adder(8), catalog)
    assert p.routing_swaps % 2 == 0
    assert p.final_tracks == p.initial_tracks


def test_clifford_only_program_is_single_round(catalog):
    c = build_qcla_adder(6)
    cliff = Circuit(c.n_qubits, tuple(g for g in c.gates if not g.kind.is_toffoli), c.register_map, c.n_bits)
    p = compile(cliff, catalog)
    assert all(s.round == 1 for i in p.instances for s in i.spec.sites.values())
    assert p.adaptive_dependencies() == []


def test_round_two_sites_belong_to_toffoli_fragments(catalog):
    p = compile(build_qcla_adder(6), catalog)
    for i in p.instances:
        if any(s.round == 2 for s in i.spec.sites.values()):
            assert i.kind.is_toffoli


def test_compile_is_deterministic(catalog):
    from mbqcla.layout import place

    a = place(compile(build_qcla_adder(7), catalog)).to_json()
    b = place(compile(build_qcla_adder(7), catalog)).to_json()
    assert a == b


def test_unverified_catalog_refused():
    with pytest.raises(UnverifiedCatalogError):
        compile(build_qcla_adder(2), load_catalog("default"))


def test_every_track_fully_covered(catalog):
    p = compile(build_qcla_adder(5), catalog)
    uw = catalog.wire_unit.width
    for t in range(p.n_tracks):
        spans = sorted(
            [(i.column, i.end) for i in p.instances if t in i.tracks]
            + [(r.column, r.end(uw)) for r in p.wire_runs if r.track == t]
        )
        cursor = 0
        for lo, hi in spans:
            assert lo == cursor
            cursor = hi
        assert cursor == p.width
