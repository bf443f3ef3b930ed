import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mbqcla.circuit import Circuit, Gate, GateKind, build_adder, toffoli_layer_count
from mbqcla.layout import (
    ClusterLayout,
    LayoutError,
    classify_sites,
    count_from_grid,
    count_resources,
    place,
    validate_schedule,
)
from mbqcla.pattern import FragmentInstance, WireRun, compile

from .conftest import layout_for


def _layout(catalog, n_qubits, *gates):
    return place(compile(Circuit(n_qubits, tuple(Gate(GateKind(k), ops) for k, ops in gates)), catalog))


def _same_totals(a, b):
    for f in ("depth", "area", "qubits", "clustering_ops", "computational_sites", "communication_sites"):
        assert getattr(a, f) == getattr(b, f), f


# -- placement ----------------------------------------------------------------------


def test_empty_program(catalog):
    l = _layout(catalog, 0)
    assert (l.height, l.width, l.area) == (0, 0, 0)
    r = count_resources(l)
    assert (r.depth, r.area, r.qubits, r.clustering_ops) == (0, 0, 0, 0)


def test_single_cnot_area(catalog):
    spec = catalog[GateKind.CNOT]
    l = _layout(catalog, 2, ("CNOT", (0, 1)))
    assert l.area == spec.height * spec.width
    assert count_resources(l).qubits == spec.n_sites


@pytest.mark.parametrize("k", [0, 1, 5])
def test_fragment_plus_k_wire_units(catalog, k):
    spec = catalog[GateKind.NOT]
    uw = catalog.wire_unit.width
    l = ClusterLayout(
        Circuit(1, (Gate(GateKind.NOT, (0,)),)),
        catalog,
        (FragmentInstance(0, spec, 0, 0, (0,), 0),),
        (WireRun(0, spec.width, k),) if k else (),
        1,
        spec.width + k * uw,
        (0,),
        (0,),
    )
    assert l.width == spec.width + k * uw
    assert count_resources(l).communication_sites == k * catalog.wire_unit.n_sites


def test_overlap_rejected(catalog):
    spec = catalog[GateKind.NOT]
    inst = (FragmentInstance(0, spec, 0, 0, (0,), 0), FragmentInstance(1, spec, 0, 1, (0,), 1))
    c = Circuit(1, (Gate(GateKind.NOT, (0,)),) * 2)
    with pytest.raises(LayoutError):
        ClusterLayout(c, catalog, inst, (), 1, 3, (0,), (0,))


# -- resources ----------------------------------------------------------------------


def test_clifford_only_depth_one(catalog):
    l = _layout(catalog, 4, ("CNOT", (0, 3)), ("NOT", (2,)), ("SWAP", (1, 2)), ("WIRE", (0,)), ("CNOT", (2, 1)))
    assert count_resources(l).depth == 1
    assert set(l.depth_schedule().values()) == {1}


def test_single_toffoli_phase_depth_two(catalog):
    l = _layout(catalog, 3, ("TOFFOLI_PHASE", (0, 1, 2)))
    assert count_resources(l).depth == 2
    assert set(l.depth_schedule().values()) == {1, 2}


def test_sequential_toffoli_layers_add_two(catalog):
    l = _layout(catalog, 4, ("TOFFOLI", (0, 1, 2)), ("TOFFOLI", (1, 2, 3)), ("TOFFOLI", (0, 3, 2)))
    assert count_resources(l).depth == 6


@pytest.mark.parametrize("kind,n", [("qcla", 2), ("qcla", 4), ("ripple", 3), ("qcla", 6)])
def test_report_recomputable_from_grid(kind, n):
    for opt in (False, True):
        l = layout_for(kind, n, opt)
        _same_totals(count_resources(l), count_from_grid(l))


@pytest.mark.parametrize("kind,n", [("qcla", 4), ("ripple", 4), ("qcla", 8)])
def test_grid_bounds(kind, n):
    l = layout_for(kind, n)
    r = count_resources(l)
    assert r.qubits <= r.area
    assert r.clustering_ops <= 2 * r.qubits
    assert r.computational_sites + r.communication_sites == r.qubits


def test_classify_wire_only(catalog):
    l = _layout(catalog, 1, ("WIRE", (0,)), ("WIRE", (0,)))
    q = count_resources(l).qubits
    assert classify_sites(l) == (0, q) and q > 0


def test_classify_cnot_only(catalog):
    l = _layout(catalog, 2, ("CNOT", (0, 1)))
    assert classify_sites(l) == (catalog[GateKind.CNOT].n_sites, 0)


def test_classify_mixed_recount_by_owner():
    l = layout_for("qcla", 4)
    comp, comm = classify_sites(l)
    by_owner: dict = {}
    for s in l.site_grid().values():
        by_owner.setdefault((s.owner, s.classification.value), 0)
        by_owner[(s.owner, s.classification.value)] += 1
    assert comp == sum(v for (o, c), v in by_owner.items() if c == "computational")
    assert comm == sum(v for (o, c), v in by_owner.items() if c == "communication")


def test_depth_is_twice_toffoli_layers():
    offsets = {count_resources(layout_for("qcla", n)).depth - 2 * toffoli_layer_count(build_adder("qcla", n))
               for n in (4, 8, 16, 32, 64)}
    assert len(offsets) == 1


def test_ripple_depth_linear_qcla_logarithmic():
    rip = [count_resources(layout_for("ripple", n)).depth for n in (8, 16, 32)]
    assert rip[1] / rip[0] > 1.8 and rip[2] / rip[1] > 1.8
    q = [count_resources(layout_for("qcla", n)).depth for n in (8, 16, 32)]
    assert q[2] - q[1] == q[1] - q[0]  # constant increment per doubling


@pytest.mark.parametrize("kind", ["qcla", "ripple"])
def test_monotone_in_n(kind):
    prev = None
    for n in range(1, 17):
        r = count_resources(layout_for(kind, n))
        cur = (r.area, r.qubits, r.clustering_ops)
        if prev is not None:
            assert all(c >= p for c, p in zip(cur, prev)), n
        prev = cur


@pytest.mark.parametrize("kind,n", [("qcla", 4), ("ripple", 4), ("qcla", 8)])
def test_schedule_respects_dependencies(kind, n):
    assert validate_schedule(layout_for(kind, n)) > 0
    assert validate_schedule(layout_for(kind, n, True)) > 0


def test_ascii_export(catalog):
    l = _layout(catalog, 3, ("CNOT", (0, 1)), ("TOFFOLI_PHASE", (0, 1, 2)))
    art = l.to_ascii().splitlines()
    assert len(art) == l.height and all(len(row) == l.width for row in art)
    text = "".join(art)
    assert "C" in text and "P" in text and "p" in text and set(text) <= set(".CPpW")


def test_layout_json_round_trip(catalog):
    l = layout_for("qcla", 5, True)
    back = ClusterLayout.from_dict(__import__("json").loads(l.to_json()), l.circuit, catalog)
    assert back.to_json() == l.to_json()


@settings(max_examples=25, deadline=None)
@given(st.lists(st.tuples(st.sampled_from(["NOT", "CNOT", "SWAP", "TOFFOLI"]), st.permutations(range(4))), max_size=8))
def test_random_circuits_place_consistently(gates):
    from .conftest import _catalog

    arity = {"NOT": 1, "CNOT": 2, "SWAP": 2, "TOFFOLI": 3}
    c = Circuit(4, tuple(Gate(GateKind(k), tuple(p[: arity[k]])) for k, p in gates))
    l = place(compile(c, _catalog()))
    _same_totals(count_resources(l), count_from_grid(l))
    assert count_resources(l).depth == (2 * toffoli_layer_count(c) if toffoli_layer_count(c) else (1 if gates else 0))
    validate_schedule(l)
