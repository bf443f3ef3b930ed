"""Acceptance criteria 1-8, each printing one PASS/FAIL line with the measured numbers."""

import itertools

import pytest

from mbqcla.circuit import build_adder, eval_circuit, toffoli_layer_count
from mbqcla.estimate import (
    EstimateDomainError,
    Variant,
    fit_qcla_area,
    fit_ripple_area,
    optimized_area_term,
    qcla_area_formula,
    qcla_depth_formula,
    ripple_area_formula,
    sweep,
)
from mbqcla.layout import count_resources
from mbqcla.optimize import optimize
from mbqcla.pattern import GateKind, load_catalog, verify_catalog
from mbqcla.sim import simulate_pattern

from .conftest import layout_for

FIT_NS = (8, 16, 32, 64, 128)


@pytest.fixture()
def report(capsys):
    def emit(label: str, ok: bool, detail: str) -> None:
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {label}: {detail}")
        assert ok, detail

    return emit


def test_1_formula_fidelity(report):
    table = {
        # n: (depth, qcla area, ripple area, optimized term)
        1: (None, 2896, 304, 546),
        4: (17, 12096, 1216, 1582),
        7: (20, 21168, 2128, 3010),
        8: (21, 24704, 2432, 2940),
        100: (36, 328000, 30400, 34314),
        128: (37, 428032, 38912, 43316),
    }
    bad = []
    for n, (d, qa, ra, ot) in table.items():
        if d is None:
            try:
                qcla_depth_formula(n)
                bad.append((n, "depth defined below n=2"))
            except EstimateDomainError:
                pass
        elif qcla_depth_formula(n) != d:
            bad.append((n, "depth", qcla_depth_formula(n)))
        got = (qcla_area_formula(n), ripple_area_formula(n), optimized_area_term(n))
        if got != (qa, ra, ot):
            bad.append((n, got))
    report("1 formula fidelity", not bad, f"{len(table)} values of n checked, mismatches {bad}")


def test_2_order_of_magnitude_area(report):
    ratios = [qcla_area_formula(n) / ripple_area_formula(n) for n in range(8, 1025)]
    lo, hi = min(ratios), max(ratios)
    report("2 area ratio", 9 <= lo and hi <= 13, f"qcla/ripple formula area ratio in [{lo:.2f}, {hi:.2f}] for n=8..1024")


def test_3_depth_separation(report):
    dq = count_resources(layout_for("qcla", 128)).depth
    dr = count_resources(layout_for("ripple", 128)).depth
    offsets = {
        n: count_resources(layout_for("qcla", n)).depth - 2 * toffoli_layer_count(build_adder("qcla", n))
        for n in (4, 8, 16, 32, 64)
    }
    ok = dr / dq >= 8 and len(set(offsets.values())) == 1
    report(
        "3 depth separation",
        ok,
        f"n=128 depth ripple {dr} / qcla {dq} = {dr / dq:.2f}; c0 over n=4..64: {sorted(set(offsets.values()))}",
    )


def test_4a_optimization_reduction(report):
    fr = {n: optimize(layout_for("qcla", n))[1].area_reduction_fraction for n in (32, 64)}
    ok = all(0.16 <= f <= 0.36 for f in fr.values())
    report("4a area reduction", ok, ", ".join(f"n={n}: {f:.4f}" for n, f in fr.items()) + " (band 0.16-0.36)")


def _areas(adder: str) -> dict[str, list[int]]:
    return {
        "unoptimized": [count_resources(layout_for(adder, n)).area for n in FIT_NS],
        "optimized": [count_resources(layout_for(adder, n, True)).area for n in FIT_NS],
    }


def test_4b_qcla_area_fit(report):
    fits = {k: fit_qcla_area(FIT_NS, v) for k, v in _areas("qcla").items()}
    ok = all(f.r_squared >= 0.99 for f in fits.values())
    detail = "; ".join(
        f"{k}: R^2={f.r_squared:.4f} a={f.coefficients[0]:.1f} b={f.coefficients[1]:.1f}" for k, f in fits.items()
    )
    report("4b qcla area ~ a n + b n lg n", ok, detail)


def test_4c_ripple_area_fit(report):
    fits = {k: fit_ripple_area(FIT_NS, v) for k, v in _areas("ripple").items()}
    ok = all(f.r_squared >= 0.99 for f in fits.values())
    detail = "; ".join(f"{k}: R^2={f.r_squared:.4f} c={f.coefficients[0]:.1f}" for k, f in fits.items())
    report("4c ripple area ~ c n", ok, detail)


def test_5_end_to_end(report):
    cases = [("qcla", 2), ("ripple", 2), ("qcla", 3)]
    wrong = []
    runs = 0
    for kind, n in cases:
        for opt in (False, True):
            l = layout_for(kind, n, opt)
            for a, b in itertools.product(range(1 << n), repeat=2):
                runs += 1
                got = simulate_pattern(l, a, b, seed=runs).sum
                if got != eval_circuit(l.circuit, a, b):
                    wrong.append((kind, n, opt, a, b, got))
    sums = {simulate_pattern(layout_for("qcla", 2), 3, 1, seed).sum for seed in range(100)}
    ok = not wrong and sums == {4}
    report("5 end-to-end simulation", ok, f"{runs} simulated additions, {len(wrong)} wrong; 100 seeds gave sums {sums}")


def test_6_catalog_semantics(report):
    rep = verify_catalog(load_catalog("default"))
    rounds = {e.kind.value: e.rounds for e in rep.entries}
    want = {k.value: (2 if k.is_toffoli else 1) for k in GateKind}
    ok = rep.passed and len(rep.entries) == 6 and rep.max_deviation < 1e-9 and rounds == want
    report("6 catalog semantics", ok, f"max deviation {rep.max_deviation:.2e}; rounds {rounds}")


def test_7_classical_oracle(report):
    checked = 0
    bad = []
    for kind in ("ripple", "qcla"):
        for n in range(1, 5):
            c = build_adder(kind, n)
            for a, b in itertools.product(range(1 << n), repeat=2):
                checked += 1
                if eval_circuit(c, a, b) != a + b:
                    bad.append((kind, n, a, b))
    report("7 classical oracle", not bad, f"{checked} pairs checked, {len(bad)} wrong")


def test_8_classification_partition(report, catalog):
    ns = list(range(1, 17)) + [32, 64]
    bad = []
    layouts = 0
    for kind in ("qcla", "ripple"):
        for n in ns:
            for opt in (False, True):
                r = count_resources(layout_for(kind, n, opt))
                layouts += 1
                if r.computational_sites + r.communication_sites != r.qubits:
                    bad.append((kind, n, opt))
    table = sweep(ns, {Variant.UNOPTIMIZED, Variant.OPTIMAL}, catalog)
    for row in table.select("qcla", "optimal") + table.select("ripple", "optimal"):
        comp = count_resources(layout_for(row.adder.value.lower(), row.n)).computational_sites
        if not (row.qubits == row.area == comp):
            bad.append((row.adder.value, row.n, "optimal"))
    report("8 classification partition", not bad, f"{layouts} layouts and {2 * len(ns)} optimal rows, violations {bad}")
