"""Closed-form resource formulas and counted scaling sweeps."""

from __future__ import annotations

import csv
import enum
import io
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .circuit import build_adder, floor_log2, hamming_weight
from .layout import count_resources, place
from .optimize import optimize
from .pattern import GateCatalog, compile


class EstimateDomainError(ValueError):
    pass


def _clamped_floor_log2(num: int, den: int = 1) -> int:
    """floor(log2(num/den)), clamped at 0; exact for integers."""
    if num < den:
        return 0
    k = 0
    while (den << (k + 1)) <= num:
        k += 1
    return k


def qcla_depth_formula(n: int) -> int:
    """floor(lg n) + floor(lg(n-1)) + floor(lg(n/3)) + floor(lg((n-1)/3)) + 14, negative terms clamped to 0."""
    if n < 2:
        raise EstimateDomainError(f"depth formula needs n >= 2, got {n}")
    return (
        _clamped_floor_log2(n)
        + _clamped_floor_log2(n - 1)
        + _clamped_floor_log2(n, 3)
        + _clamped_floor_log2(n - 1, 3)
        + 14
    )


def qcla_area_formula(n: int) -> int:
    if n < 1:
        raise EstimateDomainError(f"n must be >= 1, got {n}")
    return 2896 * n + 64 * n * floor_log2(n)


def ripple_area_formula(n: int) -> int:
    if n < 1:
        raise EstimateDomainError(f"n must be >= 1, got {n}")
    return 304 * n


def optimized_area_term(n: int) -> int:
    if n < 1:
        raise EstimateDomainError(f"n must be >= 1, got {n}")
    return 336 * n + 210 * hamming_weight(n) + 14 * floor_log2(n)


# ---------------------------------------------------------------------------


class _Caseless(str, enum.Enum):
    @classmethod
    def _missing_(cls, value):
        if isinstance(value, str):
            for m in cls:
                if m.value == value.upper():
                    return m
        return None


class Adder(_Caseless):
    QCLA = "QCLA"
    RIPPLE = "RIPPLE"


class Variant(_Caseless):
    UNOPTIMIZED = "UNOPTIMIZED"
    OPTIMIZED = "OPTIMIZED"
    OPTIMAL = "OPTIMAL"
    FORMULA = "FORMULA"
    # the 336n + 210w(n) + 14 floor(lg n) expression, kept as a curve of its own
    FORMULA_OPT_TERM = "FORMULA_OPT_TERM"


COUNTED = (Variant.UNOPTIMIZED, Variant.OPTIMIZED, Variant.OPTIMAL)
CSV_HEADER = ("n", "adder", "variant", "depth", "area", "qubits", "clustering_ops")


@dataclass(frozen=True)
class ScalingRow:
    n: int
    adder: Adder
    variant: Variant
    depth: int | None = None
    area: int | None = None
    qubits: int | None = None
    clustering_ops: int | None = None

    @property
    def key(self) -> tuple[int, str, str]:
        return (self.n, self.adder.value, self.variant.value)


@dataclass
class ScalingTable:
    rows: list[ScalingRow] = field(default_factory=list)

    def __post_init__(self) -> None:
        keys = [r.key for r in self.rows]
        if len(set(keys)) != len(keys):
            raise ValueError("rows must be unique on (n, adder, variant)")
        self.rows.sort(key=lambda r: r.key)

    def get(self, n: int, adder: Adder | str, variant: Variant | str) -> ScalingRow:
        key = (n, Adder(adder).value, Variant(variant).value)
        for r in self.rows:
            if r.key == key:
                return r
        raise KeyError(key)

    def select(self, adder: Adder | str, variant: Variant | str) -> list[ScalingRow]:
        a, v = Adder(adder), Variant(variant)
        return [r for r in self.rows if r.adder is a and r.variant is v]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in self.rows:
            w.writerow(
                [r.n, r.adder.value, r.variant.value]
                + ["" if v is None else v for v in (r.depth, r.area, r.qubits, r.clustering_ops)]
            )
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "ScalingTable":
        reader = csv.DictReader(io.StringIO(text))
        if tuple(reader.fieldnames or ()) != CSV_HEADER:
            raise ValueError(f"unexpected CSV header {reader.fieldnames}")
        opt = lambda s: None if s == "" else int(s)  # noqa: E731
        rows = [
            ScalingRow(
                int(d["n"]),
                Adder(d["adder"]),
                Variant(d["variant"]),
                opt(d["depth"]),
                opt(d["area"]),
                opt(d["qubits"]),
                opt(d["clustering_ops"]),
            )
            for d in reader
        ]
        return cls(rows)


def formula_rows(n: int, adders: Iterable[Adder]) -> list[ScalingRow]:
    out = []
    for a in adders:
        if a is Adder.QCLA:
            depth = qcla_depth_formula(n) if n >= 2 else None
            out.append(ScalingRow(n, a, Variant.FORMULA, depth, qcla_area_formula(n)))
            out.append(ScalingRow(n, a, Variant.FORMULA_OPT_TERM, None, optimized_area_term(n)))
        else:
            out.append(ScalingRow(n, a, Variant.FORMULA, None, ripple_area_formula(n)))
    return out


def counted_rows(n: int, adder: Adder, variants: set[Variant], cat: GateCatalog) -> list[ScalingRow]:
    layout = place(compile(build_adder(adder.value.lower(), n), cat))
    before = count_resources(layout)
    out = []
    if Variant.UNOPTIMIZED in variants:
        out.append(ScalingRow(n, adder, Variant.UNOPTIMIZED, before.depth, before.area, before.qubits, before.clustering_ops))
    if Variant.OPTIMIZED in variants:
        _, rep = optimize(layout)
        a = rep.after
        out.append(ScalingRow(n, adder, Variant.OPTIMIZED, a.depth, a.area, a.qubits, a.clustering_ops))
    if Variant.OPTIMAL in variants:
        # computational sites only, packed without gaps
        comp_edges = sum(
            e["edges"] for k, e in before.per_kind.items() if k not in ("SWAP", "WIRE")
        )
        out.append(
            ScalingRow(
                n,
                adder,
                Variant.OPTIMAL,
                before.depth,
                before.computational_sites,
                before.computational_sites,
                comp_edges,
            )
        )
    return out


def sweep(
    n_values: Sequence[int],
    modes: Iterable[Variant | str],
    cat: GateCatalog | None = None,
    adders: Iterable[Adder | str] = (Adder.QCLA, Adder.RIPPLE),
) -> ScalingTable:
    n_values = list(n_values)
    if not n_values:
        raise ValueError("n_values must not be empty")
    modes = {Variant(m) for m in modes}
    adders = [Adder(a) for a in adders]
    counted = modes & set(COUNTED)
    if counted:
        if cat is None:
            raise ValueError("counted variants need a gate catalog")
        if not cat.verified:
            from .pattern import UnverifiedCatalogError

            raise UnverifiedCatalogError("counted sweeps need a verified catalog")
    rows: list[ScalingRow] = []
    for n in n_values:
        if Variant.FORMULA in modes or Variant.FORMULA_OPT_TERM in modes:
            rows += [
                r for r in formula_rows(n, adders) if r.variant in modes or Variant.FORMULA in modes
            ]
        for a in adders:
            if counted:
                rows += counted_rows(n, a, counted, cat)
    return ScalingTable(rows)


# ---------------------------------------------------------------------------
# analysis helpers


@dataclass(frozen=True)
class Fit:
    coefficients: tuple[float, ...]
    r_squared: float


def fit_through_origin(features: np.ndarray, y: Sequence[float]) -> Fit:
    """Least squares y ~ features @ c (no intercept); R^2 against the mean of y."""
    y = np.asarray(y, dtype=float)
    X = np.asarray(features, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    coef, *_ = np.linalg.lstsq(X, y, rcond=None)
    resid = y - X @ coef
    ss_res = float(resid @ resid)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    return Fit(tuple(float(c) for c in coef), 1.0 - ss_res / ss_tot if ss_tot else 1.0)


def fit_qcla_area(ns: Sequence[int], areas: Sequence[int]) -> Fit:
    """area ~ a*n + b*n*floor(lg n)."""
    ns = np.asarray(ns)
    return fit_through_origin(np.column_stack([ns, ns * np.array([floor_log2(int(n)) for n in ns])]), areas)


def fit_ripple_area(ns: Sequence[int], areas: Sequence[int]) -> Fit:
    """area ~ c*n."""
    return fit_through_origin(np.asarray(ns, dtype=float), areas)


def depth_crossover(ripple_depths: dict[int, int]) -> int | None:
    """Smallest n such that the formula depth beats the counted ripple depth from there on."""
    ns = sorted(n for n in ripple_depths if n >= 2)
    cross = None
    for n in ns:
        if qcla_depth_formula(n) < ripple_depths[n]:
            if cross is None:
                cross = n
        else:
            cross = None
    return cross
