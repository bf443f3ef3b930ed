"""Command-line entry point: ``mbqcla <command> [flags]``.

Exit status 0 on success, 1 on usage errors, 2 on verification or semantic
failures. Every error goes to stderr as one line ``mbqcla:error:<kind>: msg``.
"""

from __future__ import annotations

import argparse
import json
import secrets
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .circuit import CircuitError, build_adder, eval_circuit
from .estimate import Adder, Variant, sweep
from .layout import ClusterLayout, count_resources, place
from .optimize import optimize
from .pattern import CatalogError, RoutingError, compile, load_catalog, verify_catalog
from .sim import SimulationError, simulate_pattern

ASCII_LIMIT = 2_000_000  # sites; larger grids are left out of JSON output


class UsageError(Exception):
    pass


class SemanticError(Exception):
    def __init__(self, kind: str, msg: str):
        super().__init__(msg)
        self.kind = kind


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse would exit(2)
        raise UsageError(message)


@dataclass(frozen=True)
class RunConfig:
    command: str
    adders: tuple[str, ...]
    ns: tuple[int, ...]
    catalog: str
    seed: int
    out: Path | None
    fmt: str
    variant: str
    a: int | None = None
    b: int | None = None
    exhaustive: bool = False


def parse_n_list(text: str) -> tuple[int, ...]:
    """Comma-separated values and inclusive ``a:b:step`` ranges, e.g. ``2,4,8:64:8``."""
    out: list[int] = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        try:
            if ":" in part:
                bits = [int(x) for x in part.split(":")]
                if len(bits) == 2:
                    bits.append(1)
                if len(bits) != 3 or bits[2] <= 0:
                    raise ValueError
                out.extend(range(bits[0], bits[1] + 1, bits[2]))
            else:
                out.append(int(part))
        except ValueError:
            raise UsageError(f"bad --n entry {part!r}") from None
    if not out:
        raise UsageError("--n is empty")
    if any(n < 1 for n in out):
        raise UsageError("every n must be >= 1")
    return tuple(dict.fromkeys(out))


def _parser() -> argparse.ArgumentParser:
    p = _Parser(prog="mbqcla", description="MBQC adder compiler, optimiser, estimator and simulator")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    common = _Parser(add_help=False)
    common.add_argument("--adder", choices=["ripple", "qcla", "both"], default="qcla")
    common.add_argument("--n", default="4", help="comma list and/or a:b:step ranges (inclusive)")
    common.add_argument("--catalog", default="default", help="catalog JSON path or 'default'")
    common.add_argument(
        "--variant", choices=["unoptimized", "optimized", "optimal", "formula", "all"], default=None
    )
    common.add_argument("--a", type=int, default=None)
    common.add_argument("--b", type=int, default=None)
    common.add_argument("--seed", default="0", help="integer, or 'random' to draw one (printed to stderr)")
    common.add_argument("--exhaustive", action="store_true")
    common.add_argument("--out", type=Path, default=None)
    common.add_argument("--format", dest="fmt", choices=["json", "csv", "ascii"], default=None)
    for name, help_ in [
        ("build", "emit the circuit as JSON"),
        ("compile", "compile and place; emit layout and resource report"),
        ("optimize", "emit the optimised layout and optimisation report"),
        ("simulate", "run the measurement pattern on (a, b) or on all pairs"),
        ("sweep", "emit the scaling table as CSV"),
        ("verify-catalog", "check every catalog entry by simulation"),
    ]:
        sub.add_parser(name, parents=[common], help=help_)
    return p


def _config(argv: Sequence[str]) -> RunConfig:
    ns = _parser().parse_args(list(argv))
    adders = ("qcla", "ripple") if ns.adder == "both" else (ns.adder,)
    if ns.seed == "random":
        seed = secrets.randbits(32)
        print(f"mbqcla:seed: {seed}", file=sys.stderr)
    else:
        try:
            seed = int(ns.seed)
        except ValueError:
            raise UsageError(f"--seed must be an integer or 'random', got {ns.seed!r}") from None
    defaults = {"sweep": ("csv", "all"), "simulate": ("json", "unoptimized")}
    fmt_default, variant_default = defaults.get(ns.command, ("json", "unoptimized"))
    return RunConfig(
        command=ns.command,
        adders=adders,
        ns=parse_n_list(ns.n),
        catalog=ns.catalog,
        seed=seed,
        out=ns.out,
        fmt=ns.fmt or fmt_default,
        variant=ns.variant or variant_default,
        a=ns.a,
        b=ns.b,
        exhaustive=ns.exhaustive,
    )


def _single(cfg: RunConfig) -> tuple[str, int]:
    if len(cfg.adders) != 1 or len(cfg.ns) != 1:
        raise UsageError(f"{cfg.command} takes a single --adder and a single --n")
    return cfg.adders[0], cfg.ns[0]


def _catalog(cfg: RunConfig):
    cat = load_catalog(cfg.catalog)
    report = verify_catalog(cat)
    if not report.passed:
        bad = ", ".join(e.kind.value for e in report.entries if not e.passed)
        raise SemanticError("verification", f"catalog entries failed verification: {bad}")
    return cat


def _layout(cfg: RunConfig) -> ClusterLayout:
    kind, n = _single(cfg)
    cat = _catalog(cfg)
    layout = place(compile(build_adder(kind, n), cat))
    if cfg.variant == "optimized":
        layout, _ = optimize(layout)
    elif cfg.variant not in ("unoptimized",):
        raise UsageError(f"--variant {cfg.variant} is not a layout; use unoptimized or optimized")
    return layout


def _ascii_or_none(l: ClusterLayout) -> str | None:
    return l.to_ascii() if l.area <= ASCII_LIMIT else None


def _dump(obj) -> str:
    return json.dumps(obj, indent=1, sort_keys=True) + "\n"


def _cmd_build(cfg: RunConfig) -> str:
    kind, n = _single(cfg)
    if cfg.fmt != "json":
        raise UsageError("build only emits json")
    return build_adder(kind, n).to_json() + "\n"


def _cmd_compile(cfg: RunConfig) -> str:
    l = _layout(cfg)
    rep = count_resources(l)
    if cfg.fmt == "ascii":
        return l.to_ascii() + "\n"
    if cfg.fmt == "csv":
        raise UsageError("compile emits json or ascii")
    return _dump({"layout": l.to_dict(), "report": rep.to_dict()})


def _cmd_optimize(cfg: RunConfig) -> str:
    kind, n = _single(cfg)
    cat = _catalog(cfg)
    before = place(compile(build_adder(kind, n), cat))
    after, rep = optimize(before)
    if cfg.fmt == "ascii":
        return before.to_ascii() + "\n\n" + after.to_ascii() + "\n"
    if cfg.fmt == "csv":
        raise UsageError("optimize emits json or ascii")
    return _dump(
        {
            "layout": after.to_dict(),
            "report": rep.to_dict(),
            "before_ascii": _ascii_or_none(before),
            "after_ascii": _ascii_or_none(after),
        }
    )


def _cmd_simulate(cfg: RunConfig) -> str:
    if cfg.fmt != "json":
        raise UsageError("simulate emits json")
    l = _layout(cfg)
    c = l.circuit
    if cfg.exhaustive:
        pairs = [(a, b) for a in range(1 << c.n_bits) for b in range(1 << c.n_bits)]
    else:
        if cfg.a is None or cfg.b is None:
            raise UsageError("simulate needs --a and --b, or --exhaustive")
        pairs = [(cfg.a, cfg.b)]
    try:
        results = []
        for a, b in pairs:
            out = simulate_pattern(l, a, b, cfg.seed)
            results.append((out, eval_circuit(c, a, b)))
    except CircuitError as exc:
        raise UsageError(str(exc)) from None
    if not cfg.exhaustive:
        out, expected = results[0]
        if out.sum != expected:
            raise SemanticError("semantic", f"pattern gave {out.sum}, circuit gives {expected}")
        return out.to_json() + "\n"
    rows = [{"a": o.a, "b": o.b, "sum": o.sum, "expected": e, "ok": o.sum == e} for o, e in results]
    body = _dump({"seed": cfg.seed, "all_ok": all(r["ok"] for r in rows), "results": rows})
    if not all(r["ok"] for r in rows):
        bad = next(r for r in rows if not r["ok"])
        cfg_out(cfg, body)
        raise SemanticError("semantic", f"a={bad['a']} b={bad['b']}: pattern gave {bad['sum']}, expected {bad['expected']}")
    return body


def _cmd_sweep(cfg: RunConfig) -> str:
    variants = (
        [Variant.UNOPTIMIZED, Variant.OPTIMIZED, Variant.OPTIMAL, Variant.FORMULA]
        if cfg.variant == "all"
        else [Variant(cfg.variant)]
    )
    counted = any(v is not Variant.FORMULA for v in variants)
    cat = _catalog(cfg) if counted else None
    table = sweep(cfg.ns, variants, cat, adders=[Adder(a) for a in cfg.adders])
    if cfg.fmt == "csv":
        return table.to_csv()
    if cfg.fmt == "json":
        return _dump([r.__dict__ | {"adder": r.adder.value, "variant": r.variant.value} for r in table.rows])
    raise UsageError("sweep emits csv or json")


def _cmd_verify(cfg: RunConfig) -> str:
    cat = load_catalog(cfg.catalog)
    report = verify_catalog(cat)
    body = _dump(report.to_dict())
    if not report.passed:
        cfg_out(cfg, body)
        bad = ", ".join(e.kind.value for e in report.entries if not e.passed)
        raise SemanticError("verification", f"failed entries: {bad or 'wire_unit'}")
    return body


COMMANDS = {
    "build": _cmd_build,
    "compile": _cmd_compile,
    "optimize": _cmd_optimize,
    "simulate": _cmd_simulate,
    "sweep": _cmd_sweep,
    "verify-catalog": _cmd_verify,
}


def cfg_out(cfg: RunConfig, text: str) -> None:
    if cfg.out is None:
        sys.stdout.write(text)
    else:
        cfg.out.write_text(text)


def _fail(kind: str, msg: str, code: int) -> int:
    print(f"mbqcla:error:{kind}: {msg}", file=sys.stderr)
    return code


def run(argv: Sequence[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        cfg = _config(argv)
        text = COMMANDS[cfg.command](cfg)
        cfg_out(cfg, text)
        return 0
    except UsageError as exc:
        return _fail("usage", str(exc), 1)
    except SemanticError as exc:
        return _fail(exc.kind, str(exc), 2)
    except CatalogError as exc:
        return _fail("catalog", str(exc), 2)
    except (SimulationError, RoutingError) as exc:
        return _fail("semantic", str(exc), 2)
    except CircuitError as exc:
        return _fail("usage", str(exc), 1)
    except OSError as exc:
        return _fail("io", str(exc), 1)


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
