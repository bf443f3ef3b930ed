import functools

import pytest

from mbqcla.circuit import build_adder
from mbqcla.layout import place
from mbqcla.optimize import optimize
from mbqcla.pattern import compile, load_catalog, verify_catalog


@functools.lru_cache(maxsize=None)
def _catalog():
    cat = load_catalog("default")
    assert verify_catalog(cat).passed
    return cat


@functools.lru_cache(maxsize=None)
def layout_for(kind: str, n: int, optimized: bool = False):
    l = place(compile(build_adder(kind, n), _catalog()))
    if optimized:
        l, _ = optimize(l)
    return l


@pytest.fixture(scope="session")
def catalog():
    return _catalog()


@pytest.fixture(scope="session")
def layouts():
    return layout_for
