import numpy as np
import pytest

from qcfa.machine import fixture_path, load_machine, to_convenient_form
from qcfa.quantum import KrausFamily


def corrupt_kraus(spec, state, symbol, scale):
    """Copy of ``spec`` with one Kraus family scaled, bypassing validation.

    Construction validates completeness, so building a deliberately broken
    machine for detector tests requires going behind the frozen dataclass.
    """
    fam = spec.theta[(state, symbol)]
    bad = KrausFamily(
        fam.results,
        {r: tuple(scale * e for e in fam.operators(r)) for r in fam.results},
        fam.index_bound,
    )
    theta = dict(spec.theta)
    theta[(state, symbol)] = bad
    import copy

    broken = copy.copy(spec)
    object.__setattr__(broken, "theta", theta)
    return broken


@pytest.fixture(scope="session")
def parity():
    return load_machine(fixture_path("parity"))


@pytest.fixture(scope="session")
def rotation():
    return load_machine(fixture_path("rotation"))


@pytest.fixture(scope="session")
def coin():
    return load_machine(fixture_path("coin"))


@pytest.fixture(scope="session")
def parity_conv(parity):
    return to_convenient_form(parity)


@pytest.fixture(scope="session")
def rotation_conv(rotation):
    return to_convenient_form(rotation)


@pytest.fixture(scope="session")
def coin_conv(coin):
    return to_convenient_form(coin)


@pytest.fixture()
def rng():
    return np.random.Generator(np.random.Philox(20260810))
