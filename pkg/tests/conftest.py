import numpy as np
import pytest

from cdbeam import LoadCase, Mesh, SolverSettings, SupportSpec, derive_constants
from cdbeam.fem import assemble


@pytest.fixture(scope="session")
def props():
    """Reference beam: E=1000 Pa, mu=0.3, L=1 m, height 0.1 m (h=0.05)."""
    return derive_constants(1000.0, 0.3, 1.0, 0.05)


@pytest.fixture(scope="session")
def settings():
    return SolverSettings()


@pytest.fixture(scope="session")
def ss():
    return SupportSpec.simply_supported()


def make_system(props, lam=0.01, f=0.1, support=None, m=6, kind="uniform"):
    support = support or SupportSpec.simply_supported()
    load = LoadCase.uniform(f, lam) if kind == "uniform" else LoadCase.center_point(f, lam)
    return assemble(props, load, support, Mesh(m, props.L))


@pytest.fixture(scope="session")
def sys6(props):
    """Simply supported, uniform 0.1 N/m, lambda=0.01, m=6."""
    return make_system(props)


def rng_for(name):
    return np.random.default_rng(abs(hash(name)) % 2**32)
