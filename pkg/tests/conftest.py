import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from cpoconv.tensor import ActivationMap, ConvConfig

# first calls compile the numba kernels, which blows any per-example deadline
settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def example8():
    from oracles import example8_map
    return ActivationMap(example8_map()), ConvConfig.valid(8, 8, 4, 4)


@pytest.fixture
def rng():
    return np.random.Generator(np.random.PCG64(1234))


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for cid in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[cid])
