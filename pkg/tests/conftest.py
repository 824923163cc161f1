import numpy as np
import pytest

from homoqaoa import ClassSpec, precompute_all


@pytest.fixture(scope="session")
def er10_spec():
    return ClassSpec(kind="maxcut-er", n=10, p_e=1 / 3)


@pytest.fixture(scope="session")
def er10_table(er10_spec):
    return precompute_all(er10_spec)


@pytest.fixture(scope="session")
def er8_spec():
    return ClassSpec(kind="maxcut-er", n=8, p_e=0.5)


@pytest.fixture(scope="session")
def er8_table(er8_spec):
    return precompute_all(er8_spec)


@pytest.fixture(scope="session")
def hw8_spec():
    return ClassSpec(kind="hamming-weight", n=8)


@pytest.fixture(scope="session")
def hw8_table(hw8_spec):
    return precompute_all(hw8_spec)


def random_schedule(rng: np.random.Generator, p: int):
    from homoqaoa import Schedule

    return Schedule(
        gammas=rng.uniform(0.0, 2.0 * np.pi, p), betas=rng.uniform(0.0, np.pi, p)
    )
