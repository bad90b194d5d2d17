import numpy as np
import pytest

import relicomp as rc

# Two-component reference system used across the suite: the bundled fixture
# carries the same numbers, these are the in-memory equivalents.
C1 = (69.0, 4.3553e-5, 91208.0)
C2 = (74.0, 2.7482e-5, 91208.0)
BASELINE = (142.0, 3.48e-5, 91208.0)
TAU_PREV = 88682.0


@pytest.fixture(scope="session")
def ref_models():
    m1 = rc.GoelOkumoto.from_params(*C1)
    m2 = rc.GoelOkumoto.from_params(*C2)
    return m1, m2


@pytest.fixture(scope="session")
def ref_baseline():
    return rc.GoelOkumoto.from_params(*BASELINE)


@pytest.fixture(scope="session")
def ref_config(ref_models, ref_baseline):
    m1, m2 = ref_models
    return rc.SystemConfig(
        components={"c1": m1, "c2": m2},
        paths=[rc.PathSpec(("c1", "c2"), 1.0, TAU_PREV)],
        system_last_failure=TAU_PREV,
        baseline=ref_baseline,
    )


@pytest.fixture(scope="session")
def ref_system(ref_config):
    return rc.build_system(ref_config)


@pytest.fixture(scope="session")
def fixture_path():
    from importlib import resources

    with resources.as_file(
        resources.files("relicomp") / "fixtures" / "reference-system.json"
    ) as p:
        yield p


def horizon_grid(upper=30000.0, n=257):
    return np.linspace(0.0, upper, n)[1:]
