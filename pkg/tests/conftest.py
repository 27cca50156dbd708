import numpy as np
import pytest
from scipy.stats import unitary_group

from locdisc.families import StateSet
from locdisc.states import StateVector, local_unitary

# criterion id -> (passed, detail); filled by test_acceptance.py
CRITERIA = {}


def random_state(rng, dim_a, dim_b):
    z = rng.standard_normal(dim_a * dim_b) + 1j * rng.standard_normal(dim_a * dim_b)
    return StateVector(dim_a, dim_b, z)


def random_unitary(rng, dim):
    return unitary_group.rvs(dim, random_state=rng)


def rotate_set(s, ua, ub):
    return StateSet(tuple(local_unitary(x, ua, ub) for x in s.states), "custom")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for cid in sorted(CRITERIA, key=lambda c: int(c[1:])):
        ok, detail = CRITERIA[cid]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} {cid}: {detail}")
