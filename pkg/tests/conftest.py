import numpy as np
import pytest

from shockselect.model import DECREASING_INCREASING, DiffusivityModel, ReactionModel, classify_shape
from shockselect.shock import continuous_diffusivity_shock, equal_area_shock, knee_shocks

# acceptance outcomes collected by test_acceptance, printed at the end of the run
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def record(number: int, passed: bool, detail: str) -> None:
    ACCEPTANCE[number] = (passed, detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"C{n:<2} {'PASS' if passed else 'FAIL'}  {detail}")


@pytest.fixture(scope="session")
def cubic():
    return DiffusivityModel.cubic(0.2, 0.4, 0.5)


@pytest.fixture(scope="session")
def symmetric():
    return DiffusivityModel.cubic(0.2, 0.4, 0.0)


@pytest.fixture(scope="session")
def reaction():
    return ReactionModel("cubic", 0.5)


@pytest.fixture(scope="session")
def ea_shock(cubic):
    return equal_area_shock(cubic)


@pytest.fixture(scope="session")
def cd_shock(cubic):
    return continuous_diffusivity_shock(cubic)


def random_cubic_models(n, seed, delta_range=(-0.6, 0.6)):
    """Admissible decreasing-increasing cubic models drawn reproducibly."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        a = rng.uniform(0.1, 0.4)
        b = rng.uniform(a + 0.1, 0.7)
        delta = rng.uniform(*delta_range)
        try:
            m = DiffusivityModel.cubic(a, b, delta)
            knee_shocks(m)   # outer branches must span [Phi(beta), Phi(alpha)]
        except ValueError:
            continue
        if classify_shape(m) == DECREASING_INCREASING:
            out.append(m)
    return out
