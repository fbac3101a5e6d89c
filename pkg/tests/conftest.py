import numpy as np
import pytest

from steinpairs.fixtures import beta_spec, exponential_spec, named_test_function, normal_spec


@pytest.fixture(scope="session")
def beta_2_3():
    return beta_spec(2.0, 3.0)


@pytest.fixture(scope="session")
def beta_half_2():
    return beta_spec(0.5, 2.0)


@pytest.fixture(scope="session")
def std_normal():
    return normal_spec()


@pytest.fixture(scope="session")
def exponential_1():
    return exponential_spec(1.0)


@pytest.fixture(scope="session")
def h_x():
    return named_test_function("x")


@pytest.fixture(scope="session")
def h_x2():
    return named_test_function("x2")


@pytest.fixture(scope="session")
def h_smoothstep():
    return named_test_function("smoothstep")


def finite_difference(fn, x: float, step: float = 1e-6) -> float:
    """Central difference; the independent check of analytic derivatives."""
    return (fn(x + step) - fn(x - step)) / (2.0 * step)


def grid_avoiding_kinks(xs: np.ndarray, kinks, width: float = 1e-4) -> np.ndarray:
    """Drop grid points too close to declared derivative kinks."""
    xs = np.asarray(xs, dtype=float)
    keep = np.ones(xs.shape, dtype=bool)
    for k in kinks:
        keep &= np.abs(xs - k) > width
    return xs[keep]
