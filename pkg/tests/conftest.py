import pytest

from mordrive.drive_model import derive_model, worked_example_params
from mordrive.poly_tf import Polynomial, TransferFunction, poly_mul


@pytest.fixture(scope="session")
def model():
    """Derived model of the built-in 220 V, 8.3 A benchmark drive."""
    return derive_model(worked_example_params())


@pytest.fixture(scope="session")
def bench_den():
    """Benchmark third-order loop denominator from its quoted factors."""
    return poly_mul(
        poly_mul(Polynomial([1.0, 0.1077]), Polynomial([1.0, 0.0208])),
        Polynomial([1.0, 0.00138]))


@pytest.fixture(scope="session")
def bench_loop(bench_den):
    """Benchmark loop shape (unit gain): (1 + 0.03 s) over the cubic."""
    return TransferFunction(Polynomial([1.0, 0.03]), bench_den)
