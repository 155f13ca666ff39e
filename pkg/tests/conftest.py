import pytest

from app import create_app
from src.services.realization_service import Closure, RealizationService, Section
from src.utils.dparse import parse_matrix
from src.utils.linear_code import LinearCode

EXAMPLE1_GENERATORS = "1+D^2, 1+D+D^2"
EXAMPLE2_GENERATORS = "1+D^2, 2+D, 0; 1, 0, 2"


@pytest.fixture
def app():
    """Create application for testing."""
    test_config = {
        "TESTING": True,
        "NR_ENUMERATION_BUDGET": 2**20,
    }

    app = create_app(test_config)
    return app


@pytest.fixture
def client(app):
    """Create test client."""
    return app.test_client()


@pytest.fixture
def runner(app):
    """Create test runner."""
    return app.test_cli_runner()


@pytest.fixture
def example1_matrix():
    """Rate-1/2 binary code with generators (1+D^2, 1+D+D^2)."""
    return parse_matrix(EXAMPLE1_GENERATORS, 2)


@pytest.fixture
def example2_matrix():
    """Rate-2/3 ternary code with two rows of generators."""
    return parse_matrix(EXAMPLE2_GENERATORS, 3)


@pytest.fixture
def example1_realization(example1_matrix):
    return RealizationService().build_trellis(example1_matrix, 1, Closure.SECTION)


@pytest.fixture
def example2_realization(example2_matrix):
    return RealizationService().build_trellis(example2_matrix, 1, Closure.SECTION)


@pytest.fixture
def example1_section(example1_realization):
    """The (6, 3) section code with 2-bit states and a 2-bit symbol."""
    return Section.from_block(example1_realization, "C0")


@pytest.fixture
def example2_section(example2_realization):
    """The (7, 4) ternary section code with 2-trit states and a 3-trit symbol."""
    return Section.from_block(example2_realization, "C0")


@pytest.fixture
def spc_section():
    """Binary single parity check (3, 2) read as 1-bit state | symbol | state."""
    code = LinearCode.from_digit_strings(2, ["011", "101"])
    return Section.from_code(
        code, left_dim=1, symbol_dims=[1], right_dim=1, label="SPC"
    )


@pytest.fixture
def hamming_code():
    """Binary (7, 4) Hamming code in systematic form."""
    return LinearCode.from_digit_strings(
        2, ["1000110", "0100011", "0010111", "0001101"]
    )


class TestUtils:
    """Utility class for test helpers."""

    @staticmethod
    def random_code(rng, p, n, k):
        """Row space of k random vectors of length n over Z_p."""
        rows = [[rng.randrange(p) for _ in range(n)] for _ in range(k)]
        return LinearCode.from_rows(p, n, rows)

    @staticmethod
    def random_values(rng, count, low=-5, high=5):
        return [rng.randint(low, high) for _ in range(count)]


@pytest.fixture
def test_utils():
    """Provide test utility functions."""
    return TestUtils
