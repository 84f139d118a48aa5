import pytest

from skeldiff import parse
from skeldiff.seedgen import default_corpus

# the running example: two global variables plus one branch-local one,
# seven classical holes, one angle hole, two qubit holes
EXAMPLE_SRC = """qubits 3
a = 1
b = 0
t q[0]
if a {
  rx(0.123) q[1]
  c = 3
  b = c + a
}
"""

# same shape but only the two global variables (single-partition case)
EXAMPLE_SRC_2VAR = """qubits 3
a = 1
b = 0
t q[0]
if a {
  rx(0.123) q[1]
  b = 3
  b = b + a
}
"""


@pytest.fixture
def example_program():
    return parse(EXAMPLE_SRC, "example")


@pytest.fixture
def example_program_2var():
    return parse(EXAMPLE_SRC_2VAR, "example2v")


@pytest.fixture(scope="session")
def corpus():
    """The 20-seed corpus: 5 hand-written + 15 generated."""
    return default_corpus(generated=15)
