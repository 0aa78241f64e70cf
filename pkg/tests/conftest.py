import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

finite = st.floats(min_value=-10, max_value=10, allow_nan=False, allow_infinity=False)


@st.composite
def sl2(draw):
    """Random traceless complex 2x2 matrix."""
    a, b, c, re, im = (draw(finite) for _ in range(5))
    b2, c2, a2 = (draw(finite) for _ in range(3))
    d = complex(a, a2)
    return np.array([[d, complex(b, b2)], [complex(c, c2), -d]])


@st.composite
def su2(draw):
    coords = draw(arrays(np.float64, 3, elements=finite))
    from nks.lie import su2_from_coords
    return su2_from_coords(coords)


@st.composite
def unitary(draw):
    """Random SU(2) element from a unit quaternion."""
    q = draw(arrays(np.float64, 4, elements=st.floats(-1, 1)))
    nrm = np.linalg.norm(q)
    if nrm < 1e-3:
        q, nrm = np.array([1.0, 0, 0, 0]), 1.0
    a, b, c, d = q / nrm
    return np.array([[a + 1j * b, c + 1j * d], [-c + 1j * d, a - 1j * b]])


@pytest.fixture
def rng():
    return np.random.default_rng(0)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
