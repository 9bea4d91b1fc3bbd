import numpy as np
import pytest
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from putlab import JointPmf, Mechanism
from putlab.prob import Alphabet


def dirichlet_joint(rng, ns, nx, alpha=1.0) -> JointPmf:
    return JointPmf.from_array(rng.dirichlet(np.full(ns * nx, alpha)).reshape(ns, nx))


def loop_finfo(f, joint) -> float:
    """f-information by explicit double loop, used as an independent oracle."""
    a = np.asarray(joint, dtype=float)
    pu, pv = a.sum(axis=1), a.sum(axis=0)
    total = 0.0
    for i in range(a.shape[0]):
        for j in range(a.shape[1]):
            prod = pu[i] * pv[j]
            if prod > 0:
                total += prod * float(f(a[i, j] / prod))
    return total


@st.composite
def joints(draw, max_s=4, max_x=4, min_x=1):
    ns = draw(st.integers(1, max_s))
    nx = draw(st.integers(min_x, max_x))
    w = draw(arrays(np.float64, (ns, nx), elements=st.floats(0.0, 1.0)))
    if w.sum() < 1e-3:
        w = w + 1.0
    return JointPmf.from_array(w / w.sum())


@st.composite
def mechanisms_for(draw, nx, max_y=5):
    ny = draw(st.integers(1, max_y))
    w = draw(arrays(np.float64, (nx, ny), elements=st.floats(0.0, 1.0)))
    w = w + 1e-3
    return Mechanism(Alphabet.range(nx, "x"), Alphabet.range(ny, "y"), w / w.sum(axis=1, keepdims=True))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# one line per acceptance criterion, printed at the end of the session
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split("]")[0].split("[")[1])):
            terminalreporter.write_line(line)
