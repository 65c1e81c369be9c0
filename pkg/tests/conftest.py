import numpy as np
import pytest
from hypothesis import assume, settings, strategies as st

from b3rep import spectra as sp
from b3rep.errors import DegenerateSpectrumError

settings.register_profile("default", deadline=None, max_examples=40)
settings.load_profile("default")

ACCEPTANCE_LINES = []


def random_spectrum(rng, d, branch=None, min_sep=0.0):
    """Uniform angles with t_1 = 0; a random gamma branch for d = 4, 5 unless given."""
    while True:
        t = [0.0] + list(rng.random(d - 1))
        b = branch if branch is not None or d < 4 else int(rng.integers(sp.n_branches(d)))
        try:
            s = sp.spectrum_from_angles(d, t, b)
        except DegenerateSpectrumError:
            continue
        if s.min_separation() > min_sep and sp.is_simple(s):
            return s


@st.composite
def spectra(draw, dims=(2, 3, 4, 5), min_sep=1e-2):
    d = draw(st.sampled_from(dims))
    t = [0.0] + [draw(st.floats(0.0, 1.0, exclude_max=True)) for _ in range(d - 1)]
    b = draw(st.integers(0, sp.n_branches(d) - 1)) if d >= 4 else None
    lam = np.exp(2j * np.pi * np.array(t))
    seps = [abs(lam[j] - lam[k]) for j in range(d) for k in range(j + 1, d)]
    assume(min(seps) > min_sep)
    return sp.spectrum_from_angles(d, t, b)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
