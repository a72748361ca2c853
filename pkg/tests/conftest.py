import json
from pathlib import Path

import pytest
from hypothesis import strategies as st

from ffmisinfo.model import RATE_NAMES, ModelParams
from ffmisinfo.presets import preset_params

DATA = Path(__file__).parent / "data"

# filled by test_acceptance.py, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)

# shared decoupled-decay parameters: beta = Pi = 0, lambda = sigma + nu = 0.15
DECAY = dict(
    Pi=0.0, beta=0.0, sigma=0.05, nu=0.1,
    gamma1=0.05, gamma2=0.05, gamma3=0.05, gamma4=0.02,
    tau=0.02, tau1=0.05, tau2=0.05, tau3=0.05, tau4=0.05,
    phi1=0.03, phi2=0.03,
)


def example_params(**kw) -> ModelParams:
    """Pi=1, beta=0.5, sigma=nu=0.1, gammas/taus/phis 0.05, tau=0.02 (j1 = 0.35)."""
    base = dict(
        Pi=1.0, beta=0.5, sigma=0.1, nu=0.1,
        gamma1=0.05, gamma2=0.05, gamma3=0.05, gamma4=0.05,
        tau=0.02, tau1=0.05, tau2=0.05, tau3=0.05, tau4=0.05,
        phi1=0.05, phi2=0.05,
    )
    base.update(kw)
    return ModelParams(**base)


@pytest.fixture(scope="session")
def ml_oracle():
    return json.loads((DATA / "ml_oracle.json").read_text())


@pytest.fixture
def endemic():
    return preset_params("endemic")


@pytest.fixture
def disease_free():
    return preset_params("disease_free")


@pytest.fixture
def decay_params():
    return ModelParams(**DECAY)


rate = st.floats(0.01, 0.7, allow_nan=False)


@st.composite
def params_strategy(draw, pi=st.floats(0.1, 5.0)):
    vals = {name: draw(rate) for name in RATE_NAMES if name != "Pi"}
    return ModelParams(Pi=draw(pi), **vals)


@st.composite
def positive_state(draw, lo=0.01, hi=10.0):
    return [draw(st.floats(lo, hi)) for _ in range(7)]
