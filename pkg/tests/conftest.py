import numpy as np
import pytest

from prominence import MarketConfig, PiecewiseLinearCdf, TiltedExponential, Uniform

ACCEPTANCE_RESULTS: dict[int, tuple[bool, str]] = {}

PWL_KNOTS = ((2.0, 0.0), (2.3, 0.2), (2.7, 0.75), (3.0, 1.0))


def family_zoo():
    return [Uniform(2.0), TiltedExponential(1.0), TiltedExponential(3.0),
            TiltedExponential(-1.5), PiecewiseLinearCdf(knots=PWL_KNOTS)]


@pytest.fixture
def uniform_cfg():
    return MarketConfig(2, 0.125, Uniform(2.0))


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_RESULTS):
        ok, detail = ACCEPTANCE_RESULTS[k]
        terminalreporter.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'} - {detail}")
